import itertools
import random
from collections import Counter

import pytest

from ballsort_zk.analysis import canonical_text, enumerate_outcomes
from ballsort_zk.cards import Card, ProtocolMisuse, Table, encode
from ballsort_zk.subprotocols import ACCEPT, Verdict, chosen_k_pile_cut, chosen_pile_cut, color_check


def _stacks(q, height=2):
    return [[Card(i), Card(100 + i)][:height] for i in range(q)]


def _cut_run(q, i, body=None):
    def run(rng):
        table = Table(rng)
        stacks = _stacks(q)
        before = [list(s) for s in stacks]
        seen = []

        def spy(sel):
            seen.append(sel.stack[0].face)
            return body(sel) if body else None

        verdict = chosen_pile_cut(table, "cut", stacks, i, spy)
        restored = all(a is b for s, t in zip(stacks, before) for a, b in zip(s, t))
        return verdict, restored, seen, table
    return run


@pytest.mark.parametrize("q", range(1, 6))
def test_pile_cut_restores_and_selects(q):
    for i in range(1, q + 1):
        outcomes = 0
        for _, (verdict, restored, seen, table) in enumerate_outcomes(_cut_run(q, i)):
            outcomes += 1
            assert verdict == ACCEPT and restored
            assert seen == [i - 1]
            assert not table.regions
        assert outcomes == q * q


@pytest.mark.parametrize("q", range(2, 6))
def test_pile_cut_transcript_hides_index(q):
    dists = []
    for i in range(1, q + 1):
        dist = Counter()
        for prob, (_, _, _, table) in enumerate_outcomes(_cut_run(q, i)):
            dist[canonical_text(table.transcript)] += prob
        dists.append(dist)
    assert all(d == dists[0] for d in dists)
    # Row 2's single 1 lands on each column with probability 1/q
    assert len(dists[0]) == q * q


def test_selection_neighbors_are_cyclic():
    def body(sel):
        assert sel.neighbor(-1)[0].face == (2 - 1) % 4
        assert sel.neighbor(1)[0].face == 3
    for seed in range(20):
        stacks = _stacks(4)
        assert chosen_pile_cut(Table(seed=seed), "cut", stacks, 3, body)

    def wrap(sel):
        assert sel.neighbor(-1)[0].face == 3
    assert chosen_pile_cut(Table(seed=0), "cut", _stacks(4), 1, wrap)


def test_malformed_helper_rejected():
    verdict = chosen_pile_cut(Table(seed=0), "cut", _stacks(4), 1, helper_faces=[1, 1, 0, 0])
    assert not verdict and verdict.step == "chosen-pile-cut/3"


def test_body_reject_aborts_without_restore():
    table = Table(seed=0)
    verdict = chosen_pile_cut(table, "cut", _stacks(3), 2, lambda sel: Verdict.reject("x", "no"))
    assert verdict == Verdict.reject("x", "no")
    assert table.transcript[-1].action == "reveal"


def test_body_exception_restores_then_propagates():
    table = Table(seed=0)
    stacks = _stacks(3)
    before = [s[0] for s in stacks]

    def boom(sel):
        raise KeyError("boom")
    with pytest.raises(KeyError):
        chosen_pile_cut(table, "cut", stacks, 2, boom)
    assert [s[0] for s in stacks] == before
    assert table.transcript[-1].action == "collect"


def test_body_keeping_a_stack_is_misuse():
    with pytest.raises(ProtocolMisuse):
        chosen_pile_cut(Table(seed=0), "cut", _stacks(3), 2, lambda sel: sel.stack.clear())


@pytest.mark.parametrize("q", range(1, 4))
def test_k_pile_cut_exhaustive(q):
    for k in range(1, q + 1):
        for gammas in itertools.permutations(range(1, q + 1), k):
            transcripts = Counter()

            def run(rng):
                stacks = _stacks(q)
                before = list(stacks)
                seen = []

                def body(*sels):
                    seen.extend(s.stack[0].face for s in sels)
                table = Table(rng)
                verdict = chosen_k_pile_cut(table, "k", stacks, gammas, body)
                return verdict, all(a is b for a, b in zip(stacks, before)), seen, table

            for prob, (verdict, restored, seen, table) in enumerate_outcomes(run):
                assert verdict and restored
                assert seen == [g - 1 for g in gammas]
                transcripts[canonical_text(table.transcript)] += prob
            if k == 1 or q <= 3:
                # any two selections of the same size look the same
                ref = Counter()
                ref_g = tuple(range(1, k + 1))

                def ref_run(rng):
                    table = Table(rng)
                    chosen_k_pile_cut(table, "k", _stacks(q), ref_g)
                    return table
                for prob, table in enumerate_outcomes(ref_run):
                    ref[canonical_text(table.transcript)] += prob
                assert transcripts == ref


def test_k_pile_cut_larger_seeded():
    for seed in range(50):
        rng = random.Random(seed)
        q = rng.randrange(4, 9)
        gammas = rng.sample(range(1, q + 1), rng.randrange(1, q + 1))
        stacks = _stacks(q)
        before = list(stacks)
        seen = []
        verdict = chosen_k_pile_cut(Table(seed=seed), "k", stacks, gammas,
                                    lambda *sels: seen.extend(s.stack[0].face for s in sels))
        assert verdict and seen == [g - 1 for g in gammas]
        assert all(a is b for a, b in zip(stacks, before))


def test_k_pile_cut_bad_helper():
    verdict = chosen_k_pile_cut(Table(seed=0), "k", _stacks(4), (1, 2), helper_faces=[1, 1, 0, 0])
    assert not verdict and verdict.step == "chosen-k-pile-cut/3"


def _color_rule(q, x1, x2):
    return 1 <= x1 <= q and (x2 == x1 or x2 == q + 1)


@pytest.mark.parametrize("q", range(2, 6))
def test_color_check_truth_table(q):
    for x1 in range(q + 2):
        for x2 in range(q + 2):
            for seed in range(3):
                e1, e2 = encode(q, x1), encode(q, x2)
                cards1, cards2 = list(e1.cards), list(e2.cards)
                verdict = color_check(Table(seed=seed), "c", e1, e2)
                assert bool(verdict) == _color_rule(q, x1, x2), (q, x1, x2)
                if verdict:
                    assert all(a is b for a, b in zip(e1.cards, cards1))
                    assert all(a is b for a, b in zip(e2.cards, cards2))
                elif 1 <= x1 <= q:
                    assert verdict.step == "color-check/4"
                else:
                    assert verdict.step == "color-check/3"


def test_color_check_single_color():
    # with q = 1 the "no color" code q+1 is the same card as color 1
    for x1 in range(3):
        for x2 in range(3):
            verdict = color_check(Table(seed=0), "c", encode(1, x1), encode(1, x2))
            assert bool(verdict) == (x1 > 0 and x2 > 0)


def test_color_check_hides_colors():
    q = 3
    dists = []
    for x1, x2 in [(1, 1), (2, 2), (3, 4), (2, 4)]:
        dist = Counter()

        def run(rng):
            table = Table(rng)
            color_check(table, "c", encode(q, x1), encode(q, x2))
            return table
        for prob, table in enumerate_outcomes(run):
            dist[canonical_text(table.transcript)] += prob
        dists.append(dist)
    assert all(d == dists[0] for d in dists)
