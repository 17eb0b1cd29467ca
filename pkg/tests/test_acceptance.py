"""Acceptance criteria, one test each. Every test prints a single PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines inline; without
``-s`` they still appear because they are written with capture disabled.
"""

import itertools
import math
import random
import time
from collections import Counter

import pytest
from scipy.stats import chisquare

from ballsort_zk.analysis import (compare_distributions, enumerate_outcomes, exact_real,
                                  exact_simulated, sample_real, sample_simulated)
from ballsort_zk.cards import Card, PileMatrix, Table, encode
from ballsort_zk.protocol import (CHEAT_CLASSES, CHEAT_STEP, WRONG_FINAL_STATE, all_witnesses,
                                  final_verification, first_failure, honest_witness, prove_move,
                                  run_session, setup_matrix)
from ballsort_zk.puzzle import Move, PuzzleState, all_states, is_sorted, is_valid_move, solve
from ballsort_zk.shuffles import pile_scramble_shuffle, pile_shifting_shuffle
from ballsort_zk.subprotocols import chosen_k_pile_cut, chosen_pile_cut, color_check

from conftest import DEMO, DEMO_SOLUTION, DEMO_SORTED


@pytest.fixture
def report(capsys):
    def emit(name, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} {name}: {detail}")
        return ok
    return emit


def test_completeness_demo_instance(report):
    start = time.perf_counter()
    accepted = sum(run_session(DEMO, DEMO_SOLUTION, seed=s).accepted for s in range(1000))
    elapsed = time.perf_counter() - start
    ok = accepted == 1000 and elapsed < 10
    assert report("completeness, demo instance", ok, f"{accepted}/1000 accepted in {elapsed:.2f}s (limit 10s)")


def _sweep_instances(cap=200):
    groups = []
    for h, n, m in itertools.product(range(1, 4), range(1, 4), range(3)):
        seen, group = set(), []
        for state in all_states(h, n, m):
            key = state.canonical()
            if key in seen:
                continue
            seen.add(key)
            sol = solve(state, 60)
            if sol is not None:
                group.append((state, sol))
        groups.append(group)
    # round-robin so every (h, n, m) is represented before the cap bites
    picked = []
    for batch in itertools.zip_longest(*groups):
        picked.extend(x for x in batch if x is not None)
    return picked[:cap]


def test_completeness_sweep(report):
    instances = _sweep_instances()
    failures = [(st, seed) for st, sol in instances for seed in range(20)
                if not run_session(st, sol, seed=seed).accepted]
    shapes = len({(st.h, st.n, st.m) for st, _ in instances})
    ok = not failures and len(instances) == 200
    assert report("completeness sweep", ok,
                  f"{len(instances)} instances over {shapes} (h,n,m) shapes x 20 seeds, {len(failures)} failures")


def test_soundness_exhaustive(report):
    states = list(all_states(2, 2, 1))
    runs = Counter()
    escapes = []
    oracle_disagreements = 0
    for state in states:
        honest = {honest_witness(state, Move(a, b))
                  for a, b in itertools.permutations(range(1, 4), 2) if is_valid_move(state, Move(a, b))}
        for w in all_witnesses(state):
            kind = first_failure(state, w)
            if (kind is None) != (w in honest):
                oracle_disagreements += 1
            if kind is None:
                continue
            for seed in range(100):
                table = Table(seed=seed)
                pm = setup_matrix(state, table)
                verdict = prove_move(table, pm, w)
                runs[kind] += 1
                if verdict or verdict.step != CHEAT_STEP[kind]:
                    escapes.append((state, w, seed, verdict))
        if not is_sorted(state):
            for seed in range(100):
                table = Table(seed=seed)
                verdict = final_verification(table, setup_matrix(state, table))
                runs[WRONG_FINAL_STATE] += 1
                if verdict:
                    escapes.append((state, None, seed, verdict))
    ok = not escapes and not oracle_disagreements and set(runs) == set(CHEAT_CLASSES)
    detail = ", ".join(f"{k}={runs[k]}" for k in CHEAT_CLASSES)
    assert report("soundness", ok, f"{len(states)} states; runs {detail}; {len(escapes)} accepted or misattributed; "
                                   f"{oracle_disagreements} oracle disagreements")


def test_color_check_oracle(report):
    mismatches = []
    for q in range(1, 5):
        for x1, x2 in itertools.product(range(q + 2), repeat=2):
            expected = 1 <= x1 <= q and (x2 == x1 or x2 == q + 1)
            got = bool(color_check(Table(seed=q * 100 + x1 * 10 + x2), "c", encode(q, x1), encode(q, x2)))
            if got != expected:
                mismatches.append((q, x1, x2, got))
    assert report("color-check oracle equivalence", not mismatches,
                  f"{len(mismatches)} mismatches over q=1..4 {mismatches}")


def _layout(stacks):
    return [[(id(c), c.face, c.face_up) for c in s] for s in stacks]


def _stacks(q):
    return [[Card(i % 2), Card((i + 1) % 2)] for i in range(q)]


def test_restoration(report):
    bad = []
    checked = 0
    for q in range(1, 6):
        for i in range(1, q + 1):
            def cut(rng):
                stacks = _stacks(q)
                before = _layout(stacks)
                verdict = chosen_pile_cut(Table(rng), "cut", stacks, i)
                return verdict and _layout(stacks) == before
            for _, ok in enumerate_outcomes(cut):
                checked += 1
                if not ok:
                    bad.append(("pile", q, i))
        for k in range(1, q + 1):
            for gammas in itertools.permutations(range(1, q + 1), k):
                for seed in range(10):
                    stacks = _stacks(q)
                    before = _layout(stacks)
                    checked += 1
                    if not (chosen_k_pile_cut(Table(seed=seed), "k", stacks, gammas) and _layout(stacks) == before):
                        bad.append(("k-pile", q, gammas, seed))
        for x1 in range(1, q + 1):
            for x2 in (x1, q + 1):
                def check(rng):
                    e1, e2 = encode(q, x1), encode(q, x2)
                    before = _layout([e1.cards, e2.cards])
                    return color_check(Table(rng), "c", e1, e2) and _layout([e1.cards, e2.cards]) == before
                for _, ok in enumerate_outcomes(check):
                    checked += 1
                    if not ok:
                        bad.append(("color", q, x1, x2))
    assert report("restoration", not bad, f"{checked} runs over q<=5, {len(bad)} layouts changed")


def test_card_count(report):
    wrong = []
    for h, n, m in itertools.product(range(1, 5), range(1, 5), range(3)):
        state = PuzzleState(h, [[c] * h for c in range(1, n + 1)] + [[]] * m)
        if setup_matrix(state).card_count != n * (h + 2) * (n + m):
            wrong.append((h, n, m))
    demo = setup_matrix(DEMO).card_count
    ok = not wrong and demo == 60
    assert report("card count", ok, f"demo instance {demo} cards; formula off on {len(wrong)} of 48 shapes")


def test_zero_knowledge_exact(report):
    cases = [DEMO_SORTED, PuzzleState(2, [[2, 2], [], [1, 1]]), PuzzleState(1, [[1], []]),
             PuzzleState(2, [[1, 1], [2, 2]]), PuzzleState(1, [[], [3], [1], [2]])]
    lines = []
    ok = True
    for state in cases:
        real, sim = exact_real(state, []), exact_simulated(state, 0)
        cols = state.n + state.m
        equal = real.support == sim.support and len(real.support) == math.factorial(cols) \
            and real.total == sim.total == 1
        ok &= equal and compare_distributions(real, sim).passed
        lines.append(f"n+m={cols}:{len(real.support)}")
    assert report("zero-knowledge, exact", ok, f"t=0 support sizes {', '.join(lines)} identical real vs simulated")


def test_zero_knowledge_statistical(report):
    samples = 10_000
    real = sample_real(DEMO, DEMO_SOLUTION, samples, seed=0)
    sim = sample_simulated(DEMO, 5, samples, seed=0)
    honest = compare_distributions(real, sim)
    leaky = compare_distributions(sample_real(DEMO, DEMO_SOLUTION, samples, seed=0, leaky=True), sim)
    min_p = min(s.p_value for s in honest.sites)
    ok = honest.passed and not leaky.passed
    assert report("zero-knowledge, statistical", ok,
                  f"{samples} samples, {len(honest.sites)} sites, honest max TV {honest.max_tv:.4f} "
                  f"min p {min_p:.4f}; leaky mutant max TV {leaky.max_tv:.3f}, "
                  f"{len(leaky.failed_sites)} failed sites")


def _row(q):
    return PileMatrix([[[Card(i)] for i in range(q)]])


def test_shuffle_uniformity(report):
    rng = random.Random(2024)
    offsets = Counter()
    for _ in range(10_000):
        table = Table(rng)
        table.open_region("R", _row(5))
        offsets[pile_shifting_shuffle(table, "R").secret] += 1
    perms = Counter()
    for _ in range(12_000):
        table = Table(rng)
        table.open_region("R", _row(3))
        perms[pile_scramble_shuffle(table, "R").secret] += 1
    p_shift = chisquare([offsets[k] for k in range(5)]).pvalue
    p_perm = chisquare([perms[p] for p in itertools.permutations(range(3))]).pvalue
    ok = p_shift >= 0.001 and p_perm >= 0.001 and len(perms) == 6
    assert report("shuffle uniformity", ok, f"offsets q=5 p={p_shift:.4f}; permutations q=3 p={p_perm:.4f}")
