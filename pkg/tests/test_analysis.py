import math
from fractions import Fraction

import pytest

from ballsort_zk.analysis import (TranscriptDistribution, compare_distributions, enumerate_outcomes,
                                  exact_real, exact_simulated, sample_real, sample_simulated,
                                  simulate_session)
from ballsort_zk.protocol import run_session
from ballsort_zk.puzzle import Move, PuzzleState, apply_move, is_sorted, legal_moves
from ballsort_zk.replay import SkeletonMismatch, verify_transcript

from conftest import DEMO, DEMO_SOLUTION, DEMO_SORTED

MICRO = PuzzleState(1, [[1], []])


def solutions_of_length(state, t):
    """Plain DFS over raw states, independent of the solver."""
    if t == 0:
        return [[]] if is_sorted(state) else []
    out = []
    for mv in legal_moves(state):
        for rest in solutions_of_length(apply_move(state, mv), t - 1):
            out.append([mv] + rest)
    return out


def test_enumeration_weights_sum_to_one():
    total = sum(p for p, _ in enumerate_outcomes(lambda rng: (rng.randrange(3), rng.randrange(2))))
    assert total == 1


def test_exact_zero_moves_on_sorted_state():
    real = exact_real(DEMO_SORTED, [])
    sim = exact_simulated(DEMO_SORTED, 0)
    assert real.total == sim.total == 1
    assert len(real.support) == math.factorial(4)
    report = compare_distributions(real, sim)
    assert report.mode == "exact" and report.exact_equal and report.passed


def test_exact_single_move():
    real = exact_real(MICRO, [Move(1, 2)])
    sim = exact_simulated(MICRO, 1)
    assert len(real.support) == len(sim.support) == 648
    assert real.support == sim.support
    assert compare_distributions(real, sim).passed


def test_exact_leaky_differs():
    from ballsort_zk.analysis import TranscriptDistribution
    real = TranscriptDistribution()
    for p, r in enumerate_outcomes(lambda rng: run_session(MICRO, [Move(1, 2)], rng, leaky=True)):
        real.add(r.transcript, p)
    report = compare_distributions(real, exact_simulated(MICRO, 1))
    assert not report.passed


def test_simulated_transcripts_verify():
    for seed in range(10):
        tr = simulate_session(DEMO, 5, seed=seed)
        assert verify_transcript(tr, DEMO)
        assert tr.skeleton() == run_session(DEMO, DEMO_SOLUTION, seed=seed).transcript.skeleton()


def test_real_against_real_passes():
    a = sample_real(DEMO, DEMO_SOLUTION, 1000, seed=1)
    b = sample_real(DEMO, DEMO_SOLUTION, 1000, seed=2)
    # loose TV bound: at 1000 samples the 24-way final reveal alone is noisy
    assert compare_distributions(a, b, tv_bound=0.2).passed


def test_two_solutions_look_alike():
    sols = solutions_of_length(DEMO, 5)
    assert DEMO_SOLUTION in sols and len(sols) > 1
    other = next(s for s in sols if s != DEMO_SOLUTION)
    a = sample_real(DEMO, DEMO_SOLUTION, 1000, seed=3)
    b = sample_real(DEMO, other, 1000, seed=4)
    assert compare_distributions(a, b, tv_bound=0.2).passed


def test_leaky_mutant_fails_sampled():
    real = sample_real(DEMO, DEMO_SOLUTION, 500, seed=5, leaky=True)
    sim = sample_simulated(DEMO, 5, 500, seed=5)
    report = compare_distributions(real, sim)
    assert not report.passed
    assert all("/cut-a" in s.site for s in report.failed_sites)


def test_mismatched_skeletons():
    a = TranscriptDistribution.of([simulate_session(DEMO, 1, seed=0)])
    b = TranscriptDistribution.of([simulate_session(DEMO, 2, seed=0)])
    with pytest.raises(SkeletonMismatch):
        compare_distributions(a, b)


def test_unequal_sample_sizes():
    a = TranscriptDistribution.of([simulate_session(DEMO, 0, seed=i) for i in range(3)])
    b = TranscriptDistribution.of([simulate_session(DEMO, 0, seed=i) for i in range(4)])
    with pytest.raises(ValueError):
        compare_distributions(a, b)


def test_report_json_roundtrip():
    import json
    real = exact_real(DEMO_SORTED, [])
    report = compare_distributions(real, exact_simulated(DEMO_SORTED, 0))
    d = json.loads(report.to_json())
    assert d["passed"] is True and d["mode"] == "exact"
    assert isinstance(real.total, Fraction)
