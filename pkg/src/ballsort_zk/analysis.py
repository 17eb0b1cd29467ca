"""Zero-knowledge checks: a solution-free simulator and distribution comparisons.

The simulator writes transcripts directly from the public puzzle and the move
count, drawing every revealed face from the distribution the shuffles should
produce. Real and simulated transcripts are compared site by site (one site
per reveal event) with a two-sample chi-square test and total variation
distance, or exactly when every random draw can be enumerated.
"""

from __future__ import annotations

import hashlib
import json
import random
from collections import Counter
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from scipy.stats import chi2_contingency

from .cards import PROVER, TABLE, VERIFIER, Transcript, encoding_faces
from .protocol import MATRIX, column_values, final_columns, region_names, run_session
from .puzzle import Move, PuzzleState
from .replay import SkeletonMismatch
from .shuffles import random_permutation

ALPHA = 0.001
TV_BOUND = 0.05


# -- simulator ----------------------------------------------------------------


class _Writer:
    def __init__(self, rng):
        self.rng = rng
        self.tr = Transcript()

    def ev(self, actor, action, region, params=None, faces=None):
        self.tr.append(actor, action, region, params, faces)

    def one_hot_row(self, region, row, q):
        j = self.rng.randrange(q)
        self.ev(VERIFIER, "reveal", region, {"positions": [[row, c] for c in range(1, q + 1)]},
                [[int(c == j)] for c in range(q)])
        return j

    def pile_cut(self, region, q, inner):
        self.ev(PROVER, "arrange", region, {"row": 1, "columns": q})
        self.ev(PROVER, "place", region, {"row": 2, "visibility": "secret"})
        self.ev(PROVER, "place", region, {"row": 3, "visibility": "public"}, [[int(c == 0)] for c in range(q)])
        self.ev(TABLE, "shift_shuffle", region, {"columns": q})
        j = self.one_hot_row(region, 2, q)
        inner(j)
        self.ev(TABLE, "face_down", region)
        self.ev(TABLE, "shift_shuffle", region, {"columns": q})
        shift = self.one_hot_row(region, 3, q)
        self.ev(TABLE, "realign", region, {"shift": shift})
        self.ev(TABLE, "collect", region, {"columns": q})

    def color_check(self, region, q):
        self.ev(PROVER, "arrange", region, {"row": 1, "columns": q})
        self.ev(PROVER, "arrange", region, {"row": 2, "columns": q})
        self.ev(PROVER, "place", region, {"row": 3, "visibility": "public"}, [[int(c == 0)] for c in range(q)])
        self.ev(TABLE, "shift_shuffle", region, {"columns": q})
        j = self.one_hot_row(region, 1, q)
        self.ev(VERIFIER, "reveal", region, {"positions": [[2, j + 1]]}, [[1]])
        self.ev(TABLE, "face_down", region)
        self.ev(TABLE, "shift_shuffle", region, {"columns": q})
        shift = self.one_hot_row(region, 3, q)
        self.ev(TABLE, "realign", region, {"shift": shift})
        self.ev(TABLE, "collect", region, {"columns": q})

    def move(self, k, h, n, m):
        names = region_names(k)
        cols, size = n + m, h + 2
        self.ev(PROVER, "stack_columns", MATRIX, {"columns": cols})
        region = names["columns"]
        self.ev(PROVER, "arrange", region, {"row": 1, "columns": cols})
        self.ev(PROVER, "place", region, {"row": 2, "visibility": "secret"})
        self.ev(PROVER, "place", region, {"row": 3, "visibility": "public"}, [[c] for c in range(1, cols + 1)])
        self.ev(TABLE, "scramble_shuffle", region, {"columns": cols})
        helper = [1, 2] + [0] * (cols - 2)
        perm = random_permutation(self.rng, cols)
        row2 = [helper[i] for i in perm]
        self.ev(VERIFIER, "reveal", region, {"positions": [[2, c] for c in range(1, cols + 1)]},
                [[f] for f in row2])
        col_a, col_b = row2.index(1) + 1, row2.index(2) + 1
        self.ev(PROVER, "unstack", region, {"column": col_a, "stacks": size})
        self.ev(PROVER, "unstack", region, {"column": col_b, "stacks": size})
        zeros = [0] * n

        def with_a(ja):
            def with_b(jb):
                self.ev(VERIFIER, "reveal", names["cut_a"], {"positions": [[1, (ja - 1) % size + 1]]}, [zeros])
                self.ev(VERIFIER, "reveal", names["cut_b"], {"positions": [[1, (jb - 1) % size + 1]]}, [zeros])
                self.ev(VERIFIER, "reveal", names["cut_b"], {"positions": [[1, jb + 1]]}, [zeros])
                self.ev(TABLE, "face_down", names["cut_a"])
                self.ev(TABLE, "face_down", names["cut_b"])
                self.color_check(names["color"], n)
                self.ev(PROVER, "swap", names["cut_a"], {"with": names["cut_b"], "columns": [ja + 1, jb + 1]})

            self.pile_cut(names["cut_b"], size, with_b)

        self.pile_cut(names["cut_a"], size, with_a)
        self.ev(PROVER, "restack", region, {"column": col_a})
        self.ev(PROVER, "restack", region, {"column": col_b})
        self.ev(TABLE, "face_down", region)
        self.ev(TABLE, "scramble_shuffle", region, {"columns": cols})
        perm = random_permutation(self.rng, cols)
        row3 = [p + 1 for p in perm]
        self.ev(VERIFIER, "reveal", region, {"positions": [[3, c] for c in range(1, cols + 1)]},
                [[f] for f in row3])
        self.ev(TABLE, "realign", region, {"order": [row3.index(c) + 1 for c in range(1, cols + 1)]})
        self.ev(TABLE, "collect", region, {"columns": cols})
        self.ev(PROVER, "unstack_columns", MATRIX, {"columns": cols})


def simulate_session(puzzle: PuzzleState, t: int, rng=None, *, seed: Optional[int] = None) -> Transcript:
    """A transcript for ``t`` moves on ``puzzle``, produced without any solution."""
    rng = random.Random(seed) if rng is None else rng
    h, n, m = puzzle.h, puzzle.n, puzzle.m
    cols = n + m
    w = _Writer(rng)
    w.ev(TABLE, "begin", MATRIX, {"h": h, "n": n, "m": m, "t": t})
    initial = [column_values(puzzle, c) for c in range(1, cols + 1)]
    w.ev(PROVER, "place", MATRIX, {"rows": h + 2, "columns": cols, "visibility": "public"},
         [list(encoding_faces(n, initial[c][r])) for r in range(h + 2) for c in range(cols)])
    for k in range(1, t + 1):
        w.move(k, h, n, m)
    w.ev(TABLE, "scramble_shuffle", MATRIX, {"columns": cols})
    sorted_cols = sorted(final_columns(h, n, m).elements())
    perm = random_permutation(rng, cols)
    final = [sorted_cols[i] for i in perm]
    w.ev(VERIFIER, "reveal", MATRIX,
         {"positions": [[r, c] for r in range(1, h + 3) for c in range(1, cols + 1)]},
         [list(final[c][r]) for r in range(h + 2) for c in range(cols)])
    return w.tr


# -- exact enumeration ----------------------------------------------------------


class _PathRandom:
    """Follows a fixed prefix of choices, then takes 0 and records each range."""

    def __init__(self, prefix):
        self.prefix = prefix
        self.choices = []
        self.ranges = []

    def randrange(self, k):
        i = len(self.choices)
        c = self.prefix[i] if i < len(self.prefix) else 0
        self.choices.append(c)
        self.ranges.append(k)
        return c


def enumerate_outcomes(fn: Callable):
    """Yield (probability, fn(rng)) over every sequence of ``randrange`` results.

    ``fn`` must draw randomness only through ``rng.randrange(k)``.
    """
    pending = [[]]
    while pending:
        prefix = pending.pop()
        rng = _PathRandom(prefix)
        result = fn(rng)
        prob = Fraction(1)
        for k in rng.ranges:
            prob /= k
        for i in range(len(prefix), len(rng.choices)):
            for c in range(1, rng.ranges[i]):
                pending.append(rng.choices[:i] + [c])
        yield prob, result


# -- distributions --------------------------------------------------------------


def canonical_text(transcript: Transcript) -> str:
    """Observable content in order, without sequence numbers."""
    return repr(transcript.canonical())


def _site_value(ev) -> tuple:
    return ev.key()[3:]


class TranscriptDistribution:
    """Weighted transcripts of one (puzzle, t), kept as per-site tallies.

    Whole transcripts are keyed by a SHA-256 of their canonical text so large
    samples stay small in memory.
    """

    def __init__(self):
        self.skeleton: Optional[tuple] = None
        self.total = 0
        self.support: Counter = Counter()
        self.sites: list[Counter] = []
        self.site_labels: list[str] = []

    def add(self, transcript: Transcript, weight=1) -> None:
        skeleton = transcript.skeleton()
        if self.skeleton is None:
            self.skeleton = skeleton
            reveals = [i for i, ev in enumerate(transcript) if ev.action == "reveal"]
            self._site_index = reveals
            self.sites = [Counter() for _ in reveals]
            self.site_labels = [f"#{transcript[i].seq_no} {transcript[i].region}" for i in reveals]
        elif skeleton != self.skeleton:
            raise SkeletonMismatch("transcripts with different event skeletons in one distribution")
        self.total += weight
        digest = hashlib.sha256(canonical_text(transcript).encode()).hexdigest()
        self.support[digest] += weight
        for counter, i in zip(self.sites, self._site_index):
            counter[_site_value(transcript[i])] += weight

    @classmethod
    def of(cls, transcripts, weights=None) -> "TranscriptDistribution":
        dist = cls()
        for i, tr in enumerate(transcripts):
            dist.add(tr, 1 if weights is None else weights[i])
        return dist


def sample_real(puzzle: PuzzleState, solution: Sequence[Move], samples: int, seed: int = 0,
                *, leaky: bool = False) -> TranscriptDistribution:
    dist = TranscriptDistribution()
    for i in range(samples):
        result = run_session(puzzle, solution, random.Random(f"real:{seed}:{i}"), leaky=leaky)
        dist.add(result.transcript)
    return dist


def sample_simulated(puzzle: PuzzleState, t: int, samples: int, seed: int = 0) -> TranscriptDistribution:
    dist = TranscriptDistribution()
    for i in range(samples):
        dist.add(simulate_session(puzzle, t, random.Random(f"sim:{seed}:{i}")))
    return dist


def exact_real(puzzle: PuzzleState, solution: Sequence[Move]) -> TranscriptDistribution:
    dist = TranscriptDistribution()
    for prob, result in enumerate_outcomes(lambda rng: run_session(puzzle, solution, rng)):
        dist.add(result.transcript, prob)
    return dist


def exact_simulated(puzzle: PuzzleState, t: int) -> TranscriptDistribution:
    dist = TranscriptDistribution()
    for prob, tr in enumerate_outcomes(lambda rng: simulate_session(puzzle, t, rng)):
        dist.add(tr, prob)
    return dist


# -- comparison -----------------------------------------------------------------


@dataclass
class SiteStat:
    site: str
    categories: int
    tv: float
    chi2: Optional[float]
    p_value: Optional[float]
    passed: bool


@dataclass
class ComparisonReport:
    mode: str  # "sampled" | "exact"
    samples_real: float
    samples_sim: float
    alpha: float
    tv_bound: float
    support_equal: bool
    exact_equal: Optional[bool]
    max_tv: float
    sites: list = field(default_factory=list)
    passed: bool = False

    @property
    def failed_sites(self) -> list:
        return [s for s in self.sites if not s.passed]

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _tv(a: Counter, b: Counter, ta, tb) -> float:
    keys = set(a) | set(b)
    return float(sum(abs(Fraction(a[k]) / ta - Fraction(b[k]) / tb) for k in keys) / 2)


def compare_distributions(real: TranscriptDistribution, sim: TranscriptDistribution,
                          alpha: float = ALPHA, tv_bound: float = TV_BOUND) -> ComparisonReport:
    """Site-by-site comparison of two transcript distributions.

    Integer totals are treated as samples: each reveal site gets a two-sample
    chi-square test at ``alpha`` and a TV estimate, and the comparison passes
    when every site passes and the largest TV is below ``tv_bound``. Fractional
    totals (from exact enumeration) pass only on exact equality.
    """
    if real.skeleton != sim.skeleton:
        raise SkeletonMismatch("real and simulated transcripts have different event skeletons")
    exact = isinstance(real.total, Fraction) or isinstance(sim.total, Fraction)
    if not exact and real.total != sim.total:
        raise ValueError(f"sample sizes differ: {real.total} vs {sim.total}")
    stats = []
    for label, a, b in zip(real.site_labels, real.sites, sim.sites):
        keys = sorted(set(a) | set(b))
        tv = _tv(a, b, real.total, sim.total)
        if exact:
            stats.append(SiteStat(label, len(keys), tv, None, None, a == b))
            continue
        if len(keys) < 2:
            stats.append(SiteStat(label, len(keys), tv, 0.0, 1.0, True))
            continue
        chi2, p, _, _ = chi2_contingency([[a[k] for k in keys], [b[k] for k in keys]], correction=False)
        stats.append(SiteStat(label, len(keys), tv, float(chi2), float(p), bool(p >= alpha)))
    max_tv = max((s.tv for s in stats), default=0.0)
    support_equal = set(real.support) == set(sim.support)
    if exact:
        exact_equal = real.support == sim.support
        passed = exact_equal
    else:
        exact_equal = None
        passed = all(s.passed for s in stats) and max_tv < tv_bound
    return ComparisonReport("exact" if exact else "sampled", float(real.total), float(sim.total),
                            alpha, tv_bound, support_equal, exact_equal, max_tv, stats, passed)
