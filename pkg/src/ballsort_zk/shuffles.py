"""Pile-shifting and pile-scramble shuffles over the columns of a region.

Each shuffle draws from the Table's generator in a fixed order: one
``randrange(q)`` for a shift, and Fisher-Yates with ``randrange(i + 1)`` for
i = q-1 down to 1 for a scramble. The outcome goes to the Table's audit list,
never to the transcript.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .cards import TABLE, PileMatrix, Table


@dataclass(frozen=True)
class ShuffleOutcome:
    kind: str  # "shifting" | "scramble"
    secret: object  # offset, or permutation tuple (0-based source columns)


def shift_order(q: int, offset: int) -> list[int]:
    """Column order after shifting right by ``offset``: new column j holds old column j - offset."""
    return [(j - offset) % q for j in range(q)]


def random_permutation(rng, q: int) -> list[int]:
    perm = list(range(q))
    for i in range(q - 1, 0, -1):
        j = rng.randrange(i + 1)
        perm[i], perm[j] = perm[j], perm[i]
    return perm


def shift_columns(matrix: PileMatrix, offset: int) -> None:
    q = matrix.shape[1]
    order = shift_order(q, offset)
    matrix.rows = [[row[i] for i in order] for row in matrix.rows]


def permute_columns(matrix: PileMatrix, order: Sequence[int]) -> None:
    if sorted(order) != list(range(matrix.shape[1])):
        raise ValueError(f"{list(order)} is not a permutation of the columns")
    matrix.rows = [[row[i] for i in order] for row in matrix.rows]


def pile_shifting_shuffle(table: Table, region: str, rng=None, *, rigged_offset: Optional[int] = None) -> ShuffleOutcome:
    """Rotate the columns by a uniform secret offset.

    ``rigged_offset`` replaces the random draw. It exists only to build a
    deliberately broken protocol for the leak-detection tests; the transcript
    still claims an ordinary shuffle.
    """
    matrix = table.region(region)
    matrix.validate()
    q = matrix.shape[1]
    rng = table.rng if rng is None else rng
    offset = rng.randrange(q) if rigged_offset is None else rigged_offset
    shift_columns(matrix, offset)
    outcome = ShuffleOutcome("shifting", offset)
    table.shuffle_audit.append((region, outcome.kind, offset))
    table.log(TABLE, "shift_shuffle", region, {"columns": q})
    return outcome


def pile_scramble_shuffle(table: Table, region: str, rng=None) -> ShuffleOutcome:
    matrix = table.region(region)
    matrix.validate()
    q = matrix.shape[1]
    rng = table.rng if rng is None else rng
    perm = random_permutation(rng, q)
    permute_columns(matrix, perm)
    outcome = ShuffleOutcome("scramble", tuple(perm))
    table.shuffle_audit.append((region, outcome.kind, outcome.secret))
    table.log(TABLE, "scramble_shuffle", region, {"columns": q})
    return outcome
