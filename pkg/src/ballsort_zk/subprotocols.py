"""Chosen pile cut, chosen k-pile cut, and the color checking protocol.

Each selection protocol lends the chosen stacks to a ``body`` callback and
then restores the input sequence. The body returns a Verdict (None counts as
accept). A reject stops everything on the spot: the verifier has walked away,
so no restoration happens and the transcript ends at the failed check. If the
body raises instead, the restore still runs before the exception propagates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .cards import Card, PileMatrix, ProtocolMisuse, Stack, Table, encoding_faces
from .shuffles import pile_scramble_shuffle, pile_shifting_shuffle, shift_order


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    step: Optional[str] = None
    reason: str = ""

    def __bool__(self):
        return self.accepted

    @classmethod
    def reject(cls, step, reason: str) -> "Verdict":
        return cls(False, str(step), reason)

    def __str__(self):
        return "accept" if self.accepted else f"reject(step {self.step}: {self.reason})"


ACCEPT = Verdict(True)

SELECTING, BORROWED, RESTORED = "selecting", "borrowed", "restored"


def _single_cards(faces: Sequence[int]) -> list[Stack]:
    return [[Card(f)] for f in faces]


def _flat(faces: list[list[int]]) -> list[int]:
    return [f for cell in faces for f in cell]


class SelectionSession:
    """The 3-row matrix of one selection protocol and its lending phase."""

    def __init__(self, table: Table, region: str, stacks: list[Stack]):
        heights = {len(s) for s in stacks}
        if len(heights) > 1:
            raise ProtocolMisuse(f"stacks of unequal heights {sorted(heights)}")
        self.table = table
        self.region = region
        self.source = stacks
        self.q = len(stacks)
        self.height = heights.pop() if heights else 0
        self.matrix = table.open_region(region, PileMatrix([[], [], []]))
        self.phase = SELECTING

    def lend(self) -> None:
        if self.phase != SELECTING:
            raise ProtocolMisuse(f"cannot lend stacks while {self.phase}")
        self.phase = BORROWED

    def check_returned(self) -> None:
        if self.phase != BORROWED:
            raise ProtocolMisuse(f"nothing borrowed in phase {self.phase}")
        row = self.matrix.rows[0]
        if len(row) != self.q or any(len(s) != self.height for s in row):
            raise ProtocolMisuse(f"borrowed stacks of {self.region} were not all returned")

    def finish(self) -> None:
        self.table.close_region(self.region)
        self.source[:] = self.matrix.rows[0]
        self.phase = RESTORED
        self.table.log("table", "collect", self.region, {"columns": self.q})


@dataclass
class Selection:
    """A stack lent out by a selection protocol, at its shuffled column."""

    session: SelectionSession
    column: int  # 0-based column in the shuffled matrix

    @property
    def region(self) -> str:
        return self.session.region

    @property
    def stack(self) -> Stack:
        return self.session.matrix.rows[0][self.column]

    def neighbor_column(self, offset: int) -> int:
        return (self.column + offset) % self.session.q

    def neighbor(self, offset: int) -> Stack:
        return self.session.matrix.rows[0][self.neighbor_column(offset)]


def swap_selected(table: Table, a: Selection, b: Selection) -> None:
    """Physically exchange two lent stacks; nobody sees their faces."""
    row_a = a.session.matrix.rows[0]
    row_b = b.session.matrix.rows[0]
    row_a[a.column], row_b[b.column] = row_b[b.column], row_a[a.column]
    table.log("prover", "swap", a.region, {
        "with": b.region, "columns": [a.column + 1, b.column + 1]})


def _run_body(session: SelectionSession, body, args, restore) -> Optional[Verdict]:
    session.lend()
    try:
        verdict = body(*args) if body is not None else None
    except Exception:
        if session.phase == BORROWED and session.region in session.table.regions:
            try:
                session.check_returned()
                restore()
            except ProtocolMisuse:
                pass
        raise
    if verdict is not None and not verdict:
        return verdict
    session.check_returned()
    return None


def chosen_pile_cut(table: Table, region: str, stacks: list[Stack], secret_i: int,
                    body: Optional[Callable[[Selection], Optional[Verdict]]] = None,
                    *, helper_faces: Optional[Sequence[int]] = None,
                    rigged_first_shift: Optional[int] = None) -> Verdict:
    """Lend ``stacks[secret_i - 1]`` to ``body`` without revealing the index.

    ``stacks`` is rearranged in place back to its original order afterwards.
    ``helper_faces`` lets a dishonest prover place an arbitrary Row 2 instead
    of E_q(secret_i).
    """
    q = len(stacks)
    if helper_faces is None:
        if not 1 <= secret_i <= q:
            raise ValueError(f"secret index {secret_i} outside 1..{q}")
        helper_faces = encoding_faces(q, secret_i)
    session = SelectionSession(table, region, stacks)
    table.arrange(region, 0, list(stacks))
    table.place(region, 1, _single_cards(helper_faces), secret=True)
    table.place(region, 2, _single_cards(encoding_faces(q, 1)), secret=False)
    pile_shifting_shuffle(table, region, rigged_offset=rigged_first_shift)

    row2 = _flat(table.reveal_row(region, 1))
    if sorted(row2) != [0] * (q - 1) + [1]:
        return Verdict.reject("chosen-pile-cut/3", f"Row 2 shows {row2}, not a single 1")
    selection = Selection(session, row2.index(1))

    def restore():
        table.face_down_all(region)
        pile_shifting_shuffle(table, region)
        row3 = _flat(table.reveal_row(region, 2))
        if sorted(row3) != [0] * (q - 1) + [1]:
            return Verdict.reject("chosen-pile-cut/6", f"Row 3 shows {row3}, not a single 1")
        shift = row3.index(1)
        table.rearrange(region, shift_order(q, -shift), "realign", {"shift": shift})
        session.finish()
        return ACCEPT

    failed = _run_body(session, body, (selection,), restore)
    if failed is not None:
        return failed
    return restore()


def chosen_k_pile_cut(table: Table, region: str, stacks: list[Stack], secret_gammas: Sequence[int],
                      body: Optional[Callable[..., Optional[Verdict]]] = None,
                      *, helper_faces: Optional[Sequence[int]] = None) -> Verdict:
    """Lend ``stacks[g - 1]`` for each g in ``secret_gammas`` to ``body``, in that order."""
    q = len(stacks)
    k = len(secret_gammas)
    if helper_faces is None:
        if not 1 <= k <= q:
            raise ValueError(f"k={k} outside 1..{q}")
        if len(set(secret_gammas)) != k:
            raise ValueError(f"selected indices {list(secret_gammas)} are not distinct")
        if any(not 1 <= g <= q for g in secret_gammas):
            raise ValueError(f"selected indices {list(secret_gammas)} outside 1..{q}")
        faces = [0] * q
        for label, g in enumerate(secret_gammas, 1):
            faces[g - 1] = label
        helper_faces = faces
    session = SelectionSession(table, region, stacks)
    table.arrange(region, 0, list(stacks))
    table.place(region, 1, _single_cards(helper_faces), secret=True)
    table.place(region, 2, _single_cards(range(1, q + 1)), secret=False)
    pile_scramble_shuffle(table, region)

    row2 = _flat(table.reveal_row(region, 1))
    if sorted(row2) != [0] * (q - k) + list(range(1, k + 1)):
        return Verdict.reject("chosen-k-pile-cut/3", f"Row 2 shows {row2}, not 1..{k} among 0s")
    selections = [Selection(session, row2.index(label)) for label in range(1, k + 1)]

    def restore():
        table.face_down_all(region)
        pile_scramble_shuffle(table, region)
        row3 = _flat(table.reveal_row(region, 2))
        if sorted(row3) != list(range(1, q + 1)):
            return Verdict.reject("chosen-k-pile-cut/6", f"Row 3 shows {row3}, not 1..{q}")
        order = [row3.index(label) for label in range(1, q + 1)]
        table.rearrange(region, order, "realign", {"order": [i + 1 for i in order]})
        session.finish()
        return ACCEPT

    failed = _run_body(session, body, selections, restore)
    if failed is not None:
        return failed
    return restore()


def color_check(table: Table, region: str, e1, e2) -> Verdict:
    """Accept iff e1 encodes a real color x1 in 1..q and e2 is x1 or q+1.

    ``e1`` and ``e2`` are face-down stacks (or Encodings) of q cards each. They
    are laid out as rows, checked, and written back in their original order.
    """
    s1 = getattr(e1, "cards", e1)
    s2 = getattr(e2, "cards", e2)
    q = len(s1)
    if len(s2) != q:
        raise ProtocolMisuse(f"color check on encodings of lengths {q} and {len(s2)}")
    table.open_region(region, PileMatrix([[], [], []]))
    table.arrange(region, 0, [[c] for c in s1])
    table.arrange(region, 1, [[c] for c in s2])
    table.place(region, 2, _single_cards(encoding_faces(q, 1)), secret=False)
    pile_shifting_shuffle(table, region)

    row1 = _flat(table.reveal_row(region, 0))
    if sorted(row1) != [0] * (q - 1) + [1]:
        return Verdict.reject("color-check/3", f"Row 1 shows {row1}: not a real color")
    j = row1.index(1)
    (card,) = table.reveal(region, [(1, j)])
    if card != [1]:
        return Verdict.reject("color-check/4", f"Row 2 column {j + 1} shows {card[0]}: color mismatch")

    table.face_down_all(region)
    pile_shifting_shuffle(table, region)
    row3 = _flat(table.reveal_row(region, 2))
    if sorted(row3) != [0] * (q - 1) + [1]:
        return Verdict.reject("color-check/6", f"Row 3 shows {row3}, not a single 1")
    shift = row3.index(1)
    table.rearrange(region, shift_order(q, -shift), "realign", {"shift": shift})
    matrix = table.close_region(region)
    s1[:] = [cell[0] for cell in matrix.rows[0]]
    s2[:] = [cell[0] for cell in matrix.rows[1]]
    table.log("table", "collect", region, {"columns": q})
    return ACCEPT
