"""The full proof session: setup, one proof procedure per move, final check.

Every bin becomes a column of h+2 stacks, each stack E_n(v) for a ball number
v: a 0 sentinel on top, 0s for empty slots, the balls top-down, and n+1 under
the bin. Rows are counted from the top (row 1 is the sentinel above the bin).
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence

from .cards import (PROVER, TABLE, Card, MalformedEncoding, PileMatrix, Table, Transcript,
                    decode, encoding_faces, stack_column, unstack_column)
from .puzzle import Move, PuzzleError, PuzzleState, is_sorted, replay
from .shuffles import pile_scramble_shuffle
from .subprotocols import (ACCEPT, Verdict, chosen_k_pile_cut, chosen_pile_cut, color_check,
                           swap_selected)

MATRIX = "M"

NON_TOPMOST_SOURCE = "non-topmost-source"
DUMMY_SOURCE = "dummy-source"
BURIED_DESTINATION = "buried-destination"
OCCUPIED_DESTINATION = "occupied-destination"
COLOR_MISMATCH = "color-mismatch"
WRONG_FINAL_STATE = "wrong-final-state"
MOVE_CHEATS = (NON_TOPMOST_SOURCE, BURIED_DESTINATION, OCCUPIED_DESTINATION, DUMMY_SOURCE, COLOR_MISMATCH)
CHEAT_CLASSES = MOVE_CHEATS + (WRONG_FINAL_STATE,)
# main-protocol step at which each cheat is caught
CHEAT_STEP = {
    NON_TOPMOST_SOURCE: "4",
    BURIED_DESTINATION: "4",
    OCCUPIED_DESTINATION: "4",
    DUMMY_SOURCE: "5",
    COLOR_MISMATCH: "5",
    WRONG_FINAL_STATE: "final",
}


def region_names(move_no: int) -> dict[str, str]:
    base = f"move{move_no}"
    return {
        "columns": f"{base}/columns",
        "cut_a": f"{base}/cut-a",
        "cut_b": f"{base}/cut-b",
        "color": f"{base}/color",
    }


@dataclass(frozen=True)
class MoveWitness:
    """Prover's secret for one move: columns A, B and stack rows x, y (1-based)."""

    src: int
    dst: int
    x: int
    y: int


@dataclass
class ProtocolMatrix:
    h: int
    n: int
    m: int
    inner: PileMatrix

    @property
    def card_count(self) -> int:
        return sum(1 for _ in self.inner.cards())


@dataclass
class SessionResult:
    verdict: Verdict
    transcript: Transcript
    moves_executed: int

    @property
    def accepted(self) -> bool:
        return self.verdict.accepted


def column_values(state: PuzzleState, col: int) -> list[int]:
    """Ball numbers of column ``col`` (1-based), top row first."""
    bin_ = state.bins[col - 1]
    return [0] * (state.h + 1 - len(bin_)) + list(reversed(bin_)) + [state.n + 1]


def setup_matrix(state: PuzzleState, table: Optional[Table] = None) -> ProtocolMatrix:
    """Build the (h+2) x (n+m) matrix for ``state``; if a table is given, place it there publicly."""
    h, n, m = state.h, state.n, state.m
    columns = [column_values(state, c) for c in range(1, n + m + 1)]
    values = [[columns[c][r] for c in range(n + m)] for r in range(h + 2)]
    inner = PileMatrix([[[Card(f) for f in encoding_faces(n, v)] for v in row] for row in values])
    pm = ProtocolMatrix(h, n, m, inner)
    if table is not None:
        table.open_region(MATRIX, inner)
        table.log(PROVER, "place", MATRIX,
                  {"rows": h + 2, "columns": n + m, "visibility": "public"},
                  [[c.face for c in cell] for row in inner.rows for cell in row])
    return pm


def decode_matrix(pm: ProtocolMatrix) -> PuzzleState:
    """Privileged read-back of the puzzle state a matrix encodes."""
    bins = []
    for c in range(pm.n + pm.m):
        vals = [decode(cell) for cell in pm.inner.column(c)]
        if vals[0] != 0 or vals[-1] != pm.n + 1:
            raise MalformedEncoding(f"column {c + 1} lost its sentinels: {vals}")
        # n = 1: a ball card is indistinguishable from the sentinel card
        bins.append([1 if pm.n == 1 else v for v in reversed(vals[1:-1]) if v != 0])
    return PuzzleState(pm.h, bins)


def honest_witness(state: PuzzleState, mv: Move) -> MoveWitness:
    src_len = len(state.bins[mv.src - 1])
    dst_len = len(state.bins[mv.dst - 1])
    return MoveWitness(mv.src, mv.dst, x=state.h + 2 - src_len, y=state.h + 1 - dst_len)


def first_failure(state: PuzzleState, w: MoveWitness) -> Optional[str]:
    """Plaintext prediction of the first check a witness fails, as a cheat class.

    Checks are listed in the order the protocol performs them; None means the
    witness passes every check.
    """
    count = len(state.bins)
    if w.src == w.dst or not (1 <= w.src <= count and 1 <= w.dst <= count):
        raise PuzzleError(f"witness columns {w.src}, {w.dst} are not two distinct bins")
    size = state.h + 2
    if not (1 <= w.x <= size and 1 <= w.y <= size):
        raise PuzzleError(f"witness rows {w.x}, {w.y} outside 1..{size}")
    a = column_values(state, w.src)
    b = column_values(state, w.dst)

    def at(col, i):
        return col[(i - 1) % size]

    if at(a, w.x - 1) != 0:
        return NON_TOPMOST_SOURCE
    if at(b, w.y - 1) != 0:
        return BURIED_DESTINATION
    if at(b, w.y) != 0:
        return OCCUPIED_DESTINATION
    if not 1 <= at(a, w.x) <= state.n:
        return DUMMY_SOURCE
    if at(b, w.y + 1) not in (at(a, w.x), state.n + 1):
        return COLOR_MISMATCH
    return None


def all_witnesses(state: PuzzleState):
    count = len(state.bins)
    size = state.h + 2
    for src in range(1, count + 1):
        for dst in range(1, count + 1):
            if src == dst:
                continue
            for x in range(1, size + 1):
                for y in range(1, size + 1):
                    yield MoveWitness(src, dst, x, y)


def _as_step(verdict: Verdict, step: str) -> Verdict:
    if verdict or not verdict.step.startswith(("chosen-", "color-")):
        return verdict
    return Verdict.reject(step, f"{verdict.step}: {verdict.reason}")


def prove_move(table: Table, pm: ProtocolMatrix, w: MoveWitness, move_no: int = 1,
               *, leaky: bool = False) -> Verdict:
    """Run the six-step procedure for one move.

    On accept the matrix encodes the state after the move. ``leaky`` breaks
    the first shuffle of the source-column selection (for mutation tests).
    """
    h, n, cols = pm.h, pm.n, pm.n + pm.m
    names = region_names(move_no)
    heights = [n] * (h + 2)
    matrix = pm.inner

    # step 1: pile each column, then pick columns A and B
    big = [stack_column(matrix, c) for c in range(cols)]
    matrix.rows = [[] for _ in range(h + 2)]
    table.log(PROVER, "stack_columns", MATRIX, {"columns": cols})

    def select_columns(sel_a, sel_b):
        # step 2: each selected big stack back into h+2 ball stacks
        seqs = []
        for sel in (sel_a, sel_b):
            seq = unstack_column(sel.stack, heights)
            sel.stack.clear()
            table.log(PROVER, "unstack", names["columns"], {"column": sel.column + 1, "stacks": h + 2})
            seqs.append(seq)
        seq_a, seq_b = seqs

        def with_ax(ax):
            def with_by(by):
                # step 4
                for sel, offset, label in ((ax, -1, "a_{x-1}"), (by, -1, "b_{y-1}"), (by, 0, "b_y")):
                    (faces,) = table.reveal(sel.region, [(0, sel.neighbor_column(offset))])
                    if any(faces):
                        return Verdict.reject("4", f"{label} shows {faces}, not E_n(0)")
                table.face_down_all(ax.region)
                table.face_down_all(by.region)
                # step 5
                verdict = color_check(table, names["color"], ax.stack, by.neighbor(1))
                if not verdict:
                    return _as_step(verdict, "5")
                # step 6
                swap_selected(table, ax, by)
                return ACCEPT

            return _as_step(chosen_pile_cut(table, names["cut_b"], seq_b, w.y, with_by), "3")

        verdict = chosen_pile_cut(table, names["cut_a"], seq_a, w.x, with_ax,
                                  rigged_first_shift=0 if leaky else None)
        verdict = _as_step(verdict, "3")
        if not verdict:
            return verdict
        for sel, seq in ((sel_a, seq_a), (sel_b, seq_b)):
            sel.stack[:] = [card for stack in seq for card in stack]
            table.log(PROVER, "restack", names["columns"], {"column": sel.column + 1})
        return ACCEPT

    verdict = chosen_k_pile_cut(table, names["columns"], big, (w.src, w.dst), select_columns)
    verdict = _as_step(verdict, "1")
    if not verdict:
        return verdict
    split = [unstack_column(s, heights) for s in big]
    matrix.rows = [[split[c][r] for c in range(cols)] for r in range(h + 2)]
    matrix.validate()
    table.log(PROVER, "unstack_columns", MATRIX, {"columns": cols})
    return ACCEPT


def final_columns(h: int, n: int, m: int) -> Counter:
    """Face patterns of the columns of a sorted matrix, top stack first."""
    cols = [tuple(encoding_faces(n, v) for v in [0] + [i] * h + [n + 1]) for i in range(1, n + 1)]
    cols += [tuple(encoding_faces(n, v) for v in [0] * (h + 1) + [n + 1])] * m
    return Counter(cols)


def check_final_reveal(h: int, n: int, m: int, faces: list[list[int]]) -> Verdict:
    """Verifier's check of the fully revealed matrix (cells row-major).

    Faces are compared directly, not decoded: with n = 1 a ball and the
    bottom sentinel are the same card.
    """
    cols = n + m
    if len(faces) != (h + 2) * cols:
        return Verdict.reject("final", f"expected {(h + 2) * cols} stacks, saw {len(faces)}")
    cells = [tuple(cell) for cell in faces]
    columns = Counter(tuple(cells[r * cols + c] for r in range(h + 2)) for c in range(cols))
    if columns != final_columns(h, n, m):
        return Verdict.reject("final", "revealed columns are not a sorted arrangement")
    return ACCEPT


def final_verification(table: Table, pm: ProtocolMatrix) -> Verdict:
    pile_scramble_shuffle(table, MATRIX)
    rows, cols = pm.inner.shape
    faces = table.reveal(MATRIX, [(r, c) for r in range(rows) for c in range(cols)])
    return check_final_reveal(pm.h, pm.n, pm.m, faces)


def _begin(table: Table, state: PuzzleState, t: int) -> ProtocolMatrix:
    table.log(TABLE, "begin", MATRIX, {"h": state.h, "n": state.n, "m": state.m, "t": t})
    return setup_matrix(state, table)


def _rng(rng, seed):
    if rng is not None:
        return rng
    return random.Random(seed)


def run_session(puzzle: PuzzleState, solution: Sequence[Move], rng=None, *, seed: Optional[int] = None,
                leaky: bool = False, audit: bool = False) -> SessionResult:
    """An honest prover proving knowledge of ``solution``.

    The plaintext replay happens before any card is placed, so an invalid
    move raises InvalidMove without touching a table. With ``audit`` the
    matrix is decoded after every move and compared with the plaintext state.
    """
    states = replay(puzzle, solution)
    table = Table(_rng(rng, seed))
    pm = _begin(table, puzzle, len(solution))
    for k, mv in enumerate(solution):
        verdict = prove_move(table, pm, honest_witness(states[k], mv), k + 1, leaky=leaky)
        if not verdict:
            return SessionResult(verdict, table.transcript, k)
        if audit and decode_matrix(pm) != states[k + 1]:
            raise AssertionError(f"matrix diverged from the plaintext after move {k + 1}")
    verdict = final_verification(table, pm)
    return SessionResult(verdict, table.transcript, len(solution))


@dataclass
class CheatScript:
    """A dishonest run: ``honest_moves`` played correctly, then one cheat.

    For move cheats the cheating witness is ``witness`` or, if None, the first
    witness of class ``kind`` found in the state reached. For
    ``wrong-final-state`` no cheat move is made; the honest moves simply do not
    end sorted.
    """

    kind: str
    honest_moves: Sequence[Move] = ()
    witness: Optional[MoveWitness] = None


def find_cheat_witness(state: PuzzleState, kind: str) -> Optional[MoveWitness]:
    for w in all_witnesses(state):
        if first_failure(state, w) == kind:
            return w
    return None


def plan_cheat(puzzle: PuzzleState, solution: Sequence[Move], kind: str) -> CheatScript:
    """Earliest point along ``solution`` where a cheat of class ``kind`` applies."""
    if kind not in CHEAT_CLASSES:
        raise PuzzleError(f"unknown cheat class {kind!r}; choose from {', '.join(CHEAT_CLASSES)}")
    states = replay(puzzle, solution)
    if kind == WRONG_FINAL_STATE:
        for k in range(len(solution), -1, -1):
            if not is_sorted(states[k]):
                return CheatScript(kind, tuple(solution[:k]))
        raise PuzzleError("every prefix of the solution ends sorted; nothing to cheat")
    for k, state in enumerate(states):
        w = find_cheat_witness(state, kind)
        if w is not None:
            return CheatScript(kind, tuple(solution[:k]), w)
    raise PuzzleError(f"no {kind} cheat applies anywhere along the solution")


def run_adversarial_session(puzzle: PuzzleState, script: CheatScript, rng=None, *,
                            seed: Optional[int] = None) -> SessionResult:
    if script.kind not in CHEAT_CLASSES:
        raise PuzzleError(f"unknown cheat class {script.kind!r}")
    states = replay(puzzle, script.honest_moves)
    reached = states[-1]
    witness = None
    if script.kind == WRONG_FINAL_STATE:
        if is_sorted(reached):
            raise PuzzleError("honest moves end sorted; wrong-final-state does not apply")
    else:
        witness = script.witness or find_cheat_witness(reached, script.kind)
        if witness is None or first_failure(reached, witness) != script.kind:
            raise PuzzleError(f"{script.kind} does not apply to the state reached")
    t = len(script.honest_moves) + (witness is not None)
    table = Table(_rng(rng, seed))
    pm = _begin(table, puzzle, t)
    for k, mv in enumerate(script.honest_moves):
        verdict = prove_move(table, pm, honest_witness(states[k], mv), k + 1)
        if not verdict:
            return SessionResult(verdict, table.transcript, k)
    executed = len(script.honest_moves)
    if witness is not None:
        verdict = prove_move(table, pm, witness, executed + 1)
        if not verdict:
            return SessionResult(verdict, table.transcript, executed)
        executed += 1
    return SessionResult(final_verification(table, pm), table.transcript, executed)
