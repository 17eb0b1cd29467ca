"""Offline replay of the verifier's checks against a recorded transcript.

The replay reads nothing but the transcript and the public puzzle. It walks
the events in the order an honest session produces them; an event that does
not fit that order is a SkeletonMismatch, while a revealed face that fails a
check is a rejection at the corresponding protocol step.
"""

from __future__ import annotations

from .cards import Event, Transcript
from .protocol import MATRIX, check_final_reveal, region_names, setup_matrix
from .puzzle import PuzzleState
from .subprotocols import ACCEPT, Verdict


class SkeletonMismatch(ValueError):
    """The transcript is not the record of a session on the declared puzzle."""


class _Reject(Exception):
    def __init__(self, step, reason):
        super().__init__(reason)
        self.verdict = Verdict.reject(step, reason)


def _single_one(faces: list[int]) -> bool:
    return sorted(faces) == [0] * (len(faces) - 1) + [1]


class _Cursor:
    def __init__(self, events: list[Event]):
        self.events = events
        self.i = 0

    def expect(self, action: str, region: str, **params) -> Event:
        if self.i >= len(self.events):
            raise SkeletonMismatch(f"transcript ends early; expected {action} on {region}")
        ev = self.events[self.i]
        if ev.action != action or ev.region != region:
            raise SkeletonMismatch(
                f"event {ev.seq_no}: expected {action} on {region}, found {ev.action} on {ev.region}")
        for key, value in params.items():
            if ev.params.get(key) != value:
                raise SkeletonMismatch(f"event {ev.seq_no}: {key}={ev.params.get(key)!r}, expected {value!r}")
        self.i += 1
        return ev

    def reveal(self, region: str, positions: list[list[int]], width: int) -> list[list[int]]:
        ev = self.expect("reveal", region, positions=positions)
        faces = ev.revealed_faces
        if (not isinstance(faces, list) or len(faces) != len(positions)
                or any(not isinstance(cell, list) or len(cell) != width for cell in faces)):
            raise SkeletonMismatch(f"event {ev.seq_no}: revealed faces have the wrong shape")
        return faces

    def reveal_row(self, region: str, row: int, cols: int, width: int = 1) -> list[int]:
        faces = self.reveal(region, [[row, c] for c in range(1, cols + 1)], width)
        return [f for cell in faces for f in cell]


def _placement(cur: _Cursor, region: str, row: int, expected: list[list[int]], step: str) -> None:
    ev = cur.expect("place", region, row=row, visibility="public")
    if ev.revealed_faces != expected:
        raise _Reject(step, f"{region} helper row {row} placed as {ev.revealed_faces}")


def _pile_cut(cur: _Cursor, region: str, q: int, inner) -> None:
    cur.expect("arrange", region, row=1, columns=q)
    cur.expect("place", region, row=2, visibility="secret")
    _placement(cur, region, 3, [[int(i == 0)] for i in range(q)], "3")
    cur.expect("shift_shuffle", region, columns=q)
    row2 = cur.reveal_row(region, 2, q)
    if not _single_one(row2):
        raise _Reject("3", f"{region} Row 2 shows {row2}")
    inner(row2.index(1))
    cur.expect("face_down", region)
    cur.expect("shift_shuffle", region, columns=q)
    row3 = cur.reveal_row(region, 3, q)
    if not _single_one(row3):
        raise _Reject("3", f"{region} Row 3 shows {row3}")
    cur.expect("realign", region, shift=row3.index(1))
    cur.expect("collect", region, columns=q)


def _color_check(cur: _Cursor, region: str, q: int) -> None:
    cur.expect("arrange", region, row=1, columns=q)
    cur.expect("arrange", region, row=2, columns=q)
    _placement(cur, region, 3, [[int(i == 0)] for i in range(q)], "5")
    cur.expect("shift_shuffle", region, columns=q)
    row1 = cur.reveal_row(region, 1, q)
    if not _single_one(row1):
        raise _Reject("5", f"color check Row 1 shows {row1}")
    j = row1.index(1)
    (card,) = cur.reveal(region, [[2, j + 1]], 1)
    if card != [1]:
        raise _Reject("5", f"color check Row 2 column {j + 1} shows {card[0]}")
    cur.expect("face_down", region)
    cur.expect("shift_shuffle", region, columns=q)
    row3 = cur.reveal_row(region, 3, q)
    if not _single_one(row3):
        raise _Reject("5", f"color check Row 3 shows {row3}")
    cur.expect("realign", region, shift=row3.index(1))
    cur.expect("collect", region, columns=q)


def _move(cur: _Cursor, k: int, h: int, n: int, m: int) -> None:
    names = region_names(k)
    cols, size = n + m, h + 2
    zeros = [0] * n
    cur.expect("stack_columns", MATRIX, columns=cols)

    region = names["columns"]
    cur.expect("arrange", region, row=1, columns=cols)
    cur.expect("place", region, row=2, visibility="secret")
    _placement(cur, region, 3, [[i] for i in range(1, cols + 1)], "1")
    cur.expect("scramble_shuffle", region, columns=cols)
    row2 = cur.reveal_row(region, 2, cols)
    if sorted(row2) != [0] * (cols - 2) + [1, 2]:
        raise _Reject("1", f"column selection Row 2 shows {row2}")
    col_a, col_b = row2.index(1) + 1, row2.index(2) + 1
    cur.expect("unstack", region, column=col_a, stacks=size)
    cur.expect("unstack", region, column=col_b, stacks=size)

    def with_a(ja):
        def with_b(jb):
            for reg, col, label in ((names["cut_a"], (ja - 1) % size, "a_{x-1}"),
                                    (names["cut_b"], (jb - 1) % size, "b_{y-1}"),
                                    (names["cut_b"], jb, "b_y")):
                (faces,) = cur.reveal(reg, [[1, col + 1]], n)
                if faces != zeros:
                    raise _Reject("4", f"{label} shows {faces}")
            cur.expect("face_down", names["cut_a"])
            cur.expect("face_down", names["cut_b"])
            _color_check(cur, names["color"], n)
            cur.expect("swap", names["cut_a"], columns=[ja + 1, jb + 1])

        _pile_cut(cur, names["cut_b"], size, with_b)

    _pile_cut(cur, names["cut_a"], size, with_a)
    cur.expect("restack", region, column=col_a)
    cur.expect("restack", region, column=col_b)
    cur.expect("face_down", region)
    cur.expect("scramble_shuffle", region, columns=cols)
    row3 = cur.reveal_row(region, 3, cols)
    if sorted(row3) != list(range(1, cols + 1)):
        raise _Reject("1", f"column selection Row 3 shows {row3}")
    cur.expect("realign", region, order=[row3.index(i) + 1 for i in range(1, cols + 1)])
    cur.expect("collect", region, columns=cols)
    cur.expect("unstack_columns", MATRIX, columns=cols)


def verify_transcript(transcript: Transcript, puzzle: PuzzleState) -> Verdict:
    """Re-run every verifier check; raise SkeletonMismatch if the record is not a session on ``puzzle``."""
    h, n, m = puzzle.h, puzzle.n, puzzle.m
    cur = _Cursor(list(transcript))
    begin = cur.expect("begin", MATRIX, h=h, n=n, m=m)
    t = begin.params.get("t")
    if not isinstance(t, int) or t < 0:
        raise SkeletonMismatch(f"bad move count {t!r}")
    setup = cur.expect("place", MATRIX, rows=h + 2, columns=n + m, visibility="public")
    expected = [[c.face for c in cell] for row in setup_matrix(puzzle).inner.rows for cell in row]
    if setup.revealed_faces != expected:
        raise SkeletonMismatch("initial layout does not match the declared puzzle")
    try:
        for k in range(1, t + 1):
            _move(cur, k, h, n, m)
        cur.expect("scramble_shuffle", MATRIX, columns=n + m)
        positions = [[r, c] for r in range(1, h + 3) for c in range(1, n + m + 1)]
        faces = cur.reveal(MATRIX, positions, n)
        verdict = check_final_reveal(h, n, m, faces)
        if not verdict:
            return verdict
    except _Reject as rej:
        return rej.verdict
    if cur.i != len(cur.events):
        raise SkeletonMismatch(f"{len(cur.events) - cur.i} unexpected trailing events")
    return ACCEPT
