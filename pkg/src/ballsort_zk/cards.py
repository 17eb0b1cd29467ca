"""Integer-faced cards, the E_q(x) encoding, pile matrices and the Table.

The Table is the trusted physical environment. It owns the layout of every
named region, the randomness used by shuffles, and the log of everything an
observer at the table can see. Only the log is handed to verifier-side code.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional, Sequence

PROVER = "prover"
VERIFIER = "verifier"
TABLE = "table"


class ProtocolMisuse(RuntimeError):
    """An action the physical protocol does not allow (e.g. revealing a face-up card)."""


class MalformedEncoding(ValueError):
    pass


class Card:
    __slots__ = ("_face", "face_up")

    def __init__(self, face: int, face_up: bool = False):
        if face < 0:
            raise ValueError("card faces are non-negative integers")
        self._face = face
        self.face_up = face_up

    @property
    def face(self) -> int:
        return self._face

    def __repr__(self):
        return f"Card({self._face}{'' if self.face_up else ', down'})"


# A stack is a list of cards, topmost card first.
Stack = list


def encoding_faces(q: int, x: int) -> tuple[int, ...]:
    if q < 1:
        raise ValueError("q must be positive")
    if not 0 <= x <= q + 1:
        raise ValueError(f"x={x} outside [0, {q + 1}]")
    if x == q + 1:
        return (1,) * q
    return tuple(int(i == x) for i in range(1, q + 1))


@dataclass
class Encoding:
    """E_q(x) as q face-down cards, leftmost (topmost when stacked) first."""

    q: int
    cards: list

    @property
    def faces(self) -> tuple[int, ...]:
        return tuple(c.face for c in self.cards)


def encode(q: int, x: int) -> Encoding:
    return Encoding(q, [Card(f) for f in encoding_faces(q, x)])


def decode(e) -> int:
    """Inverse of encode. Reads faces directly, so this is table-private."""
    faces = _faces_of(e)
    q = len(faces)
    if q == 0 or any(f not in (0, 1) for f in faces):
        raise MalformedEncoding(f"not an encoding: {faces}")
    ones = sum(faces)
    if ones == 0:
        return 0
    if ones == q:
        return q + 1
    if ones == 1:
        return faces.index(1) + 1
    raise MalformedEncoding(f"not an encoding: {faces}")


def _faces_of(e) -> tuple[int, ...]:
    if isinstance(e, Encoding):
        return e.faces
    items = list(e)
    if items and isinstance(items[0], Card):
        return tuple(c.face for c in items)
    return tuple(items)


class PileMatrix:
    """rows x cols grid of stacks; every stack in a row has the same height."""

    def __init__(self, rows: list[list[Stack]]):
        self.rows = rows
        self.validate()

    @classmethod
    def from_faces(cls, faces: Sequence[Sequence[Sequence[int]]]) -> "PileMatrix":
        return cls([[[Card(f) for f in cell] for cell in row] for row in faces])

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.rows[0]) if self.rows else 0

    def validate(self) -> None:
        widths = {len(row) for row in self.rows}
        if len(widths) > 1:
            raise ProtocolMisuse(f"ragged matrix with row widths {sorted(widths)}")
        for r, row in enumerate(self.rows, 1):
            heights = {len(cell) for cell in row}
            if len(heights) > 1:
                raise ProtocolMisuse(f"row {r} has stacks of heights {sorted(heights)}")

    def cards(self) -> Iterable[Card]:
        for row in self.rows:
            for cell in row:
                yield from cell

    def faces(self) -> tuple:
        return tuple(tuple(tuple(c.face for c in cell) for cell in row) for row in self.rows)

    def snapshot(self) -> tuple:
        """Faces and orientations, for white-box comparisons."""
        return tuple(tuple(tuple((c.face, c.face_up) for c in cell) for cell in row) for row in self.rows)

    def column(self, col: int) -> list[Stack]:
        return [row[col] for row in self.rows]


def stack_column(matrix: PileMatrix, col: int) -> Stack:
    """Pile a column into one stack: row 1's stack on top, row p's at the bottom."""
    big: Stack = []
    for row in matrix.rows:
        big.extend(row[col])
    return big


def unstack_column(big: Stack, heights: Sequence[int]) -> list[Stack]:
    if sum(heights) != len(big):
        raise ProtocolMisuse(f"stack of {len(big)} cards cannot split into {list(heights)}")
    out, pos = [], 0
    for h in heights:
        out.append(big[pos:pos + h])
        pos += h
    return out


def _freeze(obj):
    if isinstance(obj, dict):
        return tuple(sorted((k, _freeze(v)) for k, v in obj.items()))
    if isinstance(obj, list):
        return tuple(_freeze(v) for v in obj)
    return obj


@dataclass
class Event:
    seq_no: int
    actor: str
    action: str
    region: str
    params: dict = field(default_factory=dict)
    revealed_faces: Optional[list] = None

    def to_json(self) -> str:
        return json.dumps(
            {
                "seq_no": self.seq_no,
                "actor": self.actor,
                "action": self.action,
                "region": self.region,
                "params": self.params,
                "revealed_faces": self.revealed_faces,
            },
            separators=(",", ":"),
        )

    @classmethod
    def from_json(cls, line: str) -> "Event":
        d = json.loads(line)
        return cls(d["seq_no"], d["actor"], d["action"], d["region"], d["params"], d["revealed_faces"])

    def key(self) -> tuple:
        """Observable content without the sequence number, as nested tuples."""
        return (self.actor, self.action, self.region, _freeze(self.params), _freeze(self.revealed_faces))

    def skeleton(self) -> tuple:
        return (self.actor, self.action, self.region)


class Transcript:
    """What an observer at the table sees: public actions and revealed faces."""

    def __init__(self, events: Optional[Iterable[Event]] = None):
        self.events: list[Event] = list(events or [])

    def __len__(self):
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def __getitem__(self, i):
        return self.events[i]

    def __eq__(self, other):
        return isinstance(other, Transcript) and self.dumps() == other.dumps()

    def append(self, actor: str, action: str, region: str, params=None, faces=None) -> Event:
        ev = Event(len(self.events) + 1, actor, action, region, dict(params or {}), faces)
        self.events.append(ev)
        return ev

    def dumps(self) -> str:
        return "".join(ev.to_json() + "\n" for ev in self.events)

    @classmethod
    def loads(cls, text: str) -> "Transcript":
        return cls(Event.from_json(line) for line in text.splitlines() if line.strip())

    def canonical(self) -> tuple:
        return tuple(ev.key() for ev in self.events)

    def skeleton(self) -> tuple:
        return tuple(ev.skeleton() for ev in self.events)

    def reveals(self) -> list[Event]:
        return [ev for ev in self.events if ev.revealed_faces is not None and ev.action == "reveal"]


class ObserverView:
    """Read-only window onto a Table: the transcript and nothing else."""

    def __init__(self, table: "Table"):
        self._table = table

    @property
    def transcript(self) -> Transcript:
        return Transcript(self._table.transcript.events)


class Table:
    """Physical layout plus the observer log and secret randomness.

    ``rng`` needs only ``randrange(k)``; anything else about it is private.
    Shuffle outcomes are kept in ``shuffle_audit`` for white-box tests and
    never enter the transcript.
    """

    def __init__(self, rng=None, seed: Optional[int] = None):
        if rng is None:
            rng = random.Random(seed)
        self.rng = rng
        self.transcript = Transcript()
        self.regions: dict[str, PileMatrix] = {}
        self.shuffle_audit: list[tuple[str, str, Any]] = []

    def observer(self) -> ObserverView:
        return ObserverView(self)

    def log(self, actor: str, action: str, region: str, params=None, faces=None) -> Event:
        return self.transcript.append(actor, action, region, params, faces)

    def open_region(self, name: str, matrix: PileMatrix) -> PileMatrix:
        if name in self.regions:
            raise ProtocolMisuse(f"region {name!r} already on the table")
        self.regions[name] = matrix
        return matrix

    def close_region(self, name: str) -> PileMatrix:
        return self.regions.pop(name)

    def region(self, name: str) -> PileMatrix:
        try:
            return self.regions[name]
        except KeyError:
            raise ProtocolMisuse(f"no region {name!r} on the table") from None

    def place(self, region: str, row: int, cells: list[Stack], *, secret: bool,
              actor: str = PROVER) -> None:
        """Put face-down cards into ``row`` (0-based) of an open region.

        A public placement shows everyone which faces went where; a secret one
        shows only that a placement happened.
        """
        for cell in cells:
            for card in cell:
                card.face_up = False
        matrix = self.region(region)
        matrix.rows[row] = cells
        faces = None if secret else [[c.face for c in cell] for cell in cells]
        self.log(actor, "place", region, {"row": row + 1, "visibility": "secret" if secret else "public"}, faces)

    def arrange(self, region: str, row: int, cells: list[Stack]) -> None:
        """Lay out stacks that are already face down (their faces stay unknown)."""
        matrix = self.region(region)
        matrix.rows[row] = cells
        self.log(PROVER, "arrange", region, {"row": row + 1, "columns": len(cells)})

    def reveal(self, region: str, positions: Sequence[tuple[int, int]]) -> list[list[int]]:
        """Turn the stacks at 0-based (row, col) positions face up; return their faces."""
        matrix = self.region(region)
        faces = []
        for r, c in positions:
            cell = matrix.rows[r][c]
            for card in cell:
                if card.face_up:
                    raise ProtocolMisuse(f"card at {region} ({r + 1},{c + 1}) is already face up")
            for card in cell:
                card.face_up = True
            faces.append([card.face for card in cell])
        self.log(VERIFIER, "reveal", region, {"positions": [[r + 1, c + 1] for r, c in positions]}, faces)
        return faces

    def reveal_row(self, region: str, row: int) -> list[list[int]]:
        cols = self.region(region).shape[1]
        return self.reveal(region, [(row, c) for c in range(cols)])

    def face_down_all(self, region: str) -> None:
        for card in self.region(region).cards():
            card.face_up = False
        self.log(TABLE, "face_down", region)

    def rearrange(self, region: str, order: Sequence[int], action: str, params=None) -> None:
        """Publicly move columns: new column k is old column order[k] (0-based)."""
        matrix = self.region(region)
        matrix.rows = [[row[i] for i in order] for row in matrix.rows]
        self.log(TABLE, action, region, params)
