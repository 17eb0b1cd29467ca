"""Ball sort puzzle rules, a breadth-first solver, and the text file formats.

Bins are numbered from 1 and listed bottom-to-top. A state is a tuple of
tuples so it can be hashed and shared freely.
"""

from __future__ import annotations

import itertools
from collections import Counter, deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Optional, Sequence

DEFAULT_NODE_BUDGET = 10**7


class PuzzleError(ValueError):
    """A structurally malformed puzzle, move, or solution."""


class InvalidMove(PuzzleError):
    """A well-formed move that breaks one of the puzzle rules."""

    def __init__(self, move: "Move", rule: str):
        super().__init__(f"invalid move {move.src}->{move.dst}: {rule}")
        self.move = move
        self.rule = rule


class SearchBudgetExceeded(RuntimeError):
    pass


class PuzzleFormatError(PuzzleError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class PuzzleSpec:
    h: int
    n: int
    m: int

    def __post_init__(self):
        if self.h < 1 or self.n < 1 or self.m < 0:
            raise PuzzleError(f"need h >= 1, n >= 1, m >= 0; got {self}")


@dataclass(frozen=True)
class Move:
    src: int
    dst: int

    def __post_init__(self):
        if self.src == self.dst:
            raise PuzzleError(f"move source and destination are both bin {self.src}")


@dataclass(frozen=True)
class PuzzleState:
    h: int
    bins: tuple

    def __init__(self, h: int, bins: Sequence[Sequence[int]], n: Optional[int] = None):
        bins = tuple(tuple(int(b) for b in bin_) for bin_ in bins)
        object.__setattr__(self, "h", int(h))
        object.__setattr__(self, "bins", bins)
        self._validate(n)

    def _validate(self, n):
        if self.h < 1:
            raise PuzzleError("capacity h must be positive")
        counts = Counter(ball for bin_ in self.bins for ball in bin_)
        colors = n if n is not None else len(counts)
        if colors < 1:
            raise PuzzleError("puzzle has no balls")
        if len(self.bins) < colors:
            raise PuzzleError(f"{len(self.bins)} bins cannot hold {colors} colors")
        for i, bin_ in enumerate(self.bins, 1):
            if len(bin_) > self.h:
                raise PuzzleError(f"bin {i} holds {len(bin_)} balls, capacity is {self.h}")
        expected = {c: self.h for c in range(1, colors + 1)}
        if dict(counts) != expected:
            raise PuzzleError(f"need exactly {self.h} balls of each color 1..{colors}, got {dict(sorted(counts.items()))}")

    @property
    def n(self) -> int:
        return sum(len(b) for b in self.bins) // self.h

    @property
    def m(self) -> int:
        return len(self.bins) - self.n

    @property
    def spec(self) -> PuzzleSpec:
        return PuzzleSpec(self.h, self.n, self.m)

    def with_bins(self, bins) -> "PuzzleState":
        new = object.__new__(PuzzleState)
        object.__setattr__(new, "h", self.h)
        object.__setattr__(new, "bins", tuple(bins))
        return new

    def canonical(self) -> tuple:
        """Bin order does not matter for solvability; used as the visited-set key."""
        return tuple(sorted(self.bins))


def _check_index(state: PuzzleState, mv: Move) -> None:
    count = len(state.bins)
    for idx in (mv.src, mv.dst):
        if not 1 <= idx <= count:
            raise PuzzleError(f"bin index {idx} outside 1..{count}")


def move_violation(state: PuzzleState, mv: Move) -> Optional[str]:
    """Return the violated rule, or None when the move is legal."""
    _check_index(state, mv)
    src = state.bins[mv.src - 1]
    dst = state.bins[mv.dst - 1]
    if not src:
        return "empty source"
    if len(dst) >= state.h:
        return "full destination"
    if dst and dst[-1] != src[-1]:
        return "color mismatch"
    return None


def is_valid_move(state: PuzzleState, mv: Move) -> bool:
    return move_violation(state, mv) is None


def apply_move(state: PuzzleState, mv: Move) -> PuzzleState:
    rule = move_violation(state, mv)
    if rule is not None:
        raise InvalidMove(mv, rule)
    bins = list(state.bins)
    ball = bins[mv.src - 1][-1]
    bins[mv.src - 1] = bins[mv.src - 1][:-1]
    bins[mv.dst - 1] = bins[mv.dst - 1] + (ball,)
    return state.with_bins(bins)


def is_sorted(state: PuzzleState) -> bool:
    return all(not b or (len(b) == state.h and len(set(b)) == 1) for b in state.bins)


def legal_moves(state: PuzzleState) -> Iterator[Move]:
    count = len(state.bins)
    for src in range(1, count + 1):
        for dst in range(1, count + 1):
            if src != dst:
                mv = Move(src, dst)
                if is_valid_move(state, mv):
                    yield mv


def replay(state: PuzzleState, moves: Sequence[Move]) -> list[PuzzleState]:
    """States visited by ``moves``, starting with ``state`` itself."""
    states = [state]
    for mv in moves:
        states.append(apply_move(states[-1], mv))
    return states


def is_solution(state: PuzzleState, moves: Sequence[Move]) -> bool:
    try:
        return is_sorted(replay(state, moves)[-1])
    except InvalidMove:
        return False


def solve(state: PuzzleState, max_moves: int, node_budget: int = DEFAULT_NODE_BUDGET) -> Optional[list[Move]]:
    """Shortest solution with at most ``max_moves`` moves, or None.

    Plain BFS. Visited states are keyed by their sorted bins, while the frontier
    keeps the real bin order so the returned moves index the caller's bins.
    Raises SearchBudgetExceeded rather than silently giving up when more than
    ``node_budget`` canonical states would be stored.
    """
    if max_moves < 0:
        raise ValueError("max_moves must be non-negative")
    if is_sorted(state):
        return []
    frontier = deque([(state, 0)])
    paths = {state.canonical(): (None, None)}
    while frontier:
        current, depth = frontier.popleft()
        if depth >= max_moves:
            continue
        key = current.canonical()
        for mv in legal_moves(current):
            nxt = apply_move(current, mv)
            nkey = nxt.canonical()
            if nkey in paths:
                continue
            if len(paths) >= node_budget:
                raise SearchBudgetExceeded(f"more than {node_budget} states explored")
            paths[nkey] = (key, mv)
            if is_sorted(nxt):
                moves = []
                k = nkey
                while paths[k][0] is not None:
                    moves.append(paths[k][1])
                    k = paths[k][0]
                return moves[::-1]
            frontier.append((nxt, depth + 1))
    return None


def initial_states(h: int, n: int, m: int) -> Iterator[PuzzleState]:
    """Every puzzle with n full bins followed by m empty ones, in lexicographic order."""
    balls = sorted(c for c in range(1, n + 1) for _ in range(h))
    for perm in _multiset_permutations(balls):
        bins = [perm[i * h:(i + 1) * h] for i in range(n)] + [()] * m
        yield PuzzleState(h, bins)


def _multiset_permutations(items):
    seen = set()
    for perm in itertools.permutations(items):
        if perm not in seen:
            seen.add(perm)
            yield perm


def all_states(h: int, n: int, m: int) -> Iterator[PuzzleState]:
    """Every valid placement of the balls into n+m bins of capacity h."""
    balls = [c for c in range(1, n + 1) for _ in range(h)]
    bins_count = n + m
    seen = set()
    for perm in _multiset_permutations(balls):
        for cuts in itertools.combinations_with_replacement(range(len(balls) + 1), bins_count - 1):
            bounds = (0,) + cuts + (len(balls),)
            bins = tuple(tuple(perm[bounds[i]:bounds[i + 1]]) for i in range(bins_count))
            if any(len(b) > h for b in bins) or bins in seen:
                continue
            seen.add(bins)
            yield PuzzleState(h, bins)


# -- file formats -----------------------------------------------------------


def format_puzzle(state: PuzzleState) -> str:
    lines = [f"{state.h} {state.n} {state.m}"]
    lines += [" ".join(map(str, b)) if b else "-" for b in state.bins]
    return "\n".join(lines) + "\n"


def parse_puzzle(text: str) -> PuzzleState:
    lines = text.splitlines()
    if not lines:
        raise PuzzleFormatError(1, "empty puzzle file")
    try:
        h, n, m = (int(v) for v in lines[0].split())
    except ValueError:
        raise PuzzleFormatError(1, "expected header 'h n m'") from None
    try:
        PuzzleSpec(h, n, m)
    except PuzzleError as exc:
        raise PuzzleFormatError(1, str(exc)) from None
    body = lines[1:]
    while body and not body[-1].strip():
        body.pop()
    if len(body) < n + m:
        raise PuzzleFormatError(len(body) + 2, f"expected {n + m} bin lines, found {len(body)}")
    if len(body) > n + m:
        raise PuzzleFormatError(n + m + 2, f"expected {n + m} bin lines, found {len(body)}")
    bins = []
    for lineno, line in enumerate(body, 2):
        tokens = line.split()
        if tokens == ["-"]:
            bins.append(())
            continue
        if not tokens:
            raise PuzzleFormatError(lineno, "blank bin line; write '-' for an empty bin")
        try:
            balls = tuple(int(t) for t in tokens)
        except ValueError:
            raise PuzzleFormatError(lineno, f"non-integer ball in {line!r}") from None
        if any(not 1 <= b <= n for b in balls):
            raise PuzzleFormatError(lineno, f"ball colors must lie in 1..{n}")
        if len(balls) > h:
            raise PuzzleFormatError(lineno, f"bin holds {len(balls)} balls, capacity is {h}")
        bins.append(balls)
    try:
        return PuzzleState(h, bins, n=n)
    except PuzzleError as exc:
        raise PuzzleFormatError(len(lines), str(exc)) from None


def format_solution(moves: Sequence[Move]) -> str:
    return "".join(f"{mv.src} {mv.dst}\n" for mv in moves)


def parse_solution(text: str) -> list[Move]:
    moves = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            src, dst = (int(v) for v in line.split())
        except ValueError:
            raise PuzzleFormatError(lineno, "expected 'src dst'") from None
        try:
            moves.append(Move(src, dst))
        except PuzzleError as exc:
            raise PuzzleFormatError(lineno, str(exc)) from None
    return moves


def load_puzzle(path) -> PuzzleState:
    return parse_puzzle(Path(path).read_text())


def load_solution(path) -> list[Move]:
    return parse_solution(Path(path).read_text())
