from pathlib import Path

import pytest

from ballsort_zk.puzzle import Move, PuzzleState

DATA = Path(__file__).parent / "data"

DEMO = PuzzleState(3, [[3, 1, 2], [2, 2, 3], [1, 1, 3], []])
DEMO_SOLUTION = [Move(3, 4), Move(2, 4), Move(1, 2), Move(1, 3), Move(1, 4)]
DEMO_SORTED = PuzzleState(3, [[], [2, 2, 2], [1, 1, 1], [3, 3, 3]])


@pytest.fixture
def demo():
    return DEMO


@pytest.fixture
def demo_solution():
    return list(DEMO_SOLUTION)


@pytest.fixture
def data_dir():
    return DATA
