"""Card-based zero-knowledge proof for the ball sort puzzle, simulated."""

from .cards import Card, Encoding, PileMatrix, Table, Transcript, decode, encode
from .protocol import (CHEAT_CLASSES, CheatScript, MoveWitness, SessionResult, final_verification,
                       prove_move, run_adversarial_session, run_session, setup_matrix)
from .puzzle import Move, PuzzleState, apply_move, is_sorted, is_valid_move, solve
from .subprotocols import Verdict, chosen_k_pile_cut, chosen_pile_cut, color_check

__version__ = "0.1.0"
