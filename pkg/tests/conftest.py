import random

import chess
import pytest

from qcompose.chess.board import Position
from qcompose.composer import PieceConfiguration, generate_candidate
from qcompose.entropy import PseudoSource

KNOWN_FENS = [
    "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1",
    "r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R w KQkq - 0 1",
    "8/2p5/3p4/KP5r/1R3p1k/8/4P1P1/8 w - - 0 1",
    "r3k2r/Pppp1ppp/1b3nbN/nP6/BBP1P3/q4N2/Pp1P2PP/R2Q1RK1 w kq - 0 1",
    "rnbq1k1r/pp1Pbppp/2p5/8/2B5/8/PPP1NnPP/RNBQK2R w KQ - 1 8",
    "r4rk1/1pp1qppp/p1np1n2/2b1p1B1/2B1P1b1/P1NP1N2/1PP1QPPP/R4RK1 w - - 0 10",
    "6k1/5ppp/8/8/8/8/8/R6K w - - 0 1",
    "2B5/1P4K1/7p/8/1k6/5Q2/4p3/8 w - - 0 1",
    "4k3/8/8/3pP3/8/8/8/4K3 w - d6 0 2",
    "r3k2r/8/8/8/8/8/8/R3K2R b KQkq - 0 1",
]


def _playout_fens(n, seed):
    rng = random.Random(seed)
    out = []
    while len(out) < n:
        board = chess.Board()
        for _ in range(rng.randrange(4, 80)):
            moves = list(board.legal_moves)
            if not moves:
                break
            board.push(rng.choice(moves))
        if not board.is_game_over():
            out.append(board.fen())
    return out


def _sparse_fens(n, seed):
    configs = [PieceConfiguration("QR", "PP"), PieceConfiguration("RBN", "P"), PieceConfiguration("QNP", "RP"),
               PieceConfiguration("RRP", "BP"), PieceConfiguration("QBP", "PP")]
    src = PseudoSource(seed)
    return [generate_candidate(src, configs[i % len(configs)]).fen() for i in range(n)]


CORPUS = KNOWN_FENS + _playout_fens(25, 7) + _sparse_fens(15, 3)
assert len(CORPUS) == 50


@pytest.fixture(scope="session")
def corpus():
    return [Position.from_fen(f) for f in CORPUS]


_ACCEPTANCE: dict = {}


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion; printed in the terminal summary."""

    def record(number, passed, detail):
        _ACCEPTANCE[number] = (passed, detail)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        passed, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
