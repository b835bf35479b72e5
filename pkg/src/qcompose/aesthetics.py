"""Deterministic surrogate aesthetic scorer for composed mates.

score = economy + sparsity + theme_bonus, each bounded:

* economy in [0, 1]: value-weighted share of White's non-king material that
  takes part in the solution, i.e. moves somewhere in the full solution tree
  or gives check in a final mating position.  1 when White has no such
  material.  Values: P=1, N=3, B=3, R=5, Q=9.
* sparsity in [0, 1]: 1 - pieces_on_board / 32.
* theme_bonus in [0, 1.5]: 0.5 for each of pin, fork and sacrifice seen along
  the principal variation.

The absolute scale has nothing to do with any published scorer; only
comparisons between sets scored the same way are meaningful.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

from .chess.board import (
    BETWEEN,
    BLACK,
    KING,
    PIECE_VALUES,
    WHITE,
    Board,
    Move,
    Position,
    parse_uci,
    scan,
)
from .chess.mate import MateVerdict, mate_strategy

SCORER_VERSION = "surrogate-1 (economy+sparsity+pin/fork/sacrifice)"
THEME_WEIGHT = 0.5
THEME_CAP = 1.5


@dataclass(frozen=True)
class AestheticBreakdown:
    economy: float
    sparsity: float
    theme_bonus: float
    total: float
    themes: tuple = ()

    def as_dict(self) -> dict:
        d = asdict(self)
        d["themes"] = list(self.themes)
        return d


def _code(move) -> int:
    if isinstance(move, Move):
        return move.code
    if isinstance(move, str):
        return parse_uci(move)
    return move


def _board(position) -> Board:
    return position.copy() if isinstance(position, Board) else Board(position)


def detect_pin(position) -> bool:
    """True if some Black non-king piece has a pseudo-legal move that uncovers a
    White slider's line onto the Black king through the piece's square."""
    board = _board(position)
    if board.turn != BLACK:
        board.turn = BLACK
        board.ep = -1
    bk = board.king(BLACK)
    king_bb = board.bbs[KING]
    for m in board.pseudo_moves():
        f = m & 63
        if king_bb >> f & 1:
            continue
        board.push(m)
        attackers = board.attackers(WHITE, bk)
        board.pop()
        for a in scan(attackers):
            if BETWEEN[a][bk] >> f & 1:
                return True
    return False


def _value(board: Board, sq: int) -> int:
    return PIECE_VALUES.get(board.kind_at(sq), 0)


def detect_fork(position, move) -> bool:
    """True if, after the White move, the moved piece attacks two or more
    targets among the Black king and Black pieces worth at least 3."""
    board = _board(position)
    m = _code(move)
    t = (m >> 6) & 63
    board.push(m)
    attacked = board.attacks_from(t) & board.occ[BLACK]
    board_targets = 0
    for sq in scan(attacked):
        if board.kind_at(sq) == KING or _value(board, sq) >= 3:
            board_targets += 1
    return board_targets >= 2


def detect_sacrifice(position, move) -> bool:
    """True if a White piece worth at least 3 lands on a square attacked by a
    cheaper Black piece (the Black king never counts as cheaper)."""
    board = _board(position)
    m = _code(move)
    f = m & 63
    t = (m >> 6) & 63
    value = _value(board, f)
    if value < 3:
        return False
    board.push(m)
    attackers = board.attackers(BLACK, t) & ~board.bbs[KING]
    return any(_value(board, sq) < value for sq in scan(attackers))


def _participants(position: Position, tree: dict) -> set:
    """Origin squares of White pieces that move in ``tree`` or give the final check."""
    board = Board(position)
    origin = {sq: sq for sq in scan(board.occ[WHITE] & ~board.bbs[KING])}
    used: set = set()

    def walk_white(node, origin):
        m = parse_uci(node["move"])
        f, t = m & 63, (m >> 6) & 63
        origin = dict(origin)
        if f in origin:
            used.add(origin[f])
            origin[t] = origin.pop(f)
        board.push(m)
        if not node["replies"]:
            for sq in scan(board.attackers(WHITE, board.king(BLACK))):
                if sq in origin:
                    used.add(origin[sq])
        for reply, child in node["replies"].items():
            r = parse_uci(reply)
            rt = (r >> 6) & 63
            after = dict(origin)
            after.pop(rt, None)
            if board.bbs[1] >> (r & 63) & 1 and rt == board.ep:
                after.pop(rt + 8, None)
            board.push(r)
            walk_white(child, after)
            board.pop()
        board.pop()

    walk_white(tree, origin)
    return used


def economy(position: Position, tree: dict) -> float:
    board = Board(position)
    pieces = list(scan(board.occ[WHITE] & ~board.bbs[KING]))
    total = sum(_value(board, sq) for sq in pieces)
    if total == 0:
        return 1.0
    used = _participants(position, tree)
    return sum(_value(board, sq) for sq in pieces if sq in used) / total


def themes_along(position: Position, pv) -> tuple:
    board = Board(position)
    found = set()
    for i, uci in enumerate(pv):
        m = parse_uci(uci)
        if board.turn == WHITE:
            if "fork" not in found and detect_fork(board, m):
                found.add("fork")
            if "sacrifice" not in found and detect_sacrifice(board, m):
                found.add("sacrifice")
        board.push(m)
        if board.turn == BLACK and "pin" not in found and detect_pin(board):
            found.add("pin")
    return tuple(t for t in ("pin", "fork", "sacrifice") if t in found)


def score(position: Position, verdict: MateVerdict) -> AestheticBreakdown:
    if not verdict.is_mate or not verdict.principal_variation:
        raise ValueError("scoring needs a mate verdict with a principal variation")
    tree = verdict.solution
    if tree is None:
        tree = mate_strategy(position, verdict.principal_variation[0], verdict.k)
    econ = economy(position, tree)
    sparsity = 1.0 - position.piece_count() / 32.0
    themes = themes_along(position, verdict.principal_variation)
    bonus = min(THEME_CAP, THEME_WEIGHT * len(themes))
    return AestheticBreakdown(econ, sparsity, bonus, econ + sparsity + bonus, themes)
