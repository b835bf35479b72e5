"""Slow, rule-by-rule move generator and solution checker.

Shares nothing with the bitboard kernel beyond the :class:`Position` value
type.  It exists to cross-check the kernel (perft) and to validate mate
solutions independently of the prover that found them.
"""

from __future__ import annotations

from .board import (
    BISHOP,
    BLACK,
    CASTLE_BK,
    CASTLE_BQ,
    CASTLE_WK,
    CASTLE_WQ,
    KING,
    KNIGHT,
    PAWN,
    QUEEN,
    ROOK,
    SQUARE_NAMES,
    WHITE,
    Position,
)

KNIGHT_STEPS = [(1, 2), (2, 1), (2, -1), (1, -2), (-1, -2), (-2, -1), (-2, 1), (-1, 2)]
KING_STEPS = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)]
ROOK_DIRS = [(1, 0), (-1, 0), (0, 1), (0, -1)]
BISHOP_DIRS = [(1, 1), (1, -1), (-1, 1), (-1, -1)]


def _on_board(f, r):
    return 0 <= f < 8 and 0 <= r < 8


class RefBoard:
    """Dictionary board: ``squares[(file, rank)] = (color, kind)``."""

    def __init__(self, pos: Position):
        self.squares = {}
        for sq, p in enumerate(pos.placement):
            if p is not None:
                self.squares[(sq % 8, sq // 8)] = p
        self.turn = pos.turn
        self.castling = pos.castling
        self.ep = None if pos.ep_square is None else (pos.ep_square % 8, pos.ep_square // 8)

    def clone(self):
        b = RefBoard.__new__(RefBoard)
        b.squares = dict(self.squares)
        b.turn, b.castling, b.ep = self.turn, self.castling, self.ep
        return b

    def attacks(self, color, target):
        """True if any piece of ``color`` could capture on ``target`` by its movement rule."""
        tf, tr = target
        for (f, r), (c, kind) in self.squares.items():
            if c != color:
                continue
            df, dr = tf - f, tr - r
            if kind == PAWN:
                forward = 1 if color == WHITE else -1
                if dr == forward and abs(df) == 1:
                    return True
            elif kind == KNIGHT:
                if (df, dr) in KNIGHT_STEPS:
                    return True
            elif kind == KING:
                if max(abs(df), abs(dr)) == 1:
                    return True
            else:
                dirs = []
                if kind in (ROOK, QUEEN):
                    dirs += ROOK_DIRS
                if kind in (BISHOP, QUEEN):
                    dirs += BISHOP_DIRS
                for sf, sr in dirs:
                    x, y = f + sf, r + sr
                    while _on_board(x, y):
                        if (x, y) == target:
                            return True
                        if (x, y) in self.squares:
                            break
                        x, y = x + sf, y + sr
        return False

    def king_square(self, color):
        for sq, p in self.squares.items():
            if p == (color, KING):
                return sq
        raise ValueError("no king")

    def in_check(self, color=None):
        color = self.turn if color is None else color
        return self.attacks(1 - color, self.king_square(color))

    def pseudo_moves(self):
        """Moves as ``(from, to, promotion_kind_or_None)`` tuples."""
        us = self.turn
        out = []
        for (f, r), (c, kind) in list(self.squares.items()):
            if c != us:
                continue
            if kind == PAWN:
                fwd = 1 if us == WHITE else -1
                start_rank = 1 if us == WHITE else 6
                last_rank = 7 if us == WHITE else 0
                targets = []
                if _on_board(f, r + fwd) and (f, r + fwd) not in self.squares:
                    targets.append((f, r + fwd))
                    if r == start_rank and (f, r + 2 * fwd) not in self.squares:
                        targets.append((f, r + 2 * fwd))
                for df in (-1, 1):
                    t = (f + df, r + fwd)
                    if not _on_board(*t):
                        continue
                    occupant = self.squares.get(t)
                    if (occupant is not None and occupant[0] != us) or t == self.ep:
                        targets.append(t)
                for t in targets:
                    if t[1] == last_rank:
                        out.extend(((f, r), t, promo) for promo in (QUEEN, ROOK, BISHOP, KNIGHT))
                    else:
                        out.append(((f, r), t, None))
            elif kind in (KNIGHT, KING):
                for df, dr in KNIGHT_STEPS if kind == KNIGHT else KING_STEPS:
                    t = (f + df, r + dr)
                    if _on_board(*t) and self.squares.get(t, (None,))[0] != us:
                        out.append(((f, r), t, None))
            else:
                dirs = []
                if kind in (ROOK, QUEEN):
                    dirs += ROOK_DIRS
                if kind in (BISHOP, QUEEN):
                    dirs += BISHOP_DIRS
                for sf, sr in dirs:
                    x, y = f + sf, r + sr
                    while _on_board(x, y):
                        occupant = self.squares.get((x, y))
                        if occupant is None:
                            out.append(((f, r), (x, y), None))
                        else:
                            if occupant[0] != us:
                                out.append(((f, r), (x, y), None))
                            break
                        x, y = x + sf, y + sr
        out.extend(self._castles())
        return out

    def _castles(self):
        us = self.turn
        rank = 0 if us == WHITE else 7
        king_flag, queen_flag = (CASTLE_WK, CASTLE_WQ) if us == WHITE else (CASTLE_BK, CASTLE_BQ)
        out = []
        if self.squares.get((4, rank)) != (us, KING):
            return out
        them = 1 - us
        if self.castling & king_flag and self.squares.get((7, rank)) == (us, ROOK):
            if all((f, rank) not in self.squares for f in (5, 6)) and not any(
                self.attacks(them, (f, rank)) for f in (4, 5, 6)
            ):
                out.append(((4, rank), (6, rank), None))
        if self.castling & queen_flag and self.squares.get((0, rank)) == (us, ROOK):
            if all((f, rank) not in self.squares for f in (1, 2, 3)) and not any(
                self.attacks(them, (f, rank)) for f in (4, 3, 2)
            ):
                out.append(((4, rank), (2, rank), None))
        return out

    def make(self, move):
        src, dst, promo = move
        b = self.clone()
        color, kind = b.squares.pop(src)
        if kind == PAWN and dst == self.ep and dst not in self.squares:
            b.squares.pop((dst[0], src[1]), None)
        if kind == KING and abs(dst[0] - src[0]) == 2:
            rook_from = (7 if dst[0] == 6 else 0, src[1])
            rook_to = (5 if dst[0] == 6 else 3, src[1])
            b.squares[rook_to] = b.squares.pop(rook_from)
        b.squares[dst] = (color, promo or kind)
        for sq, flag in (((4, 0), CASTLE_WK | CASTLE_WQ), ((7, 0), CASTLE_WK), ((0, 0), CASTLE_WQ),
                         ((4, 7), CASTLE_BK | CASTLE_BQ), ((7, 7), CASTLE_BK), ((0, 7), CASTLE_BQ)):
            if src == sq or dst == sq:
                b.castling &= ~flag
        b.ep = (src[0], (src[1] + dst[1]) // 2) if kind == PAWN and abs(dst[1] - src[1]) == 2 else None
        b.turn = 1 - self.turn
        return b

    def legal_moves(self):
        out = []
        for mv in self.pseudo_moves():
            after = self.make(mv)
            if not after.in_check(self.turn):
                out.append(mv)
        return out


def ref_uci(move) -> str:
    (sf, sr), (tf, tr), promo = move
    s = SQUARE_NAMES[sf + 8 * sr] + SQUARE_NAMES[tf + 8 * tr]
    return s + ("nbrq"[[KNIGHT, BISHOP, ROOK, QUEEN].index(promo)] if promo else "")


def reference_legal_moves(pos: Position) -> list:
    """Legal moves of ``pos`` in UCI notation, sorted."""
    return sorted(ref_uci(m) for m in RefBoard(pos).legal_moves())


def reference_perft(pos: Position, depth: int) -> int:
    def rec(b, d):
        if d == 0:
            return 1
        return sum(rec(b.make(m), d - 1) for m in b.legal_moves())

    return rec(RefBoard(pos), depth)


def validate_solution(pos: Position, tree: dict, depth: int) -> bool:
    """Check a mate strategy tree with the reference rules.

    ``tree`` is ``{"move": uci, "replies": {black_uci: subtree}}``.  Every
    White move must be legal, every legal Black defence must be answered, and
    every line must end in checkmate within ``depth`` White moves.
    """
    board = RefBoard(pos)
    if board.turn != WHITE:
        return False
    return _check_white(board, tree, depth)


def _check_white(board, node, depth):
    if depth < 1:
        return False
    by_uci = {ref_uci(m): m for m in board.legal_moves()}
    move = by_uci.get(node["move"])
    if move is None:
        return False
    after = board.make(move)
    defences = after.legal_moves()
    if not defences:
        return after.in_check()
    replies = node["replies"]
    if set(replies) != {ref_uci(m) for m in defences}:
        return False
    for m in defences:
        if not _check_white(after.make(m), replies[ref_uci(m)], depth - 1):
            return False
    return True
