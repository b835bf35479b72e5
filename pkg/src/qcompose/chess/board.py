"""Bitboard chess kernel: positions, FEN, legal move generation and perft.

Squares are numbered 0..63 with a1 = 0, h1 = 7, a8 = 56.  Moves inside the
kernel are plain ints ``from | to << 6 | promotion << 12``; :class:`Move` is the
public, hashable form used in records and reports.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

WHITE, BLACK = 0, 1
PAWN, KNIGHT, BISHOP, ROOK, QUEEN, KING = 1, 2, 3, 4, 5, 6
PIECE_SYMBOLS = " pnbrqk"
PIECE_VALUES = {PAWN: 1, KNIGHT: 3, BISHOP: 3, ROOK: 5, QUEEN: 9}

FILE_NAMES = "abcdefgh"
SQUARE_NAMES = [f + r for r in "12345678" for f in FILE_NAMES]

CASTLE_WK, CASTLE_WQ, CASTLE_BK, CASTLE_BQ = 1, 2, 4, 8

START_FEN = "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1"

BB_ALL = (1 << 64) - 1
BB_RANK_1 = 0xFF
BB_RANK_3 = 0xFF << 16
BB_RANK_6 = 0xFF << 40
BB_RANK_8 = 0xFF << 56
BB_BACKRANKS = BB_RANK_1 | BB_RANK_8


class FenError(ValueError):
    """Malformed FEN text."""


class IllegalPositionError(ValueError):
    """Position violates a legality invariant."""


def square_file(sq: int) -> int:
    return sq & 7


def square_rank(sq: int) -> int:
    return sq >> 3


def parse_square(name: str) -> int:
    if len(name) != 2 or name[0] not in FILE_NAMES or name[1] not in "12345678":
        raise ValueError(f"bad square {name!r}")
    return FILE_NAMES.index(name[0]) + 8 * (int(name[1]) - 1)


def _distance(a: int, b: int) -> int:
    return max(abs(square_file(a) - square_file(b)), abs(square_rank(a) - square_rank(b)))


def _step_table(deltas):
    table = []
    for sq in range(64):
        bb = 0
        for d in deltas:
            to = sq + d
            if 0 <= to < 64 and _distance(sq, to) <= 2:
                bb |= 1 << to
        table.append(bb)
    return table


KNIGHT_ATTACKS = _step_table([17, 15, 10, 6, -17, -15, -10, -6])
KING_ATTACKS = _step_table([9, 8, 7, 1, -9, -8, -7, -1])
PAWN_ATTACKS = [_step_table([7, 9]), _step_table([-7, -9])]


def _slide(sq: int, occ: int, deltas) -> int:
    bb = 0
    for d in deltas:
        s = sq
        while True:
            t = s + d
            if not 0 <= t < 64 or _distance(s, t) > 2:
                break
            bb |= 1 << t
            if occ & (1 << t):
                break
            s = t
    return bb


def _edges(sq: int) -> int:
    ranks = (BB_RANK_1 | BB_RANK_8) & ~(0xFF << (8 * square_rank(sq)))
    files = (0x0101010101010101 | 0x8080808080808080) & ~(0x0101010101010101 << square_file(sq))
    return ranks | files


def _subsets(mask: int) -> Iterator[int]:
    sub = 0
    while True:
        yield sub
        sub = (sub - mask) & mask
        if not sub:
            return


def _attack_table(deltas):
    masks, tables = [], []
    for sq in range(64):
        mask = _slide(sq, 0, deltas) & ~_edges(sq)
        masks.append(mask)
        tables.append({sub: _slide(sq, sub, deltas) for sub in _subsets(mask)})
    return masks, tables


DIAG_MASKS, DIAG_ATTACKS = _attack_table([-9, -7, 7, 9])
FILE_MASKS, FILE_ATTACKS = _attack_table([-8, 8])
RANK_MASKS, RANK_ATTACKS = _attack_table([-1, 1])


def bishop_attacks(sq: int, occ: int) -> int:
    return DIAG_ATTACKS[sq][occ & DIAG_MASKS[sq]]


def rook_attacks(sq: int, occ: int) -> int:
    return RANK_ATTACKS[sq][occ & RANK_MASKS[sq]] | FILE_ATTACKS[sq][occ & FILE_MASKS[sq]]


def _line_tables():
    lines = [[0] * 64 for _ in range(64)]
    between = [[0] * 64 for _ in range(64)]
    for a in range(64):
        for b in range(64):
            if a == b:
                continue
            for attacks in (bishop_attacks, rook_attacks):
                if attacks(a, 0) & (1 << b):
                    lines[a][b] = (attacks(a, 0) & attacks(b, 0)) | (1 << a) | (1 << b)
                    between[a][b] = attacks(a, 1 << b) & attacks(b, 1 << a)
    return lines, between


LINE, BETWEEN = _line_tables()


def scan(bb: int) -> Iterator[int]:
    while bb:
        low = bb & -bb
        yield low.bit_length() - 1
        bb ^= low


def lsb(bb: int) -> int:
    return (bb & -bb).bit_length() - 1


def encode_move(from_sq: int, to_sq: int, promotion: int = 0) -> int:
    return from_sq | (to_sq << 6) | (promotion << 12)


def move_uci(m: int) -> str:
    promo = m >> 12
    return SQUARE_NAMES[m & 63] + SQUARE_NAMES[(m >> 6) & 63] + (PIECE_SYMBOLS[promo] if promo else "")


def parse_uci(text: str) -> int:
    if len(text) not in (4, 5):
        raise ValueError(f"bad move {text!r}")
    promo = 0
    if len(text) == 5:
        if text[4] not in "nbrq":
            raise ValueError(f"bad promotion in {text!r}")
        promo = PIECE_SYMBOLS.index(text[4])
    return encode_move(parse_square(text[:2]), parse_square(text[2:4]), promo)


@dataclass(frozen=True)
class Move:
    from_sq: int
    to_sq: int
    promotion: Optional[int] = None
    flags: frozenset = frozenset()

    def uci(self) -> str:
        return move_uci(self.code)

    @property
    def code(self) -> int:
        return encode_move(self.from_sq, self.to_sq, self.promotion or 0)

    def __str__(self) -> str:
        return self.uci()


@dataclass(frozen=True)
class Position:
    """Immutable chess position.

    ``placement`` holds 64 entries, each ``None`` or a ``(color, kind)`` pair.
    ``castling`` is a bit set of the ``CASTLE_*`` flags.
    """

    placement: tuple
    turn: int = WHITE
    castling: int = 0
    ep_square: Optional[int] = None
    halfmove: int = 0
    fullmove: int = 1

    @classmethod
    def from_fen(cls, fen: str) -> "Position":
        return parse_fen(fen)

    def fen(self) -> str:
        return emit_fen(self)

    def piece_count(self) -> int:
        return sum(p is not None for p in self.placement)

    def pieces(self, color: int) -> list:
        return [(sq, p[1]) for sq, p in enumerate(self.placement) if p is not None and p[0] == color]


def parse_fen(fen: str) -> Position:
    parts = fen.split()
    if len(parts) == 4:
        parts += ["0", "1"]
    if len(parts) != 6:
        raise FenError(f"expected 6 fields, got {len(parts)}")
    board, side, castling, ep, half, full = parts

    rows = board.split("/")
    if len(rows) != 8:
        raise FenError(f"placement: expected 8 ranks, got {len(rows)}")
    placement: list = [None] * 64
    for i, row in enumerate(rows):
        rank = 7 - i
        file = 0
        prev_digit = False
        for ch in row:
            if ch.isdigit():
                if prev_digit or ch in "09":
                    raise FenError(f"placement: bad empty-square run in rank {rank + 1}")
                file += int(ch)
                prev_digit = True
            elif ch.lower() in "pnbrqk":
                if file > 7:
                    raise FenError(f"placement: rank {rank + 1} too long")
                color = WHITE if ch.isupper() else BLACK
                placement[rank * 8 + file] = (color, PIECE_SYMBOLS.index(ch.lower()))
                file += 1
                prev_digit = False
            else:
                raise FenError(f"placement: bad piece character {ch!r}")
        if file != 8:
            raise FenError(f"placement: rank {rank + 1} has {file} squares")

    if side not in ("w", "b"):
        raise FenError(f"side to move: expected 'w' or 'b', got {side!r}")

    flags = 0
    if castling != "-":
        for ch in castling:
            bit = {"K": CASTLE_WK, "Q": CASTLE_WQ, "k": CASTLE_BK, "q": CASTLE_BQ}.get(ch)
            if bit is None or flags & bit:
                raise FenError(f"castling: bad field {castling!r}")
            flags |= bit

    ep_sq = None
    if ep != "-":
        try:
            ep_sq = parse_square(ep)
        except ValueError:
            raise FenError(f"en passant: bad square {ep!r}") from None
        if square_rank(ep_sq) not in (2, 5):
            raise FenError(f"en passant: square {ep!r} not on rank 3 or 6")

    try:
        halfmove, fullmove = int(half), int(full)
    except ValueError:
        raise FenError(f"counters: non-integer {half!r} / {full!r}") from None
    if halfmove < 0:
        raise FenError(f"halfmove clock: negative value {halfmove}")
    if fullmove < 1:
        raise FenError(f"fullmove number: must be >= 1, got {fullmove}")

    return Position(tuple(placement), WHITE if side == "w" else BLACK, flags, ep_sq, halfmove, fullmove)


def emit_fen(pos: Position) -> str:
    rows = []
    for rank in range(7, -1, -1):
        row, empty = "", 0
        for file in range(8):
            p = pos.placement[rank * 8 + file]
            if p is None:
                empty += 1
                continue
            if empty:
                row += str(empty)
                empty = 0
            sym = PIECE_SYMBOLS[p[1]]
            row += sym.upper() if p[0] == WHITE else sym
        if empty:
            row += str(empty)
        rows.append(row)
    castling = "".join(c for c, bit in zip("KQkq", (CASTLE_WK, CASTLE_WQ, CASTLE_BK, CASTLE_BQ)) if pos.castling & bit)
    ep = SQUARE_NAMES[pos.ep_square] if pos.ep_square is not None else "-"
    side = "w" if pos.turn == WHITE else "b"
    return f"{'/'.join(rows)} {side} {castling or '-'} {ep} {pos.halfmove} {pos.fullmove}"


class Board:
    """Mutable search board with push/pop.

    ``bbs[kind]`` holds the squares of each piece kind (both colors) and
    ``occ[color]`` the squares of each color.
    """

    __slots__ = ("bbs", "occ", "turn", "castling", "ep", "halfmove", "fullmove", "_stack")

    def __init__(self, position: Optional[Position] = None):
        if position is None:
            position = parse_fen(START_FEN)
        self.bbs = [0] * 7
        self.occ = [0, 0]
        for sq, p in enumerate(position.placement):
            if p is not None:
                self.bbs[p[1]] |= 1 << sq
                self.occ[p[0]] |= 1 << sq
        self.turn = position.turn
        self.castling = position.castling
        self.ep = -1 if position.ep_square is None else position.ep_square
        self.halfmove = position.halfmove
        self.fullmove = position.fullmove
        self._stack = []

    @classmethod
    def from_fen(cls, fen: str) -> "Board":
        return cls(parse_fen(fen))

    def copy(self) -> "Board":
        b = Board.__new__(Board)
        b.bbs = self.bbs[:]
        b.occ = self.occ[:]
        b.turn, b.castling, b.ep = self.turn, self.castling, self.ep
        b.halfmove, b.fullmove = self.halfmove, self.fullmove
        b._stack = []
        return b

    def position(self) -> Position:
        placement = [None] * 64
        for kind in range(1, 7):
            for sq in scan(self.bbs[kind]):
                placement[sq] = (WHITE if self.occ[WHITE] >> sq & 1 else BLACK, kind)
        return Position(
            tuple(placement), self.turn, self.castling, None if self.ep < 0 else self.ep, self.halfmove, self.fullmove
        )

    def fen(self) -> str:
        return emit_fen(self.position())

    def key(self) -> tuple:
        b = self.bbs
        return (self.occ[0], self.occ[1], b[1], b[2], b[3], b[4], b[5], b[6], self.turn, self.castling, self.ep)

    def kind_at(self, sq: int) -> int:
        mask = 1 << sq
        if not (self.occ[0] | self.occ[1]) & mask:
            return 0
        b = self.bbs
        for kind in (PAWN, KNIGHT, BISHOP, ROOK, QUEEN, KING):
            if b[kind] & mask:
                return kind
        return 0

    def color_at(self, sq: int) -> Optional[int]:
        if self.occ[WHITE] >> sq & 1:
            return WHITE
        if self.occ[BLACK] >> sq & 1:
            return BLACK
        return None

    def king(self, color: int) -> int:
        return lsb(self.bbs[KING] & self.occ[color])

    # -- attacks ---------------------------------------------------------

    def attackers(self, color: int, sq: int, occ: Optional[int] = None) -> int:
        if occ is None:
            occ = self.occ[0] | self.occ[1]
        b = self.bbs
        queens = b[QUEEN]
        att = (
            (KNIGHT_ATTACKS[sq] & b[KNIGHT])
            | (KING_ATTACKS[sq] & b[KING])
            | (PAWN_ATTACKS[color ^ 1][sq] & b[PAWN])
            | (RANK_ATTACKS[sq][occ & RANK_MASKS[sq]] & (b[ROOK] | queens))
            | (FILE_ATTACKS[sq][occ & FILE_MASKS[sq]] & (b[ROOK] | queens))
            | (DIAG_ATTACKS[sq][occ & DIAG_MASKS[sq]] & (b[BISHOP] | queens))
        )
        return att & self.occ[color]

    def attacks_from(self, sq: int, occ: Optional[int] = None) -> int:
        """Squares attacked by the piece on ``sq``."""
        if occ is None:
            occ = self.occ[0] | self.occ[1]
        kind = self.kind_at(sq)
        if kind == PAWN:
            return PAWN_ATTACKS[self.color_at(sq)][sq]
        if kind == KNIGHT:
            return KNIGHT_ATTACKS[sq]
        if kind == KING:
            return KING_ATTACKS[sq]
        att = 0
        if kind in (BISHOP, QUEEN):
            att |= bishop_attacks(sq, occ)
        if kind in (ROOK, QUEEN):
            att |= rook_attacks(sq, occ)
        return att

    def is_attacked(self, color: int, sq: int) -> bool:
        return bool(self.attackers(color, sq))

    def checkers(self) -> int:
        return self.attackers(self.turn ^ 1, self.king(self.turn))

    def in_check(self) -> bool:
        return bool(self.checkers())

    def slider_blockers(self, king_sq: int, color: int) -> int:
        """Pieces (either color) that alone shield ``king_sq`` from a slider of ``color``."""
        b = self.bbs
        occ = self.occ[0] | self.occ[1]
        snipers = (
            (RANK_ATTACKS[king_sq][0] | FILE_ATTACKS[king_sq][0]) & (b[ROOK] | b[QUEEN])
            | DIAG_ATTACKS[king_sq][0] & (b[BISHOP] | b[QUEEN])
        ) & self.occ[color]
        blockers = 0
        for s in scan(snipers):
            between = BETWEEN[king_sq][s] & occ
            if between and not between & (between - 1):
                blockers |= between
        return blockers

    # -- make / unmake ---------------------------------------------------

    def push(self, m: int) -> None:
        b = self.bbs
        occ = self.occ
        self._stack.append((b[:], occ[:], self.castling, self.ep, self.halfmove, self.fullmove))
        us = self.turn
        them = us ^ 1
        f = m & 63
        t = (m >> 6) & 63
        promo = m >> 12
        fmask = 1 << f
        tmask = 1 << t
        kind = self.kind_at(f)

        self.halfmove += 1
        if occ[them] & tmask:
            captured = self.kind_at(t)
            b[captured] ^= tmask
            occ[them] ^= tmask
            self.halfmove = 0
        if kind == PAWN:
            self.halfmove = 0
            if t == self.ep:
                cap = t - 8 if us == WHITE else t + 8
                b[PAWN] ^= 1 << cap
                occ[them] ^= 1 << cap

        b[kind] ^= fmask
        b[promo or kind] |= tmask
        occ[us] ^= fmask | tmask

        if kind == KING and abs(t - f) == 2:
            rf, rt = (t + 1, t - 1) if t > f else (t - 2, t + 1)
            rmask = (1 << rf) | (1 << rt)
            b[ROOK] ^= rmask
            occ[us] ^= rmask

        if self.castling:
            touched = fmask | tmask
            if touched & 0x91:  # a1, e1, h1
                if touched & 0x11:
                    self.castling &= ~CASTLE_WQ
                if touched & 0x90:
                    self.castling &= ~CASTLE_WK
            if touched & (0x91 << 56):
                if touched & (0x11 << 56):
                    self.castling &= ~CASTLE_BQ
                if touched & (0x90 << 56):
                    self.castling &= ~CASTLE_BK

        self.ep = (f + t) >> 1 if kind == PAWN and abs(t - f) == 16 else -1
        if us == BLACK:
            self.fullmove += 1
        self.turn = them

    def pop(self) -> None:
        self.bbs, self.occ, self.castling, self.ep, self.halfmove, self.fullmove = self._stack.pop()
        self.turn ^= 1

    # -- move generation -------------------------------------------------

    def _pawn_moves(self, us: int, pawns: int, targets: int, occ: int, ep_targets: int, out: list) -> None:
        them_occ = self.occ[us ^ 1]
        empty = ~occ & BB_ALL
        if us == WHITE:
            single = (pawns << 8) & empty
            double = ((single & BB_RANK_3) << 8) & empty
            back = 8
        else:
            single = (pawns >> 8) & empty
            double = ((single & BB_RANK_6) >> 8) & empty
            back = -8
        for t in scan(single & targets):
            f = t - back
            if (1 << t) & BB_BACKRANKS:
                out.extend(encode_move(f, t, p) for p in (QUEEN, ROOK, BISHOP, KNIGHT))
            else:
                out.append(f | t << 6)
        for t in scan(double & targets):
            out.append((t - 2 * back) | t << 6)
        for f in scan(pawns):
            caps = PAWN_ATTACKS[us][f] & them_occ & targets
            for t in scan(caps):
                if (1 << t) & BB_BACKRANKS:
                    out.extend(encode_move(f, t, p) for p in (QUEEN, ROOK, BISHOP, KNIGHT))
                else:
                    out.append(f | t << 6)
            if ep_targets and PAWN_ATTACKS[us][f] & ep_targets:
                out.append(f | self.ep << 6)

    def _piece_moves(self, us: int, targets: int, occ: int, out: list) -> None:
        b = self.bbs
        own = self.occ[us]
        targets &= ~own
        for f in scan(b[KNIGHT] & own):
            for t in scan(KNIGHT_ATTACKS[f] & targets):
                out.append(f | t << 6)
        for f in scan((b[BISHOP] | b[QUEEN]) & own):
            for t in scan(DIAG_ATTACKS[f][occ & DIAG_MASKS[f]] & targets):
                out.append(f | t << 6)
        for f in scan((b[ROOK] | b[QUEEN]) & own):
            att = RANK_ATTACKS[f][occ & RANK_MASKS[f]] | FILE_ATTACKS[f][occ & FILE_MASKS[f]]
            for t in scan(att & targets):
                out.append(f | t << 6)

    def _ep_targets(self, us: int) -> int:
        if self.ep < 0:
            return 0
        cap = self.ep - 8 if us == WHITE else self.ep + 8
        if not (self.bbs[PAWN] & self.occ[us ^ 1]) >> cap & 1:
            return 0
        return 1 << self.ep

    def _ep_is_safe(self, m: int) -> bool:
        self.push(m)
        ok = not self.attackers(self.turn, self.king(self.turn ^ 1))
        self.pop()
        return ok

    def _castling_moves(self, us: int, occ: int, out: list) -> None:
        rights = self.castling & ((CASTLE_WK | CASTLE_WQ) if us == WHITE else (CASTLE_BK | CASTLE_BQ))
        if not rights:
            return
        base = 0 if us == WHITE else 56
        own_rooks = self.bbs[ROOK] & self.occ[us]
        if not (self.bbs[KING] & self.occ[us]) >> (base + 4) & 1:
            return
        them = us ^ 1
        if rights & (CASTLE_WK | CASTLE_BK) and own_rooks >> (base + 7) & 1:
            if not occ & (0x60 << base) and not any(self.attackers(them, base + s) for s in (4, 5, 6)):
                out.append((base + 4) | (base + 6) << 6)
        if rights & (CASTLE_WQ | CASTLE_BQ) and own_rooks >> base & 1:
            if not occ & (0x0E << base) and not any(self.attackers(them, base + s) for s in (4, 3, 2)):
                out.append((base + 4) | (base + 2) << 6)

    def pseudo_moves(self) -> list:
        """Moves obeying piece movement rules, ignoring king safety (no castling)."""
        us = self.turn
        occ = self.occ[0] | self.occ[1]
        own = self.occ[us]
        out: list = []
        ksq = self.king(us)
        out.extend(ksq | t << 6 for t in scan(KING_ATTACKS[ksq] & ~own))
        self._piece_moves(us, BB_ALL, occ, out)
        self._pawn_moves(us, self.bbs[PAWN] & own, BB_ALL, occ, self._ep_targets(us), out)
        return out

    def legal_moves(self) -> list:
        """All legal moves for the side to move, as encoded ints."""
        us = self.turn
        them = us ^ 1
        occ = self.occ[0] | self.occ[1]
        own = self.occ[us]
        ksq = self.king(us)
        checkers = self.attackers(them, ksq, occ)
        out: list = []

        occ_no_king = occ ^ (1 << ksq)
        for t in scan(KING_ATTACKS[ksq] & ~own):
            if not self.attackers(them, t, occ_no_king):
                out.append(ksq | t << 6)

        if checkers & (checkers - 1):
            return out

        if checkers:
            c = lsb(checkers)
            targets = BETWEEN[ksq][c] | checkers
        else:
            targets = BB_ALL
            self._castling_moves(us, occ, out)

        ep_targets = self._ep_targets(us)
        if checkers and ep_targets and not checkers & self.bbs[PAWN]:
            ep_targets = 0
        first = len(out)
        self._piece_moves(us, targets, occ, out)
        self._pawn_moves(us, self.bbs[PAWN] & own, targets, occ, ep_targets, out)

        blockers = self.slider_blockers(ksq, them) & own
        if not blockers and not ep_targets:
            return out
        legal = out[:first]
        for m in out[first:]:
            f = m & 63
            t = (m >> 6) & 63
            if ep_targets and t == self.ep and self.bbs[PAWN] >> f & 1:
                if self._ep_is_safe(m):
                    legal.append(m)
            elif not (blockers >> f & 1) or LINE[f][ksq] >> t & 1:
                legal.append(m)
        return legal

    def has_legal_move(self) -> bool:
        us = self.turn
        them = us ^ 1
        b = self.bbs
        occ = self.occ[0] | self.occ[1]
        own = self.occ[us]
        ksq = self.king(us)
        occ_no_king = occ ^ (1 << ksq)
        flights = KING_ATTACKS[ksq] & ~own
        while flights:
            low = flights & -flights
            flights ^= low
            if not self.attackers(them, low.bit_length() - 1, occ_no_king):
                return True
        checkers = self.attackers(them, ksq, occ)
        if not checkers:
            return bool(self.legal_moves())
        if checkers & (checkers - 1):
            return False
        # single check: capture the checker or interpose, never with a pinned piece
        c = lsb(checkers)
        movers = own & ~self.slider_blockers(ksq, them) & ~b[KING]
        pawns = b[PAWN] & movers
        pieces = movers & ~b[PAWN]
        if self.attackers(us, c, occ) & pieces or PAWN_ATTACKS[them][c] & pawns:
            return True
        step = 8 if us == WHITE else -8
        double_rank = 3 if us == WHITE else 4
        for s in scan(BETWEEN[ksq][c]):
            if self.attackers(us, s, occ) & pieces:
                return True
            if pawns >> (s - step) & 1:
                return True
            if square_rank(s) == double_rank and pawns >> (s - 2 * step) & 1 and not occ >> (s - step) & 1:
                return True
        if b[PAWN] >> c & 1:
            ep_targets = self._ep_targets(us)
            if ep_targets:
                for f in scan(PAWN_ATTACKS[them][self.ep] & b[PAWN] & own):
                    if self._ep_is_safe(f | self.ep << 6):
                        return True
        return False

    def gives_check(self, m: int) -> bool:
        """Whether move ``m`` (legal for the side to move) checks the enemy king."""
        us = self.turn
        f = m & 63
        t = (m >> 6) & 63
        kind = self.kind_at(f)
        promo = m >> 12
        if (kind == PAWN and t == self.ep) or (kind == KING and abs(t - f) == 2):
            self.push(m)
            check = self.in_check()
            self.pop()
            return check
        ek = self.king(us ^ 1)
        occ = (self.occ[0] | self.occ[1]) & ~(1 << f) | (1 << t)
        kind = promo or kind
        if kind == PAWN:
            if PAWN_ATTACKS[us][t] >> ek & 1:
                return True
        elif kind == KNIGHT:
            if KNIGHT_ATTACKS[t] >> ek & 1:
                return True
        elif kind != KING:
            if kind != ROOK and DIAG_ATTACKS[t][occ & DIAG_MASKS[t]] >> ek & 1:
                return True
            if kind != BISHOP and rook_attacks(t, occ) >> ek & 1:
                return True
        # discovered check through the vacated square
        if self.slider_blockers(ek, us) >> f & 1 and not LINE[f][ek] >> t & 1:
            return True
        return False

    def split_checks(self, moves: list) -> tuple:
        """Partition legal ``moves`` into (checking, non-checking) lists.

        Check geometry is computed once per call; promotions, castling and en
        passant fall back to :meth:`gives_check`.
        """
        us = self.turn
        b = self.bbs
        own = self.occ[us]
        occ = self.occ[0] | self.occ[1]
        ek = self.king(us ^ 1)
        pawn_chk = PAWN_ATTACKS[us ^ 1][ek]
        knight_chk = KNIGHT_ATTACKS[ek]
        diag_chk = DIAG_ATTACKS[ek][occ & DIAG_MASKS[ek]]
        orth_chk = RANK_ATTACKS[ek][occ & RANK_MASKS[ek]] | FILE_ATTACKS[ek][occ & FILE_MASKS[ek]]
        disc = self.slider_blockers(ek, us) & own
        kinds = {}
        for kind, chk in ((PAWN, pawn_chk), (KNIGHT, knight_chk), (BISHOP, diag_chk), (ROOK, orth_chk),
                          (QUEEN, diag_chk | orth_chk), (KING, 0)):
            for sq in scan(b[kind] & own):
                kinds[sq] = (kind, chk)
        line_ek = LINE
        checks, rest = [], []
        ep = self.ep
        for m in moves:
            f = m & 63
            t = (m >> 6) & 63
            kind, chk = kinds[f]
            if m >> 12 or (kind == PAWN and t == ep) or (kind == KING and (t - f == 2 or f - t == 2)):
                (checks if self.gives_check(m) else rest).append(m)
            elif chk >> t & 1 or (disc >> f & 1 and not line_ek[f][ek] >> t & 1):
                checks.append(m)
            else:
                rest.append(m)
        return checks, rest

    def is_legal(self, m: int) -> bool:
        """Legality test for a single encoded move (castling is never accepted here)."""
        us = self.turn
        f = m & 63
        t = (m >> 6) & 63
        own = self.occ[us]
        if not own >> f & 1 or own >> t & 1 or f == t:
            return False
        kind = self.kind_at(f)
        promo = m >> 12
        occ = own | self.occ[us ^ 1]
        if kind == PAWN:
            last = (1 << t) & BB_BACKRANKS
            if bool(promo) != bool(last) or promo in (PAWN, KING):
                return False
            step = 8 if us == WHITE else -8
            if t - f == step:
                ok = not occ >> t & 1
            elif t - f == 2 * step:
                ok = square_rank(f) == (1 if us == WHITE else 6) and not occ >> t & 1 and not occ >> (f + step) & 1
            elif PAWN_ATTACKS[us][f] >> t & 1:
                ok = bool(self.occ[us ^ 1] >> t & 1) or (t == self.ep and bool(self._ep_targets(us)))
            else:
                ok = False
        elif promo:
            return False
        elif kind == KING:
            ok = KING_ATTACKS[f] >> t & 1
        else:
            ok = self.attacks_from(f, occ) >> t & 1
        if not ok:
            return False
        self.push(m)
        safe = not self.attackers(self.turn, self.king(us))
        self.pop()
        return safe

    def checking_moves(self) -> list:
        """Legal moves that give check, generated without enumerating quiet moves."""
        us = self.turn
        them = us ^ 1
        b = self.bbs
        own = self.occ[us]
        occ = self.occ[0] | self.occ[1]
        ksq = self.king(us)
        if self.attackers(them, ksq, occ) or self.castling:
            return self.split_checks(self.legal_moves())[0]
        ek = self.king(them)
        notown = ~own & BB_ALL
        diag_chk = DIAG_ATTACKS[ek][occ & DIAG_MASKS[ek]]
        orth_chk = RANK_ATTACKS[ek][occ & RANK_MASKS[ek]] | FILE_ATTACKS[ek][occ & FILE_MASKS[ek]]
        disc = self.slider_blockers(ek, us) & own
        pinned = self.slider_blockers(ksq, them) & own
        out = []

        for f in scan(b[KNIGHT] & own):
            if pinned >> f & 1:
                continue
            dests = KNIGHT_ATTACKS[f] & notown
            cand = dests if disc >> f & 1 else dests & KNIGHT_ATTACKS[ek]
            out.extend(f | t << 6 for t in scan(cand))

        for f in scan((b[BISHOP] | b[ROOK] | b[QUEEN]) & own):
            att = 0
            chk = 0
            if b[BISHOP] >> f & 1 or b[QUEEN] >> f & 1:
                att |= DIAG_ATTACKS[f][occ & DIAG_MASKS[f]]
                chk |= diag_chk
            if b[ROOK] >> f & 1 or b[QUEEN] >> f & 1:
                att |= RANK_ATTACKS[f][occ & RANK_MASKS[f]] | FILE_ATTACKS[f][occ & FILE_MASKS[f]]
                chk |= orth_chk
            dests = att & notown
            cand = dests & chk
            if disc >> f & 1:
                cand |= dests & ~LINE[f][ek]
            if pinned >> f & 1:
                cand &= LINE[f][ksq]
            out.extend(f | t << 6 for t in scan(cand))

        if disc >> ksq & 1:
            occ_no_king = occ ^ (1 << ksq)
            for t in scan(KING_ATTACKS[ksq] & notown & ~LINE[ksq][ek]):
                if not self.attackers(them, t, occ_no_king):
                    out.append(ksq | t << 6)

        pawns = b[PAWN] & own
        if pawns:
            pawn_moves: list = []
            self._pawn_moves(us, pawns, BB_ALL, occ, self._ep_targets(us), pawn_moves)
            pawn_chk = PAWN_ATTACKS[them][ek]
            for m in pawn_moves:
                f = m & 63
                t = (m >> 6) & 63
                if t == self.ep:
                    if self._ep_is_safe(m) and self.gives_check(m):
                        out.append(m)
                    continue
                if pinned >> f & 1 and not LINE[f][ksq] >> t & 1:
                    continue
                if m >> 12:
                    if self.gives_check(m):
                        out.append(m)
                elif pawn_chk >> t & 1 or (disc >> f & 1 and not LINE[f][ek] >> t & 1):
                    out.append(m)
        return out

    def is_checkmate(self) -> bool:
        return self.in_check() and not self.has_legal_move()

    def is_stalemate(self) -> bool:
        return not self.in_check() and not self.has_legal_move()

    def move_flags(self, m: int) -> frozenset:
        f = m & 63
        t = (m >> 6) & 63
        kind = self.kind_at(f)
        flags = set()
        if self.occ[self.turn ^ 1] >> t & 1:
            flags.add("capture")
        if kind == PAWN and t == self.ep:
            flags.update(("capture", "en-passant"))
        if kind == PAWN and abs(t - f) == 16:
            flags.add("double-push")
        if kind == KING and abs(t - f) == 2:
            flags.add("castle")
        return frozenset(flags)

    def to_move(self, m: int) -> Move:
        promo = m >> 12
        return Move(m & 63, (m >> 6) & 63, promo or None, self.move_flags(m))


def validate_position(pos: Position) -> None:
    """Raise :class:`IllegalPositionError` unless ``pos`` satisfies the legality invariants."""
    kings = [[sq for sq, p in enumerate(pos.placement) if p == (c, KING)] for c in (WHITE, BLACK)]
    for color, ks in zip(("white", "black"), kings):
        if len(ks) != 1:
            raise IllegalPositionError(f"{color} has {len(ks)} kings")
    if _distance(kings[0][0], kings[1][0]) <= 1:
        raise IllegalPositionError("kings on adjacent squares")
    for sq, p in enumerate(pos.placement):
        if p is not None and p[1] == PAWN and square_rank(sq) in (0, 7):
            raise IllegalPositionError(f"pawn on back rank at {SQUARE_NAMES[sq]}")
    if pos.ep_square is not None:
        rank = square_rank(pos.ep_square)
        pusher = pos.ep_square - 8 if pos.turn == WHITE else pos.ep_square + 8
        if rank != (5 if pos.turn == WHITE else 2) or pos.placement[pusher] != (pos.turn ^ 1, PAWN):
            raise IllegalPositionError(f"inconsistent en passant square {SQUARE_NAMES[pos.ep_square]}")
    board = Board(pos)
    them = pos.turn ^ 1
    if board.attackers(pos.turn, board.king(them)):
        raise IllegalPositionError("side not to move is in check")


def legal_moves(pos: Position) -> list:
    board = Board(pos)
    return [board.to_move(m) for m in board.legal_moves()]


def perft(pos, depth: int) -> int:
    board = pos if isinstance(pos, Board) else Board(pos)
    if depth < 0:
        raise ValueError("depth must be >= 0")
    return _perft(board, depth)


def _perft(board: Board, depth: int) -> int:
    if depth == 0:
        return 1
    moves = board.legal_moves()
    if depth == 1:
        return len(moves)
    n = 0
    for m in moves:
        board.push(m)
        n += _perft(board, depth - 1)
        board.pop()
    return n
