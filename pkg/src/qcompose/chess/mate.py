"""Forced-mate prover: depth-limited AND-OR search with memoization.

White nodes are OR nodes (one mating move suffices), Black nodes are AND
nodes (every defence must lose).  Depths count White moves.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .board import (
    BISHOP,
    KING,
    KING_ATTACKS,
    KNIGHT,
    KNIGHT_ATTACKS,
    LINE,
    PAWN,
    PAWN_ATTACKS,
    PIECE_VALUES,
    QUEEN,
    ROOK,
    WHITE,
    bishop_attacks,
    rook_attacks,
    scan,
    Board,
    IllegalPositionError,
    Position,
    move_uci,
    validate_position,
)

MATE_IN_K = "mate_in_k"
NO_FORCED_MATE = "no_forced_mate"
MAX_DEPTH = 5

_INF = 1 << 30


@dataclass(frozen=True)
class MateVerdict:
    outcome: str
    k: Optional[int] = None
    key_moves: tuple = ()
    principal_variation: tuple = ()
    solution: Optional[dict] = field(default=None, compare=False, repr=False)

    @property
    def is_mate(self) -> bool:
        return self.outcome == MATE_IN_K

    def describe(self) -> str:
        if not self.is_mate:
            return NO_FORCED_MATE
        return f"mate_in_{self.k} key={','.join(self.key_moves)} pv={' '.join(self.principal_variation)}"


class MateSearch:
    """Search state bound to one board; the memo table is private to it."""

    def __init__(self, board: Board):
        self.board = board
        # key -> [deepest depth proven to fail, shallowest depth proven to mate]
        self.memo: dict = {}
        self.killers: dict = {}
        self.nodes = 0

    # -- core AND-OR recursion ---------------------------------------------

    def white_mates(self, depth: int) -> bool:
        """White to move mates within ``depth`` moves."""
        board = self.board
        key = board.key()
        entry = self.memo.get(key)
        if entry is not None:
            if depth <= entry[0]:
                return False
            if depth >= entry[1]:
                return True
        else:
            entry = self.memo[key] = [0, _INF]
        self.nodes += 1

        result = False
        if depth == 1:
            result = self._mate_in_one()
        else:
            for m in self._order_white(board.legal_moves()):
                board.push(m)
                ok = self.black_loses(depth - 1)
                board.pop()
                if ok:
                    result = True
                    break
        if result:
            entry[1] = min(entry[1], depth)
        else:
            entry[0] = max(entry[0], depth)
        return result

    def black_loses(self, depth: int) -> bool:
        """Black to move; every reply allows mate within ``depth`` further White moves."""
        board = self.board
        if depth == 0:
            return board.is_checkmate()
        key = board.key()
        entry = self.memo.get(key)
        if entry is not None:
            if depth <= entry[0]:
                return False
            if depth >= entry[1]:
                return True
        else:
            entry = self.memo[key] = [0, _INF]
        self.nodes += 1

        result = None
        killer = self.killers.get(depth)
        if killer is not None and board.is_legal(killer):
            board.push(killer)
            if not self.white_mates(depth):
                result = False
            board.pop()
        if result is None:
            moves = board.legal_moves()
            if not moves:
                result = board.in_check()
            else:
                result = True
                for r in self._order_black(moves):
                    if r == killer:
                        continue
                    board.push(r)
                    ok = self.white_mates(depth)
                    board.pop()
                    if not ok:
                        self.killers[depth] = r
                        result = False
                        break
        if result:
            entry[1] = min(entry[1], depth)
        else:
            entry[0] = max(entry[0], depth)
        return result

    def _mate_in_one(self) -> bool:
        board = self.board
        moves = board.checking_moves()
        if not moves:
            return False
        open_flights = self._open_flights()
        for m in moves:
            if open_flights and not self._may_cover(m, open_flights):
                continue
            board.push(m)
            mated = not board.has_legal_move()
            board.pop()
            if mated:
                return True
        return False

    def _open_flights(self) -> int:
        """Empty-or-capturable squares next to the defending king that the
        attacker does not hit yet (king removed from the board, so x-rays count)."""
        board = self.board
        us = board.turn
        bk = board.king(us ^ 1)
        occ = (board.occ[0] | board.occ[1]) ^ (1 << bk)
        flights = 0
        for s in scan(KING_ATTACKS[bk] & ~board.occ[us ^ 1]):
            if not board.attackers(us, s, occ):
                flights |= 1 << s
        return flights

    def _may_cover(self, m: int, flights: int) -> bool:
        """Necessary condition for ``m`` to leave no flight in ``flights``.

        A flight can only become covered by the moved piece from its new
        square or by a slider line through the vacated square.  En passant and
        castling are not filtered.
        """
        board = self.board
        b = board.bbs
        us = board.turn
        f = m & 63
        t = (m >> 6) & 63
        kind = (m >> 12) or board.kind_at(f)
        if (kind == PAWN and t == board.ep) or (kind == KING and abs(f - t) == 2):
            return True
        bk = board.king(us ^ 1)
        occ = ((board.occ[0] | board.occ[1]) & ~(1 << bk) & ~(1 << f)) | (1 << t)
        if kind == PAWN:
            att = PAWN_ATTACKS[us][t]
        elif kind == KNIGHT:
            att = KNIGHT_ATTACKS[t]
        elif kind == KING:
            att = KING_ATTACKS[t]
        else:
            att = 0
            if kind in (BISHOP, QUEEN):
                att |= bishop_attacks(t, occ)
            if kind in (ROOK, QUEEN):
                att |= rook_attacks(t, occ)
        rest = flights & ~att
        if not rest:
            return True
        line = LINE[f]
        ours = board.occ[us] & ~(1 << f)
        rq = (b[ROOK] | b[QUEEN]) & ours
        bq = (b[BISHOP] | b[QUEEN]) & ours
        for s in scan(rest):
            if not line[s]:
                return False
            if not (rook_attacks(s, occ) & rq or bishop_attacks(s, occ) & bq):
                return False
        return True

    # -- move ordering -----------------------------------------------------

    def _order_white(self, moves: list) -> list:
        board = self.board
        them = board.occ[board.turn ^ 1]
        checks, rest = board.split_checks(moves)
        captures, quiet = [], []
        for m in rest:
            if them >> ((m >> 6) & 63) & 1:
                captures.append(m)
            else:
                quiet.append(m)
        return checks + captures + quiet

    def _order_black(self, moves: list) -> list:
        board = self.board
        them = board.occ[board.turn ^ 1]
        scored = []
        checking = set(board.split_checks(moves)[0])
        for m in moves:
            t = (m >> 6) & 63
            if them >> t & 1:
                score = 10 + PIECE_VALUES.get(board.kind_at(t), 0)
            elif m in checking:
                score = 5
            else:
                score = 0
            scored.append((-score, m))
        scored.sort()
        return [m for _, m in scored]

    # -- solution extraction -----------------------------------------------

    def mate_length(self, limit: int) -> Optional[int]:
        """Minimal White-move count to mate from the current White node, if ≤ limit."""
        for d in range(1, limit + 1):
            if self.white_mates(d):
                return d
        return None

    def black_mate_length(self, limit: int) -> Optional[int]:
        for d in range(0, limit + 1):
            if self.black_loses(d):
                return d
        return None

    def strategy(self, move: int, depth: int) -> dict:
        """Full mating strategy after White plays ``move`` (mate within ``depth``)."""
        board = self.board
        board.push(move)
        replies = {}
        for r in board.legal_moves():
            board.push(r)
            remaining = depth - 1
            reply_move = self._fastest_mate(remaining)
            replies[move_uci(r)] = self.strategy(reply_move, remaining)
            board.pop()
        board.pop()
        return {"move": move_uci(move), "replies": replies}

    def _fastest_mate(self, limit: int) -> int:
        board = self.board
        d = self.mate_length(limit)
        if d is None:
            raise RuntimeError("strategy requested for a non-mating line")
        for m in self._order_white(board.legal_moves()):
            board.push(m)
            ok = self.black_loses(d - 1)
            board.pop()
            if ok:
                return m
        raise RuntimeError("inconsistent memo: no mating move found")

    def principal_variation(self, key: int, depth: int) -> list:
        """Key move, then Black's most stubborn defence and White's quickest reply, to mate."""
        board = self.board
        line = [key]
        board.push(key)
        pushed = 1
        remaining = depth - 1
        while True:
            replies = board.legal_moves()
            if not replies:
                break
            best, best_len = None, -1
            for r in replies:
                board.push(r)
                n = self.mate_length(remaining)
                board.pop()
                if n is not None and n > best_len:
                    best, best_len = r, n
            board.push(best)
            line.append(best)
            w = self._fastest_mate(best_len)
            board.push(w)
            line.append(w)
            pushed += 2
            remaining = best_len - 1
        for _ in range(pushed):
            board.pop()
        return line


def prove_mate_in_n(position, n_max: int, *, with_solution: bool = False) -> MateVerdict:
    """Decide whether White forces mate within ``n_max`` moves; ``k`` is minimal."""
    if not 1 <= n_max <= MAX_DEPTH:
        raise ValueError(f"n_max must be in 1..{MAX_DEPTH}, got {n_max}")
    if isinstance(position, str):
        position = Position.from_fen(position)
    validate_position(position)
    if position.turn != WHITE:
        raise IllegalPositionError("problems are composed with White to move")
    board = Board(position)
    if not board.has_legal_move():
        raise IllegalPositionError("terminal position (White has no legal move)")

    search = MateSearch(board)
    moves = board.legal_moves()
    for k in range(1, n_max + 1):
        keys = []
        for m in moves:
            board.push(m)
            ok = search.black_loses(k - 1)
            board.pop()
            if ok:
                keys.append(m)
        if keys:
            pv = search.principal_variation(keys[0], k)
            solution = search.strategy(keys[0], k) if with_solution else None
            return MateVerdict(
                MATE_IN_K,
                k,
                tuple(move_uci(m) for m in keys),
                tuple(move_uci(m) for m in pv),
                solution,
            )
    return MateVerdict(NO_FORCED_MATE)


def mate_strategy(position: Position, key_uci: str, k: int) -> dict:
    """Strategy tree for a known key move, for independent validation."""
    board = Board(position)
    search = MateSearch(board)
    by_uci = {move_uci(m): m for m in board.legal_moves()}
    return search.strategy(by_uci[key_uci], k)
