"""Stochastic mate-in-three composer.

Randomness enters at three points only: choosing a material configuration,
choosing how many attempts to spend on it, and placing or removing pieces.
Each candidate is classified by the mate prover and accepted mates are
scored.
"""

from __future__ import annotations

import hashlib
import json
import time
from collections import Counter
from dataclasses import asdict, dataclass, field
from importlib import resources
from typing import Iterator, Optional, Union

import yaml

from . import aesthetics
from .chess.board import (
    BLACK,
    KING,
    PAWN,
    PIECE_SYMBOLS,
    WHITE,
    Board,
    Position,
    emit_fen,
    scan,
)
from .chess.mate import prove_mate_in_n
from .entropy import next_int_below

MATE_IN_3 = "mate_in_3"
MATE_IN_2_BYPRODUCT = "mate_in_2_byproduct"
REJECTED_INVALID = "rejected_invalid"
REJECTED_NO_MATE = "rejected_no_mate"
ACCEPTED = (MATE_IN_3, MATE_IN_2_BYPRODUCT)

_LETTERS = "PNBRQ"


class ConfigurationError(ValueError):
    pass


class PlacementFailure(RuntimeError):
    """Candidate placement retries exhausted."""


@dataclass(frozen=True)
class PieceConfiguration:
    """Non-king material per side, as piece letters (e.g. ``"QR"`` vs ``"PP"``)."""

    white: str = ""
    black: str = ""

    def __post_init__(self):
        for side in (self.white, self.black):
            bad = set(side) - set(_LETTERS)
            if bad:
                raise ConfigurationError(f"unknown piece letters {sorted(bad)} in {side!r}")
            if side.count("P") > 8:
                raise ConfigurationError(f"more than 8 pawns in {side!r}")
            if len(side) > 15:
                raise ConfigurationError(f"more than 15 non-king pieces in {side!r}")

    @property
    def name(self) -> str:
        return f"K{self.white}-K{self.black}"

    def kinds(self, color: int) -> list:
        side = self.white if color == WHITE else self.black
        return [PIECE_SYMBOLS.index(c.lower()) for c in side]


@dataclass
class ComposerSettings:
    permissible_configurations: list
    attempts_min: int = 1
    attempts_max: int = 50
    target_depth: int = 3
    max_placement_retries: int = 20

    def __post_init__(self):
        if not self.permissible_configurations:
            raise ConfigurationError("permissible_configurations is empty")
        self.permissible_configurations = [
            c if isinstance(c, PieceConfiguration) else PieceConfiguration(**c) for c in self.permissible_configurations
        ]
        if not 1 <= self.attempts_min <= self.attempts_max:
            raise ConfigurationError("need 1 <= attempts_min <= attempts_max")
        if not 2 <= self.target_depth <= 5:
            raise ConfigurationError("target_depth must be in 2..5")
        if self.max_placement_retries < 0:
            raise ConfigurationError("max_placement_retries must be >= 0")

    @classmethod
    def from_dict(cls, data: dict) -> "ComposerSettings":
        data = dict(data)
        data["permissible_configurations"] = data.pop("configurations", data.get("permissible_configurations"))
        known = {"permissible_configurations", "attempts_min", "attempts_max", "target_depth", "max_placement_retries"}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown composer settings {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def default(cls) -> "ComposerSettings":
        text = resources.files("qcompose.data").joinpath("configurations.yaml").read_text()
        return cls.from_dict(yaml.safe_load(text))

    def to_dict(self) -> dict:
        return {
            "permissible_configurations": [asdict(c) for c in self.permissible_configurations],
            "attempts_min": self.attempts_min,
            "attempts_max": self.attempts_max,
            "target_depth": self.target_depth,
            "max_placement_retries": self.max_placement_retries,
        }

    def settings_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class CompositionRecord:
    fen: str
    classification: str
    key_moves: list = field(default_factory=list)
    principal_variation: list = field(default_factory=list)
    aesthetic_score: Optional[float] = None
    aesthetics: Optional[dict] = None
    entropy_stats: dict = field(default_factory=dict)
    set_label: str = ""
    instance_id: int = 0
    seed: int = 0
    timestamp: int = 0
    configuration: str = ""
    mate_length: Optional[int] = None

    @property
    def accepted(self) -> bool:
        return self.classification in ACCEPTED

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "CompositionRecord":
        return cls(**data)


@dataclass(frozen=True)
class Budget:
    attempts: Optional[int] = None
    seconds: Optional[float] = None


def select_configuration(entropy, settings: ComposerSettings) -> PieceConfiguration:
    configs = settings.permissible_configurations
    if not configs:
        raise ConfigurationError("no permissible configurations")
    return configs[next_int_below(entropy, len(configs))]


def attempts_count(entropy, settings: ComposerSettings) -> int:
    return settings.attempts_min + next_int_below(entropy, settings.attempts_max - settings.attempts_min + 1)


def _snapshot(entropy) -> dict:
    stats = getattr(entropy, "stats", None)
    return stats.snapshot() if stats is not None else {}


def _adjacent(a: int, b: int) -> bool:
    return max(abs(a % 8 - b % 8), abs(a // 8 - b // 8)) <= 1


def generate_candidate(entropy, configuration: PieceConfiguration, max_retries: int = 20) -> Position:
    """Random legal White-to-move position with the given material.

    White pieces that check the Black king are removed one at a time (victim
    chosen by entropy draw); positions where White has no legal move are
    retried from scratch.
    """
    for _ in range(max_retries + 1):
        placement: list = [None] * 64
        wk = next_int_below(entropy, 64)
        placement[wk] = (WHITE, KING)
        squares = [s for s in range(64) if placement[s] is None and not _adjacent(s, wk)]
        bk = squares[next_int_below(entropy, len(squares))]
        placement[bk] = (BLACK, KING)
        for color in (WHITE, BLACK):
            for kind in configuration.kinds(color):
                squares = [s for s in range(64) if placement[s] is None and not (kind == PAWN and s // 8 in (0, 7))]
                placement[squares[next_int_below(entropy, len(squares))]] = (color, kind)

        while True:
            board = Board(Position(tuple(placement)))
            checkers = list(scan(board.attackers(WHITE, bk)))
            if not checkers:
                break
            placement[checkers[next_int_below(entropy, len(checkers))]] = None

        if board.has_legal_move():
            return board.position()
    raise PlacementFailure(f"no legal placement for {configuration.name} after {max_retries + 1} tries")


def classify(k: Optional[int], target_depth: int = 3) -> str:
    if k == target_depth:
        return MATE_IN_3 if target_depth == 3 else f"mate_in_{target_depth}"
    if k is not None and k == target_depth - 1 and k >= 2:
        return MATE_IN_2_BYPRODUCT
    return REJECTED_NO_MATE


def compose(
    entropy,
    settings: ComposerSettings,
    budget: Union[int, Budget],
    *,
    set_label: str = "",
    instance_id: int = 0,
    seed: int = 0,
    diagnostics: Optional[Counter] = None,
) -> Iterator[CompositionRecord]:
    """Yield one record per attempt until the budget is spent.

    Mate-in-one results are tallied in ``diagnostics['mate_in_1']`` and
    classified as rejected; only mate classes carry a score.
    """
    if isinstance(budget, int):
        budget = Budget(attempts=budget)
    if diagnostics is None:
        diagnostics = Counter()
    deadline = None if budget.seconds is None else time.monotonic() + budget.seconds

    def spent(n):
        if budget.attempts is not None and n >= budget.attempts:
            return True
        return deadline is not None and time.monotonic() >= deadline

    attempt = 0
    while not spent(attempt):
        config = select_configuration(entropy, settings)
        for _ in range(attempts_count(entropy, settings)):
            if spent(attempt):
                break
            attempt += 1
            diagnostics["attempts"] += 1
            base = dict(set_label=set_label, instance_id=instance_id, seed=seed, timestamp=attempt,
                        configuration=config.name)
            try:
                position = generate_candidate(entropy, config, settings.max_placement_retries)
            except PlacementFailure:
                diagnostics["placement_failures"] += 1
                yield CompositionRecord("", REJECTED_INVALID, entropy_stats=_snapshot(entropy), **base)
                continue

            verdict = prove_mate_in_n(position, settings.target_depth, with_solution=True)
            cls = classify(verdict.k, settings.target_depth)
            if verdict.k is None:
                diagnostics["no_mate"] += 1
            else:
                diagnostics[f"mate_in_{verdict.k}"] += 1
            record = CompositionRecord(
                emit_fen(position),
                cls,
                list(verdict.key_moves),
                list(verdict.principal_variation),
                entropy_stats=_snapshot(entropy),
                mate_length=verdict.k,
                **base,
            )
            if cls in ACCEPTED:
                breakdown = aesthetics.score(position, verdict)
                record.aesthetic_score = breakdown.total
                record.aesthetics = breakdown.as_dict()
            yield record
