"""Re-check persisted compositions without trusting the composer.

For each mate-class record: the position must be legal, the prover must
give the recorded mate length and key set, a mate in k must not also be a
mate in k - 1, and every key move's strategy tree must pass the naive
reference rules (a separate move generator).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .chess.board import IllegalPositionError, Position, validate_position
from .chess.mate import mate_strategy, prove_mate_in_n
from .chess.reference import reference_legal_moves, validate_solution
from .composer import ACCEPTED, MATE_IN_2_BYPRODUCT, MATE_IN_3, CompositionRecord
from .records import read_record_file

_EXPECTED_K = {MATE_IN_3: 3, MATE_IN_2_BYPRODUCT: 2}


@dataclass
class VerificationSummary:
    checked: int = 0
    passed: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.checked == self.passed


def check_record(record: CompositionRecord) -> list:
    """Problems found with one record; empty when it re-verifies."""
    if record.classification not in ACCEPTED:
        return [f"not a mate class: {record.classification}"]
    k = _EXPECTED_K[record.classification]
    problems = []
    try:
        pos = Position.from_fen(record.fen)
        validate_position(pos)
    except (ValueError, IllegalPositionError) as exc:
        return [f"illegal position: {exc}"]
    if record.mate_length != k:
        problems.append(f"mate_length {record.mate_length} does not match {record.classification}")
    if record.aesthetic_score is None:
        problems.append("mate record without aesthetic score")

    verdict = prove_mate_in_n(pos, k)
    if verdict.k != k:
        problems.append(f"prover now says k={verdict.k}")
    if sorted(verdict.key_moves) != sorted(record.key_moves):
        problems.append(f"key moves differ: {sorted(verdict.key_moves)} vs {sorted(record.key_moves)}")
    if k > 1 and prove_mate_in_n(pos, k - 1).is_mate:
        problems.append(f"not minimal: mate within {k - 1}")

    legal = set(reference_legal_moves(pos))
    for key in record.key_moves:
        if key not in legal:
            problems.append(f"key {key} illegal under reference rules")
            continue
        if not validate_solution(pos, mate_strategy(pos, key, k), k):
            problems.append(f"strategy tree for key {key} rejected by reference rules")
    return problems


def verify_records(records) -> VerificationSummary:
    summary = VerificationSummary()
    for r in records:
        summary.checked += 1
        problems = check_record(r)
        if problems:
            summary.failures.append((r.fen, problems))
        else:
            summary.passed += 1
    return summary


def verify_files(paths) -> VerificationSummary:
    return verify_records(r for p in paths for r in read_record_file(p).records)
