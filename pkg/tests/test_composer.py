import math
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcompose.chess.board import Position, validate_position
from qcompose.chess.mate import prove_mate_in_n
from qcompose.composer import (
    ACCEPTED,
    MATE_IN_2_BYPRODUCT,
    MATE_IN_3,
    REJECTED_INVALID,
    REJECTED_NO_MATE,
    Budget,
    ComposerSettings,
    ConfigurationError,
    PieceConfiguration,
    PlacementFailure,
    attempts_count,
    classify,
    compose,
    generate_candidate,
    select_configuration,
)
from qcompose.entropy import (
    FALLBACK_FAIL,
    PSEUDO,
    EntropyUnavailable,
    MixedSource,
    PseudoSource,
    QuantumClient,
    QuantumClientConfig,
    UnitDraw,
)
from qcompose.records import RecordFormatError, RecordWriter, read_record_file
from qcompose.stub_server import StubQRNGServer
from qcompose.verification import verify_records


class Fixed:
    def __init__(self, value):
        self.value = value

    def next_unit(self):
        return UnitDraw(self.value, PSEUDO)


def settings_with(configs, **kw):
    return ComposerSettings([PieceConfiguration(*c) for c in configs], **kw)


FOUR = settings_with([("Q",), ("RR",), ("QN", "P"), ("RB", "PP")])


# -- configuration and attempt choice ------------------------------------------------


def test_single_configuration_always_chosen():
    s = settings_with([("QR",)])
    for u in (0.0, 0.5, 0.999):
        assert select_configuration(Fixed(u), s) == PieceConfiguration("QR")


def test_half_draw_picks_index_two():
    assert select_configuration(Fixed(0.5), FOUR) is FOUR.permissible_configurations[2]


def test_selection_frequencies_near_uniform():
    src = PseudoSource(17)
    counts = Counter(select_configuration(src, FOUR).name for _ in range(1000))
    sigma = math.sqrt(1000 * 0.25 * 0.75)
    assert len(counts) == 4
    assert all(abs(c - 250) <= 4 * sigma for c in counts.values())


@pytest.mark.parametrize("lo,hi,u,expected", [(10, 10, 0.3, 10), (1, 100, 0.0, 1), (1, 100, 0.999, 100),
                                              (1, 50, 0.5, 26)])
def test_attempts_count_edges(lo, hi, u, expected):
    assert attempts_count(Fixed(u), settings_with([("Q",)], attempts_min=lo, attempts_max=hi)) == expected


def test_settings_validation():
    with pytest.raises(ConfigurationError):
        ComposerSettings([])
    with pytest.raises(ConfigurationError):
        settings_with([("Q",)], attempts_min=5, attempts_max=4)
    with pytest.raises(ConfigurationError):
        PieceConfiguration("QX")
    with pytest.raises(ConfigurationError):
        PieceConfiguration("P" * 9)
    with pytest.raises(ConfigurationError):
        ComposerSettings.from_dict({"configurations": [{"white": "Q"}], "bogus": 1})


def test_default_settings_and_hash():
    s = ComposerSettings.default()
    assert len(s.permissible_configurations) == 12
    assert (s.attempts_min, s.attempts_max) == (1, 50)
    assert s.settings_hash() == ComposerSettings.from_dict(s.to_dict()).settings_hash()
    assert s.settings_hash() != settings_with([("Q",)]).settings_hash()


# -- candidate generation -------------------------------------------------------------


def _kings_apart(pos):
    squares = [i for i, p in enumerate(pos.placement) if p is not None and p[1] == 6]
    a, b = squares
    return max(abs(a % 8 - b % 8), abs(a // 8 - b // 8)) > 1


def test_bare_kings():
    pos = generate_candidate(PseudoSource(3), PieceConfiguration())
    assert pos.piece_count() == 2
    assert _kings_apart(pos)
    validate_position(pos)


@given(st.integers(0, 2**32), st.sampled_from(ComposerSettings.default().permissible_configurations))
@settings(max_examples=300, deadline=None)
def test_candidates_are_legal_white_to_move(seed, config):
    pos = generate_candidate(PseudoSource(seed), config)
    validate_position(pos)
    assert pos.turn == 0
    assert _kings_apart(pos)
    assert pos.piece_count() <= 2 + len(config.white) + len(config.black)
    # only white pieces are ever removed
    black = sum(1 for p in pos.placement if p is not None and p[0] == 1)
    assert black == 1 + len(config.black)


def test_golden_candidate():
    # captured once; the queen landed on a checking square and was removed
    for _ in range(2):
        fen = generate_candidate(PseudoSource(20240101), PieceConfiguration("QR")).fen()
        assert fen == "6k1/8/8/5R2/8/8/4K3/8 w - - 0 1"


def test_placement_failure_when_retries_run_out():
    # all-zero draws: white king a1, black queens b1 and d1.. with the black king on c1,
    # so white starts checkmated every time
    with pytest.raises(PlacementFailure):
        generate_candidate(Fixed(0.0), PieceConfiguration("PPPPPPPP", "QQQQQQQQQQQQQQQ"), max_retries=0)


# -- classification and the compose loop ------------------------------------------------


@pytest.mark.parametrize("k,expected", [(3, MATE_IN_3), (2, MATE_IN_2_BYPRODUCT), (1, REJECTED_NO_MATE),
                                        (None, REJECTED_NO_MATE)])
def test_classify(k, expected):
    assert classify(k) == expected


def test_zero_budget_is_empty():
    assert list(compose(PseudoSource(1), FOUR, 0)) == []
    assert list(compose(PseudoSource(1), FOUR, Budget(seconds=0))) == []


@pytest.fixture(scope="module")
def run300():
    diag = Counter()
    records = list(compose(PseudoSource(1), ComposerSettings.default(), 300, set_label="T", seed=1,
                           diagnostics=diag))
    return records, diag


def test_compose_accounting(run300):
    records, diag = run300
    assert len(records) == diag["attempts"] == 300
    assert [r.timestamp for r in records] == list(range(1, 301))
    by_class = Counter(r.classification for r in records)
    assert by_class[MATE_IN_3] == diag["mate_in_3"]
    assert by_class[MATE_IN_2_BYPRODUCT] == diag["mate_in_2"]
    assert by_class[REJECTED_INVALID] == diag["placement_failures"]
    assert by_class[REJECTED_NO_MATE] == diag["no_mate"] + diag["mate_in_1"]
    assert by_class[MATE_IN_3] > 0


def test_records_carry_scores_only_when_accepted(run300):
    for r in run300[0]:
        assert (r.aesthetic_score is not None) == r.accepted
        assert r.set_label == "T" and r.seed == 1


def test_accepted_records_reverify_and_are_minimal(run300):
    accepted = [r for r in run300[0] if r.accepted]
    summary = verify_records(accepted)
    assert summary.ok, summary.failures
    for r in accepted:
        if r.classification == MATE_IN_3:
            assert not prove_mate_in_n(r.fen, 2).is_mate


def test_no_illegal_positions_emitted(run300):
    for r in run300[0]:
        if r.classification != REJECTED_INVALID:
            validate_position(Position.from_fen(r.fen))


def test_compose_deterministic(run300):
    again = list(compose(PseudoSource(1), ComposerSettings.default(), 300, set_label="T", seed=1))
    assert [r.to_dict() for r in again] == [r.to_dict() for r in run300[0]]


def test_counts_monotone_in_budget(run300):
    shorter = list(compose(PseudoSource(1), ComposerSettings.default(), 120, set_label="T", seed=1))
    assert [r.to_dict() for r in shorter] == [r.to_dict() for r in run300[0][:120]]


def test_entropy_provenance_recorded():
    with StubQRNGServer(seed=2) as server:
        client = QuantumClient(QuantumClientConfig(endpoint_url=server.url))
        mixed = MixedSource(PseudoSource(4), client, 0.25)
        records = list(compose(mixed, FOUR, 40))
    last = records[-1].entropy_stats
    assert last["pseudo_draws"] + last["quantum_draws"] == mixed.stats.total
    assert last["quantum_draws"] > 0
    totals = [r.entropy_stats["pseudo_draws"] + r.entropy_stats["quantum_draws"] for r in records]
    assert totals == sorted(totals)


# -- record files -------------------------------------------------------------------------


def _accepted(run300):
    return [r for r in run300[0] if r.accepted]


def test_record_file_round_trip(tmp_path, run300):
    path = tmp_path / "r.jsonl"
    with RecordWriter(path, {"set_label": "T", "seed": 1}) as w:
        for r in _accepted(run300):
            w.write(r)
    f = read_record_file(path)
    assert f.complete and f.set_label == "T"
    assert [r.to_dict() for r in f.records] == [r.to_dict() for r in _accepted(run300)]
    assert f.footer["records"] == len(f.records)


@pytest.mark.parametrize("bad_line,message", [("{not json", "not JSON"), ('{"kind": "mystery"}', "unknown line kind"),
                                              ('{"kind": "record", "fen": "x"}', "fields mismatch")])
def test_malformed_lines_name_the_line(tmp_path, run300, bad_line, message):
    path = tmp_path / "r.jsonl"
    with RecordWriter(path, {"set_label": "T"}) as w:
        w.write(_accepted(run300)[0])
    lines = path.read_text().splitlines()
    lines.insert(2, bad_line)
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(RecordFormatError) as exc:
        read_record_file(path)
    assert exc.value.lineno == 3 and message in str(exc.value)
    lenient = read_record_file(path, permissive=True)
    assert len(lenient.records) == 1 and len(lenient.errors) == 1


def test_missing_header_rejected(tmp_path):
    path = tmp_path / "r.jsonl"
    path.write_text('{"kind": "footer", "complete": true}\n')
    with pytest.raises(RecordFormatError):
        read_record_file(path)


def test_entropy_failure_leaves_partial_valid_file(tmp_path):
    path = tmp_path / "r.jsonl"
    with StubQRNGServer(mode="error") as server:
        client = QuantumClient(QuantumClientConfig(endpoint_url=server.url, fallback_policy=FALLBACK_FAIL))
        mixed = MixedSource(PseudoSource(4), client, 0.05)
        with pytest.raises(EntropyUnavailable):
            with RecordWriter(path, {"set_label": "T"}) as w:
                for r in compose(mixed, FOUR, 10_000):
                    if r.accepted:
                        w.write(r)
    f = read_record_file(path)
    assert not f.complete
    assert "EntropyUnavailable" in f.footer["error"]
    assert all(r.classification in ACCEPTED for r in f.records)
