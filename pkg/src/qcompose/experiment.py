"""Multi-set, multi-instance composing campaigns and their statistical report.

A campaign runs ``instances_per_set`` composer instances for every entropy
set.  Each instance owns a private entropy stack and writes its own record
file; the report is computed afterwards from those files alone, so
``analyze(record files)`` always reproduces the live report.

Scores are pooled flat per set (every mate-class record of every instance).
Quantity cells count mate-class records, byproduct mates in two included;
rejected and invalid candidates appear only in the diagnostics.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import yaml

from . import stats
from .aesthetics import SCORER_VERSION
from .composer import Budget, ComposerSettings, compose
from .entropy import (
    FALLBACK_USE_PSEUDO,
    MixedSource,
    PseudoSource,
    QuantumClient,
    QuantumClientConfig,
    ReplaySource,
    check_mix_ratio,
    write_replay_file,
)
from .records import RecordWriter, read_record_file

DEFAULT_SETS = (("Pseudo", 0.0), ("Q5", 0.05), ("Q15", 0.15), ("Q25", 0.25))

QUANTUM_MODES = ("offline", "replay", "stub", "http")

# bytes of offline replay reserved per attempt at p = 1; about 2.5x the usual draw count
_REPLAY_BYTES_PER_ATTEMPT = 448


class PlanError(ValueError):
    pass


@dataclass(frozen=True)
class EntropySet:
    label: str
    mix_ratio: float

    def __post_init__(self):
        if not self.label:
            raise PlanError("set label must be nonempty")
        check_mix_ratio(self.mix_ratio)


@dataclass
class QuantumSettings:
    """Where quantum-origin bytes come from.

    ``offline`` writes a seeded byte file once per campaign and replays it;
    ``replay`` reads a recorded file (split into disjoint per-instance
    segments) or a directory of per-instance recordings; ``stub`` starts a
    local stub server per instance; ``http`` talks to a real endpoint and
    records every byte received next to the record files.
    """

    mode: str = "http"
    replay_path: Optional[str] = None
    endpoint: Optional[str] = None
    fallback_policy: str = FALLBACK_USE_PSEUDO
    block_size: int = 1024
    low_watermark: int = 256
    request_timeout: float = 10.0

    def __post_init__(self):
        if self.mode not in QUANTUM_MODES:
            raise PlanError(f"unknown quantum mode {self.mode!r}; expected one of {QUANTUM_MODES}")
        if self.mode == "replay" and not self.replay_path:
            raise PlanError("quantum mode 'replay' needs replay_path")
        QuantumClientConfig(
            block_size=self.block_size,
            low_watermark=self.low_watermark,
            fallback_policy=self.fallback_policy,
        )


@dataclass
class ExperimentPlan:
    sets: list = field(default_factory=lambda: [EntropySet(*s) for s in DEFAULT_SETS])
    instances_per_set: int = 10
    budget_attempts: Optional[int] = 2000
    budget_seconds: Optional[float] = None
    base_seed: int = 0
    composer_settings: ComposerSettings = field(default_factory=ComposerSettings.default)
    quantum: QuantumSettings = field(default_factory=QuantumSettings)
    workers: int = 1

    def __post_init__(self):
        self.sets = [s if isinstance(s, EntropySet) else EntropySet(**s) for s in self.sets]
        if not self.sets:
            raise PlanError("plan needs at least one set")
        labels = [s.label for s in self.sets]
        if len(set(labels)) != len(labels):
            raise PlanError(f"set labels must be unique, got {labels}")
        if self.instances_per_set < 1:
            raise PlanError("instances_per_set must be >= 1")
        if self.budget_attempts is None and self.budget_seconds is None:
            raise PlanError("budget needs attempts, seconds, or both")
        if self.budget_attempts is not None and self.budget_attempts < 0:
            raise PlanError("budget attempts must be >= 0")
        if self.workers < 1:
            raise PlanError("workers must be >= 1")

    @property
    def budget(self) -> Budget:
        return Budget(self.budget_attempts, self.budget_seconds)

    @classmethod
    def from_dict(cls, data: dict, base_dir: Optional[Path] = None) -> "ExperimentPlan":
        data = dict(data or {})
        known = {"sets", "instances_per_set", "budget", "base_seed", "composer", "quantum", "workers"}
        unknown = set(data) - known
        if unknown:
            raise PlanError(f"unknown plan keys {sorted(unknown)}")
        kwargs: dict = {}
        if "sets" in data:
            kwargs["sets"] = [
                EntropySet(str(s["label"]), float(s.get("mix_ratio", s.get("mix", 0.0)))) for s in data["sets"]
            ]
        for key in ("instances_per_set", "base_seed", "workers"):
            if key in data:
                kwargs[key] = int(data[key])
        budget = data.get("budget")
        if isinstance(budget, dict):
            kwargs["budget_attempts"] = budget.get("attempts")
            kwargs["budget_seconds"] = budget.get("seconds")
        elif budget is not None:
            kwargs["budget_attempts"] = int(budget)
        composer = data.get("composer")
        if isinstance(composer, str):
            path = Path(composer)
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            composer = yaml.safe_load(path.read_text())
        if composer:
            kwargs["composer_settings"] = ComposerSettings.from_dict(composer)
        quantum = dict(data.get("quantum") or {})
        if quantum.get("replay_path") and base_dir is not None and not Path(quantum["replay_path"]).is_absolute():
            quantum["replay_path"] = str(base_dir / quantum["replay_path"])
        if quantum:
            kwargs["quantum"] = QuantumSettings(**quantum)
        return cls(**kwargs)

    @classmethod
    def load(cls, path) -> "ExperimentPlan":
        path = Path(path)
        return cls.from_dict(yaml.safe_load(path.read_text()), base_dir=path.parent)

    def to_dict(self) -> dict:
        return {
            "sets": [asdict(s) for s in self.sets],
            "instances_per_set": self.instances_per_set,
            "budget": {"attempts": self.budget_attempts, "seconds": self.budget_seconds},
            "base_seed": self.base_seed,
            "composer": self.composer_settings.to_dict(),
            "quantum": asdict(self.quantum),
            "workers": self.workers,
        }


def instance_seed(base_seed: int, set_index: int, instance_index: int) -> int:
    """64-bit seed derived from the campaign seed and the instance's coordinates."""
    digest = hashlib.sha256(f"{base_seed}:{set_index}:{instance_index}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


# -- workers -----------------------------------------------------------------


@dataclass(frozen=True)
class InstanceJob:
    set_label: str
    set_index: int
    instance_id: int
    mix_ratio: float
    seed: int
    budget: Budget
    settings: ComposerSettings
    quantum: QuantumSettings
    out_path: str
    replay_path: Optional[str] = None
    replay_start: int = 0
    replay_stop: Optional[int] = None
    instances_per_set: int = 1


def _quantum_source(job: InstanceJob, stack):
    q = job.quantum
    if job.mix_ratio == 0:
        return None
    config = dict(block_size=q.block_size, low_watermark=q.low_watermark,
                  request_timeout=q.request_timeout, fallback_policy=q.fallback_policy)
    if q.mode in ("offline", "replay"):
        return ReplaySource(job.replay_path, job.replay_start, job.replay_stop)
    if q.mode == "stub":
        from .stub_server import StubQRNGServer

        server = StubQRNGServer(seed=job.seed).start()
        stack.append(server.stop)
        return QuantumClient(QuantumClientConfig(endpoint_url=server.url, **config))
    cfg = QuantumClientConfig.from_env(**config) if not q.endpoint else QuantumClientConfig(endpoint_url=q.endpoint, **config)
    record = Path(job.out_path).with_suffix(".qbytes")
    record.unlink(missing_ok=True)
    return QuantumClient(cfg, record_path=record, audit_path=Path(job.out_path).with_suffix(".audit"))


def run_instance(job: InstanceJob) -> str:
    """Run one composer instance to its budget and write its record file.

    Entropy outages under the ``fail`` policy, and any other crash, leave a
    partial file whose footer says ``complete: false``.
    """
    header = {
        "set_label": job.set_label,
        "set_index": job.set_index,
        "instance_id": job.instance_id,
        "instances_per_set": job.instances_per_set,
        "mix_ratio": job.mix_ratio,
        "seed": job.seed,
        "settings_hash": job.settings.settings_hash(),
        "attempts_min": job.settings.attempts_min,
        "attempts_max": job.settings.attempts_max,
        "scorer_version": SCORER_VERSION,
        "quantum_mode": job.quantum.mode if job.mix_ratio > 0 else "none",
    }
    cleanup: list = []
    diagnostics: Counter = Counter()
    writer = RecordWriter(job.out_path, header)
    entropy = None
    try:
        quantum = _quantum_source(job, cleanup)
        entropy = MixedSource(PseudoSource(job.seed), quantum, job.mix_ratio, job.quantum.fallback_policy)
        for record in compose(entropy, job.settings, job.budget, set_label=job.set_label,
                              instance_id=job.instance_id, seed=job.seed, diagnostics=diagnostics):
            if record.accepted:
                writer.write(record)
    except Exception as exc:  # EntropyUnavailable included; the partial file is kept
        diagnostics.update(_entropy_counts(entropy))
        writer.close(complete=False, diagnostics=dict(diagnostics), error=f"{type(exc).__name__}: {exc}")
    else:
        diagnostics.update(_entropy_counts(entropy))
        writer.close(complete=True, diagnostics=dict(diagnostics))
    finally:
        for stop in cleanup:
            stop()
    return job.out_path


def _entropy_counts(entropy) -> dict:
    if entropy is None:
        return {}
    return {f"entropy_{k}": v for k, v in entropy.stats.snapshot().items()}


def plan_jobs(plan: ExperimentPlan, out_dir: Path) -> list:
    records_dir = out_dir / "records"
    records_dir.mkdir(parents=True, exist_ok=True)
    n_jobs = len(plan.sets) * plan.instances_per_set
    replay_file = None
    replay_dir = None
    q = plan.quantum
    needs_quantum = any(s.mix_ratio > 0 for s in plan.sets)
    if needs_quantum and q.mode == "offline":
        max_p = max(s.mix_ratio for s in plan.sets)
        per_job = 4096 + int((plan.budget_attempts or 10_000) * _REPLAY_BYTES_PER_ATTEMPT * max_p)
        replay_file = write_replay_file(out_dir / "offline-quantum.bin", per_job * n_jobs, plan.base_seed)
    elif needs_quantum and q.mode == "replay":
        path = Path(q.replay_path)
        if not path.exists():
            raise FileNotFoundError(f"replay source {path} does not exist")
        if path.is_dir():
            replay_dir = path
        else:
            replay_file = path
    total = replay_file.stat().st_size if replay_file else 0

    jobs = []
    for si, s in enumerate(plan.sets):
        for ii in range(plan.instances_per_set):
            j = si * plan.instances_per_set + ii
            out_path = records_dir / f"{s.label}-{ii:02d}.jsonl"
            replay_path, start, stop = None, 0, None
            if replay_dir is not None:
                replay_path = str(replay_dir / f"{s.label}-{ii:02d}.qbytes")
            elif replay_file is not None:
                replay_path, start, stop = str(replay_file), j * total // n_jobs, (j + 1) * total // n_jobs
            jobs.append(InstanceJob(
                s.label, si, ii, s.mix_ratio, instance_seed(plan.base_seed, si, ii), plan.budget,
                plan.composer_settings, q, str(out_path), replay_path, start, stop, plan.instances_per_set,
            ))
    return jobs


def run_experiment(plan: ExperimentPlan, out_dir) -> tuple:
    """Run the campaign; returns ``(report, record_paths)``.

    Writes ``records/*.jsonl``, ``plan.json``, ``report.json`` and
    ``report.txt`` under ``out_dir``.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "plan.json").write_text(json.dumps(plan.to_dict(), indent=2, sort_keys=True) + "\n")
    jobs = plan_jobs(plan, out_dir)
    if plan.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=plan.workers) as pool:
            paths = list(pool.map(run_instance, jobs))
    else:
        paths = [run_instance(job) for job in jobs]
    report = analyze_records(paths)
    write_report(report, out_dir)
    return report, paths


# -- report ------------------------------------------------------------------


@dataclass
class Report:
    set_labels: list
    mean_scores_by_set: dict
    score_counts_by_set: dict
    quantity_matrix: list
    quantity_means_by_set: dict
    anova_scores: Optional[stats.AnovaResult]
    anova_quantities: Optional[stats.AnovaResult]
    pairwise_welch: dict
    pairwise_welch_quantities: dict
    outlier_analysis_by_set: dict
    scorer_version: Optional[str] = None
    settings_hash: Optional[str] = None
    incomplete_sets: list = field(default_factory=list)
    not_computable: dict = field(default_factory=dict)
    diagnostics_by_set: dict = field(default_factory=dict)
    source: str = "records"
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        def conv(v):
            if isinstance(v, (stats.AnovaResult, stats.WelchResult, stats.QuartileSummary, stats.OutlierReport)):
                return {k: conv(x) for k, x in asdict(v).items()}
            if isinstance(v, dict):
                return {str(k): conv(x) for k, x in v.items()}
            if isinstance(v, (list, tuple)):
                return [conv(x) for x in v]
            if isinstance(v, float) and not math.isfinite(v):
                return str(v)
            return v

        return {k: conv(getattr(self, k)) for k in self.__dataclass_fields__}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _pair_key(a: str, b: str) -> str:
    return f"{a} vs {b}"


def _safe(name: str, fn, not_computable: dict):
    try:
        return fn()
    except (stats.StatsError, ZeroDivisionError, ValueError) as exc:
        not_computable[name] = str(exc)
        return None


def build_report(
    labels: list,
    scores: dict,
    quantity_matrix: list,
    *,
    quartile_override: Optional[dict] = None,
    source: str = "records",
    notes: Optional[list] = None,
) -> Report:
    """Every statistic from per-set score lists and an instances x sets matrix."""
    nc: dict = {}
    mean_scores = {}
    for label in labels:
        xs = scores.get(label, [])
        mean_scores[label] = stats.mean(xs) if xs else None
        if not xs:
            nc[f"mean_scores_by_set.{label}"] = "no scored compositions"

    score_groups = [scores.get(label, []) for label in labels]
    anova_scores = None
    if any(score_groups):
        anova_scores = _safe("anova_scores", lambda: stats.one_way_anova(score_groups), nc)
    else:
        nc["anova_scores"] = "no scored compositions"

    columns = [[row[j] for row in quantity_matrix] for j in range(len(labels))]
    qmeans = {label: (stats.mean(col) if col else None) for label, col in zip(labels, columns)}
    anova_q = None
    if quantity_matrix and any(any(c) for c in columns):
        anova_q = _safe("anova_quantities", lambda: stats.one_way_anova(columns), nc)
    else:
        nc["anova_quantities"] = "all quantities are zero"

    welch, welch_q = {}, {}
    for i, a in enumerate(labels):
        for b in labels[i + 1:]:
            key = _pair_key(a, b)
            if scores.get(a) or scores.get(b):
                welch[key] = _safe(f"pairwise_welch.{key}", lambda: stats.welch_t_test(scores.get(a, []), scores.get(b, [])), nc)
            else:
                welch[key] = None
                nc[f"pairwise_welch.{key}"] = "no scored compositions"
            if quantity_matrix:
                ia, ib = labels.index(a), labels.index(b)
                welch_q[key] = _safe(f"pairwise_welch_quantities.{key}",
                                     lambda: stats.welch_t_test(columns[ia], columns[ib]), nc)

    outliers = {}
    for label in labels:
        xs = scores.get(label, [])
        if quartile_override and label in quartile_override:
            q1, q3 = quartile_override[label]
        elif len(xs) >= 4:
            q1, q3 = stats.quartiles(xs)
        else:
            outliers[label] = None
            nc[f"outlier_analysis_by_set.{label}"] = f"needs at least 4 scores, have {len(xs)}"
            continue
        summary = stats.outlier_bounds(q1, q3)
        outliers[label] = {"summary": summary, "outliers": stats.detect_outliers(xs, summary)}

    return Report(
        set_labels=list(labels),
        mean_scores_by_set=mean_scores,
        score_counts_by_set={label: len(scores.get(label, [])) for label in labels},
        quantity_matrix=[list(r) for r in quantity_matrix],
        quantity_means_by_set=qmeans,
        anova_scores=anova_scores,
        anova_quantities=anova_q,
        pairwise_welch=welch,
        pairwise_welch_quantities=welch_q,
        outlier_analysis_by_set=outliers,
        not_computable=nc,
        source=source,
        notes=list(notes or []),
    )


def analyze_records(paths, *, permissive: bool = False) -> Report:
    """Recompute the report from record files without re-running anything."""
    files = [read_record_file(p, permissive=permissive) for p in sorted(map(str, paths))]
    sets: dict = {}
    n_instances = 0
    for f in files:
        if not f.header:
            continue
        label = f.set_label
        sets.setdefault(label, f.header.get("set_index", 0))
        n_instances = max(n_instances, int(f.header.get("instances_per_set", 0)), f.instance_id + 1)
    labels = sorted(sets, key=lambda lb: (sets[lb], lb))

    matrix = [[0] * len(labels) for _ in range(n_instances)]
    seen = {label: set() for label in labels}
    scores: dict = {label: [] for label in labels}
    incomplete = set()
    diagnostics: dict = {label: Counter() for label in labels}
    hashes, versions, errors = set(), set(), []
    for f in files:
        errors.extend(f.errors)
        if not f.header:
            incomplete.add(Path(f.path).stem.rsplit("-", 1)[0])
            continue
        label = f.set_label
        j = labels.index(label)
        matrix[f.instance_id][j] += len(f.records)
        seen[label].add(f.instance_id)
        hashes.add(f.header.get("settings_hash"))
        versions.add(f.header.get("scorer_version"))
        for r in sorted(f.records, key=lambda r: r.timestamp):
            if r.aesthetic_score is not None:
                scores[label].append(r.aesthetic_score)
        if not f.complete:
            incomplete.add(label)
        if f.footer:
            diagnostics[label].update(f.footer.get("diagnostics", {}))
    for label in labels:
        if len(seen[label]) < n_instances:
            incomplete.add(label)

    notes = [
        "scores pooled flat per set",
        "quantities count mate-in-3 and mate-in-2 byproduct records; invalid candidates are excluded and listed in diagnostics",
    ]
    if errors:
        notes.append(f"{len(errors)} malformed line(s) skipped")
    report = build_report(labels, scores, matrix, source="records", notes=notes + errors)
    report.incomplete_sets = sorted(incomplete)
    report.scorer_version = versions.pop() if len(versions) == 1 else (sorted(map(str, versions)) or None)
    report.settings_hash = hashes.pop() if len(hashes) == 1 else (sorted(map(str, hashes)) or None)
    report.diagnostics_by_set = {k: dict(sorted(v.items())) for k, v in diagnostics.items()}
    if not files or not labels:
        report.not_computable.setdefault("report", "no records")
    return report


def _read_csv(path) -> list:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise PlanError(f"{path}: empty table")
    return rows


def read_quantity_table(path) -> tuple:
    """``instance,<label>,<label>...`` CSV -> (labels, matrix)."""
    rows = _read_csv(path)
    head = [c.strip() for c in rows[0]]
    labels = head[1:]
    matrix = []
    for n, row in enumerate(rows[1:], 2):
        if len(row) != len(head):
            raise PlanError(f"{path}:{n}: expected {len(head)} columns, got {len(row)}")
        try:
            matrix.append([int(c) for c in row[1:]])
        except ValueError as exc:
            raise PlanError(f"{path}:{n}: {exc}") from None
    return labels, matrix


def read_score_columns(path) -> tuple:
    """One column of scores per set; ragged columns allowed."""
    rows = _read_csv(path)
    labels = [c.strip() for c in rows[0]]
    cols: dict = {label: [] for label in labels}
    for n, row in enumerate(rows[1:], 2):
        for label, cell in zip(labels, row):
            if cell.strip():
                try:
                    cols[label].append(float(cell))
                except ValueError as exc:
                    raise PlanError(f"{path}:{n}: {exc}") from None
    return labels, cols


def read_quartile_table(path) -> dict:
    """``set,q1,q3,...`` CSV -> {label: (q1, q3)}."""
    rows = _read_csv(path)
    head = [c.strip().lower() for c in rows[0]]
    i1, i3 = head.index("q1"), head.index("q3")
    return {row[0].strip(): (float(row[i1]), float(row[i3])) for row in rows[1:]}


def analyze_table(path, *, quartiles_path=None) -> Report:
    """Report from typed-in data.

    A table whose first header cell is ``instance`` is a quantity matrix;
    anything else is read as per-set score columns.
    """
    rows = _read_csv(path)
    if rows[0][0].strip().lower() == "instance":
        labels, matrix = read_quantity_table(path)
        report = build_report(labels, {}, matrix, source="table", notes=["typed-in quantity table"])
        for key in [k for k in report.not_computable if k.startswith(("mean_scores", "anova_scores", "pairwise_welch.", "outlier"))]:
            report.not_computable[key] = "no scores in a quantity table"
        return report
    labels, cols = read_score_columns(path)
    override = read_quartile_table(quartiles_path) if quartiles_path else None
    notes = ["typed-in score columns"]
    if override:
        notes.append("outlier bounds from supplied quartiles")
    return build_report(labels, cols, [], quartile_override=override, source="table", notes=notes)


def analyze(inputs, *, table: bool = False, quartiles=None, permissive: bool = False) -> Report:
    if table:
        return analyze_table(inputs, quartiles_path=quartiles)
    if isinstance(inputs, (str, Path)):
        inputs = [inputs]
    paths = []
    for p in map(Path, inputs):
        paths.extend(sorted(p.glob("*.jsonl")) if p.is_dir() else [p])
    return analyze_records(paths, permissive=permissive)


# -- rendering ---------------------------------------------------------------


def _fmt(x, nd=3) -> str:
    if x is None:
        return "n/a"
    if isinstance(x, float):
        return f"{x:.{nd}f}"
    return str(x)


def _table(head: list, rows: list) -> str:
    cells = [head] + [[_fmt(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(head))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _anova_line(name: str, a) -> str:
    if a is None:
        return f"{name}: not computable"
    return f"{name}: F({a.df_between}, {a.df_within}) = {a.f_stat:.3f}, p = {a.p_value:.3f}"


def render_text(report: Report) -> str:
    labels = report.set_labels
    out = []
    if report.scorer_version:
        out.append(f"scorer: {report.scorer_version}")
    if report.settings_hash:
        out.append(f"settings hash: {report.settings_hash}")
    if report.incomplete_sets:
        out.append(f"INCOMPLETE sets: {', '.join(report.incomplete_sets)}")
    out.append("")

    out.append("Mean aesthetic score by set")
    out.append(_table(["", *labels], [["mean", *[report.mean_scores_by_set.get(lb) for lb in labels]],
                                      ["n", *[report.score_counts_by_set.get(lb, 0) for lb in labels]]]))
    out.append(_anova_line("ANOVA (scores)", report.anova_scores))
    for key, w in report.pairwise_welch.items():
        out.append(f"Welch {key}: " + ("not computable" if w is None else f"t({w.df:.0f}) = {w.t_stat:.3f}, p = {w.p_value:.3f}"))
    out.append("")

    out.append("Compositions per instance")
    rows = [[i + 1, *r] for i, r in enumerate(report.quantity_matrix)]
    rows.append(["mean", *[report.quantity_means_by_set.get(lb) for lb in labels]])
    out.append(_table(["#", *labels], rows))
    out.append(_anova_line("ANOVA (quantities)", report.anova_quantities))
    out.append("")

    out.append("Outlier determination")
    rows = []
    for lb in labels:
        o = report.outlier_analysis_by_set.get(lb)
        s = o["summary"] if o else None
        rows.append([lb, *([s.q1, s.q3, s.iqr, s.ub, s.lb] if s else [None] * 5)])
    out.append(_table(["", "Q1", "Q3", "IQR", "UB", "LB"], rows))
    out.append("")

    out.append("Outliers detected")
    cols = {}
    for lb in labels:
        o = report.outlier_analysis_by_set.get(lb)
        cols[lb] = list(o["outliers"].upper_outliers) + list(o["outliers"].lower_outliers) if o else []
    depth = max((len(c) for c in cols.values()), default=0)
    rows = [[cols[lb][i] if i < len(cols[lb]) else "" for lb in labels] for i in range(depth)]
    rows.append([len(cols[lb]) for lb in labels])
    out.append(_table(labels, rows))
    out.append("(last row: count)")

    if report.not_computable:
        out.append("")
        out.append("Not computable:")
        out.extend(f"  {k}: {v}" for k, v in sorted(report.not_computable.items()))
    if report.notes:
        out.append("")
        out.extend(f"note: {n}" for n in report.notes)
    return "\n".join(out) + "\n"


def write_report(report: Report, out_dir) -> None:
    out_dir = Path(out_dir)
    (out_dir / "report.json").write_text(report.to_json())
    (out_dir / "report.txt").write_text(render_text(report))


def load_report_dict(path) -> dict:
    return json.loads(Path(path).read_text())

