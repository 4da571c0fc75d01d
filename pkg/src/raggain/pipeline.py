"""Experiment orchestration: config parsing, predictor/gain stages, tuning, splits.

Configuration is a flat key = value file ('#' starts a comment). Dotted keys
namespace maps, e.g. ``external_predictor.entailment = scores.tsv``. Any key
can be overridden on the command line by a flag of the same name
(``--external_predictor.entailment other.tsv``).

Recognized keys:

    corpus, index, queries, run, reference_run, generation_log, out
    predictors            comma list of built-in predictor names
    quality_metrics       comma list; 'em' is computed natively, any other
                          metric needs quality_file.<metric>.rag / .norag
    quality_file.<m>.<mode>     injected quality score table
    external_predictor.<name>   externally produced predictor column
    baseline_group.<name>       comma list of predictor names, or * for all
    k.<predictor>         top-k cutoff for wig/u_wig/nqc/qc/smv/u_smv (default 5)
    rbo_p, rbo_depth, rbo_mode  parameters of the reference-list predictor
    pool                  entropy pooling strategy (default max)
    wig_sqrt_norm         true to divide wig/u_wig by sqrt(|q|)
    eps, alpha, bins, k1, b, seed, tag, retrieve_k
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from pathlib import Path

from . import io as tio
from .errors import ConfigError, EvaluationError, PredictorError
from .evaluation import DEFAULT_ALPHA, CorrelationReport, evaluate, pearson
from .gain import DEFAULT_EPS, GainHistogram, gain, gain_distribution, q_em
from .index import DEFAULT_B, DEFAULT_K1, Index, build_index, corpus_score, tokenize
from .predictors.generation import POOL_STRATEGIES, GenerationRecord, uncertainty_gap
from .predictors.post import PostParams, RankedList, nqc, ref_predict, smv, wig
from .predictors.pre import PRE_PREDICTORS, parse_pre_name, pre_predict

SCORE_PREDICTORS = ("wig", "u_wig", "nqc", "qc", "smv", "u_smv")
BUILTIN_PREDICTORS = PRE_PREDICTORS + SCORE_PREDICTORS + ("ref", "uncertainty")

K_GRID = (1, 2, 3, 4, 5, 10, 20, 30, 40, 50)
RBO_P_GRID = (0.9, 0.95, 0.99)
RBO_DEPTH_GRID = (1, 5, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100)


@dataclass
class ExperimentConfig:
    """Flat key/value configuration with typed accessors."""

    values: dict[str, str] = field(default_factory=dict)

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        values: dict[str, str] = {}
        with open(path, encoding="utf-8") as handle:
            for lineno, line in enumerate(handle, start=1):
                stripped = line.strip()
                if not stripped or stripped.startswith("#"):
                    continue
                if "=" not in stripped:
                    raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {stripped!r}")
                key, _, value = stripped.partition("=")
                key = key.strip()
                value = value.strip()
                if not key:
                    raise ConfigError(f"{path}:{lineno}: empty key")
                if key in values:
                    raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
                values[key] = value
        return cls(values=values)

    def override(self, key: str, value: str) -> None:
        self.values[key] = value

    def get(self, key: str, default: str | None = None) -> str | None:
        return self.values.get(key, default)

    def require(self, key: str) -> str:
        if key not in self.values:
            raise ConfigError(f"missing required config key {key!r}")
        return self.values[key]

    def get_int(self, key: str, default: int) -> int:
        raw = self.values.get(key)
        if raw is None:
            return default
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"config key {key!r} must be an integer, got {raw!r}") from None

    def get_float(self, key: str, default: float) -> float:
        raw = self.values.get(key)
        if raw is None:
            return default
        try:
            value = float(raw)
        except ValueError:
            raise ConfigError(f"config key {key!r} must be a number, got {raw!r}") from None
        if not math.isfinite(value):
            raise ConfigError(f"config key {key!r} must be finite, got {raw!r}")
        return value

    def get_bool(self, key: str, default: bool) -> bool:
        raw = self.values.get(key)
        if raw is None:
            return default
        lowered = raw.lower()
        if lowered in ("true", "1", "yes", "on"):
            return True
        if lowered in ("false", "0", "no", "off"):
            return False
        raise ConfigError(f"config key {key!r} must be a boolean, got {raw!r}")

    def get_list(self, key: str) -> list[str]:
        raw = self.values.get(key, "")
        return [item.strip() for item in raw.split(",") if item.strip()]

    def submap(self, prefix: str) -> dict[str, str]:
        """Keys under ``prefix.`` with the prefix removed, in config order."""
        head = prefix + "."
        return {k[len(head):]: v for k, v in self.values.items() if k.startswith(head)}

    def resolved_text(self) -> str:
        return "\n".join(f"{k} = {self.values[k]}" for k in sorted(self.values)) + "\n"


def _load_index(config: ExperimentConfig) -> Index:
    index_path = config.get("index")
    if index_path:
        return Index.load(index_path)
    corpus_path = config.get("corpus")
    if corpus_path:
        return build_index(tio.read_corpus(corpus_path))
    raise ConfigError("an index is required: set 'index' or 'corpus'")


@dataclass
class ExperimentData:
    """Everything an experiment stage can draw on, loaded once."""

    config: ExperimentConfig
    queries: list[tio.QuestionRecord]
    index: Index | None = None
    run: dict[str, RankedList] | None = None
    reference_run: dict[str, RankedList] | None = None
    generation_log: dict[str, dict[str, GenerationRecord]] | None = None

    @property
    def qids(self) -> list[str]:
        return sorted(q.qid for q in self.queries)


def _predictor_names(config: ExperimentConfig) -> list[str]:
    names = config.get_list("predictors")
    for name in names:
        if name not in BUILTIN_PREDICTORS:
            raise ConfigError(
                f"unknown predictor {name!r}; built-ins are {', '.join(BUILTIN_PREDICTORS)}"
            )
    externals = list(config.submap("external_predictor"))
    for name in externals:
        if name in names:
            raise ConfigError(f"external predictor {name!r} collides with a selected built-in")
    return names + externals


def _needs(names: list[str], wanted: tuple[str, ...]) -> bool:
    return any(n in wanted for n in names)


def load_experiment(config: ExperimentConfig) -> ExperimentData:
    queries = tio.read_queries(config.require("queries"))
    if not queries:
        raise ConfigError("queries file contains no questions")
    names = _predictor_names(config)
    metrics = config.get_list("quality_metrics")

    data = ExperimentData(config=config, queries=queries)
    needs_index = _needs(names, PRE_PREDICTORS) or _needs(names, ("wig", "nqc", "smv"))
    if needs_index:
        data.index = _load_index(config)
    if _needs(names, SCORE_PREDICTORS + ("ref",)):
        run_path = config.get("run")
        if not run_path:
            raise ConfigError("post-retrieval predictors need the 'run' key")
        data.run = tio.read_run_file(run_path)
        missing = sorted(set(data.qids) - set(data.run))
        if missing:
            raise ConfigError(f"run file {run_path} missing qids: {missing}")
    if "ref" in names:
        ref_path = config.get("reference_run")
        if not ref_path:
            raise ConfigError("the 'ref' predictor needs the 'reference_run' key")
        data.reference_run = tio.read_run_file(ref_path)
        missing = sorted(set(data.qids) - set(data.reference_run))
        if missing:
            raise ConfigError(f"reference run {ref_path} missing qids: {missing}")
    if "uncertainty" in names or "em" in metrics:
        log_path = config.get("generation_log")
        if not log_path:
            raise ConfigError("'uncertainty' and the 'em' metric need the 'generation_log' key")
        data.generation_log = tio.read_generation_log(log_path)
        incomplete = sorted(
            q for q in data.qids
            if "rag" not in data.generation_log.get(q, {})
            or "norag" not in data.generation_log.get(q, {})
        )
        if incomplete:
            raise ConfigError(f"generation log {log_path} incomplete for qids: {incomplete}")
    return data


def _query_tokens(data: ExperimentData) -> dict[str, list[str]]:
    tokens: dict[str, list[str]] = {}
    for record in data.queries:
        toks = tokenize(record.question)
        if not toks:
            raise PredictorError(f"qid {record.qid}: question is empty after tokenization")
        tokens[record.qid] = toks
    return tokens


def compute_predictor(data: ExperimentData, name: str) -> dict[str, float]:
    """One predictor column over all configured questions."""
    config = data.config
    column: dict[str, float] = {}
    if name in PRE_PREDICTORS:
        family, aggregate = parse_pre_name(name)
        tokens = _query_tokens(data)
        for qid in data.qids:
            column[qid] = pre_predict(tokens[qid], data.index, family, aggregate)
        return column
    if name in SCORE_PREDICTORS:
        k = config.get_int(f"k.{name}", 5)
        sqrt_norm = config.get_bool("wig_sqrt_norm", False)
        normalized = name in ("wig", "nqc", "smv")
        tokens = _query_tokens(data) if (normalized or sqrt_norm) else None
        k1 = config.get_float("k1", DEFAULT_K1)
        b = config.get_float("b", DEFAULT_B)
        for qid in data.qids:
            ranked = data.run[qid]
            s_c = corpus_score(data.index, tokens[qid], k1, b) if normalized else 0.0
            if name in ("wig", "u_wig"):
                nq = len(tokens[qid]) if sqrt_norm else None
                column[qid] = wig(ranked, s_c, k, regularized=normalized, n_query_terms=nq)
            elif name in ("nqc", "qc"):
                column[qid] = nqc(ranked, s_c, k, normalized=normalized)
            else:
                column[qid] = smv(ranked, s_c, k, normalized=normalized)
        return column
    if name == "ref":
        params = PostParams(
            k=config.get_int("k.ref", 5),
            p=config.get_float("rbo_p", 0.95),
            depth=config.get_int("rbo_depth", 100),
            rbo_mode=config.get("rbo_mode", "extrapolated"),
        )
        for qid in data.qids:
            column[qid] = ref_predict(data.run[qid], data.reference_run[qid], params)
        return column
    if name == "uncertainty":
        strategy = config.get("pool", "max")
        if strategy not in POOL_STRATEGIES:
            raise ConfigError(f"unknown pooling strategy {strategy!r}")
        for qid in data.qids:
            records = data.generation_log[qid]
            column[qid] = uncertainty_gap(records["norag"], records["rag"], strategy)
        return column
    externals = config.submap("external_predictor")
    if name in externals:
        return tio.load_external_scores(externals[name], set(data.qids), name)
    raise ConfigError(f"unknown predictor {name!r}")


def compute_quality(data: ExperimentData, metric: str) -> dict[str, dict[str, float]]:
    """Quality per mode for one metric: {'rag': column, 'norag': column}."""
    config = data.config
    if metric == "em":
        answers = {q.qid: list(q.answers) for q in data.queries}
        out: dict[str, dict[str, float]] = {"rag": {}, "norag": {}}
        for qid in data.qids:
            for mode in ("rag", "norag"):
                record = data.generation_log[qid][mode]
                out[mode][qid] = float(q_em(record.answer, answers[qid]))
        return out
    files = data.config.submap(f"quality_file.{metric}")
    if sorted(files) != ["norag", "rag"]:
        raise ConfigError(
            f"metric {metric!r} needs quality_file.{metric}.rag and quality_file.{metric}.norag"
        )
    out = {}
    for mode in ("rag", "norag"):
        column = tio.load_external_scores(files[mode], set(data.qids), f"{metric}/{mode}")
        bad = {q: v for q, v in column.items() if not 0.0 <= v <= 1.0}
        if bad:
            raise ConfigError(f"metric {metric!r} ({mode}): qualities outside [0, 1]: {sorted(bad)}")
        out[mode] = column
    return out


def compute_gains(data: ExperimentData, metric: str) -> dict[str, float]:
    quality = compute_quality(data, metric)
    eps = data.config.get_float("eps", DEFAULT_EPS)
    return {qid: gain(quality["rag"][qid], quality["norag"][qid], eps) for qid in data.qids}


def tune(
    grid: list[dict[str, str]],
    column_for,
    gain_columns: dict[str, dict[str, float]],
) -> tuple[int, dict[str, str], list[float]]:
    """Pick the grid point maximizing the summed correlation across metrics.

    ``column_for`` maps one grid point (a key/value dict) to a predictor
    column. Requires gain columns for at least two quality metrics; ties are
    broken by the smallest grid index. Returns (index, point, totals).
    """
    if not grid:
        raise ConfigError("hyper-parameter grid is empty")
    if len(gain_columns) < 2:
        raise ConfigError(
            f"tuning needs validation gains for >= 2 quality metrics, got {len(gain_columns)}"
        )
    totals: list[float] = []
    for point in grid:
        column = column_for(point)
        total = 0.0
        for metric in sorted(gain_columns):
            gains = gain_columns[metric]
            qids = sorted(gains)
            try:
                total += pearson([column[q] for q in qids], [gains[q] for q in qids])
            except EvaluationError:
                # e.g. nqc at k=1 is constantly zero; such a point is never picked
                total = -math.inf
                break
        totals.append(total)
    if all(math.isinf(t) for t in totals):
        raise ConfigError("every grid point yields an undefined correlation")
    best = max(range(len(grid)), key=lambda i: (totals[i], -i))
    return best, grid[best], totals


def default_grid(predictor: str) -> list[dict[str, str]]:
    if predictor in SCORE_PREDICTORS:
        return [{f"k.{predictor}": str(k)} for k in K_GRID]
    if predictor == "ref":
        return [
            {"rbo_p": str(p), "rbo_depth": str(depth)}
            for p in RBO_P_GRID
            for depth in RBO_DEPTH_GRID
        ]
    if predictor == "uncertainty":
        return [{"pool": strategy} for strategy in POOL_STRATEGIES]
    raise ConfigError(f"predictor {predictor!r} has no hyper-parameter grid")


def split_questions(
    queries: list[tio.QuestionRecord],
    train: int,
    val: int,
    test: int,
    seed: int,
) -> tuple[list[tio.QuestionRecord], ...]:
    """Seeded shuffle followed by disjoint train/validation/test slices."""
    if min(train, val, test) < 0:
        raise ConfigError("split sizes must be non-negative")
    if train + val + test > len(queries):
        raise ConfigError(
            f"split sizes sum to {train + val + test} but only {len(queries)} questions exist"
        )
    shuffled = sorted(queries, key=lambda q: q.qid)
    random.Random(seed).shuffle(shuffled)
    return (
        shuffled[:train],
        shuffled[train:train + val],
        shuffled[train + val:train + val + test],
    )


@dataclass
class ExperimentResult:
    report: CorrelationReport
    predictor_columns: dict[str, dict[str, float]]
    gain_columns: dict[str, dict[str, float]]
    histograms: dict[str, GainHistogram]
    out_dir: Path


def _resolve_groups(config: ExperimentConfig, names: list[str]) -> dict[str, list[str]]:
    groups: dict[str, list[str]] = {}
    for group, raw in config.submap("baseline_group").items():
        if raw.strip() == "*":
            groups[group] = list(names)
            continue
        members = [m.strip() for m in raw.split(",") if m.strip()]
        unknown = [m for m in members if m not in names]
        if unknown:
            raise ConfigError(f"baseline group {group!r} names unselected predictors: {unknown}")
        groups[group] = members
    return groups


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Predict, label, evaluate, and write every artifact under the out directory.

    Deterministic: rerunning with the same inputs and seed writes
    byte-identical files.
    """
    out_dir = Path(config.require("out"))
    data = load_experiment(config)
    names = _predictor_names(config)
    if not names:
        raise ConfigError("no predictors selected")
    metrics = config.get_list("quality_metrics")
    if not metrics:
        raise ConfigError("no quality metrics selected")

    for sub in ("predictors", "quality", "gains", "hist"):
        (out_dir / sub).mkdir(parents=True, exist_ok=True)

    try:
        columns = {name: compute_predictor(data, name) for name in names}
    except PredictorError as exc:
        raise PredictorError(f"predictor stage failed: {exc}") from exc
    for name, column in columns.items():
        tio.write_score_table(out_dir / "predictors" / f"{name}.tsv", column)

    eps = config.get_float("eps", DEFAULT_EPS)
    bins = config.get_int("bins", 10)
    gain_columns: dict[str, dict[str, float]] = {}
    histograms: dict[str, GainHistogram] = {}
    for metric in metrics:
        quality = compute_quality(data, metric)
        for mode in ("rag", "norag"):
            tio.write_score_table(out_dir / "quality" / f"{metric}.{mode}.tsv", quality[mode])
        gains = {qid: gain(quality["rag"][qid], quality["norag"][qid], eps) for qid in data.qids}
        tio.write_score_table(out_dir / "gains" / f"{metric}.tsv", gains, value_header="gain")

    # Evaluate on the written artifacts: the score tables are the interface, so
    # correlations are computed on exactly the values a consumer of the files
    # would see (and `report` reproduces `evaluate` bit for bit).
    columns = {
        name: tio.read_score_table(out_dir / "predictors" / f"{name}.tsv") for name in names
    }
    for metric in metrics:
        gains = tio.read_score_table(out_dir / "gains" / f"{metric}.tsv")
        gain_columns[metric] = gains
        hist = gain_distribution([gains[q] for q in sorted(gains)], bins)
        histograms[metric] = hist
        (out_dir / "hist" / f"{metric}.txt").write_text(hist.to_text(), encoding="utf-8")

    alpha = config.get_float("alpha", DEFAULT_ALPHA)
    groups = _resolve_groups(config, names)
    report: CorrelationReport | None = None
    for metric in metrics:
        common = set(gain_columns[metric])
        for column in columns.values():
            common &= set(column)
        universe = set(data.qids)
        dropped = len(universe) - len(common)
        sub_gains = {q: gain_columns[metric][q] for q in common}
        sub_columns = {n: {q: c[q] for q in common} for n, c in columns.items()}
        metric_report = evaluate(
            sub_columns, sub_gains, groups, alpha=alpha, metric=metric, dropped_qids=dropped
        )
        if report is None:
            report = metric_report
        else:
            report.merge(metric_report)

    (out_dir / "report.tsv").write_text(report.to_tsv(), encoding="utf-8")
    (out_dir / "significance.tsv").write_text(report.significance_tsv(), encoding="utf-8")
    (out_dir / "report.txt").write_text(report.to_text(), encoding="utf-8")
    (out_dir / "config.resolved").write_text(config.resolved_text(), encoding="utf-8")
    return ExperimentResult(
        report=report,
        predictor_columns=columns,
        gain_columns=gain_columns,
        histograms=histograms,
        out_dir=out_dir,
    )
