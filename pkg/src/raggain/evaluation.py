"""Correlation evaluation: Pearson r, Williams' test, significance-annotated reports.

A report correlates each predictor column with an actual-gain column and runs
Williams' two-tailed t-test between dependent correlations for every
(predictor, baseline-group member) pair. A predictor earns a group flag when it
is significantly better than every member of that group at level alpha; the
first two configured groups render as the dagger / double-dagger markers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import EvaluationError
from .special import student_t_two_tailed

DEFAULT_ALPHA = 0.05

_MARKERS = ("†", "††")  # dagger, double dagger


def pearson(xs: list[float], ys: list[float]) -> float:
    """Sample Pearson correlation; undefined (error) for n < 3 or zero variance."""
    n = len(xs)
    if len(ys) != n:
        raise EvaluationError(f"length mismatch: {n} vs {len(ys)}")
    if n < 3:
        raise EvaluationError(f"need at least 3 points, got {n}")
    mean_x = sum(xs) / n
    mean_y = sum(ys) / n
    sxx = sum((x - mean_x) ** 2 for x in xs)
    syy = sum((y - mean_y) ** 2 for y in ys)
    if sxx == 0.0 or syy == 0.0:
        raise EvaluationError("zero variance: correlation undefined")
    sxy = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    r = sxy / math.sqrt(sxx * syy)
    # rounding can push |r| one ulp past 1; keep the mathematical bound
    return max(-1.0, min(1.0, r))


def williams_test(r12: float, r13: float, r23: float, n: int) -> tuple[float, float]:
    """Williams' t and two-tailed p for the difference of two dependent correlations.

    r12 and r13 are the two correlations against the shared target; r23 is the
    correlation between the two predictors; n is the common sample size. The
    statistic follows a t distribution with n - 3 degrees of freedom.
    """
    if n <= 3:
        raise EvaluationError(f"Williams' test needs n >= 4, got {n}")
    for name, r in (("r12", r12), ("r13", r13), ("r23", r23)):
        if not -1.0 < r < 1.0:
            raise EvaluationError(f"{name}={r} outside (-1, 1)")
    big_k = 1.0 - r12 * r12 - r13 * r13 - r23 * r23 + 2.0 * r12 * r13 * r23
    if big_k <= 0.0:
        raise EvaluationError(f"degenerate correlation triple (K={big_k})")
    denom = 2.0 * big_k * (n - 1) / (n - 3) + ((r12 + r13) ** 2 / 4.0) * (1.0 - r23) ** 3
    t = (r12 - r13) * math.sqrt((n - 1) * (1.0 + r23) / denom)
    p = student_t_two_tailed(t, n - 3)
    return t, p


@dataclass(frozen=True)
class CorrelationRow:
    predictor: str
    metric: str
    r: float
    n: int


@dataclass(frozen=True)
class SignificanceEntry:
    metric: str
    predictor: str
    baseline: str
    t: float
    p: float
    better: bool


@dataclass
class CorrelationReport:
    alpha: float = DEFAULT_ALPHA
    groups: dict[str, list[str]] = field(default_factory=dict)
    rows: list[CorrelationRow] = field(default_factory=list)
    significance: list[SignificanceEntry] = field(default_factory=list)
    # (predictor, metric) -> group name -> flag
    group_flags: dict[tuple[str, str], dict[str, bool]] = field(default_factory=dict)
    # pairwise tests whose Williams statistic is undefined (e.g. |r| = 1)
    untestable: list[tuple[str, str, str, str]] = field(default_factory=list)
    dropped_qids: int = 0

    def metrics(self) -> list[str]:
        seen: list[str] = []
        for row in self.rows:
            if row.metric not in seen:
                seen.append(row.metric)
        return seen

    def predictors(self) -> list[str]:
        seen: list[str] = []
        for row in self.rows:
            if row.predictor not in seen:
                seen.append(row.predictor)
        return seen

    def r_for(self, predictor: str, metric: str) -> float:
        for row in self.rows:
            if row.predictor == predictor and row.metric == metric:
                return row.r
        raise KeyError((predictor, metric))

    def merge(self, other: "CorrelationReport") -> None:
        """Fold another metric's evaluation into this report."""
        if other.alpha != self.alpha:
            raise EvaluationError("cannot merge reports with different alpha")
        for name, members in other.groups.items():
            self.groups.setdefault(name, members)
        self.rows.extend(other.rows)
        self.significance.extend(other.significance)
        self.group_flags.update(other.group_flags)
        self.untestable.extend(other.untestable)
        self.dropped_qids = max(self.dropped_qids, other.dropped_qids)

    def _marker(self, predictor: str, metric: str) -> str:
        flags = self.group_flags.get((predictor, metric), {})
        marker = ""
        for i, group in enumerate(self.groups):
            if i >= len(_MARKERS):
                break
            if flags.get(group):
                marker = _MARKERS[i]
        return marker

    def to_tsv(self) -> str:
        """Correlation matrix: one predictor per row, one metric per column."""
        metrics = self.metrics()
        lines = ["predictor\t" + "\t".join(metrics)]
        for pred in self.predictors():
            cells = [f"{self.r_for(pred, m):.9g}" for m in metrics]
            lines.append(pred + "\t" + "\t".join(cells))
        return "\n".join(lines) + "\n"

    def significance_tsv(self) -> str:
        lines = ["metric\tpredictor\tbaseline\tt\tp\tbetter"]
        for e in self.significance:
            lines.append(
                f"{e.metric}\t{e.predictor}\t{e.baseline}\t{e.t:.9g}\t{e.p:.9g}\t"
                + ("1" if e.better else "0")
            )
        for metric, pred, base, reason in self.untestable:
            lines.append(f"{metric}\t{pred}\t{base}\tNA\tNA\t{reason}")
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        """Plain-text table with dagger markers, one column per metric."""
        metrics = self.metrics()
        preds = self.predictors()
        n_by_metric = {row.metric: row.n for row in self.rows}
        width = max([len("predictor")] + [len(p) for p in preds]) + 2
        header = "predictor".ljust(width) + "".join(m.rjust(12) for m in metrics)
        lines = [header, "-" * len(header)]
        for pred in preds:
            cells = []
            for m in metrics:
                cells.append(f"{self.r_for(pred, m):.3f}{self._marker(pred, m)}".rjust(12))
            lines.append(pred.ljust(width) + "".join(cells))
        lines.append("")
        for i, (group, members) in enumerate(self.groups.items()):
            if i >= len(_MARKERS):
                break
            lines.append(
                f"{_MARKERS[i]} significantly better than every predictor in "
                f"'{group}' ({', '.join(members)}) at alpha={self.alpha}"
            )
        lines.append(
            "n per metric: "
            + ", ".join(f"{m}={n_by_metric[m]}" for m in metrics)
        )
        if self.dropped_qids:
            lines.append(f"questions dropped for incomplete columns: {self.dropped_qids}")
        return "\n".join(lines) + "\n"


def evaluate(
    predictors: dict[str, dict[str, float]],
    gains: dict[str, float],
    baseline_groups: dict[str, list[str]] | None = None,
    alpha: float = DEFAULT_ALPHA,
    metric: str = "gain",
    dropped_qids: int = 0,
) -> CorrelationReport:
    """Correlate every predictor column with one actual-gain column.

    All columns must cover exactly the same qid set (misalignment is an
    error listing the symmetric difference). Reduction order is qid-sorted,
    so results are bit-for-bit reproducible.
    """
    baseline_groups = baseline_groups or {}
    qids = sorted(gains)
    gain_vec = [gains[q] for q in qids]
    for name, column in predictors.items():
        if set(column) != set(gains):
            diff = sorted(set(column) ^ set(gains))
            raise EvaluationError(
                f"predictor {name!r} misaligned with gain column; symmetric difference: {diff}"
            )
    for group, members in baseline_groups.items():
        for member in members:
            if member not in predictors:
                raise EvaluationError(f"baseline group {group!r} names unknown predictor {member!r}")

    names = sorted(predictors)
    vectors = {name: [predictors[name][q] for q in qids] for name in names}
    report = CorrelationReport(alpha=alpha, groups=dict(baseline_groups), dropped_qids=dropped_qids)
    r_gain: dict[str, float] = {}
    for name in names:
        r_gain[name] = pearson(vectors[name], gain_vec)
        report.rows.append(CorrelationRow(predictor=name, metric=metric, r=r_gain[name], n=len(qids)))

    # Each unique (predictor, baseline) pair is tested once even when baseline
    # groups overlap; None marks a pair whose Williams statistic is undefined.
    pair_better: dict[tuple[str, str], bool | None] = {}

    def tested_better(name: str, rival: str) -> bool | None:
        key = (name, rival)
        if key in pair_better:
            return pair_better[key]
        try:
            r23 = pearson(vectors[name], vectors[rival])
            t, p = williams_test(r_gain[name], r_gain[rival], r23, len(qids))
        except EvaluationError as exc:
            report.untestable.append((metric, name, rival, str(exc)))
            pair_better[key] = None
            return None
        better = r_gain[name] > r_gain[rival] and p < alpha
        report.significance.append(
            SignificanceEntry(metric=metric, predictor=name, baseline=rival, t=t, p=p, better=better)
        )
        pair_better[key] = better
        return better

    for name in names:
        flags: dict[str, bool] = {}
        for group, members in baseline_groups.items():
            rivals = [m for m in members if m != name]
            beat_all = bool(rivals)
            for rival in rivals:
                if tested_better(name, rival) is not True:
                    beat_all = False
            flags[group] = beat_all
        report.group_flags[(name, metric)] = flags
    return report
