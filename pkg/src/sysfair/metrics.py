"""Confusion counts and group-fairness measures at firm and ecosystem scope.

Counts are kept as integer arrays with a trailing axis ``[tp, fp, tn, fn]``.
A firm scope classifies the firm's own decision for every applicant that
applied to it; the ecosystem scope classifies the OR-aggregated outcome once
per applicant. The label is always the applicant's ground-truth repayment
draw, so denied applicants are labelled too.

Gaps are ``non_protected - protected``: positive means the protected group is
worse off.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .population import GroupId

if TYPE_CHECKING:
    from .ecosystem import PeriodLog

TP, FP, TN, FN = range(4)
RATE_METRICS = ("TPR", "FPR", "SP_rate")
GAP_METRICS = ("TPR_gap", "SP_gap")
METRICS = RATE_METRICS + GAP_METRICS
GROUP_LABELS = ("non_protected", "protected", "all")
GAP_LABEL = "gap(non_protected-protected)"
CSV_COLUMNS = ("scenario", "scope", "group_or_gap", "metric", "period", "mean", "std", "n_replications")


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(self.tp + other.tp, self.fp + other.fp, self.tn + other.tn, self.fn + other.fn)

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @classmethod
    def from_array(cls, a) -> "ConfusionCounts":
        return cls(*(int(x) for x in a))


@dataclass(frozen=True)
class MetricScope:
    """A single firm (``firm_id`` set) or the whole ecosystem (``None``)."""

    firm_id: int | None = None

    @property
    def label(self) -> str:
        return "ecosystem" if self.firm_id is None else f"firm:{self.firm_id}"

    @classmethod
    def ecosystem(cls) -> "MetricScope":
        return cls(None)


def _category(pred: np.ndarray, label: np.ndarray) -> np.ndarray:
    # pred=1: tp if label else fp; pred=0: fn if label else tn
    return np.where(pred, 1 - label, 2 + label)


def period_counts(log: "PeriodLog") -> np.ndarray:
    """Counts of shape ``(m + 1, 2, 4)``; scope ``m`` is the ecosystem."""
    a, m = log.decision.shape
    label = log.ground_truth.astype(np.intp)
    group = log.group.astype(np.intp)

    firm_key = np.arange(m) * 8 + group[:, None] * 4 + _category(log.decision, label[:, None])
    eco_key = m * 8 + group * 4 + _category(log.outcome, label)
    keys = np.concatenate([firm_key[log.targeted], eco_key])
    return np.bincount(keys, minlength=(m + 1) * 8).reshape(m + 1, 2, 4)


def accumulate(log: "PeriodLog") -> dict[tuple[MetricScope, GroupId], ConfusionCounts]:
    counts = period_counts(log)
    scopes = [MetricScope(int(fid)) for fid in log.firm_ids] + [MetricScope.ecosystem()]
    return {(s, g): ConfusionCounts.from_array(counts[i, g]) for i, s in enumerate(scopes) for g in GroupId}


def _ratio(num: int, den: int) -> float | None:
    return None if den == 0 else num / den


def tpr(c: ConfusionCounts) -> float | None:
    return _ratio(c.tp, c.tp + c.fn)


def fpr(c: ConfusionCounts) -> float | None:
    return _ratio(c.fp, c.fp + c.tn)


def sp_rate(c: ConfusionCounts) -> float | None:
    return _ratio(c.tp + c.fp, c.total)


def gap(nonprot: float | None, prot: float | None) -> float | None:
    if nonprot is None or prot is None:
        return None
    return nonprot - prot


# -- vectorized series -------------------------------------------------------


def _safe_div(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    out = np.full(np.broadcast(num, den).shape, np.nan)
    np.divide(num, den, out=out, where=den > 0)
    return out


def rates(counts: np.ndarray) -> dict[str, np.ndarray]:
    """TPR, FPR and SP rate for counts ``(..., 4)``; NaN on empty denominators."""
    tp, fp, tn, fn = (counts[..., i] for i in range(4))
    return {
        "TPR": _safe_div(tp, tp + fn),
        "FPR": _safe_div(fp, fp + tn),
        "SP_rate": _safe_div(tp + fp, tp + fp + tn + fn),
    }


def series_keys(scope_labels: Sequence[str]) -> list[tuple[str, str, str]]:
    keys = []
    for scope in scope_labels:
        for metric in RATE_METRICS:
            keys += [(scope, g, metric) for g in GROUP_LABELS]
        keys += [(scope, GAP_LABEL, metric) for metric in GAP_METRICS]
    return keys


def series_values(counts: np.ndarray, cumulative: bool = False) -> np.ndarray:
    """Metric values for counts ``(..., t, S, 2, 4)`` as ``(..., t, K)``.

    The K axis follows :func:`series_keys`.
    """
    if cumulative:
        counts = np.cumsum(counts, axis=-4)
    with_all = np.concatenate([counts, counts.sum(axis=-2, keepdims=True)], axis=-2)
    r = rates(with_all)  # each (..., t, S, 3)
    per_scope = []
    for metric in RATE_METRICS:
        per_scope.append(r[metric])
    per_scope.append(r["TPR"][..., 0:1] - r["TPR"][..., 1:2])
    per_scope.append(r["SP_rate"][..., 0:1] - r["SP_rate"][..., 1:2])
    stacked = np.concatenate(per_scope, axis=-1)  # (..., t, S, 11)
    return stacked.reshape(stacked.shape[:-2] + (-1,))


@dataclass(frozen=True)
class MetricSeries:
    """Per-period values of one metric for one replication; NaN is missing."""

    scope: str
    group: str
    metric: str
    values: np.ndarray


@dataclass(frozen=True)
class AveragedSeries:
    scope: str
    group: str
    metric: str
    mean: np.ndarray
    std: np.ndarray
    n: np.ndarray


def nan_mean_std(values: np.ndarray, axis: int = 0) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Mean and sample std over ``axis`` skipping NaN, plus contributor counts.

    A single contributor has std 0; no contributors gives NaN for both.
    """
    present = ~np.isnan(values)
    n = present.sum(axis=axis)
    # shift by the first present value so identical inputs give exact results
    first = np.take_along_axis(values, np.expand_dims(present.argmax(axis=axis), axis), axis)
    first = np.where(np.isnan(first), 0.0, first)
    shifted = np.where(present, values - first, 0.0)
    mean = np.squeeze(first, axis) + _safe_div(shifted.sum(axis=axis), n)
    dev = np.where(present, values - np.expand_dims(mean, axis), 0.0)
    ss = (dev * dev).sum(axis=axis)
    std = np.where(n == 1, 0.0, _safe_div(ss, n - 1))
    std = np.where(n == 0, np.nan, np.sqrt(std))
    return mean, std, n


def average_over_replications(series: Sequence[MetricSeries]) -> AveragedSeries:
    if not series:
        raise ValueError("no series to average")
    first = series[0]
    for s in series[1:]:
        if (s.scope, s.group, s.metric) != (first.scope, first.group, first.metric) or s.values.shape != first.values.shape:
            raise ValueError(
                f"cannot average {s.scope}/{s.group}/{s.metric} {s.values.shape} with "
                f"{first.scope}/{first.group}/{first.metric} {first.values.shape}"
            )
    mean, std, n = nan_mean_std(np.stack([s.values for s in series]))
    return AveragedSeries(first.scope, first.group, first.metric, mean, std, n)


@dataclass
class MetricTable:
    """Replication-averaged metric series for one scenario.

    ``mean``, ``std`` and ``n`` have shape ``(t, K)`` with K following ``keys``.
    """

    keys: list[tuple[str, str, str]]
    mean: np.ndarray
    std: np.ndarray
    n: np.ndarray

    @classmethod
    def from_counts(cls, counts: np.ndarray, scope_labels: Sequence[str], cumulative: bool = False) -> "MetricTable":
        """``counts`` is ``(R, t, S, 2, 4)``, one slice per replication."""
        values = series_values(counts, cumulative)
        mean, std, n = nan_mean_std(values, axis=0)
        return cls(series_keys(scope_labels), mean, std, n)

    def index(self, scope: str, group: str, metric: str) -> int:
        if metric in GAP_METRICS and group == "gap":
            group = GAP_LABEL
        return self.keys.index((scope, group, metric))

    def series(self, scope: str, group: str, metric: str) -> AveragedSeries:
        k = self.index(scope, group, metric)
        return AveragedSeries(scope, group, metric, self.mean[:, k], self.std[:, k], self.n[:, k])

    def final(self, scope: str, group: str, metric: str) -> float:
        return float(self.mean[-1, self.index(scope, group, metric)])

    @property
    def scopes(self) -> list[str]:
        return list(dict.fromkeys(k[0] for k in self.keys))


def _fmt(x: float) -> str:
    if np.isnan(x):
        return ""
    s = f"{x:.6f}"
    return "0.000000" if s == "-0.000000" else s


def metric_rows(scenario: str, table: MetricTable):
    t = table.mean.shape[0]
    for k, (scope, group, metric) in enumerate(table.keys):
        for p in range(t):
            yield (scenario, scope, group, metric, p, _fmt(table.mean[p, k]), _fmt(table.std[p, k]), int(table.n[p, k]))


def metric_csv(scenario: str, table: MetricTable, header: bool = True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header:
        w.writerow(CSV_COLUMNS)
    w.writerows(metric_rows(scenario, table))
    return buf.getvalue()
