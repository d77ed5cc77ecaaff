"""The period loop of the lending ecosystem.

Every replication owns one ``numpy.random.Generator`` (PCG64). Within a
period the stream is consumed in this fixed order:

1. applicants: ``choice(n, a, replace=False)``, then sorted by id
2. ground truth: ``random(a)``; applicant repays iff draw < quality
3. targeting: for each group in id order (non-protected, protected) whose
   policy is not ``all``, ``random((count, pool))``; the ``k`` smallest keys
   pick the firms
4. estimation noise: ``standard_normal((a, m))``, one column per firm
5. lender choice: ``random(a)``; the ``floor(u * approvers)``-th approving
   firm (in id order) lends
6. realized repayment: ``random(a)``; a would-repay borrower repays iff
   draw >= lender cost

Draws 2-6 are made for every applicant, whatever the outcome, so the stream
position never depends on decisions.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Iterator

import numpy as np

from .firm import FirmConfig, parameter_arrays
from .metrics import period_counts
from .population import ConfigError, GroupId, Individual, Population, init_population
from .seeding import derive_seed

if TYPE_CHECKING:
    from .scenario import ScenarioConfig


TARGETING_KINDS = ("all", "random", "low_threshold")


@dataclass(frozen=True)
class TargetingPolicy:
    """How an applicant picks the firms to apply to.

    ``kind`` is ``"all"``, ``"random"`` (k firms uniformly among all) or
    ``"low_threshold"`` (k firms uniformly among the floor(m/2) firms with the
    lowest non-protected thresholds, ties by id).
    """

    kind: str = "all"
    k: int | None = None

    @classmethod
    def all_firms(cls) -> "TargetingPolicy":
        return cls("all")

    @classmethod
    def random_subset(cls, k: int) -> "TargetingPolicy":
        return cls("random", k)

    @classmethod
    def low_threshold_subset(cls, k: int) -> "TargetingPolicy":
        return cls("low_threshold", k)

    def validate(self, m: int, prefix: str = "targeting") -> list[str]:
        if self.kind not in TARGETING_KINDS:
            return [f"{prefix}.kind must be one of {TARGETING_KINDS}, got {self.kind!r}"]
        if self.kind == "all":
            return []
        if self.k is None or self.k < 1:
            return [f"{prefix}.k must be >= 1, got {self.k}"]
        pool = m if self.kind == "random" else m // 2
        if self.k > pool:
            return [f"{prefix}.k={self.k} exceeds the {pool} firms available to {self.kind!r} targeting"]
        return []

    def to_dict(self) -> dict:
        return {"kind": self.kind} if self.kind == "all" else {"kind": self.kind, "k": self.k}


def low_threshold_pool(firms: list[FirmConfig]) -> list[int]:
    """Positions (not ids) of the floor(m/2) lowest-threshold firms, in order."""
    ranked = sorted(range(len(firms)), key=lambda i: (firms[i].tau(GroupId.NON_PROTECTED), firms[i].id))
    return sorted(ranked[: len(firms) // 2])


@dataclass(frozen=True)
class PeriodParams:
    applicants: int
    reward: float = 0.05
    penalty: float = -0.05


@dataclass(frozen=True)
class ApplicationRecord:
    period: int
    individual_id: int
    group: GroupId
    true_quality: float
    ground_truth: bool
    targeted_firms: frozenset[int]
    estimates: dict[int, float]
    decisions: dict[int, bool]
    outcome: bool
    lender: int | None
    realized_repaid: bool | None


@dataclass
class PeriodLog:
    """Column-oriented record of one period; ``records`` gives row views.

    Per-firm columns are indexed by firm position in the firm list; untargeted
    cells hold NaN estimates and False decisions.
    """

    period: int
    firm_ids: np.ndarray
    individual_id: np.ndarray
    group: np.ndarray
    true_quality: np.ndarray
    ground_truth: np.ndarray
    targeted: np.ndarray
    estimate: np.ndarray
    decision: np.ndarray
    outcome: np.ndarray
    lender: np.ndarray  # firm position, -1 when denied
    realized_repaid: np.ndarray

    def __len__(self) -> int:
        return len(self.individual_id)

    @property
    def records(self) -> list[ApplicationRecord]:
        return list(self.iter_records())

    def iter_records(self) -> Iterator[ApplicationRecord]:
        fid = [int(x) for x in self.firm_ids]
        for r in range(len(self)):
            cols = np.flatnonzero(self.targeted[r])
            approved = bool(self.outcome[r])
            yield ApplicationRecord(
                period=self.period,
                individual_id=int(self.individual_id[r]),
                group=GroupId(int(self.group[r])),
                true_quality=float(self.true_quality[r]),
                ground_truth=bool(self.ground_truth[r]),
                targeted_firms=frozenset(fid[c] for c in cols),
                estimates={fid[c]: float(self.estimate[r, c]) for c in cols},
                decisions={fid[c]: bool(self.decision[r, c]) for c in cols},
                outcome=approved,
                lender=fid[self.lender[r]] if approved else None,
                realized_repaid=bool(self.realized_repaid[r]) if approved else None,
            )


# -- scalar operations -------------------------------------------------------


def select_applicants(pop: Population, a: int, rng: np.random.Generator) -> np.ndarray:
    """``a`` distinct ids, uniform without replacement, returned sorted."""
    if not 1 <= a <= pop.n:
        raise ConfigError(f"applicants_per_period must be in [1, {pop.n}], got {a}")
    return np.sort(rng.choice(pop.n, size=a, replace=False))


def target_firms(
    policy: TargetingPolicy, group: GroupId, firms: list[FirmConfig], rng: np.random.Generator
) -> frozenset[int]:
    """Firm ids one applicant of ``group`` applies to.

    ``policy`` may be a single policy or a per-group pair.
    """
    if not isinstance(policy, TargetingPolicy):
        policy = policy[group]
    mask = _targeting_mask(policy, 1, firms, _pool_for(policy, firms), rng)[0]
    return frozenset(firms[c].id for c in np.flatnonzero(mask))


def aggregate_outcome(decisions: Iterable[bool]) -> bool:
    decisions = list(decisions)
    if not decisions:
        raise AssertionError("outcome requested for an applicant with no decisions")
    return any(decisions)


def assign_lender(approving: Iterable[int], rng: np.random.Generator) -> int:
    """Uniform choice among approving firm ids (ordered by id)."""
    pool = sorted(approving)
    if not pool:
        raise AssertionError("lender requested with no approving firm")
    return pool[int(rng.random() * len(pool))]


def realize_repayment(ground_truth: bool, lender: FirmConfig, rng: np.random.Generator) -> bool:
    """Cost of service turns a would-repay borrower into a default w.p. ``cost``."""
    u = rng.random()
    return bool(ground_truth) and u >= lender.cost


# -- vectorized period -------------------------------------------------------


def _pool_for(policy: TargetingPolicy, firms: list[FirmConfig]) -> np.ndarray | None:
    if policy.kind == "all":
        return None
    if policy.kind == "random":
        return np.arange(len(firms))
    return np.array(low_threshold_pool(firms), dtype=np.intp)


def _targeting_mask(policy, count, firms, pool, rng) -> np.ndarray:
    m = len(firms)
    errors = policy.validate(m)
    if errors:
        raise ConfigError(errors)
    if policy.kind == "all":
        return np.ones((count, m), dtype=bool)
    mask = np.zeros((count, m), dtype=bool)
    if count == 0:
        return mask
    keys = rng.random((count, len(pool)))
    picked = pool[np.argsort(keys, axis=1, kind="stable")[:, : policy.k]]
    np.put_along_axis(mask, picked, True, axis=1)
    return mask


class Market:
    """Firm parameters stacked for the period loop."""

    def __init__(self, firms: list[FirmConfig], targeting):
        if isinstance(targeting, TargetingPolicy):
            targeting = (targeting, targeting)
        self.firms = list(firms)
        self.targeting = tuple(targeting)
        self.m = len(self.firms)
        self.tau, self.sigma, self.cost = parameter_arrays(self.firms)
        self.firm_ids = np.array([f.id for f in self.firms])
        self.pools = [_pool_for(p, self.firms) for p in self.targeting]
        errors = []
        for g, p in zip(GroupId, self.targeting):
            errors += p.validate(self.m, f"targeting.{g.label}")
        if errors:
            raise ConfigError(errors)


def _target_all(market: Market, group: np.ndarray, rng) -> np.ndarray:
    a = len(group)
    if all(p.kind == "all" for p in market.targeting):
        return np.ones((a, market.m), dtype=bool)
    targeted = np.empty((a, market.m), dtype=bool)
    for g in GroupId:
        rows = np.flatnonzero(group == g)
        targeted[rows] = _targeting_mask(market.targeting[g], len(rows), market.firms, market.pools[g], rng)
    return targeted


def resolve_decisions(
    quality: np.ndarray, group: np.ndarray, targeted: np.ndarray, noise: np.ndarray, tau: np.ndarray, sigma: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Estimates, decisions and OR-outcomes from pre-drawn standard normals."""
    est = np.clip(quality[:, None] + noise * sigma[group], 0.0, 1.0)
    decision = (est > tau[group]) & targeted
    return np.where(targeted, est, np.nan), decision, decision.any(axis=1)


def pick_lender(decision: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Position of the ``floor(u * approvers)``-th approving firm, or -1."""
    n_app = decision.sum(axis=1)
    j = np.floor(u * n_app).astype(np.int64)
    hit = decision & (np.cumsum(decision, axis=1) == (j + 1)[:, None])
    return np.where(n_app > 0, hit.argmax(axis=1), -1)


def step(pop: Population, market: Market, params: PeriodParams, rng, period: int = 0) -> PeriodLog:
    """Advance ``pop`` one period in place and return the period log."""
    ids = select_applicants(pop, params.applicants, rng)
    a = len(ids)
    q = pop.quality[ids]
    group = pop.group[ids].astype(np.intp)
    ground_truth = rng.random(a) < q
    targeted = _target_all(market, group, rng)
    noise = rng.standard_normal((a, market.m))
    est, decision, outcome = resolve_decisions(q, group, targeted, noise, market.tau, market.sigma)
    lender = pick_lender(decision, rng.random(a))
    cost = np.where(outcome, market.cost[lender], 0.0)
    realized = ground_truth & (rng.random(a) >= cost) & outcome

    delta = np.where(realized, params.reward, params.penalty)
    pop.quality[ids] = np.where(outcome, np.clip(q + delta, 0.0, 1.0), q)

    return PeriodLog(
        period=period,
        firm_ids=market.firm_ids,
        individual_id=ids,
        group=group,
        true_quality=q,
        ground_truth=ground_truth,
        targeted=targeted,
        estimate=est,
        decision=decision,
        outcome=outcome,
        lender=lender,
        realized_repaid=realized,
    )


def run_period(
    pop: Population,
    firms: list[FirmConfig],
    policy,
    params: PeriodParams,
    rng: np.random.Generator,
    period: int = 0,
) -> tuple[Population, PeriodLog]:
    """One decision cycle. ``pop`` is updated in place and returned."""
    log = step(pop, Market(firms, policy), params, rng, period)
    return pop, log


# -- replication -------------------------------------------------------------


@dataclass
class ReplicationResult:
    index: int
    seed: int
    counts: np.ndarray  # (t, m + 1, 2, 4) int64; scope m is the ecosystem
    logs: list[PeriodLog] | None = None
    final_population: Population | None = field(default=None, repr=False)


def run_replication(config: "ScenarioConfig", replication_index: int, keep_logs: bool = False) -> ReplicationResult:
    seed = derive_seed(config.base_seed, replication_index)
    rng = np.random.default_rng(seed)
    pop = init_population(config.n, config.f, config.quality_dist, rng)
    market = Market(config.firms, config.targeting)
    params = PeriodParams(config.applicants_per_period, config.reward, config.penalty)

    counts = np.zeros((config.t, market.m + 1, 2, 4), dtype=np.int64)
    logs = [] if keep_logs else None
    for period in range(config.t):
        log = step(pop, market, params, rng, period)
        counts[period] = period_counts(log)
        if keep_logs:
            logs.append(log)
    return ReplicationResult(replication_index, seed, counts, logs, pop if keep_logs else None)


EVENT_COLUMNS = (
    "replication", "period", "individual_id", "group", "true_quality", "ground_truth",
    "firm_id", "estimate", "decision", "outcome", "lender", "realized_repaid",
)


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def write_event_log(path, results: Iterable[ReplicationResult]) -> int:
    """One row per (record, targeted firm). Returns the number of data rows."""
    rows = 0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EVENT_COLUMNS)
        for res in results:
            for log in res.logs or ():
                for rec in log.iter_records():
                    lender = "" if rec.lender is None else rec.lender
                    repaid = "" if rec.realized_repaid is None else int(rec.realized_repaid)
                    for fid in sorted(rec.targeted_firms):
                        w.writerow((
                            res.index, rec.period, rec.individual_id, rec.group.label,
                            _fmt(rec.true_quality), int(rec.ground_truth), fid,
                            _fmt(rec.estimates[fid]), int(rec.decisions[fid]),
                            int(rec.outcome), lender, repaid,
                        ))
                        rows += 1
    return rows

