"""Lender model: noisy quality estimation and threshold approval."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .population import ConfigError, GroupId, Individual


@dataclass(frozen=True)
class FirmConfig:
    """One lender.

    ``threshold`` and ``sophistication`` are indexed by :class:`GroupId`
    (``[non_protected, protected]``). Use :meth:`uniform` when both groups are
    treated alike.
    """

    id: int
    threshold: tuple[float, float]
    sophistication: tuple[float, float]
    cost: float = 0.0

    @classmethod
    def uniform(cls, id: int, threshold: float, sophistication: float, cost: float = 0.0) -> "FirmConfig":
        return cls(id, (threshold, threshold), (sophistication, sophistication), cost)

    def tau(self, group: GroupId) -> float:
        return self.threshold[group]

    def noise_var(self, group: GroupId) -> float:
        return 1.0 - self.sophistication[group]

    @property
    def group_blind(self) -> bool:
        return self.threshold[0] == self.threshold[1] and self.sophistication[0] == self.sophistication[1]

    def validate(self, prefix: str | None = None) -> list[str]:
        prefix = prefix or f"firms[{self.id}]"
        errors = []
        for g in GroupId:
            t, s = self.threshold[g], self.sophistication[g]
            if not 0.0 <= t <= 1.0:
                errors.append(f"{prefix}.threshold.{g.label} must be in [0, 1], got {t}")
            if not 0.0 < s <= 1.0:
                errors.append(f"{prefix}.sophistication.{g.label} must be in (0, 1], got {s}")
        if not 0.0 <= self.cost < 1.0:
            errors.append(f"{prefix}.cost must be in [0, 1), got {self.cost}")
        return errors


@dataclass(frozen=True)
class Estimate:
    firm_id: int
    individual_id: int
    value: float


def estimation_error(firm: FirmConfig, group: GroupId, rng: np.random.Generator, size=None):
    """Pre-clip estimation error: zero-mean normal with variance ``1 - s``."""
    return math.sqrt(firm.noise_var(group)) * rng.standard_normal(size)


def estimate_quality(firm: FirmConfig, ind: Individual, rng: np.random.Generator) -> Estimate:
    value = ind.quality + estimation_error(firm, ind.group, rng)
    return Estimate(firm.id, ind.id, min(1.0, max(0.0, value)))


def decide(firm: FirmConfig, est: Estimate, group: GroupId) -> bool:
    if est.firm_id != firm.id:
        raise ConfigError(f"estimate from firm {est.firm_id} passed to firm {firm.id}")
    return est.value > firm.tau(group)


def parameter_arrays(firms: list[FirmConfig]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Stack firm parameters as ``(tau[g, m], sigma[g, m], cost[m])`` arrays."""
    tau = np.array([[f.threshold[g] for f in firms] for g in GroupId], dtype=float)
    sigma = np.sqrt(np.array([[f.noise_var(g) for f in firms] for g in GroupId], dtype=float))
    cost = np.array([f.cost for f in firms], dtype=float)
    return tau, sigma, cost
