"""Population of loan applicants: group membership, latent quality, feedback.

Quality is stored column-wise (one numpy array per attribute) because the
period loop touches thousands of individuals at once. :class:`Individual` is a
lightweight row view for the scalar operations and for inspection.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class ConfigError(ValueError):
    """Invalid scenario or model parameters.

    ``errors`` holds one human-readable message per offending field.
    """

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class GroupId(enum.IntEnum):
    NON_PROTECTED = 0
    PROTECTED = 1

    @property
    def label(self) -> str:
        return "protected" if self is GroupId.PROTECTED else "non_protected"


@dataclass(frozen=True)
class Individual:
    id: int
    group: GroupId
    quality: float


@dataclass(frozen=True)
class QualityDistConfig:
    """Clipped normal quality law; the protected group's mean is shifted left.

    The defaults are calibrated so that the lending scenarios in the catalog
    sit in the regime where most applicants are creditworthy.
    """

    base_mean: float = 0.97
    std_dev: float = 0.10
    protected_shift: float = 0.25

    def validate(self, prefix: str = "quality_dist") -> list[str]:
        errors = []
        if not 0.0 < self.base_mean < 1.0:
            errors.append(f"{prefix}.base_mean must be in (0, 1), got {self.base_mean}")
        if not self.std_dev > 0.0:
            errors.append(f"{prefix}.std_dev must be > 0, got {self.std_dev}")
        if not self.protected_shift >= 0.0:
            errors.append(f"{prefix}.protected_shift must be >= 0, got {self.protected_shift}")
        elif not 0.0 < self.base_mean - self.protected_shift < 1.0:
            errors.append(
                f"{prefix}: base_mean - protected_shift must be in (0, 1), "
                f"got {self.base_mean - self.protected_shift}"
            )
        return errors

    def mean_for(self, group: GroupId) -> float:
        if group is GroupId.PROTECTED:
            return self.base_mean - self.protected_shift
        return self.base_mean


@dataclass
class Population:
    group: np.ndarray  # int8, GroupId values
    quality: np.ndarray  # float64 in [0, 1]

    @property
    def n(self) -> int:
        return len(self.quality)

    @property
    def f(self) -> float:
        """Realized protected fraction."""
        return float(np.count_nonzero(self.group == GroupId.PROTECTED)) / self.n

    @property
    def individuals(self) -> list[Individual]:
        return [self[i] for i in range(self.n)]

    def __getitem__(self, k: int) -> Individual:
        return Individual(int(k), GroupId(int(self.group[k])), float(self.quality[k]))

    def copy(self) -> "Population":
        return Population(self.group.copy(), self.quality.copy())


def protected_count(n: int, f: float) -> int:
    # round-half-even would make f=0.5, n=odd depend on parity; use half-up.
    return int(np.floor(f * n + 0.5))


def init_population(n: int, f: float, dist: QualityDistConfig, rng: np.random.Generator) -> Population:
    """Build ``n`` individuals with exactly ``round(f * n)`` protected members.

    Draw order: one permutation of ids (the first ``round(f*n)`` become
    protected), then ``n`` standard normals in id order.
    """
    errors = []
    if n < 1:
        errors.append(f"n must be >= 1, got {n}")
    if not 0.0 <= f <= 1.0:
        errors.append(f"f must be in [0, 1], got {f}")
    errors += dist.validate()
    if errors:
        raise ConfigError(errors)

    group = np.zeros(n, dtype=np.int8)
    group[rng.permutation(n)[: protected_count(n, f)]] = GroupId.PROTECTED
    means = np.where(group == GroupId.PROTECTED, dist.base_mean - dist.protected_shift, dist.base_mean)
    quality = np.clip(means + dist.std_dev * rng.standard_normal(n), 0.0, 1.0)
    return Population(group, quality)


def apply_feedback(ind: Individual, repaid: bool, reward: float, penalty: float) -> Individual:
    delta = reward if repaid else penalty
    return Individual(ind.id, ind.group, min(1.0, max(0.0, ind.quality + delta)))


def draw_ground_truth(ind: Individual, rng: np.random.Generator) -> bool:
    """Would this individual repay? True with probability ``ind.quality``."""
    return bool(rng.random() < ind.quality)
