"""Built-in scenarios.

Unless an entry says otherwise: n=1000, f=0.5, t=50, 100 applicants per
period, 100 replications, reward +0.05, penalty -0.05, everyone applies to
every firm.

The Study 3 firm thresholds, sophistication, cost of service, applicants
per period and replication count are calibration choices, chosen so the four
targeting scenarios separate cleanly at 100k individuals.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..ecosystem import TargetingPolicy
from ..firm import FirmConfig
from .config import ScenarioConfig

STUDY1_THRESHOLDS = (0.5, 0.6, 0.7, 0.8)
STUDY1_SOPHISTICATION = (0.7, 0.9)
SECOND_FIRMS = {
    "a": FirmConfig.uniform(1, 0.7, 0.7),
    "b": FirmConfig.uniform(1, 0.6, 0.9),
}
# implicit-bias sophistication pairs (non_protected, protected) for scenarios 1-4
IMPLICIT_SOPHISTICATION = ((0.9, 0.7), (0.9, 0.9), (0.8, 0.8), (0.7, 0.7))
APPENDIX_A_FRACTION = 0.136
SWEEP_VALUES = tuple(round(0.1 * i, 1) for i in range(1, 10))

# Study 3 calibration
STUDY3_N = 100_000
STUDY3_APPLICANTS = 10_000
STUDY3_LOW_TAU, STUDY3_HIGH_TAU = 0.6, 0.8
STUDY3_SOPHISTICATION = 0.8
STUDY3_COST = 0.1
STUDY3_REPLICATIONS = 20


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    family: str
    description: str
    config: ScenarioConfig


@dataclass(frozen=True)
class SweepEntry:
    name: str
    family: str
    description: str
    base: ScenarioConfig
    axis: str
    values: tuple[float, ...]


def _entry(name, family, description, firms, **kw) -> CatalogEntry:
    cfg = ScenarioConfig(firms=tuple(firms), name=name, description=description, **kw)
    return CatalogEntry(name, family, description, cfg.validate())


def _study1(prefix: str = "", **kw) -> list[CatalogEntry]:
    out = []
    for s in STUDY1_SOPHISTICATION:
        for i, tau in enumerate(STUDY1_THRESHOLDS, start=1):
            focal = FirmConfig.uniform(0, tau, s)
            name = f"{prefix}study1-single-s{s}-t{i}"
            out.append(_entry(name, f"{prefix}study1 single", f"single firm, s={s}, tau={tau}", [focal], **kw))
            for variant in ("a", "b"):
                second = SECOND_FIRMS[variant]
                name = f"{prefix}study1-multi-{variant}-s{s}-t{i}"
                desc = (
                    f"focal firm s={s}, tau={tau}; second firm "
                    f"tau={second.threshold[0]}, s={second.sophistication[0]}"
                )
                out.append(_entry(name, f"{prefix}study1 multi-{variant}", desc, [focal, second], **kw))
    return out


def _study2() -> list[CatalogEntry]:
    out = []
    for tau in (0.3, 0.8):
        for sc, soph in enumerate(IMPLICIT_SOPHISTICATION, start=1):
            firms = [FirmConfig(i, (tau, tau), soph) for i in range(2)]
            desc = f"two firms, tau={tau}; s non_protected={soph[0]}, protected={soph[1]}"
            out.append(_entry(f"study2-implicit-t{tau}-sc{sc}", f"study2 implicit t{tau}", desc, firms))

    fair = (0.8, 0.8)
    biased = (0.8, 0.9)  # (non_protected, protected)
    reverse = (0.9, 0.8)
    layouts = {
        1: ((fair, fair), "both firms use tau=0.8 for both groups"),
        2: ((biased, fair), "firm 0 uses tau=0.9 for the protected group"),
        3: ((biased, biased), "both firms use tau=0.9 for the protected group"),
        4: ((biased, reverse), "firm 0 uses tau=0.9 for protected, firm 1 tau=0.9 for non-protected"),
    }
    for sc, (taus, desc) in layouts.items():
        firms = [FirmConfig(i, taus[i], (0.8, 0.8)) for i in range(2)]
        out.append(_entry(f"study2-explicit-sc{sc}", "study2 explicit", desc, firms))
    return out


def study3_firms(cost: float = 0.0) -> list[FirmConfig]:
    """Ten low-threshold firms (ids 0-9) then ten high-threshold firms (10-19)."""
    low = [FirmConfig.uniform(i, STUDY3_LOW_TAU, STUDY3_SOPHISTICATION, cost) for i in range(10)]
    high = [FirmConfig.uniform(10 + i, STUDY3_HIGH_TAU, STUDY3_SOPHISTICATION) for i in range(10)]
    return low + high


def _study3() -> list[CatalogEntry]:
    everyone = TargetingPolicy.all_firms()
    layouts = {
        1: (everyone, 0.0, "everyone applies to all 20 firms"),
        2: (TargetingPolicy.random_subset(3), 0.0, "protected applicants apply to 3 random firms"),
        3: (TargetingPolicy.low_threshold_subset(3), 0.0, "protected applicants apply to 3 of the 10 low-threshold firms"),
        4: (
            TargetingPolicy.low_threshold_subset(3),
            STUDY3_COST,
            f"as sc3, low-threshold firms have cost of service {STUDY3_COST}",
        ),
    }
    return [
        _entry(
            f"study3-sc{sc}", "study3", desc, study3_firms(cost),
            n=STUDY3_N, applicants_per_period=STUDY3_APPLICANTS,
            replications=STUDY3_REPLICATIONS, targeting=(everyone, protected),
        )
        for sc, (protected, cost, desc) in layouts.items()
    ]


def _appendix_c() -> tuple[list[CatalogEntry], list[SweepEntry]]:
    entries, sweeps = [], []
    specs = (
        ("tau", "threshold", FirmConfig.uniform(0, 0.7, 0.7), "appendixC tau sweep", "single firm, s=0.7, tau={v}"),
        ("s", "sophistication", FirmConfig.uniform(0, 0.7, 0.7), "appendixC s sweep", "single firm, tau=0.7, s={v}"),
    )
    for short, axis, firm, family, template in specs:
        name = f"appendixC-{short}-sweep"
        base = ScenarioConfig(firms=(firm,), name=name, description=template.format(v="swept")).validate()
        sweeps.append(SweepEntry(name, family, f"sweep {axis} over 0.1..0.9", base, axis, SWEEP_VALUES))
        for sc, v in enumerate(SWEEP_VALUES, start=1):
            f = FirmConfig.uniform(0, v, 0.7) if axis == "threshold" else FirmConfig.uniform(0, 0.7, v)
            entries.append(_entry(f"{name}-sc{sc}", family, template.format(v=v), [f]))
    return entries, sweeps


def _build():
    entries = _study1()
    entries += _study2()
    entries += _study3()
    entries += _study1(prefix="appendixA-", f=APPENDIX_A_FRACTION)
    c_entries, sweeps = _appendix_c()
    entries += c_entries
    catalog = {e.name: e for e in entries}
    aliases = {
        "study1-multi-a": "study1-multi-a-s0.7-t1",
        "study1-multi-b": "study1-multi-b-s0.7-t1",
    }
    return catalog, {s.name: s for s in sweeps}, aliases


CATALOG, SWEEPS, ALIASES = _build()


class CatalogError(KeyError):
    def __str__(self) -> str:
        return self.args[0]


def names() -> list[str]:
    return list(CATALOG) + list(ALIASES) + list(SWEEPS)


def builtin(name: str) -> ScenarioConfig:
    name = ALIASES.get(name, name)
    if name in CATALOG:
        return CATALOG[name].config
    if name in SWEEPS:
        return SWEEPS[name].base
    raise CatalogError(f"unknown scenario {name!r}; valid names: {', '.join(names())}")


def listing() -> list[str]:
    """One line per catalog name: ``name  family  description``."""
    width = max(len(n) for n in names())
    lines = [f"{e.name:<{width}}  {e.family:<26}  {e.description}" for e in CATALOG.values()]
    lines += [
        f"{alias:<{width}}  {CATALOG[target].family:<26}  alias of {target}" for alias, target in ALIASES.items()
    ]
    lines += [f"{s.name:<{width}}  {s.family:<26}  {s.description}" for s in SWEEPS.values()]
    return lines
