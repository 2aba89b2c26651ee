"""Independent verification of solutions against their instance.

The checker trusts nothing from the solver: it re-derives every constraint
from the lightpaths alone. Violation classes:

* ``coverage``              one working path per demand, one protection path
                            per protected demand, nothing else
* ``path``                  each lightpath is a simple directed path from the
                            demand's source to its destination
* ``channel-consistency``   a demand's working and protection paths ride the
                            same channel
* ``wavelength-uniqueness`` a (link, channel) pair serves at most one demand
* ``disjointness``          a demand's working and protection paths share no link
* ``channel-range``         channel indices fall inside the wavelength budget

``wavelength-uniqueness`` covers different demands; sharing between the two
paths of one demand is classified as ``disjointness``. Together with
``channel-consistency`` the three reproduce exactly the per-(link, channel)
uniqueness of the underlying model.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ModelError
from .model import DesignConfig, IlpModel
from .solver import PROTECTION, WORKING, Lightpath, RwaSolution
from .topology import NetworkTopology
from .traffic import TrafficMatrix

VIOLATION_CLASSES = (
    "coverage",
    "path",
    "channel-consistency",
    "wavelength-uniqueness",
    "disjointness",
    "channel-range",
)


@dataclass(frozen=True)
class Violation:
    constraint: str
    demand: int | None
    link: int | None
    message: str


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    violations: tuple[Violation, ...]

    def classes(self) -> set[str]:
        return {v.constraint for v in self.violations}

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "violations": [
                {
                    "constraint": v.constraint,
                    "demand": v.demand,
                    "link": v.link,
                    "message": v.message,
                }
                for v in self.violations
            ],
        }


def check_solution(
    t: NetworkTopology, m: TrafficMatrix, cfg: DesignConfig, s: RwaSolution
) -> ValidationReport:
    """Re-check every constraint; violations are data, not exceptions."""
    violations: list[Violation] = []
    demands = {d.id: d for d in m.demands}

    grouped: dict[tuple[int, str], list[Lightpath]] = {}
    for lp in s.lightpaths:
        if lp.demand not in demands:
            violations.append(
                Violation("coverage", lp.demand, None, f"lightpath for unknown demand {lp.demand}")
            )
            continue
        if lp.role not in (WORKING, PROTECTION):
            violations.append(
                Violation("coverage", lp.demand, None, f"unknown lightpath role {lp.role!r}")
            )
            continue
        grouped.setdefault((lp.demand, lp.role), []).append(lp)

    for d in m.demands:
        working = grouped.get((d.id, WORKING), [])
        protection = grouped.get((d.id, PROTECTION), [])
        if len(working) != 1:
            violations.append(
                Violation("coverage", d.id, None, f"demand {d.id} has {len(working)} working paths, expected 1")
            )
        expected = 1 if d.protected else 0
        if len(protection) != expected:
            violations.append(
                Violation(
                    "coverage",
                    d.id,
                    None,
                    f"demand {d.id} has {len(protection)} protection paths, expected {expected}",
                )
            )

    for lp in s.lightpaths:
        d = demands.get(lp.demand)
        if d is not None:
            violations.extend(_check_path(t, d, lp))
        if not 0 <= lp.channel < cfg.capacity:
            violations.append(
                Violation(
                    "channel-range",
                    lp.demand,
                    None,
                    f"channel {lp.channel} outside [0, {cfg.capacity})",
                )
            )

    for d in m.demands:
        working = grouped.get((d.id, WORKING), [])
        protection = grouped.get((d.id, PROTECTION), [])
        if len(working) == 1 and len(protection) == 1:
            w, p = working[0], protection[0]
            if w.channel != p.channel:
                violations.append(
                    Violation(
                        "channel-consistency",
                        d.id,
                        None,
                        f"demand {d.id} uses channel {w.channel} working but {p.channel} protection",
                    )
                )
            for e in sorted(set(w.links) & set(p.links)):
                violations.append(
                    Violation(
                        "disjointness",
                        d.id,
                        e,
                        f"demand {d.id} uses link {e} on both working and protection paths",
                    )
                )

    occupied: dict[tuple[int, int], tuple[int, str]] = {}
    for lp in s.lightpaths:
        for e in lp.links:
            cell = (e, lp.channel)
            holder = occupied.get(cell)
            if holder is None:
                occupied[cell] = (lp.demand, lp.role)
            elif holder[0] != lp.demand:
                violations.append(
                    Violation(
                        "wavelength-uniqueness",
                        lp.demand,
                        e,
                        f"link {e} channel {lp.channel} used by demands {holder[0]} and {lp.demand}",
                    )
                )

    return ValidationReport(not violations, tuple(violations))


def _check_path(t: NetworkTopology, demand, lp: Lightpath) -> list[Violation]:
    bad = []
    if not lp.links:
        return [Violation("path", lp.demand, None, f"demand {lp.demand} {lp.role} path is empty")]
    for e in lp.links:
        if not 0 <= e < t.num_links:
            return [Violation("path", lp.demand, e, f"unknown link id {e}")]
    node = demand.src
    seen = {node}
    for e in lp.links:
        link = t.links[e]
        if link.src != node:
            bad.append(
                Violation("path", lp.demand, e, f"link {e} starts at {link.src}, path is at {node}")
            )
            return bad
        node = link.dst
        if node in seen:
            bad.append(Violation("path", lp.demand, e, f"path revisits node {node}"))
            return bad
        seen.add(node)
    if node != demand.dst:
        bad.append(
            Violation("path", lp.demand, lp.links[-1], f"path ends at {node}, demand ends at {demand.dst}")
        )
    return bad


def compute_metrics(s: RwaSolution) -> tuple[int, int]:
    """(wavelength count, wavelength-link usage) recomputed from lightpaths."""
    channels = {lp.channel for lp in s.lightpaths}
    usage = sum(len(lp.links) for lp in s.lightpaths)
    return len(channels), usage


def reconstruct_assignment(mdl: IlpModel, s: RwaSolution) -> dict[str, int]:
    """Full binary assignment of the model's variables encoding ``s``.

    Channel-usage variables are set exactly where some lightpath occupies
    them, so the model objective of the result equals
    ``alpha1 * wavelength_count + alpha2 * wavelength_link_usage``.
    """
    assignment = {v.name: 0 for v in mdl.variables}

    def set_one(name: str):
        if name not in assignment:
            raise ModelError(f"solution references variable {name} absent from the model")
        assignment[name] = 1

    for lp in s.lightpaths:
        kind = "x" if lp.role == WORKING else "y"
        for e in lp.links:
            set_one(f"{kind}_d{lp.demand}_e{e}_c{lp.channel}")
            set_one(f"gamma_e{e}_c{lp.channel}")
        set_one(f"delta_c{lp.channel}")
        if lp.role == WORKING:
            set_one(f"theta_d{lp.demand}_c{lp.channel}")
    return assignment
