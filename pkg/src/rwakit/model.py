"""Binary ILP for routing and wavelength assignment, in solver-neutral form.

Variables (all binary):

* ``x[d,e,c]``  link ``e`` carries the working path of demand ``d`` on channel ``c``
* ``y[d,e,c]``  same for the protection path (protected demands only)
* ``theta[d,c]`` demand ``d`` is carried on channel ``c``
* ``gamma[e,c]`` channel ``c`` is occupied on link ``e``
* ``delta[c]``  channel ``c`` is used anywhere in the network

Constraints: every demand gets exactly one channel; working and protection
flows are conserved with ``theta`` as the source/sink term; each
(link, channel) pair carries at most one lightpath (``gamma`` equals the
number of users, and is binary); a channel counts as used once it appears on
any link. The objective is ``alpha1 * sum(delta) + alpha2 * sum(gamma)``;
with ``alpha1 > |E||C| * alpha2`` the wavelength count is minimized with
strict priority and the wavelength-link usage is minimized among the
wavelength-count optima.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm

from .errors import ModelError
from .topology import NetworkTopology
from .traffic import TrafficMatrix

VARIANTS = ("rwa_wc", "rwa_wc_p", "rwa_intwc", "rwa_intwc_p")


@dataclass(frozen=True)
class WeightPair:
    """Objective weights; exact rationals so priority comparisons never drift."""

    alpha1: Fraction
    alpha2: Fraction

    def __post_init__(self):
        object.__setattr__(self, "alpha1", Fraction(self.alpha1))
        object.__setattr__(self, "alpha2", Fraction(self.alpha2))
        if self.alpha1 < 0 or self.alpha2 < 0:
            raise ModelError("weight coefficients must be non-negative")

    def dominates_lexicographically(self, num_links: int, capacity: int) -> bool:
        """True when alpha1 outweighs any possible swing of the second objective."""
        return self.alpha1 > num_links * capacity * self.alpha2

    def scaled_integers(self) -> tuple[int, int, int]:
        """(a1, a2, scale) with a1 = alpha1*scale, a2 = alpha2*scale integral."""
        scale = lcm(self.alpha1.denominator, self.alpha2.denominator)
        return int(self.alpha1 * scale), int(self.alpha2 * scale), scale


def lexicographic_weights(t: NetworkTopology) -> WeightPair:
    """Weights (1, 1/(1 + |C||E|)): wavelength count first, link usage second."""
    if t.num_links < 1 or t.capacity < 1:
        raise ModelError("topology must have at least one link and one channel")
    return WeightPair(Fraction(1), Fraction(1, 1 + t.capacity * t.num_links))


@dataclass(frozen=True)
class DesignConfig:
    """One of the four benchmark designs plus its weights and channel budget."""

    variant: str
    weights: WeightPair
    capacity: int

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ModelError(f"unknown design {self.variant!r}; expected one of {VARIANTS}")
        if self.capacity < 1:
            raise ModelError("capacity must be a positive integer")
        if self.variant in ("rwa_wc", "rwa_wc_p"):
            if self.weights.alpha2 != 0:
                raise ModelError(f"{self.variant} is single-objective; alpha2 must be 0")
            if self.weights.alpha1 <= 0:
                raise ModelError("alpha1 must be positive")
        else:
            if self.weights.alpha2 <= 0 or self.weights.alpha1 <= 0:
                raise ModelError(f"{self.variant} needs two positive weights")

    @property
    def protection(self) -> bool:
        return self.variant.endswith("_p")

    @classmethod
    def standard(cls, variant: str, t: NetworkTopology, capacity: int | None = None) -> "DesignConfig":
        """Canonical configuration for a variant on a topology."""
        cap = t.capacity if capacity is None else capacity
        scoped = t.with_capacity(cap)
        if variant in ("rwa_wc", "rwa_wc_p"):
            weights = WeightPair(Fraction(1), Fraction(0))
        else:
            weights = lexicographic_weights(scoped)
        return cls(variant, weights, cap)


@dataclass(frozen=True)
class VariableRef:
    """Typed handle for one binary variable; ``name`` is the wire format."""

    kind: str
    demand: int | None = None
    link: int | None = None
    channel: int | None = None

    @property
    def name(self) -> str:
        parts = [self.kind]
        if self.demand is not None:
            parts.append(f"d{self.demand}")
        if self.link is not None:
            parts.append(f"e{self.link}")
        if self.channel is not None:
            parts.append(f"c{self.channel}")
        return "_".join(parts)


_KIND_FIELDS = {
    "x": ("d", "e", "c"),
    "y": ("d", "e", "c"),
    "theta": ("d", "c"),
    "gamma": ("e", "c"),
    "delta": ("c",),
}


def parse_variable_name(name: str) -> VariableRef:
    """Inverse of :attr:`VariableRef.name`."""
    parts = name.split("_")
    kind = parts[0]
    if kind not in _KIND_FIELDS:
        raise ModelError(f"unknown variable kind in {name!r}")
    expected = _KIND_FIELDS[kind]
    if len(parts) != len(expected) + 1:
        raise ModelError(f"malformed variable name {name!r}")
    values = {}
    for token, prefix in zip(parts[1:], expected):
        if not token.startswith(prefix) or not token[len(prefix):].isdigit():
            raise ModelError(f"malformed variable name {name!r}")
        values[prefix] = int(token[len(prefix):])
    return VariableRef(kind, values.get("d"), values.get("e"), values.get("c"))


@dataclass(frozen=True)
class Constraint:
    name: str
    coeffs: tuple[tuple[int, int], ...]  # (variable index, integer coefficient)
    sense: str  # '=', '<=', '>='
    rhs: int


@dataclass(frozen=True)
class IlpModel:
    variables: tuple[VariableRef, ...]
    constraints: tuple[Constraint, ...]
    objective: tuple[tuple[int, Fraction], ...]
    metadata: dict = field(default_factory=dict)

    @property
    def index(self) -> dict[str, int]:
        cached = self.__dict__.get("_index")
        if cached is None:
            cached = {v.name: i for i, v in enumerate(self.variables)}
            self.__dict__["_index"] = cached
        return cached


def check_design_inputs(t: NetworkTopology, m: TrafficMatrix, cfg: DesignConfig) -> None:
    """Shared input validation for model building and solving."""
    m.validate_against(t)
    if cfg.capacity != t.capacity:
        raise ModelError(
            f"config capacity {cfg.capacity} does not match topology capacity {t.capacity}"
        )
    if not cfg.protection and m.protected_demands:
        ids = [d.id for d in m.protected_demands]
        raise ModelError(
            f"design {cfg.variant} has no protection, but demands {ids} request it"
        )
    if cfg.variant in ("rwa_intwc", "rwa_intwc_p"):
        if not cfg.weights.dominates_lexicographically(t.num_links, cfg.capacity):
            raise ModelError(
                "weights do not give the wavelength count strict priority: "
                f"need alpha1 > {t.num_links * cfg.capacity} * alpha2"
            )


def build_model(t: NetworkTopology, m: TrafficMatrix, cfg: DesignConfig) -> IlpModel:
    """Assemble the full formulation for one instance."""
    check_design_inputs(t, m, cfg)
    E = t.num_links
    C = cfg.capacity
    channels = range(C)
    protected = [d for d in m.demands if d.protected]

    variables: list[VariableRef] = []
    x_at: dict[tuple[int, int, int], int] = {}
    y_at: dict[tuple[int, int, int], int] = {}
    theta_at: dict[tuple[int, int], int] = {}
    gamma_at: dict[tuple[int, int], int] = {}
    delta_at: dict[int, int] = {}

    for d in m.demands:
        for e in range(E):
            for c in channels:
                x_at[d.id, e, c] = len(variables)
                variables.append(VariableRef("x", demand=d.id, link=e, channel=c))
    for d in protected:
        for e in range(E):
            for c in channels:
                y_at[d.id, e, c] = len(variables)
                variables.append(VariableRef("y", demand=d.id, link=e, channel=c))
    for d in m.demands:
        for c in channels:
            theta_at[d.id, c] = len(variables)
            variables.append(VariableRef("theta", demand=d.id, channel=c))
    for e in range(E):
        for c in channels:
            gamma_at[e, c] = len(variables)
            variables.append(VariableRef("gamma", link=e, channel=c))
    for c in channels:
        delta_at[c] = len(variables)
        variables.append(VariableRef("delta", channel=c))

    constraints: list[Constraint] = []

    for d in m.demands:
        coeffs = tuple((theta_at[d.id, c], 1) for c in channels)
        constraints.append(Constraint(f"provision_d{d.id}", coeffs, "=", 1))

    def flow_rows(var_at, kind, demand):
        for v in t.nodes:
            out_ids = t.out_link_ids(v)
            in_ids = t.in_link_ids(v)
            for c in channels:
                coeffs = [(var_at[demand.id, e, c], 1) for e in out_ids]
                coeffs += [(var_at[demand.id, e, c], -1) for e in in_ids]
                if v == demand.src:
                    coeffs.append((theta_at[demand.id, c], -1))
                elif v == demand.dst:
                    coeffs.append((theta_at[demand.id, c], 1))
                constraints.append(
                    Constraint(f"flow_{kind}_d{demand.id}_v{v}_c{c}", tuple(coeffs), "=", 0)
                )

    for d in m.demands:
        flow_rows(x_at, "w", d)
    for d in protected:
        flow_rows(y_at, "p", d)

    for e in range(E):
        for c in channels:
            coeffs = [(x_at[d.id, e, c], 1) for d in m.demands]
            coeffs += [(y_at[d.id, e, c], 1) for d in protected]
            coeffs.append((gamma_at[e, c], -1))
            constraints.append(Constraint(f"unique_e{e}_c{c}", tuple(coeffs), "=", 0))

    for c in channels:
        coeffs = [(gamma_at[e, c], 1) for e in range(E)]
        coeffs.append((delta_at[c], -E))
        constraints.append(Constraint(f"usage_c{c}", tuple(coeffs), "<=", 0))

    objective = tuple(
        [(delta_at[c], cfg.weights.alpha1) for c in channels]
        + [(gamma_at[e, c], cfg.weights.alpha2) for c in channels for e in range(E)]
    )

    metadata = {
        "topology": t.name,
        "num_nodes": t.num_nodes,
        "num_links": E,
        "capacity": C,
        "num_demands": len(m),
        "variant": cfg.variant,
    }
    return IlpModel(tuple(variables), tuple(constraints), objective, metadata)


def evaluate_objective(mdl: IlpModel, assignment) -> Fraction:
    """Exact objective value of a full binary assignment (name -> 0/1)."""
    for var in mdl.variables:
        if var.name not in assignment:
            raise ModelError(f"assignment is missing variable {var.name}")
        value = assignment[var.name]
        if value not in (0, 1):
            raise ModelError(f"variable {var.name} has non-binary value {value!r}")
    total = Fraction(0)
    for idx, coeff in mdl.objective:
        total += coeff * assignment[mdl.variables[idx].name]
    return total


def export_model(mdl: IlpModel, format: str) -> bytes:
    """Render the model as LP or MPS text.

    Objective coefficients are scaled by the least common denominator so that
    exported files carry exact integers; the scale factor is recorded in a
    comment line (``objective-scale: <k>`` means file objective = k * true
    objective).
    """
    if format == "lp":
        return _export_lp(mdl).encode("utf-8")
    if format == "mps":
        return _export_mps(mdl).encode("utf-8")
    raise ModelError(f"unsupported export format {format!r}; expected 'lp' or 'mps'")


def _objective_scale(mdl: IlpModel) -> tuple[int, list[tuple[int, int]]]:
    scale = lcm(*(coeff.denominator for _, coeff in mdl.objective)) if mdl.objective else 1
    scaled = [(idx, int(coeff * scale)) for idx, coeff in mdl.objective]
    return scale, scaled


def _wrap_terms(terms: list[str], indent: str = "    ", per_line: int = 8) -> list[str]:
    return [indent + " ".join(terms[i : i + per_line]) for i in range(0, len(terms), per_line)]


def _export_lp(mdl: IlpModel) -> str:
    scale, scaled_obj = _objective_scale(mdl)
    meta = " ".join(f"{k}={v}" for k, v in sorted(mdl.metadata.items()))
    out = [f"\\ rwakit model {meta}", f"\\ objective-scale: {scale}", "Minimize", " obj:"]
    terms = []
    for pos, (idx, coeff) in enumerate(scaled_obj):
        name = mdl.variables[idx].name
        if pos == 0:
            terms.append(f"{coeff} {name}" if coeff >= 0 else f"- {-coeff} {name}")
        else:
            sign = "+" if coeff >= 0 else "-"
            terms.append(f"{sign} {abs(coeff)} {name}")
    out.extend(_wrap_terms(terms))
    out.append("Subject To")
    for con in mdl.constraints:
        terms = []
        for pos, (idx, coeff) in enumerate(con.coeffs):
            name = mdl.variables[idx].name
            if pos == 0:
                terms.append(f"{coeff} {name}" if coeff >= 0 else f"- {-coeff} {name}")
            else:
                sign = "+" if coeff >= 0 else "-"
                terms.append(f"{sign} {abs(coeff)} {name}")
        terms.append({"=": "=", "<=": "<=", ">=": ">="}[con.sense] + f" {con.rhs}")
        out.append(f" {con.name}:")
        out.extend(_wrap_terms(terms))
    out.append("Binary")
    out.extend(_wrap_terms([v.name for v in mdl.variables]))
    out.append("End")
    return "\n".join(out) + "\n"


def _export_mps(mdl: IlpModel) -> str:
    scale, scaled_obj = _objective_scale(mdl)
    sense_tag = {"=": "E", "<=": "L", ">=": "G"}
    out = ["NAME          RWAKIT", f"* objective-scale: {scale}"]
    for k, v in sorted(mdl.metadata.items()):
        out.append(f"* {k}={v}")
    out.append("ROWS")
    out.append(" N  COST")
    for con in mdl.constraints:
        out.append(f" {sense_tag[con.sense]}  {con.name}")

    entries: list[list[tuple[str, int]]] = [[] for _ in mdl.variables]
    for idx, coeff in scaled_obj:
        if coeff:
            entries[idx].append(("COST", coeff))
    for con in mdl.constraints:
        for idx, coeff in con.coeffs:
            entries[idx].append((con.name, coeff))

    out.append("COLUMNS")
    out.append("    MARKER                 'MARKER'                 'INTORG'")
    for var, rows in zip(mdl.variables, entries):
        for row, coeff in rows:
            out.append(f"    {var.name}  {row}  {coeff}")
    out.append("    MARKER                 'MARKER'                 'INTEND'")
    out.append("RHS")
    for con in mdl.constraints:
        if con.rhs != 0:
            out.append(f"    RHS  {con.name}  {con.rhs}")
    out.append("BOUNDS")
    for var in mdl.variables:
        out.append(f" BV BND  {var.name}")
    out.append("ENDATA")
    return "\n".join(out) + "\n"
