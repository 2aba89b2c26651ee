"""Demand sets and reproducible random traffic generation.

Every demand requests one wavelength of capacity. A traffic matrix is
generated at one of three load levels: ``high`` puts a demand on every
ordered node pair, ``low`` and ``medium`` sample 30% / 70% of the ordered
pairs without replacement.

Sampling is defined precisely so that any implementation of this format can
reproduce an instance from its seed: shuffle the lexicographically sorted
list of ordered pairs with a Fisher-Yates pass driven by SplitMix64 (seeded
with the 64-bit seed, swap index ``j = next() mod (i + 1)`` for ``i`` from
``n - 1`` down to 1), take the first ``round(share * n)`` pairs (ties round
half up), then sort the selection lexicographically to assign demand ids.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass

from .errors import ParseError, ValidationError
from .topology import NetworkTopology

LOAD_SHARE = {"low": (3, 10), "medium": (7, 10), "high": (1, 1)}
LOAD_LABELS = ("low", "medium", "high", "custom")

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class Demand:
    """One unit-capacity traffic request; ``protected`` asks for a dedicated
    link-disjoint backup path."""

    id: int
    src: int
    dst: int
    protected: bool = False

    def __post_init__(self):
        if self.src == self.dst:
            raise ValidationError(f"demand {self.id} has equal endpoints ({self.src})")


@dataclass(frozen=True)
class TrafficMatrix:
    demands: tuple[Demand, ...]
    seed: int = 0
    load_label: str = "custom"

    def __post_init__(self):
        if self.load_label not in LOAD_LABELS:
            raise ValidationError(f"load label must be one of {LOAD_LABELS}")
        seen = set()
        for i, d in enumerate(self.demands):
            if d.id != i:
                raise ValidationError(f"demand ids must be dense, got {d.id} at position {i}")
            if (d.src, d.dst) in seen:
                raise ValidationError(f"duplicate demand for node pair ({d.src}, {d.dst})")
            seen.add((d.src, d.dst))

    def __len__(self) -> int:
        return len(self.demands)

    @property
    def protected_demands(self) -> tuple[Demand, ...]:
        return tuple(d for d in self.demands if d.protected)

    def validate_against(self, t: NetworkTopology) -> None:
        for d in self.demands:
            for endpoint in (d.src, d.dst):
                if not 0 <= endpoint < t.num_nodes:
                    raise ValidationError(
                        f"demand {d.id} references node {endpoint} outside [0, {t.num_nodes})"
                    )


class SplitMix64:
    """Tiny portable PRNG; fixed so traffic instances survive reimplementation."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.next() % (i + 1)
            items[i], items[j] = items[j], items[i]


def generate_traffic(
    t: NetworkTopology, load: str, protected: bool, seed: int
) -> TrafficMatrix:
    """Seeded random traffic at one of the three load levels.

    A pure function of ``(t.num_nodes, load, protected, seed)``; the same
    arguments always yield the same demand list.
    """
    if load not in LOAD_SHARE:
        raise ValidationError(f"load must be one of {tuple(LOAD_SHARE)}")
    pairs = [
        (u, v) for u in range(t.num_nodes) for v in range(t.num_nodes) if u != v
    ]
    num, den = LOAD_SHARE[load]
    count = (2 * num * len(pairs) + den) // (2 * den)  # round half up
    if load != "high":
        rng = SplitMix64(seed)
        rng.shuffle(pairs)
        pairs = sorted(pairs[:count])
    demands = tuple(
        Demand(i, src, dst, protected) for i, (src, dst) in enumerate(pairs)
    )
    return TrafficMatrix(demands, seed=seed & _MASK64, load_label=load)


def parse_traffic(source, topology: NetworkTopology | None = None) -> TrafficMatrix:
    """Parse the traffic text format; validates endpoints when a topology is given.

    Header: ``traffic seed=<s> load=<label>``; one ``demand <src> <dst> <0|1>``
    line per demand (the last field is the protection flag).
    """
    text = _read_text(source)
    seed = None
    load = None
    demands: list[Demand] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if fields[0] == "traffic":
            if seed is not None:
                raise ParseError("duplicate traffic header", lineno)
            if len(fields) != 3 or not fields[1].startswith("seed=") or not fields[2].startswith("load="):
                raise ParseError("expected 'traffic seed=<s> load=<label>'", lineno)
            try:
                seed = int(fields[1][5:])
            except ValueError:
                raise ParseError(f"seed must be an integer: {fields[1]!r}", lineno) from None
            load = fields[2][5:]
            if load not in LOAD_LABELS:
                raise ParseError(f"load must be one of {LOAD_LABELS}", lineno)
        elif fields[0] == "demand":
            if seed is None:
                raise ParseError("demand line before traffic header", lineno)
            if len(fields) != 4:
                raise ParseError("expected 'demand <src> <dst> <0|1>'", lineno)
            try:
                src, dst = int(fields[1]), int(fields[2])
            except ValueError:
                raise ParseError(f"demand endpoints must be integers: {line!r}", lineno) from None
            if fields[3] not in ("0", "1"):
                raise ParseError(f"protection flag must be 0 or 1, got {fields[3]!r}", lineno)
            demands.append(Demand(len(demands), src, dst, fields[3] == "1"))
        else:
            raise ParseError(f"unknown directive {fields[0]!r}", lineno)
    if seed is None:
        raise ParseError("missing traffic header")
    matrix = TrafficMatrix(tuple(demands), seed=seed, load_label=load)
    if topology is not None:
        matrix.validate_against(topology)
    return matrix


def format_traffic(m: TrafficMatrix) -> str:
    lines = [f"traffic seed={m.seed} load={m.load_label}"]
    for d in m.demands:
        lines.append(f"demand {d.src} {d.dst} {1 if d.protected else 0}")
    return "\n".join(lines) + "\n"


def load_traffic(source, topology: NetworkTopology | None = None) -> TrafficMatrix:
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            return parse_traffic(fh.read(), topology)
    return parse_traffic(source, topology)


def save_traffic(m: TrafficMatrix, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_traffic(m))


def _read_text(source) -> str:
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, str):
        return source
    if isinstance(source, io.IOBase) or hasattr(source, "read"):
        data = source.read()
        return data.decode("utf-8") if isinstance(data, bytes) else data
    raise TypeError(f"cannot read traffic from {type(source).__name__}")
