"""Directed fiber-network topologies and their on-disk text format.

A topology is a directed multigraph: nodes are dense integer ids, links are
directed and carry their own dense ids, and every link has the same number of
wavelength channels (the topology-level ``capacity``). The text format is
line-oriented; each ``link`` line describes one fiber pair and expands to two
directed links, forward first.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

from .errors import ParseError, ValidationError

#: Bundled evaluation topologies, addressable by name.
BUNDLED_NAMES = ("cost239", "nsfnet", "fivenode")


@dataclass(frozen=True)
class FiberLink:
    """One directed fiber link; ``src``/``dst`` are node ids."""

    id: int
    src: int
    dst: int


@dataclass(frozen=True)
class NetworkTopology:
    name: str
    num_nodes: int
    links: tuple[FiberLink, ...]
    capacity: int
    _out: tuple[tuple[int, ...], ...] = field(repr=False, default=())
    _in: tuple[tuple[int, ...], ...] = field(repr=False, default=())

    def __post_init__(self):
        if self.num_nodes < 1:
            raise ValidationError("topology must have at least one node")
        if self.capacity < 1:
            raise ValidationError("capacity must be a positive integer")
        for i, link in enumerate(self.links):
            if link.id != i:
                raise ValidationError(f"link ids must be dense, got {link.id} at position {i}")
            if link.src == link.dst:
                raise ValidationError(f"link {link.id} is a self-loop at node {link.src}")
            for endpoint in (link.src, link.dst):
                if not 0 <= endpoint < self.num_nodes:
                    raise ValidationError(
                        f"link {link.id} references node {endpoint} outside [0, {self.num_nodes})"
                    )
        if not self._is_connected():
            raise ValidationError("topology is not connected (ignoring link direction)")
        out = [[] for _ in range(self.num_nodes)]
        inc = [[] for _ in range(self.num_nodes)]
        for link in self.links:
            out[link.src].append(link.id)
            inc[link.dst].append(link.id)
        object.__setattr__(self, "_out", tuple(tuple(ids) for ids in out))
        object.__setattr__(self, "_in", tuple(tuple(ids) for ids in inc))

    def _is_connected(self) -> bool:
        if self.num_nodes == 1:
            return True
        if not self.links:
            return False
        neigh = [set() for _ in range(self.num_nodes)]
        for link in self.links:
            neigh[link.src].add(link.dst)
            neigh[link.dst].add(link.src)
        seen = {0}
        stack = [0]
        while stack:
            v = stack.pop()
            for w in neigh[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.num_nodes

    @property
    def nodes(self) -> range:
        return range(self.num_nodes)

    @property
    def num_links(self) -> int:
        return len(self.links)

    def adjacency(self, node: int) -> tuple[tuple[FiberLink, ...], tuple[FiberLink, ...]]:
        """Partition the links at ``node`` into (outgoing, incoming)."""
        if not 0 <= node < self.num_nodes:
            raise ValidationError(f"unknown node {node} (topology has {self.num_nodes} nodes)")
        outgoing = tuple(self.links[i] for i in self._out[node])
        incoming = tuple(self.links[i] for i in self._in[node])
        return outgoing, incoming

    def out_link_ids(self, node: int) -> tuple[int, ...]:
        return self._out[node]

    def in_link_ids(self, node: int) -> tuple[int, ...]:
        return self._in[node]

    def with_capacity(self, capacity: int) -> "NetworkTopology":
        """Copy of this topology with a different per-link channel count."""
        if capacity == self.capacity:
            return self
        return NetworkTopology(self.name, self.num_nodes, self.links, capacity)


def undirected_support(t: NetworkTopology) -> list[tuple[int, int, int]]:
    """Collapse opposite-direction links into fibers.

    Returns (u, v, multiplicity) triples with u < v, where the multiplicity of
    a fiber is the larger of the two directed-link counts between its
    endpoints (equal for every topology produced by the file format).
    """
    forward: dict[tuple[int, int], int] = {}
    for link in t.links:
        key = (min(link.src, link.dst), max(link.src, link.dst), link.src < link.dst)
        forward[key] = forward.get(key, 0) + 1
    fibers: dict[tuple[int, int], int] = {}
    for (u, v, _), count in forward.items():
        fibers[(u, v)] = max(fibers.get((u, v), 0), count)
    return [(u, v, m) for (u, v), m in sorted(fibers.items())]


def node_degree_stats(t: NetworkTopology) -> tuple[int, int, Fraction]:
    """(min, max, mean) node degree on the undirected support graph."""
    degree = [0] * t.num_nodes
    total = 0
    for u, v, mult in undirected_support(t):
        degree[u] += mult
        degree[v] += mult
        total += mult
    return min(degree), max(degree), Fraction(2 * total, t.num_nodes)


def parse_topology(source) -> NetworkTopology:
    """Parse the topology text format from bytes, a string, or a file object.

    Header: ``topology <name> nodes=<n> capacity=<c>``. Each ``link <src> <dst>``
    line adds a fiber pair as two directed links, ``src -> dst`` first, ids in
    file order. ``#`` starts a comment.
    """
    text = _read_text(source)
    name = None
    num_nodes = None
    capacity = None
    pairs: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if fields[0] == "topology":
            if name is not None:
                raise ParseError("duplicate topology header", lineno)
            if len(fields) != 4:
                raise ParseError("expected 'topology <name> nodes=<n> capacity=<c>'", lineno)
            name = fields[1]
            num_nodes = _parse_kv(fields[2], "nodes", lineno)
            capacity = _parse_kv(fields[3], "capacity", lineno)
        elif fields[0] == "link":
            if name is None:
                raise ParseError("link line before topology header", lineno)
            if len(fields) != 3:
                raise ParseError("expected 'link <src> <dst>'", lineno)
            try:
                src, dst = int(fields[1]), int(fields[2])
            except ValueError:
                raise ParseError(f"link endpoints must be integers: {line!r}", lineno) from None
            pairs.append((src, dst))
        else:
            raise ParseError(f"unknown directive {fields[0]!r}", lineno)
    if name is None:
        raise ParseError("missing topology header")
    links = []
    for src, dst in pairs:
        links.append(FiberLink(len(links), src, dst))
        links.append(FiberLink(len(links), dst, src))
    return NetworkTopology(name, num_nodes, tuple(links), capacity)


def format_topology(t: NetworkTopology) -> str:
    """Serialize to the text format; inverse of :func:`parse_topology`.

    Only pair-expanded topologies round-trip exactly, i.e. ``links`` must be
    the forward/backward expansion the parser produces.
    """
    lines = [f"topology {t.name} nodes={t.num_nodes} capacity={t.capacity}"]
    if len(t.links) % 2 != 0:
        raise ValidationError("topology does not consist of fiber pairs")
    for i in range(0, len(t.links), 2):
        fwd, back = t.links[i], t.links[i + 1]
        if (fwd.src, fwd.dst) != (back.dst, back.src):
            raise ValidationError(f"links {fwd.id}/{back.id} do not form an opposite-direction pair")
        lines.append(f"link {fwd.src} {fwd.dst}")
    return "\n".join(lines) + "\n"


def load_topology(source) -> NetworkTopology:
    """Load from a path, bundled name (``cost239``/``nsfnet``/``fivenode``),
    bytes, or an open file."""
    if isinstance(source, str) and source in BUNDLED_NAMES:
        return bundled_topology(source)
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            return parse_topology(fh.read())
    return parse_topology(source)


def save_topology(t: NetworkTopology, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_topology(t))


def bundled_topology(name: str) -> NetworkTopology:
    """One of the shipped evaluation topologies, by name."""
    if name not in BUNDLED_NAMES:
        raise ValidationError(f"unknown bundled topology {name!r}; choose from {BUNDLED_NAMES}")
    data = resources.files("rwakit.data").joinpath(f"{name}.topo").read_bytes()
    return parse_topology(data)


def _read_text(source) -> str:
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, str):
        return source
    if isinstance(source, io.IOBase) or hasattr(source, "read"):
        data = source.read()
        return data.decode("utf-8") if isinstance(data, bytes) else data
    raise TypeError(f"cannot read topology from {type(source).__name__}")


def _parse_kv(token: str, key: str, lineno: int) -> int:
    prefix = key + "="
    if not token.startswith(prefix):
        raise ParseError(f"expected '{prefix}<int>', got {token!r}", lineno)
    try:
        value = int(token[len(prefix):])
    except ValueError:
        raise ParseError(f"expected '{prefix}<int>', got {token!r}", lineno) from None
    return value
