"""Brute-force reference solver for micro instances.

Deliberately independent of the branch-and-bound engine: paths come from
networkx's simple-path enumeration, channel conflicts are tracked as plain
(link, channel) sets, there is no bounding, no symmetry breaking and no
warm start. Every feasible assignment of (path, channel) per demand (pairs
of disjoint paths for protected demands) is visited, so the returned
optimum is trustworthy by construction - at micro scale only.
"""

from __future__ import annotations

from fractions import Fraction

import networkx as nx

from .errors import InstanceTooLargeError
from .model import DesignConfig, WeightPair, check_design_inputs
from .solver import (
    PROTECTION,
    STATUS_INFEASIBLE,
    STATUS_OPTIMAL,
    WORKING,
    Lightpath,
    RwaSolution,
)
from .topology import NetworkTopology
from .traffic import TrafficMatrix

MAX_NODES = 5
MAX_DEMANDS = 4
MAX_CHANNELS = 3


def solve_oracle(t: NetworkTopology, m: TrafficMatrix, cfg: DesignConfig) -> RwaSolution:
    """Exhaustive optimum; rejects anything beyond the micro-instance guard."""
    check_design_inputs(t, m, cfg)
    if t.num_nodes > MAX_NODES or len(m) > MAX_DEMANDS or cfg.capacity > MAX_CHANNELS:
        raise InstanceTooLargeError(
            f"oracle accepts at most {MAX_NODES} nodes, {MAX_DEMANDS} demands, "
            f"{MAX_CHANNELS} channels; got {t.num_nodes}/{len(m)}/{cfg.capacity}"
        )
    return oracle_weighted(t, m, cfg.weights)


def oracle_weighted(t: NetworkTopology, m: TrafficMatrix, weights: WeightPair) -> RwaSolution:
    graph = nx.MultiDiGraph()
    graph.add_nodes_from(t.nodes)
    for link in t.links:
        graph.add_edge(link.src, link.dst, key=link.id)

    def simple_paths(src: int, dst: int) -> list[tuple[int, ...]]:
        found = [
            tuple(key for _, _, key in edge_path)
            for edge_path in nx.all_simple_edge_paths(graph, src, dst)
        ]
        return sorted(found, key=lambda links: (len(links), links))

    # per demand: every admissible route set (one path, or two disjoint ones)
    route_sets: list[list[tuple[tuple[int, ...], ...]]] = []
    for d in m.demands:
        paths = simple_paths(d.src, d.dst)
        if d.protected:
            options = [
                (p, q)
                for p in paths
                for q in paths
                if not set(p) & set(q)
            ]
        else:
            options = [(p,) for p in paths]
        route_sets.append(options)

    channels = range(t.capacity)
    best: dict | None = None
    chosen: list[tuple[tuple[tuple[int, ...], ...], int]] = []

    def objective(assignment) -> tuple[Fraction, int, int]:
        used_channels = set()
        total_links = 0
        for paths, c in assignment:
            used_channels.add(c)
            total_links += sum(len(p) for p in paths)
        value = weights.alpha1 * len(used_channels) + weights.alpha2 * total_links
        return value, len(used_channels), total_links

    def explore(level: int, occupied: set):
        nonlocal best
        if level == len(m.demands):
            value, wc, wlu = objective(chosen)
            if best is None or value < best["value"]:
                best = {"value": value, "wc": wc, "wlu": wlu, "assignment": list(chosen)}
            return
        for paths in route_sets[level]:
            for c in channels:
                added = [(e, c) for p in paths for e in p]
                if any(cell in occupied for cell in added):
                    continue
                occupied.update(added)
                chosen.append((paths, c))
                explore(level + 1, occupied)
                chosen.pop()
                occupied.difference_update(added)

    explore(0, set())
    if best is None:
        return RwaSolution((), 0, 0, None, STATUS_INFEASIBLE)
    lightpaths = []
    for d, (paths, c) in zip(m.demands, best["assignment"]):
        lightpaths.append(Lightpath(d.id, WORKING, paths[0], c))
        if len(paths) == 2:
            lightpaths.append(Lightpath(d.id, PROTECTION, paths[1], c))
    lightpaths.sort(key=lambda lp: (lp.demand, lp.role != WORKING))
    return RwaSolution(
        tuple(lightpaths), best["wc"], best["wlu"], best["value"], STATUS_OPTIMAL
    )
