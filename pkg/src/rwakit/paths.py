"""Path search primitives over a topology, tuned for the exact solver.

Paths are sequences of link ids; each also carries a bitmask over link ids so
channel-occupancy conflicts reduce to integer ANDs. Enumeration order is part
of the solver's determinism contract: for a fixed length, paths come out in
the lexicographic order of their link-id sequences.

Short path classes (up to a few links above the shortest length) are
materialized and cached because the search revisits them constantly; longer
classes are streamed, so a branch that only needs the first few candidates
never pays for the full class.
"""

from __future__ import annotations

from .topology import NetworkTopology

UNREACHABLE = -1

#: lengths up to shortest + this many extra links are cached per node pair
CACHE_EXTRA = 3
#: abort-callback cadence during deep enumeration walks
_WALK_CHECK = 4096


class PathIndex:
    """All path queries the search needs, with caching, for one topology."""

    def __init__(self, t: NetworkTopology):
        self.topology = t
        self.num_nodes = t.num_nodes
        self.max_path_len = t.num_nodes - 1
        # (link id, head node) per tail node, ascending link id
        self.out = [
            tuple((e, t.links[e].dst) for e in t.out_link_ids(v)) for v in t.nodes
        ]
        self.inv = [
            tuple((e, t.links[e].src) for e in t.in_link_ids(v)) for v in t.nodes
        ]
        self._dist_to: dict[int, list[int]] = {}
        self._cache: dict[tuple[int, int], list] = {}
        self._walk_steps = 0

    def dist_to(self, target: int) -> list[int]:
        """Hop distance from every node to ``target`` (UNREACHABLE if none)."""
        cached = self._dist_to.get(target)
        if cached is not None:
            return cached
        dist = [UNREACHABLE] * self.num_nodes
        dist[target] = 0
        frontier = [target]
        while frontier:
            nxt = []
            for v in frontier:
                for e, u in self.inv[v]:
                    if dist[u] == UNREACHABLE:
                        dist[u] = dist[v] + 1
                        nxt.append(u)
            frontier = nxt
        self._dist_to[target] = dist
        return dist

    def shortest_len(self, src: int, dst: int) -> int:
        return self.dist_to(dst)[src]

    def iter_paths_of_length(self, src: int, dst: int, length: int, abort=None):
        """Iterate (mask, links) over simple paths src->dst of exact length.

        ``abort`` is invoked periodically during uncached walks so callers
        can enforce time limits mid-enumeration.
        """
        sp = self.shortest_len(src, dst)
        if sp == UNREACHABLE or length < sp or length > self.max_path_len:
            return iter(())
        if length <= sp + CACHE_EXTRA:
            cache = self._cache.setdefault((src, dst), [])
            while len(cache) <= length:
                depth = len(cache)
                cache.append(list(self._walk(src, dst, depth, abort)))
            return iter(cache[length])
        return self._walk(src, dst, length, abort)

    def _walk(self, src: int, dst: int, length: int, abort=None):
        if length < 1 or length > self.max_path_len:
            return
        dist = self.dist_to(dst)
        if dist[src] == UNREACHABLE or dist[src] > length:
            return
        out = self.out
        visited = [False] * self.num_nodes
        visited[src] = True
        trail: list[int] = []

        def rec(v: int, remaining: int, mask: int):
            if abort is not None:
                self._walk_steps += 1
                if self._walk_steps % _WALK_CHECK == 0:
                    abort()
            for e, u in out[v]:
                if visited[u]:
                    continue
                if u == dst:
                    if remaining == 1:
                        yield mask | (1 << e), tuple(trail) + (e,)
                    continue
                if remaining == 1:
                    continue
                d = dist[u]
                if d == UNREACHABLE or d > remaining - 1:
                    continue
                visited[u] = True
                trail.append(e)
                yield from rec(u, remaining - 1, mask | (1 << e))
                trail.pop()
                visited[u] = False

        yield from rec(src, length, 0)

    def min_disjoint_pair_len(self, src: int, dst: int) -> int:
        """Minimum total length of two link-disjoint simple paths src->dst,
        or UNREACHABLE when no such pair exists."""
        pair = self.disjoint_pair(src, dst)
        return UNREACHABLE if pair is None else pair[0]

    def disjoint_pair(self, src: int, dst: int, allowed_mask: int = -1):
        """Cheapest pair of link-disjoint simple paths src->dst restricted to
        the links set in ``allowed_mask``.

        A min-cost two-unit flow with unit link capacities (successive
        shortest augmentations); at the optimum the flow support is free of
        directed cycles, so greedy lowest-link-id walks split it into two
        simple paths. Shared nodes are allowed, shared directed links are
        not. Returns (total length, first path, second path) with the paths
        ordered by (length, link sequence), or None.
        """
        links = self.topology.links
        used = [False] * len(links)
        total = 0
        for _ in range(2):
            cost, parent = self._bellman_ford(src, dst, used, allowed_mask)
            if cost is None:
                return None
            total += cost
            v = dst
            while v != src:
                e, forward = parent[v]
                used[e] = forward
                v = links[e].src if forward else links[e].dst
        flow_out: dict[int, list[int]] = {}
        for e, carrying in enumerate(used):
            if carrying:
                flow_out.setdefault(links[e].src, []).append(e)
        for ids in flow_out.values():
            ids.sort(reverse=True)  # pop() takes the lowest id first
        paths = []
        for _ in range(2):
            v = src
            seq = []
            while v != dst:
                e = flow_out[v].pop()
                seq.append(e)
                v = links[e].dst
            paths.append(tuple(seq))
        paths.sort(key=lambda p: (len(p), p))
        return total, paths[0], paths[1]

    def _bellman_ford(self, src, dst, used, allowed_mask=-1):
        # residual arcs: unused links forward at +1, used links backward at -1
        n = self.num_nodes
        INF = float("inf")
        dist = [INF] * n
        parent: list[tuple[int, bool] | None] = [None] * n
        dist[src] = 0
        for _ in range(n + 1):
            changed = False
            for e, link in enumerate(self.topology.links):
                if not (allowed_mask >> e) & 1:
                    continue
                if not used[e]:
                    if dist[link.src] + 1 < dist[link.dst]:
                        dist[link.dst] = dist[link.src] + 1
                        parent[link.dst] = (e, True)
                        changed = True
                else:
                    if dist[link.dst] - 1 < dist[link.src]:
                        dist[link.src] = dist[link.dst] - 1
                        parent[link.src] = (e, False)
                        changed = True
            if not changed:
                break
        if dist[dst] == INF:
            return None, parent
        return int(dist[dst]), parent

    def bfs_shortest(self, src: int, dst: int, allowed_mask: int) -> tuple[int, tuple[int, ...]] | None:
        """Deterministic shortest path using only links set in ``allowed_mask``.

        Ties are broken by first discovery while scanning links in ascending
        id order. Returns (mask, links) or None.
        """
        parent_link = [-1] * self.num_nodes
        parent_node = [-1] * self.num_nodes
        seen = [False] * self.num_nodes
        seen[src] = True
        frontier = [src]
        found = False
        while frontier and not found:
            nxt = []
            for v in frontier:
                for e, u in self.out[v]:
                    if not (allowed_mask >> e) & 1 or seen[u]:
                        continue
                    seen[u] = True
                    parent_link[u] = e
                    parent_node[u] = v
                    if u == dst:
                        found = True
                        break
                    nxt.append(u)
                if found:
                    break
            frontier = nxt
        if not found:
            return None
        links: list[int] = []
        v = dst
        while v != src:
            links.append(parent_link[v])
            v = parent_node[v]
        links.reverse()
        seq = tuple(links)
        return path_mask(seq), seq


def path_mask(links) -> int:
    m = 0
    for e in links:
        m |= 1 << e
    return m
