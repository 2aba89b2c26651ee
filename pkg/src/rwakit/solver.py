"""Exact solver for routing and wavelength assignment.

``solve_exact`` runs depth-first branch-and-bound over per-demand
(path, channel) assignments. At every node the search branches on the
unassigned demand with the fewest conflict-free (shortest-path, channel)
options (fail-first; a demand with none and no slack for a detour prunes the
node outright). Paths are enumerated lazily in increasing length, and
channels are tried in ascending index with a new channel allowed only above
the currently used prefix (wavelengths are interchangeable, so this loses no
optimal value). The lower bound at an open node combines the channels
already open, a capacity argument (total wavelength-links still needed
divided by links per channel), a node-degree argument, and the sum of
shortest-path costs of unassigned demands. Costs are compared as exact
scaled integers; no floats touch the search.

``solve_heuristic`` is the classical first-fit baseline; the exact search
warms its incumbent with first-fit followed by deterministic reroute
improvements.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction

from .errors import ModelError, ValidationError
from .model import DesignConfig, WeightPair, check_design_inputs
from .paths import UNREACHABLE, PathIndex, path_mask
from .topology import NetworkTopology
from .traffic import Demand, TrafficMatrix

WORKING = "working"
PROTECTION = "protection"

STATUS_OPTIMAL = "optimal"
STATUS_FEASIBLE = "feasible"
STATUS_INFEASIBLE = "infeasible"
STATUS_TIMEOUT = "timeout"


@dataclass(frozen=True)
class Lightpath:
    """A routed signal: one simple directed path on one wavelength channel."""

    demand: int
    role: str
    links: tuple[int, ...]
    channel: int


@dataclass(frozen=True)
class RwaSolution:
    lightpaths: tuple[Lightpath, ...]
    wavelength_count: int
    wavelength_link_usage: int
    objective_value: Fraction | None
    status: str


@dataclass(frozen=True)
class SolverOptions:
    time_limit: float = 300.0
    thread_count: int = 1
    node_limit: int | None = None

    def __post_init__(self):
        if self.time_limit <= 0:
            raise ValidationError("time_limit must be positive")
        if self.thread_count < 1:
            raise ValidationError("thread_count must be a positive integer")
        if self.node_limit is not None and self.node_limit < 1:
            raise ValidationError("node_limit must be positive when given")


def solve_exact(
    t: NetworkTopology, m: TrafficMatrix, cfg: DesignConfig, opts: SolverOptions | None = None
) -> RwaSolution:
    """Optimal solution for one design on one instance (see module docstring)."""
    check_design_inputs(t, m, cfg)
    return solve_weighted(t, m, cfg.weights, opts)


def solve_weighted(
    t: NetworkTopology, m: TrafficMatrix, weights: WeightPair, opts: SolverOptions | None = None
) -> RwaSolution:
    """Exact search under arbitrary non-negative weights (no variant checks)."""
    m.validate_against(t)
    return _Search(t, m.demands, weights, opts or SolverOptions()).run()


def solve_heuristic(t: NetworkTopology, m: TrafficMatrix, cfg: DesignConfig) -> RwaSolution:
    """First-fit baseline: never claims optimality, 'infeasible' means not found."""
    check_design_inputs(t, m, cfg)
    index = PathIndex(t)
    order, minlens = _branching_order(index, m.demands)
    if any(v == UNREACHABLE for v in minlens):
        return _empty_solution(STATUS_INFEASIBLE)
    choices = _first_fit(index, order, t.capacity)
    if choices is None:
        return _empty_solution(STATUS_INFEASIBLE)
    a1, a2, scale = cfg.weights.scaled_integers()
    wc, wlu = _choice_metrics(choices)
    return _assemble(order, choices, wc, wlu, Fraction(a1 * wc + a2 * wlu, scale), STATUS_FEASIBLE)


def _empty_solution(status: str) -> RwaSolution:
    return RwaSolution((), 0, 0, None, status)


def _branching_order(index: PathIndex, demands) -> tuple[list[Demand], list[int]]:
    """Demands by decreasing routing cost (disjoint-pair cost when protected),
    ties by id; paired with each demand's minimum wavelength-link need."""
    costed = []
    for d in demands:
        if d.protected:
            cost = index.min_disjoint_pair_len(d.src, d.dst)
        else:
            cost = index.shortest_len(d.src, d.dst)
        costed.append((cost, d))
    costed.sort(key=lambda item: (-item[0], item[1].id))
    return [d for _, d in costed], [c for c, _ in costed]


def _first_fit(index: PathIndex, order: list[Demand], capacity: int):
    """Shortest path on the lowest-index channel that fits; protected demands
    take a second shortest path avoiding the first (two-step, not jointly
    optimal). Returns per-demand ((paths...), channel) or None."""
    used = [0] * capacity
    choices = []
    for d in order:
        placed = False
        for c in range(capacity):
            free = ~used[c]
            hit = index.bfs_shortest(d.src, d.dst, free)
            if hit is None:
                continue
            pmask, plinks = hit
            if not d.protected:
                used[c] |= pmask
                choices.append(((plinks,), c))
                placed = True
                break
            backup = index.bfs_shortest(d.src, d.dst, free & ~pmask)
            if backup is None:
                continue
            qmask, qlinks = backup
            used[c] |= pmask | qmask
            choices.append(((plinks, qlinks), c))
            placed = True
            break
        if not placed:
            return None
    return choices


def _choice_metrics(choices) -> tuple[int, int]:
    channels = set()
    total = 0
    for paths, c in choices:
        channels.add(c)
        total += sum(len(p) for p in paths)
    return len(channels), total


def _improve_choices(index: PathIndex, order, choices, capacity: int):
    """Deterministic local reroutes that shorten the warm start.

    Repeatedly moves one demand to a strictly shorter placement (shortest
    free path per channel, two-step pair when protected), never opening an
    empty channel. WLU strictly drops on each move, so this terminates; it
    only tightens the incumbent, exactness is untouched.
    """
    work = list(choices)
    used = [0] * capacity
    for paths, c in work:
        used[c] |= path_mask(e for p in paths for e in p)
    changed = True
    while changed:
        changed = False
        for i, d in enumerate(order):
            paths, c = work[i]
            own_mask = path_mask(e for p in paths for e in p)
            own_len = sum(len(p) for p in paths)
            used[c] &= ~own_mask
            best = (own_len, c, paths, own_mask)
            for cc in range(capacity):
                if used[cc] == 0 and cc != c:
                    continue  # never open an extra channel for a reroute
                placement = _best_in_channel(index, d, ~used[cc])
                if placement is not None and placement[0] < best[0]:
                    best = (placement[0], cc, placement[1], placement[2])
            _, cc, new_paths, new_mask = best
            used[cc] |= new_mask
            if (new_paths, cc) != (paths, c):
                work[i] = (new_paths, cc)
                changed = True
    return work


def _best_in_channel(index: PathIndex, d: Demand, free: int):
    """Cheapest placement of one demand inside a channel's free links:
    shortest path, or the jointly cheapest link-disjoint pair when
    protected. Returns (total length, paths, mask) or None."""
    if not d.protected:
        hit = index.bfs_shortest(d.src, d.dst, free)
        if hit is None:
            return None
        mask, links = hit
        return len(links), (links,), mask
    pair = index.disjoint_pair(d.src, d.dst, free)
    if pair is None:
        return None
    total, first, second = pair
    return total, (first, second), path_mask(first) | path_mask(second)


def _budgeted_construct(index: PathIndex, order, budget: int):
    """Best-fit construction restricted to ``budget`` channels: each demand
    takes its cheapest placement across the allowed channels (lowest channel
    on ties). Returns choices or None when some demand does not fit."""
    used = [0] * budget
    choices = []
    for d in order:
        best = None
        for c in range(budget):
            placement = _best_in_channel(index, d, ~used[c])
            if placement is not None and (best is None or placement[0] < best[0]):
                best = (placement[0], c, placement[1], placement[2])
        if best is None:
            return None
        _, c, paths, mask = best
        used[c] |= mask
        choices.append((paths, c))
    return choices


def _squeeze_channels(index: PathIndex, order, choices, capacity: int):
    """Try to empty the lightest-loaded channel by relocating its demands
    into the other occupied channels; repeat while a channel can be cleared.
    Directly lowers the wavelength count of the warm start."""
    work = list(choices)
    while True:
        used = [0] * capacity
        members: dict[int, list[int]] = {}
        for i, (paths, c) in enumerate(work):
            used[c] |= path_mask(e for p in paths for e in p)
            members.setdefault(c, []).append(i)
        if len(members) <= 1:
            return work
        target = min(members, key=lambda c: (len(members[c]), -c))
        trial_used = list(used)
        trial_used[target] = 0
        moves = []
        feasible = True
        for i in sorted(members[target]):
            d = order[i]
            placed = None
            for cc in sorted(members):
                if cc == target:
                    continue
                placement = _best_in_channel(index, d, ~trial_used[cc])
                if placement is not None and (placed is None or placement[0] < placed[0]):
                    placed = (placement[0], cc, placement[1], placement[2])
            if placed is None:
                feasible = False
                break
            _, cc, new_paths, new_mask = placed
            trial_used[cc] |= new_mask
            moves.append((i, new_paths, cc))
        if not feasible:
            return work
        for i, new_paths, cc in moves:
            work[i] = (new_paths, cc)


class _SearchLimit(Exception):
    pass


class _Search:
    def __init__(self, t: NetworkTopology, demands, weights: WeightPair, opts: SolverOptions):
        self.index = PathIndex(t)
        self.C = t.capacity
        self.E = t.num_links
        self.A1, self.A2, self.scale = weights.scaled_integers()
        self.opts = opts
        self.order, self.minlens = _branching_order(self.index, demands)
        self.n = len(self.order)
        self.max_path_len = t.num_nodes - 1
        self.sp_len = [self.index.shortest_len(d.src, d.dst) for d in self.order]
        self.sp_masks: list[list[int]] = []
        for d, sp in zip(self.order, self.sp_len):
            if sp == UNREACHABLE:
                self.sp_masks.append([])
            else:
                self.sp_masks.append(
                    [mask for mask, _ in self.index.iter_paths_of_length(d.src, d.dst, sp)]
                )
        self.static_channel_lb = self._node_degree_lb(t)
        # search state
        self.used = [0] * self.C
        self.links_total = 0
        self.m_open = 0
        self.assigned = [False] * self.n
        self.assigned_count = 0
        self.remaining_min = sum(max(v, 0) for v in self.minlens)
        self.choices: list = [None] * self.n
        self.best_cost = self.A1 * self.C + self.A2 * self.C * self.E + 1
        self.best = None
        self.best_wc = 0
        self.best_wlu = 0
        self.nodes = 0
        self.deadline = time.monotonic() + opts.time_limit

    def _node_degree_lb(self, t: NetworkTopology) -> int:
        """Channels forced by demand concentration at a node: every demand
        occupies one outgoing link at its source and one incoming link at its
        destination per path (two per endpoint when protected)."""
        need_out = [0] * t.num_nodes
        need_in = [0] * t.num_nodes
        for d in self.order:
            weight = 2 if d.protected else 1
            need_out[d.src] += weight
            need_in[d.dst] += weight
        lb = 0
        for v in t.nodes:
            out_deg = len(self.index.out[v])
            in_deg = len(self.index.inv[v])
            if out_deg and need_out[v]:
                lb = max(lb, -(-need_out[v] // out_deg))
            if in_deg and need_in[v]:
                lb = max(lb, -(-need_in[v] // in_deg))
        return lb

    def run(self) -> RwaSolution:
        if any(v == UNREACHABLE for v in self.minlens):
            return _empty_solution(STATUS_INFEASIBLE)
        for warm in self._warm_starts():
            wc, wlu = _choice_metrics(warm)
            cost = self.A1 * wc + self.A2 * wlu
            if cost < self.best_cost:
                self.best_cost = cost
                self.best = warm
                self.best_wc, self.best_wlu = wc, wlu
        complete = True
        try:
            self._extend()
        except _SearchLimit:
            complete = False
        return self._final_solution(complete)

    def _warm_starts(self):
        """Candidate incumbents: first-fit polished by reroutes, plus the
        tightest channel-budget construction that succeeds."""
        polished = []
        first = _first_fit(self.index, self.order, self.C)
        if first is not None:
            polished.append(self._polish(first))
        for budget in range(max(self.static_channel_lb, 1), self.C + 1):
            built = _budgeted_construct(self.index, self.order, budget)
            if built is not None:
                polished.append(self._polish(built))
                break
        return polished

    def _polish(self, choices):
        choices = _improve_choices(self.index, self.order, choices, self.C)
        choices = _squeeze_channels(self.index, self.order, choices, self.C)
        return _improve_choices(self.index, self.order, choices, self.C)

    def _final_solution(self, complete: bool) -> RwaSolution:
        if self.best is None:
            return _empty_solution(STATUS_INFEASIBLE if complete else STATUS_TIMEOUT)
        status = STATUS_OPTIMAL if complete else STATUS_FEASIBLE
        objective = Fraction(self.best_cost, self.scale)
        return _assemble(self.order, self.best, self.best_wc, self.best_wlu, objective, status)

    # -- bounding ---------------------------------------------------------

    def _bound_fails(self, links_after: int, channels_after: int) -> bool:
        """True when no completion with >= links_after total wavelength-links
        and >= channels_after open channels can beat the incumbent."""
        need = -(-links_after // self.E)
        if need < channels_after:
            need = channels_after
        if need < self.static_channel_lb:
            need = self.static_channel_lb
        if need > self.C:
            return True
        return self.A1 * need + self.A2 * links_after >= self.best_cost

    # -- depth-first search ----------------------------------------------

    def _tick(self):
        self.nodes += 1
        if self.nodes & 1023 == 0:
            self._check_limits()

    def _check_limits(self):
        if time.monotonic() > self.deadline:
            raise _SearchLimit
        if self.opts.node_limit is not None and self.nodes > self.opts.node_limit:
            raise _SearchLimit

    def _select(self) -> int:
        """Most constrained unassigned demand (fewest conflict-free
        shortest-path placements), or -1 when some demand is unplaceable
        within the incumbent bound."""
        links_floor = self.links_total + self.remaining_min
        new_ok = self.m_open < self.C and not self._bound_fails(links_floor, self.m_open + 1)
        detour_ok = not self._bound_fails(links_floor + 1, self.m_open)
        used = self.used
        m_open = self.m_open
        best_rank = -1
        best_count = 4
        for r in range(self.n):
            if self.assigned[r]:
                continue
            count = 0
            for mask in self.sp_masks[r]:
                if new_ok:
                    count += 1
                for c in range(m_open):
                    if not used[c] & mask:
                        count += 1
                        if count >= 3:
                            break
                if count >= 3:
                    break
            if count == 0:
                if not detour_ok:
                    return -1
                count = 1
            if count < best_count:
                best_count = count
                best_rank = r
        return best_rank

    def _extend(self):
        self._tick()
        if self.assigned_count == self.n:
            cost = self.A1 * self.m_open + self.A2 * self.links_total
            if cost < self.best_cost:
                self.best_cost = cost
                self.best = list(self.choices)
                self.best_wc = self.m_open
                self.best_wlu = self.links_total
            return
        r = self._select()
        if r == -1:
            return
        d = self.order[r]
        self.assigned[r] = True
        self.assigned_count += 1
        self.remaining_min -= self.minlens[r]
        links_base = self.links_total + self.remaining_min
        if d.protected:
            self._extend_protected(r, d, links_base)
        else:
            self._extend_single(r, d, links_base)
        self.remaining_min += self.minlens[r]
        self.assigned_count -= 1
        self.assigned[r] = False

    def _extend_single(self, r: int, d: Demand, links_base: int):
        length = self.minlens[r]
        while length <= self.max_path_len:
            if self._bound_fails(links_base + length, self.m_open):
                return
            for mask, links in self.index.iter_paths_of_length(
                d.src, d.dst, length, abort=self._check_limits
            ):
                self._try_channels(r, mask, length, (links,), links_base)
                if self._bound_fails(links_base + length, self.m_open):
                    return  # incumbent improved mid-class
            length += 1

    def _extend_protected(self, r: int, d: Demand, links_base: int):
        sp = self.sp_len[r]
        pairmin = self.minlens[r]
        plen = sp
        while plen <= self.max_path_len:
            if self._bound_fails(links_base + max(pairmin, plen + sp), self.m_open):
                return
            for pmask, plinks in self.index.iter_paths_of_length(
                d.src, d.dst, plen, abort=self._check_limits
            ):
                qlen = plen
                while qlen <= self.max_path_len:
                    if self._bound_fails(links_base + plen + qlen, self.m_open):
                        break
                    stop = False
                    for qmask, qlinks in self.index.iter_paths_of_length(
                        d.src, d.dst, qlen, abort=self._check_limits
                    ):
                        if pmask & qmask:
                            continue
                        if qlen == plen and qlinks < plinks:
                            continue  # unordered pair: enumerate each once
                        self._try_channels(
                            r, pmask | qmask, plen + qlen, (plinks, qlinks), links_base
                        )
                        if self._bound_fails(links_base + plen + qlen, self.m_open):
                            stop = True
                            break
                    if stop:
                        break
                    qlen += 1
                if self._bound_fails(links_base + max(pairmin, plen + sp), self.m_open):
                    return
            plen += 1

    def _try_channels(self, r: int, mask: int, length: int, paths, links_base: int):
        used = self.used
        limit = self.m_open + 1
        if limit > self.C:
            limit = self.C
        for c in range(limit):
            if used[c] & mask:
                continue
            opened = c == self.m_open
            if opened and self._bound_fails(links_base + length, self.m_open + 1):
                return  # ascending channels: the new channel is the last option
            if opened:
                self.m_open += 1
            used[c] |= mask
            self.links_total += length
            self.choices[r] = (paths, c)
            self._extend()
            used[c] &= ~mask
            self.links_total -= length
            if opened:
                self.m_open -= 1


def _assemble(order, choices, wc, wlu, objective, status) -> RwaSolution:
    lightpaths = []
    for d, (paths, c) in zip(order, choices):
        lightpaths.append(Lightpath(d.id, WORKING, paths[0], c))
        if len(paths) == 2:
            lightpaths.append(Lightpath(d.id, PROTECTION, paths[1], c))
    lightpaths.sort(key=lambda lp: (lp.demand, lp.role != WORKING))
    return RwaSolution(tuple(lightpaths), wc, wlu, objective, status)


def solution_to_json(s: RwaSolution) -> dict:
    """JSON-ready dict; exact objective goes out as a 'p/q' string."""
    return {
        "status": s.status,
        "objective": None if s.objective_value is None else str(s.objective_value),
        "wavelength_count": s.wavelength_count,
        "wavelength_link_usage": s.wavelength_link_usage,
        "lightpaths": [
            {
                "demand": lp.demand,
                "role": lp.role,
                "channel": lp.channel,
                "links": list(lp.links),
            }
            for lp in s.lightpaths
        ],
    }


def solution_from_json(data: dict) -> RwaSolution:
    try:
        lightpaths = tuple(
            Lightpath(lp["demand"], lp["role"], tuple(lp["links"]), lp["channel"])
            for lp in data["lightpaths"]
        )
        objective = data["objective"]
        return RwaSolution(
            lightpaths,
            data["wavelength_count"],
            data["wavelength_link_usage"],
            None if objective is None else Fraction(objective),
            data["status"],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelError(f"malformed solution document: {exc}") from None
