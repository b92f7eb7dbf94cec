"""Parametric generators for the five social mini-games: Open, Doorway,
Hallway, Intersection, Roundabout.

Each generator builds a wall map and a navigation graph, plus a sampler that
assigns per-episode start/goal routes. The four constrained kinds guarantee
a point common to every agent route (the conflict point has node id 0 by
construction); Open produces crossing perimeter-to-perimeter routes with no
such guarantee. Default dimensions let one default robot pass with margin
while two cannot pass abreast.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .geometry import NavGraph, Route, Scenario, Segment, Vec2, VectorMap


class MiniGameKind(Enum):
    OPEN = "open"
    DOORWAY = "doorway"
    HALLWAY = "hallway"
    INTERSECTION = "intersection"
    ROUNDABOUT = "roundabout"


@dataclass(frozen=True)
class MiniGameParams:
    kind: MiniGameKind
    scale: float = 12.0
    corridor_width: float = 1.0
    gap_width: float = 1.0
    arm_count: int = 4
    ring_radius: float = 2.0
    max_agents: int = 10
    bidirectional: bool = True

    def __post_init__(self):
        for name in ("scale", "corridor_width", "gap_width", "ring_radius"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")


def default_params(kind: MiniGameKind, bidirectional: bool = True) -> MiniGameParams:
    if kind is MiniGameKind.OPEN:
        return MiniGameParams(kind=kind, scale=12.0, max_agents=10)
    if kind is MiniGameKind.DOORWAY:
        return MiniGameParams(
            kind=kind, scale=12.0, gap_width=1.0,
            max_agents=10 if bidirectional else 5, bidirectional=bidirectional,
        )
    if kind is MiniGameKind.HALLWAY:
        return MiniGameParams(
            kind=kind, scale=20.0, corridor_width=1.0,
            max_agents=10 if bidirectional else 5, bidirectional=bidirectional,
        )
    if kind is MiniGameKind.INTERSECTION:
        # 1.1 m (not 1.2): must stay below two robot diameters.
        return MiniGameParams(kind=kind, scale=8.0, corridor_width=1.1, max_agents=12)
    return MiniGameParams(kind=kind, scale=6.0, ring_radius=2.0, max_agents=8)


def _seg(ax, ay, bx, by) -> Segment:
    return Segment(Vec2(float(ax), float(ay)), Vec2(float(bx), float(by)))


def _box(half_w: float, half_h: float, cx: float = 0.0, cy: float = 0.0) -> list[Segment]:
    x0, x1 = cx - half_w, cx + half_w
    y0, y1 = cy - half_h, cy + half_h
    return [
        _seg(x0, y0, x1, y0),
        _seg(x1, y0, x1, y1),
        _seg(x1, y1, x0, y1),
        _seg(x0, y1, x0, y0),
    ]


class MiniGameSampler:
    """Per-episode route assignment for one generated layout.

    Subclass responsibility: `_assign(k, rng)` returning k (start, goal,
    node_path) choices as Route objects with pairwise-distinct starts.
    """

    def __init__(self, kind: MiniGameKind, params: MiniGameParams, graph: NavGraph):
        self.kind = kind
        self.params = params
        self.graph = graph

    @property
    def max_agents(self) -> int:
        return self.params.max_agents

    def sample_routes(self, k: int, rng: np.random.Generator) -> list[Route]:
        if k < 1 or k > self.max_agents:
            raise ValueError(
                f"{self.kind.value} layout supports 1..{self.max_agents} agents, got {k}"
            )
        routes = self._assign(k, rng)
        starts = [r.node_ids[0] for r in routes]
        assert len(set(starts)) == k, "sampler produced duplicate start nodes"
        return routes

    def _assign(self, k: int, rng: np.random.Generator) -> list[Route]:
        raise NotImplementedError


def sample_routes(sampler: MiniGameSampler, k: int, rng: np.random.Generator) -> list[Route]:
    return sampler.sample_routes(k, rng)


# ---------------------------------------------------------------------------
# Open


class _OpenSampler(MiniGameSampler):
    M = 20  # perimeter nodes
    MIN_CROSS_GAP = 1.5  # m: path-length stagger required at route crossings
    TRIES = 60

    def _propose(self, k, rng):
        starts: list[int] = []
        goals: list[int] = []
        while len(starts) < k:
            s = int(rng.integers(0, self.M))
            if s in starts or s in goals:
                continue
            # Off-center chords (separation 6..8 of 20) cross at varied
            # angles instead of meeting head-on at the center.
            mag = int(rng.integers(2, 5))
            sign = 1 if int(rng.integers(0, 2)) else -1
            g = (s + self.M // 2 + sign * mag) % self.M
            if g in starts or g in goals or g == s:
                continue
            if any(s == g0 and g == s0 for s0, g0 in zip(starts, goals)):
                continue
            starts.append(s)
            goals.append(g)
        return starts, goals

    def _min_crossing_gap(self, starts, goals) -> float:
        from .geometry import Segment as Seg, segments_intersect

        pos = self.graph.position
        best = math.inf
        for i in range(len(starts)):
            for j in range(i + 1, len(starts)):
                hit = segments_intersect(
                    Seg(pos(starts[i]), pos(goals[i])),
                    Seg(pos(starts[j]), pos(goals[j])),
                )
                if hit is None:
                    continue
                best = min(best, abs(pos(starts[i]).dist(hit) - pos(starts[j]).dist(hit)))
        return best

    def _assign(self, k, rng):
        # Stagger arrivals at crossings so reactive avoidance can resolve
        # them by passage order; keep the best proposal if none fully does.
        best_routes, best_gap = None, -1.0
        for _ in range(self.TRIES):
            starts, goals = self._propose(k, rng)
            gap = self._min_crossing_gap(starts, goals)
            routes = [Route([s, g]) for s, g in zip(starts, goals)]
            if gap >= self.MIN_CROSS_GAP:
                return routes
            if gap > best_gap:
                best_gap, best_routes = gap, routes
        return best_routes


def _generate_open(params: MiniGameParams):
    half = params.scale / 2.0
    vmap = VectorMap(name="open", segments=_box(half, half))
    m = _OpenSampler.M
    radius = half - 1.0
    nodes = {
        i: Vec2(radius * math.cos(2 * math.pi * i / m), radius * math.sin(2 * math.pi * i / m))
        for i in range(m)
    }
    edges = []
    for i in range(m):
        for j in range(i + 1, m):
            sep = min((j - i) % m, (i - j) % m)
            if m // 2 - 4 <= sep <= m // 2:
                edges.append((i, j))
    graph = NavGraph(map_name="open", nodes=nodes, edges=edges)
    return vmap, graph, _OpenSampler(MiniGameKind.OPEN, params, graph)


# ---------------------------------------------------------------------------
# Doorway / Hallway (two rooms joined by a constriction)


class _TwoSidedSampler(MiniGameSampler):
    """Start on one side, goal on the other; bidirectional splits sides."""

    def __init__(self, kind, params, graph, left_ids, right_ids, spine):
        super().__init__(kind, params, graph)
        self.left_ids = left_ids
        self.right_ids = right_ids
        self.spine = spine  # left-to-right chain of shared nodes

    def _route(self, start: int, goal: int, leftward: bool) -> Route:
        spine = list(reversed(self.spine)) if leftward else list(self.spine)
        return Route([start] + spine + [goal])

    def _assign(self, k, rng):
        if self.params.bidirectional:
            # Balanced split; an odd agent goes to a random side.
            n_left = k // 2 + (int(rng.integers(0, 2)) if k % 2 else 0)
            n_left = min(max(n_left, k - len(self.right_ids)), len(self.left_ids))
        else:
            n_left = k
        lefts = [int(x) for x in rng.permutation(self.left_ids)]
        rights = [int(x) for x in rng.permutation(self.right_ids)]
        routes = []
        for i in range(n_left):
            routes.append(self._route(lefts[i], rights[i], leftward=False))
        # Right-starters may reuse a left-starter's goal node as their start
        # (they will have left before anyone arrives); starts stay distinct.
        for j in range(k - n_left):
            routes.append(self._route(rights[j], lefts[j], leftward=True))
        return routes


def _generate_doorway(params: MiniGameParams):
    room = params.scale  # each room is room x room
    half_h = room / 2.0
    gap = params.gap_width / 2.0
    segments = _box(room, half_h)
    segments.append(_seg(0, -half_h, 0, -gap))
    segments.append(_seg(0, gap, 0, half_h))
    vmap = VectorMap(name="doorway", segments=segments)

    nodes = {0: Vec2(0.0, 0.0), 1: Vec2(-0.8, 0.0), 2: Vec2(0.8, 0.0)}
    ys = [-4.0, -2.0, 0.0, 2.0, 4.0]
    left_ids, right_ids = [], []
    nid = 3
    for y in ys:
        nodes[nid] = Vec2(-room / 4.0, y)
        left_ids.append(nid)
        nid += 1
    for y in ys:
        nodes[nid] = Vec2(room / 4.0, y)
        right_ids.append(nid)
        nid += 1
    edges = [(1, 0), (0, 2)]
    edges += [(i, 1) for i in left_ids]
    edges += [(2, i) for i in right_ids]
    graph = NavGraph(map_name="doorway", nodes=nodes, edges=edges)
    sampler = _TwoSidedSampler(
        MiniGameKind.DOORWAY, params, graph, left_ids, right_ids, spine=[1, 0, 2]
    )
    return vmap, graph, sampler


def _generate_hallway(params: MiniGameParams):
    length = params.scale
    half_len = length / 2.0
    half_w = params.corridor_width / 2.0
    room = 6.0
    x_outer = half_len + room
    segments = [
        # corridor walls
        _seg(-half_len, half_w, half_len, half_w),
        _seg(-half_len, -half_w, half_len, -half_w),
        # left room
        _seg(-half_len, half_w, -half_len, room / 2.0),
        _seg(-half_len, -half_w, -half_len, -room / 2.0),
        _seg(-half_len, room / 2.0, -x_outer, room / 2.0),
        _seg(-half_len, -room / 2.0, -x_outer, -room / 2.0),
        _seg(-x_outer, -room / 2.0, -x_outer, room / 2.0),
        # right room
        _seg(half_len, half_w, half_len, room / 2.0),
        _seg(half_len, -half_w, half_len, -room / 2.0),
        _seg(half_len, room / 2.0, x_outer, room / 2.0),
        _seg(half_len, -room / 2.0, x_outer, -room / 2.0),
        _seg(x_outer, -room / 2.0, x_outer, room / 2.0),
    ]
    vmap = VectorMap(name="hallway", segments=segments)

    quarter = half_len / 2.0
    nodes = {
        0: Vec2(0.0, 0.0),
        1: Vec2(-quarter, 0.0),
        2: Vec2(quarter, 0.0),
        3: Vec2(-half_len, 0.0),
        4: Vec2(half_len, 0.0),
    }
    ys = [-2.0, -1.0, 0.0, 1.0, 2.0]
    left_ids, right_ids = [], []
    nid = 5
    for y in ys:
        nodes[nid] = Vec2(-half_len - 3.0, y)
        left_ids.append(nid)
        nid += 1
    for y in ys:
        nodes[nid] = Vec2(half_len + 3.0, y)
        right_ids.append(nid)
        nid += 1
    edges = [(3, 1), (1, 0), (0, 2), (2, 4)]
    edges += [(i, 3) for i in left_ids]
    edges += [(4, i) for i in right_ids]
    graph = NavGraph(map_name="hallway", nodes=nodes, edges=edges)
    sampler = _TwoSidedSampler(
        MiniGameKind.HALLWAY, params, graph, left_ids, right_ids, spine=[3, 1, 0, 2, 4]
    )
    return vmap, graph, sampler


# ---------------------------------------------------------------------------
# Intersection


class _IntersectionSampler(MiniGameSampler):
    DEPTHS = 3

    def __init__(self, kind, params, graph, arm_nodes):
        super().__init__(kind, params, graph)
        self.arm_nodes = arm_nodes  # arm -> [inner, mid, outer] node ids

    def _route(self, arm_in, depth_in, arm_out, depth_out) -> Route:
        inward = list(reversed(self.arm_nodes[arm_in][: depth_in + 1]))
        outward = self.arm_nodes[arm_out][: depth_out + 1]
        return Route(inward + [0] + outward)

    def _assign(self, k, rng):
        arms = len(self.arm_nodes)
        arm_order = [int(a) for a in rng.permutation(arms)]
        starts = []  # (arm, depth), outermost slots first
        for rank in range(self.DEPTHS):
            for arm in arm_order:
                starts.append((arm, self.DEPTHS - 1 - rank))
        starts = starts[:k]

        goal_slots = {arm: self.DEPTHS - 1 for arm in range(arms)}  # next free depth
        routes: list[Route] | None = None

        def search(i, acc):
            nonlocal routes
            if routes is not None:
                return
            if i == len(starts):
                routes = list(acc)
                return
            arm_in, depth_in = starts[i]
            options = [a for a in range(arms) if a != arm_in and goal_slots[a] >= 0]
            for arm_out in [options[j] for j in rng.permutation(len(options))]:
                depth_out = goal_slots[arm_out]
                goal_slots[arm_out] -= 1
                acc.append(self._route(arm_in, depth_in, arm_out, depth_out))
                search(i + 1, acc)
                if routes is not None:
                    return
                acc.pop()
                goal_slots[arm_out] += 1

        search(0, [])
        if routes is None:
            raise ValueError(f"no feasible goal assignment for k={k}")
        return routes


def _generate_intersection(params: MiniGameParams):
    arm = params.scale
    h = params.corridor_width / 2.0
    segments = []
    for xs in (1, -1):
        for ys in (1, -1):
            # Corner at (xs*h, ys*h): one wall along x, one along y.
            segments.append(_seg(xs * h, ys * h, xs * arm, ys * h))
            segments.append(_seg(xs * h, ys * h, xs * h, ys * arm))
    segments += [
        _seg(arm, -h, arm, h),
        _seg(-arm, -h, -arm, h),
        _seg(-h, arm, h, arm),
        _seg(-h, -arm, h, -arm),
    ]
    vmap = VectorMap(name="intersection", segments=segments)

    nodes = {0: Vec2(0.0, 0.0)}
    dirs = [(1, 0), (0, 1), (-1, 0), (0, -1)]
    depths = [arm * 0.3, arm * 0.55, arm * 0.8]
    arm_nodes = []
    nid = 1
    edges = []
    for dx, dy in dirs:
        ids = []
        prev = 0
        for d in depths:
            nodes[nid] = Vec2(dx * d, dy * d)
            edges.append((prev, nid))
            ids.append(nid)
            prev = nid
            nid += 1
        arm_nodes.append(ids)
    graph = NavGraph(map_name="intersection", nodes=nodes, edges=edges)
    sampler = _IntersectionSampler(MiniGameKind.INTERSECTION, params, graph, arm_nodes)
    return vmap, graph, sampler


# ---------------------------------------------------------------------------
# Roundabout


class _RoundaboutSampler(MiniGameSampler):
    RING = 8

    def __init__(self, kind, params, graph, spur_nodes):
        super().__init__(kind, params, graph)
        self.spur_nodes = spur_nodes  # spur -> (near_id, far_id)

    def _ring_path(self, s_in: int, s_out: int) -> list[int]:
        start, end = 2 * s_in, 2 * s_out
        path = [start]
        node = start
        while node != end:
            node = (node + 1) % self.RING
            path.append(node)
        return path

    def _exits(self, s_in: int) -> list[int]:
        """Exit spurs whose CCW arc from s_in passes ring node 0."""
        out = []
        for s_out in range(4):
            if s_out == s_in:
                continue
            if 0 in self._ring_path(s_in, s_out) or 2 * s_in == 0:
                out.append(s_out)
        return out

    def _assign(self, k, rng):
        spur_order = [int(s) for s in rng.permutation(4)]
        starts = []  # (spur, slot) with slot 0 = far, 1 = near
        for slot in range(2):
            for spur in spur_order:
                starts.append((spur, slot))
        starts = starts[:k]

        goal_slots = {s: 0 for s in range(4)}  # next slot: 0 = far, 1 = near
        routes: list[Route] | None = None

        def search(i, acc):
            nonlocal routes
            if routes is not None:
                return
            if i == len(starts):
                routes = list(acc)
                return
            spur_in, slot_in = starts[i]
            options = [s for s in self._exits(spur_in) if goal_slots[s] <= 1]
            for spur_out in [options[j] for j in rng.permutation(len(options))]:
                slot_out = goal_slots[spur_out]
                goal_slots[spur_out] += 1
                near_in, far_in = self.spur_nodes[spur_in]
                near_out, far_out = self.spur_nodes[spur_out]
                entry = [far_in, near_in] if slot_in == 0 else [near_in]
                exit_ = [near_out, far_out] if slot_out == 0 else [near_out]
                acc.append(Route(entry + self._ring_path(spur_in, spur_out) + exit_))
                search(i + 1, acc)
                if routes is not None:
                    return
                acc.pop()
                goal_slots[spur_out] -= 1

        search(0, [])
        if routes is None:
            raise ValueError(f"no feasible goal assignment for k={k}")
        return routes


def _generate_roundabout(params: MiniGameParams):
    ring_r = params.ring_radius
    inner_r = ring_r - 0.55
    outer_r = ring_r + 0.55
    spur_half = 0.5
    spur_end = outer_r + params.scale / 2.0 + 0.5

    segments = []
    # Inner octagon, vertices aligned with ring nodes.
    for i in range(8):
        a0, a1 = math.pi / 4 * i, math.pi / 4 * (i + 1)
        segments.append(
            _seg(inner_r * math.cos(a0), inner_r * math.sin(a0),
                 inner_r * math.cos(a1), inner_r * math.sin(a1))
        )
    # Outer wall: four arcs between spur openings, 4 chords each.
    delta = math.asin(spur_half / outer_r)
    for s in range(4):
        a_from = math.pi / 2 * s + delta
        a_to = math.pi / 2 * (s + 1) - delta
        pts = np.linspace(a_from, a_to, 5)
        for a0, a1 in zip(pts, pts[1:]):
            segments.append(
                _seg(outer_r * math.cos(a0), outer_r * math.sin(a0),
                     outer_r * math.cos(a1), outer_r * math.sin(a1))
            )
    # Spur corridors from the arc openings straight out, plus end caps.
    for s in range(4):
        theta = math.pi / 2 * s
        ux, uy = math.cos(theta), math.sin(theta)
        nx, ny = -uy, ux
        d0 = outer_r * math.cos(delta)
        for side in (1, -1):
            segments.append(
                _seg(d0 * ux + side * spur_half * nx, d0 * uy + side * spur_half * ny,
                     spur_end * ux + side * spur_half * nx, spur_end * uy + side * spur_half * ny)
            )
        segments.append(
            _seg(spur_end * ux + spur_half * nx, spur_end * uy + spur_half * ny,
                 spur_end * ux - spur_half * nx, spur_end * uy - spur_half * ny)
        )
    vmap = VectorMap(name="roundabout", segments=segments)

    nodes = {}
    for i in range(8):
        a = math.pi / 4 * i
        nodes[i] = Vec2(ring_r * math.cos(a), ring_r * math.sin(a))
    edges = [(i, (i + 1) % 8) for i in range(8)]
    spur_nodes = []
    nid = 8
    for s in range(4):
        theta = math.pi / 2 * s
        ux, uy = math.cos(theta), math.sin(theta)
        near, far = nid, nid + 1
        nodes[near] = Vec2((outer_r + 1.0) * ux, (outer_r + 1.0) * uy)
        nodes[far] = Vec2((spur_end - 0.5) * ux, (spur_end - 0.5) * uy)
        edges += [(2 * s, near), (near, far)]
        spur_nodes.append((near, far))
        nid += 2
    graph = NavGraph(map_name="roundabout", nodes=nodes, edges=edges)
    sampler = _RoundaboutSampler(MiniGameKind.ROUNDABOUT, params, graph, spur_nodes)
    return vmap, graph, sampler


# ---------------------------------------------------------------------------


_GENERATORS = {
    MiniGameKind.OPEN: _generate_open,
    MiniGameKind.DOORWAY: _generate_doorway,
    MiniGameKind.HALLWAY: _generate_hallway,
    MiniGameKind.INTERSECTION: _generate_intersection,
    MiniGameKind.ROUNDABOUT: _generate_roundabout,
}


def generate(
    kind: MiniGameKind, params: MiniGameParams | None = None
) -> tuple[VectorMap, NavGraph, MiniGameSampler]:
    """Build (map, graph, route sampler) for a mini-game kind."""
    if params is None:
        params = default_params(kind)
    if params.kind is not kind:
        params = replace(params, kind=kind)
    return _GENERATORS[kind](params)


class MiniGameScenarioSet:
    """ScenarioSet adapter: fresh route assignment per episode."""

    def __init__(self, kind: MiniGameKind, params: MiniGameParams | None = None):
        self.kind = kind
        self.vmap, self.graph, self.sampler = generate(kind, params)
        self.name = kind.value

    def max_agents(self) -> int:
        return self.sampler.max_agents

    def sample(self, k: int, num_humans: int, rng: np.random.Generator):
        routes = self.sampler.sample_routes(k + num_humans, rng)
        scenario = Scenario(
            map_ref=self.vmap.name,
            graph_ref=self.graph.map_name,
            agent_routes=routes[:k],
            human_routes=routes[k:],
        )
        return self.vmap, self.graph, scenario
