"""Vector maps, navigation graphs, scenarios, and the geometric predicates
shared by every other module.

Coordinates are meters in a fixed world frame, y-up; angles are radians in
(-pi, pi]. Geometric predicates use a 1e-9 m tolerance. The three file
formats (map / graph / scenario) are JSON with a top-level format_version.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

FORMAT_VERSION = 1

# Tolerance for geometric predicates, meters.
EPS = 1e-9


class FormatError(ValueError):
    """Malformed file: bad JSON or a missing/mistyped field."""


class SemanticError(ValueError):
    """Well-formed file that violates an invariant (e.g. unknown node id)."""


@dataclass(frozen=True)
class Vec2:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite Vec2 ({self.x}, {self.y})")

    def __add__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x - other.x, self.y - other.y)

    def scaled(self, k: float) -> "Vec2":
        return Vec2(self.x * k, self.y * k)

    def dot(self, other: "Vec2") -> float:
        return self.x * other.x + self.y * other.y

    def cross(self, other: "Vec2") -> float:
        return self.x * other.y - self.y * other.x

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def dist(self, other: "Vec2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class Segment:
    a: Vec2
    b: Vec2

    def __post_init__(self):
        if self.a == self.b:
            raise ValueError(f"degenerate segment at ({self.a.x}, {self.a.y})")


@dataclass
class VectorMap:
    """Walls as line segments. May be empty (open scenarios)."""

    name: str
    segments: list[Segment] = field(default_factory=list)


@dataclass
class NavGraph:
    """Waypoint nodes plus undirected traversable edges."""

    map_name: str
    nodes: dict[int, Vec2] = field(default_factory=dict)
    edges: list[tuple[int, int]] = field(default_factory=list)

    def __post_init__(self):
        self._edge_set: set[tuple[int, int]] = set()
        for i, j in self.edges:
            if i == j:
                raise ValueError(f"self-loop edge at node {i}")
            if i not in self.nodes or j not in self.nodes:
                missing = i if i not in self.nodes else j
                raise SemanticError(f"edge ({i}, {j}) references unknown node {missing}")
            self._edge_set.add((min(i, j), max(i, j)))

    def has_edge(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self._edge_set

    def position(self, node_id: int) -> Vec2:
        return self.nodes[node_id]


@dataclass
class Route:
    """Ordered node ids; first is the start, last is the goal."""

    node_ids: list[int]

    def __post_init__(self):
        if len(self.node_ids) < 2:
            raise ValueError("route needs at least 2 nodes")

    def validate(self, graph: NavGraph) -> None:
        for i, j in zip(self.node_ids, self.node_ids[1:]):
            if not graph.has_edge(i, j):
                raise SemanticError(f"route hop ({i}, {j}) is not a graph edge")

    def polyline(self, graph: NavGraph) -> list[Vec2]:
        return [graph.position(n) for n in self.node_ids]


@dataclass
class Scenario:
    map_ref: str
    graph_ref: str
    agent_routes: list[Route]
    human_routes: list[Route] = field(default_factory=list)

    def __post_init__(self):
        if not self.agent_routes:
            raise ValueError("scenario needs at least one agent route")

    def validate(self, graph: NavGraph) -> None:
        for route in self.agent_routes + self.human_routes:
            route.validate(graph)


# ---------------------------------------------------------------------------
# Predicates


def segments_intersect(s1: Segment, s2: Segment) -> Vec2 | None:
    """Intersection point of two closed segments, or None.

    Collinear overlap returns the overlap midpoint (deterministic choice of
    a shared point). Symmetric in its arguments.
    """
    r = s1.b - s1.a
    s = s2.b - s2.a
    qp = s2.a - s1.a
    denom = r.cross(s)
    qpxr = qp.cross(r)

    if abs(denom) < EPS:
        if abs(qpxr) >= EPS:
            return None  # parallel, disjoint
        # Collinear: project s2's endpoints onto s1 and intersect the spans.
        rr = r.dot(r)
        t0 = qp.dot(r) / rr
        t1 = (qp + s).dot(r) / rr
        lo, hi = max(0.0, min(t0, t1)), min(1.0, max(t0, t1))
        if lo > hi + EPS:
            return None
        tm = 0.5 * (lo + hi)
        return s1.a + r.scaled(tm)

    t = qp.cross(s) / denom
    u = qpxr / denom
    if -EPS <= t <= 1.0 + EPS and -EPS <= u <= 1.0 + EPS:
        return s1.a + r.scaled(min(1.0, max(0.0, t)))
    return None


def distance_point_segment(p: Vec2, s: Segment) -> float:
    """Euclidean distance from p to the nearest point of the closed segment."""
    d = s.b - s.a
    t = (p - s.a).dot(d) / d.dot(d)
    t = min(1.0, max(0.0, t))
    return p.dist(s.a + d.scaled(t))


@dataclass(frozen=True)
class GraphViolation:
    edge: tuple[int, int]
    wall_index: int
    point: Vec2


def validate_graph(vmap: VectorMap, graph: NavGraph) -> list[GraphViolation]:
    """Edges (as point-width paths) that cross a wall segment. Empty = valid."""
    violations = []
    for i, j in graph.edges:
        edge_seg = Segment(graph.position(i), graph.position(j))
        for w, wall in enumerate(vmap.segments):
            hit = segments_intersect(edge_seg, wall)
            if hit is not None:
                violations.append(GraphViolation(edge=(i, j), wall_index=w, point=hit))
    return violations


def find_common_point(scenario: Scenario, graph: NavGraph) -> Vec2 | None:
    """A point lying on every agent route (shared node, else shared edge
    interior), or None. Presence classifies the scenario as geometrically
    constrained.
    """
    node_sets = [set(r.node_ids) for r in scenario.agent_routes]
    common_nodes = set.intersection(*node_sets)
    if common_nodes:
        return graph.position(min(common_nodes))

    def edge_set(route: Route) -> set[tuple[int, int]]:
        return {
            (min(i, j), max(i, j)) for i, j in zip(route.node_ids, route.node_ids[1:])
        }

    common_edges = set.intersection(*(edge_set(r) for r in scenario.agent_routes))
    if common_edges:
        i, j = min(common_edges)
        return (graph.position(i) + graph.position(j)).scaled(0.5)
    return None


# ---------------------------------------------------------------------------
# File formats

# Text precision for serialized coordinates: 9 significant digits, which
# makes save -> load -> save a fixed point.
_SIG = ".9g"


def _round9(x: float) -> float:
    return float(format(float(x), _SIG))


def _load_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise FormatError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from e


def _check_version(doc: dict, path: str) -> None:
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise FormatError(
            f"{path}: unsupported format_version {version!r} (expected {FORMAT_VERSION})"
        )


def _field(doc: dict, key: str, path: str):
    if key not in doc:
        raise FormatError(f"{path}: missing field {key!r}")
    return doc[key]


def _dump(doc: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=1)
        f.write("\n")


def save_map(vmap: VectorMap, path: str) -> None:
    doc = {
        "format_version": FORMAT_VERSION,
        "name": vmap.name,
        "segments": [
            [[_round9(s.a.x), _round9(s.a.y)], [_round9(s.b.x), _round9(s.b.y)]]
            for s in vmap.segments
        ],
    }
    _dump(doc, path)


def load_map(path: str) -> VectorMap:
    doc = _load_json(path)
    _check_version(doc, path)
    name = _field(doc, "name", path)
    raw = _field(doc, "segments", path)
    segments = []
    for idx, pair in enumerate(raw):
        try:
            (ax, ay), (bx, by) = pair
            segments.append(Segment(Vec2(ax, ay), Vec2(bx, by)))
        except (TypeError, ValueError) as e:
            raise SemanticError(f"{path}: segments[{idx}]: {e}") from e
    if not segments:
        warnings.warn(f"{path}: map {name!r} has no wall segments", stacklevel=2)
    return VectorMap(name=name, segments=segments)


def save_graph(graph: NavGraph, path: str) -> None:
    doc = {
        "format_version": FORMAT_VERSION,
        "map": graph.map_name,
        "nodes": [
            {"id": nid, "p": [_round9(p.x), _round9(p.y)]}
            for nid, p in graph.nodes.items()
        ],
        "edges": [[i, j] for i, j in graph.edges],
    }
    _dump(doc, path)


def load_graph(path: str) -> NavGraph:
    doc = _load_json(path)
    _check_version(doc, path)
    map_name = _field(doc, "map", path)
    nodes: dict[int, Vec2] = {}
    for entry in _field(doc, "nodes", path):
        nid = _field(entry, "id", path)
        px, py = _field(entry, "p", path)
        if nid in nodes:
            raise SemanticError(f"{path}: duplicate node id {nid}")
        nodes[int(nid)] = Vec2(px, py)
    edges = []
    for i, j in _field(doc, "edges", path):
        if i not in nodes or j not in nodes:
            missing = i if i not in nodes else j
            raise SemanticError(f"{path}: edge [{i}, {j}] references unknown node {missing}")
        edges.append((int(i), int(j)))
    try:
        return NavGraph(map_name=map_name, nodes=nodes, edges=edges)
    except ValueError as e:
        raise SemanticError(f"{path}: {e}") from e


def save_scenario(scenario: Scenario, path: str) -> None:
    doc = {
        "format_version": FORMAT_VERSION,
        "map": scenario.map_ref,
        "graph": scenario.graph_ref,
        "agents": [{"route": list(r.node_ids)} for r in scenario.agent_routes],
        "humans": [{"route": list(r.node_ids)} for r in scenario.human_routes],
    }
    _dump(doc, path)


def load_scenario(path: str, graph: NavGraph | None = None) -> Scenario:
    doc = _load_json(path)
    _check_version(doc, path)

    def routes_of(key: str) -> list[Route]:
        out = []
        for idx, entry in enumerate(doc.get(key, [])):
            ids = _field(entry, "route", path)
            try:
                out.append(Route([int(n) for n in ids]))
            except ValueError as e:
                raise SemanticError(f"{path}: {key}[{idx}]: {e}") from e
        return out

    scenario = Scenario(
        map_ref=_field(doc, "map", path),
        graph_ref=_field(doc, "graph", path),
        agent_routes=routes_of("agents"),
        human_routes=routes_of("humans"),
    )
    if graph is not None:
        try:
            scenario.validate(graph)
        except SemanticError as e:
            raise SemanticError(f"{path}: {e}") from e
    return scenario
