# Build a doorway world by hand: walls as segments, a waypoint graph,
# agent routes through the gap. Validate it, round-trip it through the
# file formats, and locate the shared conflict point.

import os
import tempfile

from minisocial.geometry import (
    NavGraph,
    Route,
    Scenario,
    Segment,
    Vec2,
    VectorMap,
    find_common_point,
    load_map,
    save_map,
    validate_graph,
)

# Two rooms, one 1 m gap at the origin.
walls = [
    Segment(Vec2(-12, -6), Vec2(12, -6)),
    Segment(Vec2(12, -6), Vec2(12, 6)),
    Segment(Vec2(12, 6), Vec2(-12, 6)),
    Segment(Vec2(-12, 6), Vec2(-12, -6)),
    Segment(Vec2(0, -6), Vec2(0, -0.5)),
    Segment(Vec2(0, 0.5), Vec2(0, 6)),
]
vmap = VectorMap("hand_doorway", walls)

nodes = {
    0: Vec2(0, 0),      # the gap
    1: Vec2(-3, 2),
    2: Vec2(-3, -2),
    3: Vec2(3, 2),
    4: Vec2(3, -2),
}
graph = NavGraph("hand_doorway", nodes, [(1, 0), (2, 0), (0, 3), (0, 4)])

violations = validate_graph(vmap, graph)
print(f"graph violations: {violations}")

# Two agents crossing in opposite directions share the gap node.
scenario = Scenario(
    "hand_doorway.map.json",
    "hand_doorway.graph.json",
    agent_routes=[Route([1, 0, 4]), Route([3, 0, 2])],
)
scenario.validate(graph)
common = find_common_point(scenario, graph)
print(f"conflict point: ({common.x}, {common.y})  -> geometrically constrained")

# Round trip through the JSON format.
with tempfile.TemporaryDirectory() as tmp:
    path = os.path.join(tmp, "hand_doorway.map.json")
    save_map(vmap, path)
    again = load_map(path)
    print(f"round trip ok: {again.segments == vmap.segments}")
    with open(path) as f:
        print("--- map file ---")
        print(f.read())
