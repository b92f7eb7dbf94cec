import math

import pytest

from minisocial.dynamics import AgentState, KinodynamicConfig, MotionCommand, clamp_command
from minisocial.geometry import NavGraph, Route, Segment, Vec2, VectorMap
from minisocial.local_planner import (
    Action,
    CandidateTrajectory,
    PlannerParams,
    advance_waypoint,
    is_blocked,
    plan_step,
    route_goal_distance,
    sample_candidates,
)
from minisocial.rng import stream

DT = 0.1
CFG = KinodynamicConfig()
PARAMS = PlannerParams()


def open_world():
    vmap = VectorMap("open", [])
    nodes = {0: Vec2(0, 0), 1: Vec2(10, 0)}
    graph = NavGraph("open", nodes, [(0, 1)])
    return vmap, graph, Route([0, 1])


def agent(px=0.0, py=0.0, psi=0.0, v=0.0, omega=0.0, progress=1):
    return AgentState(
        px=px, py=py, psi=psi,
        vx=v * math.cos(psi), vy=v * math.sin(psi),
        omega=omega, route_progress=progress,
    )


class TestStop:
    def test_single_decel_step(self):
        vmap, graph, route = open_world()
        cfg = KinodynamicConfig(a_max=2.0)
        cmd = plan_step(agent(v=1.0), Action.STOP, route, graph, vmap, [], cfg, DT)
        assert cmd.v_cmd == pytest.approx(0.8)

    def test_reaches_zero_and_stays(self):
        vmap, graph, route = open_world()
        state = agent(v=CFG.v_max)
        bound = math.ceil(CFG.v_max / (CFG.a_max * DT))
        from minisocial.dynamics import integrate

        for _ in range(bound):
            cmd = plan_step(state, Action.STOP, route, graph, vmap, [], CFG, DT)
            state = integrate(state, cmd, CFG, DT)
        assert state.speed == pytest.approx(0.0, abs=1e-12)
        cmd = plan_step(state, Action.STOP, route, graph, vmap, [], CFG, DT)
        assert cmd.v_cmd == 0.0 and cmd.omega_cmd == 0.0


class TestGo:
    def test_open_straight_ramp(self):
        vmap, graph, route = open_world()
        cmd = plan_step(agent(), Action.GO, route, graph, vmap, [], CFG, DT)
        assert cmd.omega_cmd == pytest.approx(0.0, abs=1e-12)
        assert cmd.v_cmd == pytest.approx(CFG.a_max * DT)

    def test_converges_to_pref_speed_and_heading(self):
        vmap, graph, route = open_world()
        from minisocial.dynamics import integrate

        state = agent(psi=1.2)  # 1.2 rad off the goal bearing
        for _ in range(60):
            cmd = plan_step(state, Action.GO, route, graph, vmap, [], CFG, DT)
            state = integrate(state, cmd, CFG, DT)
        target = graph.position(1)
        bearing = math.atan2(target.y - state.py, target.x - state.px)
        err = abs(math.atan2(math.sin(bearing - state.psi), math.cos(bearing - state.psi)))
        assert err < 0.1
        assert abs(state.speed - CFG.v_pref) <= CFG.a_max * DT + 1e-9

    def test_wall_ahead_all_straight_blocked(self):
        # Wall 0.2 m ahead of a 0.3 m robot: every candidate that keeps
        # heading into the wall is blocked; the planner either turns with
        # real clearance or behaves as STOP.
        vmap = VectorMap("wall", [Segment(Vec2(0.2, -5), Vec2(0.2, 5))])
        nodes = {0: Vec2(-1, 0), 1: Vec2(10, 0)}
        graph = NavGraph("wall", nodes, [(0, 1)])
        route = Route([0, 1])
        state = agent(v=0.0)
        cands = sample_candidates(
            state, (10.0, 0.0), vmap, [], [], CFG, DT, PARAMS
        )
        assert len(cands) == PARAMS.num_candidates
        assert all(is_blocked(c, CFG.radius, PARAMS.safety_margin) for c in cands)
        cmd = plan_step(state, Action.GO, route, graph, vmap, [], CFG, DT)
        stop_cmd = plan_step(state, Action.STOP, route, graph, vmap, [], CFG, DT)
        assert cmd == stop_cmd

    def test_deterministic(self):
        vmap, graph, route = open_world()
        others = [agent(px=3.0, py=0.5)]
        a = plan_step(agent(v=0.7), Action.GO, route, graph, vmap, others, CFG, DT)
        b = plan_step(agent(v=0.7), Action.GO, route, graph, vmap, others, CFG, DT)
        assert a == b

    def test_output_always_clamp_feasible(self):
        vmap, graph, route = open_world()
        rng = stream(5, "planner")
        for _ in range(200):
            state = agent(
                px=rng.uniform(-2, 2), py=rng.uniform(-2, 2),
                psi=rng.uniform(-math.pi, math.pi),
                v=rng.uniform(0, CFG.v_max), omega=rng.uniform(-1, 1),
            )
            action = Action.GO if rng.random() < 0.7 else Action.STOP
            others = [agent(px=rng.uniform(-2, 2), py=rng.uniform(-2, 2))]
            cmd = plan_step(state, action, route, graph, vmap, others, CFG, DT)
            assert clamp_command(state, cmd, CFG, DT) == cmd

    def test_avoids_static_agent_on_path(self):
        vmap, graph, route = open_world()
        from minisocial.dynamics import integrate

        state = agent()
        blocker = agent(px=3.0, py=0.0)
        for _ in range(80):
            cmd = plan_step(state, Action.GO, route, graph, vmap, [blocker], CFG, DT)
            state = integrate(state, cmd, CFG, DT)
            gap = math.hypot(state.px - 3.0, state.py) - 2 * CFG.radius
            assert gap > 0, "ran into the blocking disc"


class TestBlocked:
    def make(self, clearance):
        return CandidateTrajectory(
            command=MotionCommand(), predicted_poses=[], clearance=clearance,
            goal_alignment=1.0,
        )

    def test_zero_clearance(self):
        assert is_blocked(self.make(0.0), 0.3)

    def test_clear(self):
        assert not is_blocked(self.make(1.0), 0.3, 0.05)

    def test_boundary(self):
        assert is_blocked(self.make(0.34), 0.3, 0.05)  # 0.34 < 0.35


class TestWaypoints:
    def graph(self):
        nodes = {0: Vec2(0, 0), 1: Vec2(5, 0), 2: Vec2(5, 5)}
        return NavGraph("g", nodes, [(0, 1), (1, 2)])

    def test_on_target_advances(self):
        graph = self.graph()
        route = Route([0, 1, 2])
        state = agent(px=5.0, py=0.0, progress=1)
        out = advance_waypoint(state, route, graph, 0.5)
        assert out.route_progress == 2
        assert out.d_goal == pytest.approx(5.0)

    def test_far_away_unchanged(self):
        graph = self.graph()
        route = Route([0, 1, 2])
        state = agent(px=0.0, py=0.0, progress=1)
        out = advance_waypoint(state, route, graph, 0.5)
        assert out.route_progress == 1
        assert out.d_goal == pytest.approx(10.0)

    def test_final_node_saturates(self):
        graph = self.graph()
        route = Route([0, 1, 2])
        state = agent(px=5.0, py=5.0, progress=2)
        out = advance_waypoint(state, route, graph, 0.5)
        assert out.route_progress == 2
        assert out.d_goal == 0.0

    def test_remaining_length_from_midway(self):
        graph = self.graph()
        route = Route([0, 1, 2])
        assert route_goal_distance(2.0, 0.0, route, graph, 1) == pytest.approx(8.0)
