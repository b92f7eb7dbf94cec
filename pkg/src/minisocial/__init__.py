"""minisocial: a multi-agent social navigation simulator and benchmark
harness.

Agents with kinodynamic constraints navigate constrained 2D worlds
(doorways, hallways, intersections, roundabouts) under an episodic
partially observable stochastic game: discrete GO/STOP actions, a sampling
local planner, composable observations and rewards, optional social-forces
pedestrians, baseline policies, a small on-policy learner, and a
social-compliance metrics suite.
"""

from .dynamics import AgentState, DriveType, KinodynamicConfig, MotionCommand
from .environment import EnvConfig, SocialNavEnv, StepResult
from .geometry import NavGraph, Route, Scenario, Segment, Vec2, VectorMap
from .local_planner import Action, PlannerParams
from .obs_reward import Observer, Rewarder, default_observer, default_rewarder
from .scenarios import MiniGameKind, MiniGameParams, MiniGameScenarioSet, generate

__all__ = [
    "Action",
    "AgentState",
    "DriveType",
    "EnvConfig",
    "KinodynamicConfig",
    "MiniGameKind",
    "MiniGameParams",
    "MiniGameScenarioSet",
    "MotionCommand",
    "NavGraph",
    "Observer",
    "PlannerParams",
    "Rewarder",
    "Route",
    "Scenario",
    "Segment",
    "SocialNavEnv",
    "StepResult",
    "Vec2",
    "VectorMap",
    "default_observer",
    "default_rewarder",
    "generate",
]

__version__ = "0.1.0"
