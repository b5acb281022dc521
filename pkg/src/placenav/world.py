"""2D arena geometry, LiDAR raycasting, agent kinematics, and goal detection.

The world is a rectangular arena [0, width] x [0, height] with line-segment
obstacles, a circular goal region, and a start pose. The only sensor is a
planar rangefinder sweeping `n_res` beams at fixed allocentric bearings
2*pi*j/n_res; beams report the distance to the nearest wall or obstacle.

All functions are pure over immutable inputs and safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .geometry import (
    point_segment_distance,
    ray_capsule_entry,
    ray_segment_distances,
    wrap_angle,
)

DEFAULT_N_RES = 720          # beams per 360 degree sweep
DEFAULT_COLLISION_MARGIN = 0.1   # metres kept clear of any wall


class EnvironmentSpecError(ValueError):
    """Environment file failed to parse or violates a geometric invariant."""

    def __init__(self, message: str, field_name: str | None = None):
        self.field_name = field_name
        super().__init__(message if field_name is None else f"{field_name}: {message}")


class InvalidAgentStateError(ValueError):
    """Agent state is outside the arena or otherwise unusable."""


@dataclass(frozen=True)
class EnvironmentSpec:
    """Arena bounds, obstacle segments, goal disc, and start pose (metres)."""

    width: float
    height: float
    obstacles: np.ndarray          # (n, 4) rows (x1, y1, x2, y2)
    goal_center: np.ndarray        # (2,)
    goal_radius: float
    start_pose: tuple[float, float, float]   # (x, y, heading radians)
    name: str = "unnamed"

    def __post_init__(self):
        object.__setattr__(self, "obstacles", np.asarray(self.obstacles, dtype=float).reshape(-1, 4))
        object.__setattr__(self, "goal_center", np.asarray(self.goal_center, dtype=float).reshape(2))
        validate_environment(self)

    @property
    def diagonal(self) -> float:
        return math.hypot(self.width, self.height)

    def boundary_segments(self) -> np.ndarray:
        """The four arena walls as segments."""
        w, h = self.width, self.height
        return np.array(
            [
                [0.0, 0.0, w, 0.0],
                [w, 0.0, w, h],
                [w, h, 0.0, h],
                [0.0, h, 0.0, 0.0],
            ]
        )

    def all_segments(self) -> np.ndarray:
        """Boundary walls followed by obstacle segments."""
        if len(self.obstacles) == 0:
            return self.boundary_segments()
        return np.vstack([self.boundary_segments(), self.obstacles])

    def contains(self, point) -> bool:
        x, y = float(point[0]), float(point[1])
        return 0.0 <= x <= self.width and 0.0 <= y <= self.height


@dataclass
class AgentState:
    """Agent pose plus the velocity (m/step) of its most recent move."""

    position: np.ndarray                     # (2,)
    heading: float                           # radians in [0, 2*pi)
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float).reshape(2)
        self.velocity = np.asarray(self.velocity, dtype=float).reshape(2)
        self.heading = wrap_angle(self.heading)


@dataclass(frozen=True)
class LidarScan:
    """Per-beam range and allocentric bearing."""

    ranges: np.ndarray
    bearings: np.ndarray
    max_range: float

    def __post_init__(self):
        object.__setattr__(self, "ranges", np.asarray(self.ranges, dtype=float))
        object.__setattr__(self, "bearings", np.asarray(self.bearings, dtype=float))
        if self.ranges.shape != self.bearings.shape:
            raise ValueError("ranges and bearings must have equal length")

    @property
    def n_res(self) -> int:
        return len(self.ranges)


def validate_environment(env: EnvironmentSpec) -> None:
    """Raise EnvironmentSpecError on any violated invariant."""
    if not env.width > 0:
        raise EnvironmentSpecError("must be > 0", "width")
    if not env.height > 0:
        raise EnvironmentSpecError("must be > 0", "height")
    for idx, seg in enumerate(env.obstacles):
        for x, y in (seg[0:2], seg[2:4]):
            if not (0.0 <= x <= env.width and 0.0 <= y <= env.height):
                raise EnvironmentSpecError(
                    f"endpoint ({x}, {y}) outside arena", f"segment[{idx}]"
                )
    if not env.goal_radius > 0:
        raise EnvironmentSpecError("must be > 0", "goal_radius")
    if not env.contains(env.goal_center):
        raise EnvironmentSpecError("goal center outside arena", "goal")
    for idx, seg in enumerate(env.obstacles):
        if point_segment_distance(env.goal_center, seg) < env.goal_radius:
            raise EnvironmentSpecError(
                f"goal disc intersects obstacle segment[{idx}]", "goal"
            )
    sx, sy, _ = env.start_pose
    if not env.contains((sx, sy)):
        raise EnvironmentSpecError("start position outside arena", "start")
    if math.hypot(sx - env.goal_center[0], sy - env.goal_center[1]) < env.goal_radius:
        raise EnvironmentSpecError("start position inside goal disc", "start")


def raycast(
    env: EnvironmentSpec,
    state: AgentState,
    n_res: int = DEFAULT_N_RES,
    max_range: float | None = None,
) -> LidarScan:
    """Sweep `n_res` beams at allocentric bearings 2*pi*j/n_res.

    Bearings are world-fixed, so the scan is independent of agent heading.
    Ranges are clamped to `max_range` (default: arena diagonal, which
    guarantees every beam terminates on a boundary wall).
    """
    if not env.contains(state.position):
        raise InvalidAgentStateError(f"position {state.position} outside arena")
    if max_range is None:
        max_range = env.diagonal
    bearings = beam_bearings(n_res)
    directions = np.column_stack([np.cos(bearings), np.sin(bearings)])
    hits = ray_segment_distances(state.position, directions, env.all_segments())
    ranges = np.minimum(hits.min(axis=1), max_range)
    return LidarScan(ranges=ranges, bearings=bearings, max_range=max_range)


def beam_bearings(n_res: int) -> np.ndarray:
    """Allocentric beam bearings 2*pi*j/n_res for j = 0..n_res-1."""
    return 2.0 * math.pi * np.arange(n_res) / n_res


def clearance_along(env: EnvironmentSpec, position, theta: float, margin: float) -> float:
    """Maximum advance along heading theta keeping >= margin from every wall."""
    direction = np.array([math.cos(theta), math.sin(theta)])
    best = math.inf
    for seg in env.all_segments():
        best = min(best, ray_capsule_entry(position, direction, seg, margin))
    return best


def step_agent(
    env: EnvironmentSpec,
    state: AgentState,
    theta: float,
    step_len: float,
    margin: float = DEFAULT_COLLISION_MARGIN,
) -> AgentState:
    """Advance `step_len` metres along theta, clamping at the collision margin.

    The commanded heading is always adopted; only the travelled distance is
    clamped (never negative). The returned state's velocity is the realised
    position delta.
    """
    if not step_len > 0:
        raise ValueError("step_len must be > 0")
    theta = wrap_angle(theta)
    advance = min(step_len, clearance_along(env, state.position, theta, margin))
    advance = max(advance, 0.0)
    new_pos = state.position + advance * np.array([math.cos(theta), math.sin(theta)])
    return AgentState(position=new_pos, heading=theta, velocity=new_pos - state.position)


def in_goal(state: AgentState, env: EnvironmentSpec) -> bool:
    """True iff the agent is strictly inside the goal disc."""
    return float(np.hypot(*(state.position - env.goal_center))) < env.goal_radius


def start_state(env: EnvironmentSpec) -> AgentState:
    x, y, heading = env.start_pose
    return AgentState(position=np.array([x, y]), heading=heading)


# ---------------------------------------------------------------------------
# Environment file format
# ---------------------------------------------------------------------------
#
# Plain declarative text, one entry per line, '#' starts a comment:
#
#   width  20              arena width in metres (required)
#   height 20              arena height in metres (required)
#   start  1 1 45          x y heading_deg (required)
#   goal   18 18 0.5       x y radius (required)
#   segment x1 y1 x2 y2    obstacle segment (repeatable)
#   rect    x y w h        axis-aligned rectangle, expanded to 4 segments
#
# Tokens are whitespace-separated. Keys may repeat only where noted.

_SCALAR_KEYS = {"width": 1, "height": 1, "start": 3, "goal": 3}
_REPEAT_KEYS = {"segment": 4, "rect": 4}


def parse_environment(text: str, name: str = "unnamed") -> EnvironmentSpec:
    """Parse the declarative environment format; see module comment for grammar."""
    scalars: dict[str, list[float]] = {}
    segments: list[list[float]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        key, args = tokens[0].lower(), tokens[1:]
        if key in _SCALAR_KEYS:
            expected = _SCALAR_KEYS[key]
        elif key in _REPEAT_KEYS:
            expected = _REPEAT_KEYS[key]
        else:
            raise EnvironmentSpecError(f"line {lineno}: unknown key {key!r}")
        if len(args) != expected:
            raise EnvironmentSpecError(
                f"line {lineno}: expected {expected} values", key
            )
        try:
            values = [float(v) for v in args]
        except ValueError as exc:
            raise EnvironmentSpecError(f"line {lineno}: {exc}", key) from None
        if key in _SCALAR_KEYS:
            if key in scalars:
                raise EnvironmentSpecError(f"line {lineno}: duplicate key", key)
            scalars[key] = values
        elif key == "segment":
            segments.append(values)
        else:  # rect -> 4 segments
            x, y, w, h = values
            segments.extend(
                [
                    [x, y, x + w, y],
                    [x + w, y, x + w, y + h],
                    [x + w, y + h, x, y + h],
                    [x, y + h, x, y],
                ]
            )
    for key in _SCALAR_KEYS:
        if key not in scalars:
            raise EnvironmentSpecError("missing required key", key)
    sx, sy, heading_deg = scalars["start"]
    gx, gy, gr = scalars["goal"]
    return EnvironmentSpec(
        width=scalars["width"][0],
        height=scalars["height"][0],
        obstacles=np.asarray(segments, dtype=float).reshape(-1, 4),
        goal_center=np.array([gx, gy]),
        goal_radius=gr,
        start_pose=(sx, sy, math.radians(heading_deg)),
        name=name,
    )


def load_environment(path: str | Path) -> EnvironmentSpec:
    """Load and validate an environment file."""
    path = Path(path)
    return parse_environment(path.read_text(), name=path.stem)


def bundled_environment_names() -> list[str]:
    """Names of the environment files shipped with the package."""
    pkg = resources.files("placenav") / "environments"
    return sorted(p.name[: -len(".env")] for p in pkg.iterdir() if p.name.endswith(".env"))


def bundled_environment(name: str) -> EnvironmentSpec:
    """Load a shipped environment by name (e.g. 'env1', 'desk_open')."""
    pkg = resources.files("placenav") / "environments" / f"{name}.env"
    return parse_environment(pkg.read_text(), name=name)


def resolve_environment(name_or_path: str) -> EnvironmentSpec:
    """Accept either a bundled environment name or a filesystem path."""
    if Path(name_or_path).exists():
        return load_environment(name_or_path)
    if name_or_path in bundled_environment_names():
        return bundled_environment(name_or_path)
    raise EnvironmentSpecError(
        f"no such environment file or bundled name: {name_or_path!r} "
        f"(bundled: {', '.join(bundled_environment_names())})"
    )
