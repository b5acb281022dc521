"""Planar geometry helpers shared by the world model and the navigator.

Everything here is a pure function over numpy arrays or floats; angles are
radians, distances metres. Rays are parametrised as p + t*d with unit
direction d and t >= 0.
"""

from __future__ import annotations

import math

import numpy as np

TWO_PI = 2.0 * math.pi


def wrap_angle(theta: float) -> float:
    """Wrap an angle to [0, 2*pi)."""
    return float(theta) % TWO_PI


def wrap_pi(theta):
    """Wrap an angle (scalar or array) to (-pi, pi]."""
    wrapped = np.mod(np.asarray(theta) + math.pi, TWO_PI) - math.pi
    # mod maps -pi to -pi; fold it onto +pi so the interval is half-open
    wrapped = np.where(wrapped == -math.pi, math.pi, wrapped)
    if np.ndim(theta) == 0:
        return float(wrapped)
    return wrapped


def circular_distance(a: float, b: float) -> float:
    """Unsigned circular distance between two angles, in [0, pi]."""
    return abs(wrap_pi(a - b))


def ray_segment_distances(
    origin: np.ndarray,
    directions: np.ndarray,
    segments: np.ndarray,
) -> np.ndarray:
    """Distance from `origin` along each ray direction to each segment.

    Args:
        origin: (2,) ray origin.
        directions: (n_rays, 2) unit direction vectors.
        segments: (n_segs, 4) rows (x1, y1, x2, y2).

    Returns:
        (n_rays, n_segs) array of hit distances; +inf where a ray misses
        the segment.
    """
    directions = np.atleast_2d(directions)
    segments = np.atleast_2d(segments)
    if segments.shape[0] == 0:
        return np.full((directions.shape[0], 0), np.inf)

    a = segments[:, 0:2]          # (S, 2)
    e = segments[:, 2:4] - a      # (S, 2) segment edge vectors
    ao = a - origin               # (S, 2)

    # cross products broadcast to (R, S)
    denom = directions[:, 0, None] * e[None, :, 1] - directions[:, 1, None] * e[None, :, 0]
    t_num = ao[None, :, 0] * e[None, :, 1] - ao[None, :, 1] * e[None, :, 0]
    u_num = ao[None, :, 0] * directions[:, 1, None] - ao[None, :, 1] * directions[:, 0, None]

    with np.errstate(divide="ignore", invalid="ignore"):
        t = t_num / denom
        u = u_num / denom

    valid = (np.abs(denom) > 1e-12) & (t >= 0.0) & (u >= -1e-12) & (u <= 1.0 + 1e-12)
    return np.where(valid, t, np.inf)


def point_segment_distance(point: np.ndarray, segment: np.ndarray) -> float:
    """Euclidean distance from a point to a segment (x1, y1, x2, y2)."""
    a = np.asarray(segment[0:2], dtype=float)
    b = np.asarray(segment[2:4], dtype=float)
    p = np.asarray(point, dtype=float)
    e = b - a
    ee = float(e @ e)
    if ee == 0.0:
        return float(np.hypot(*(p - a)))
    u = float(np.clip((p - a) @ e / ee, 0.0, 1.0))
    closest = a + u * e
    return float(np.hypot(*(p - closest)))


def _ray_circle_entry(origin, direction, center, radius) -> float:
    """Smallest t >= 0 where the ray enters a circle; inf if it misses.

    An origin already inside the circle returns 0.
    """
    oc = np.asarray(origin, dtype=float) - np.asarray(center, dtype=float)
    b = float(oc @ direction)
    c = float(oc @ oc) - radius * radius
    if c <= 0.0:
        return 0.0
    disc = b * b - c
    if disc < 0.0:
        return math.inf
    t = -b - math.sqrt(disc)
    return t if t >= 0.0 else math.inf


def ray_capsule_entry(origin, direction, segment, radius) -> float:
    """Smallest t >= 0 where a ray first comes within `radius` of a segment.

    The inflated segment is a capsule: a band of half-width `radius` plus
    end disks. Returns +inf when the ray never gets that close.
    """
    origin = np.asarray(origin, dtype=float)
    direction = np.asarray(direction, dtype=float)
    a = np.asarray(segment[0:2], dtype=float)
    b = np.asarray(segment[2:4], dtype=float)

    best = min(
        _ray_circle_entry(origin, direction, a, radius),
        _ray_circle_entry(origin, direction, b, radius),
    )

    e = b - a
    length = float(np.hypot(*e))
    if length > 1e-12:
        n = np.array([-e[1], e[0]]) / length  # unit normal
        for offset in (radius, -radius):
            # band edge: the segment translated along +-n
            edge = np.concatenate([a + offset * n, b + offset * n])
            t = ray_segment_distances(origin, direction[None, :], edge[None, :])[0, 0]
            best = min(best, float(t))
        # origin already inside the band?
        if point_segment_distance(origin, np.concatenate([a, b])) < radius:
            best = 0.0
    return best
