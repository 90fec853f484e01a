"""Pure geometric kernel: planar transforms, rectangles, oriented boxes.

All functions are stateless and safe to call concurrently. The world frame
is right-handed with +Z up; yaw is a counterclockwise rotation about +Z.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import EmptySceneError

Vec2 = tuple[float, float]
Vec3 = tuple[float, float, float]


@dataclass(frozen=True)
class Rect2:
    """Axis-oriented rectangle in some stated frame."""

    center: Vec2
    half_extents: Vec2
    yaw: float = 0.0


@dataclass(frozen=True)
class PlacementArea:
    """Valid support region on top of an object, in the object's local frame."""

    rect: Rect2
    height: float  # top-surface elevation above the object's center


@dataclass(frozen=True)
class OrientedBoundingBox:
    center: Vec3
    half_extents: Vec3
    yaw: float


def yaw_rotate(v, yaw: float) -> np.ndarray:
    """Rotate a 2-vector counterclockwise by ``yaw`` radians."""
    c, s = math.cos(yaw), math.sin(yaw)
    x, y = float(v[0]), float(v[1])
    return np.array([c * x - s * y, s * x + c * y])


def local_to_world(point, frame_pos, frame_yaw: float) -> np.ndarray:
    """Map a point from a planar frame (position + yaw) to world coordinates."""
    r = yaw_rotate(point, frame_yaw)
    return np.array([r[0] + float(frame_pos[0]), r[1] + float(frame_pos[1])])


def world_to_local(point, frame_pos, frame_yaw: float) -> np.ndarray:
    """Inverse of :func:`local_to_world`; round trips within 1e-12."""
    dx = float(point[0]) - float(frame_pos[0])
    dy = float(point[1]) - float(frame_pos[1])
    return yaw_rotate((dx, dy), -frame_yaw)


def clamp_to_rect(point, half_extents) -> tuple[np.ndarray, np.ndarray]:
    """Clamp a point (in rect local frame) into ``[-h, +h]`` per axis.

    Returns ``(clamped, delta)`` where ``delta = clamped - point`` is the
    minimal-norm translation that lands the point inside the rectangle
    (componentwise clamping is exactly optimal for an axis-aligned box).
    """
    p = np.array([float(point[0]), float(point[1])])
    h = np.array([float(half_extents[0]), float(half_extents[1])])
    clamped = np.clip(p, -h, h)
    return clamped, clamped - p


def point_in_rect(point, rect: Rect2) -> bool:
    """Closed-set containment test: points exactly on the edge count as inside."""
    local = world_to_local(point, rect.center, rect.yaw)
    hx, hy = rect.half_extents
    return abs(local[0]) <= hx and abs(local[1]) <= hy


def rotation_matrix(rot) -> np.ndarray:
    """3x3 rotation from (roll, pitch, yaw) Euler angles, composed Rz·Ry·Rx."""
    roll, pitch, yaw = (float(a) for a in rot)
    cr, sr = math.cos(roll), math.sin(roll)
    cp, sp = math.cos(pitch), math.sin(pitch)
    cy, sy = math.cos(yaw), math.sin(yaw)
    rx = np.array([[1, 0, 0], [0, cr, -sr], [0, sr, cr]])
    ry = np.array([[cp, 0, sp], [0, 1, 0], [-sp, 0, cp]])
    rz = np.array([[cy, -sy, 0], [sy, cy, 0], [0, 0, 1]])
    return rz @ ry @ rx


def node_corners(node) -> np.ndarray:
    """World positions of the 8 scaled, posed bounding-box corners of a node."""
    h = np.asarray(node.half_extents, dtype=float) * float(node.scale)
    signs = np.array(
        [[sx, sy, sz] for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)],
        dtype=float,
    )
    corners_local = signs * h
    r = rotation_matrix(node.rot)
    return corners_local @ r.T + np.asarray(node.pos, dtype=float)


def obb_of_nodes(nodes, yaw: float) -> OrientedBoundingBox:
    """Minimal box at the given yaw containing every node's posed corners."""
    nodes = list(nodes)
    if not nodes:
        raise EmptySceneError("cannot bound an empty node set")
    pts = np.concatenate([node_corners(n) for n in nodes])
    c, s = math.cos(yaw), math.sin(yaw)
    # Express corners in the yaw-rotated frame; Z is unaffected.
    rx = c * pts[:, 0] + s * pts[:, 1]
    ry = -s * pts[:, 0] + c * pts[:, 1]
    rz = pts[:, 2]
    lo = np.array([rx.min(), ry.min(), rz.min()])
    hi = np.array([rx.max(), ry.max(), rz.max()])
    mid = (lo + hi) / 2.0
    half = (hi - lo) / 2.0
    center_xy = yaw_rotate(mid[:2], yaw)
    return OrientedBoundingBox(
        center=(float(center_xy[0]), float(center_xy[1]), float(mid[2])),
        half_extents=(float(half[0]), float(half[1]), float(half[2])),
        yaw=yaw,
    )


def top_surface(node, inset_ratio: float = 0.0) -> PlacementArea:
    """Placement rectangle on a node's top face, in the node's local frame.

    ``inset_ratio`` shrinks the usable face toward its center (0 = full face).
    """
    if not 0.0 <= inset_ratio < 1.0:
        raise ValueError(f"inset_ratio must be in [0, 1), got {inset_ratio}")
    hx, hy, hz = (float(e) * float(node.scale) for e in node.half_extents)
    shrink = 1.0 - inset_ratio
    rect = Rect2(center=(0.0, 0.0), half_extents=(hx * shrink, hy * shrink))
    return PlacementArea(rect=rect, height=hz)
