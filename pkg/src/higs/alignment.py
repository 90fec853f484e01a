"""Dominant-direction recovery and orientation snapping.

Indoor scenes tend to organize along two perpendicular axes. This module
recovers that pair from the objects' horizontal forward vectors — K-Means
with absolute cosine similarity (a vector and its negation count as the same
line), orthogonalized by Gram-Schmidt — and snaps every object's forward to
the nearest of the four candidate directions {±d1, ±d2}.

Run once on the initial scene; later generation steps inherit the frame.
"""

from dataclasses import dataclass
import logging
import math

import numpy as np

from .errors import TooFewVectorsError
from .geometry import rotation_matrix
from .graph import ObjectNode, SceneGraph
from .layout import record_relative_transforms

logger = logging.getLogger(__name__)

DEGENERATE_NORM = 1e-6
PARALLEL_TOL = 1e-9
#: Forwards already this close to their snapped direction are left untouched,
#: making repeated alignment an exact fixpoint.
SNAP_EPS = 1e-9

DEFAULT_MAX_ITERS = 50


@dataclass(frozen=True)
class DirectionBasis:
    """Orthonormal direction pair; candidates are {+d1, -d1, +d2, -d2}."""

    d1: tuple[float, float]
    d2: tuple[float, float]

    def candidates(self) -> list[np.ndarray]:
        d1, d2 = np.array(self.d1), np.array(self.d2)
        return [d1, -d1, d2, -d2]


def project_forward(node: ObjectNode) -> np.ndarray | None:
    """Node's local +X axis rotated into world, projected to the ground plane.

    Returns the normalized horizontal direction, or None when the forward
    points (near-)vertically and carries no usable heading.
    """
    fwd = rotation_matrix(node.rot) @ np.array([1.0, 0.0, 0.0])
    horiz = fwd[:2]
    n = float(np.linalg.norm(horiz))
    if n < DEGENERATE_NORM:
        return None
    return horiz / n


def kmeans_abs_cosine(
    vectors, max_iters: int = DEFAULT_MAX_ITERS
) -> tuple[np.ndarray, np.ndarray | None]:
    """Two-center K-Means on unit 2-vectors under absolute cosine similarity.

    Assignment maximizes |v . c|; centers are the normalized means of their
    members after sign-aligning each member with the center. Initialization
    is deterministic: c1 is the first vector, c2 the vector least parallel
    to it, so repeated runs on the same input are bitwise identical.

    Returns ``(c1, c2)``; ``c2`` is None when all inputs lie on one line
    (caller synthesizes the perpendicular).
    """
    vs = [np.asarray(v, dtype=float) for v in vectors]
    if len(vs) < 2:
        raise TooFewVectorsError(f"need >= 2 vectors, got {len(vs)}")
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")

    mat = np.stack(vs)
    dots = np.abs(mat @ mat.T)
    if np.all(dots > 1.0 - PARALLEL_TOL):
        signs = np.sign(mat @ mat[0])
        signs[signs == 0.0] = 1.0
        mean = (mat * signs[:, None]).mean(axis=0)
        return mean / np.linalg.norm(mean), None

    c1 = mat[0]
    c2 = mat[int(np.argmin(np.abs(mat @ c1)))]
    assign = np.zeros(len(vs), dtype=int)
    for _ in range(max_iters):
        d1 = np.abs(mat @ c1)
        d2 = np.abs(mat @ c2)
        new_assign = np.where(d1 >= d2, 0, 1)
        c1 = _signed_mean(mat[new_assign == 0], c1)
        c2 = _signed_mean(mat[new_assign == 1], c2)
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
    return c1, c2


def _signed_mean(members: np.ndarray, fallback: np.ndarray) -> np.ndarray:
    if len(members) == 0:
        return fallback
    signs = np.sign(members @ fallback)
    signs[signs == 0.0] = 1.0
    mean = (members * signs[:, None]).mean(axis=0)
    n = np.linalg.norm(mean)
    if n < DEGENERATE_NORM:
        return fallback
    return mean / n


def gram_schmidt(c1, c2) -> DirectionBasis:
    """Orthonormal basis from two (possibly skew) unit centers.

    d1 = c1; d2 = c2 with its d1-component removed, normalized. If c2 is
    (near-)parallel to c1, d2 falls back to d1 rotated +90 degrees.
    """
    d1 = np.asarray(c1, dtype=float)
    d1 = d1 / np.linalg.norm(d1)
    c2 = np.asarray(c2, dtype=float)
    residual = c2 - (c2 @ d1) * d1
    n = float(np.linalg.norm(residual))
    if n < DEGENERATE_NORM:
        d2 = np.array([-d1[1], d1[0]])
    else:
        d2 = residual / n
    return DirectionBasis(d1=(float(d1[0]), float(d1[1])), d2=(float(d2[0]), float(d2[1])))


def snap_direction(f, basis: DirectionBasis) -> np.ndarray:
    """The candidate direction in {±d1, ±d2} with the largest dot against f.

    Exact argmax; on exact ties the earliest candidate in the order
    (+d1, -d1, +d2, -d2) wins.
    """
    fv = np.asarray(f, dtype=float)
    best = None
    best_dot = -math.inf
    for cand in basis.candidates():
        d = float(fv @ cand)
        if d > best_dot:
            best, best_dot = cand, d
    assert best is not None
    return best


def scene_basis(graph: SceneGraph) -> tuple[DirectionBasis, dict[int, np.ndarray]] | None:
    """Recover the dominant basis from a graph's non-degenerate forwards.

    Returns (basis, forwards-by-nid) or None when fewer than two nodes have
    a usable heading.
    """
    forwards: dict[int, np.ndarray] = {}
    for nid in sorted(graph.nodes):
        f = project_forward(graph.nodes[nid])
        if f is not None:
            forwards[nid] = f
    if len(forwards) < 2:
        return None
    c1, c2 = kmeans_abs_cosine([forwards[nid] for nid in sorted(forwards)])
    basis = gram_schmidt(c1, c2 if c2 is not None else c1)
    return basis, forwards


def align_scene(graph: SceneGraph) -> SceneGraph:
    """Snap every usable node heading to the recovered orthogonal basis.

    Returns a new graph; only yaws change (positions, scales, extents are
    untouched), and strong-edge transforms are re-recorded afterward. A graph
    with fewer than two usable forwards is returned unchanged (copy) with a
    warning.
    """
    out = graph.copy()
    recovered = scene_basis(out)
    if recovered is None:
        logger.warning("alignment skipped: fewer than two non-degenerate forwards")
        return out
    basis, forwards = recovered
    changed = False
    for nid, f in forwards.items():
        snapped = snap_direction(f, basis)
        # Rotating yaw by the f->snapped angle maps the projected forward
        # exactly onto the snapped direction, whatever the roll/pitch.
        delta = math.atan2(
            f[0] * snapped[1] - f[1] * snapped[0], float(f @ snapped)
        )
        if abs(delta) <= SNAP_EPS:
            continue
        node = out.nodes[nid]
        node.rot = (node.rot[0], node.rot[1], _wrap_angle(node.rot[2] + delta))
        changed = True
    if changed:
        record_relative_transforms(out)
        out.revision += 1
    return out


def _wrap_angle(a: float) -> float:
    """Wrap into (-pi, pi]."""
    wrapped = math.fmod(a + math.pi, 2.0 * math.pi)
    if wrapped <= 0.0:
        wrapped += 2.0 * math.pi
    return wrapped - math.pi
