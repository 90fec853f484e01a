"""Dominant-direction clustering, snapping, and whole-scene alignment."""

import itertools
import math
import random

import numpy as np
import pytest

from higs.alignment import (
    DirectionBasis,
    align_scene,
    gram_schmidt,
    kmeans_abs_cosine,
    project_forward,
    snap_direction,
)
from higs.errors import TooFewVectorsError
from higs.graph import ObjectNode, RelationEdge, RelationType, SceneGraph
from higs.pipeline import graphs_identical

from conftest import make_node


def unit(angle_deg: float) -> np.ndarray:
    a = math.radians(angle_deg)
    return np.array([math.cos(a), math.sin(a)])


def angle_diff(a: float, b: float) -> float:
    """Absolute angular distance in radians, wrapped into [0, pi]."""
    d = math.fmod(abs(a - b), 2 * math.pi)
    return min(d, 2 * math.pi - d)


class TestProjectForward:
    def test_identity(self):
        assert np.allclose(project_forward(make_node(1)), [1, 0])

    def test_quarter_turn(self):
        assert np.allclose(project_forward(make_node(1, yaw=math.pi / 2)), [0, 1], atol=1e-12)

    def test_vertical_forward_degenerate(self):
        node = ObjectNode(nid=1, category="pole", rot=(0.0, math.pi / 2, 0.0))
        assert project_forward(node) is None


class TestKMeansAbsCosine:
    def test_three_vector_case_matches_enumeration_oracle(self):
        vs = [unit(0), unit(180), unit(90)]

        def center(members):
            ref = members[0]
            signs = [1.0 if float(m @ ref) >= 0 else -1.0 for m in members]
            m = sum(s * v for s, v in zip(signs, members))
            return m / np.linalg.norm(m)

        stable_partitions = []
        for labels in itertools.product([0, 1], repeat=3):
            groups = [[v for v, l in zip(vs, labels) if l == j] for j in (0, 1)]
            if not groups[0] or not groups[1]:
                continue
            cs = [center(g) for g in groups]
            if all(
                abs(float(v @ cs[l])) >= abs(float(v @ cs[1 - l])) for v, l in zip(vs, labels)
            ):
                stable_partitions.append(frozenset(frozenset(tuple(v) for v in g) for g in groups))
        assert len(set(stable_partitions)) == 1  # unique stable split: {e_x lines} vs {e_y}

        c1, c2 = kmeans_abs_cosine(vs)
        assert abs(float(c1 @ unit(0))) > 1 - 1e-9
        assert abs(float(c2 @ unit(90))) > 1 - 1e-9

    def test_two_vectors_identity(self):
        c1, c2 = kmeans_abs_cosine([unit(0), unit(90)])
        assert abs(float(c1 @ unit(0))) > 1 - 1e-12
        assert abs(float(c2 @ unit(90))) > 1 - 1e-12

    def test_too_few(self):
        with pytest.raises(TooFewVectorsError):
            kmeans_abs_cosine([unit(0)])

    def test_all_parallel(self):
        c1, c2 = kmeans_abs_cosine([unit(10), unit(190), unit(10.0000001)])
        assert c2 is None
        assert abs(float(c1 @ unit(10))) > 1 - 1e-9

    def test_noisy_orthogonal_recovery_and_determinism(self):
        rng = random.Random(11)
        vs = [unit(rng.choice([0, 90, 180, 270]) + rng.uniform(-5, 5)) for _ in range(200)]
        a1, a2 = kmeans_abs_cosine(list(vs))
        b1, b2 = kmeans_abs_cosine(list(vs))
        assert np.array_equal(a1, b1) and np.array_equal(a2, b2)  # bitwise deterministic

        # 1-degree grid brute force over the family angle, cost = total (1 - |cos|).
        def family_cost(theta_deg):
            ds = [unit(theta_deg + 90 * k) for k in range(2)]
            return sum(1 - max(abs(float(v @ d)) for d in ds) for v in vs)

        best_theta = min(range(90), key=family_cost)
        for c in (a1, a2):
            ang = math.degrees(math.atan2(c[1], c[0]))
            resid = abs((ang - best_theta + 45) % 90 - 45)
            assert resid <= 5.0
            resid_truth = abs((ang + 45) % 90 - 45)
            assert resid_truth <= 5.0


class TestGramSchmidt:
    def test_already_orthogonal(self):
        b = gram_schmidt(unit(0), unit(90))
        assert b.d1 == (1.0, 0.0)
        assert np.allclose(b.d2, [0, 1], atol=1e-12)

    def test_projection_removed(self):
        b = gram_schmidt(unit(0), np.array([0.707, 0.707]))
        assert np.allclose(b.d2, [0, 1], atol=1e-9)

    def test_parallel_fallback(self):
        b = gram_schmidt(unit(0), unit(0))
        assert np.allclose(b.d2, [0, 1], atol=1e-12)

    def test_always_orthonormal(self):
        rng = random.Random(12)
        for _ in range(2000):
            c1 = unit(rng.uniform(0, 360))
            c2 = unit(rng.uniform(0, 360))
            b = gram_schmidt(c1, c2)
            assert abs(b.d1[0] * b.d2[0] + b.d1[1] * b.d2[1]) <= 1e-9
            assert abs(math.hypot(*b.d1) - 1) <= 1e-12
            assert abs(math.hypot(*b.d2) - 1) <= 1e-12


class TestSnapDirection:
    BASIS = DirectionBasis(d1=(1.0, 0.0), d2=(0.0, 1.0))

    def test_prefers_larger_dot(self):
        assert np.allclose(snap_direction((0.6, 0.8), self.BASIS), [0, 1])

    def test_fixpoint(self):
        assert np.array_equal(snap_direction((1.0, 0.0), self.BASIS), [1, 0])

    def test_exact_argmax_brute_force(self):
        rng = random.Random(13)
        for _ in range(5000):
            f = unit(rng.uniform(0, 360))
            s = snap_direction(f, self.BASIS)
            dots = [float(f @ c) for c in self.BASIS.candidates()]
            assert float(f @ s) >= max(dots)

    def test_tie_picks_earliest(self):
        # 45 degrees: +d1 and +d2 dots are equal; +d1 comes first.
        s = snap_direction(unit(45), self.BASIS)
        assert np.allclose(s, [1, 0])


def scene_with_yaws(yaws_deg, spread=True):
    g = SceneGraph()
    for i, y in enumerate(yaws_deg, start=1):
        pos = (2.0 * i, 0.0, 0.5) if spread else (0.0, 0.0, 0.5)
        g.add_node(make_node(i, pos=pos, yaw=math.radians(y)))
    return g


class TestAlignScene:
    def test_already_aligned_is_fixpoint(self):
        g = scene_with_yaws([0, 90, 180, -90, 0])
        out = align_scene(g)
        for nid in g.nodes:
            assert angle_diff(out.nodes[nid].yaw, g.nodes[nid].yaw) <= 1e-9

    def test_snaps_to_consistent_family(self):
        g = scene_with_yaws([2, 91, 183, -88])
        out = align_scene(g)

        # Brute-force best family over a 0.1-degree grid.
        forwards = [unit(y) for y in (2, 91, 183, -88)]

        def cost(theta_deg):
            ds = [unit(theta_deg), unit(theta_deg + 90)]
            return sum(1 - max(abs(float(f @ d)) for d in ds) for f in forwards)

        grid = [t / 10 for t in range(900)]
        best = min(grid, key=cost)

        yaws = [math.degrees(out.nodes[n].yaw) for n in sorted(out.nodes)]
        family = {round(((y - best) % 90), 1) % 90 for y in yaws}
        assert all(min(v, 90 - v) <= 0.51 for v in family)  # one consistent family
        for before, after in zip((2, 91, 183, -88), yaws):
            assert angle_diff(math.radians(before), math.radians(after)) <= math.radians(5.0)

    def test_idempotent_bitwise(self, rng):
        for _ in range(30):
            yaws = [rng.choice([0, 90, 180, 270]) + rng.uniform(-8, 8) for _ in range(rng.randint(3, 10))]
            g = scene_with_yaws(yaws)
            once = align_scene(g)
            twice = align_scene(once)
            assert graphs_identical(once, twice)

    def test_yaw_only(self, rng):
        g = scene_with_yaws([rng.uniform(-180, 180) for _ in range(6)])
        g.add_edge(RelationEdge(1, 2, RelationType.INSIDE))
        out = align_scene(g)
        for nid in g.nodes:
            a, b = g.nodes[nid], out.nodes[nid]
            assert a.pos == b.pos
            assert a.scale == b.scale
            assert a.half_extents == b.half_extents
            assert a.rot[:2] == b.rot[:2]

    def test_too_few_forwards_noop(self):
        g = scene_with_yaws([33])
        out = align_scene(g)
        assert graphs_identical(g, out)

    def test_rotation_equivariance(self):
        rng = random.Random(14)
        for _ in range(20):
            base = [rng.choice([0, 90, 180, 270]) + rng.uniform(-5, 5) for _ in range(12)]
            theta = rng.uniform(0, 360)
            from higs.alignment import scene_basis

            b1, _ = scene_basis(scene_with_yaws(base))
            b2, _ = scene_basis(scene_with_yaws([y + theta for y in base]))
            rotated = [
                np.array(
                    [
                        math.cos(math.radians(theta)) * d[0] - math.sin(math.radians(theta)) * d[1],
                        math.sin(math.radians(theta)) * d[0] + math.cos(math.radians(theta)) * d[1],
                    ]
                )
                for d in (b1.d1, b1.d2)
            ]
            for d in (np.array(b2.d1), np.array(b2.d2)):
                best = max(abs(float(d @ r)) for r in rotated)
                assert best >= math.cos(1e-6)
