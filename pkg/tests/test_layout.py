"""Pose propagation, stability correction, and fixpoint convergence."""

import math
import random

import numpy as np
import pytest

from higs.errors import RelationMismatchError
from higs.graph import RelationEdge, RelationType, SceneGraph
from higs.layout import (
    optimize_layout,
    propagate_pose,
    record_relative_transforms,
    stability_correct_edge,
    stability_violations,
)

from conftest import make_node, random_forest


def rigid(pos, yaw):
    """4x4 rigid transform (yaw about +Z) for the composition oracle."""
    c, s = math.cos(yaw), math.sin(yaw)
    m = np.eye(4)
    m[:2, :2] = [[c, -s], [s, c]]
    m[:3, 3] = pos
    return m


class TestRecordTransforms:
    def test_axis_aligned(self):
        g = SceneGraph()
        g.add_node(make_node(1))
        g.add_node(make_node(2, pos=(1, 0, 0.5)))
        g.add_edge(RelationEdge(1, 2, RelationType.ON))
        t = g.rel_transforms[(1, 2)]
        assert t.translation == (1.0, 0.0, 0.5)
        assert t.yaw_delta == 0.0
        assert t.scale_ratio == 1.0

    def test_rotated_parent_frame(self):
        g = SceneGraph()
        g.add_node(make_node(1, yaw=math.pi / 2))
        g.add_node(make_node(2, pos=(0, 1, 0)))
        g.add_edge(RelationEdge(1, 2, RelationType.ON))
        assert np.allclose(g.rel_transforms[(1, 2)].translation, (1, 0, 0), atol=1e-12)

    def test_round_trip_random_poses(self, rng):
        for _ in range(300):
            g = SceneGraph()
            g.add_node(
                make_node(1, pos=(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(0, 2)), yaw=rng.uniform(-3, 3), scale=rng.uniform(0.5, 2))
            )
            child_pose = (rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(0, 2))
            child_yaw = rng.uniform(-3, 3)
            g.add_node(make_node(2, pos=child_pose, yaw=child_yaw, scale=rng.uniform(0.5, 2)))
            g.add_edge(RelationEdge(1, 2, RelationType.INSIDE))
            record_relative_transforms(g)
            # Reconstruct the child pose from the stored transform.
            g.nodes[2].pos = (99.0, 99.0, 99.0)
            g.nodes[2].rot = (0.0, 0.0, 0.0)
            propagate_pose(g, 1)
            assert np.allclose(g.nodes[2].pos, child_pose, atol=1e-12)
            assert abs(g.nodes[2].yaw - child_yaw) < 1e-12


class TestPropagate:
    def test_translation(self):
        g = SceneGraph()
        g.add_node(make_node(1))
        g.add_node(make_node(2, pos=(1, 0, 0)))
        g.add_edge(RelationEdge(1, 2, RelationType.ON))
        g.nodes[1].pos = (2.0, 0.0, 0.0)
        propagate_pose(g, 1)
        assert g.nodes[2].pos == (3.0, 0.0, 0.0)

    def test_rotate_then_translate(self):
        g = SceneGraph()
        g.add_node(make_node(1))
        g.add_node(make_node(2, pos=(1, 0, 0)))
        g.add_edge(RelationEdge(1, 2, RelationType.ON))
        g.nodes[1].pos = (2.0, 0.0, 0.0)
        g.nodes[1].rot = (0.0, 0.0, math.pi / 2)
        propagate_pose(g, 1)
        assert np.allclose(g.nodes[2].pos, (2.0, 1.0, 0.0), atol=1e-12)

    def test_depth10_matches_composition_oracle(self, rng):
        for _ in range(200):
            g = SceneGraph()
            g.add_node(make_node(1, pos=(rng.uniform(-2, 2), rng.uniform(-2, 2), 0.5), yaw=rng.uniform(-3, 3)))
            for i in range(2, 12):
                g.add_node(
                    make_node(
                        i,
                        pos=(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(0, 2)),
                        yaw=rng.uniform(-3, 3),
                        scale=rng.uniform(0.7, 1.4),
                    )
                )
                g.add_edge(RelationEdge(i - 1, i, RelationType.INSIDE))
            transforms = [g.rel_transforms[(i - 1, i)] for i in range(2, 12)]

            new_pos = (rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(0, 1))
            new_yaw = rng.uniform(-3, 3)
            g.modify_node_pose(1, new_pos=new_pos, new_rot=(0, 0, new_yaw))

            m = rigid(new_pos, new_yaw)
            yaw = new_yaw
            for t in transforms:
                m = m @ rigid(t.translation, t.yaw_delta)
                yaw += t.yaw_delta
            assert np.allclose(g.nodes[11].pos, m[:3, 3], atol=1e-9)
            assert abs(g.nodes[11].yaw - yaw) < 1e-9

    def test_rigid_move_shifts_descendants_exactly(self, rng):
        g = random_forest(rng, n_roots=1, settled=True)
        root = g.strong_roots()[0]
        old = {n: np.array(g.nodes[n].pos) for n in g.strong_descendants(root)}
        t = np.array([1.25, -0.5, 0.75])
        new_pos = tuple(np.array(g.nodes[root].pos) + t)
        g.modify_node_pose(root, new_pos=new_pos)
        for n, p in old.items():
            assert np.allclose(np.array(g.nodes[n].pos) - p, t, atol=1e-12)

    def test_weak_edges_never_move(self):
        g = SceneGraph()
        g.add_node(make_node(1))
        g.add_node(make_node(2, pos=(1, 1, 0)))
        g.add_edge(RelationEdge(1, 2, RelationType.ADJACENT))
        g.modify_node_pose(1, new_pos=(5, 5, 0))
        assert g.nodes[2].pos == (1.0, 1.0, 0.0)


def desk_with_lamp(lamp_xy=(0.2, 0.1), desk_yaw=0.0, desk_pos=(0.0, 0.0, 0.375)):
    g = SceneGraph()
    g.add_node(make_node(1, "desk", pos=desk_pos, yaw=desk_yaw, half=(0.6, 0.35, 0.375)))
    lamp_z = desk_pos[2] + 0.375 + 0.2
    g.add_node(make_node(2, "lamp", pos=(lamp_xy[0], lamp_xy[1], lamp_z), half=(0.09, 0.09, 0.2)))
    g.add_edge(RelationEdge(1, 2, RelationType.ON))
    return g


class TestStabilityCorrectEdge:
    def test_inside_gets_only_vertical_seating(self):
        g = desk_with_lamp(lamp_xy=(0.2, 0.1))
        g.nodes[2].pos = (0.2, 0.1, 2.0)  # floating
        delta = stability_correct_edge(g, g.edges[0])
        assert delta == (0.0, 0.0)
        assert abs(g.nodes[2].pos[2] - (0.375 + 0.375 + 0.2)) < 1e-12

    def test_clamp_arithmetic(self):
        g = SceneGraph()
        g.add_node(make_node(1, half=(1, 1, 0.5)))
        g.add_node(make_node(2, pos=(1.5, 0.0, 1.0), half=(0.1, 0.1, 0.1)))
        g.add_edge(RelationEdge(1, 2, RelationType.ON))
        delta = stability_correct_edge(g, g.edges[0])
        assert np.allclose(delta, (-0.5, 0.0))
        assert np.allclose(g.nodes[2].pos, (1.0, 0.0, 0.6), atol=1e-12)

    def test_wrong_relation(self):
        g = SceneGraph()
        g.add_node(make_node(1))
        g.add_node(make_node(2))
        g.add_edge(RelationEdge(1, 2, RelationType.INSIDE))
        with pytest.raises(RelationMismatchError):
            stability_correct_edge(g, g.edges[0])

    def test_rotated_parent_matches_sampling_oracle(self):
        """10^4-point boundary sampling of the placement rect (world frame)."""
        rng = random.Random(21)
        for _ in range(40):
            yaw = rng.uniform(-3, 3)
            g = SceneGraph()
            g.add_node(make_node(1, pos=(0.5, -0.25, 0.5), yaw=yaw, half=(2, 1, 0.5)))
            # place the child well outside the short side, in world coords
            local = (rng.uniform(-1.5, 1.5), rng.choice([-1, 1]) * rng.uniform(1.25, 3.0))
            c, s = math.cos(yaw), math.sin(yaw)
            wx = 0.5 + c * local[0] - s * local[1]
            wy = -0.25 + s * local[0] + c * local[1]
            g.add_node(make_node(2, pos=(wx, wy, 1.2), half=(0.1, 0.1, 0.1)))
            g.add_edge(RelationEdge(1, 2, RelationType.ON))

            child_before = np.array([wx, wy])
            delta = stability_correct_edge(g, g.edges[0])

            u = np.linspace(-1, 1, 2500)
            h = np.array([2.0, 1.0])
            edges = np.concatenate(
                [
                    np.stack([np.ones_like(u) * h[0], u * h[1]], axis=1),
                    np.stack([-np.ones_like(u) * h[0], u * h[1]], axis=1),
                    np.stack([u * h[0], np.ones_like(u) * h[1]], axis=1),
                    np.stack([u * h[0], -np.ones_like(u) * h[1]], axis=1),
                ]
            )
            world = edges @ np.array([[c, s], [-s, c]]) + np.array([0.5, -0.25])
            best = np.sqrt(((world - child_before) ** 2).sum(axis=1).min())
            assert abs(np.hypot(*delta) - best) <= 1e-6


class TestOptimizeLayout:
    def test_stable_scene_one_pass(self):
        g = desk_with_lamp()
        g, report = optimize_layout(g)
        assert report.converged and report.passes == 1
        assert report.corrections == []

    def test_lamp_off_desk_edge(self):
        g = desk_with_lamp(lamp_xy=(1.0, 0.0))  # 0.4 beyond the 0.6 half extent
        g, report = optimize_layout(g)
        assert report.converged and report.passes == 2
        stability = [c for c in report.corrections if c.reason == "stability"]
        assert len(stability) == 1
        assert abs(np.hypot(stability[0].delta[0], stability[0].delta[1]) - 0.4) < 1e-9
        assert stability_violations(g) == []

    def test_randomized_convergence_suite(self, rng):
        for _ in range(150):
            g = random_forest(rng, n_roots=rng.randint(1, 3))
            g, report = optimize_layout(g)
            assert report.converged, "forest did not converge in 8 passes"
            assert stability_violations(g) == []
            assert g.validate() == []

    def test_idempotent_on_converged(self, rng):
        g = random_forest(rng, n_roots=2)
        g, first = optimize_layout(g)
        assert first.converged
        before = {n: g.nodes[n].pos for n in g.nodes}
        g, second = optimize_layout(g)
        assert second.corrections == []
        for n, p in before.items():
            assert max(abs(a - b) for a, b in zip(g.nodes[n].pos, p)) <= 1e-9

    def test_weak_edges_inert(self, rng):
        g1 = random_forest(rng, n_roots=2)
        g2 = g1.copy()
        # salt g1 with weak edges between random node pairs
        nids = sorted(g1.nodes)
        for _ in range(6):
            a, b = rng.sample(nids, 2)
            edge = RelationEdge(a, b, RelationType.FACING)
            if edge not in g1.edges:
                g1.add_edge(edge)
        optimize_layout(g1)
        optimize_layout(g2)
        for n in g2.nodes:
            assert g1.nodes[n].pos == g2.nodes[n].pos

    def test_oversized_child_center_still_clamped(self):
        g = SceneGraph()
        g.add_node(make_node(1, half=(0.3, 0.3, 0.3)))
        g.add_node(make_node(2, pos=(2.0, 0.0, 1.2), half=(1.0, 1.0, 0.2)))
        g.add_edge(RelationEdge(1, 2, RelationType.ON))
        g, report = optimize_layout(g)
        assert report.converged
        assert stability_violations(g) == []  # center inside despite overhang
