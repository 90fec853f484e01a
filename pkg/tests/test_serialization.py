"""Canonical scene/session files: round trips, byte identity, diagnostics."""

import json
import random

import pytest

from higs.backends import ProceduralBackend
from higs.errors import CorruptFileError, SchemaVersionMismatchError
from higs.graph import RelationEdge, RelationType, SceneGraph
from higs.pipeline import FLOOR_ANCHOR, SceneSession, graphs_identical, run_step
from higs.serialization import (
    canon_float,
    load_scene,
    load_session,
    save_scene,
    save_session,
)

from conftest import make_node, random_forest


class TestSceneRoundTrip:
    def test_empty_graph(self):
        g = SceneGraph()
        data = save_scene(g)
        doc = json.loads(data)
        assert doc["version"] == "higs-scene/1"
        assert doc["nodes"] == [] and doc["edges"] == [] and doc["relTransforms"] == []
        assert graphs_identical(load_scene(data), g)

    def test_random_graphs_structural_equality(self, rng):
        for _ in range(60):
            g = random_forest(rng, n_roots=rng.randint(1, 3), max_depth=3)
            nids = sorted(g.nodes)
            if len(nids) >= 2:
                a, b = rng.sample(nids, 2)
                edge = RelationEdge(a, b, RelationType.OTHER, label="leaning against")
                if a != b and edge not in g.edges:
                    g.add_edge(edge)
            loaded = load_scene(save_scene(g))
            assert loaded.validate() == []
            # canonical floats survive, so a re-save is byte-identical
            assert save_scene(loaded) == save_scene(load_scene(save_scene(loaded)))
            assert set(loaded.nodes) == set(g.nodes)
            assert {(e.src, e.dst, e.relation, e.label) for e in loaded.edges} == {
                (e.src, e.dst, e.relation, e.label) for e in g.edges
            }

    def test_resave_byte_identical(self, rng):
        for _ in range(30):
            g = random_forest(rng, n_roots=2, max_depth=3)
            first = save_scene(g)
            assert save_scene(load_scene(first)) == first

    def test_meta_preserved(self):
        g = SceneGraph()
        g.add_node(make_node(1))
        data = save_scene(g, created="2026-08-10T00:00:00Z", seed=9, step_count=4)
        doc = json.loads(data)
        assert doc["meta"] == {"created": "2026-08-10T00:00:00Z", "seed": 9, "stepCount": 4}

    def test_identical_graphs_serialize_identically(self):
        def build(edge_order):
            g = SceneGraph()
            for i in (1, 2, 3):
                g.add_node(make_node(i, pos=(i, 0, 0.5)))
            for src, dst in edge_order:
                g.add_edge(RelationEdge(src, dst, RelationType.ADJACENT))
            return g

        assert save_scene(build([(1, 2), (2, 3)])) == save_scene(build([(2, 3), (1, 2)]))


class TestCanonFloat:
    def test_idempotent(self):
        rng = random.Random(0)
        for _ in range(10000):
            x = rng.uniform(-1e6, 1e6) * 10 ** rng.randint(-9, 3)
            once = canon_float(x)
            assert canon_float(once) == once

    def test_negative_zero_folded(self):
        assert str(canon_float(-0.0)) == "0.0"


class TestErrors:
    def test_truncated_file(self):
        g = SceneGraph()
        g.add_node(make_node(1))
        data = save_scene(g)[:-40]
        with pytest.raises(CorruptFileError):
            load_scene(data)

    def test_version_mismatch(self):
        doc = {"version": "higs-scene/999", "meta": {}, "nodes": [], "edges": [], "relTransforms": []}
        with pytest.raises(SchemaVersionMismatchError):
            load_scene(json.dumps(doc).encode())

    def test_missing_field_named(self):
        doc = {"version": "higs-scene/1", "meta": {}, "nodes": [{"nid": 1}], "edges": [], "relTransforms": []}
        with pytest.raises(CorruptFileError) as err:
            load_scene(json.dumps(doc).encode())
        assert "category" in str(err.value)

    def test_invariant_breach_reported(self):
        doc = {
            "version": "higs-scene/1",
            "meta": {},
            "nodes": [
                {"nid": 1, "category": "a", "pos": [0, 0, 0], "rot": [0, 0, 0], "scale": 1.0, "halfExtents": [1, 1, 1]}
            ],
            "edges": [{"src": 1, "dst": 2, "relation": "on"}],
            "relTransforms": [],
        }
        with pytest.raises(CorruptFileError) as err:
            load_scene(json.dumps(doc).encode())
        assert "unknown_nid" in str(err.value)

    def test_not_json(self):
        with pytest.raises(CorruptFileError):
            load_scene(b"\x00\x01 not json")


class TestSessionFiles:
    def build_session(self, seed=31):
        s = SceneSession(session_id="file-test", adapters=ProceduralBackend(seed).adapters(), backend_seed=seed)
        run_step(s, FLOOR_ANCHOR, "a bedroom with a bed, a desk and a rug", seed)
        desk = min(n for n, node in s.global_graph.nodes.items() if node.category == "desk")
        run_step(s, desk, "a lamp and a book", seed + 1)
        return s

    def test_round_trip(self):
        s = self.build_session()
        data = save_session(s)
        loaded = load_session(data, adapters=s.adapters)
        assert loaded.session_id == s.session_id
        assert loaded.backend_seed == s.backend_seed
        assert loaded.style_text == s.style_text
        assert len(loaded.log) == len(s.log)
        assert graphs_identical(loaded.global_graph, load_scene(save_scene(s.global_graph)))
        assert save_session(loaded) == data

    def test_embedded_scene_matches_replay(self):
        from higs.pipeline import replay

        s = self.build_session(seed=8)
        data = save_session(s)
        loaded = load_session(data, adapters=None)
        g = replay(loaded.log, ProceduralBackend(loaded.backend_seed).adapters())
        assert save_scene(g) == save_scene(loaded.global_graph)

    def test_session_version_checked(self):
        s = self.build_session()
        doc = json.loads(save_session(s))
        doc["version"] = "something/2"
        with pytest.raises(SchemaVersionMismatchError):
            load_session(json.dumps(doc).encode(), adapters=None)
