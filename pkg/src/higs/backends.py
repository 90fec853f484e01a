"""Generation backends behind the step pipeline.

The engine never runs perception or image models itself; it talks to five
adapter stages (object listing, scene prompting, image generation, object
reconstruction, relation estimation). Two implementations ship here:

* a deterministic procedural backend that synthesizes plausible-but-imperfect
  layouts from a noun catalog — poses jittered off support surfaces and
  headings jittered off the orthogonal family, so alignment and stability
  correction always have real work to do;
* HTTP adapters that speak a small JSON contract to external services, with
  responses validated against the same schemas the procedural backend obeys.
"""

from dataclasses import dataclass
import hashlib
import math
import os
import random
import re
from typing import Callable

import requests

from .errors import AdapterFailureError
from .graph import RelationEdge, RelationType, relation_from_string

#: Step-0 prompt fragment forcing a structure-revealing viewpoint.
ISO_FRAGMENT = "isometric view of the whole scene"

_SD_MARKER = "contains: "
_SD_EMPTY = "nothing new"


@dataclass(frozen=True)
class ObjectSpec:
    """One requested object kind: category, rough full extents (m), count."""

    category: str
    approx_extents: tuple[float, float, float]
    count: int = 1


@dataclass(frozen=True)
class PerceivedObject:
    """Reconstructed object instance: pose, half extents, uniform scale."""

    category: str
    pos: tuple[float, float, float]
    yaw: float
    half_extents: tuple[float, float, float]
    scale: float = 1.0


@dataclass
class BackendAdapters:
    """The five pipeline stages. Each must be deterministic given its inputs
    (the step seed is threaded through image generation into the artifact
    handle, so reconstruction jitter is a pure function of the handle)."""

    object_lister: Callable[[str, str], list[ObjectSpec]]
    scene_prompter: Callable[[list[ObjectSpec], str], str]
    image_generator: Callable[[str, int], str]
    reconstructor: Callable[[str], list[PerceivedObject]]
    relation_estimator: Callable[[list[PerceivedObject]], list[RelationEdge]]
    name: str = "backend"


# --------------------------------------------------------------------------
# Procedural backend
# --------------------------------------------------------------------------

#: Noun -> local half extents (meters). Sizes are desk-scale realistic.
CATALOG: dict[str, tuple[float, float, float]] = {
    "bed": (0.95, 0.70, 0.25),
    "desk": (0.60, 0.35, 0.375),
    "table": (0.70, 0.45, 0.37),
    "chair": (0.25, 0.25, 0.45),
    "wardrobe": (0.50, 0.30, 1.00),
    "sofa": (1.00, 0.45, 0.40),
    "rug": (0.80, 0.60, 0.01),
    "nightstand": (0.25, 0.20, 0.30),
    "bookshelf": (0.40, 0.15, 0.90),
    "lamp": (0.09, 0.09, 0.20),
    "book": (0.11, 0.09, 0.02),
    "mug": (0.045, 0.045, 0.05),
    "plant": (0.15, 0.15, 0.30),
    "monitor": (0.30, 0.08, 0.25),
    "keyboard": (0.22, 0.08, 0.015),
    "tent": (1.20, 1.00, 0.90),
    "campfire": (0.40, 0.40, 0.15),
    "lantern": (0.07, 0.07, 0.12),
    "stool": (0.18, 0.18, 0.22),
    "crate": (0.25, 0.25, 0.20),
}

#: Furniture that tends to sit against the room boundary.
WALL_HUGGERS = {"bed", "desk", "wardrobe", "sofa", "bookshelf", "nightstand"}

FLOOR_HALF_EXTENTS = (3.0, 3.0, 0.05)

_NUMBER_WORDS = {"one": 1, "two": 2, "three": 3, "four": 4, "five": 5, "six": 6}

#: Estimator tolerances, sized to cover the synthesizer's jitter.
_SUPPORT_GAP_TOL = 0.45
_SUPPORT_MARGIN = 0.45


def extract_object_specs(text: str) -> list[ObjectSpec]:
    """Scan free text for catalog nouns; unknown vocabulary yields nothing."""
    tokens = re.findall(r"[a-z]+", text.lower())
    counts: dict[str, int] = {}
    order: list[str] = []
    pending = 1
    for tok in tokens:
        if tok in _NUMBER_WORDS:
            pending = _NUMBER_WORDS[tok]
            continue
        noun = tok if tok in CATALOG else (tok[:-1] if tok.endswith("s") and tok[:-1] in CATALOG else None)
        if noun is not None:
            if noun not in counts:
                counts[noun] = 0
                order.append(noun)
            counts[noun] += pending
        pending = 1
    return [
        ObjectSpec(
            category=noun,
            approx_extents=tuple(2.0 * h for h in CATALOG[noun]),
            count=counts[noun],
        )
        for noun in order
    ]


def specs_to_prompt(objects: list[ObjectSpec], constraints: str) -> str:
    """Render the object list into the scene-description prompt fragment."""
    if not objects:
        return _SD_MARKER + _SD_EMPTY
    return _SD_MARKER + ", ".join(f"{o.category} x{o.count}" for o in objects)


def _prompt_specs(prompt: str) -> list[ObjectSpec]:
    idx = prompt.rfind(_SD_MARKER)
    if idx < 0:
        return []
    listing = prompt[idx + len(_SD_MARKER):]
    specs = []
    for item in listing.split(","):
        m = re.fullmatch(r"\s*([a-z]+) x(\d+)\s*", item)
        if m and m.group(1) in CATALOG:
            specs.append(
                ObjectSpec(
                    category=m.group(1),
                    approx_extents=tuple(2.0 * h for h in CATALOG[m.group(1)]),
                    count=int(m.group(2)),
                )
            )
    return specs


class ProceduralBackend:
    """Seeded, model-free stand-in for the perception/generation stack.

    Image generation stores the prompt under a content-addressed handle;
    reconstruction replays it into object poses using an RNG derived from the
    handle alone, so every stage is reproducible from (inputs, seed).
    """

    def __init__(self, base_seed: int = 0):
        self.base_seed = int(base_seed)
        self._artifacts: dict[str, str] = {}

    def adapters(self) -> BackendAdapters:
        return BackendAdapters(
            object_lister=self.list_objects,
            scene_prompter=specs_to_prompt,
            image_generator=self.generate_image,
            reconstructor=self.reconstruct,
            relation_estimator=estimate_relations,
            name=f"procedural:{self.base_seed}",
        )

    def list_objects(self, scene_text: str, global_text: str) -> list[ObjectSpec]:
        return extract_object_specs(scene_text)

    def generate_image(self, prompt: str, seed: int) -> str:
        digest = hashlib.sha256(f"{self.base_seed}:{seed}:{prompt}".encode()).hexdigest()
        handle = f"img-{digest[:16]}"
        self._artifacts[handle] = prompt
        return handle

    def reconstruct(self, handle: str) -> list[PerceivedObject]:
        try:
            prompt = self._artifacts[handle]
        except KeyError:
            raise AdapterFailureError("reconstructor", "remote", f"unknown artifact {handle}") from None
        rng = random.Random(handle)
        specs = _prompt_specs(prompt)
        initial = prompt.startswith(ISO_FRAGMENT)

        out: list[PerceivedObject] = []
        instances: list[str] = [s.category for s in specs for _ in range(s.count)]

        if initial:
            fx, fy, fz = FLOOR_HALF_EXTENTS
            out.append(PerceivedObject("floor", (0.0, 0.0, fz), 0.0, FLOOR_HALF_EXTENTS, 1.0))
            base_half = (fx, fy)
            base_top = 2.0 * fz
            on_base = instances
            beside: list[str] = []
        else:
            if not instances:
                return []
            # Largest footprint becomes the base the rest lean on.
            instances.sort(key=lambda c: -(CATALOG[c][0] * CATALOG[c][1]))
            base_cat = instances[0]
            scale = rng.uniform(0.9, 1.1)
            bh = CATALOG[base_cat]
            out.append(
                PerceivedObject(
                    base_cat,
                    (0.0, 0.0, bh[2] * scale + rng.uniform(-0.1, 0.3)),
                    _family_yaw(rng),
                    bh,
                    scale,
                )
            )
            base_half = (bh[0] * scale, bh[1] * scale)
            base_top = 2.0 * bh[2] * scale
            base_area = bh[0] * bh[1]
            on_base = [c for c in instances[1:] if CATALOG[c][0] * CATALOG[c][1] <= 0.3 * base_area]
            beside = [c for c in instances[1:] if CATALOG[c][0] * CATALOG[c][1] > 0.3 * base_area]

        for cat in on_base:
            scale = rng.uniform(0.9, 1.1)
            h = CATALOG[cat]
            if initial and cat not in WALL_HUGGERS:
                # interior placement, comfortably inside
                x = rng.uniform(-0.5 * base_half[0], 0.5 * base_half[0])
                y = rng.uniform(-0.5 * base_half[1], 0.5 * base_half[1])
            else:
                # near (and sometimes past) the support edge
                overshoot = rng.uniform(-0.2, 0.2) if initial else rng.uniform(-0.05, 0.30)
                x, y = _edge_point(rng, base_half, overshoot)
            z = base_top + h[2] * scale + rng.uniform(-0.2, 0.3)
            out.append(PerceivedObject(cat, (x, y, z), _family_yaw(rng), h, scale))

        ring = max(base_half) + 0.9
        for cat in beside:
            scale = rng.uniform(0.9, 1.1)
            h = CATALOG[cat]
            angle = rng.uniform(0.0, 2.0 * math.pi)
            x, y = ring * math.cos(angle), ring * math.sin(angle)
            z = h[2] * scale + rng.uniform(-0.1, 0.3)
            out.append(PerceivedObject(cat, (x, y, z), _family_yaw(rng), h, scale))
        return out


def _family_yaw(rng: random.Random) -> float:
    """A right-angle family member, jittered by up to 10 degrees."""
    return rng.randrange(4) * math.pi / 2.0 + math.radians(rng.uniform(-10.0, 10.0))


def _edge_point(rng: random.Random, half: tuple[float, float], overshoot: float) -> tuple[float, float]:
    """Point near the rectangle boundary, pushed outward by ``overshoot``."""
    side = rng.randrange(4)
    t = rng.uniform(-0.8, 0.8)
    if side == 0:
        return half[0] + overshoot, t * half[1]
    if side == 1:
        return -half[0] - overshoot, t * half[1]
    if side == 2:
        return t * half[0], half[1] + overshoot
    return t * half[0], -half[1] - overshoot


def estimate_relations(objects: list[PerceivedObject]) -> list[RelationEdge]:
    """Infer 'On' support edges from the perceived poses.

    A child rests on the candidate supporter with a larger footprint whose
    top face is nearest the child's bottom, provided the child center falls
    within the supporter's (margin-expanded) footprint. Indices into
    ``objects`` double as local nids.
    """
    edges: list[RelationEdge] = []
    for j, child in enumerate(objects):
        child_bottom = child.pos[2] - child.half_extents[2] * child.scale
        child_area = child.half_extents[0] * child.half_extents[1] * child.scale**2
        best: tuple[float, int] | None = None
        for i, parent in enumerate(objects):
            if i == j:
                continue
            p_area = parent.half_extents[0] * parent.half_extents[1] * parent.scale**2
            if p_area <= child_area:
                continue
            p_top = parent.pos[2] + parent.half_extents[2] * parent.scale
            gap = abs(child_bottom - p_top)
            if gap > _SUPPORT_GAP_TOL:
                continue
            dx = child.pos[0] - parent.pos[0]
            dy = child.pos[1] - parent.pos[1]
            c, s = math.cos(-parent.yaw), math.sin(-parent.yaw)
            lx, ly = c * dx - s * dy, s * dx + c * dy
            hx = parent.half_extents[0] * parent.scale + _SUPPORT_MARGIN
            hy = parent.half_extents[1] * parent.scale + _SUPPORT_MARGIN
            if abs(lx) > hx or abs(ly) > hy:
                continue
            if best is None or gap < best[0]:
                best = (gap, i)
        if best is not None:
            edges.append(RelationEdge(src=best[1], dst=j, relation=RelationType.ON))
    return edges


def procedural_backend(seed: int = 0) -> BackendAdapters:
    """Deterministic catalog-driven adapters (see :class:`ProceduralBackend`)."""
    return ProceduralBackend(seed).adapters()


# --------------------------------------------------------------------------
# External HTTP adapters
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class EndpointSpec:
    """Where the five remote stages live and how to reach them."""

    object_lister_url: str
    scene_prompter_url: str
    image_generator_url: str
    reconstructor_url: str
    relation_estimator_url: str
    timeout_s: float = 30.0
    auth_token_env: str | None = None


def parse_object_specs(payload) -> list[ObjectSpec]:
    """Validate an object-list response: {"objects":[{category,extents,count}]}."""
    items = _expect_list(payload, "objects", "object_lister")
    out = []
    for i, item in enumerate(items):
        cat = _expect_str(item, "category", "object_lister", i)
        extents = _expect_vec3(item, "extents", "object_lister", i, positive=True)
        count = item.get("count", 1)
        if not isinstance(count, int) or isinstance(count, bool) or count < 1:
            raise AdapterFailureError("object_lister", "bad_schema", f"objects[{i}].count must be int >= 1")
        out.append(ObjectSpec(category=cat, approx_extents=extents, count=count))
    return out


def parse_perceived(payload) -> list[PerceivedObject]:
    """Validate a reconstruction response: {"objects":[{category,pos,yaw,halfExtents,scale}]}."""
    items = _expect_list(payload, "objects", "reconstructor")
    out = []
    for i, item in enumerate(items):
        cat = _expect_str(item, "category", "reconstructor", i)
        pos = _expect_vec3(item, "pos", "reconstructor", i)
        half = _expect_vec3(item, "halfExtents", "reconstructor", i, positive=True)
        yaw = item.get("yaw", 0.0)
        scale = item.get("scale", 1.0)
        if not isinstance(yaw, (int, float)) or not math.isfinite(yaw):
            raise AdapterFailureError("reconstructor", "bad_schema", f"objects[{i}].yaw not a finite number")
        if not isinstance(scale, (int, float)) or not math.isfinite(scale) or scale <= 0:
            raise AdapterFailureError("reconstructor", "bad_schema", f"objects[{i}].scale must be > 0")
        out.append(PerceivedObject(category=cat, pos=pos, yaw=float(yaw), half_extents=half, scale=float(scale)))
    return out


def parse_relation_edges(payload) -> list[RelationEdge]:
    """Validate a relation response: {"edges":[{src,dst,relation}]}."""
    items = _expect_list(payload, "edges", "relation_estimator")
    out = []
    for i, item in enumerate(items):
        src, dst = item.get("src"), item.get("dst")
        for name, v in (("src", src), ("dst", dst)):
            if not isinstance(v, int) or isinstance(v, bool):
                raise AdapterFailureError("relation_estimator", "bad_schema", f"edges[{i}].{name} must be int")
        rel_text = _expect_str(item, "relation", "relation_estimator", i)
        relation, label = relation_from_string(rel_text)
        out.append(RelationEdge(src=src, dst=dst, relation=relation, label=label))
    return out


def external_adapter_config(spec: EndpointSpec) -> BackendAdapters:
    """Adapters that POST JSON to remote stage endpoints.

    Failures surface as :class:`AdapterFailureError` with the stage name and
    a kind of timeout / remote / bad_schema; responses are checked against
    the same schemas the procedural backend satisfies.
    """
    headers = {}
    if spec.auth_token_env:
        token = os.environ.get(spec.auth_token_env, "")
        if token:
            headers["Authorization"] = f"Bearer {token}"

    def post(stage: str, url: str, payload: dict) -> dict:
        try:
            resp = requests.post(url, json=payload, timeout=spec.timeout_s, headers=headers)
        except requests.Timeout:
            raise AdapterFailureError(stage, "timeout", f"no response within {spec.timeout_s}s") from None
        except requests.RequestException as exc:
            raise AdapterFailureError(stage, "remote", str(exc)) from None
        if resp.status_code != 200:
            raise AdapterFailureError(stage, "remote", f"HTTP {resp.status_code}")
        try:
            return resp.json()
        except ValueError:
            raise AdapterFailureError(stage, "bad_schema", "response is not JSON") from None

    def object_lister(scene_text: str, global_text: str) -> list[ObjectSpec]:
        return parse_object_specs(
            post("object_lister", spec.object_lister_url, {"text": scene_text, "global": global_text})
        )

    def scene_prompter(objects: list[ObjectSpec], constraints: str) -> str:
        payload = {
            "objects": [
                {"category": o.category, "extents": list(o.approx_extents), "count": o.count}
                for o in objects
            ],
            "constraints": constraints,
        }
        data = post("scene_prompter", spec.scene_prompter_url, payload)
        prompt = data.get("prompt")
        if not isinstance(prompt, str):
            raise AdapterFailureError("scene_prompter", "bad_schema", "missing 'prompt' string")
        return prompt

    def image_generator(prompt: str, seed: int) -> str:
        data = post("image_generator", spec.image_generator_url, {"prompt": prompt, "seed": seed})
        handle = data.get("handle")
        if not isinstance(handle, str) or not handle:
            raise AdapterFailureError("image_generator", "bad_schema", "missing 'handle' string")
        return handle

    def reconstructor(handle: str) -> list[PerceivedObject]:
        return parse_perceived(post("reconstructor", spec.reconstructor_url, {"handle": handle}))

    def relation_estimator(objects: list[PerceivedObject]) -> list[RelationEdge]:
        payload = {
            "objects": [
                {
                    "category": o.category,
                    "pos": list(o.pos),
                    "yaw": o.yaw,
                    "halfExtents": list(o.half_extents),
                    "scale": o.scale,
                }
                for o in objects
            ]
        }
        return parse_relation_edges(post("relation_estimator", spec.relation_estimator_url, payload))

    return BackendAdapters(
        object_lister=object_lister,
        scene_prompter=scene_prompter,
        image_generator=image_generator,
        reconstructor=reconstructor,
        relation_estimator=relation_estimator,
        name="external",
    )


def _expect_list(payload, key: str, stage: str) -> list:
    if not isinstance(payload, dict) or not isinstance(payload.get(key), list):
        raise AdapterFailureError(stage, "bad_schema", f"missing '{key}' array")
    return payload[key]


def _expect_str(item, key: str, stage: str, i: int) -> str:
    v = item.get(key) if isinstance(item, dict) else None
    if not isinstance(v, str) or not v:
        raise AdapterFailureError(stage, "bad_schema", f"[{i}].{key} must be a non-empty string")
    return v


def _expect_vec3(item, key: str, stage: str, i: int, positive: bool = False) -> tuple[float, float, float]:
    v = item.get(key) if isinstance(item, dict) else None
    if not isinstance(v, (list, tuple)) or len(v) != 3 or not all(isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x) for x in v):
        raise AdapterFailureError(stage, "bad_schema", f"[{i}].{key} must be a 3-vector")
    if positive and any(x <= 0 for x in v):
        raise AdapterFailureError(stage, "bad_schema", f"[{i}].{key} must be positive")
    return float(v[0]), float(v[1]), float(v[2])
