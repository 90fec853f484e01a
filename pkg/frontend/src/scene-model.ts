// Pure mapping from scene documents to a renderable box model. Keeping this
// free of three.js lets the whole pipeline run (and be tested) headlessly;
// the renderer only rasterizes what this module produces.

import { enginePosToRender, engineSizeToRender, engineYawToRender } from "./frame.js";
import { STRONG_RELATIONS, type NodeJson, type SceneDoc, type Vec3 } from "./types.js";

export interface BoxInstance {
  nid: number;
  category: string;
  center: Vec3; // renderer frame
  size: Vec3; // renderer frame, full extents (halfExtents * scale * 2)
  yawY: number; // rotation about renderer +Y
  highlighted: boolean;
  selected: boolean;
}

export interface Connector {
  src: number;
  dst: number;
  from: Vec3; // renderer frame
  to: Vec3;
}

export function nodeToBox(node: NodeJson, highlighted = false, selected = false): BoxInstance {
  const size: Vec3 = [
    2 * node.halfExtents[0] * node.scale,
    2 * node.halfExtents[1] * node.scale,
    2 * node.halfExtents[2] * node.scale,
  ];
  return {
    nid: node.nid,
    category: node.category,
    center: enginePosToRender(node.pos),
    size: engineSizeToRender(size),
    yawY: engineYawToRender(node.rot[2]),
    highlighted,
    selected,
  };
}

export function sceneToBoxes(
  doc: SceneDoc,
  highlight: ReadonlySet<number> = new Set(),
  selection: number | null = null,
): BoxInstance[] {
  return doc.nodes.map((n) => nodeToBox(n, highlight.has(n.nid), selection === n.nid));
}

/** Parent -> child connector segments for the strong dependency edges. */
export function strongConnectors(doc: SceneDoc): Connector[] {
  const byNid = new Map(doc.nodes.map((n) => [n.nid, n]));
  const out: Connector[] = [];
  for (const e of doc.edges) {
    if (!STRONG_RELATIONS.has(e.relation)) continue;
    const a = byNid.get(e.src);
    const b = byNid.get(e.dst);
    if (!a || !b) continue;
    out.push({ src: e.src, dst: e.dst, from: enginePosToRender(a.pos), to: enginePosToRender(b.pos) });
  }
  return out;
}

/** Nids present in the document; used to validate the selection invariant. */
export function sceneNids(doc: SceneDoc): Set<number> {
  return new Set(doc.nodes.map((n) => n.nid));
}
