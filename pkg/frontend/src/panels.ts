// DOM side panels: scene graph inspector, layout-correction report, status
// bar, and a dismissible error banner. Plain DOM, no framework.

import type { ViewState } from "./state.js";

export class Panels {
  private readonly graphEl: HTMLElement;
  private readonly reportEl: HTMLElement;
  private readonly statusEl: HTMLElement;
  private readonly bannerEl: HTMLElement;

  constructor(root: Document = document) {
    this.graphEl = must(root.getElementById("graph-panel"));
    this.reportEl = must(root.getElementById("report-panel"));
    this.statusEl = must(root.getElementById("status-bar"));
    this.bannerEl = must(root.getElementById("error-banner"));
    this.bannerEl.addEventListener("click", () => {
      this.bannerEl.hidden = true;
    });
  }

  render(state: ViewState): void {
    this.graphEl.hidden = !state.panels.graphPanel;
    this.reportEl.hidden = !state.panels.reportPanel;
    this.statusEl.textContent = state.sessionId
      ? `session ${state.sessionId} - revision ${state.lastRevision}` + (state.busy ? " - working..." : "")
      : "no session";

    if (state.error) {
      this.bannerEl.textContent = `${state.error} (click to dismiss)`;
      this.bannerEl.hidden = false;
    }

    const byNid = new Map(state.view.boxes.map((b) => [b.nid, b]));
    const parents = new Map(state.view.connectors.map((c) => [c.dst, c.src]));
    this.graphEl.replaceChildren(
      ...state.view.boxes.map((b) => {
        const li = document.createElement("li");
        const parent = parents.get(b.nid);
        li.textContent =
          `#${b.nid} ${b.category}` + (parent !== undefined ? ` (on #${parent} ${byNid.get(parent)?.category ?? "?"})` : "");
        if (b.selected) li.classList.add("selected");
        if (b.highlighted) li.classList.add("highlighted");
        li.dataset.nid = String(b.nid);
        return li;
      }),
    );

    const report = state.view.lastReport;
    const lines: string[] = [];
    if (report) {
      lines.push(`${report.corrections.length} correction(s), ${report.passes} pass(es), ${report.converged ? "converged" : "not converged"}`);
      for (const c of report.corrections) {
        const mag = Math.hypot(c.delta[0], c.delta[1], c.delta[2]);
        lines.push(`  ${c.reason}: #${c.nid} moved ${mag.toFixed(3)} m`);
      }
    }
    for (const w of state.view.warnings) lines.push(`warning: ${w}`);
    for (const [src, dst] of state.view.violations) lines.push(`unstable: #${dst} off #${src}`);
    this.reportEl.textContent = lines.join("\n") || "no layout report yet";
  }
}

function must<T>(el: T | null): T {
  if (el === null) throw new Error("missing viewer DOM element");
  return el;
}
