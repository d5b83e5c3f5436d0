// Thin DOM layer: turns store state into elements.  All geometry and
// color math lives in plots.ts.

import {
  arrowGlyphs,
  extremeCells,
  heatColor,
  loopPath,
  normalizeMap,
} from "./plots.js";
import type { AppStore, StoreState } from "./store.js";
import type {
  CandidateView,
  ConfidenceLevel,
  SpectralPayload,
  VectorPayload,
} from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

function el(
  tag: string,
  attrs: Record<string, string> = {},
  ...children: Array<string | Node>
): HTMLElement {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) {
    if (k === "class") node.className = v;
    else node.setAttribute(k, v);
  }
  for (const c of children)
    node.appendChild(typeof c === "string" ? document.createTextNode(c) : c);
  return node;
}

function payloadSvg(view: CandidateView): SVGSVGElement {
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", "0 0 160 120");
  svg.setAttribute("class", "payload-plot");
  if (view.payload_kind === "spectral") {
    const path = document.createElementNS(SVG_NS, "path");
    path.setAttribute(
      "d",
      loopPath(view.payload as SpectralPayload, {
        width: 160,
        height: 120,
        pad: 10,
      }),
    );
    path.setAttribute("class", "loop-path");
    svg.appendChild(path);
    const axis = document.createElementNS(SVG_NS, "text");
    axis.setAttribute("x", "80");
    axis.setAttribute("y", "116");
    axis.setAttribute("class", "axis-label");
    axis.textContent = "voltage";
    svg.appendChild(axis);
  } else {
    const payload = view.payload as VectorPayload;
    const cell = 160 / Math.max(payload.vectors[0]?.length ?? 1, 1);
    for (const a of arrowGlyphs(payload, cell)) {
      const line = document.createElementNS(SVG_NS, "line");
      line.setAttribute("x1", a.x1.toFixed(1));
      line.setAttribute("y1", a.y1.toFixed(1));
      line.setAttribute("x2", a.x2.toFixed(1));
      line.setAttribute("y2", a.y2.toFixed(1));
      const [r, g, b] = heatColor((a.outOfPlane + 1) / 2);
      line.setAttribute("stroke", `rgb(${r},${g},${b})`);
      line.setAttribute("marker-end", "url(#arrowhead)");
      svg.appendChild(line);
    }
  }
  return svg;
}

function candidateCard(view: CandidateView, label: string): HTMLElement {
  const img = el("img", {
    class: "patch-img",
    src: `data:image/png;base64,${view.patch_png}`,
    alt: `patch at (${view.row}, ${view.col})`,
  });
  return el(
    "div",
    { class: "card" },
    el("h3", {}, label),
    img,
    payloadSvg(view),
    el("p", { class: "loc" }, `candidate ${view.candidate_id} @ (${view.row}, ${view.col})`),
  );
}

export function renderComparison(store: AppStore, root: HTMLElement): void {
  root.replaceChildren();
  const s = store.state;
  const item = store.current;
  const badge = el("span", { class: "badge" }, String(s.queue.length));
  root.appendChild(el("div", { class: "queue-line" }, "pending: ", badge));
  if (!item) {
    root.appendChild(el("p", { class: "status" }, s.statusLine));
    return;
  }
  const pair = el(
    "div",
    { class: "pair" },
    candidateCard(item.a, "A"),
    candidateCard(item.b, "B"),
  );
  root.appendChild(pair);

  const confidence = el("select", { id: "confidence" });
  for (const level of ["WEAK", "MODERATE", "STRONG"]) {
    const opt = el("option", { value: level }, level.toLowerCase());
    if (level === "STRONG") opt.setAttribute("selected", "selected");
    confidence.appendChild(opt);
  }
  const buttons = el("div", { class: "buttons" });
  const disabled = s.phase === "submitting";
  const mk = (label: string, outcome: "A" | "B" | "TIE") => {
    const btn = el("button", { class: "judge-btn" }, label) as HTMLButtonElement;
    btn.disabled = disabled;
    btn.addEventListener("click", () => {
      const level = (confidence as HTMLSelectElement).value as ConfidenceLevel;
      void store.submitCurrent(outcome, level);
    });
    return btn;
  };
  buttons.appendChild(mk("A is better", "A"));
  if (store.tieAllowed) buttons.appendChild(mk("Tie", "TIE"));
  buttons.appendChild(mk("B is better", "B"));
  root.appendChild(buttons);
  root.appendChild(el("label", { class: "conf-label" }, "confidence: ", confidence));
  root.appendChild(el("p", { class: "status" }, s.statusLine));
}

function heatmapCanvas(values: number[][], overlay: StoreState): HTMLCanvasElement {
  const h = values.length;
  const w = values[0]?.length ?? 0;
  const canvas = el("canvas", {
    width: String(w),
    height: String(h),
    class: "heatmap",
  }) as HTMLCanvasElement;
  const ctx = canvas.getContext("2d");
  if (!ctx) return canvas;
  const img = ctx.createImageData(w, h);
  const normed = normalizeMap(values);
  for (let r = 0; r < h; r++)
    for (let c = 0; c < w; c++) {
      const [cr, cg, cb] = heatColor(normed[r][c]);
      const o = (r * w + c) * 4;
      img.data[o] = cr;
      img.data[o + 1] = cg;
      img.data[o + 2] = cb;
      img.data[o + 3] = 255;
    }
  ctx.putImageData(img, 0, 0);
  return canvas;
}

export interface MapToggles {
  topK: boolean;
  bottomK: boolean;
  k: number;
}

export function renderMaps(
  store: AppStore,
  root: HTMLElement,
  toggles: MapToggles,
): void {
  root.replaceChildren();
  const s = store.state;
  const snap = s.snapshot;
  if (!snap) {
    root.appendChild(el("p", {}, "no state yet"));
    return;
  }
  const head = el(
    "div",
    { class: "map-head" },
    el("span", {}, `step ${snap.step}/${snap.n_steps}`),
    el("span", {}, ` beta ${snap.beta ?? "-"}`),
    el("span", {}, ` measured ${snap.measured.length}`),
    el(
      "span",
      {},
      snap.current_best === null ? "" : ` best #${snap.current_best}`,
    ),
  );
  root.appendChild(head);
  if (s.blindMode && s.phase === "judging") {
    root.appendChild(
      el("p", { class: "blind-note" }, "maps hidden while judging (blind mode)"),
    );
    return;
  }
  if (!snap.utility_mean || !snap.utility_variance) return;
  for (const [title, grid] of [
    ["utility mean", snap.utility_mean],
    ["utility variance", snap.utility_variance],
  ] as const) {
    const panel = el("div", { class: "map-panel" }, el("h4", {}, title));
    const wrap = el("div", { class: "map-wrap" });
    wrap.appendChild(heatmapCanvas(grid, s));
    const marks = el("div", { class: "marks" });
    for (const m of snap.measured) {
      const dot = el("i", { class: "measured-dot" });
      dot.style.left = `${((m.col + 0.5) / snap.width) * 100}%`;
      dot.style.top = `${((m.row + 0.5) / snap.height) * 100}%`;
      marks.appendChild(dot);
    }
    if (title === "utility mean") {
      for (const [on, lowest, cls] of [
        [toggles.topK, false, "topk-dot"],
        [toggles.bottomK, true, "bottomk-dot"],
      ] as const) {
        if (!on) continue;
        for (const cell of extremeCells(grid, toggles.k, lowest)) {
          const dot = el("i", { class: cls });
          dot.style.left = `${((cell.col + 0.5) / snap.width) * 100}%`;
          dot.style.top = `${((cell.row + 0.5) / snap.height) * 100}%`;
          marks.appendChild(dot);
        }
      }
    }
    wrap.appendChild(marks);
    panel.appendChild(wrap);
    root.appendChild(panel);
  }
}
