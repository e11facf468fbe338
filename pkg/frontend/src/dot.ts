// The service ships DOT text with every /state response; Graphviz runs
// client-side. Falls back to the raw text if the WASM engine is missing.

import { instance } from "@viz-js/viz";

type Viz = Awaited<ReturnType<typeof instance>>;

let viz: Viz | null = null;

export async function renderDot(dot: string): Promise<Element> {
  try {
    viz ??= await instance();
    return viz.renderSVGElement(dot);
  } catch {
    const pre = document.createElement("pre");
    pre.className = "dot-text";
    pre.textContent = dot;
    return pre;
  }
}
