// Page assembly and rendering. Every panel is redrawn from the store's
// last fetched state; user actions go to the service and the view
// re-renders from the refreshed response, never from local computation.

import { ServiceError } from "./api";
import { renderDot } from "./dot";
import { Editor } from "./editor";
import { SessionStore } from "./session";
import type { AnalysisOptions, SpaceReportJson, StateResponse, TokenJson } from "./types";

export interface AppOptions {
  store: SessionStore;
  renderDot?: (dot: string) => Promise<Element>;
  saveFile?: (name: string, text: string) => void;
}

export function formatValue(value: unknown): string {
  if (Array.isArray(value)) return `(${value.map(formatValue).join(", ")})`;
  return String(value);
}

export function chipText(token: TokenJson): string {
  return `${formatValue(token.value)}@${token.timestamp ?? 0}`;
}

function formatBinding(binding: Record<string, unknown>): string {
  const parts = Object.keys(binding)
    .sort()
    .map((name) => `${name} = ${formatValue(binding[name])}`);
  return `{${parts.join(", ")}}`;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function downloadFile(name: string, text: string): void {
  const blob = new Blob([text], { type: "application/json" });
  const url = URL.createObjectURL(blob);
  const anchor = document.createElement("a");
  anchor.href = url;
  anchor.download = name;
  anchor.click();
  URL.revokeObjectURL(url);
}

export class App {
  readonly store: SessionStore;
  readonly editor: Editor;

  private readonly renderDotFn: (dot: string) => Promise<Element>;
  private readonly saveFileFn: (name: string, text: string) => void;

  private lastAction: Promise<void> = Promise.resolve();
  private canvasReady: Promise<void> = Promise.resolve();

  private clockBadge!: HTMLElement;
  private canvas!: HTMLElement;
  private markingPanel!: HTMLElement;
  private enabledList!: HTMLElement;
  private statusNote!: HTMLElement;
  private advanceBtn!: HTMLButtonElement;
  private undoBtn!: HTMLButtonElement;
  private resetBtn!: HTMLButtonElement;
  private exportBtn!: HTMLButtonElement;
  private toastArea!: HTMLElement;
  private maxStatesInput!: HTMLInputElement;
  private stripTimeToggle!: HTMLInputElement;
  private analysisNotice!: HTMLElement;
  private truncationWarning!: HTMLElement;
  private analysisBody!: HTMLTableSectionElement;

  constructor(root: HTMLElement, options: AppOptions) {
    this.store = options.store;
    this.renderDotFn = options.renderDot ?? renderDot;
    this.saveFileFn = options.saveFile ?? downloadFile;
    this.editor = new Editor((doc) => this.store.load(doc));
    root.append(this.build());
    this.store.onChange(() => this.renderSession());
    this.renderSession();
  }

  /** Settles once the last user action and the canvas redraw finish. */
  async idle(): Promise<void> {
    await this.lastAction;
    await this.canvasReady;
  }

  fire(transition: string, binding?: Record<string, unknown>): Promise<void> {
    return this.act(() => this.store.fire(transition, binding));
  }

  advance(): Promise<void> {
    return this.act(() => this.store.advance());
  }

  undo(): Promise<void> {
    return this.act(() => this.store.undo());
  }

  reset(): Promise<void> {
    return this.act(() => this.store.reset());
  }

  exportDocument(): Promise<void> {
    return this.act(async () => {
      const text = await this.store.exportText();
      this.saveFileFn("net.json", text);
    });
  }

  runAnalysis(): Promise<void> {
    return this.act(async () => {
      this.analysisNotice.textContent = "";
      this.truncationWarning.hidden = true;
      const options: AnalysisOptions = { stripTime: this.stripTimeToggle.checked };
      const maxStates = Number.parseInt(this.maxStatesInput.value, 10);
      if (!Number.isNaN(maxStates)) options.maxStates = maxStates;
      try {
        this.renderReport(await this.store.analysis(options));
      } catch (e) {
        if (e instanceof ServiceError && e.code === "TimedNetUnsupported") {
          this.analysisNotice.textContent =
            "TimedNetUnsupported: the net is timed; turn on strip time to analyze its untimed skeleton.";
          return;
        }
        throw e;
      }
    });
  }

  toast(message: string): void {
    const note = el("div", "toast", message);
    this.toastArea.append(note);
    setTimeout(() => note.remove(), 4000);
  }

  /** Service refusals (409 and friends) surface as toasts, not crashes. */
  private act(run: () => Promise<void>): Promise<void> {
    const action = (async () => {
      try {
        await run();
      } catch (e) {
        if (e instanceof ServiceError) {
          this.toast(e.path ? `${e.code} at ${e.path}: ${e.detail}` : `${e.code}: ${e.detail}`);
          return;
        }
        throw e;
      }
    })();
    this.lastAction = action;
    return action;
  }

  private renderSession(): void {
    const session = this.store.current;
    this.undoBtn.disabled = !session;
    this.resetBtn.disabled = !session;
    this.exportBtn.disabled = !session;
    if (!session) {
      this.clockBadge.textContent = "–";
      this.advanceBtn.disabled = true;
      return;
    }
    const state = session.state;
    this.clockBadge.textContent = String(state.globalClock);
    this.renderMarking(state);
    this.renderEnabled(state);
    this.canvasReady = this.renderCanvas(state.dot);
  }

  private renderMarking(state: StateResponse): void {
    this.markingPanel.replaceChildren();
    for (const place of Object.keys(state.marking).sort()) {
      const row = el("div", "place");
      row.dataset.place = place;
      row.append(el("span", "place-name", place));
      const tokens = state.marking[place];
      if (tokens.length === 0) {
        row.append(el("span", "chip empty", "∅"));
      } else {
        for (const token of tokens) row.append(el("span", "chip", chipText(token)));
      }
      this.markingPanel.append(row);
    }
  }

  private renderEnabled(state: StateResponse): void {
    const session = this.store.current;
    this.enabledList.replaceChildren();
    let pairs = 0;
    for (const entry of session?.enabled ?? []) {
      for (const binding of entry.bindings) {
        pairs += 1;
        const btn = el("button", "fire-btn", `${entry.transition} ${formatBinding(binding)}`);
        btn.type = "button";
        btn.addEventListener("click", () => void this.fire(entry.transition, binding));
        this.enabledList.append(btn);
      }
    }
    const hasFuture = Object.values(state.marking).some((tokens) =>
      tokens.some((token) => (token.timestamp ?? 0) > state.globalClock),
    );
    this.advanceBtn.disabled = !hasFuture;
    if (pairs > 0) {
      this.statusNote.textContent = "";
    } else if (hasFuture) {
      this.statusNote.textContent = "nothing enabled at the current clock; advance to continue";
    } else {
      this.statusNote.textContent = "nothing enabled and no future tokens";
    }
  }

  private async renderCanvas(dot: string): Promise<void> {
    const drawn = await this.renderDotFn(dot);
    this.canvas.replaceChildren(drawn);
  }

  private renderReport(report: SpaceReportJson): void {
    this.truncationWarning.hidden = !report.truncated;
    this.analysisBody.replaceChildren();
    const unknown = "unknown (truncated)";
    this.reportRow("num_states", String(report.num_states));
    this.reportRow("num_edges", String(report.num_edges));
    this.reportRow("num_sccs", String(report.num_sccs));
    this.reportRow("truncated", report.truncated ? "yes" : "no");
    this.reportRow(
      "home_markings",
      report.home_markings === null ? unknown : String(report.home_markings.length),
    );
    this.reportRow("dead_markings", String(report.dead_markings.length));
    for (const field of ["dead_transitions", "live_transitions", "impartial_transitions"] as const) {
      const names = report[field];
      this.reportRow(field, names === null ? unknown : names.length > 0 ? names.join(", ") : "none");
    }
    for (const [place, bounds] of Object.entries(report.place_bounds)) {
      this.reportRow(`bounds:${place}`, `${bounds.min}..${bounds.max}`);
    }
  }

  private reportRow(field: string, value: string): void {
    const row = el("tr");
    row.dataset.field = field;
    row.append(el("td", "field", field), el("td", "value", value));
    this.analysisBody.append(row);
  }

  private build(): HTMLElement {
    const layout = el("div", "layout");

    const header = el("header");
    header.append(el("h1", undefined, "cpnet"));
    const clockWrap = el("span", "clock");
    clockWrap.append(el("span", undefined, "clock "));
    this.clockBadge = el("span", "clock-badge", "–");
    this.clockBadge.id = "clock-badge";
    clockWrap.append(this.clockBadge);
    this.exportBtn = el("button", undefined, "Export JSON");
    this.exportBtn.type = "button";
    this.exportBtn.id = "export-btn";
    this.exportBtn.addEventListener("click", () => void this.exportDocument());
    header.append(clockWrap, this.exportBtn);
    layout.append(header);

    layout.append(this.editor.element);

    const canvasSection = el("section");
    canvasSection.append(el("h2", undefined, "Net"));
    this.canvas = el("div");
    this.canvas.id = "net-canvas";
    canvasSection.append(this.canvas);
    layout.append(canvasSection);

    const markingSection = el("section");
    markingSection.append(el("h2", undefined, "Marking"));
    this.markingPanel = el("div");
    this.markingPanel.id = "marking-panel";
    markingSection.append(this.markingPanel);
    layout.append(markingSection);

    const controls = el("section");
    controls.append(el("h2", undefined, "Simulation"));
    this.enabledList = el("div");
    this.enabledList.id = "enabled-list";
    this.statusNote = el("p", "status");
    this.statusNote.id = "status-note";
    this.advanceBtn = el("button", undefined, "Advance clock");
    this.advanceBtn.type = "button";
    this.advanceBtn.id = "advance-btn";
    this.advanceBtn.disabled = true;
    this.advanceBtn.addEventListener("click", () => void this.advance());
    this.undoBtn = el("button", undefined, "Undo");
    this.undoBtn.type = "button";
    this.undoBtn.id = "undo-btn";
    this.undoBtn.disabled = true;
    this.undoBtn.addEventListener("click", () => void this.undo());
    this.resetBtn = el("button", undefined, "Reset");
    this.resetBtn.type = "button";
    this.resetBtn.id = "reset-btn";
    this.resetBtn.disabled = true;
    this.resetBtn.addEventListener("click", () => void this.reset());
    controls.append(this.enabledList, this.statusNote, this.advanceBtn, this.undoBtn, this.resetBtn);
    layout.append(controls);

    const analysis = el("section");
    analysis.append(el("h2", undefined, "State space"));
    this.maxStatesInput = el("input");
    this.maxStatesInput.id = "max-states-input";
    this.maxStatesInput.type = "number";
    this.maxStatesInput.placeholder = "max states";
    this.stripTimeToggle = el("input");
    this.stripTimeToggle.id = "strip-time-toggle";
    this.stripTimeToggle.type = "checkbox";
    const toggleLabel = el("label", undefined, " strip time");
    toggleLabel.prepend(this.stripTimeToggle);
    const run = el("button", undefined, "Run analysis");
    run.type = "button";
    run.id = "run-analysis";
    run.addEventListener("click", () => void this.runAnalysis());
    this.analysisNotice = el("p", "notice");
    this.analysisNotice.id = "analysis-notice";
    this.truncationWarning = el("p", "warning", "truncated: the report only covers the explored prefix");
    this.truncationWarning.id = "truncation-warning";
    this.truncationWarning.hidden = true;
    const table = el("table");
    table.id = "analysis-table";
    this.analysisBody = document.createElement("tbody");
    table.append(this.analysisBody);
    analysis.append(this.maxStatesInput, toggleLabel, run, this.analysisNotice, this.truncationWarning, table);
    layout.append(analysis);

    this.toastArea = el("div");
    this.toastArea.id = "toast-area";
    layout.append(this.toastArea);

    return layout;
  }
}
