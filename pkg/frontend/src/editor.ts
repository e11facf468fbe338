// Form-driven document builder plus JSON import. Rows accumulate into a
// draft; "create session" checks required fields locally, then hands the
// document to the loader. Server rejections come back with a JSON path
// and are shown inline next to the form.

import { ServiceError } from "./api";
import type { ArcJson, InitialTokenJson, NetDocument, PlaceJson, TransitionJson } from "./types";

interface TokenDraft {
  place: string;
  value: unknown;
  timestamp?: number;
}

function lines(text: string): string[] {
  return text
    .split("\n")
    .map((line) => line.trim())
    .filter((line) => line.length > 0);
}

export class Editor {
  readonly element: HTMLElement;

  places: PlaceJson[] = [];
  transitions: TransitionJson[] = [];
  arcs: ArcJson[] = [];
  tokens: TokenDraft[] = [];

  private colorSetsInput!: HTMLTextAreaElement;
  private functionsInput!: HTMLTextAreaElement;
  private jsonInput!: HTMLTextAreaElement;
  private hintBox!: HTMLElement;
  private errorBox!: HTMLElement;
  private placeList!: HTMLUListElement;
  private transitionList!: HTMLUListElement;
  private arcList!: HTMLUListElement;
  private tokenList!: HTMLUListElement;

  constructor(private readonly loader: (doc: NetDocument) => Promise<void>) {
    this.element = this.build();
  }

  addPlace(name: string, colorSet: string): void {
    if (!name.trim() || !colorSet.trim()) return;
    this.places.push({ name: name.trim(), colorSet: colorSet.trim() });
    this.renderList(this.placeList, this.places, (p) => `${p.name} : ${p.colorSet}`);
  }

  addTransition(name: string, variablesCsv: string, guard: string, delayText: string): void {
    if (!name.trim()) return;
    const variables = variablesCsv
      .split(",")
      .map((v) => v.trim())
      .filter((v) => v.length > 0);
    const delay = Number.parseInt(delayText, 10);
    this.transitions.push({
      name: name.trim(),
      variables,
      guard: guard.trim() || null,
      transitionDelay: Number.isNaN(delay) ? 0 : delay,
    });
    this.renderList(
      this.transitionList,
      this.transitions,
      (t) => `${t.name}(${t.variables.join(", ")})${t.guard ? ` [${t.guard}]` : ""}`,
    );
  }

  addArc(source: string, target: string, inscription: string): void {
    if (!source.trim() || !target.trim() || !inscription.trim()) return;
    this.arcs.push({
      source: source.trim(),
      target: target.trim(),
      inscription: inscription.trim(),
    });
    this.renderList(this.arcList, this.arcs, (a) => `${a.source} -> ${a.target} : ${a.inscription}`);
  }

  addToken(place: string, valueText: string, timestampText: string): void {
    if (!place.trim()) return;
    let value: unknown;
    try {
      value = JSON.parse(valueText);
    } catch {
      this.showError(`token value is not a JSON literal: ${valueText}`);
      return;
    }
    const draft: TokenDraft = { place: place.trim(), value };
    const timestamp = Number.parseInt(timestampText, 10);
    if (!Number.isNaN(timestamp)) draft.timestamp = timestamp;
    this.tokens.push(draft);
    this.renderList(
      this.tokenList,
      this.tokens,
      (t) => `${t.place} <- ${JSON.stringify(t.value)}${t.timestamp !== undefined ? `@${t.timestamp}` : ""}`,
    );
  }

  setColorSets(text: string): void {
    this.colorSetsInput.value = text;
  }

  setFunctions(text: string): void {
    this.functionsInput.value = text;
  }

  /** null when required fields are missing; hints are rendered in place. */
  buildDocument(): NetDocument | null {
    const colorSets = lines(this.colorSetsInput.value);
    const missing: string[] = [];
    if (colorSets.length === 0) missing.push("at least one color set declaration");
    if (this.places.length === 0) missing.push("at least one place");
    this.colorSetsInput.classList.toggle("missing", colorSets.length === 0);
    this.placeList.classList.toggle("missing", this.places.length === 0);
    if (missing.length > 0) {
      this.hintBox.textContent = `required: ${missing.join("; ")}`;
      return null;
    }
    this.hintBox.textContent = "";

    const doc: NetDocument = {
      formatVersion: 1,
      colorSets,
      places: [...this.places],
      transitions: this.transitions.map((t) => ({ ...t })),
      arcs: [...this.arcs],
    };
    const functions = lines(this.functionsInput.value);
    if (functions.length > 0) doc.functions = functions;
    if (this.tokens.length > 0) {
      const tokens: Record<string, InitialTokenJson[]> = {};
      for (const t of this.tokens) {
        const entry: InitialTokenJson = { value: t.value };
        if (t.timestamp !== undefined) entry.timestamp = t.timestamp;
        (tokens[t.place] ??= []).push(entry);
      }
      doc.initialMarking = { tokens };
    }
    return doc;
  }

  async createSession(): Promise<void> {
    const doc = this.buildDocument();
    if (!doc) return;
    await this.loadDocument(doc);
  }

  async loadJsonText(text: string): Promise<void> {
    let doc: NetDocument;
    try {
      doc = JSON.parse(text) as NetDocument;
    } catch (e) {
      this.showError(`invalid JSON: ${(e as Error).message}`);
      return;
    }
    await this.loadDocument(doc);
  }

  private async loadDocument(doc: NetDocument): Promise<void> {
    this.showError("");
    try {
      await this.loader(doc);
    } catch (e) {
      if (e instanceof ServiceError) {
        this.showError(e.path ? `${e.path}: ${e.detail}` : `${e.code}: ${e.detail}`);
        return;
      }
      throw e;
    }
  }

  private showError(message: string): void {
    this.errorBox.textContent = message;
  }

  private renderList<T>(list: HTMLUListElement, items: T[], describe: (item: T) => string): void {
    list.replaceChildren();
    items.forEach((item, index) => {
      const entry = document.createElement("li");
      entry.textContent = describe(item);
      const remove = document.createElement("button");
      remove.type = "button";
      remove.textContent = "×";
      remove.addEventListener("click", () => {
        items.splice(index, 1);
        this.renderList(list, items, describe);
      });
      entry.append(remove);
      list.append(entry);
    });
  }

  private build(): HTMLElement {
    const root = document.createElement("section");
    root.id = "editor";

    const heading = document.createElement("h2");
    heading.textContent = "Net document";
    root.append(heading);

    this.jsonInput = this.textarea("json-input", "paste a net document (JSON)");
    const loadJson = this.button("load-json", "Load JSON", () => {
      void this.loadJsonText(this.jsonInput.value);
    });
    const file = document.createElement("input");
    file.type = "file";
    file.id = "json-file";
    file.accept = "application/json,.json";
    file.addEventListener("change", () => {
      const chosen = file.files?.[0];
      if (chosen) void chosen.text().then((text) => this.loadJsonText(text));
    });
    root.append(this.group("Import", [this.jsonInput, loadJson, file]));

    this.colorSetsInput = this.textarea("colorsets-input", "colset INT = int; (one per line)");
    this.functionsInput = this.textarea("functions-input", "fun f(n) = n; (one per line)");
    root.append(this.group("Declarations", [this.colorSetsInput, this.functionsInput]));

    this.placeList = document.createElement("ul");
    this.placeList.id = "place-list";
    const placeName = this.input("place-name", "name");
    const placeColorSet = this.input("place-colorset", "color set");
    const addPlace = this.button("add-place", "Add place", () => {
      this.addPlace(placeName.value, placeColorSet.value);
      placeName.value = "";
    });
    root.append(this.group("Places", [placeName, placeColorSet, addPlace, this.placeList]));

    this.transitionList = document.createElement("ul");
    this.transitionList.id = "transition-list";
    const transitionName = this.input("transition-name", "name");
    const transitionVariables = this.input("transition-variables", "variables (comma separated)");
    const transitionGuard = this.input("transition-guard", "guard (optional)");
    const transitionDelay = this.input("transition-delay", "delay (default 0)");
    const addTransition = this.button("add-transition", "Add transition", () => {
      this.addTransition(
        transitionName.value,
        transitionVariables.value,
        transitionGuard.value,
        transitionDelay.value,
      );
      transitionName.value = "";
    });
    root.append(
      this.group("Transitions", [
        transitionName,
        transitionVariables,
        transitionGuard,
        transitionDelay,
        addTransition,
        this.transitionList,
      ]),
    );

    this.arcList = document.createElement("ul");
    this.arcList.id = "arc-list";
    const arcSource = this.input("arc-source", "source");
    const arcTarget = this.input("arc-target", "target");
    const arcInscription = this.input("arc-inscription", "inscription");
    const addArc = this.button("add-arc", "Add arc", () => {
      this.addArc(arcSource.value, arcTarget.value, arcInscription.value);
      arcInscription.value = "";
    });
    root.append(this.group("Arcs", [arcSource, arcTarget, arcInscription, addArc, this.arcList]));

    this.tokenList = document.createElement("ul");
    this.tokenList.id = "token-list";
    const tokenPlace = this.input("token-place", "place");
    const tokenValue = this.input("token-value", "value (JSON literal)");
    const tokenTimestamp = this.input("token-timestamp", "timestamp (optional)");
    const addToken = this.button("add-token", "Add token", () => {
      this.addToken(tokenPlace.value, tokenValue.value, tokenTimestamp.value);
      tokenValue.value = "";
    });
    root.append(
      this.group("Initial tokens", [tokenPlace, tokenValue, tokenTimestamp, addToken, this.tokenList]),
    );

    const create = this.button("create-session", "Create session", () => {
      void this.createSession();
    });
    this.hintBox = document.createElement("p");
    this.hintBox.id = "editor-hints";
    this.hintBox.className = "hints";
    this.errorBox = document.createElement("p");
    this.errorBox.id = "editor-error";
    this.errorBox.className = "error";
    root.append(create, this.hintBox, this.errorBox);
    return root;
  }

  private group(title: string, children: Element[]): HTMLElement {
    const box = document.createElement("fieldset");
    const legend = document.createElement("legend");
    legend.textContent = title;
    box.append(legend, ...children);
    return box;
  }

  private input(id: string, placeholder: string): HTMLInputElement {
    const node = document.createElement("input");
    node.type = "text";
    node.id = id;
    node.placeholder = placeholder;
    return node;
  }

  private textarea(id: string, placeholder: string): HTMLTextAreaElement {
    const node = document.createElement("textarea");
    node.id = id;
    node.placeholder = placeholder;
    node.rows = 3;
    return node;
  }

  private button(id: string, label: string, onClick: () => void): HTMLButtonElement {
    const node = document.createElement("button");
    node.type = "button";
    node.id = id;
    node.textContent = label;
    node.addEventListener("click", onClick);
    return node;
  }
}
