// Client-side session state. Everything shown on the page lives here and
// is refreshed from /state and /enabled after every action; the store
// never computes a marking or an enabled list itself.

import { ServiceClient } from "./api";
import type { EnabledEntry, NetDocument, StateResponse, UiAction } from "./types";

export interface UiSessionState {
  sessionId: string;
  state: StateResponse;
  enabled: EnabledEntry[];
  history: UiAction[];
}

export class SessionStore {
  current: UiSessionState | null = null;
  // the local document being edited; loading it always creates a fresh
  // session, so edits can never silently overwrite a live one
  document: NetDocument | null = null;
  private listeners: Array<() => void> = [];

  constructor(readonly client: ServiceClient) {}

  onChange(listener: () => void): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener();
  }

  private live(): UiSessionState {
    if (!this.current) throw new Error("no live session");
    return this.current;
  }

  async load(doc: NetDocument): Promise<void> {
    const sessionId = await this.client.createSession(doc);
    const state = await this.client.state(sessionId);
    const enabled = await this.client.enabled(sessionId);
    this.document = doc;
    this.current = { sessionId, state, enabled, history: [] };
    this.emit();
  }

  /** Re-pull state and enabled; the view tracks the latest successful
   * /state response, nothing else. */
  async refresh(): Promise<void> {
    const session = this.live();
    session.state = await this.client.state(session.sessionId);
    session.enabled = await this.client.enabled(session.sessionId);
    this.emit();
  }

  private perform(sessionId: string, action: UiAction): Promise<unknown> {
    switch (action.kind) {
      case "fire":
        return this.client.fire(sessionId, action.transition, action.binding);
      case "advance":
        return this.client.advance(sessionId);
      case "undo":
        return this.client.undo(sessionId);
      case "reset":
        return this.client.reset(sessionId);
    }
  }

  private async apply(action: UiAction): Promise<void> {
    const session = this.live();
    await this.perform(session.sessionId, action);
    session.history.push(action);
    await this.refresh();
  }

  fire(transition: string, binding?: Record<string, unknown>): Promise<void> {
    return this.apply({ kind: "fire", transition, binding });
  }

  advance(): Promise<void> {
    return this.apply({ kind: "advance" });
  }

  undo(): Promise<void> {
    return this.apply({ kind: "undo" });
  }

  reset(): Promise<void> {
    return this.apply({ kind: "reset" });
  }

  exportText(): Promise<string> {
    return this.client.exportText(this.live().sessionId);
  }

  analysis(options: Parameters<ServiceClient["analysis"]>[1]) {
    return this.client.analysis(this.live().sessionId, options);
  }

  /** Replay the recorded actions against a brand-new session and return
   * its final state: the history fully determines the displayed view.
   * The scratch session is simply abandoned; the service reaps idle
   * sessions on its own. */
  async replayOnFreshSession(): Promise<StateResponse> {
    if (!this.document) throw new Error("no document loaded");
    const session = this.live();
    const sessionId = await this.client.createSession(this.document);
    for (const action of session.history) {
      await this.perform(sessionId, action);
    }
    return this.client.state(sessionId);
  }
}
