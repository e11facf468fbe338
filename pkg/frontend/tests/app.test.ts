// The session view against the scripted mock: the page must mirror the
// service responses and nothing else.

import { expect, it } from "vitest";

import { ServiceClient } from "../src/api";
import { SessionStore } from "../src/session";
import { App } from "../src/view";
import { EXPORT_BODY, WORKED_DOC, MockService, type Snapshot } from "./mock";

function makeApp(mock = new MockService()) {
  document.body.innerHTML = "";
  const root = document.createElement("div");
  document.body.append(root);
  const saved: { name: string; text: string }[] = [];
  const app = new App(root, {
    store: new SessionStore(new ServiceClient("", mock.fetch)),
    renderDot: async (dot) => {
      const pre = document.createElement("pre");
      pre.className = "dot-stub";
      pre.textContent = dot;
      return pre;
    },
    saveFile: (name, text) => saved.push({ name, text }),
  });
  return { app, root, saved, mock };
}

function chips(root: HTMLElement, place: string): string[] {
  const row = root.querySelector(`.place[data-place="${place}"]`);
  if (!row) return [];
  return [...row.querySelectorAll(".chip")].map((chip) => chip.textContent ?? "");
}

function badge(root: HTMLElement): string {
  return root.querySelector("#clock-badge")?.textContent ?? "";
}

function fireButtons(root: HTMLElement): HTMLButtonElement[] {
  return [...root.querySelectorAll<HTMLButtonElement>(".fire-btn")];
}

function toasts(root: HTMLElement): string[] {
  return [...root.querySelectorAll("#toast-area .toast")].map((t) => t.textContent ?? "");
}

it("load, fire, advance: chips and the clock badge follow the service", async () => {
  const { app, root, saved } = makeApp();
  await app.store.load(WORKED_DOC);
  await app.idle();
  expect(chips(root, "P_In")).toEqual(["-1@0", "1@0"]);
  expect(chips(root, "P_Out")).toEqual(["∅"]);
  expect(badge(root)).toBe("0");

  const buttons = fireButtons(root);
  expect(buttons.map((b) => b.textContent)).toEqual(["T {x = 1}"]);
  buttons[0].click();
  await app.idle();
  expect(chips(root, "P_In")).toEqual(["-1@0"]);
  expect(chips(root, "P_Out")).toEqual(["2@3"]);
  expect(badge(root)).toBe("0");
  expect(fireButtons(root)).toHaveLength(0);

  const advance = root.querySelector<HTMLButtonElement>("#advance-btn")!;
  expect(advance.disabled).toBe(false);
  advance.click();
  await app.idle();
  expect(badge(root)).toBe("3");
  expect(chips(root, "P_Out")).toEqual(["2@3"]);
  expect(advance.disabled).toBe(true);

  root.querySelector<HTMLButtonElement>("#export-btn")!.click();
  await app.idle();
  expect(saved).toHaveLength(1);
  expect(saved[0].text).toBe(EXPORT_BODY);
  expect(JSON.parse(saved[0].text).initialMarking.globalClock).toBe(3);
});

it("a refused fire surfaces as a toast and the view stays put", async () => {
  const { app, root } = makeApp();
  await app.store.load(WORKED_DOC);
  await app.fire("T", { x: 1 });
  await app.advance();
  await app.idle();
  expect(badge(root)).toBe("3");

  await app.fire("T", { x: 1 });
  expect(toasts(root)).toHaveLength(1);
  expect(toasts(root)[0]).toContain("NotEnabled");
  expect(badge(root)).toBe("3");
  expect(chips(root, "P_Out")).toEqual(["2@3"]);
});

it("undo walks the view back through earlier states", async () => {
  const { app, root } = makeApp();
  await app.store.load(WORKED_DOC);
  await app.fire("T", { x: 1 });
  await app.advance();
  await app.idle();
  expect(badge(root)).toBe("3");

  root.querySelector<HTMLButtonElement>("#undo-btn")!.click();
  await app.idle();
  expect(badge(root)).toBe("0");
  expect(chips(root, "P_Out")).toEqual(["2@3"]);

  root.querySelector<HTMLButtonElement>("#undo-btn")!.click();
  await app.idle();
  expect(chips(root, "P_In")).toEqual(["-1@0", "1@0"]);
  expect(chips(root, "P_Out")).toEqual(["∅"]);

  root.querySelector<HTMLButtonElement>("#undo-btn")!.click();
  await app.idle();
  expect(toasts(root)[0]).toContain("NothingToUndo");
});

it("renders exactly what the service replies, plausible or not", async () => {
  const weird: Snapshot[] = [
    {
      marking: { Somewhere: [{ value: 99, timestamp: 7 }], Empty: [] },
      globalClock: 42,
      enabled: [{ transition: "Ghost", bindings: [{ y: "boo" }] }],
    },
  ];
  const { app, root } = makeApp(new MockService({ phases: weird }));
  await app.store.load(WORKED_DOC);
  await app.idle();
  expect(badge(root)).toBe("42");
  expect(chips(root, "Somewhere")).toEqual(["99@7"]);
  expect(chips(root, "Empty")).toEqual(["∅"]);
  expect(fireButtons(root).map((b) => b.textContent)).toEqual(["Ghost {y = boo}"]);
});

it("refresh without actions leaves the view identical", async () => {
  const { app, root } = makeApp();
  await app.store.load(WORKED_DOC);
  await app.idle();
  const before = root.querySelector("#marking-panel")!.innerHTML;
  await app.store.refresh();
  await app.idle();
  expect(root.querySelector("#marking-panel")!.innerHTML).toBe(before);
  expect(badge(root)).toBe("0");
});

it("the canvas redraws from the latest DOT text", async () => {
  const { app, root } = makeApp();
  await app.store.load(WORKED_DOC);
  await app.idle();
  expect(root.querySelector("#net-canvas .dot-stub")!.textContent).toContain('label="clock: 0"');

  await app.fire("T", { x: 1 });
  await app.advance();
  await app.idle();
  expect(root.querySelector("#net-canvas .dot-stub")!.textContent).toContain('label="clock: 3"');
});

it("notes a dead end when nothing is enabled and nothing is scheduled", async () => {
  const stuck: Snapshot[] = [
    { marking: { P: [{ value: 5, timestamp: 0 }] }, globalClock: 0, enabled: [] },
  ];
  const { app, root } = makeApp(new MockService({ phases: stuck }));
  await app.store.load(WORKED_DOC);
  await app.idle();
  expect(fireButtons(root)).toHaveLength(0);
  expect(root.querySelector<HTMLButtonElement>("#advance-btn")!.disabled).toBe(true);
  expect(root.querySelector("#status-note")!.textContent).toBe(
    "nothing enabled and no future tokens",
  );
});

it("the recorded history replayed on a fresh session reproduces the view", async () => {
  const { app } = makeApp();
  await app.store.load(WORKED_DOC);
  await app.fire("T", { x: 1 });
  await app.advance();
  await app.idle();

  const replayed = await app.store.replayOnFreshSession();
  expect(replayed).toEqual(app.store.current!.state);
});
