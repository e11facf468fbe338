// Hand-scripted stand-in for the cpnet service. It knows nothing about
// net semantics: every response is canned, which is exactly what makes it
// fit for checking that the UI is a thin client over the HTTP protocol.

import type { EnabledEntry, MarkingJson, NetDocument, SpaceReportJson } from "../src/types";

export interface Snapshot {
  marking: MarkingJson;
  globalClock: number;
  enabled: EnabledEntry[];
}

export const WORKED_DOC: NetDocument = {
  formatVersion: 1,
  colorSets: ["colset INT = int timed;"],
  functions: ["fun double(n) = n * 2;"],
  places: [
    { name: "P_In", colorSet: "INT" },
    { name: "P_Out", colorSet: "INT" },
  ],
  transitions: [{ name: "T", variables: ["x"], guard: "x > 0", transitionDelay: 1 }],
  arcs: [
    { source: "P_In", target: "T", inscription: "x" },
    { source: "T", target: "P_Out", inscription: "double(x) @+2" },
  ],
  initialMarking: { tokens: { P_In: [{ value: 1 }, { value: -1 }] } },
};

// phase 0: initial; phase 1: after firing T with {x: 1}; phase 2: after
// advancing the clock
export const WORKED_PHASES: Snapshot[] = [
  {
    marking: {
      P_In: [
        { value: -1, timestamp: 0 },
        { value: 1, timestamp: 0 },
      ],
      P_Out: [],
    },
    globalClock: 0,
    enabled: [{ transition: "T", bindings: [{ x: 1 }] }],
  },
  {
    marking: {
      P_In: [{ value: -1, timestamp: 0 }],
      P_Out: [{ value: 2, timestamp: 3 }],
    },
    globalClock: 0,
    enabled: [],
  },
  {
    marking: {
      P_In: [{ value: -1, timestamp: 0 }],
      P_Out: [{ value: 2, timestamp: 3 }],
    },
    globalClock: 3,
    enabled: [],
  },
];

export const EXPORT_BODY =
  JSON.stringify(
    {
      formatVersion: 1,
      colorSets: ["colset INT = int timed;"],
      functions: ["fun double(n) = n * 2;"],
      places: [
        { name: "P_In", colorSet: "INT" },
        { name: "P_Out", colorSet: "INT" },
      ],
      transitions: [{ name: "T", variables: ["x"], guard: "x > 0", transitionDelay: 1 }],
      arcs: [
        { source: "P_In", target: "T", inscription: "x" },
        { source: "T", target: "P_Out", inscription: "double(x) @+2" },
      ],
      initialMarking: {
        globalClock: 3,
        tokens: {
          P_In: [{ value: -1, timestamp: 0 }],
          P_Out: [{ value: 2, timestamp: 3 }],
        },
      },
    },
    null,
    2,
  ) + "\n";

export const DEFAULT_REPORT: SpaceReportJson = {
  num_states: 2,
  num_edges: 2,
  num_sccs: 1,
  truncated: false,
  home_markings: ["m0", "m1"],
  dead_markings: [],
  dead_transitions: [],
  live_transitions: ["T1", "T2"],
  impartial_transitions: ["T1", "T2"],
  place_bounds: { P: { min: 0, max: 1 }, Q: { min: 0, max: 1 } },
};

interface MockOptions {
  phases?: Snapshot[];
  exportBody?: string;
  // phase transitions taken by POST /advance (clock changes are phases too)
  advanceTo?: Record<number, number>;
}

interface CannedResult {
  status: number;
  body: unknown;
}

export class MockService {
  createdDocs: NetDocument[] = [];
  requests: string[] = [];
  failCreate: CannedResult | null = null;
  analysis: CannedResult | null = null;

  private sessions = new Map<string, number[]>();
  private counter = 0;

  constructor(private readonly options: MockOptions = {}) {}

  readonly fetch = async (input: string, init?: RequestInit): Promise<Response> => {
    const method = init?.method ?? "GET";
    const url = new URL(input, "http://mock");
    this.requests.push(`${method} ${url.pathname}${url.search}`);
    const body = init?.body ? (JSON.parse(String(init.body)) as Record<string, unknown>) : undefined;
    return this.route(method, url, body);
  };

  private phases(): Snapshot[] {
    return this.options.phases ?? WORKED_PHASES;
  }

  private json(status: number, payload: unknown): Response {
    return new Response(JSON.stringify(payload), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  }

  private route(method: string, url: URL, body?: Record<string, unknown>): Response {
    if (method === "POST" && url.pathname === "/sessions") {
      if (this.failCreate) return this.json(this.failCreate.status, this.failCreate.body);
      this.createdDocs.push(body as unknown as NetDocument);
      const id = `s${this.counter++}`;
      this.sessions.set(id, [0]);
      return this.json(201, { sessionId: id });
    }

    const match = url.pathname.match(/^\/sessions\/([^/]+)\/([a-z]+)$/);
    if (!match) return this.json(404, { error: "UnknownSession", detail: "no such route" });
    const stack = this.sessions.get(match[1]);
    if (!stack) return this.json(404, { error: "UnknownSession", detail: "no such session" });
    const phase = stack[stack.length - 1];
    const snap = this.phases()[phase];

    switch (`${method} ${match[2]}`) {
      case "GET state":
        return this.json(200, {
          marking: snap.marking,
          globalClock: snap.globalClock,
          dot: `digraph CPN {\n  rankdir=LR;\n  label="clock: ${snap.globalClock}";\n  phase${phase};\n}\n`,
        });
      case "GET enabled":
        return this.json(200, snap.enabled);
      case "POST fire": {
        const wanted = body?.transition;
        const entry = snap.enabled.find((e) => e.transition === wanted);
        const binding = body?.binding as Record<string, unknown> | undefined;
        const bindingOk =
          binding === undefined ||
          entry?.bindings.some((b) => JSON.stringify(b) === JSON.stringify(binding));
        if (!entry || !bindingOk) {
          return this.json(409, { error: "NotEnabled", detail: `no enabled binding for ${String(wanted)}` });
        }
        stack.push(phase + 1);
        const next = this.phases()[phase + 1];
        return this.json(200, {
          firingRecord: {
            transition: entry.transition,
            binding: binding ?? entry.bindings[0],
            consumed: [],
            produced: [],
            clock: snap.globalClock,
          },
          marking: next.marking,
        });
      }
      case "POST advance": {
        const target = (this.options.advanceTo ?? { 1: 2 })[phase];
        if (target !== undefined) stack.push(target);
        const current = this.phases()[stack[stack.length - 1]];
        return this.json(200, { globalClock: current.globalClock });
      }
      case "POST undo": {
        if (stack.length < 2) return this.json(409, { error: "NothingToUndo", detail: "undo stack is empty" });
        stack.pop();
        const current = this.phases()[stack[stack.length - 1]];
        return this.json(200, { marking: current.marking, globalClock: current.globalClock });
      }
      case "POST reset": {
        stack.push(0);
        return this.json(200, { marking: this.phases()[0].marking, globalClock: this.phases()[0].globalClock });
      }
      case "GET analysis": {
        const canned = this.analysis ?? { status: 200, body: DEFAULT_REPORT };
        return this.json(canned.status, canned.body);
      }
      case "GET export":
        return new Response(this.options.exportBody ?? EXPORT_BODY, {
          status: 200,
          headers: { "Content-Type": "application/json" },
        });
      default:
        return this.json(404, { error: "UnknownSession", detail: "no such route" });
    }
  }
}
