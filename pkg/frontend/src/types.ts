// JSON shapes exchanged with the cpnet HTTP service. The client treats
// every payload as opaque data to display; it never derives net state on
// its own.

export interface TokenJson {
  value: unknown;
  timestamp?: number;
}

export type MarkingJson = Record<string, TokenJson[]>;

export interface StateResponse {
  marking: MarkingJson;
  globalClock: number;
  dot: string;
}

export interface EnabledEntry {
  transition: string;
  bindings: Record<string, unknown>[];
}

export interface PlacedTokenJson {
  place: string;
  value: unknown;
  timestamp: number;
}

export interface FiringRecordJson {
  transition: string;
  binding: Record<string, unknown>;
  consumed: PlacedTokenJson[];
  produced: PlacedTokenJson[];
  clock: number;
}

export interface FireResponse {
  firingRecord: FiringRecordJson;
  marking: MarkingJson;
}

export interface PlaceBoundsJson {
  min: number;
  max: number;
}

// Liveness fields are null when truncation made them undecidable.
export interface SpaceReportJson {
  num_states: number;
  num_edges: number;
  num_sccs: number;
  truncated: boolean;
  home_markings: string[] | null;
  dead_markings: string[];
  dead_transitions: string[] | null;
  live_transitions: string[] | null;
  impartial_transitions: string[] | null;
  place_bounds: Record<string, PlaceBoundsJson>;
}

export interface PlaceJson {
  name: string;
  colorSet: string;
}

export interface TransitionJson {
  name: string;
  variables: string[];
  guard?: string | null;
  transitionDelay?: number;
}

export interface ArcJson {
  source: string;
  target: string;
  inscription: string;
}

export interface InitialTokenJson {
  value: unknown;
  timestamp?: number;
}

export interface InitialMarkingJson {
  globalClock?: number;
  tokens?: Record<string, InitialTokenJson[]>;
}

export interface NetDocument {
  formatVersion: number;
  colorSets: string[];
  functions?: string[];
  places: PlaceJson[];
  transitions: TransitionJson[];
  arcs: ArcJson[];
  initialMarking?: InitialMarkingJson;
  // hierarchical sections pass through untouched
  [extra: string]: unknown;
}

export type UiAction =
  | { kind: "fire"; transition: string; binding?: Record<string, unknown> }
  | { kind: "advance" }
  | { kind: "undo" }
  | { kind: "reset" };

export interface AnalysisOptions {
  maxStates?: number;
  maxEdges?: number;
  stripTime?: boolean;
}
