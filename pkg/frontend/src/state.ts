/** View state and its pure transitions.
 *
 * Invariants: the playback cursor always lies inside the selected
 * scenario's window, and the pool rows mirror the last search response.
 * The query draft survives search and refinement round-trips.
 */
import type {
  FramesResponse,
  NearMiss,
  PoolRow,
  QueryJson,
  SearchResponse,
} from "./types.js";

export type SortKey = "ego_id" | "window_start" | "aggregate";
export type SortDirection = "asc" | "desc";

export interface ViewState {
  sessionId: string;
  recordingId: string | null;
  draftDescription: string;
  provider: "offline" | "remote";
  parsedQuery: QueryJson | null;
  pool: PoolRow[];
  nearMisses: NearMiss[];
  showNearMisses: boolean;
  sortKey: SortKey;
  sortDirection: SortDirection;
  selectedScenarioId: string | null;
  playback: FramesResponse | null;
  cursor: number; // index into playback.frames
  searchInFlight: boolean;
  error: string | null;
}

export function initialState(sessionId = "default"): ViewState {
  return {
    sessionId,
    recordingId: null,
    draftDescription: "",
    provider: "offline",
    parsedQuery: null,
    pool: [],
    nearMisses: [],
    showNearMisses: false,
    sortKey: "ego_id",
    sortDirection: "asc",
    selectedScenarioId: null,
    playback: null,
    cursor: 0,
    searchInFlight: false,
    error: null,
  };
}

export function setDraft(state: ViewState, description: string): ViewState {
  return { ...state, draftDescription: description };
}

export function setParsedQuery(state: ViewState, query: QueryJson): ViewState {
  // the draft text is kept so the user can refine and re-interpret
  return { ...state, parsedQuery: query, error: null };
}

export function applySearchResponse(
  state: ViewState,
  response: SearchResponse,
): ViewState {
  return {
    ...state,
    pool: response.pool,
    nearMisses: response.rejected_near_misses,
    selectedScenarioId: null,
    playback: null,
    cursor: 0,
    searchInFlight: false,
    error: null,
  };
}

export function selectScenario(
  state: ViewState,
  scenarioId: string,
  playback: FramesResponse,
): ViewState {
  if (!state.pool.some((row) => row.scenario_id === scenarioId)) {
    throw new Error(`scenario ${scenarioId} is not in the current pool`);
  }
  return { ...state, selectedScenarioId: scenarioId, playback, cursor: 0 };
}

/** Move the playback cursor, clamped to the scenario's frames. */
export function setCursor(state: ViewState, cursor: number): ViewState {
  if (state.playback === null) return state;
  const last = state.playback.frames.length - 1;
  const clamped = Math.min(Math.max(Math.round(cursor), 0), Math.max(last, 0));
  return { ...state, cursor: clamped };
}

export function toggleNearMisses(state: ViewState): ViewState {
  return { ...state, showNearMisses: !state.showNearMisses };
}

export function setSort(state: ViewState, key: SortKey): ViewState {
  const direction: SortDirection =
    state.sortKey === key && state.sortDirection === "asc" ? "desc" : "asc";
  return { ...state, sortKey: key, sortDirection: direction };
}

export function rowAggregate(row: PoolRow): number | null {
  const first = row.reports[0];
  return first === undefined ? null : first.aggregate;
}

/** Pool rows in display order; rows without an aggregate sort last. */
export function sortedPool(state: ViewState): PoolRow[] {
  const keyOf = (row: PoolRow): number => {
    switch (state.sortKey) {
      case "ego_id":
        return row.ego_id;
      case "window_start":
        return row.scenario_window[0];
      case "aggregate": {
        const value = rowAggregate(row);
        return value === null ? Number.POSITIVE_INFINITY : value;
      }
    }
  };
  const sign = state.sortDirection === "asc" ? 1 : -1;
  return [...state.pool].sort((a, b) => sign * (keyOf(a) - keyOf(b)));
}
