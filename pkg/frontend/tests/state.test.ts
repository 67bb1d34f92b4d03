import { describe, expect, it } from "vitest";

import {
  applySearchResponse,
  initialState,
  selectScenario,
  setCursor,
  setDraft,
  setParsedQuery,
  setSort,
  sortedPool,
  toggleNearMisses,
} from "../src/state.js";
import type {
  FramesResponse,
  PoolRow,
  QueryJson,
  SearchResponse,
} from "../src/types.js";

function row(
  scenarioId: string,
  egoId: number,
  windowStart: number,
  aggregate: number | null,
  passes = true,
): PoolRow {
  return {
    scenario_id: scenarioId,
    ego_id: egoId,
    targets: [{ target_id: egoId + 1, window: [windowStart, windowStart + 50] }],
    scenario_window: [windowStart, windowStart + 50],
    reports:
      aggregate === null
        ? []
        : [
            {
              kind: "TTC",
              series: [aggregate],
              aggregate,
              threshold: 10,
              comparison: "le",
              passes_threshold: passes,
            },
          ],
    passes,
  };
}

const RESPONSE: SearchResponse = {
  pool: [row("scn-0001", 3, 100, 4.2), row("scn-0002", 1, 50, 1.7)],
  rejected_near_misses: [
    { ego_id: 9, target_id: 10, window: [0, 20], reasons: ["start-position"] },
  ],
};

function playbackOf(frameCount: number): FramesResponse {
  return {
    scenario_id: "scn-0001",
    window: [100, 100 + frameCount - 1],
    frame_rate: 25,
    metric: "TTC",
    frames: Array.from({ length: frameCount }, (_, i) => ({
      frame: 100 + i,
      time: i / 25,
      vehicles: [],
      metrics: {},
    })),
  };
}

describe("view state transitions", () => {
  it("mirrors the last search response in the pool", () => {
    const state = applySearchResponse(initialState(), RESPONSE);
    expect(state.pool).toHaveLength(2);
    expect(state.nearMisses).toHaveLength(1);
    expect(state.selectedScenarioId).toBeNull();
    expect(state.searchInFlight).toBe(false);
  });

  it("preserves the draft description across interpret and search", () => {
    let state = setDraft(initialState(), "the ego vehicle ...");
    const query: QueryJson = {
      ego: { longitudinal: "keep velocity", lateral: "follow lane" },
      targets: [],
    };
    state = setParsedQuery(state, query);
    state = applySearchResponse(state, RESPONSE);
    expect(state.draftDescription).toBe("the ego vehicle ...");
    expect(state.parsedQuery).toEqual(query);
  });

  it("clamps the playback cursor to the scenario window", () => {
    let state = applySearchResponse(initialState(), RESPONSE);
    state = selectScenario(state, "scn-0001", playbackOf(10));
    expect(setCursor(state, -5).cursor).toBe(0);
    expect(setCursor(state, 4).cursor).toBe(4);
    expect(setCursor(state, 99).cursor).toBe(9);
  });

  it("rejects selecting a scenario outside the pool", () => {
    const state = applySearchResponse(initialState(), RESPONSE);
    expect(() => selectScenario(state, "scn-9999", playbackOf(5))).toThrow();
  });

  it("sorting by aggregate ascending yields a monotone column", () => {
    let state = applySearchResponse(initialState(), RESPONSE);
    state = { ...state, pool: [...state.pool, row("scn-0003", 7, 10, null)] };
    state = setSort(state, "aggregate");
    const aggregates = sortedPool(state).map((r) => r.reports[0]?.aggregate ?? null);
    expect(aggregates).toEqual([1.7, 4.2, null]); // absent aggregates last
    state = setSort(state, "aggregate"); // second click flips direction
    expect(state.sortDirection).toBe("desc");
    expect(sortedPool(state)[0]?.reports[0]?.aggregate ?? null).toBeNull();
  });

  it("sorts by ego id and window start", () => {
    let state = applySearchResponse(initialState(), RESPONSE);
    expect(sortedPool(state).map((r) => r.ego_id)).toEqual([1, 3]);
    state = setSort(state, "window_start");
    expect(sortedPool(state).map((r) => r.scenario_window[0])).toEqual([50, 100]);
  });

  it("toggles near-miss visibility", () => {
    const state = applySearchResponse(initialState(), RESPONSE);
    expect(state.showNearMisses).toBe(false);
    expect(toggleNearMisses(state).showNearMisses).toBe(true);
    expect(toggleNearMisses(toggleNearMisses(state)).showNearMisses).toBe(false);
  });
});
