/** Application wiring: one ApiClient, one ViewState, re-render on change.
 *
 * At most one search is in flight per session; playback animation runs
 * locally off the already-fetched frames.
 */
import { ApiClient, ApiError } from "./api.js";
import {
  applySearchResponse,
  initialState,
  selectScenario,
  setCursor,
  setDraft,
  setParsedQuery,
  setSort,
  toggleNearMisses,
  type ViewState,
} from "./state.js";
import { METRIC_KINDS } from "./taxonomy.js";
import {
  renderPlayback,
  renderPoolTable,
  renderQueryPanel,
  toast,
  triggerDownload,
} from "./ui.js";
import type { CriticalityConfigJson } from "./types.js";

const api = new ApiClient(window.location.origin, sessionIdFromUrl());
let state: ViewState = initialState();

function sessionIdFromUrl(): string {
  return new URLSearchParams(window.location.search).get("session") ?? "default";
}

function byId(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing #${id} in index.html`);
  return node;
}

function update(next: ViewState): void {
  state = next;
  render();
}

function criticalityConfig(): CriticalityConfigJson | undefined {
  const metric = (byId("metric") as HTMLSelectElement).value;
  const threshold = (byId("threshold") as HTMLInputElement).value;
  if (metric === "" || threshold === "") return undefined;
  return { kind: metric, threshold: Number(threshold) };
}

async function handleUpload(file: File): Promise<void> {
  try {
    const text = await file.text();
    const response = await api.uploadRecording(text, file.name, file.name);
    update({ ...state, recordingId: response.recording_id, error: null });
    toast(
      `loaded ${response.track_count} tracks, ` +
        `frames ${response.frame_range[0]}..${response.frame_range[1]}`,
    );
  } catch (error) {
    update({ ...state, error: describe(error) });
  }
}

async function handleInterpret(): Promise<void> {
  try {
    const query = await api.interpret(state.draftDescription, state.provider);
    update(setParsedQuery(state, query));
  } catch (error) {
    // a failed remote exchange surfaces the raw response for inspection
    const raw = error instanceof ApiError ? error.rawResponse : null;
    update({
      ...state,
      error: raw === null ? describe(error) : `${describe(error)}\n${raw}`,
    });
  }
}

async function handleSearch(): Promise<void> {
  if (state.parsedQuery === null || state.recordingId === null) {
    update({ ...state, error: "upload a recording and interpret a description first" });
    return;
  }
  if (state.searchInFlight) return;
  update({ ...state, searchInFlight: true });
  try {
    const response = await api.search({
      recording_id: state.recordingId,
      query: state.parsedQuery,
      criticality_config: criticalityConfig(),
    });
    update(applySearchResponse(state, response));
  } catch (error) {
    update({ ...state, searchInFlight: false, error: describe(error) });
  }
}

async function handleSelect(scenarioId: string): Promise<void> {
  try {
    const playback = await api.frames(scenarioId);
    update(selectScenario(state, scenarioId, playback));
  } catch (error) {
    update({ ...state, error: describe(error) });
  }
}

async function handleExport(format: "xosc" | "cmtxt"): Promise<void> {
  if (state.selectedScenarioId === null) return;
  try {
    const file = await api.exportScenario(state.selectedScenarioId, format);
    triggerDownload(file.filename, file.content, file.mediaType);
  } catch (error) {
    toast(`export failed: ${describe(error)}`);
  }
}

function describe(error: unknown): string {
  return error instanceof Error ? error.message : String(error);
}

function render(): void {
  renderQueryPanel(byId("query-panel"), state, {
    onDraftChange: (description) => {
      state = setDraft(state, description); // no re-render while typing
    },
    onProviderChange: (provider) => update({ ...state, provider }),
    onInterpret: () => void handleInterpret(),
    onQueryEdit: (query) => update(setParsedQuery(state, query)),
    onSearch: () => void handleSearch(),
  });
  renderPoolTable(byId("pool-table"), state, {
    onSort: (key) => update(setSort(state, key)),
    onToggleNearMisses: () => update(toggleNearMisses(state)),
    onSelect: (scenarioId) => void handleSelect(scenarioId),
  });
  renderPlayback(byId("playback"), state, {
    onScrub: (cursor) => update(setCursor(state, cursor)),
    onExport: (format) => void handleExport(format),
  });
}

function init(): void {
  const metric = byId("metric") as HTMLSelectElement;
  metric.replaceChildren();
  const none = document.createElement("option");
  none.value = "";
  none.textContent = "no criticality filter";
  metric.appendChild(none);
  for (const kind of METRIC_KINDS) {
    const option = document.createElement("option");
    option.value = kind;
    option.textContent = kind;
    metric.appendChild(option);
  }

  const upload = byId("upload") as HTMLInputElement;
  upload.addEventListener("change", () => {
    const file = upload.files?.[0];
    if (file !== undefined) void handleUpload(file);
  });

  render();
}

init();
