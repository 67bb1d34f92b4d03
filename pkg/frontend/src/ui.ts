/** DOM rendering for the query panel, pool table, playback and exports.
 *
 * Pure-ish: every render function rebuilds its container from the view
 * state; event wiring is passed in as callbacks.
 */
import { buildChartModel } from "./chart.js";
import {
  buildDiagramModel,
  diagramHeight,
  lanesInPlayback,
  xRange,
} from "./diagram.js";
import { rowAggregate, sortedPool, type SortKey, type ViewState } from "./state.js";
import { GROUP_MEMBERS, LATERAL, LONGITUDINAL, validateQueryDraft } from "./taxonomy.js";
import type { PoolRow, QueryJson } from "./types.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className = "",
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

function chipSelect(
  value: string,
  options: readonly string[],
  onChange: (value: string) => void,
): HTMLSelectElement {
  const select = el("select", "chip");
  for (const option of options) {
    const opt = el("option", "", option);
    opt.value = option;
    select.appendChild(opt);
  }
  if (!options.includes(value)) {
    // preserve an out-of-taxonomy value so validation can flag it
    const opt = el("option", "", value);
    opt.value = value;
    select.appendChild(opt);
  }
  select.value = value;
  select.addEventListener("change", () => onChange(select.value));
  return select;
}

export interface QueryPanelCallbacks {
  onDraftChange(description: string): void;
  onProviderChange(provider: "offline" | "remote"): void;
  onInterpret(): void;
  onQueryEdit(query: QueryJson): void;
  onSearch(): void;
}

export function renderQueryPanel(
  container: HTMLElement,
  state: ViewState,
  callbacks: QueryPanelCallbacks,
): void {
  container.replaceChildren();

  const description = el("textarea", "description");
  description.placeholder =
    "Describe the scenario, e.g. “The ego vehicle keeps its velocity. " +
    "Target vehicle #1 starts in the left adjacent lane, accelerates and " +
    "changes lanes to the right, ending in front of the ego vehicle.”";
  description.value = state.draftDescription;
  description.addEventListener("input", () =>
    callbacks.onDraftChange(description.value),
  );
  container.appendChild(description);

  const controls = el("div", "controls");
  const provider = chipSelect(state.provider, ["offline", "remote"], (value) =>
    callbacks.onProviderChange(value as "offline" | "remote"),
  );
  controls.appendChild(provider);
  const interpret = el("button", "", "Interpret");
  interpret.addEventListener("click", callbacks.onInterpret);
  controls.appendChild(interpret);
  container.appendChild(controls);

  if (state.parsedQuery !== null) {
    container.appendChild(
      renderQueryChips(state.parsedQuery, callbacks.onQueryEdit),
    );
    const violations = validateQueryDraft(state.parsedQuery);
    if (violations.length > 0) {
      const box = el("div", "validation-errors");
      for (const violation of violations) {
        box.appendChild(el("div", "", violation));
      }
      container.appendChild(box);
    }
    const search = el("button", "primary", "Search");
    search.disabled = violations.length > 0 || state.searchInFlight;
    search.addEventListener("click", callbacks.onSearch);
    container.appendChild(search);
  }

  if (state.error !== null) {
    container.appendChild(el("div", "error", state.error));
  }
}

function positionChips(
  label: string,
  position: { group: string; member: string },
  onChange: (group: string, member: string) => void,
): HTMLElement {
  const row = el("div", "chip-row");
  row.appendChild(el("span", "chip-label", label));
  const groups = Object.keys(GROUP_MEMBERS);
  row.appendChild(
    chipSelect(position.group, groups, (group) => {
      const members = GROUP_MEMBERS[group] ?? [];
      onChange(group, members[0] ?? position.member);
    }),
  );
  row.appendChild(
    chipSelect(position.member, GROUP_MEMBERS[position.group] ?? [], (member) =>
      onChange(position.group, member),
    ),
  );
  return row;
}

function renderQueryChips(
  query: QueryJson,
  onEdit: (query: QueryJson) => void,
): HTMLElement {
  const panel = el("div", "query-chips");

  const ego = el("fieldset", "vehicle-chips");
  ego.appendChild(el("legend", "", "Ego vehicle"));
  ego.appendChild(
    chipSelect(query.ego.longitudinal, LONGITUDINAL, (value) =>
      onEdit({ ...query, ego: { ...query.ego, longitudinal: value } }),
    ),
  );
  ego.appendChild(
    chipSelect(query.ego.lateral, LATERAL, (value) =>
      onEdit({ ...query, ego: { ...query.ego, lateral: value } }),
    ),
  );
  panel.appendChild(ego);

  query.targets.forEach((target, index) => {
    const patch = (changes: Partial<typeof target>): void => {
      const targets = query.targets.map((t, i) =>
        i === index ? { ...t, ...changes } : t,
      );
      onEdit({ ...query, targets });
    };
    const box = el("fieldset", "vehicle-chips");
    box.appendChild(el("legend", "", `Target vehicle #${index + 1}`));
    box.appendChild(
      chipSelect(target.longitudinal, LONGITUDINAL, (value) =>
        patch({ longitudinal: value }),
      ),
    );
    box.appendChild(
      chipSelect(target.lateral, LATERAL, (value) => patch({ lateral: value })),
    );
    box.appendChild(
      positionChips("start", target.start, (group, member) =>
        patch({ start: { group, member } }),
      ),
    );
    box.appendChild(
      positionChips("end", target.end, (group, member) =>
        patch({ end: { group, member } }),
      ),
    );
    panel.appendChild(box);
  });

  return panel;
}

export interface PoolTableCallbacks {
  onSort(key: SortKey): void;
  onToggleNearMisses(): void;
  onSelect(scenarioId: string): void;
}

export function renderPoolTable(
  container: HTMLElement,
  state: ViewState,
  callbacks: PoolTableCallbacks,
): void {
  container.replaceChildren();

  if (state.pool.length === 0 && state.nearMisses.length === 0) {
    container.appendChild(
      el("div", "empty-state", "No scenarios yet — run a search."),
    );
    return;
  }
  if (state.pool.length === 0) {
    container.appendChild(
      el(
        "div",
        "empty-state",
        "The query matched no scenarios; toggle near misses to see why candidates were rejected.",
      ),
    );
  }

  const table = el("table", "pool");
  const head = el("tr");
  const headers: [string, SortKey | null][] = [
    ["ego", "ego_id"],
    ["targets", null],
    ["window", "window_start"],
    ["aggregate", "aggregate"],
    ["pass", null],
  ];
  for (const [label, key] of headers) {
    const th = el("th", key !== null ? "sortable" : "", label);
    if (key !== null) {
      th.addEventListener("click", () => callbacks.onSort(key));
      if (state.sortKey === key) {
        th.textContent = `${label} ${state.sortDirection === "asc" ? "▲" : "▼"}`;
      }
    }
    head.appendChild(th);
  }
  table.appendChild(head);

  for (const row of sortedPool(state)) {
    table.appendChild(poolRowElement(row, state, callbacks));
  }
  container.appendChild(table);

  const toggle = el("label", "near-miss-toggle");
  const checkbox = el("input");
  checkbox.type = "checkbox";
  checkbox.checked = state.showNearMisses;
  checkbox.addEventListener("change", callbacks.onToggleNearMisses);
  toggle.appendChild(checkbox);
  toggle.appendChild(
    document.createTextNode(
      ` show ${state.nearMisses.length} rejected near misses`,
    ),
  );
  container.appendChild(toggle);

  if (state.showNearMisses) {
    const list = el("ul", "near-misses");
    for (const miss of state.nearMisses) {
      list.appendChild(
        el(
          "li",
          "",
          `ego ${miss.ego_id} / target ${miss.target_id} ` +
            `[${miss.window[0]}..${miss.window[1]}]: ${miss.reasons.join("; ")}`,
        ),
      );
    }
    container.appendChild(list);
  }
}

function poolRowElement(
  row: PoolRow,
  state: ViewState,
  callbacks: PoolTableCallbacks,
): HTMLElement {
  const tr = el("tr", row.passes ? "passes" : "fails");
  if (row.scenario_id === state.selectedScenarioId) tr.classList.add("selected");
  tr.appendChild(el("td", "", String(row.ego_id)));
  tr.appendChild(
    el("td", "", row.targets.map((t) => String(t.target_id)).join(", ")),
  );
  tr.appendChild(
    el("td", "", `${row.scenario_window[0]}..${row.scenario_window[1]}`),
  );
  const aggregate = rowAggregate(row);
  tr.appendChild(el("td", "", aggregate === null ? "—" : aggregate.toFixed(3)));
  tr.appendChild(el("td", "", row.passes ? "✓" : "✗"));
  tr.addEventListener("click", () => callbacks.onSelect(row.scenario_id));
  return tr;
}

export interface PlaybackCallbacks {
  onScrub(cursor: number): void;
  onExport(format: "xosc" | "cmtxt"): void;
}

export function renderPlayback(
  container: HTMLElement,
  state: ViewState,
  callbacks: PlaybackCallbacks,
): void {
  container.replaceChildren();
  const playback = state.playback;
  if (playback === null) {
    container.appendChild(
      el("div", "empty-state", "Select a scenario to replay it."),
    );
    return;
  }
  const frame = playback.frames[state.cursor];
  if (frame === undefined) return;

  const lanes = lanesInPlayback(playback);
  const range = xRange(playback);
  const width = 720;

  const diagram = el("canvas", "diagram");
  diagram.width = width;
  diagram.height = diagramHeight(lanes.length);
  drawDiagram(diagram, state, lanes, range);
  container.appendChild(diagram);

  const scrubber = el("input", "scrubber");
  scrubber.type = "range";
  scrubber.min = "0";
  scrubber.max = String(playback.frames.length - 1);
  scrubber.value = String(state.cursor);
  scrubber.addEventListener("input", () =>
    callbacks.onScrub(Number(scrubber.value)),
  );
  container.appendChild(scrubber);
  container.appendChild(
    el(
      "div",
      "time-label",
      `t = ${frame.time.toFixed(2)} s (frame ${frame.frame})`,
    ),
  );

  if (playback.metric !== null) {
    for (const [targetId, _] of Object.entries(playback.frames[0]?.metrics ?? {})) {
      const series = playback.frames.map((f) => f.metrics[targetId] ?? null);
      const chart = el("canvas", "metric-chart");
      chart.width = width;
      chart.height = 140;
      drawChart(chart, series, state.cursor, `${playback.metric} vs target ${targetId}`);
      container.appendChild(chart);
    }
  }

  const exports = el("div", "export-buttons");
  for (const format of ["xosc", "cmtxt"] as const) {
    const button = el(
      "button",
      "",
      format === "xosc" ? "Download OpenSCENARIO" : "Download CarMaker text",
    );
    button.addEventListener("click", () => callbacks.onExport(format));
    exports.appendChild(button);
  }
  container.appendChild(exports);
}

function drawDiagram(
  canvas: HTMLCanvasElement,
  state: ViewState,
  lanes: number[],
  range: { min: number; max: number },
): void {
  const playback = state.playback;
  const frame = playback?.frames[state.cursor];
  if (playback === undefined || playback === null || frame === undefined) return;
  const ctx = canvas.getContext("2d");
  if (ctx === null) return;
  const model = buildDiagramModel(frame, lanes, range, canvas.width);

  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.strokeStyle = "#999";
  ctx.setLineDash([12, 8]);
  for (const bound of model.laneBounds) {
    ctx.beginPath();
    ctx.moveTo(0, bound.yTop);
    ctx.lineTo(canvas.width, bound.yTop);
    ctx.stroke();
    ctx.fillStyle = "#bbb";
    ctx.setLineDash([]);
    ctx.fillText(`lane ${bound.lane}`, 4, bound.yTop + 12);
    ctx.setLineDash([12, 8]);
  }
  ctx.setLineDash([]);

  for (const vehicle of model.vehicles) {
    ctx.beginPath();
    ctx.setLineDash(vehicle.dashed ? [5, 4] : []);
    ctx.strokeStyle = vehicle.isEgo ? "#0b6" : "#06b";
    ctx.lineWidth = 2;
    ctx.strokeRect(vehicle.x, vehicle.y, vehicle.width, vehicle.height);
    ctx.fillStyle = ctx.strokeStyle;
    ctx.fillText(String(vehicle.id), vehicle.x, vehicle.y - 3);
  }
  ctx.setLineDash([]);
}

function drawChart(
  canvas: HTMLCanvasElement,
  series: (number | null)[],
  cursor: number,
  label: string,
): void {
  const ctx = canvas.getContext("2d");
  if (ctx === null) return;
  const model = buildChartModel(series, cursor, canvas.width, canvas.height - 16);
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.fillStyle = "#666";
  ctx.fillText(label, 4, 12);
  ctx.save();
  ctx.translate(0, 16);
  ctx.strokeStyle = "#06b";
  ctx.lineWidth = 1.5;
  for (const segment of model.segments) {
    ctx.beginPath();
    segment.forEach((point, i) => {
      if (i === 0) ctx.moveTo(point.x, point.y);
      else ctx.lineTo(point.x, point.y);
    });
    ctx.stroke();
  }
  ctx.strokeStyle = "#d33";
  ctx.beginPath();
  ctx.moveTo(model.cursorX, 0);
  ctx.lineTo(model.cursorX, canvas.height - 16);
  ctx.stroke();
  ctx.restore();
}

export function triggerDownload(filename: string, content: string, mediaType: string): void {
  const blob = new Blob([content], { type: mediaType });
  const url = URL.createObjectURL(blob);
  const anchor = document.createElement("a");
  anchor.href = url;
  anchor.download = filename;
  anchor.click();
  URL.revokeObjectURL(url);
}

export function toast(message: string): void {
  const node = el("div", "toast", message);
  document.body.appendChild(node);
  setTimeout(() => node.remove(), 4000);
}
