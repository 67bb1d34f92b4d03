/** Wire types for the scenario-miner service JSON API. */

export interface PositionJson {
  group: string;
  member: string;
}

export interface TargetJson {
  start: PositionJson;
  end: PositionJson;
  longitudinal: string;
  lateral: string;
}

export interface QueryJson {
  ego: { longitudinal: string; lateral: string };
  targets: TargetJson[];
}

export interface UploadResponse {
  session_id: string;
  recording_id: string;
  track_count: number;
  frame_range: [number, number];
}

export interface ReportJson {
  kind: string;
  series: (number | null)[];
  aggregate: number | null;
  threshold: number;
  comparison: "le" | "ge";
  passes_threshold: boolean;
}

export interface TargetWindowJson {
  target_id: number;
  window: [number, number];
}

export interface PoolRow {
  scenario_id: string;
  ego_id: number;
  targets: TargetWindowJson[];
  scenario_window: [number, number];
  reports: ReportJson[];
  passes: boolean;
}

export interface NearMiss {
  ego_id: number;
  target_id: number;
  window: [number, number];
  reasons: string[];
}

export interface SearchResponse {
  pool: PoolRow[];
  rejected_near_misses: NearMiss[];
}

export interface CriticalityConfigJson {
  kind: string;
  threshold: number;
  comparison?: "le" | "ge";
  params?: {
    ttc_tau?: number;
    safety_time_ts?: number;
    max_deceleration?: number;
  };
}

export interface SearchRequest {
  recording_id: string;
  query: QueryJson;
  search_params?: Record<string, unknown>;
  criticality_config?: CriticalityConfigJson;
}

export interface VehicleState {
  id: number;
  is_ego: boolean;
  x: number;
  y: number;
  lane: number;
  width: number;
  height: number;
}

export interface FrameJson {
  frame: number;
  time: number;
  vehicles: VehicleState[];
  metrics: Record<string, number | null>;
}

export interface FramesResponse {
  scenario_id: string;
  window: [number, number];
  frame_rate: number;
  metric: string | null;
  frames: FrameJson[];
}

export interface ExportedFile {
  filename: string;
  mediaType: string;
  content: string;
}
