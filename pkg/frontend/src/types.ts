// Wire types mirroring the prediction service's JSON bodies.

export interface PredictRequest {
  smiles: string;
  sequence: string;
  model_id?: string;
}

export interface PredictResponse {
  score: number;
  task: "regression" | "classification";
  model_id: string;
  latency_ms: number;
}

export interface ApiErrorBody {
  error: string;
  message: string;
  offset?: number | null;
}

export interface ModelInfo {
  model_id: string;
  task: string;
  task_kind: string;
  drug_encoder: string | null;
  target_encoder: string | null;
}

export interface RankedRow {
  rank: number;
  id: string;
  name: string;
  aggregate: number;
  per_model: number[];
}

export interface RepurposeResponse {
  target: string;
  ensemble: string[];
  rows: RankedRow[];
  failed: { id: string; name: string; error: string }[];
}

export interface HistoryEntry {
  request: PredictRequest;
  response: PredictResponse;
  timestamp: string;
}
