// Append-only session history, persisted so iteration survives reloads.

import type { HistoryEntry, PredictRequest, PredictResponse } from "./types.js";

export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

const HISTORY_KEY = "bindkit.history";
const INPUTS_KEY = "bindkit.inputs";

export class SessionHistory {
  private entries_: HistoryEntry[] = [];

  constructor(private readonly storage: StorageLike) {
    const raw = storage.getItem(HISTORY_KEY);
    if (raw) {
      try {
        this.entries_ = JSON.parse(raw) as HistoryEntry[];
      } catch {
        this.entries_ = [];
      }
    }
  }

  append(request: PredictRequest, response: PredictResponse, timestamp: string): void {
    this.entries_.push({ request, response, timestamp });
    this.storage.setItem(HISTORY_KEY, JSON.stringify(this.entries_));
  }

  /** Entries newest-first (render order). The log itself is append-only. */
  newestFirst(): HistoryEntry[] {
    return [...this.entries_].reverse();
  }

  get length(): number {
    return this.entries_.length;
  }
}

export function saveInputs(storage: StorageLike, inputs: PredictRequest): void {
  storage.setItem(INPUTS_KEY, JSON.stringify(inputs));
}

export function loadInputs(storage: StorageLike): PredictRequest | null {
  const raw = storage.getItem(INPUTS_KEY);
  if (!raw) return null;
  try {
    return JSON.parse(raw) as PredictRequest;
  } catch {
    return null;
  }
}
