// DOM glue for the workbench: the only module that touches document/window.

import { ApiClient, HttpError, ValidationError } from "./api.js";
import { loadInputs, saveInputs, SessionHistory } from "./history.js";
import {
  historyList, inlineError, networkBanner, oversizeBanner, rankedTable, scoreCard,
} from "./markup.js";
import { applyView, DEFAULT_VIEW, nextView, toCsv, ViewState } from "./table.js";
import type { RankedRow } from "./types.js";

const api = new ApiClient("");
const history = new SessionHistory(window.localStorage);

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

// -- predict form --------------------------------------------------------------

let pending = false;

async function onPredictSubmit(event: Event): Promise<void> {
  event.preventDefault();
  if (pending) return;
  const smiles = $<HTMLInputElement>("smiles").value.trim();
  const sequence = $<HTMLTextAreaElement>("sequence").value.trim();
  const modelId = $<HTMLSelectElement>("model").value || undefined;
  if (!smiles || !sequence) return;

  const button = $<HTMLButtonElement>("predict-btn");
  const result = $("predict-result");
  pending = true;
  button.disabled = true;
  try {
    saveInputs(window.localStorage, { smiles, sequence, model_id: modelId });
    const response = await api.predict({ smiles, sequence, model_id: modelId });
    result.innerHTML = scoreCard(response);
    history.append({ smiles, sequence, model_id: modelId }, response,
      new Date().toISOString());
    renderHistory();
  } catch (err) {
    if (err instanceof ValidationError) {
      // no history entry on validation failure
      result.innerHTML = inlineError(smiles, err.body);
    } else {
      result.innerHTML = networkBanner(err instanceof Error ? err.message : String(err));
      result.querySelector("[data-action=retry]")
        ?.addEventListener("click", () => void onPredictSubmit(event));
    }
  } finally {
    pending = false;
    button.disabled = false;
  }
}

function renderHistory(): void {
  $("history-pane").innerHTML = historyList(history.newestFirst());
}

// -- ranked-list explorer ---------------------------------------------------------

let serverRows: RankedRow[] = [];
let memberNames: string[] = [];
let view: ViewState = { ...DEFAULT_VIEW };

function renderTable(): void {
  const rows = applyView(serverRows, view);
  $("ranked-pane").innerHTML = rankedTable(rows, memberNames);
  for (const th of $("ranked-pane").querySelectorAll<HTMLElement>("th[data-sort]")) {
    th.addEventListener("click", () => {
      view = nextView(view, th.dataset.sort as ViewState["sortKey"]);
      renderTable();
    });
  }
  for (const th of $("ranked-pane").querySelectorAll<HTMLElement>("th[data-sort-member]")) {
    th.addEventListener("click", () => {
      view = nextView(view, { member: Number(th.dataset.sortMember) });
      renderTable();
    });
  }
}

async function onRepurposeSubmit(event: Event): Promise<void> {
  event.preventDefault();
  const sequence = $<HTMLTextAreaElement>("rp-sequence").value.trim();
  const libraryId = $<HTMLInputElement>("rp-library").value.trim();
  const pane = $("ranked-pane");
  try {
    const response = await api.repurpose(sequence, libraryId);
    serverRows = response.rows;
    memberNames = response.ensemble;
    view = { ...DEFAULT_VIEW };
    renderTable();
    $("ranked-failed").textContent = response.failed.length
      ? `${response.failed.length} entries failed to parse and were not ranked.`
      : "";
  } catch (err) {
    if (err instanceof HttpError && err.status === 413) {
      pane.innerHTML = oversizeBanner(err.message);
    } else if (err instanceof ValidationError) {
      pane.innerHTML = inlineError(sequence, err.body);
    } else {
      pane.innerHTML = networkBanner(err instanceof Error ? err.message : String(err));
    }
  }
}

function onExportCsv(): void {
  const rows = applyView(serverRows, view);
  const blob = new Blob([toCsv(rows, memberNames)], { type: "text/csv" });
  const link = document.createElement("a");
  link.href = URL.createObjectURL(blob);
  link.download = "ranked.csv";
  link.click();
  URL.revokeObjectURL(link.href);
}

function onResetView(): void {
  view = { ...DEFAULT_VIEW };
  $<HTMLInputElement>("rp-filter").value = "";
  renderTable();
}

// -- boot ----------------------------------------------------------------------------

async function boot(): Promise<void> {
  const saved = loadInputs(window.localStorage);
  if (saved) {
    $<HTMLInputElement>("smiles").value = saved.smiles;
    $<HTMLTextAreaElement>("sequence").value = saved.sequence;
  }
  renderHistory();

  try {
    const models = await api.models();
    const select = $<HTMLSelectElement>("model");
    select.innerHTML = models.map((m) =>
      `<option value="${m.model_id}">${m.model_id} (${m.drug_encoder}+${m.target_encoder})</option>`,
    ).join("");
    if (saved?.model_id) select.value = saved.model_id;
  } catch {
    // service may be starting; the form still works with the default model
  }

  $("predict-form").addEventListener("submit", (e) => void onPredictSubmit(e));
  $("repurpose-form").addEventListener("submit", (e) => void onRepurposeSubmit(e));
  $<HTMLInputElement>("rp-filter").addEventListener("input", (e) => {
    view = { ...view, filter: (e.target as HTMLInputElement).value };
    renderTable();
  });
  $("rp-export").addEventListener("click", onExportCsv);
  $("rp-reset").addEventListener("click", onResetView);
}

document.addEventListener("DOMContentLoaded", () => void boot());
