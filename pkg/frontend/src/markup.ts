// HTML-string builders: everything displayed is derived verbatim from server
// responses, so these are directly testable without a DOM.

import type { ApiErrorBody, HistoryEntry, PredictResponse, RankedRow } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function scoreCard(response: PredictResponse): string {
  const kind = response.task === "classification" ? "binding probability" : "predicted affinity";
  return `<div class="score-card">
  <div class="score-value">${String(response.score)}</div>
  <div class="score-meta">${kind} &middot; model ${escapeHtml(response.model_id)}
    &middot; ${response.latency_ms.toFixed(1)} ms</div>
</div>`;
}

/** Inline 422 rendering: the offending input with a caret at the byte offset. */
export function inlineError(input: string, error: ApiErrorBody): string {
  let pointer = "";
  if (typeof error.offset === "number" && error.offset >= 0 && error.offset <= input.length) {
    pointer = `<pre class="error-pointer">${escapeHtml(input)}\n${" ".repeat(error.offset)}^ byte ${error.offset}</pre>`;
  }
  return `<div class="inline-error">
  <strong>${escapeHtml(error.error)}</strong>: ${escapeHtml(error.message)}
  ${pointer}
</div>`;
}

export function networkBanner(detail: string): string {
  return `<div class="banner error-banner">
  Could not reach the prediction service (${escapeHtml(detail)}).
  <button type="button" data-action="retry">Retry</button>
</div>`;
}

export function oversizeBanner(message: string): string {
  return `<div class="banner warn-banner">
  ${escapeHtml(message)} &mdash; run the batch CLI (<code>bindkit repurpose</code>)
  for libraries this large.
</div>`;
}

export function historyList(entries: HistoryEntry[]): string {
  if (entries.length === 0) {
    return `<p class="empty">No predictions yet this session.</p>`;
  }
  const items = entries.map((entry) => `<li>
    <span class="hist-score">${String(entry.response.score)}</span>
    <code>${escapeHtml(entry.request.smiles)}</code>
    vs <code>${escapeHtml(shorten(entry.request.sequence))}</code>
    <span class="hist-time">${escapeHtml(entry.timestamp)}</span>
  </li>`);
  return `<ol class="history">${items.join("\n")}</ol>`;
}

function shorten(sequence: string): string {
  return sequence.length > 18 ? sequence.slice(0, 15) + "..." : sequence;
}

export function rankedTable(rows: RankedRow[], memberNames: string[]): string {
  if (rows.length === 0) {
    return `<p class="empty">No compounds match the current filter.</p>`;
  }
  const memberHead = memberNames
    .map((name, i) => `<th data-sort-member="${i}">${escapeHtml(name)}</th>`)
    .join("");
  const body = rows.map((row) => `<tr>
    <td>${row.rank}</td><td>${escapeHtml(row.id)}</td><td>${escapeHtml(row.name)}</td>
    <td>${String(row.aggregate)}</td>
    ${row.per_model.map((s) => `<td>${String(s)}</td>`).join("")}
  </tr>`).join("\n");
  return `<table class="ranked">
  <thead><tr>
    <th data-sort="rank">rank</th><th data-sort="id">id</th>
    <th data-sort="name">name</th><th data-sort="aggregate">aggregate</th>
    ${memberHead}
  </tr></thead>
  <tbody>${body}</tbody>
</table>`;
}
