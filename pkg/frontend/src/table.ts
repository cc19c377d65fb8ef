// Pure view logic for the ranked-list explorer. The view only reorders and
// filters server rows; scores are never recomputed or mutated.

import type { RankedRow } from "./types.js";

export type SortKey = "rank" | "id" | "name" | "aggregate" | { member: number };

export interface ViewState {
  sortKey: SortKey;
  descending: boolean;
  filter: string;
}

export const DEFAULT_VIEW: ViewState = { sortKey: "rank", descending: false, filter: "" };

function keyValue(row: RankedRow, key: SortKey): number | string {
  if (typeof key === "object") return row.per_model[key.member];
  return row[key];
}

export function sortRows(rows: RankedRow[], key: SortKey, descending: boolean): RankedRow[] {
  const sorted = [...rows].sort((a, b) => {
    const va = keyValue(a, key);
    const vb = keyValue(b, key);
    const cmp = typeof va === "number" && typeof vb === "number"
      ? va - vb
      : String(va).localeCompare(String(vb));
    return descending ? -cmp : cmp;
  });
  return sorted;
}

export function filterRows(rows: RankedRow[], query: string): RankedRow[] {
  const needle = query.trim().toLowerCase();
  if (!needle) return rows;
  return rows.filter((row) => row.name.toLowerCase().includes(needle));
}

export function applyView(rows: RankedRow[], view: ViewState): RankedRow[] {
  return sortRows(filterRows(rows, view.filter), view.sortKey, view.descending);
}

/** Toggle sorting: same column flips direction, a new column sorts ascending. */
export function nextView(view: ViewState, clicked: SortKey): ViewState {
  const same = JSON.stringify(view.sortKey) === JSON.stringify(clicked);
  return {
    ...view,
    sortKey: clicked,
    descending: same ? !view.descending : false,
  };
}

export function toCsv(rows: RankedRow[], memberNames: string[]): string {
  const quote = (value: string | number) => {
    const text = String(value);
    return /[",\n]/.test(text) ? `"${text.replace(/"/g, '""')}"` : text;
  };
  const header = ["rank", "id", "name", "aggregate", ...memberNames];
  const lines = [header.map(quote).join(",")];
  for (const row of rows) {
    lines.push([row.rank, row.id, row.name, row.aggregate, ...row.per_model]
      .map(quote).join(","));
  }
  return lines.join("\n") + "\n";
}
