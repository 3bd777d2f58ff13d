/** Presentation helpers. Numbers pass through untouched (no rounding, no
 * arithmetic): what the API sent is what the screen shows. */

import type { Band } from "./types.js";

export const BAND_COLORS: Record<Band, string> = {
  low: "green",
  moderate: "yellow",
  elevated: "orange",
  high: "red",
};

export const BAND_LABELS: Record<Band, string> = {
  low: "Low (Green)",
  moderate: "Moderate (Yellow)",
  elevated: "Elevated (Orange)",
  high: "High (Red)",
};

export function num(value: number | null | undefined): string {
  return value === null || value === undefined ? "–" : String(value);
}

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

export function bandBadge(band: Band | null): string {
  if (band === null) return `<span class="badge">unassessed</span>`;
  const color = BAND_COLORS[band];
  const label = BAND_LABELS[band];
  return `<span class="badge badge-${color}" data-band="${band}">${label}</span>`;
}
