/** Enterprise scorecard view: portfolio trust index, band distribution with
 * the four-color mapping, and drill-down links per system. */

import type { Band, EnterpriseBody, ScorecardReport } from "../types.js";
import { BAND_COLORS, BAND_LABELS, bandBadge, escapeHtml, num } from "../format.js";

const BAND_ORDER: Band[] = ["low", "moderate", "elevated", "high"];

export function renderPortfolio(report: ScorecardReport<EnterpriseBody>): string {
  const body = report.body;
  if (body.no_systems) {
    return `
      <section class="portfolio" data-sequence="${report.as_of_sequence}">
        <h1>Enterprise Scorecard</h1>
        <p class="empty-state">No systems registered yet. Register a system through the
        API or CLI and it will appear here.</p>
      </section>`;
  }
  const distribution = BAND_ORDER.filter((band) => body.band_distribution[band])
    .map((band) => {
      const count = body.band_distribution[band] ?? 0;
      return `<li class="band-count badge-${BAND_COLORS[band]}" data-band="${band}" data-value="${count}">
        ${BAND_LABELS[band]}: ${count}</li>`;
    })
    .join("\n");
  const risks = Object.entries(body.open_risks)
    .map(([level, count]) => `<li data-risk-level="${level}" data-value="${count}">${escapeHtml(level)}: ${count}</li>`)
    .join("\n");
  const rows = body.systems
    .map(
      (row) => `
      <tr>
        <td><a href="#/system/${encodeURIComponent(row.system_id)}">${escapeHtml(row.system_id)}</a></td>
        <td>${escapeHtml(row.name)}</td>
        <td class="num" data-field="trust_index:${escapeHtml(row.system_id)}" data-value="${num(row.trust_index)}">${num(row.trust_index)}</td>
        <td>${bandBadge(row.band)}</td>
        <td class="num" data-field="phase:${escapeHtml(row.system_id)}" data-value="${row.phase}">${row.phase}</td>
        <td>${escapeHtml(row.risk_tier)}</td>
      </tr>`,
    )
    .join("\n");
  return `
    <section class="portfolio" data-sequence="${report.as_of_sequence}">
      <h1>Enterprise Scorecard</h1>
      <p class="meta">audit sequence ${report.as_of_sequence} · cadence ${escapeHtml(report.cadence)}</p>
      <p class="headline">Portfolio trust index:
        <strong data-field="portfolio_trust_index" data-value="${num(body.portfolio_trust_index)}">${num(body.portfolio_trust_index)}</strong>
      </p>
      <ul class="band-distribution">${distribution}</ul>
      <h2>Open risks</h2>
      <ul class="open-risks">${risks || "<li>none</li>"}</ul>
      <table class="systems">
        <thead><tr><th>system</th><th>name</th><th>trust index</th><th>band</th><th>phase</th><th>tier</th></tr></thead>
        <tbody>${rows}</tbody>
      </table>
    </section>`;
}

export function renderLoginPrompt(message = "Sign in with your access token"): string {
  return `
    <section class="login">
      <h1>trust-gate</h1>
      <p>${escapeHtml(message)}</p>
      <form id="login-form">
        <label>API base <input name="base" value="" placeholder="http://127.0.0.1:8400" /></label>
        <label>Token <input name="token" type="password" autocomplete="current-password" /></label>
        <button type="submit">Sign in</button>
      </form>
    </section>`;
}
