/** Exception submission flow: kind selector, expiry capped at 90 days for
 * temporaries, and an inline note showing the approver level each residual
 * risk requires. Server-side validation is authoritative; rejections are
 * displayed verbatim. */

import type { ExceptionRecord, ExceptionRequest } from "../types.js";
import { escapeHtml } from "../format.js";

export const TEMPORARY_MAX_DAYS = 90;

export function maxExpiryDate(granted: string): string {
  const base = new Date(`${granted}T00:00:00Z`);
  base.setUTCDate(base.getUTCDate() + TEMPORARY_MAX_DAYS);
  return base.toISOString().slice(0, 10);
}

export function validateExpiry(granted: string, expiry: string): string | null {
  const from = Date.parse(`${granted}T00:00:00Z`);
  const to = Date.parse(`${expiry}T00:00:00Z`);
  if (Number.isNaN(to)) return "temporary exceptions need an expiry date";
  const days = Math.round((to - from) / 86_400_000);
  if (days > TEMPORARY_MAX_DAYS) {
    return `temporary exceptions last at most ${TEMPORARY_MAX_DAYS} days (got ${days})`;
  }
  return null;
}

export const APPROVER_NOTES: Record<ExceptionRequest["residual_risk"], string> = {
  low: "requires AI CoE or higher",
  medium: "requires Risk Manager or higher",
  high: "requires Risk Committee or C-suite",
};

export function approverNote(residual: ExceptionRequest["residual_risk"]): string {
  return APPROVER_NOTES[residual];
}

export function renderExceptionForm(systemId: string, today: string): string {
  return `
    <section class="exception-form">
      <h1>${escapeHtml(systemId)} — request an exception</h1>
      <form id="exception-form" data-system="${escapeHtml(systemId)}">
        <label>Kind
          <select name="kind">
            <option value="risk_acceptance">Risk acceptance</option>
            <option value="temporary">Temporary (max ${TEMPORARY_MAX_DAYS} days)</option>
            <option value="permanent">Permanent (annual re-assessment)</option>
          </select>
        </label>
        <label>Gap description <textarea name="gap_description" required></textarea></label>
        <label>Residual risk
          <select name="residual_risk">
            <option value="low">Low</option>
            <option value="medium">Medium</option>
            <option value="high">High</option>
          </select>
          <span class="approver-note" data-residual="low">${APPROVER_NOTES.low}</span>
        </label>
        <label>Approver role <input name="approver_role" placeholder="ai_coe" required /></label>
        <label>Target pillar (optional) <input name="pillar" /></label>
        <label>Target control (optional) <input name="control_id" /></label>
        <div class="temporary-fields" hidden>
          <label>Expiry
            <input name="expiry" type="date" min="${today}" max="${maxExpiryDate(today)}" />
          </label>
          <label>Remediation plan <input name="remediation_plan_ref" /></label>
        </div>
        <div class="permanent-fields" hidden>
          <label>Annual re-assessment due <input name="annual_reassessment_due" type="date" /></label>
        </div>
        <ul class="form-errors" hidden></ul>
        <button type="submit">Submit exception</button>
      </form>
      <div id="exception-list"></div>
    </section>`;
}

export function renderExceptionList(records: ExceptionRecord[]): string {
  const open = records.filter((record) => record.active);
  if (!open.length) return `<p class="empty-state">No open exceptions.</p>`;
  const rows = open
    .map(
      (record) => `
      <tr${record.overdue ? ' class="overdue"' : ""}>
        <td>${escapeHtml(record.exception_id)}</td>
        <td>${escapeHtml(record.kind)}</td>
        <td>${escapeHtml(record.gap_description)}</td>
        <td>${escapeHtml(record.residual_risk)}</td>
        <td>${escapeHtml(record.approver_role)}</td>
        <td>${record.expiry ? escapeHtml(record.expiry) : "–"}${record.overdue ? " (overdue)" : ""}</td>
      </tr>`,
    )
    .join("\n");
  return `
    <table class="exceptions">
      <thead><tr><th>id</th><th>kind</th><th>gap</th><th>residual</th><th>approver</th><th>expiry</th></tr></thead>
      <tbody>${rows}</tbody>
    </table>`;
}
