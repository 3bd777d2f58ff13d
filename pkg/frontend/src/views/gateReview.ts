/** Gate review: the deficit table and the decision form.
 *
 * The form never offers an outcome more permissive than the engine
 * recommendation, and conditional passes require a remediation plan plus a
 * re-review date 2-4 weeks out. Both rules are enforced again server-side;
 * the client checks exist purely for immediate feedback. */

import type {
  ApiErrorBody,
  DecisionRequest,
  GateEvaluation,
  Outcome,
  Recommendation,
  Session,
} from "../types.js";
import { bandBadge, escapeHtml, num } from "../format.js";

const PERMISSIVENESS: Record<Outcome, number> = { fail: 0, conditional_pass: 1, pass: 2 };

export interface OptionEnablement {
  pass: boolean;
  conditional_pass: boolean;
  fail: boolean;
}

/** An option is offered iff it does not upgrade the engine recommendation. */
export function optionEnablement(recommended: Recommendation): OptionEnablement {
  const ceiling = PERMISSIVENESS[recommended];
  return {
    pass: PERMISSIVENESS.pass <= ceiling,
    conditional_pass: PERMISSIVENESS.conditional_pass <= ceiling,
    fail: true,
  };
}

export const RE_REVIEW_MIN_DAYS = 14;
export const RE_REVIEW_MAX_DAYS = 28;

export function reReviewWindow(decidedOn: string): { min: string; max: string } {
  const base = new Date(`${decidedOn}T00:00:00Z`);
  const shift = (days: number) => {
    const when = new Date(base);
    when.setUTCDate(when.getUTCDate() + days);
    return when.toISOString().slice(0, 10);
  };
  return { min: shift(RE_REVIEW_MIN_DAYS), max: shift(RE_REVIEW_MAX_DAYS) };
}

export function validateReReviewDate(decidedOn: string, due: string): string | null {
  const from = Date.parse(`${decidedOn}T00:00:00Z`);
  const to = Date.parse(`${due}T00:00:00Z`);
  if (Number.isNaN(to)) return "re-review date is required";
  const days = Math.round((to - from) / 86_400_000);
  if (days < RE_REVIEW_MIN_DAYS || days > RE_REVIEW_MAX_DAYS) {
    return `re-review must fall 2-4 weeks after the decision (got ${days} days)`;
  }
  return null;
}

export interface DecisionFormState {
  outcome: Outcome;
  remediationPlanRef: string;
  reReviewDue: string;
  rationale: string;
}

/** Client-side validation mirror of the server rules; returns messages. */
export function validateDecisionForm(
  evaluation: GateEvaluation,
  form: DecisionFormState,
  today: string,
): string[] {
  const problems: string[] = [];
  const enabled = optionEnablement(evaluation.recommended);
  if (!enabled[form.outcome]) {
    problems.push(
      `outcome ${form.outcome} is more permissive than the recommendation ${evaluation.recommended}`,
    );
  }
  if (form.outcome === "conditional_pass") {
    if (!form.remediationPlanRef) problems.push("a remediation plan reference is required");
    const dateProblem = validateReReviewDate(today, form.reReviewDue);
    if (dateProblem) problems.push(dateProblem);
  }
  return problems;
}

export function buildDecisionRequest(
  form: DecisionFormState,
  session: Pick<Session, "actor" | "roles">,
): DecisionRequest {
  const request: DecisionRequest = {
    outcome: form.outcome,
    approvals: session.roles.map((role) => ({ role, actor: session.actor })),
  };
  if (form.outcome === "conditional_pass") {
    request.remediation_plan_ref = form.remediationPlanRef;
    request.re_review_due = form.reReviewDue;
  }
  request.rationale = form.rationale;
  return request;
}

const OUTCOME_LABELS: Record<Outcome, string> = {
  pass: "Pass",
  conditional_pass: "Conditional pass",
  fail: "Fail",
};

export function renderGateReview(evaluation: GateEvaluation, today: string): string {
  const enabled = optionEnablement(evaluation.recommended);
  const rows = evaluation.per_pillar
    .map(
      (check) => `
      <tr${check.excepted ? ' class="excepted"' : ""}>
        <td>${escapeHtml(check.pillar)}</td>
        <td class="num" data-field="required:${escapeHtml(check.pillar)}" data-value="${check.required}">${check.required}</td>
        <td class="num" data-field="actual:${escapeHtml(check.pillar)}" data-value="${check.actual}">${check.actual}</td>
        <td class="num deficit" data-field="deficit:${escapeHtml(check.pillar)}" data-value="${check.deficit}">${
          check.deficit > 0 ? `-${check.deficit}` : "0"
        }${check.excepted ? " (excepted)" : ""}</td>
      </tr>`,
    )
    .join("\n");
  const options = (Object.keys(OUTCOME_LABELS) as Outcome[])
    .map((outcome) => {
      const disabled = enabled[outcome] ? "" : " disabled";
      return `
      <label class="outcome${disabled ? " outcome-disabled" : ""}">
        <input type="radio" name="outcome" value="${outcome}"${disabled}
          ${outcome === "fail" ? "checked" : ""} />
        ${OUTCOME_LABELS[outcome]}
      </label>`;
    })
    .join("\n");
  const window = reReviewWindow(today);
  const reasons = evaluation.fail_reasons
    .map((reason) => `<li>${escapeHtml(reason)}</li>`)
    .join("\n");
  const threshold =
    evaluation.trust_index_threshold === null
      ? ""
      : ` / threshold <span class="num" data-field="trust_index_threshold" data-value="${evaluation.trust_index_threshold}">${evaluation.trust_index_threshold}</span>`;
  return `
    <section class="gate-review" data-sequence="${num(evaluation.as_of_sequence)}">
      <h1>${escapeHtml(evaluation.system_id)} — gate ${evaluation.gate} review</h1>
      <p class="recommendation recommendation-${evaluation.recommended}">
        Engine recommendation: <strong>${OUTCOME_LABELS[evaluation.recommended]}</strong>
      </p>
      <p>Trust index
        <span class="num" data-field="weighted_ti" data-value="${evaluation.trust_index.weighted_ti}">${evaluation.trust_index.weighted_ti}</span>${threshold}
        ${bandBadge(evaluation.trust_index.band)}
        ${evaluation.trust_index.injected ? '<em class="injected">(externally measured)</em>' : ""}
      </p>
      <p>Controls satisfied
        <span class="num" data-field="controls_satisfied" data-value="${evaluation.controls_satisfied}">${evaluation.controls_satisfied}</span>
        of
        <span class="num" data-field="controls_required" data-value="${evaluation.controls_required}">${evaluation.controls_required}</span>
      </p>
      <table class="deficits">
        <thead><tr><th>pillar</th><th>required</th><th>actual</th><th>deficit</th></tr></thead>
        <tbody>${rows}</tbody>
      </table>
      ${reasons ? `<ul class="fail-reasons">${reasons}</ul>` : ""}
      <form id="decision-form" data-system="${escapeHtml(evaluation.system_id)}" data-gate="${evaluation.gate}">
        <fieldset>
          <legend>Decision</legend>
          ${options}
        </fieldset>
        <div class="conditional-fields" hidden>
          <label>Remediation plan <input name="remediation_plan_ref" /></label>
          <label>Re-review due
            <input name="re_review_due" type="date" min="${window.min}" max="${window.max}" />
          </label>
          <p class="hint">re-review must fall between ${window.min} and ${window.max}</p>
        </div>
        <label>Rationale <textarea name="rationale"></textarea></label>
        <ul class="form-errors" hidden></ul>
        <button type="submit">Record decision</button>
      </form>
    </section>`;
}

export function renderDecisionError(error: ApiErrorBody): string {
  const missing = Array.isArray(error.details["missing_roles"])
    ? (error.details["missing_roles"] as string[])
    : [];
  const missingList = missing.map((role) => `<li>${escapeHtml(role)}</li>`).join("\n");
  return `
    <div class="decision-error" data-code="${escapeHtml(error.code)}">
      <p>${escapeHtml(error.message)}</p>
      ${missingList ? `<p>Missing approvals:</p><ul class="missing-roles">${missingList}</ul>` : ""}
    </div>`;
}

export function renderDecisionResult(outcome: Outcome, phaseBefore: number, phaseAfter: number): string {
  const movement =
    phaseAfter === phaseBefore
      ? `phase unchanged (${phaseBefore})`
      : `phase ${phaseBefore} → ${phaseAfter}`;
  return `<p class="decision-result">Recorded <strong>${OUTCOME_LABELS[outcome]}</strong>; ${movement}.</p>`;
}
