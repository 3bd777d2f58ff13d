/** Hash-routed single-page shell. All data arrives from /api/v1; this file is
 * DOM glue only — rendering lives in the view modules and every number shown
 * comes from an API response. */

import { ApiClient, ApiError } from "./api.js";
import type { DecisionFormState, } from "./views/gateReview.js";
import {
  buildDecisionRequest,
  renderDecisionError,
  renderDecisionResult,
  renderGateReview,
  validateDecisionForm,
} from "./views/gateReview.js";
import {
  approverNote,
  renderExceptionForm,
  renderExceptionList,
  validateExpiry,
} from "./views/exceptions.js";
import { renderLoginPrompt, renderPortfolio } from "./views/portfolio.js";
import { escapeHtml } from "./format.js";
import type { ExceptionRequest, GateEvaluation, Outcome, Session } from "./types.js";

const root = () => document.getElementById("app") as HTMLElement;

function today(): string {
  return new Date().toISOString().slice(0, 10);
}

function loadSession(): Session | null {
  const raw = sessionStorage.getItem("trust-gate-session");
  return raw ? (JSON.parse(raw) as Session) : null;
}

function saveSession(session: Session): void {
  sessionStorage.setItem("trust-gate-session", JSON.stringify(session));
}

function client(session: Session): ApiClient {
  return new ApiClient(sessionStorage.getItem("trust-gate-base") ?? "", session.token);
}

function showLogin(message?: string): void {
  root().innerHTML = renderLoginPrompt(message);
  const form = document.getElementById("login-form") as HTMLFormElement;
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const data = new FormData(form);
    sessionStorage.setItem("trust-gate-base", String(data.get("base") ?? ""));
    // roles come back on the first authenticated call; stored lazily
    saveSession({ actor: "", roles: [], token: String(data.get("token") ?? "") });
    void route();
  });
}

function showError(error: unknown): void {
  if (error instanceof ApiError && error.status === 401) {
    showLogin("Session expired or token rejected — sign in again");
    return;
  }
  const message = error instanceof Error ? error.message : String(error);
  root().innerHTML = `
    <section class="error">
      <p>${escapeHtml(message)}</p>
      <button id="retry">Retry</button>
    </section>`;
  document.getElementById("retry")?.addEventListener("click", () => void route());
}

async function showPortfolio(session: Session): Promise<void> {
  const report = await client(session).portfolioScorecard();
  root().innerHTML = renderPortfolio(report);
}

async function showProject(session: Session, systemId: string): Promise<void> {
  const api = client(session);
  const report = await api.projectScorecard(systemId);
  const body = report.body as { gate?: number };
  const gate = body.gate ?? 0;
  root().innerHTML = `
    <nav><a href="#/">← portfolio</a></nav>
    <section class="project">
      <h1>${escapeHtml(systemId)}</h1>
      <p class="meta">audit sequence ${report.as_of_sequence}</p>
      <p>
        <a href="#/system/${encodeURIComponent(systemId)}/gate/${gate}">Open gate ${gate} review</a>
        · <a href="#/system/${encodeURIComponent(systemId)}/exceptions">Exceptions</a>
      </p>
      <pre class="report-json">${escapeHtml(JSON.stringify(report.body, null, 2))}</pre>
    </section>`;
}

async function showGateReview(session: Session, systemId: string, gate: number): Promise<void> {
  const api = client(session);
  const evaluation = await api.gateEvaluation(systemId, gate);
  root().innerHTML = `<nav><a href="#/system/${encodeURIComponent(systemId)}">← ${escapeHtml(systemId)}</a></nav>` +
    renderGateReview(evaluation, today());
  wireDecisionForm(session, evaluation);
}

function wireDecisionForm(session: Session, evaluation: GateEvaluation): void {
  const form = document.getElementById("decision-form") as HTMLFormElement;
  const conditional = form.querySelector(".conditional-fields") as HTMLElement;
  const errors = form.querySelector(".form-errors") as HTMLUListElement;

  form.addEventListener("change", () => {
    const data = new FormData(form);
    conditional.hidden = data.get("outcome") !== "conditional_pass";
  });

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const data = new FormData(form);
    const state: DecisionFormState = {
      outcome: String(data.get("outcome")) as Outcome,
      remediationPlanRef: String(data.get("remediation_plan_ref") ?? ""),
      reReviewDue: String(data.get("re_review_due") ?? ""),
      rationale: String(data.get("rationale") ?? ""),
    };
    const problems = validateDecisionForm(evaluation, state, today());
    if (problems.length) {
      errors.innerHTML = problems.map((p) => `<li>${escapeHtml(p)}</li>`).join("");
      errors.hidden = false;
      return;
    }
    errors.hidden = true;
    void submitDecision(session, evaluation, state);
  });
}

async function submitDecision(
  session: Session,
  evaluation: GateEvaluation,
  state: DecisionFormState,
): Promise<void> {
  const api = client(session);
  const phaseBefore = evaluation.gate;
  try {
    const decision = await api.submitDecision(
      evaluation.system_id,
      evaluation.gate,
      buildDecisionRequest(state, session),
    );
    const systems = await api.listSystems();
    const row = systems.systems.find((s) => s.system_id === evaluation.system_id);
    const phaseAfter = row ? row.phase : phaseBefore;
    const slot = document.createElement("div");
    slot.innerHTML = renderDecisionResult(decision.outcome, phaseBefore, phaseAfter);
    root().prepend(slot);
  } catch (error) {
    if (error instanceof ApiError) {
      const slot = document.createElement("div");
      slot.innerHTML = renderDecisionError(error.body);
      root().prepend(slot);
      return;
    }
    showError(error);
  }
}

async function showExceptions(session: Session, systemId: string): Promise<void> {
  const api = client(session);
  root().innerHTML =
    `<nav><a href="#/system/${encodeURIComponent(systemId)}">← ${escapeHtml(systemId)}</a></nav>` +
    renderExceptionForm(systemId, today());
  const list = document.getElementById("exception-list") as HTMLElement;
  const existing = await api.listExceptions(systemId);
  list.innerHTML = renderExceptionList(existing.exceptions);
  wireExceptionForm(session, systemId, list);
}

function wireExceptionForm(session: Session, systemId: string, list: HTMLElement): void {
  const form = document.getElementById("exception-form") as HTMLFormElement;
  const temporary = form.querySelector(".temporary-fields") as HTMLElement;
  const permanent = form.querySelector(".permanent-fields") as HTMLElement;
  const note = form.querySelector(".approver-note") as HTMLElement;
  const errors = form.querySelector(".form-errors") as HTMLUListElement;

  form.addEventListener("change", () => {
    const data = new FormData(form);
    temporary.hidden = data.get("kind") !== "temporary";
    permanent.hidden = data.get("kind") !== "permanent";
    const residual = String(data.get("residual_risk")) as ExceptionRequest["residual_risk"];
    note.textContent = approverNote(residual);
    note.setAttribute("data-residual", residual);
  });

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const data = new FormData(form);
    const kind = String(data.get("kind")) as ExceptionRequest["kind"];
    const problems: string[] = [];
    if (kind === "temporary") {
      const expiryProblem = validateExpiry(today(), String(data.get("expiry") ?? ""));
      if (expiryProblem) problems.push(expiryProblem);
      if (!data.get("remediation_plan_ref")) problems.push("a remediation plan is required");
    }
    if (problems.length) {
      errors.innerHTML = problems.map((p) => `<li>${escapeHtml(p)}</li>`).join("");
      errors.hidden = false;
      return;
    }
    errors.hidden = true;
    const request: ExceptionRequest = {
      kind,
      gap_description: String(data.get("gap_description") ?? ""),
      residual_risk: String(data.get("residual_risk")) as ExceptionRequest["residual_risk"],
      approver_role: String(data.get("approver_role") ?? ""),
    };
    for (const key of ["pillar", "control_id", "expiry", "remediation_plan_ref",
                       "annual_reassessment_due"] as const) {
      const value = String(data.get(key) ?? "");
      if (value) request[key] = value;
    }
    void submitException(session, systemId, request, list, errors);
  });
}

async function submitException(
  session: Session,
  systemId: string,
  request: ExceptionRequest,
  list: HTMLElement,
  errors: HTMLUListElement,
): Promise<void> {
  const api = client(session);
  try {
    await api.grantException(systemId, request);
    const refreshed = await api.listExceptions(systemId);
    list.innerHTML = renderExceptionList(refreshed.exceptions);
  } catch (error) {
    if (error instanceof ApiError) {
      errors.innerHTML = `<li>${escapeHtml(error.body.message)}</li>`;
      errors.hidden = false;
      return;
    }
    showError(error);
  }
}

export async function route(): Promise<void> {
  const session = loadSession();
  if (!session) {
    showLogin();
    return;
  }
  const hash = window.location.hash || "#/";
  const gateMatch = hash.match(/^#\/system\/([^/]+)\/gate\/(\d+)$/);
  const exceptionsMatch = hash.match(/^#\/system\/([^/]+)\/exceptions$/);
  const systemMatch = hash.match(/^#\/system\/([^/]+)$/);
  try {
    if (gateMatch) {
      await showGateReview(session, decodeURIComponent(gateMatch[1]!), Number(gateMatch[2]!));
    } else if (exceptionsMatch) {
      await showExceptions(session, decodeURIComponent(exceptionsMatch[1]!));
    } else if (systemMatch) {
      await showProject(session, decodeURIComponent(systemMatch[1]!));
    } else {
      await showPortfolio(session);
    }
  } catch (error) {
    showError(error);
  }
}

if (typeof window !== "undefined" && typeof document !== "undefined" && document.getElementById("app")) {
  window.addEventListener("hashchange", () => void route());
  void route();
}
