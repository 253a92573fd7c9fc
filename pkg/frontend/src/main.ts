// Single-page wiring: problem picker sidebar, chat center pane, submission
// drawer, feedback card, survey prompt, and the instructor dashboard.

import { ApiError, TutorApi } from './api.js';
import type { AssistanceLevel, Phase, SurveyCategory } from './api.js';
import {
  answerReceived,
  canSend,
  ChatViewState,
  initialChatState,
  phaseBadgeLabel,
  questionSent,
  requestFailed,
  selectAssistanceLevel,
  submissionAccepted,
} from './chatState.js';
import {
  chartsFromPayload,
  donutFromPayload,
  donutLabel,
} from './dashboardState.js';
import { feedbackArrived, FeedbackViewState, toggleDetail, visibleSections } from './feedbackView.js';
import { renderWithMath } from './latex.js';

const api = new TutorApi('');

const HW1_PROBLEMS = [
  '1.2-1', '1.4-2', '2.2-3', '2.4-1', '2.5-1', '3.2-2', '3.3-1', '3.4-4', '3.6-2',
];

let chat: ChatViewState | null = null;
let feedback: FeedbackViewState | null = null;
let role: 'Student' | 'Instructor' = 'Student';

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function renderChat(): void {
  if (!chat) return;
  el('phase-badge').textContent = phaseBadgeLabel(chat);
  const pane = el('chat-messages');
  pane.innerHTML = chat.messages
    .map((m) => {
      const cls = m.author === 'student' ? 'msg-student' : 'msg-tutor';
      const note = m.redacted ? '<div class="redacted-note">part of this answer was withheld</div>' : '';
      return `<div class="${cls}">${renderWithMath(m.text)}${note}</div>`;
    })
    .join('');
  pane.scrollTop = pane.scrollHeight;
  (el<HTMLButtonElement>('ask-btn')).disabled = !canSend(chat);
  (el<HTMLButtonElement>('submit-btn')).disabled = !canSend(chat);
  const errorBox = el('chat-error');
  errorBox.textContent = chat.error ?? '';
  el<HTMLButtonElement>('retry-btn').hidden = !chat.error || !chat.errorRetryable;
}

function renderFeedback(): void {
  const card = el('feedback-card');
  if (!feedback) {
    card.hidden = true;
    return;
  }
  card.hidden = false;
  el('feedback-summary').innerHTML = renderWithMath(feedback.summary);
  const sections = visibleSections(feedback);
  el('feedback-detail').innerHTML = sections
    .map(
      (s) =>
        `<section><h4>${s.heading} — ${s.verdict}</h4><div>${renderWithMath(s.explanation)}</div></section>`,
    )
    .join('');
  el('detail-toggle').textContent = feedback.detailVisible
    ? 'hide detailed breakdown'
    : 'show detailed breakdown';
  el('survey-card').hidden = false;
}

async function onRegister(): Promise<void> {
  const alias = el<HTMLInputElement>('alias-input').value.trim();
  if (!alias) return;
  const reg = await api.register(alias);
  api.setToken(reg.student_id);
  role = reg.role;
  el('login-view').hidden = true;
  if (role === 'Instructor') {
    el('dashboard-view').hidden = false;
    await refreshDashboard();
  } else {
    el('student-view').hidden = false;
    renderProblemPicker();
  }
}

function renderProblemPicker(): void {
  const list = el('problem-list');
  list.innerHTML = HW1_PROBLEMS.map(
    (p) => `<li><button class="problem-btn" data-problem="${p}">${p}</button></li>`,
  ).join('');
  list.querySelectorAll<HTMLButtonElement>('.problem-btn').forEach((btn) => {
    btn.addEventListener('click', () => void onPickProblem(btn.dataset.problem!));
  });
}

async function onPickProblem(problem: string): Promise<void> {
  const session = await api.startSession(problem);
  chat = initialChatState(session.session_id, session.problem_index);
  feedback = null;
  el('current-problem').textContent = problem;
  renderChat();
  renderFeedback();
}

async function onAsk(): Promise<void> {
  if (!chat || !canSend(chat)) return;
  const input = el<HTMLTextAreaElement>('question-input');
  const text = input.value.trim();
  if (!text) return;
  chat = questionSent(chat, text);
  renderChat();
  try {
    const resp = await api.askQuestion(chat.sessionId, text, chat.assistanceLevel);
    chat = answerReceived(chat, resp.answer, resp.phase, resp.guard_status === 'Redacted');
    input.value = '';
  } catch (err) {
    chat = failChat(err);
  }
  renderChat();
}

async function onSubmit(): Promise<void> {
  if (!chat || !canSend(chat)) return;
  const text = el<HTMLTextAreaElement>('submission-input').value.trim();
  if (!text) return;
  const format = el<HTMLSelectElement>('equation-format').value as 'LaTeX' | 'Plain' | 'Mixed';
  try {
    const resp = await api.submitSolution(chat.sessionId, text, format);
    chat = submissionAccepted(chat, resp.phase as Phase);
  } catch (err) {
    chat = failChat(err);
  }
  renderChat();
}

async function onRequestFeedback(): Promise<void> {
  if (!chat) return;
  try {
    const resp = await api.requestFeedback(chat.sessionId);
    feedback = feedbackArrived(resp.summary);
  } catch (err) {
    chat = failChat(err);
    renderChat();
  }
  renderFeedback();
}

async function onToggleDetail(): Promise<void> {
  if (!chat || !feedback) return;
  feedback = await toggleDetail(feedback, chat.sessionId, api);
  renderFeedback();
}

async function onSurvey(category: SurveyCategory): Promise<void> {
  if (!chat) return;
  let freeText: string | undefined;
  if (category === 'Other') {
    freeText = el<HTMLTextAreaElement>('survey-text').value.trim();
    if (!freeText) {
      el('survey-error').textContent = 'Please describe your experience for "Other".';
      return;
    }
  }
  await api.answerSurvey(chat.sessionId, category, freeText);
  el('survey-card').hidden = true;
}

function failChat(err: unknown): ChatViewState {
  if (err instanceof ApiError) {
    return requestFailed(chat!, err.body.message, err.body.retryable, err.status);
  }
  return requestFailed(chat!, String(err), true);
}

async function refreshDashboard(): Promise<void> {
  try {
    const problems = await api.analyticsProblems(HW1_PROBLEMS.join(','));
    const charts = chartsFromPayload(problems);
    el('usage-charts').innerHTML = charts.series
      .map(
        (s, i) =>
          `<div class="bar-chart" data-series="${i}"><h4>${s.label}</h4>` +
          charts.problemLabels
            .map(
              (label, j) =>
                `<div class="bar-row"><span>${label}</span>` +
                `<div class="bar" style="width:${s.values[j] * 12}px"></div>` +
                `<span class="bar-value">${s.values[j]}</span></div>`,
            )
            .join('') +
          '</div>',
      )
      .join('');

    const survey = await api.analyticsSurvey();
    if (survey.empty) {
      el('survey-donut').innerHTML = '<p class="empty-state">No survey responses yet.</p>';
    } else {
      el('survey-donut').innerHTML = donutFromPayload(survey)
        .map((slice) => `<div class="donut-slice">${donutLabel(slice)}</div>`)
        .join('');
    }

    for (const phase of ['PreSubmission', 'PostSubmission'] as Phase[]) {
      const faqs = await api.analyticsFaqs(phase);
      const target = phase === 'PreSubmission' ? 'faqs-pre' : 'faqs-post';
      el(target).innerHTML =
        faqs.clusters
          .map((c) => `<li>${c.canonical_question} <em>(${c.member_count})</em></li>`)
          .join('') || '<li class="empty-state">none yet</li>';
    }
  } catch (err) {
    if (err instanceof ApiError && err.status === 403) {
      el('dashboard-view').innerHTML = '<p>Access denied: instructor role required.</p>';
      return;
    }
    throw err;
  }
}

async function onStudentLookup(): Promise<void> {
  const id = el<HTMLInputElement>('student-lookup-input').value.trim();
  if (!id) return;
  const summary = await api.analyticsStudent(id);
  el('student-summary').innerHTML =
    `<p>Problems touched: ${summary.problems_touched.join(', ') || 'none'}</p>` +
    `<p>Questions asked: ${summary.questions_asked} — feedback requests: ${summary.feedback_requests}</p>` +
    (summary.narrative ? `<p>${summary.narrative}</p>` : '');
}

export function wireUp(): void {
  el('register-btn').addEventListener('click', () => void onRegister());
  el('ask-btn').addEventListener('click', () => void onAsk());
  el('retry-btn').addEventListener('click', () => void onAsk());
  el('submit-btn').addEventListener('click', () => void onSubmit());
  el('feedback-btn').addEventListener('click', () => void onRequestFeedback());
  el('detail-toggle').addEventListener('click', () => void onToggleDetail());
  el('student-lookup-btn').addEventListener('click', () => void onStudentLookup());
  el<HTMLSelectElement>('assistance-select').addEventListener('change', (ev) => {
    if (chat) chat = selectAssistanceLevel(chat, (ev.target as HTMLSelectElement).value as AssistanceLevel);
  });
  document.querySelectorAll<HTMLButtonElement>('.survey-btn').forEach((btn) => {
    btn.addEventListener('click', () => void onSurvey(btn.dataset.category as SurveyCategory));
  });
}

if (typeof document !== 'undefined' && document.getElementById('register-btn')) {
  wireUp();
}
