// Chat view state for a live help session. Message order mirrors the server
// transcript, the phase badge echoes the server phase after every response,
// and one in-flight request at a time keeps double-clicks harmless.

import type { AssistanceLevel, Phase } from './api.js';

export interface ChatMessage {
  author: 'student' | 'tutor';
  text: string;
  redacted?: boolean;
}

export interface ChatViewState {
  sessionId: string;
  problemIndex: string;
  phase: Phase;
  assistanceLevel: AssistanceLevel;
  messages: ChatMessage[];
  pending: boolean;
  error: string | null;
  errorRetryable: boolean;
}

export function initialChatState(sessionId: string, problemIndex: string): ChatViewState {
  return {
    sessionId,
    problemIndex,
    phase: 'PreSubmission',
    assistanceLevel: 'OpenEnded',
    messages: [],
    pending: false,
    error: null,
    errorRetryable: false,
  };
}

export function canSend(state: ChatViewState): boolean {
  return !state.pending;
}

export function selectAssistanceLevel(state: ChatViewState, level: AssistanceLevel): ChatViewState {
  return { ...state, assistanceLevel: level };
}

export function questionSent(state: ChatViewState, text: string): ChatViewState {
  if (state.pending) return state; // in-flight request disables the control
  return {
    ...state,
    pending: true,
    error: null,
    messages: [...state.messages, { author: 'student', text }],
  };
}

export function answerReceived(
  state: ChatViewState,
  answer: string,
  phase: Phase,
  redacted: boolean,
): ChatViewState {
  return {
    ...state,
    pending: false,
    phase,
    messages: [...state.messages, { author: 'tutor', text: answer, redacted }],
  };
}

export function submissionAccepted(state: ChatViewState, phase: Phase): ChatViewState {
  return { ...state, pending: false, phase };
}

export function requestFailed(
  state: ChatViewState,
  message: string,
  retryable: boolean,
  status?: number,
): ChatViewState {
  const text = status === 429 ? 'Rate limit reached — please wait a little before asking again.' : message;
  return { ...state, pending: false, error: text, errorRetryable: retryable || status === 429 };
}

export function phaseBadgeLabel(state: ChatViewState): string {
  return state.phase === 'PostSubmission' ? 'submitted' : 'working';
}
