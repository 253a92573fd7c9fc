// Feedback card state: summary by default, detailed breakdown on request.
// The toggle is pure presentation — it fetches detail=full at most once and
// caches it.

import type { FeedbackFull, MetricSection, TutorApi } from './api.js';

export interface FeedbackViewState {
  summary: string;
  detailVisible: boolean;
  sections: MetricSection[] | null; // null until fetched
}

export function feedbackArrived(summary: string): FeedbackViewState {
  return { summary, detailVisible: false, sections: null };
}

export function visibleSections(state: FeedbackViewState): MetricSection[] {
  return state.detailVisible && state.sections ? state.sections : [];
}

export async function toggleDetail(
  state: FeedbackViewState,
  sessionId: string,
  api: TutorApi,
): Promise<FeedbackViewState> {
  if (state.detailVisible) {
    return { ...state, detailVisible: false };
  }
  if (state.sections) {
    return { ...state, detailVisible: true };
  }
  const full: FeedbackFull = await api.getFeedbackFull(sessionId);
  return { ...state, detailVisible: true, sections: full.reports };
}
