// Instructor dashboard view state. Every displayed number comes straight
// from an analytics API field — the client never recomputes analytics.

import type { FaqCluster, ProblemsResponse, SurveyResponseBody } from './api.js';

export interface BarSeries {
  label: string;
  values: number[];
}

export interface BarChartData {
  problemLabels: string[];
  series: [BarSeries, BarSeries, BarSeries];
}

export interface DonutSlice {
  category: string;
  count: number;
  percentage: number;
}

export interface DashboardViewState {
  homeworkScope: string;
  charts: BarChartData | null;
  surveyTotal: number;
  surveyEmpty: boolean;
  donut: DonutSlice[];
  faqsPre: FaqCluster[];
  faqsPost: FaqCluster[];
}

export function emptyDashboard(): DashboardViewState {
  return {
    homeworkScope: '',
    charts: null,
    surveyTotal: 0,
    surveyEmpty: true,
    donut: [],
    faqsPre: [],
    faqsPost: [],
  };
}

export function chartsFromPayload(payload: ProblemsResponse): BarChartData {
  const rows = payload.problems;
  return {
    problemLabels: rows.map((r) => r.problem_index),
    series: [
      { label: 'Pre-submission questions', values: rows.map((r) => r.pre_submission_askers) },
      { label: 'Feedback requests', values: rows.map((r) => r.feedback_requesters) },
      { label: 'Post-submission questions', values: rows.map((r) => r.post_submission_askers) },
    ],
  };
}

export function donutFromPayload(payload: SurveyResponseBody): DonutSlice[] {
  return Object.entries(payload.per_category).map(([category, v]) => ({
    category,
    count: v.count,
    percentage: v.percentage,
  }));
}

export function donutLabel(slice: DonutSlice): string {
  return `${slice.category}: ${slice.percentage}%`;
}
