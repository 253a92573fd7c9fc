// Typed client for the tutor service JSON API. Bearer token in the
// Authorization header; every error is the service's {code, message,
// retryable} envelope.

export interface ApiErrorBody {
  code: string;
  message: string;
  retryable: boolean;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public body: ApiErrorBody,
  ) {
    super(body.message);
  }
}

export interface RegisterResponse {
  student_id: string;
  role: 'Student' | 'Instructor';
}

export interface SessionResponse {
  session_id: string;
  problem_index: string;
  phase: Phase;
}

export type Phase = 'PreSubmission' | 'PostSubmission';
export type AssistanceLevel = 'MethodHint' | 'StepByStep' | 'OpenEnded';
export type SurveyCategory = 'Helpful' | 'AlreadyKnew' | 'ErrorsInFeedback' | 'Other';

export interface AnswerResponse {
  answer: string;
  guard_status: 'Clean' | 'Redacted';
  context_doc_ids: string[];
  phase: Phase;
}

export interface MetricSection {
  metric: string;
  heading: string;
  verdict: 'Pass' | 'Issue' | 'Indeterminate';
  explanation: string;
}

export interface FeedbackSummary {
  summary: string;
}

export interface FeedbackFull extends FeedbackSummary {
  reports: MetricSection[];
  rendered: string;
}

export interface ProblemUsageRow {
  problem_index: string;
  pre_submission_askers: number;
  feedback_requesters: number;
  post_submission_askers: number;
}

export interface ProblemsResponse {
  problems: ProblemUsageRow[];
  snapshot_event_id: string | null;
}

export interface SurveyResponseBody {
  total: number;
  empty: boolean;
  per_category: Record<string, { count: number; percentage: number }>;
}

export interface FaqCluster {
  canonical_question: string;
  member_count: number;
  phase: Phase;
  example_members: string[];
}

export interface StudentSummaryBody {
  student_id: string;
  problems_touched: string[];
  questions_asked: number;
  feedback_requests: number;
  narrative: string | null;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class TutorApi {
  private token: string | null = null;

  constructor(
    private baseUrl: string = '',
    private fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  setToken(token: string): void {
    this.token = token;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = { 'Content-Type': 'application/json' };
    if (this.token) headers['Authorization'] = `Bearer ${this.token}`;
    const resp = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const parsed = await resp.json();
    if (!resp.ok) {
      throw new ApiError(resp.status, parsed as ApiErrorBody);
    }
    return parsed as T;
  }

  register(alias: string): Promise<RegisterResponse> {
    return this.request('POST', '/register', { alias });
  }

  startSession(problemIndex: string): Promise<SessionResponse> {
    return this.request('POST', '/sessions', { problem_index: problemIndex });
  }

  askQuestion(sessionId: string, text: string, level: AssistanceLevel): Promise<AnswerResponse> {
    return this.request('POST', `/sessions/${sessionId}/questions`, {
      text,
      assistance_level: level,
    });
  }

  submitSolution(
    sessionId: string,
    text: string,
    equationFormat: 'LaTeX' | 'Plain' | 'Mixed',
  ): Promise<{ phase: Phase }> {
    return this.request('POST', `/sessions/${sessionId}/submission`, {
      text,
      equation_format: equationFormat,
    });
  }

  requestFeedback(sessionId: string): Promise<FeedbackSummary> {
    return this.request('POST', `/sessions/${sessionId}/feedback`);
  }

  getFeedback(sessionId: string, detail: 'summary' | 'full'): Promise<FeedbackSummary | FeedbackFull> {
    return this.request('GET', `/sessions/${sessionId}/feedback?detail=${detail}`);
  }

  getFeedbackFull(sessionId: string): Promise<FeedbackFull> {
    return this.request('GET', `/sessions/${sessionId}/feedback?detail=full`);
  }

  answerSurvey(sessionId: string, category: SurveyCategory, freeText?: string): Promise<unknown> {
    return this.request('POST', `/sessions/${sessionId}/survey`, {
      category,
      free_text: freeText,
    });
  }

  analyticsProblems(homework?: string): Promise<ProblemsResponse> {
    const qs = homework ? `?homework=${encodeURIComponent(homework)}` : '';
    return this.request('GET', `/analytics/problems${qs}`);
  }

  analyticsSurvey(): Promise<SurveyResponseBody> {
    return this.request('GET', '/analytics/survey');
  }

  analyticsFaqs(phase: Phase): Promise<{ clusters: FaqCluster[] }> {
    return this.request('GET', `/analytics/faqs?phase=${phase}`);
  }

  analyticsStudent(studentId: string): Promise<StudentSummaryBody> {
    return this.request('GET', `/analytics/students/${studentId}`);
  }
}
