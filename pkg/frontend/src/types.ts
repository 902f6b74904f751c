/** Server payload shapes. Every displayed number originates in one of these;
 * the console never derives labels or scores on its own. */

export type Verdict = "positive" | "negative" | "skip";
export type Stage = "initial" | "verification";

export interface QueueItem {
  listing_id: string;
  title: string;
  body: string;
  badges: Record<string, number>;
  my_verdict: Verdict | null;
}

export interface QueuePage {
  items: QueueItem[];
  page: number;
  page_size: number;
  remaining: number;
  exhausted: boolean;
}

export type CandidateStatus = "pending" | "confirmed" | "rejected";

export interface Candidate {
  listing_id: string;
  score: number;
  seeded: boolean;
  status: CandidateStatus;
  verdicts: Record<string, boolean>;
}

export interface CandidateList {
  items: Candidate[];
  count: number;
}

export interface Stats {
  dataset: {
    raw: number;
    rejected: number;
    filtered: number;
    dropped: number;
    review_sample: number;
    labeled: number;
    unlabeled: number;
  };
  agreement: {
    experts: Record<string, { positive: number; negative: number }>;
    intersection: { positive: number; negative: number };
    union: { positive: number; negative: number };
  };
  results: {
    kernel: string;
    policy: string;
    learner_positive: number;
    learner_negative: number;
    expert_confirmed: number;
    verified: number;
    precision: string | null;
  };
  phones: Record<string, number>;
  top_terms: [string, number][];
}

export interface ApiErrorBody {
  code: string;
  message: string;
}
