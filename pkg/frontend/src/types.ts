/** Payload shapes of the gateway API. The console renders these verbatim:
 * cursors, lints and statistics are never recomputed locally. */

export interface CampaignView {
  id: string;
  subject: string;
  status: "scoping" | "active" | "complete";
  cursor: string | null;
  stage_count: number;
  stage_titles: string[];
  rolling_summary: string;
  seq: number;
  state_hash: string;
}

export interface LintView {
  kind: string;
  message: string;
  choice?: number;
}

export interface TurnView {
  cursor: string;
  reported_cursor: string;
  summary: string;
  evaluation: string;
  choices: string[];
  lints: LintView[];
  selected: number | null;
  awaiting: string;
}

export interface TicketView {
  status: "pending" | "done" | "failed";
  campaign_id: string;
  turn?: TurnView;
  error?: string;
}

export interface BriefView {
  consolidated_summary: string;
  steps: string[];
  report_template: string;
  slots: string[];
}

export interface FeedbackResult {
  cursor: string | null;
  status: CampaignView["status"];
}

export interface EventView {
  seq: number;
  at: string;
  kind: string;
  payload: Record<string, unknown>;
}

export interface StageStats {
  per_stage: Record<string, number>;
  total: number;
}

export type IterationReport = Record<string, StageStats>;

export interface RubricToggles {
  relevance: boolean;
  progress: boolean;
  helpfulness: boolean;
}

/** The exact operator declaration that triggers a stage advance; the
 * sentinel toggle appends it verbatim. */
export const SENTINEL_PHRASE = "I'm ready to move to the next stage.";
