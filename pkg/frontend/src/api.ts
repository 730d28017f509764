/** Typed client over the gateway HTTP/JSON API. One method per documented
 * endpoint; nothing else ever talks to the network. */

import type {
  BriefView,
  CampaignView,
  EventView,
  FeedbackResult,
  IterationReport,
  TicketView,
  TurnView,
} from "./types.js";

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ status: number; json(): Promise<unknown> }>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

export class GatewayClient {
  constructor(
    private readonly fetchLike: FetchLike,
    private readonly baseUrl: string = "",
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchLike(this.baseUrl + path, {
      method,
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = (await response.json()) as Record<string, unknown>;
    if (response.status >= 400) {
      throw new ApiError(response.status, String(payload["detail"] ?? payload["error"] ?? ""));
    }
    return payload as T;
  }

  getCampaign(id: string): Promise<CampaignView> {
    return this.request("GET", `/campaigns/${id}`);
  }

  /** Resolves to null when the campaign has no open turn (404). */
  async getCurrentTurn(id: string): Promise<TurnView | null> {
    try {
      return await this.request<TurnView>("GET", `/campaigns/${id}/turns/current`);
    } catch (error) {
      if (error instanceof ApiError && error.status === 404) return null;
      throw error;
    }
  }

  startTurn(id: string): Promise<{ ticket: string }> {
    return this.request("POST", `/campaigns/${id}/turns`);
  }

  pollTurn(ticket: string): Promise<TicketView> {
    return this.request("GET", `/turns/${ticket}`);
  }

  selectChoice(id: string, index: number): Promise<{ selected: number }> {
    return this.request("POST", `/campaigns/${id}/choice`, { index });
  }

  requestBrief(id: string, choice?: number): Promise<BriefView> {
    return this.request("POST", `/campaigns/${id}/brief`, choice ? { choice } : {});
  }

  submitFeedback(id: string, text: string): Promise<FeedbackResult> {
    return this.request("POST", `/campaigns/${id}/feedback`, { text });
  }

  getEvents(id: string, fromSeq = 1): Promise<{ events: EventView[] }> {
    return this.request("GET", `/campaigns/${id}/events?from=${fromSeq}`);
  }

  recordScore(body: {
    campaign_id: string;
    cursor: string;
    choice: number;
    relevance: number;
    progress: number;
    helpfulness: number;
    overwrite?: boolean;
  }): Promise<{ task: string; total: number }> {
    return this.request("POST", "/scores", body);
  }

  getIterationReport(): Promise<IterationReport> {
    return this.request("GET", "/reports/iterations");
  }
}
