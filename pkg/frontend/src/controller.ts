/** Console state and actions.
 *
 * Thin-client rule: every value shown (cursor, lints, statistics, event
 * order) comes verbatim from API responses. The controller composes
 * requests and stores responses; it never advances cursors or re-derives
 * statistics locally. Each user action issues exactly one mutating call;
 * the surrounding GETs are snapshot refreshes.
 */

import { ApiError, GatewayClient } from "./api.js";
import {
  SENTINEL_PHRASE,
  type BriefView,
  type CampaignView,
  type EventView,
  type IterationReport,
  type RubricToggles,
  type TurnView,
} from "./types.js";

export interface ConsoleState {
  campaign: CampaignView | null;
  turn: TurnView | null;
  brief: BriefView | null;
  slotValues: Record<string, string>;
  sentinel: boolean;
  pendingUnfilled: string[] | null;
  events: EventView[];
  timeline: IterationReport | null;
  scores: Record<number, RubricToggles>;
  banner: string | null;
  turnInFlight: boolean;
}

function emptyState(): ConsoleState {
  return {
    campaign: null,
    turn: null,
    brief: null,
    slotValues: {},
    sentinel: false,
    pendingUnfilled: null,
    events: [],
    timeline: null,
    scores: {},
    banner: null,
    turnInFlight: false,
  };
}

const SLOT_PATTERN = /\[([^\[\]]*)\]/g;

/** Fill template slots; anything left blank stays bracketed. */
export function instantiateTemplate(
  template: string,
  values: Record<string, string>,
): { text: string; unfilled: string[] } {
  const unfilled: string[] = [];
  const text = template.replace(SLOT_PATTERN, (whole, slot: string) => {
    const value = values[slot];
    if (value !== undefined && value !== "") return value;
    if (!unfilled.includes(slot)) unfilled.push(slot);
    return whole;
  });
  return { text, unfilled };
}

export class ConsoleController {
  readonly state: ConsoleState = emptyState();
  private campaignId = "";
  private listeners: Array<(s: ConsoleState) => void> = [];

  constructor(
    private readonly api: GatewayClient,
    private readonly pollDelayMs = 250,
    private readonly sleep: (ms: number) => Promise<void> = (ms) =>
      new Promise((resolve) => setTimeout(resolve, ms)),
  ) {}

  onChange(listener: (s: ConsoleState) => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener(this.state);
  }

  private async guard<T>(block: () => Promise<T>): Promise<T | undefined> {
    try {
      this.state.banner = null;
      return await block();
    } catch (error) {
      if (error instanceof ApiError) {
        this.state.banner = `${error.status}: ${error.detail}`;
        if (error.status === 409) this.state.turnInFlight = true;
        return undefined;
      }
      throw error;
    } finally {
      this.notify();
    }
  }

  async load(campaignId: string): Promise<void> {
    this.campaignId = campaignId;
    await this.guard(async () => {
      await this.refresh();
    });
  }

  /** Snapshot reads; no mutations. */
  async refresh(): Promise<void> {
    this.state.campaign = await this.api.getCampaign(this.campaignId);
    this.state.turn = await this.api.getCurrentTurn(this.campaignId);
    this.state.events = (await this.api.getEvents(this.campaignId)).events;
    this.state.timeline = await this.api.getIterationReport();
    this.notify();
  }

  /** POST /turns, then poll the ticket until it resolves. */
  async runTurn(): Promise<void> {
    await this.guard(async () => {
      this.state.turnInFlight = true;
      this.notify();
      const { ticket } = await this.api.startTurn(this.campaignId);
      let resolved = await this.api.pollTurn(ticket);
      while (resolved.status === "pending") {
        await this.sleep(this.pollDelayMs);
        resolved = await this.api.pollTurn(ticket);
      }
      this.state.turnInFlight = false;
      if (resolved.status === "failed") {
        this.state.banner = resolved.error ?? "turn failed";
      }
      await this.refresh();
    });
  }

  /** POST /choice: the one mutating call of a card click. */
  async selectChoice(index: number): Promise<void> {
    await this.guard(async () => {
      await this.api.selectChoice(this.campaignId, index);
      await this.refresh();
    });
  }

  /** POST /brief for the selected task; slots become form fields. */
  async loadBrief(): Promise<void> {
    await this.guard(async () => {
      this.state.brief = await this.api.requestBrief(this.campaignId);
      this.state.slotValues = {};
      this.state.pendingUnfilled = null;
      this.notify();
    });
  }

  setSlot(slot: string, value: string): void {
    this.state.slotValues[slot] = value;
    this.state.pendingUnfilled = null;
    this.notify();
  }

  toggleSentinel(on: boolean): void {
    this.state.sentinel = on;
    this.notify();
  }

  composedFeedback(): { text: string; unfilled: string[] } {
    const template = this.state.brief?.report_template ?? "";
    const { text, unfilled } = instantiateTemplate(template, this.state.slotValues);
    let body = text;
    if (this.state.sentinel) {
      body = (body ? body.trimEnd() + "\n\n" : "") + SENTINEL_PHRASE;
    }
    return { text: body, unfilled };
  }

  /** POST /feedback. Unfilled slots require one confirmation; submission
   * is still allowed because slots may be legitimately unknown. */
  async submitFeedback(confirmed = false): Promise<void> {
    const { text, unfilled } = this.composedFeedback();
    if (unfilled.length > 0 && !confirmed) {
      this.state.pendingUnfilled = unfilled;
      this.notify();
      return;
    }
    await this.guard(async () => {
      await this.api.submitFeedback(this.campaignId, text);
      this.state.brief = null;
      this.state.slotValues = {};
      this.state.sentinel = false;
      this.state.pendingUnfilled = null;
      await this.refresh();
    });
  }

  toggleScore(choice: number, criterion: keyof RubricToggles): void {
    const current = this.state.scores[choice] ?? {
      relevance: false,
      progress: false,
      helpfulness: false,
    };
    current[criterion] = !current[criterion];
    this.state.scores[choice] = current;
    this.notify();
  }

  /** POST /scores for one choice of the open turn. */
  async submitScore(choice: number): Promise<void> {
    const turn = this.state.turn;
    if (!turn) return;
    const toggles = this.state.scores[choice] ?? {
      relevance: false,
      progress: false,
      helpfulness: false,
    };
    await this.guard(async () => {
      await this.api.recordScore({
        campaign_id: this.campaignId,
        cursor: turn.cursor,
        choice,
        relevance: toggles.relevance ? 1 : 0,
        progress: toggles.progress ? 1 : 0,
        helpfulness: toggles.helpfulness ? 1 : 0,
      });
    });
  }
}
