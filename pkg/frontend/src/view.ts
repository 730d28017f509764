/** Pure view functions: console state in, a plain node tree out. The DOM
 * layer mounts the tree in a browser; tests walk it directly. */

import type { ConsoleState } from "./controller.js";
import type { EventView, IterationReport, StageStats, TurnView } from "./types.js";

export interface VNode {
  tag: string;
  attrs: Record<string, string>;
  children: Array<VNode | string>;
  on?: Record<string, () => void>;
}

export function h(
  tag: string,
  attrs: Record<string, string> = {},
  children: Array<VNode | string> = [],
  on?: Record<string, () => void>,
): VNode {
  return { tag, attrs, children, on };
}

export function findAll(root: VNode, className: string): VNode[] {
  const hits: VNode[] = [];
  const walk = (node: VNode | string): void => {
    if (typeof node === "string") return;
    const classes = (node.attrs["class"] ?? "").split(/\s+/);
    if (classes.includes(className)) hits.push(node);
    node.children.forEach(walk);
  };
  walk(root);
  return hits;
}

export function textOf(node: VNode | string): string {
  if (typeof node === "string") return node;
  return node.children.map(textOf).join(" ").replace(/\s+/g, " ").trim();
}

export function renderHeader(state: ConsoleState): VNode {
  const campaign = state.campaign;
  if (!campaign) return h("header", { class: "header empty" }, ["no campaign loaded"]);
  return h("header", { class: "header" }, [
    h("span", { class: "subject" }, [campaign.subject]),
    h("span", { class: `status status-${campaign.status}` }, [campaign.status]),
    h("span", { class: "cursor" }, [campaign.cursor ?? "—"]),
  ]);
}

/** Stage timeline with the campaign's current cursor highlighted; counts
 * come straight from the iterations report. */
export function renderTimeline(state: ConsoleState): VNode {
  const timeline = state.timeline;
  const campaign = state.campaign;
  if (!timeline || Object.keys(timeline).length === 0) {
    return h("section", { class: "timeline empty" }, ["no iteration data yet"]);
  }
  const groups = Object.entries(timeline).map(([campaignId, stats]) =>
    renderBarGroup(campaignId, stats, campaign?.id === campaignId ? campaign.cursor : null),
  );
  return h("section", { class: "timeline" }, groups);
}

function renderBarGroup(campaignId: string, stats: StageStats, cursor: string | null): VNode {
  const currentStage = cursor ? cursor.split("-")[0] : null;
  const bars = Object.entries(stats.per_stage).map(([stage, count]) =>
    h(
      "div",
      {
        class: "bar" + (stage === currentStage ? " current" : ""),
        "data-stage": stage,
        "data-count": String(count),
        style: `height:${count * 8}px`,
      },
      [`${stage}: ${count}`],
    ),
  );
  return h("div", { class: "bar-group", "data-campaign": campaignId }, [
    h("span", { class: "bar-label" }, [`${campaignId} (${stats.total})`]),
    ...bars,
  ]);
}

/** The current turn card: evaluation, three selectable choice cards with
 * lint badges taken verbatim from the API. */
export function renderTurn(
  state: ConsoleState,
  onSelect: (index: number) => void,
): VNode {
  const turn = state.turn;
  if (!turn) {
    return h("section", { class: "turn empty" }, [
      state.turnInFlight ? "turn in flight…" : "no open turn",
    ]);
  }
  const cards = turn.choices.map((text, i) => renderChoiceCard(turn, text, i + 1, onSelect));
  const turnLints = turn.lints.filter((l) => l.choice === undefined);
  return h("section", { class: "turn" }, [
    h("div", { class: "turn-cursor" }, [turn.cursor]),
    h("div", { class: "evaluation" }, [
      turn.evaluation,
      ...turnLints.map((l) => h("span", { class: `badge badge-${l.kind}` }, [l.message])),
    ]),
    h("div", { class: "choices" }, cards),
  ]);
}

function renderChoiceCard(
  turn: TurnView,
  text: string,
  index: number,
  onSelect: (index: number) => void,
): VNode {
  const title = text.split(/(?<=[.!?])\s/)[0] ?? text;
  const badges = turn.lints
    .filter((l) => l.choice === index)
    .map((l) => h("span", { class: `badge badge-${l.kind}` }, [l.message]));
  const selected = turn.selected === index;
  return h(
    "article",
    {
      class: "choice-card" + (selected ? " selected" : ""),
      "data-index": String(index),
    },
    [
      h("h3", { class: "choice-title" }, [`Task Choice ${index}: ${title}`]),
      h("p", { class: "choice-body" }, [text]),
      ...badges,
      h(
        "button",
        { class: "choose", disabled: turn.selected !== null ? "disabled" : "" },
        [selected ? "selected" : "choose"],
        { click: () => onSelect(index) },
      ),
    ],
  );
}

/** Feedback composer: one field per template slot plus the sentinel
 * toggle that appends the canonical phrase verbatim. */
export function renderComposer(
  state: ConsoleState,
  handlers: {
    onSlot: (slot: string, value: string) => void;
    onSentinel: (on: boolean) => void;
    onSubmit: (confirmed: boolean) => void;
  },
): VNode {
  const brief = state.brief;
  if (!brief) return h("section", { class: "composer empty" }, ["no brief loaded"]);
  const uniqueSlots = [...new Set(brief.slots)];
  const fields = uniqueSlots.map((slot) =>
    h("label", { class: "slot-field", "data-slot": slot }, [
      slot,
      h(
        "input",
        { class: "slot-input", value: state.slotValues[slot] ?? "", "data-slot": slot },
        [],
      ),
    ]),
  );
  const confirmation = state.pendingUnfilled
    ? h("div", { class: "confirm-unfilled" }, [
        `unfilled slots: ${state.pendingUnfilled.join(", ")}. Submit anyway?`,
        h("button", { class: "confirm-submit" }, ["submit anyway"], {
          click: () => handlers.onSubmit(true),
        }),
      ])
    : "";
  return h("section", { class: "composer" }, [
    h("ol", { class: "steps" }, brief.steps.map((s) => h("li", {}, [s]))),
    h("form", { class: "slot-form" }, fields),
    h("label", { class: "sentinel-toggle" }, [
      h(
        "input",
        { type: "checkbox", class: "sentinel-box", checked: state.sentinel ? "checked" : "" },
        [],
        { click: () => handlers.onSentinel(!state.sentinel) },
      ),
      "declare stage readiness",
    ]),
    h("button", { class: "submit-feedback" }, ["submit feedback"], {
      click: () => handlers.onSubmit(false),
    }),
    confirmation,
  ]);
}

/** Rubric panel: three toggles per choice of the open turn. */
export function renderRubric(
  state: ConsoleState,
  handlers: {
    onToggle: (choice: number, criterion: "relevance" | "progress" | "helpfulness") => void;
    onSubmit: (choice: number) => void;
  },
): VNode {
  const turn = state.turn;
  if (!turn) return h("section", { class: "rubric empty" }, []);
  const rows = [1, 2, 3].map((choice) => {
    const toggles = state.scores[choice] ?? {
      relevance: false,
      progress: false,
      helpfulness: false,
    };
    const boxes = (["relevance", "progress", "helpfulness"] as const).map((criterion) =>
      h(
        "input",
        {
          type: "checkbox",
          class: `score-${criterion}`,
          "data-choice": String(choice),
          checked: toggles[criterion] ? "checked" : "",
        },
        [],
        { click: () => handlers.onToggle(choice, criterion) },
      ),
    );
    return h("div", { class: "rubric-row", "data-choice": String(choice) }, [
      `choice ${choice}`,
      ...boxes,
      h("button", { class: "score-submit" }, ["save"], {
        click: () => handlers.onSubmit(choice),
      }),
    ]);
  });
  return h("section", { class: "rubric" }, rows);
}

export function renderEventFeed(events: EventView[]): VNode {
  const items = events.map((e) =>
    h("li", { class: "event", "data-kind": e.kind, "data-seq": String(e.seq) }, [
      `${e.seq} ${e.kind}`,
    ]),
  );
  return h("ul", { class: "event-feed" }, items);
}

export function renderBanner(state: ConsoleState): VNode {
  if (!state.banner) return h("div", { class: "banner hidden" }, []);
  return h("div", { class: "banner error" }, [state.banner]);
}

export function renderConsole(
  state: ConsoleState,
  handlers: {
    onRunTurn: () => void;
    onSelect: (index: number) => void;
    onBrief: () => void;
    onSlot: (slot: string, value: string) => void;
    onSentinel: (on: boolean) => void;
    onSubmit: (confirmed: boolean) => void;
    onToggle: (choice: number, criterion: "relevance" | "progress" | "helpfulness") => void;
    onScore: (choice: number) => void;
  },
): VNode {
  return h("main", { class: "console" }, [
    renderBanner(state),
    renderHeader(state),
    renderTimeline(state),
    h(
      "button",
      { class: "run-turn", disabled: state.turnInFlight ? "disabled" : "" },
      [state.turnInFlight ? "running…" : "run turn"],
      { click: handlers.onRunTurn },
    ),
    renderTurn(state, handlers.onSelect),
    h("button", { class: "load-brief" }, ["brief selected task"], { click: handlers.onBrief }),
    renderComposer(state, handlers),
    renderRubric(state, { onToggle: handlers.onToggle, onSubmit: handlers.onScore }),
    renderEventFeed(state.events),
  ]);
}

export function renderIterationTotals(report: IterationReport): string {
  return Object.entries(report)
    .map(([campaignId, stats]) => `${campaignId}=${stats.total}`)
    .join(" ");
}
