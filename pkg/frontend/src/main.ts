/** Browser entry point: wire the controller to the real fetch and mount
 * the console. The gateway address and campaign id come from the query
 * string (?campaign=ID&api=http://host:port&poll=ms). */

import { GatewayClient } from "./api.js";
import { ConsoleController } from "./controller.js";
import { mount } from "./dom.js";
import { renderConsole } from "./view.js";

function bootstrap(): void {
  const params = new URLSearchParams(window.location.search);
  const campaignId = params.get("campaign") ?? "";
  const base = params.get("api") ?? "";
  const pollMs = Number(params.get("poll") ?? "500");

  const client = new GatewayClient((url, init) => fetch(url, init), base);
  const controller = new ConsoleController(client, pollMs);
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app element");

  const handlers = {
    onRunTurn: () => void controller.runTurn(),
    onSelect: (index: number) => void controller.selectChoice(index),
    onBrief: () => void controller.loadBrief(),
    onSlot: (slot: string, value: string) => controller.setSlot(slot, value),
    onSentinel: (on: boolean) => controller.toggleSentinel(on),
    onSubmit: (confirmed: boolean) => void controller.submitFeedback(confirmed),
    onToggle: (choice: number, criterion: "relevance" | "progress" | "helpfulness") =>
      controller.toggleScore(choice, criterion),
    onScore: (choice: number) => void controller.submitScore(choice),
  };

  controller.onChange((state) => {
    mount(root, renderConsole(state, handlers));
    // text inputs lose focus on re-render; copy values back on input events
    root.querySelectorAll<HTMLInputElement>("input.slot-input").forEach((input) => {
      input.addEventListener("change", () => {
        controller.setSlot(input.dataset["slot"] ?? "", input.value);
      });
    });
  });

  if (campaignId) {
    void controller.load(campaignId);
    window.setInterval(() => void controller.refresh(), pollMs * 10);
  } else {
    root.textContent = "pass ?campaign=<id> in the URL";
  }
}

bootstrap();
