// Browser wiring: load a net, click places to toggle tokens, read the
// verdict banner and the colored overlay, step through a witness.

import { Client } from "./api.js";
import { layeredLayout } from "./layout.js";
import { bannerText, renderError, renderSidePanel, renderSvg } from "./render.js";
import { Controller } from "./state.js";

const SAMPLE = `# two concurrent branches
place i source
place a
place b
place o sink
trans t1 in i out a b
trans t2 in a b out o
`;

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el as T;
}

function start(): void {
  const api = new Client("");
  const controller = new Controller(api);

  const diagram = byId<HTMLDivElement>("diagram");
  const banner = byId<HTMLDivElement>("banner");
  const panel = byId<HTMLDivElement>("panel");
  const errors = byId<HTMLDivElement>("errors");
  const netText = byId<HTMLTextAreaElement>("net-text");
  const loadBtn = byId<HTMLButtonElement>("load");
  const modeSel = byId<HTMLSelectElement>("mode");
  const replayStart = byId<HTMLButtonElement>("replay-start");
  const replayPrev = byId<HTMLButtonElement>("replay-prev");
  const replayNext = byId<HTMLButtonElement>("replay-next");
  const replayStop = byId<HTMLButtonElement>("replay-stop");
  const replayPos = byId<HTMLSpanElement>("replay-pos");

  netText.value = SAMPLE;

  controller.subscribe((state) => {
    if (state.net) {
      const layout = layeredLayout(state.net.nodes, state.net.edges);
      diagram.innerHTML = renderSvg(state.net, layout, {
        marking: controller.displayedMarking(),
        report: state.report,
      });
    } else {
      diagram.innerHTML = "";
    }
    banner.textContent = state.pending ? "analyzing…" : bannerText(state.report);
    panel.innerHTML = renderSidePanel(state.report);
    errors.innerHTML = renderError(state.error);

    const replaying = state.replayIndex !== null;
    replayStart.disabled = replaying || !controller.replayAvailable();
    replayPrev.disabled = !replaying;
    replayNext.disabled = !replaying;
    replayStop.disabled = !replaying;
    const witness = state.report?.witness;
    if (replaying && witness) {
      const fired = state.replayIndex! > 0 ? ` after ${witness.sequence[state.replayIndex! - 1]}` : " start";
      replayPos.textContent = `step ${state.replayIndex}/${witness.markings.length - 1}${fired}`;
    } else {
      replayPos.textContent = "";
    }
  });

  diagram.addEventListener("click", (ev) => {
    const target = (ev.target as Element).closest("[data-id]");
    if (!target) return;
    if (target.getAttribute("data-kind") !== "place") return;
    controller.togglePlace(target.getAttribute("data-id")!);
  });

  loadBtn.addEventListener("click", () => {
    void controller.loadNetText(netText.value).catch(() => {
      /* surfaced via state.error */
    });
  });

  modeSel.addEventListener("change", () => {
    controller.setMode(modeSel.value === "cover" ? "cover" : "exact");
  });

  replayStart.addEventListener("click", () => void controller.startReplay());
  replayPrev.addEventListener("click", () => controller.stepReplay(-1));
  replayNext.addEventListener("click", () => controller.stepReplay(1));
  replayStop.addEventListener("click", () => controller.stopReplay());
}

document.addEventListener("DOMContentLoaded", start);
