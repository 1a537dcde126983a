import { ApiClient } from "./api.js";
import { ExplorerController } from "./controller.js";
import { loadGlyphMap, type GlyphMap } from "./glyphs.js";
import { renderRow, renderSession, type RenderTargets } from "./render.js";

function need<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

async function boot(): Promise<void> {
  const api = new ApiClient("");
  const targets: RenderTargets = {
    tokens: need("tokens"),
    errors: need("errors"),
    panels: need("panels"),
    score: need("score"),
    undoButton: need<HTMLButtonElement>("undo"),
    redoButton: need<HTMLButtonElement>("redo"),
  };
  const banner = need("banner");
  const input = need<HTMLInputElement>("text-input");
  const rowInput = need<HTMLInputElement>("row-input");
  const rowView = need("row-view");
  let glyphs: GlyphMap | null = null;

  const controller = new ExplorerController(
    api,
    (state, busy) => {
      banner.textContent = "";
      renderSession(
        targets,
        state,
        busy,
        (position, sign) => controller.commit(position, sign),
        glyphs,
      );
    },
    (message) => {
      banner.textContent = `service unreachable or rejected the request: ${message}`;
    },
  );

  glyphs = await loadGlyphMap();
  const vocabulary = await controller.start();
  const meta = await api.meta();
  need("meta").textContent =
    `${meta.corpus_label} · ${vocabulary} signs · order-${meta.order} ` +
    `${meta.smoothing} model`;
  input.placeholder = `sign ids 1..${vocabulary} and ? for gaps, e.g. "1 ? ? 4"`;

  input.addEventListener("input", () => controller.setInput(input.value));
  need<HTMLButtonElement>("undo").addEventListener("click", () => controller.undo());
  need<HTMLButtonElement>("redo").addEventListener("click", () => controller.redo());

  rowInput.addEventListener("change", async () => {
    const sign = Number(rowInput.value);
    if (!Number.isInteger(sign) || sign < 1 || sign > vocabulary) {
      rowView.textContent = `sign must be 1..${vocabulary}`;
      return;
    }
    try {
      renderRow(rowView, await api.row(sign), glyphs);
    } catch (error) {
      rowView.textContent = error instanceof Error ? error.message : String(error);
    }
  });
}

boot().catch((error) => {
  const banner = document.getElementById("banner");
  if (banner) banner.textContent = `failed to reach the service: ${error}`;
});
