// DOM rendering: thin, stateless views over SessionState and row data.

import type { RowResponse } from "./api.js";
import { glyphSrc, type GlyphMap } from "./glyphs.js";
import {
  canRedo,
  canUndo,
  displayTokens,
  type SessionState,
} from "./state.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

/** Numeric id, or the user-supplied glyph image with the id as alt text. */
function signContent(glyphs: GlyphMap | null, sign: number): Node {
  const src = glyphSrc(glyphs, sign);
  if (!src) return document.createTextNode(String(sign));
  const image = document.createElement("img");
  image.src = src;
  image.alt = String(sign);
  image.className = "glyph";
  return image;
}

export interface RenderTargets {
  tokens: HTMLElement;
  errors: HTMLElement;
  panels: HTMLElement;
  score: HTMLElement;
  undoButton: HTMLButtonElement;
  redoButton: HTMLButtonElement;
}

export function renderSession(
  targets: RenderTargets,
  state: SessionState,
  busy: boolean,
  onCommit: (position: number, sign: number) => void,
  glyphs: GlyphMap | null = null,
): void {
  const shownTokens = displayTokens(state);
  targets.tokens.replaceChildren(
    ...state.slots.map((slot, index) => {
      const shown = shownTokens[index] ?? "?";
      const classes = ["token"];
      if (slot.kind === "gap") {
        classes.push(state.committed.has(index) ? "committed" : "gap");
      }
      const token = el("span", classes.join(" "));
      token.appendChild(
        shown === "?" ? document.createTextNode("?") : signContent(glyphs, shown),
      );
      return token;
    }),
  );

  targets.errors.replaceChildren(
    ...state.errors.map((error) =>
      el(
        "span",
        "input-error",
        `${error.field}: ${error.reason === "not_a_sign" ? "not a sign id" : "not in the vocabulary"}`,
      ),
    ),
  );

  targets.score.textContent =
    state.score === null
      ? "log₂ P = –"
      : `log₂ P(best completion) = ${state.score.toFixed(3)}`;
  targets.undoButton.disabled = !canUndo(state);
  targets.redoButton.disabled = !canRedo(state);
  targets.panels.classList.toggle("busy", busy);

  targets.panels.replaceChildren(
    ...state.panels.map((panel) => {
      const box = el("div", "panel");
      box.appendChild(
        el(
          "h3",
          undefined,
          `gap at position ${panel.position} · ${panel.coverage_size} signs cover 90%`,
        ),
      );
      const list = el("div", "candidates");
      const shown = panel.candidates.slice(0, 12);
      const scale = shown[0]?.prob || 1;
      for (const candidate of shown) {
        const row = el("div", "candidate" + (candidate.in_coverage_set ? " covered" : ""));
        const button = el("button", "commit");
        button.appendChild(signContent(glyphs, candidate.sign));
        button.title = String(candidate.sign);
        button.addEventListener("click", () => onCommit(panel.position, candidate.sign));
        row.appendChild(button);
        const bar = el("div", "bar");
        bar.style.width = `${Math.max(1, (100 * candidate.prob) / scale)}%`;
        row.appendChild(bar);
        row.appendChild(el("span", "prob", candidate.prob.toFixed(4)));
        list.appendChild(row);
      }
      box.appendChild(list);
      return box;
    }),
  );
}

export function renderRow(
  target: HTMLElement,
  row: RowResponse,
  glyphs: GlyphMap | null = null,
): void {
  target.replaceChildren();
  const heading = el("h3", undefined, `followers of sign ${row.context}`);
  target.appendChild(heading);
  const scale = row.followers[0]?.prob || 1;
  for (const follower of row.followers) {
    const line = el("div", "candidate");
    const label = el("span", "label");
    label.appendChild(
      typeof follower.token === "number"
        ? signContent(glyphs, follower.token)
        : document.createTextNode(follower.token),
    );
    line.appendChild(label);
    const bar = el("div", "bar");
    bar.style.width = `${Math.max(1, (100 * follower.prob) / scale)}%`;
    line.appendChild(bar);
    line.appendChild(el("span", "prob", follower.prob.toFixed(4)));
    target.appendChild(line);
  }
}
