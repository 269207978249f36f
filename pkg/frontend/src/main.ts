/** DOM wiring: the page is a thin shell around the controller. */

import { Client } from "./api.js";
import { Controller } from "./controller.js";
import { filterMoves, ViewState } from "./state.js";
import { renderErrorText, renderTerm } from "./render.js";

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) {
    throw new Error(`missing element #${id}`);
  }
  return el as T;
}

export function mount(controller: Controller): void {
  const input = byId<HTMLTextAreaElement>("term-input");
  const loadBtn = byId<HTMLButtonElement>("load");
  const resetBtn = byId<HTMLButtonElement>("reset");
  const termView = byId<HTMLDivElement>("term");
  const sortView = byId<HTMLSpanElement>("sort");
  const stepsView = byId<HTMLSpanElement>("steps");
  const errorView = byId<HTMLDivElement>("error");
  const errorText = byId<HTMLDivElement>("error-text");
  const movesView = byId<HTMLUListElement>("moves");
  const filterNote = byId<HTMLSpanElement>("filter-note");
  const clearBtn = byId<HTMLButtonElement>("clear-selection");
  const undoBtn = byId<HTMLButtonElement>("undo");
  const normalizeBtn = byId<HTMLButtonElement>("normalize");
  const exportBtn = byId<HTMLButtonElement>("export");
  const historyView = byId<HTMLOListElement>("history");

  function draw(state: ViewState): void {
    const active = state.sessionId !== null;
    sortView.textContent = state.sort;
    stepsView.textContent = active ? `${state.stepCount} steps` : "";
    undoBtn.disabled = !active || state.busy || state.stepCount === 0;
    normalizeBtn.disabled = !active || state.busy;
    exportBtn.disabled = !active;
    clearBtn.disabled = state.selected === null;
    loadBtn.disabled = state.busy;

    if (state.error) {
      errorView.hidden = false;
      errorView.querySelector(".message")!.textContent = state.error.message;
      renderErrorText(errorText, input.value, state.error.span);
    } else {
      errorView.hidden = true;
      errorText.textContent = "";
    }

    if (active) {
      renderTerm(termView, state.dirac, state.spans, state.selected,
                 (position) => controller.selectPosition(position));
    } else {
      termView.textContent = "load a term to begin";
    }

    movesView.textContent = "";
    if (state.moves) {
      const shown = filterMoves(state.moves.moves, state.selected);
      filterNote.textContent = state.selected
        ? `at position ${state.selected} (${shown.length}/${state.moves.moves.length})`
        : `all positions (${shown.length})`;
      for (const move of shown) {
        const li = document.createElement("li");
        const btn = document.createElement("button");
        btn.className = "move";
        btn.dataset.index = String(move.index);
        btn.textContent = `${move.ruleId} ${move.direction} @ ${move.position}`;
        btn.title = move.preview;
        btn.disabled = state.busy;
        btn.addEventListener("click", () => {
          void controller.applyMove(move.index);
        });
        li.appendChild(btn);
        movesView.appendChild(li);
      }
    } else {
      filterNote.textContent = "";
    }

    historyView.textContent = "";
    for (const entry of state.history) {
      const li = document.createElement("li");
      li.textContent = `${entry.ruleId} ${entry.direction} @ ${entry.position}`;
      historyView.appendChild(li);
    }
  }

  controller.subscribe(draw);
  draw(controller.state);

  loadBtn.addEventListener("click", () => {
    void controller.loadTerm(input.value.trim());
  });
  resetBtn.addEventListener("click", () => {
    input.value = "";
    controller.reset();
  });
  clearBtn.addEventListener("click", () => controller.selectPosition(null));
  undoBtn.addEventListener("click", () => {
    void controller.undo();
  });
  normalizeBtn.addEventListener("click", () => {
    void controller.normalize();
  });
  exportBtn.addEventListener("click", () => {
    void controller.exportDerivation().then((text) => {
      const blob = new Blob([text], { type: "text/plain" });
      const a = document.createElement("a");
      a.href = URL.createObjectURL(blob);
      a.download = "derivation.deriv";
      a.click();
      URL.revokeObjectURL(a.href);
    });
  });
}

if (typeof document !== "undefined" && document.getElementById("term-input")) {
  mount(new Controller(new Client("..")));
}
