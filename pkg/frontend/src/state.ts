/** View state and the pure helpers the controller and renderer share.
 * The state always mirrors the last acknowledged server response; the
 * UI never derives algebraic facts on its own. */

import type { Move, MovesList, SessionView, Span } from "./api.js";

export interface HistoryEntry {
  ruleId: string;
  direction: "fwd" | "rev";
  position: string;
}

export interface UiError {
  message: string;
  span: [number, number] | null;
}

export interface ViewState {
  sessionId: string | null;
  sort: string;
  dirac: string;
  spans: Span[];
  canonical: string;
  stepCount: number;
  selected: string | null;
  moves: MovesList | null;
  history: HistoryEntry[];
  error: UiError | null;
  busy: boolean;
}

export function emptyState(): ViewState {
  return {
    sessionId: null,
    sort: "",
    dirac: "",
    spans: [],
    canonical: "",
    stepCount: 0,
    selected: null,
    moves: null,
    history: [],
    error: null,
    busy: false,
  };
}

export function withSession(state: ViewState, view: SessionView): ViewState {
  return {
    ...state,
    sessionId: view.sessionId,
    sort: view.sort,
    dirac: view.dirac,
    spans: view.spans,
    canonical: view.canonical,
    stepCount: view.stepCount,
    moves: null, // stale after any mutation; refetched explicitly
    error: null,
  };
}

/** The innermost annotated subterm covering a text offset; null offsets
 * and uncovered offsets select nothing. */
export function innermostPosition(spans: Span[], offset: number): string | null {
  let best: Span | null = null;
  for (const span of spans) {
    if (span.start <= offset && offset < span.end) {
      if (best === null || span.end - span.start < best.end - best.start) {
        best = span;
      }
    }
  }
  return best ? best.position : null;
}

/** Moves at the selected position, or all moves when nothing is selected. */
export function filterMoves(moves: Move[], selected: string | null): Move[] {
  if (selected === null) {
    return moves;
  }
  return moves.filter((m) => m.position === selected);
}

/** The span record for a position, if the rendering annotated it. */
export function spanOf(spans: Span[], position: string): Span | null {
  return spans.find((s) => s.position === position) ?? null;
}
