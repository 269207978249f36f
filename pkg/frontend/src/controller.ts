/** Session controller: every user intent becomes at most one in-flight
 * request, and the view state is replaced only by acknowledged server
 * responses. Stale-version applies surface as an error and a refreshed
 * moves list; they are never retried silently. */

import { ApiError, Client } from "./api.js";
import {
  emptyState, HistoryEntry, ViewState, withSession,
} from "./state.js";

export type Listener = (state: ViewState) => void;

export class Controller {
  state: ViewState = emptyState();
  private listeners: Listener[] = [];

  constructor(private readonly client: Client) {}

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
  }

  private publish(): void {
    for (const listener of this.listeners) {
      listener(this.state);
    }
  }

  private update(next: ViewState): void {
    this.state = next;
    this.publish();
  }

  private fail(error: unknown): void {
    if (error instanceof ApiError) {
      this.update({
        ...this.state,
        busy: false,
        error: {
          message: error.payload.message ?? error.payload.error,
          span: error.payload.span ?? null,
        },
      });
    } else {
      this.update({
        ...this.state,
        busy: false,
        error: { message: String(error), span: null },
      });
    }
  }

  /** One mutation at a time; concurrent intents are ignored, not queued. */
  private async exclusive(work: () => Promise<void>): Promise<void> {
    if (this.state.busy) {
      return;
    }
    this.update({ ...this.state, busy: true, error: null });
    try {
      await work();
      this.update({ ...this.state, busy: false });
    } catch (error) {
      this.fail(error);
    }
  }

  async loadTerm(text: string): Promise<void> {
    await this.exclusive(async () => {
      const view = await this.client.createSession(text);
      this.update({
        ...withSession(emptyState(), view),
        busy: true,
      });
      await this.refreshMoves();
    });
  }

  reset(): void {
    this.update(emptyState());
  }

  private async refreshMoves(): Promise<void> {
    if (this.state.sessionId === null) {
      return;
    }
    const moves = await this.client.getMoves(this.state.sessionId);
    this.update({ ...this.state, moves });
  }

  selectPosition(position: string | null): void {
    this.update({ ...this.state, selected: position });
  }

  async applyMove(index: number): Promise<void> {
    await this.exclusive(async () => {
      const { sessionId, moves } = this.state;
      if (sessionId === null || moves === null) {
        return;
      }
      const move = moves.moves.find((m) => m.index === index);
      try {
        const view = await this.client.applyMove(sessionId, index, moves.version);
        const entry: HistoryEntry | null = move
          ? { ruleId: move.ruleId, direction: move.direction,
              position: move.position }
          : null;
        this.update({
          ...withSession(this.state, view),
          history: entry ? [...this.state.history, entry] : this.state.history,
          selected: null,
          busy: true,
        });
        await this.refreshMoves();
      } catch (error) {
        if (error instanceof ApiError && error.status === 409) {
          // surface the conflict and resynchronize; the user re-picks
          await this.refreshMoves();
          throw error;
        }
        throw error;
      }
    });
  }

  async undo(): Promise<void> {
    await this.exclusive(async () => {
      const { sessionId } = this.state;
      if (sessionId === null) {
        return;
      }
      const view = await this.client.undo(sessionId);
      this.update({
        ...withSession(this.state, view),
        history: this.state.history.slice(0, -1),
        selected: null,
        busy: true,
      });
      await this.refreshMoves();
    });
  }

  async normalize(): Promise<void> {
    await this.exclusive(async () => {
      const { sessionId } = this.state;
      if (sessionId === null) {
        return;
      }
      const view = await this.client.normalize(sessionId);
      this.update({
        ...withSession(this.state, view),
        history: [...this.state.history,
                  { ruleId: `normalize (${view.appliedSteps} steps)`,
                    direction: "fwd", position: "eps" }],
        selected: null,
        busy: true,
      });
      await this.refreshMoves();
    });
  }

  async exportDerivation(): Promise<string> {
    const { sessionId } = this.state;
    if (sessionId === null) {
      throw new Error("no session to export");
    }
    return this.client.getDerivation(sessionId);
  }
}
