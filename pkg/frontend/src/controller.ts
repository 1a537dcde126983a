// Orchestrates the edit -> fetch marginals -> commit -> re-rank loop.
// All probability math happens on the server; this layer only sequences
// requests (debounced, latest-wins) and folds responses into the state.

import { ApiClient } from "./api.js";
import { debounce, type Debounced } from "./debounce.js";
import {
  applyMarginals,
  applyScore,
  bestCompletion,
  commitCandidate,
  emptySession,
  parseInput,
  redo,
  undo,
  unresolvedPositions,
  wireCommitted,
  wireText,
  withInput,
  type SessionState,
} from "./state.js";

export interface ControllerOptions {
  debounceMs?: number;
  coverage?: number;
  candidateTopK?: number;
}

export type StateListener = (state: SessionState, busy: boolean) => void;
export type ErrorListener = (message: string) => void;

export class ExplorerController {
  state: SessionState = emptySession();
  private vocabularySize = 0;
  private epoch = 0;
  private inflight: AbortController | null = null;
  private readonly debouncedRefresh: Debounced<[]>;
  private readonly coverage: number;
  private readonly candidateTopK: number | undefined;

  constructor(
    private readonly api: ApiClient,
    private readonly onState: StateListener,
    private readonly onError: ErrorListener = () => {},
    options: ControllerOptions = {},
  ) {
    this.coverage = options.coverage ?? 0.9;
    this.candidateTopK = options.candidateTopK;
    this.debouncedRefresh = debounce(() => {
      void this.refresh();
    }, options.debounceMs ?? 200);
  }

  async start(): Promise<number> {
    const meta = await this.api.meta();
    this.vocabularySize = meta.vocabulary_size;
    return this.vocabularySize;
  }

  /** Called on every keystroke; marginals are fetched after a pause. */
  setInput(text: string): void {
    const parsed = parseInput(text, this.vocabularySize);
    this.state = withInput(this.state, parsed);
    this.emit(false);
    this.debouncedRefresh();
  }

  /** Commit one candidate; remaining gaps re-rank immediately. */
  commit(position: number, sign: number): void {
    this.state = commitCandidate(this.state, position, sign);
    this.emit(true);
    this.debouncedRefresh.cancel();
    void this.refresh();
  }

  undo(): void {
    this.invalidatePending();
    this.state = undo(this.state);
    this.emit(false);
  }

  redo(): void {
    this.invalidatePending();
    this.state = redo(this.state);
    this.emit(false);
  }

  /** History restores snapshots directly; anything in flight is stale. */
  private invalidatePending(): void {
    this.epoch++;
    this.inflight?.abort();
    this.debouncedRefresh.cancel();
  }

  /** Fetch marginals for the current text state; stale responses (an older
   * epoch) are dropped, and the previous in-flight request is aborted. */
  async refresh(): Promise<void> {
    const mine = ++this.epoch;
    this.inflight?.abort();

    if (this.state.slots.length === 0) {
      this.state = applyScore(applyMarginals(this.state, []), null);
      this.emit(false);
      return;
    }

    const controller = new AbortController();
    this.inflight = controller;
    try {
      if (unresolvedPositions(this.state).length > 0) {
        const response = await this.api.marginals(
          wireText(this.state),
          wireCommitted(this.state),
          {
            coverage: this.coverage,
            topK: this.candidateTopK,
            signal: controller.signal,
          },
        );
        if (mine !== this.epoch) return;
        this.state = applyMarginals(this.state, response.gaps);
      } else if (mine === this.epoch) {
        this.state = applyMarginals(this.state, []);
      }

      const completion = bestCompletion(this.state);
      if (completion) {
        const scored = await this.api.score(completion, controller.signal);
        if (mine !== this.epoch) return;
        this.state = applyScore(this.state, scored.log2_prob);
      } else {
        this.state = applyScore(this.state, null);
      }
      this.emit(false);
    } catch (error) {
      if (controller.signal.aborted || mine !== this.epoch) return;
      this.onError(error instanceof Error ? error.message : String(error));
      this.emit(false);
    }
  }

  private emit(busy: boolean): void {
    this.onState(this.state, busy);
  }
}
