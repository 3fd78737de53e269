import { ApiError, SessionApi } from './api';
import type { SensitivityDoc, SessionView, TreeDoc, WhatIfDoc } from './types';

export interface WhatIfPanel {
  findingId: string | null;
  state: string | null;
  answer: WhatIfDoc | null;
  error: string | null;
}

export interface AppState {
  view: SessionView | null;
  sensitivity: SensitivityDoc | null;
  tree: TreeDoc | null;
  banner: string | null;
  busy: boolean;
  whatIf: WhatIfPanel;
}

const emptyWhatIf = (): WhatIfPanel => ({
  findingId: null,
  state: null,
  answer: null,
  error: null,
});

/**
 * Holds the session state and serializes mutations: one request is in
 * flight at a time, later ones queue behind it.  Every field shown to the
 * user comes from one coherent service revision — a mutation response and
 * the sensitivity table fetched for it are adopted together.
 */
export class SessionController {
  readonly state: AppState = {
    view: null,
    sensitivity: null,
    tree: null,
    banner: null,
    busy: false,
    whatIf: emptyWhatIf(),
  };

  private queue: Array<() => Promise<void>> = [];
  private running = false;

  constructor(
    private readonly api: SessionApi,
    private readonly onChange: (state: AppState) => void = () => {},
  ) {}

  private emit(): void {
    this.onChange(this.state);
  }

  private enqueue(task: () => Promise<void>): Promise<void> {
    return new Promise((resolve, reject) => {
      this.queue.push(() =>
        task().then(resolve, (err) => {
          this.state.banner = err instanceof Error ? err.message : String(err);
          this.emit();
          resolve(undefined);
          return Promise.reject(err);
        }),
      );
      void this.pump();
    });
  }

  private async pump(): Promise<void> {
    if (this.running) return;
    this.running = true;
    this.state.busy = true;
    this.emit();
    while (this.queue.length > 0) {
      const task = this.queue.shift()!;
      try {
        await task();
      } catch {
        // already surfaced on the banner
      }
    }
    this.running = false;
    this.state.busy = false;
    this.emit();
  }

  /** Adopt a mutation response plus the panels that belong to its revision. */
  private async adopt(view: SessionView): Promise<void> {
    let sensitivity: SensitivityDoc | null = null;
    if (view.hypothesis !== null && view.p_e > 0 && view.findings.length > 0) {
      sensitivity = await this.api.sensitivity(view.session_id);
    }
    this.state.view = view;
    this.state.sensitivity = sensitivity;
    this.state.banner = null;
    if (
      this.state.whatIf.findingId !== null &&
      !view.findings.some((f) => f.id === this.state.whatIf.findingId)
    ) {
      this.state.whatIf = emptyWhatIf();
    } else {
      this.state.whatIf.answer = null;
      this.state.whatIf.error = null;
    }
    this.emit();
  }

  loadModel(model: string): Promise<void> {
    return this.enqueue(async () => {
      const view = await this.api.createSession(model);
      this.state.tree = await this.api.tree(view.session_id);
      this.state.whatIf = emptyWhatIf();
      await this.adopt(view);
    });
  }

  private get sessionId(): string {
    if (this.state.view === null) throw new Error('no session loaded');
    return this.state.view.session_id;
  }

  /** Add the hard finding `VAR=state`, or retract it if already entered. */
  toggleFinding(variable: string, state: string): Promise<void> {
    return this.enqueue(async () => {
      const id = `${variable}=${state}`;
      const present = this.state.view?.findings.some((f) => f.id === id) ?? false;
      const view = present
        ? await this.api.retractFinding(this.sessionId, id)
        : await this.api.addFinding(this.sessionId, id, variable, state);
      await this.adopt(view);
    });
  }

  retractFinding(findingId: string): Promise<void> {
    return this.enqueue(async () => {
      await this.adopt(await this.api.retractFinding(this.sessionId, findingId));
    });
  }

  setHypothesis(assignments: Record<string, string>): Promise<void> {
    return this.enqueue(async () => {
      await this.adopt(await this.api.setHypothesis(this.sessionId, assignments));
    });
  }

  clearHypothesis(): Promise<void> {
    return this.enqueue(async () => {
      await this.adopt(await this.api.clearHypothesis(this.sessionId));
    });
  }

  /** Ask for the swap answer; renders next to the current posterior with the
   * propagation-free badge from the service instrumentation. */
  runWhatIf(findingId: string, state: string): Promise<void> {
    return this.enqueue(async () => {
      this.state.whatIf = { findingId, state, answer: null, error: null };
      try {
        this.state.whatIf.answer = await this.api.whatIf(this.sessionId, findingId, state);
      } catch (err) {
        if (err instanceof ApiError && err.status === 409) {
          this.state.whatIf.error = 'impossible scenario';
        } else {
          throw err;
        }
      }
      this.emit();
    });
  }
}
