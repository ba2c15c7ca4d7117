import { ServiceClient, ServiceError } from './api.js';
import { render, showError, type Handlers } from './render.js';
import type { Action, ActionResult, View } from './types.js';

/** The slice of the service client the controller needs. */
export interface SessionApi {
  postAction(sessionId: string, action: Action): Promise<ActionResult>;
  openEvents(sessionId: string, replayFrom?: number): EventSource;
}

/**
 * Session controller: gestures go out as service actions, and the DOM is
 * rebuilt only from views the service returns (response or event stream).
 * One action is in flight at a time; later gestures queue behind it.
 * Views apply in version order, so a stale stream event can never roll
 * the UI back.
 */
export class App {
  private view: View;
  private queue: Action[] = [];
  private inflight = false;
  private events: EventSource | null = null;

  constructor(
    private readonly client: SessionApi,
    private readonly sessionId: string,
    initialView: View,
    private readonly root: HTMLElement,
  ) {
    this.view = initialView;
    this.render();
  }

  get currentView(): View {
    return this.view;
  }

  /** Apply a view unless it is older than what we already show. */
  applyView(view: View): boolean {
    if (view.version <= this.view.version) return false;
    this.view = view;
    this.render();
    return true;
  }

  dispatch(action: Action): void {
    this.queue.push(action);
    void this.drain();
  }

  /** Resolves when the action queue is empty; test hooks await this. */
  async settled(): Promise<void> {
    while (this.inflight || this.queue.length > 0) {
      await new Promise((resolve) => setTimeout(resolve, 1));
    }
  }

  connectEvents(): void {
    if (typeof EventSource === 'undefined' || this.events) return;
    this.events = this.client.openEvents(this.sessionId, this.view.version);
    this.events.addEventListener('view', (event) => {
      this.applyView(JSON.parse((event as MessageEvent).data) as View);
    });
  }

  close(): void {
    this.events?.close();
    this.events = null;
  }

  private async drain(): Promise<void> {
    if (this.inflight) return;
    const action = this.queue.shift();
    if (!action) return;
    this.inflight = true;
    try {
      const result = await this.client.postAction(this.sessionId, action);
      this.applyView(result.view);
    } catch (error) {
      if (error instanceof ServiceError) {
        showError(this.root, error.message);
      } else {
        showError(this.root, 'service unreachable');
      }
    } finally {
      this.inflight = false;
    }
    void this.drain();
  }

  private scrollTo(label: string): void {
    const cell = document.getElementById(`cell-${label}`);
    cell?.scrollIntoView?.({ behavior: 'smooth', block: 'center' });
  }

  private render(): void {
    const handlers: Handlers = {
      onRun: (label) => this.dispatch({ action: 'execute', cell: label }),
      onBack: () => this.dispatch({ action: 'back' }),
      onReset: () => this.dispatch({ action: 'reset' }),
      onInsert: (position, kind) => this.dispatch({ action: 'insert', position, kind }),
      onDelete: (position) => this.dispatch({ action: 'delete', position }),
      onJump: (label) => this.scrollTo(label),
    };
    render(this.root, this.view, handlers);
  }
}

/** Create a session (server defaults unless given) and mount the app. */
export async function startApp(
  baseUrl: string,
  root: HTMLElement,
  notebook?: unknown,
  script?: string,
): Promise<App> {
  const client = new ServiceClient(baseUrl);
  const created = await client.createSession(notebook, script);
  const app = new App(client, created.session_id, created.view, root);
  app.connectEvents();
  return app;
}
