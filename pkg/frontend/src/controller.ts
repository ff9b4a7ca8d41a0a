// Editor state machine. Two rules drive everything here:
//
//  1. at most one mutating request is in flight (the server answers a
//     concurrent second edit with 409 anyway), and
//  2. the canvas only ever shows a render whose ETag equals the digest
//     of the log the server acknowledged — no optimistic frames.

import { ServiceError, unquote } from "./transport.js";
import type { EditServiceTransport } from "./transport.js";
import type {
  CatalogEntry,
  EditOp,
  LayoutPayload,
  SessionCreateBody,
} from "./types.js";

export interface DisplayedRender {
  bytes: Uint8Array;
  etag: string;
}

export interface EditorError {
  code: string;
  message: string;
  retry: (() => Promise<DispatchResult>) | null;
}

export type DispatchResult =
  | { ok: true }
  | { ok: false; reason: string };

export interface EditorState {
  sessionId: string | null;
  model: string | null;
  log: EditOp[];
  logEtag: string; // digest the server acknowledged last
  render: DisplayedRender | null;
  layout: LayoutPayload | null;
  catalog: CatalogEntry[];
  selected: string | null;
  pending: boolean;
  rotation: { s: number; S: number };
  styleSwatches: number[];
  priorities: Map<string, number>; // per-object overrides for future ops
  lastError: EditorError | null;
}

export function initialState(): EditorState {
  return {
    sessionId: null,
    model: null,
    log: [],
    logEtag: "",
    render: null,
    layout: null,
    catalog: [],
    selected: null,
    pending: false,
    rotation: { s: 0, S: 10 },
    styleSwatches: [2, 5, 9, 11],
    priorities: new Map(),
    lastError: null,
  };
}

export class EditorController {
  readonly state: EditorState = initialState();

  constructor(
    private readonly service: EditServiceTransport,
    private readonly onChange?: () => void,
  ) {}

  private changed(): void {
    this.onChange?.();
  }

  async start(body: SessionCreateBody): Promise<void> {
    const resource = await this.service.createSession(body);
    this.state.sessionId = resource.id;
    this.state.model = resource.model;
    this.state.log = resource.log;
    this.state.logEtag = unquote(resource.etag);
    this.state.catalog = await this.service.fetchCatalog();
    try {
      this.state.layout = await this.service.fetchLayout(resource.id);
    } catch (err) {
      if (!(err instanceof ServiceError && err.code === "no_layout")) throw err;
      this.state.layout = null;
    }
    await this.refreshRender();
    this.changed();
  }

  /** One gesture, one POST. Rejected locally while another op is in flight. */
  async dispatchEdit(op: EditOp): Promise<DispatchResult> {
    if (this.state.pending) return { ok: false, reason: "pending" };
    if (this.state.sessionId === null) return { ok: false, reason: "no_session" };
    this.state.pending = true;
    this.changed();
    try {
      const resource = await this.service.postEdit(this.state.sessionId, op);
      this.state.log = resource.log;
      this.state.logEtag = unquote(resource.etag);
      this.state.lastError = null;
      await this.refreshRender();
      return { ok: true };
    } catch (err) {
      if (err instanceof ServiceError) {
        // 409 busy / 422 bad op: the render we show is still valid
        this.state.lastError = { code: err.code, message: err.message, retry: null };
        return { ok: false, reason: err.code };
      }
      const message = err instanceof Error ? err.message : String(err);
      this.state.lastError = {
        code: "network",
        message,
        retry: () => this.dispatchEdit(op),
      };
      return { ok: false, reason: "network" };
    } finally {
      this.state.pending = false;
      this.changed();
    }
  }

  /**
   * Pull the render for the acknowledged log. Bytes are swapped in only
   * when their ETag matches `logEtag`; a stale frame (e.g. a cached
   * response from before the edit) is thrown away and refetched.
   */
  async refreshRender(): Promise<void> {
    const id = this.state.sessionId;
    if (id === null) return;
    for (let attempt = 0; attempt < 2; attempt++) {
      const known = attempt === 0 ? this.state.render?.etag : null;
      const result = await this.service.fetchRender(id, known ?? null);
      if (result.status === 304) {
        // unchanged and already displayed; nothing to do unless the log
        // moved on, in which case force a full fetch
        if (result.etag === this.state.logEtag || this.state.render === null) return;
        continue;
      }
      if (result.etag === this.state.logEtag && result.bytes) {
        this.state.render = { bytes: result.bytes, etag: result.etag };
        return;
      }
      // mismatched frame: drop it and try once more without the cache tag
    }
    // nothing current came back; a blank canvas beats a stale one
    if (this.state.render !== null && this.state.render.etag !== this.state.logEtag) {
      this.state.render = null;
    }
  }

  // -- gestures -------------------------------------------------------

  clearRoom(): Promise<DispatchResult> {
    return this.dispatchEdit({ op: "clear_room" });
  }

  /** Drop from the bank palette onto canonical coordinates (x, y). */
  dragInsert(objectId: string, x: number, y: number): Promise<DispatchResult> {
    const op: EditOp = {
      op: "insert",
      object: objectId,
      position: [Math.round(x), Math.round(y)],
    };
    const priority = this.state.priorities.get(objectId);
    if (priority !== undefined) op.priority = priority;
    return this.dispatchEdit(op);
  }

  removeSelected(): Promise<DispatchResult> {
    if (this.state.selected === null)
      return Promise.resolve({ ok: false, reason: "no_selection" });
    return this.dispatchEdit({ op: "remove", object: this.state.selected });
  }

  shiftSelected(dx: number, dy: number): Promise<DispatchResult> {
    if (this.state.selected === null)
      return Promise.resolve({ ok: false, reason: "no_selection" });
    return this.dispatchEdit({
      op: "shift",
      object: this.state.selected,
      position: [Math.round(dx), Math.round(dy)],
    });
  }

  /** Slider gesture: s is clamped into the path's 0..S integer range. */
  rotateTo(s: number): Promise<DispatchResult> {
    if (this.state.selected === null)
      return Promise.resolve({ ok: false, reason: "no_selection" });
    const S = this.state.rotation.S;
    const step = Math.min(S, Math.max(0, Math.round(s)));
    this.state.rotation = { s: step, S };
    return this.dispatchEdit({
      op: "rotate",
      object: this.state.selected,
      s: step,
      S,
    });
  }

  /** Swatch click: restyle the selection, or the whole image without one. */
  applySwatch(seed: number): Promise<DispatchResult> {
    if (this.state.selected !== null) {
      return this.dispatchEdit({
        op: "restyle_object",
        object: this.state.selected,
        style_seed: seed,
      });
    }
    return this.dispatchEdit({ op: "global_style", style_seed: seed });
  }

  // -- local-only state -----------------------------------------------

  selectObject(objectId: string | null): void {
    this.state.selected = objectId;
    this.state.rotation = { ...this.state.rotation, s: 0 };
    this.changed();
  }

  setRotationSteps(S: number): void {
    const steps = Math.max(1, Math.round(S));
    this.state.rotation = {
      s: Math.min(this.state.rotation.s, steps),
      S: steps,
    };
    this.changed();
  }

  setPriority(objectId: string, priority: number): void {
    this.state.priorities.set(objectId, Math.max(0, Math.round(priority)));
    this.changed();
  }
}
