// Scripted stand-in for the REST service: deterministic etags, render
// bytes derived from the log length, and knobs for failure injection.

import type {
  EditServiceTransport,
  RenderResult,
} from "../src/transport.js";
import type {
  CatalogEntry,
  EditOp,
  LayoutPayload,
  SessionCreateBody,
  SessionResource,
} from "../src/types.js";

export const CATALOG: CatalogEntry[] = [
  {
    id: "bed_c",
    category: "bed",
    priority: 1,
    layers: [1, 2, 3, 4, 5, 6, 7, 8],
    bbox: [25, 19, 56, 29],
    canonical: [64, 64],
  },
  {
    id: "lamp_a",
    category: "lamp",
    priority: 5,
    layers: [1, 2, 3, 4, 5, 6, 7, 8],
    bbox: [26, 6, 38, 12],
    canonical: [64, 64],
  },
];

export const LAYOUT: LayoutPayload = {
  layout: {
    height: 64,
    width: 64,
    ceiling_hull: [
      [0, 6],
      [63, 6],
      [31.5, 12.8],
    ],
    key_point: [31.5, 12.8],
    left_anchor: [0, 42],
    right_anchor: [63, 45],
    slopes: [0.1, -0.12],
    floor_boundary: [
      [0, 42],
      [30, 45],
      [63, 45],
    ],
  },
  low_confidence: [],
};

export class MockService implements EditServiceTransport {
  calls = { createSession: 0, postEdit: 0, fetchRender: 0, fetchLayout: 0, fetchCatalog: 0 };
  postedOps: EditOp[] = [];
  log: EditOp[] = [];

  /** throw this (once) from the next postEdit */
  failNextEdit: Error | null = null;
  /** serve this many mismatched-etag frames before the right one */
  staleRenders = 0;
  /** when set, postEdit blocks until the promise resolves */
  editGate: Promise<void> | null = null;
  hasLayout = true;

  private etag(): string {
    return `digest-${this.log.length}`;
  }

  renderBytes(): Uint8Array {
    return new Uint8Array([7, this.log.length]);
  }

  private resource(): SessionResource {
    return {
      id: "s1",
      status: "ready",
      model: "toy:7:8",
      log: [...this.log],
      etag: this.etag(),
      links: {
        self: "/sessions/s1",
        render: "/sessions/s1/render",
        layout: "/sessions/s1/layout",
      },
    };
  }

  async createSession(_body: SessionCreateBody): Promise<SessionResource> {
    this.calls.createSession++;
    return this.resource();
  }

  async getSession(_id: string): Promise<SessionResource> {
    return this.resource();
  }

  async postEdit(_id: string, op: EditOp): Promise<SessionResource> {
    this.calls.postEdit++;
    if (this.editGate) {
      const gate = this.editGate;
      this.editGate = null;
      await gate;
    }
    if (this.failNextEdit) {
      const err = this.failNextEdit;
      this.failNextEdit = null;
      throw err;
    }
    this.postedOps.push(op);
    this.log.push(op);
    return this.resource();
  }

  async fetchRender(
    _id: string,
    knownEtag?: string | null,
  ): Promise<RenderResult> {
    this.calls.fetchRender++;
    if (this.staleRenders > 0) {
      this.staleRenders--;
      return { status: 200, etag: "digest-stale", bytes: new Uint8Array([0]) };
    }
    if (knownEtag === this.etag()) {
      return { status: 304, etag: this.etag(), bytes: null };
    }
    return { status: 200, etag: this.etag(), bytes: this.renderBytes() };
  }

  async fetchLayout(_id: string): Promise<LayoutPayload> {
    this.calls.fetchLayout++;
    if (!this.hasLayout) {
      const { ServiceError } = await import("../src/transport.js");
      throw new ServiceError(404, "no_layout", "session has no segmentation");
    }
    return LAYOUT;
  }

  async fetchCatalog(): Promise<CatalogEntry[]> {
    this.calls.fetchCatalog++;
    return CATALOG;
  }

  thumbnailUrl(objectId: string): string {
    return `mock://objects/${objectId}/thumbnail`;
  }
}
