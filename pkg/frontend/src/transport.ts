// Thin typed client over the service's REST routes. Renders are
// ETag-aware: pass the ETag you already display and a 304 comes back
// with no bytes.

import type {
  CatalogEntry,
  EditOp,
  LayoutPayload,
  SessionCreateBody,
  SessionResource,
} from "./types.js";

export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ServiceError";
  }
}

export interface RenderResult {
  status: 200 | 304;
  etag: string; // digest without the surrounding quotes
  bytes: Uint8Array | null; // null on 304
}

// the subset the editor needs; EditorController depends on this, not on
// the concrete client, so tests can hand in a scripted double
export interface EditServiceTransport {
  createSession(body: SessionCreateBody): Promise<SessionResource>;
  getSession(id: string): Promise<SessionResource>;
  postEdit(id: string, op: EditOp): Promise<SessionResource>;
  fetchRender(
    id: string,
    knownEtag?: string | null,
    layer?: number,
  ): Promise<RenderResult>;
  fetchLayout(id: string): Promise<LayoutPayload>;
  fetchCatalog(): Promise<CatalogEntry[]>;
  thumbnailUrl(objectId: string): string;
}

export function unquote(etag: string): string {
  return etag.replace(/^"|"$/g, "");
}

async function raiseForStatus(res: Response): Promise<void> {
  if (res.ok || res.status === 304) return;
  let code = "unknown";
  let message = `HTTP ${res.status}`;
  try {
    const body = await res.json();
    if (body?.error) {
      code = body.error.code ?? code;
      message = body.error.message ?? message;
    }
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ServiceError(res.status, code, message);
}

export class ServiceClient implements EditServiceTransport {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
  }

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchFn(this.baseUrl + path, init);
    await raiseForStatus(res);
    return (await res.json()) as T;
  }

  createSession(body: SessionCreateBody): Promise<SessionResource> {
    return this.json("/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  getSession(id: string): Promise<SessionResource> {
    return this.json(`/sessions/${id}`);
  }

  postEdit(id: string, op: EditOp): Promise<SessionResource> {
    return this.json(`/sessions/${id}/edits`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(op),
    });
  }

  async fetchRender(
    id: string,
    knownEtag?: string | null,
    layer?: number,
  ): Promise<RenderResult> {
    const query = layer === undefined ? "" : `?layer=${layer}`;
    const headers: Record<string, string> = {};
    if (knownEtag) headers["If-None-Match"] = `"${unquote(knownEtag)}"`;
    const res = await this.fetchFn(
      `${this.baseUrl}/sessions/${id}/render${query}`,
      { headers },
    );
    await raiseForStatus(res);
    const etag = unquote(res.headers.get("etag") ?? "");
    if (res.status === 304) return { status: 304, etag, bytes: null };
    return {
      status: 200,
      etag,
      bytes: new Uint8Array(await res.arrayBuffer()),
    };
  }

  fetchLayout(id: string): Promise<LayoutPayload> {
    return this.json(`/sessions/${id}/layout`);
  }

  async fetchCatalog(): Promise<CatalogEntry[]> {
    const body = await this.json<{ objects: CatalogEntry[] }>("/objects");
    return body.objects;
  }

  thumbnailUrl(objectId: string): string {
    return `${this.baseUrl}/objects/${objectId}/thumbnail`;
  }
}
