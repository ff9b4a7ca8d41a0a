import { describe, expect, it } from "vitest";

import { ServiceClient, ServiceError, unquote } from "../src/transport.js";

interface Recorded {
  url: string;
  init?: RequestInit;
}

function clientWith(responses: Response[]): {
  client: ServiceClient;
  requests: Recorded[];
} {
  const requests: Recorded[] = [];
  const fetchFn = (async (url: any, init?: RequestInit) => {
    requests.push({ url: String(url), init });
    const next = responses.shift();
    if (!next) throw new Error("no scripted response left");
    return next;
  }) as typeof fetch;
  return { client: new ServiceClient("http://svc:8080/", fetchFn), requests };
}

const RESOURCE = {
  id: "abc",
  status: "ready",
  model: "toy:7:8",
  log: [],
  etag: "d0",
  links: { self: "", render: "", layout: "" },
};

describe("ServiceClient", () => {
  it("posts session bodies as JSON and trims the trailing slash", async () => {
    const { client, requests } = clientWith([
      new Response(JSON.stringify(RESOURCE), { status: 201 }),
    ]);
    const resource = await client.createSession({ model: "toy:7:8", seed: 1 });
    expect(resource.id).toBe("abc");
    expect(requests[0]!.url).toBe("http://svc:8080/sessions");
    expect(requests[0]!.init?.method).toBe("POST");
    expect(JSON.parse(String(requests[0]!.init?.body))).toEqual({
      model: "toy:7:8",
      seed: 1,
    });
  });

  it("maps structured error bodies onto ServiceError", async () => {
    const { client } = clientWith([
      new Response(
        JSON.stringify({ error: { code: "busy", message: "edit running" } }),
        { status: 409 },
      ),
    ]);
    const err = await client
      .postEdit("abc", { op: "clear_room" })
      .catch((e) => e);
    expect(err).toBeInstanceOf(ServiceError);
    expect(err.status).toBe(409);
    expect(err.code).toBe("busy");
    expect(err.message).toBe("edit running");
  });

  it("keeps the HTTP status when the error body is not JSON", async () => {
    const { client } = clientWith([new Response("boom", { status: 500 })]);
    const err = await client.getSession("abc").catch((e) => e);
    expect(err).toBeInstanceOf(ServiceError);
    expect(err.code).toBe("unknown");
    expect(err.message).toBe("HTTP 500");
  });

  it("sends If-None-Match and decodes 200 renders", async () => {
    const body = new Uint8Array([137, 80, 78, 71]);
    const { client, requests } = clientWith([
      new Response(body, { status: 200, headers: { etag: '"d7"' } }),
    ]);
    const result = await client.fetchRender("abc", "d6");
    expect(requests[0]!.url).toBe("http://svc:8080/sessions/abc/render");
    expect(
      new Headers(requests[0]!.init?.headers).get("If-None-Match"),
    ).toBe('"d6"');
    expect(result.status).toBe(200);
    expect(result.etag).toBe("d7");
    expect(result.bytes).toEqual(body);
  });

  it("returns no bytes on 304", async () => {
    const { client } = clientWith([
      new Response(null, { status: 304, headers: { etag: '"d6"' } }),
    ]);
    const result = await client.fetchRender("abc", "d6");
    expect(result).toEqual({ status: 304, etag: "d6", bytes: null });
  });

  it("requests layer heatmaps via the query string", async () => {
    const { client, requests } = clientWith([
      new Response(new Uint8Array([1]), {
        status: 200,
        headers: { etag: '"d0"' },
      }),
    ]);
    await client.fetchRender("abc", null, 4);
    expect(requests[0]!.url).toBe("http://svc:8080/sessions/abc/render?layer=4");
  });

  it("unwraps the catalog and builds thumbnail URLs", async () => {
    const { client } = clientWith([
      new Response(JSON.stringify({ objects: [] }), { status: 200 }),
    ]);
    expect(await client.fetchCatalog()).toEqual([]);
    expect(client.thumbnailUrl("bed_c")).toBe(
      "http://svc:8080/objects/bed_c/thumbnail",
    );
  });

  it("strips quotes from etags", () => {
    expect(unquote('"abc"')).toBe("abc");
    expect(unquote("abc")).toBe("abc");
  });
});
