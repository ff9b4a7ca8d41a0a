import { describe, expect, it } from "vitest";

import { EditorController } from "../src/controller.js";
import { ServiceError } from "../src/transport.js";
import { MockService } from "./mockService.js";

async function startedController() {
  const service = new MockService();
  const controller = new EditorController(service);
  await controller.start({ model: "toy:7:8", seed: 1, demo_segmentation: true });
  return { service, controller };
}

describe("startup", () => {
  it("loads session, catalog, layout, and a matching render", async () => {
    const { service, controller } = await startedController();
    const state = controller.state;
    expect(state.sessionId).toBe("s1");
    expect(state.catalog.map((entry) => entry.id)).toEqual(["bed_c", "lamp_a"]);
    expect(state.layout).not.toBeNull();
    expect(state.render?.etag).toBe(state.logEtag);
    expect(service.calls.createSession).toBe(1);
  });

  it("tolerates sessions without a layout", async () => {
    const service = new MockService();
    service.hasLayout = false;
    const controller = new EditorController(service);
    await controller.start({ model: "toy:7:8", seed: 1 });
    expect(controller.state.layout).toBeNull();
    expect(controller.state.render).not.toBeNull();
  });
});

describe("dispatch", () => {
  it("issues exactly one POST per gesture", async () => {
    const { service, controller } = await startedController();
    const result = await controller.clearRoom();
    expect(result).toEqual({ ok: true });
    expect(service.calls.postEdit).toBe(1);
    expect(service.postedOps).toEqual([{ op: "clear_room" }]);
    expect(controller.state.log).toHaveLength(1);
  });

  it("refuses a second gesture while one is pending, with no network call", async () => {
    const { service, controller } = await startedController();
    let release!: () => void;
    service.editGate = new Promise((resolve) => {
      release = resolve;
    });
    const first = controller.clearRoom();
    // the gate holds the first POST open; a second gesture must bail
    // locally (postEdit is entered once, no second request is made)
    const second = await controller.clearRoom();
    expect(second).toEqual({ ok: false, reason: "pending" });
    release();
    expect(await first).toEqual({ ok: true });
    expect(service.calls.postEdit).toBe(1);
    expect(service.postedOps).toHaveLength(1);
  });

  it("surfaces 409 busy and keeps the displayed render", async () => {
    const { service, controller } = await startedController();
    const before = controller.state.render;
    service.failNextEdit = new ServiceError(409, "busy", "an edit is already running");
    const result = await controller.clearRoom();
    expect(result).toEqual({ ok: false, reason: "busy" });
    expect(controller.state.render).toBe(before);
    expect(controller.state.lastError?.code).toBe("busy");
    expect(controller.state.lastError?.retry).toBeNull();
    // the guard is released: the next gesture goes through
    expect(await controller.clearRoom()).toEqual({ ok: true });
  });

  it("surfaces 422 without touching the log", async () => {
    const { service, controller } = await startedController();
    service.failNextEdit = new ServiceError(422, "invalid_op", "bad edit");
    await controller.clearRoom();
    expect(controller.state.log).toHaveLength(0);
    expect(controller.state.lastError?.code).toBe("invalid_op");
  });

  it("offers a retry after a network failure and leaves state untouched", async () => {
    const { service, controller } = await startedController();
    const renderBefore = controller.state.render;
    service.failNextEdit = new TypeError("fetch failed");
    const result = await controller.clearRoom();
    expect(result).toEqual({ ok: false, reason: "network" });
    expect(controller.state.log).toHaveLength(0);
    expect(controller.state.render).toBe(renderBefore);
    const retry = controller.state.lastError?.retry;
    expect(retry).not.toBeNull();
    expect(await retry!()).toEqual({ ok: true });
    expect(service.calls.postEdit).toBe(2);
    expect(controller.state.log).toHaveLength(1);
  });
});

describe("render gating", () => {
  it("drops a stale frame and refetches until the etag matches the log", async () => {
    const { service, controller } = await startedController();
    service.staleRenders = 1;
    await controller.clearRoom();
    expect(controller.state.render?.etag).toBe("digest-1");
    expect(controller.state.render?.bytes).toEqual(service.renderBytes());
  });

  it("blanks the canvas rather than keep showing a mismatched frame", async () => {
    const { service, controller } = await startedController();
    service.staleRenders = 99;
    await controller.clearRoom();
    expect(controller.state.render).toBeNull();
    // once the service recovers, the next refresh restores the image
    service.staleRenders = 0;
    await controller.refreshRender();
    expect(controller.state.render?.etag).toBe(controller.state.logEtag);
  });

  it("skips the body on an unchanged render", async () => {
    const { service, controller } = await startedController();
    const before = controller.state.render;
    await controller.refreshRender();
    expect(controller.state.render).toBe(before);
  });
});

describe("gestures", () => {
  it("drag-insert posts one op with rounded canonical coordinates", async () => {
    const { service, controller } = await startedController();
    await controller.dragInsert("bed_c", 23.6, 11.2);
    expect(service.postedOps).toEqual([
      { op: "insert", object: "bed_c", position: [24, 11] },
    ]);
  });

  it("drag-insert honors a priority override from the priority list", async () => {
    const { service, controller } = await startedController();
    controller.setPriority("bed_c", 3);
    await controller.dragInsert("bed_c", 10, 10);
    expect(service.postedOps[0]).toMatchObject({ op: "insert", priority: 3 });
  });

  it("rotation slider clamps s into 0..S", async () => {
    const { service, controller } = await startedController();
    controller.selectObject("bed_c");
    controller.setRotationSteps(10);
    await controller.rotateTo(99);
    await controller.rotateTo(-4);
    await controller.rotateTo(2.4);
    const steps = service.postedOps.map((op) =>
      op.op === "rotate" ? op.s : NaN,
    );
    expect(steps).toEqual([10, 0, 2]);
    for (const op of service.postedOps) {
      expect(op.op).toBe("rotate");
      if (op.op === "rotate") {
        expect(op.s).toBeGreaterThanOrEqual(0);
        expect(op.s).toBeLessThanOrEqual(op.S!);
      }
    }
  });

  it("rotation without a selection makes no request", async () => {
    const { service, controller } = await startedController();
    const result = await controller.rotateTo(3);
    expect(result).toEqual({ ok: false, reason: "no_selection" });
    expect(service.calls.postEdit).toBe(0);
  });

  it("swatches restyle the selection, or the whole image without one", async () => {
    const { service, controller } = await startedController();
    await controller.applySwatch(9);
    controller.selectObject("lamp_a");
    await controller.applySwatch(5);
    expect(service.postedOps).toEqual([
      { op: "global_style", style_seed: 9 },
      { op: "restyle_object", object: "lamp_a", style_seed: 5 },
    ]);
  });

  it("remove and shift act on the selection", async () => {
    const { service, controller } = await startedController();
    controller.selectObject("lamp_a");
    await controller.removeSelected();
    await controller.shiftSelected(4.4, -2.5);
    expect(service.postedOps).toEqual([
      { op: "remove", object: "lamp_a" },
      { op: "shift", object: "lamp_a", position: [4, -2] },
    ]);
  });
});
