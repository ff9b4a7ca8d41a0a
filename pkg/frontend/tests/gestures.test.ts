import { describe, expect, it } from "vitest";

import { EditorController } from "../src/controller.js";
import {
  DRAG_MIME,
  bindGestures,
  canvasPoint,
} from "../src/gestures.js";
import { MockService } from "./mockService.js";

class FakeElement {
  listeners = new Map<string, Array<(event: any) => void>>();
  value = "0";

  addEventListener(type: string, listener: (event: any) => void): void {
    const bucket = this.listeners.get(type) ?? [];
    bucket.push(listener);
    this.listeners.set(type, bucket);
  }

  fire(type: string, event: any = {}): void {
    for (const listener of this.listeners.get(type) ?? []) listener(event);
  }

  getBoundingClientRect() {
    return { left: 10, top: 20, width: 128, height: 128 };
  }
}

async function boundEditor() {
  const service = new MockService();
  const controller = new EditorController(service);
  await controller.start({ model: "toy:7:8", seed: 1 });
  const elements = {
    canvas: new FakeElement(),
    clearButton: new FakeElement(),
    removeButton: new FakeElement(),
    rotationSlider: new FakeElement(),
    swatchButtons: [
      { seed: 9, element: new FakeElement() },
      { seed: 11, element: new FakeElement() },
    ],
  };
  bindGestures(elements, controller, [64, 64]);
  return { service, controller, elements };
}

function settle() {
  return new Promise((resolve) => setTimeout(resolve, 0));
}

describe("canvasPoint", () => {
  it("maps client coordinates onto the canonical grid", () => {
    const canvas = new FakeElement();
    expect(canvasPoint(canvas, 10 + 64, 20 + 32, [64, 64])).toEqual([32, 16]);
    expect(canvasPoint(canvas, 10, 20, [64, 64])).toEqual([0, 0]);
  });
});

describe("bindGestures", () => {
  it("turns a drop into exactly one insert", async () => {
    const { service, elements } = await boundEditor();
    elements.canvas.fire("drop", {
      preventDefault() {},
      clientX: 10 + 64,
      clientY: 20 + 32,
      dataTransfer: {
        getData: (mime: string) => (mime === DRAG_MIME ? "bed_c" : ""),
      },
    });
    await settle();
    expect(service.calls.postEdit).toBe(1);
    expect(service.postedOps).toEqual([
      { op: "insert", object: "bed_c", position: [32, 16] },
    ]);
  });

  it("ignores drops that carry no object id", async () => {
    const { service, elements } = await boundEditor();
    elements.canvas.fire("drop", {
      preventDefault() {},
      clientX: 30,
      clientY: 40,
      dataTransfer: { getData: () => "" },
    });
    await settle();
    expect(service.calls.postEdit).toBe(0);
  });

  it("debounces rapid clicks through the pending guard", async () => {
    const { service, elements } = await boundEditor();
    let release!: () => void;
    service.editGate = new Promise((resolve) => {
      release = resolve;
    });
    elements.clearButton.fire("click");
    elements.clearButton.fire("click"); // still pending: dropped locally
    release();
    await settle();
    expect(service.calls.postEdit).toBe(1);
  });

  it("sends a rotate op from the slider's change event", async () => {
    const { service, controller, elements } = await boundEditor();
    controller.selectObject("bed_c");
    elements.rotationSlider.fire("change", { target: { value: "7" } });
    await settle();
    expect(service.postedOps).toEqual([
      { op: "rotate", object: "bed_c", s: 7, S: 10 },
    ]);
  });

  it("wires swatch buttons to style edits", async () => {
    const { service, elements } = await boundEditor();
    elements.swatchButtons[0]!.element.fire("click");
    await settle();
    expect(service.postedOps).toEqual([{ op: "global_style", style_seed: 9 }]);
  });

  it("wires the remove button to the selection", async () => {
    const { service, controller, elements } = await boundEditor();
    controller.selectObject("lamp_a");
    elements.removeButton.fire("click");
    await settle();
    expect(service.postedOps).toEqual([{ op: "remove", object: "lamp_a" }]);
  });
});
