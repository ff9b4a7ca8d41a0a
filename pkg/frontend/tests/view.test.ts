import { describe, expect, it } from "vitest";

import { initialState } from "../src/controller.js";
import { buildViewModel } from "../src/view.js";
import { CATALOG, LAYOUT } from "./mockService.js";

function populatedState() {
  const state = initialState();
  state.sessionId = "s1";
  state.catalog = CATALOG;
  state.layout = LAYOUT;
  state.render = { bytes: new Uint8Array([1, 2]), etag: "d0" };
  state.logEtag = "d0";
  return state;
}

describe("buildViewModel", () => {
  it("spans the rotation slider over s = 0..S", () => {
    const state = populatedState();
    state.rotation = { s: 3, S: 5 };
    const view = buildViewModel(state);
    expect(view.slider).toEqual({ s: 3, S: 5, stops: [0, 1, 2, 3, 4, 5] });
  });

  it("draws the floor overlay between the border anchors", () => {
    const view = buildViewModel(populatedState());
    const floor = view.overlay!.floor;
    expect(floor[0]).toEqual([0, 42]); // left image border
    expect(floor[floor.length - 1]).toEqual([63, 45]); // right border, W-1
    expect(view.overlay!.keyPoint).toEqual([31.5, 12.8]);
  });

  it("closes the ceiling hull into a loop", () => {
    const view = buildViewModel(populatedState());
    const ceiling = view.overlay!.ceiling;
    expect(ceiling[0]).toEqual(ceiling[ceiling.length - 1]);
    expect(ceiling).toHaveLength(LAYOUT.layout.ceiling_hull.length + 1);
  });

  it("outlines the selected object from its catalog bbox", () => {
    const state = populatedState();
    state.selected = "bed_c";
    const view = buildViewModel(state);
    // bbox is [y0, x0, y1, x1]
    expect(view.outline).toEqual({ x: 19, y: 25, width: 10, height: 31 });
  });

  it("shows priority overrides in the palette", () => {
    const state = populatedState();
    state.priorities.set("lamp_a", 7);
    const view = buildViewModel(state);
    expect(view.palette).toEqual([
      { id: "bed_c", category: "bed", priority: 1 },
      { id: "lamp_a", category: "lamp", priority: 7 },
    ]);
  });

  it("omits the overlay and outline when data is missing", () => {
    const state = initialState();
    const view = buildViewModel(state);
    expect(view.overlay).toBeNull();
    expect(view.outline).toBeNull();
    expect(view.renderBytes).toBeNull();
  });

  it("reports retryability of the last error", () => {
    const state = populatedState();
    state.lastError = { code: "busy", message: "busy", retry: null };
    expect(buildViewModel(state).canRetry).toBe(false);
    state.lastError = {
      code: "network",
      message: "offline",
      retry: async () => ({ ok: true }),
    };
    expect(buildViewModel(state).canRetry).toBe(true);
  });
});
