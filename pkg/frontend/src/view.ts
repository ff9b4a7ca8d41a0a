// Pure view-model construction: everything the DOM layer draws, derived
// from EditorState with no service calls and no mutation.

import type { EditorState } from "./controller.js";
import type { CatalogEntry } from "./types.js";

export interface OutlineBox {
  x: number;
  y: number;
  width: number;
  height: number;
}

export interface OverlayModel {
  // polylines in canonical pixel coordinates, [x, y] pairs
  floor: [number, number][];
  ceiling: [number, number][];
  keyPoint: [number, number];
  lowConfidence: string[];
}

export interface ViewModel {
  renderBytes: Uint8Array | null;
  renderEtag: string | null;
  busy: boolean;
  error: string | null;
  canRetry: boolean;
  selected: string | null;
  outline: OutlineBox | null;
  slider: { s: number; S: number; stops: number[] };
  swatches: number[];
  palette: { id: string; category: string; priority: number }[];
  overlay: OverlayModel | null;
  logLength: number;
}

function outlineFor(entry: CatalogEntry): OutlineBox {
  const [y0, x0, y1, x1] = entry.bbox;
  return { x: x0, y: y0, width: x1 - x0, height: y1 - y0 };
}

export function buildViewModel(state: EditorState): ViewModel {
  const selectedEntry =
    state.selected === null
      ? undefined
      : state.catalog.find((entry) => entry.id === state.selected);

  let overlay: OverlayModel | null = null;
  if (state.layout !== null) {
    const layout = state.layout.layout;
    overlay = {
      floor: layout.floor_boundary.map(([x, y]) => [x, y]),
      // close the hull so the ceiling outline is a loop
      ceiling: [...layout.ceiling_hull, layout.ceiling_hull[0]!],
      keyPoint: layout.key_point,
      lowConfidence: state.layout.low_confidence,
    };
  }

  return {
    renderBytes: state.render?.bytes ?? null,
    renderEtag: state.render?.etag ?? null,
    busy: state.pending,
    error: state.lastError?.message ?? null,
    canRetry: state.lastError?.retry !== null && state.lastError !== null,
    selected: state.selected,
    outline: selectedEntry ? outlineFor(selectedEntry) : null,
    slider: {
      s: state.rotation.s,
      S: state.rotation.S,
      stops: Array.from({ length: state.rotation.S + 1 }, (_, i) => i),
    },
    swatches: [...state.styleSwatches],
    palette: state.catalog.map(({ id, category, priority }) => ({
      id,
      category,
      priority: state.priorities.get(id) ?? priority,
    })),
    overlay,
    logLength: state.log.length,
  };
}
