// DOM wiring. Elements are typed structurally (just addEventListener
// plus the few properties each handler reads), so tests drive the
// bindings with plain fake objects instead of a browser.

import type { EditorController } from "./controller.js";

export interface Listenable {
  addEventListener(type: string, listener: (event: any) => void): void;
}

export interface CanvasLike extends Listenable {
  getBoundingClientRect(): { left: number; top: number; width: number; height: number };
}

export interface SliderLike extends Listenable {
  value: string;
}

export interface EditorElements {
  canvas: CanvasLike;
  clearButton: Listenable;
  removeButton: Listenable;
  rotationSlider: SliderLike;
  swatchButtons: { seed: number; element: Listenable }[];
}

export const DRAG_MIME = "text/x-object-id";

/** Map a client-space point onto canonical pixel coordinates. */
export function canvasPoint(
  canvas: CanvasLike,
  clientX: number,
  clientY: number,
  canonical: [number, number],
): [number, number] {
  const rect = canvas.getBoundingClientRect();
  const [height, width] = canonical;
  const x = ((clientX - rect.left) / rect.width) * width;
  const y = ((clientY - rect.top) / rect.height) * height;
  return [Math.round(x), Math.round(y)];
}

export function bindGestures(
  elements: EditorElements,
  controller: EditorController,
  canonical: [number, number],
): void {
  elements.canvas.addEventListener("dragover", (event) => {
    event.preventDefault();
  });

  elements.canvas.addEventListener("drop", (event) => {
    event.preventDefault();
    const objectId = event.dataTransfer?.getData(DRAG_MIME);
    if (!objectId) return;
    const [x, y] = canvasPoint(
      elements.canvas,
      event.clientX,
      event.clientY,
      canonical,
    );
    void controller.dragInsert(objectId, x, y);
  });

  elements.clearButton.addEventListener("click", () => {
    void controller.clearRoom();
  });

  elements.removeButton.addEventListener("click", () => {
    void controller.removeSelected();
  });

  // "change" fires once per released slider drag; "input" would spam an
  // op per pixel of travel
  elements.rotationSlider.addEventListener("change", (event) => {
    void controller.rotateTo(Number(event.target?.value ?? elements.rotationSlider.value));
  });

  for (const { seed, element } of elements.swatchButtons) {
    element.addEventListener("click", () => {
      void controller.applySwatch(seed);
    });
  }
}
