// Browser entry point: wires the real DOM to the controller. Everything
// interesting lives in controller/view/gestures; this file only grabs
// elements, forwards events, and paints view models.

import { EditorController } from "./controller.js";
import { DRAG_MIME, bindGestures } from "./gestures.js";
import { ServiceClient } from "./transport.js";
import { buildViewModel } from "./view.js";
import type { ViewModel } from "./view.js";

const params = new URLSearchParams(location.search);
const BASE_URL = params.get("service") ?? "http://localhost:8080";
const MODEL = params.get("model") ?? "toy:7";
const SEED = Number(params.get("seed") ?? "1");

const $ = <T extends HTMLElement>(id: string) =>
  document.getElementById(id) as T;

const canvas = $<HTMLCanvasElement>("render");
const status = $<HTMLElement>("status");
const palette = $<HTMLElement>("palette");
const retryButton = $<HTMLButtonElement>("retry");
const overlayToggle = $<HTMLInputElement>("overlay");
const sliderLabel = $<HTMLElement>("rotation-value");
const slider = $<HTMLInputElement>("rotation");

const client = new ServiceClient(BASE_URL);
const controller = new EditorController(client, () => {
  void paint();
});

let shownEtag: string | null = null;
let shownBitmap: ImageBitmap | null = null;

async function bitmapFor(vm: ViewModel): Promise<ImageBitmap | null> {
  if (vm.renderBytes === null) return null;
  if (vm.renderEtag === shownEtag && shownBitmap) return shownBitmap;
  const blob = new Blob([vm.renderBytes as BlobPart], { type: "image/png" });
  shownBitmap = await createImageBitmap(blob);
  shownEtag = vm.renderEtag;
  return shownBitmap;
}

async function paint(): Promise<void> {
  const vm = buildViewModel(controller.state);
  const ctx = canvas.getContext("2d")!;
  ctx.clearRect(0, 0, canvas.width, canvas.height);

  const bitmap = await bitmapFor(vm);
  if (bitmap) {
    ctx.imageSmoothingEnabled = false;
    ctx.drawImage(bitmap, 0, 0, canvas.width, canvas.height);
  }

  const canonical = controller.state.catalog[0]?.canonical ?? [64, 64];
  const sx = canvas.width / canonical[1];
  const sy = canvas.height / canonical[0];

  if (vm.overlay && overlayToggle.checked) {
    ctx.strokeStyle = "rgba(80, 200, 255, 0.9)";
    ctx.lineWidth = 2;
    for (const line of [vm.overlay.floor, vm.overlay.ceiling]) {
      ctx.beginPath();
      line.forEach(([x, y], i) =>
        i === 0 ? ctx.moveTo(x * sx, y * sy) : ctx.lineTo(x * sx, y * sy),
      );
      ctx.stroke();
    }
  }

  if (vm.outline) {
    ctx.strokeStyle = "rgba(255, 210, 60, 0.9)";
    ctx.lineWidth = 2;
    ctx.strokeRect(
      vm.outline.x * sx,
      vm.outline.y * sy,
      vm.outline.width * sx,
      vm.outline.height * sy,
    );
  }

  slider.max = String(vm.slider.S);
  slider.value = String(vm.slider.s);
  sliderLabel.textContent = `${vm.slider.s} / ${vm.slider.S}`;
  status.textContent = vm.busy
    ? "working..."
    : vm.error ?? `${vm.logLength} edits`;
  retryButton.hidden = !vm.canRetry;
  document.body.classList.toggle("busy", vm.busy);
}

function buildPalette(): void {
  palette.replaceChildren();
  for (const entry of controller.state.catalog) {
    const item = document.createElement("img");
    item.src = client.thumbnailUrl(entry.id);
    item.title = `${entry.id} (${entry.category}, priority ${entry.priority})`;
    item.draggable = true;
    item.addEventListener("dragstart", (event) => {
      event.dataTransfer?.setData(DRAG_MIME, entry.id);
    });
    item.addEventListener("click", () => {
      controller.selectObject(
        controller.state.selected === entry.id ? null : entry.id,
      );
    });
    palette.appendChild(item);
  }
}

async function boot(): Promise<void> {
  status.textContent = `connecting to ${BASE_URL} ...`;
  await controller.start({
    model: MODEL,
    seed: SEED,
    demo_segmentation: true,
  });
  buildPalette();
  bindGestures(
    {
      canvas,
      clearButton: $("clear"),
      removeButton: $("remove"),
      rotationSlider: slider,
      swatchButtons: Array.from(
        document.querySelectorAll<HTMLButtonElement>("[data-seed]"),
      ).map((element) => ({
        seed: Number(element.dataset.seed),
        element,
      })),
    },
    controller,
    controller.state.catalog[0]?.canonical ?? [64, 64],
  );
  overlayToggle.addEventListener("change", () => void paint());
  retryButton.addEventListener("click", () => {
    void controller.state.lastError?.retry?.();
  });
  await paint();
}

boot().catch((err) => {
  status.textContent = `failed to start: ${err instanceof Error ? err.message : err}`;
});
