export { EditorController, initialState } from "./controller.js";
export type {
  DispatchResult,
  DisplayedRender,
  EditorError,
  EditorState,
} from "./controller.js";
export {
  DRAG_MIME,
  bindGestures,
  canvasPoint,
} from "./gestures.js";
export type { EditorElements } from "./gestures.js";
export { ServiceClient, ServiceError, unquote } from "./transport.js";
export type {
  EditServiceTransport,
  RenderResult,
} from "./transport.js";
export type {
  CatalogEntry,
  EditOp,
  LayoutPayload,
  SessionCreateBody,
  SessionResource,
} from "./types.js";
export { buildViewModel } from "./view.js";
export type { OverlayModel, ViewModel } from "./view.js";
