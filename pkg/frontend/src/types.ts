// Wire types for the editing service. Field names mirror the JSON the
// server actually sends; nothing here is invented client-side.

export type EditOp =
  | { op: "clear_room"; layer?: number }
  | { op: "remove"; object: string; layer?: number; priority?: number }
  | {
      op: "insert";
      object: string;
      position?: [number, number];
      layer?: number;
      priority?: number;
      style_seed?: number;
    }
  | {
      op: "shift";
      object: string;
      position: [number, number];
      layer?: number;
      priority?: number;
    }
  | {
      op: "rotate";
      object: string;
      s: number;
      S?: number;
      left?: number;
      right?: number;
      layer?: number;
      layers?: [number, number];
      priority?: number;
    }
  | {
      op: "restyle_object";
      object: string;
      style_seed: number;
      layers?: [number, number];
      priority?: number;
    }
  | { op: "global_style"; style_seed: number; layers?: [number, number] };

export interface SessionResource {
  id: string;
  status: string;
  model: string;
  log: EditOp[];
  etag: string;
  links: { self: string; render: string; layout: string };
}

export interface CatalogEntry {
  id: string;
  category: string;
  priority: number;
  layers: number[];
  bbox: [number, number, number, number]; // [y0, x0, y1, x1], canonical px
  canonical: [number, number]; // [height, width]
}

export interface LayoutPayload {
  layout: {
    height: number;
    width: number;
    ceiling_hull: [number, number][];
    key_point: [number, number];
    left_anchor: [number, number];
    right_anchor: [number, number];
    slopes: [number, number];
    floor_boundary: [number, number][];
  };
  low_confidence: string[];
}

export interface SessionCreateBody {
  model: string;
  seed?: number;
  codes?: number[][];
  demo_segmentation?: boolean;
}
