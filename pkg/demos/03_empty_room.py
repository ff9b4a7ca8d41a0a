# Clear every object out of a room in one edit.
#
# The segmentation map is parsed into a ceiling/wall/floor layout, a
# background model learns per-class feature statistics from the visible
# (unoccluded) pixels, and clear_room paints that background over all
# object regions at layer 4.

from pathlib import Path

import numpy as np

from logan import apply_edit, parse_layout
from logan.demo import build_demo_session
from logan.imaging import save_image_png, tile_row

out_dir = Path(__file__).parent / "out"
out_dir.mkdir(exist_ok=True)

model, session = build_demo_session()
before = session.render()

layout = parse_layout(session.segmentation)
print(f"key point: {layout.key_point}")
print(f"floor anchors: {layout.left_anchor} / {layout.right_anchor}")
print(f"floor slopes: ({layout.slopes[0]:+.3f}, {layout.slopes[1]:+.3f})")

apply_edit(session, {"op": "clear_room"})
after = session.render()

changed = np.abs(after - before).max(axis=0) > 1e-9
print(f"{changed.mean():.0%} of pixels changed")

save_image_png(tile_row([before, after]), out_dir / "empty_room.png")
print(f"wrote {out_dir / 'empty_room.png'}")
