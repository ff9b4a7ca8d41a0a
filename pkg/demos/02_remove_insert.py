# Remove an object from a scene, then drop a different one in its place.
#
# Removal happens at an early layer (4) where features are still coarse
# "content"; insertion at layer 7 keeps the new object's appearance
# crisp. Both come from the demo bank, which snapshots feature-map
# patches of painted objects.

from pathlib import Path

from logan import Session, apply_edit, attach_segmentation
from logan.demo import build_demo_bank, build_demo_segmentation, build_demo_session
from logan.imaging import save_image_png, tile_row

out_dir = Path(__file__).parent / "out"
out_dir.mkdir(exist_ok=True)

model, source = build_demo_session()
bank = build_demo_bank(source)
print("bank objects:", ", ".join(bank.ids()))

# fresh session on a different base scene
session = Session(model, seed=4)
attach_segmentation(session, build_demo_segmentation(model.output_resolution))
before = session.render()

# segmentation class name -> erase that region and refill with background
apply_edit(session, {"op": "remove", "object": "bed"}, bank)
removed = session.render()

# insert an upright bed from the bank; position is the bbox top-left (x, y)
apply_edit(session, {"op": "insert", "object": "bed_c", "position": [24, 20]},
           bank)
after = session.render()

save_image_png(tile_row([before, removed, after]),
               out_dir / "remove_insert.png")
print(f"wrote {out_dir / 'remove_insert.png'}")
print("edit log:", session.log)
