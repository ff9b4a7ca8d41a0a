# Per-region restyling: change how one object looks without moving it,
# and compare with a whole-image style swap.
#
# A style-only action restyles the masked region with its own latent
# code; the rest of the image keeps the global code. Late layers (8+)
# carry appearance, so restricting the global swap to them preserves
# the room geometry.

from pathlib import Path

from logan import Session, apply_edit, attach_segmentation
from logan.demo import build_demo_bank, build_demo_session
from logan.imaging import save_image_png, tile_row

out_dir = Path(__file__).parent / "out"
out_dir.mkdir(exist_ok=True)

model, source = build_demo_session()
bank = build_demo_bank(source)

session = Session(model, seed=1)
attach_segmentation(session, source.segmentation)
base = session.render()

apply_edit(session, {"op": "restyle_object", "object": "bed_a",
                     "style_seed": 9}, bank)
object_only = session.render()

fresh = Session(model, seed=1)
apply_edit(fresh, {"op": "global_style", "style_seed": 11,
                   "layers": [model.layer_count, model.layer_count]})
whole_image = fresh.render()

save_image_png(tile_row([base, object_only, whole_image]),
               out_dir / "restyle.png")
print(f"wrote {out_dir / 'restyle.png'}")
