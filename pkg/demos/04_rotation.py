"""
Rotating an object without a 3D model
=====================================

Object masks of one category are clustered into pose groups; walking the
latent-code line between two cluster representatives re-poses the object
while content edits keep it anchored in place.
"""

from pathlib import Path

from logan import Session, apply_edit, attach_segmentation, cluster_poses
from logan.demo import build_demo_bank, build_demo_session
from logan.imaging import save_image_png, tile_row

out_dir = Path(__file__).parent / "out"
out_dir.mkdir(exist_ok=True)

model, source = build_demo_session()
bank = build_demo_bank(source)

# the bank has four beds in two pose families (horizontal vs upright)
poses = cluster_poses(bank.by_category("bed"), m=2)
for k in range(poses.cluster_count):
    print(f"cluster {k}: representative {poses.representative_ids[k]}")

steps = 5
frames = []
for s in range(steps + 1):
    session = Session(model, seed=1)
    attach_segmentation(session, source.segmentation)
    apply_edit(session, {"op": "rotate", "object": "bed_a",
                         "s": s, "S": steps, "left": 0, "right": 1}, bank)
    frames.append(session.render())

save_image_png(tile_row(frames), out_dir / "rotation.png")
print(f"wrote {out_dir / 'rotation.png'} ({steps + 1} frames)")
