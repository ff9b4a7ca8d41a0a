"""
Hello, generator
================

Instantiate the deterministic toy backbone, draw per-layer latent codes
from a seed, and render a few scenes side by side.
"""

from pathlib import Path

from logan import instantiate_model
from logan.imaging import save_image_png, tile_row

out_dir = Path(__file__).parent / "out"
out_dir.mkdir(exist_ok=True)

# "toy:7" means: weights drawn from seed 7, default depth (14 layers,
# so a 256x256 canvas). The same ref always yields the same network.
# "toy:7:8" would cap it at 8 layers for a quick 64x64 preview.
model = instantiate_model("toy:7")
print(f"layers={model.layer_count} resolution={model.output_resolution}")

# per-layer resolutions double every other layer
for layer in range(1, model.layer_count + 1):
    print(f"  layer {layer}: {model.resolution(layer)}, "
          f"{model.channels(layer)} channels")

# one latent code per layer; a different seed is a different scene
images = [model.synthesize(model.codes_from_seed(seed)) for seed in (1, 2, 3)]
save_image_png(tile_row(images), out_dir / "synthesize.png")
print(f"wrote {out_dir / 'synthesize.png'}")
