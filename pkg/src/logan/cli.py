"""Command-line entry points: run scripts, regenerate figures, serve HTTP.

Exit codes: 0 success, 2 script parse error, 3 execution error.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .bank import load_bank
from .composer import EditPlan, execute_plan, parse_edit_script
from .errors import LoganError, ScriptParseError
from .imaging import save_image_png
from .model import instantiate_model

EXIT_PARSE = 2
EXIT_EXECUTION = 3

_FORCEABLE_OPS = {"remove", "insert", "shift", "rotate", "clear_room"}


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _parse_layer_list(_ctx, _param, value):
    if value is None:
        return None
    try:
        layers = [int(part) for part in value.split(",") if part.strip()]
    except ValueError:
        raise click.BadParameter("expected comma-separated integers")
    if not layers or any(layer < 1 for layer in layers):
        raise click.BadParameter("layers must be positive integers")
    return layers


def _force_layer(plan: EditPlan, layer: int) -> EditPlan:
    """Override the layer of every single-layer content op."""
    edits = []
    for edit in plan.edits:
        edit = dict(edit)
        if edit["op"] in _FORCEABLE_OPS:
            edit["layer"] = layer
        edits.append(edit)
    return EditPlan(base=plan.base, edits=edits, segmentation=plan.segmentation)


@click.group()
def main() -> None:
    """Local image editing over a layer-wise generator."""


@main.command()
@click.argument("script", type=click.Path(path_type=Path))
@click.option("--model", "model_ref", default="toy:0", show_default=True,
              help="Model ref: toy:<seed>[:<layers>] or a manifest path.")
@click.option("--bank", "bank_path", type=click.Path(path_type=Path),
              default=None, help="Object bank directory.")
@click.option("--out", "out_path", type=click.Path(path_type=Path),
              default=Path("out.png"), show_default=True)
@click.option("--dump-layers", callback=_parse_layer_list, default=None,
              help="Comma-separated layers; re-run the script once per "
                   "layer with content ops forced to it.")
@click.option("--seed", type=int, default=None,
              help="Override the script's base seed.")
def run(script: Path, model_ref: str, bank_path: Path | None, out_path: Path,
        dump_layers: list[int] | None, seed: int | None) -> None:
    """Execute an edit script and write the rendered PNG."""
    try:
        text = script.read_bytes()
    except OSError as exc:
        _fail(EXIT_PARSE, f"cannot read script: {exc}")
    try:
        plan = parse_edit_script(text)
    except ScriptParseError as exc:
        _fail(EXIT_PARSE, f"script: {exc}")
    if seed is not None:
        plan = EditPlan(base={"seed": seed}, edits=plan.edits,
                        segmentation=plan.segmentation)

    try:
        model = instantiate_model(model_ref)
        bank = load_bank(bank_path) if bank_path is not None else None
        image, _ = execute_plan(model, plan, bank, base_dir=script.parent)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        save_image_png(image, out_path)
        click.echo(f"wrote {out_path}")
        for layer in dump_layers or []:
            forced, _ = execute_plan(model, _force_layer(plan, layer), bank,
                                     base_dir=script.parent)
            layer_path = out_path.with_name(
                f"{out_path.stem}_layer{layer:02d}{out_path.suffix}")
            save_image_png(forced, layer_path)
            click.echo(f"wrote {layer_path}")
    except LoganError as exc:
        _fail(EXIT_EXECUTION, str(exc))
    except OSError as exc:
        _fail(EXIT_EXECUTION, f"cannot write output: {exc}")


@main.command()
@click.argument("directory", type=click.Path(file_okay=False, path_type=Path))
@click.option("--model", "model_ref", default="toy:7", show_default=True)
@click.option("--seed", type=int, default=1, show_default=True,
              help="Base latent seed for the demo scene.")
def figures(directory: Path, model_ref: str, seed: int) -> None:
    """Regenerate the layer-sweep and workflow figure grids."""
    from .demo import write_figures

    try:
        for path in write_figures(directory, model_ref, seed):
            click.echo(f"wrote {path}")
    except LoganError as exc:
        _fail(EXIT_EXECUTION, str(exc))
    except OSError as exc:
        _fail(EXIT_EXECUTION, f"cannot write figures: {exc}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--model", "model_refs", multiple=True, default=("toy:7",),
              show_default=True,
              help="Model ref to register; repeatable.")
@click.option("--bank", "bank_path", type=click.Path(path_type=Path),
              default=None, help="Object bank directory to expose read-only.")
@click.option("--max-sessions", default=16, show_default=True)
def serve(host: str, port: int, model_refs: tuple[str, ...],
          bank_path: Path | None, max_sessions: int) -> None:
    """Run the HTTP editing service."""
    import uvicorn

    from .service import create_app

    try:
        models = {ref: instantiate_model(ref) for ref in model_refs}
        bank = load_bank(bank_path) if bank_path is not None else None
    except LoganError as exc:
        _fail(EXIT_EXECUTION, str(exc))
    app = create_app(models, bank=bank, max_sessions=max_sessions)
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
