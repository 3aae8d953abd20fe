"""render_figures <run-dir> --figures fig3,fig5 [--out DIR]"""

from __future__ import annotations

from pathlib import Path

import click

from .render import FIGURES, FigureError, render_all


@click.command()
@click.argument("run_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--figures", "figure_list", default=",".join(sorted(FIGURES)),
              show_default=True,
              help="Comma-separated figure ids to render.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False),
              default=None,
              help="Output directory (defaults to the run directory).")
def main(run_dir, figure_list, out_dir):
    """Render figure analogues (PNG + SVG) from a simulator run directory."""
    ids = [f.strip() for f in figure_list.split(",") if f.strip()]
    out = Path(out_dir) if out_dir else Path(run_dir)
    try:
        written = render_all(ids, Path(run_dir), out)
    except FigureError as exc:
        raise click.ClickException(str(exc))
    for p in written:
        click.echo(f"wrote {p}")


if __name__ == "__main__":
    main()
