from pathlib import Path

import click

from app.commands.common import EXIT_FAILURE, EXIT_PASS, finish
from app.storage import lint_files


@click.command("lint")
@click.argument("paths", nargs=-1, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--out", "out_dir", type=click.Path(file_okay=False, path_type=Path), default=Path("reports"),
              show_default=True, help="Report directory to scan for *.json.")
def command(paths, out_dir):
    """Check that every reported float is a claim with a bound or an input echo"""
    files = list(paths) or sorted(out_dir.glob("*.json"))
    if not files:
        click.echo(f"no reports found in {out_dir}", err=True)
        finish(EXIT_FAILURE)
    problems = 0
    for name, found in lint_files(files).items():
        for location, message in found:
            click.echo(f"{name}: {location}: {message}")
        problems += len(found)
    click.echo(f"{len(files)} report(s) checked, {problems} problem(s)")
    finish(EXIT_FAILURE if problems else EXIT_PASS)
