import logging

import click
from dotenv import load_dotenv

from app import __version__
from app.commands import classify, example56, fourier, lint, oracle, resolvent, wander
from app.commands.common import EXIT_FAILURE
from app.config import settings
from app.validation import LabError

load_dotenv()


class LabGroup(click.Group):
    """Maps laboratory errors to exit code 1 with the message on stderr"""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except LabError as exc:
            click.echo(f"error: {exc}", err=True)
            ctx.exit(EXIT_FAILURE)


@click.group(cls=LabGroup)
@click.version_option(__version__, prog_name="lab")
@click.option("--verbose", "-v", is_flag=True, help="Log at DEBUG level.")
def lab(verbose):
    """Spectral limit laboratory"""
    logging.basicConfig(
        level=logging.DEBUG if verbose else settings.log_level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


# Register subcommands
lab.add_command(fourier.command)
lab.add_command(classify.command)
lab.add_command(example56.command)
lab.add_command(oracle.command)
lab.add_command(wander.command)
lab.add_command(resolvent.command)
lab.add_command(lint.command)

if __name__ == "__main__":
    lab()
