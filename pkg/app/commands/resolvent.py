import click

from app.commands.common import EXIT_FAILURE, EXIT_PASS, common_options, finish, make_invocation
from app.spectral.cayley import (
    cogenerator_from_line,
    generator_difference_quotient,
    pushforward_to_line,
    resolvent_two_ways,
)
from app.spectral.claims import CERTIFIED, EMPIRICAL, claim, fourier_claim
from app.spectral.operators import CyclicUnitary, SparseVector, component_vector, cyclic_components
from app.storage import read_json_argument
from app.validation import LabError


@click.command("resolvent")
@common_options
@click.option("--component", type=int, default=0, show_default=True, help="Direct summand to work on.")
@click.option("--times", default="[0.1, 0.01, 0.001]", show_default=True,
              help="Strictly decreasing t values for the generator quotients (JSON list).")
def command(model_path, out_dir, tol, seq, frame, fmt, component, times):
    """Resolvent spectrally and as a Laplace transform, plus generator difference quotients"""
    invocation = make_invocation("resolvent", model_path, out_dir, tol, seq, frame, fmt)
    model = invocation.require_model()
    part = dict(cyclic_components(model)).get(component)
    if not isinstance(part, CyclicUnitary):
        raise LabError(f"component {component} is not a cyclic unitary")
    vectors = [component_vector(model, v, component) for v in invocation.frame or []]
    x = vectors[0] if vectors else SparseVector.basis(0)
    y = vectors[1] if len(vectors) > 1 else x
    tol = invocation.tol

    comparison = resolvent_two_ways(part, x, y, tol)
    allowed = comparison.spectral.error_bound + comparison.laplace.error_bound + tol
    quotients = generator_difference_quotient(part, x, y, read_json_argument(times, "--times"), tol)
    line = pushforward_to_line(part.group_measure)

    report = {
        "model": part.describe(),
        "parameters": {"component": component, "times": list(quotients.times)},
        "resolvent": {
            "spectral": fourier_claim(comparison.spectral),
            "laplace": fourier_claim(comparison.laplace),
            "discrepancy": claim(comparison.discrepancy, allowed, CERTIFIED),
            "horizon": claim(comparison.horizon, None, EMPIRICAL),
            "simpson_points": comparison.simpson_points,
        },
        "generator": {
            "target": fourier_claim(quotients.target),
            "quotients": [fourier_claim(q) for q in quotients.quotients],
            "errors": [claim(e, None, EMPIRICAL) for e in quotients.errors],
        },
        "pole_mass": claim(line.pole_mass, None, EMPIRICAL),
        "cogenerator_atoms": [{"point": claim(point, None, EMPIRICAL), "mass": claim(w, 0.0, CERTIFIED)}
                              for point, w in cogenerator_from_line(line)],
    }
    invocation.emit(report)
    if comparison.discrepancy > allowed:
        click.echo(f"certified assertion failed: resolvent discrepancy {comparison.discrepancy:.3e} "
                   f"exceeds {allowed:.3e}", err=True)
        finish(EXIT_FAILURE)
    finish(EXIT_PASS)
