import logging

import click

from app.commands.common import EXIT_PASS, EXIT_UNDETERMINED, common_options, finish, make_invocation
from app.spectral.algebra import flight_decomposition, projection_P_m, recurrent_spanning_set, split_model
from app.spectral.claims import fourier_claim
from app.spectral.dynamics import Policy

logger = logging.getLogger(__name__)


@click.command("classify")
@common_options
@click.option("--side", type=click.Choice(["discrete", "continuous"]), default="discrete", show_default=True,
              help="Cogenerator powers or the unitary group.")
def command(model_path, out_dir, tol, seq, frame, fmt, side):
    """Split every direct summand into H_m and H_w; exits 2 when a label is unknown"""
    invocation = make_invocation("classify", model_path, out_dir, tol, seq, frame, fmt)
    model = invocation.require_model()
    policy = Policy(tol=invocation.config.tol) if invocation.config.tol else Policy()
    splitting = split_model(model, policy, side)

    report = {
        "model": model.describe(),
        "policy": policy.describe(),
        "splitting": splitting.to_report(),
    }
    if not splitting.unknown:
        report["recurrent_spanning_set"] = len(recurrent_spanning_set(model, splitting))
    if invocation.frame:
        decompositions = []
        for x in invocation.frame:
            x_m, x_w = projection_P_m(model, splitting, x)
            entry = {
                "norm_squared_m": fourier_claim(model.inner_product(x_m, x_m, invocation.tol)),
                "norm_squared_w": fourier_claim(model.inner_product(x_w, x_w, invocation.tol)),
            }
            if side == "discrete":
                entry["flight"] = flight_decomposition(model, splitting, x).to_report()
            decompositions.append(entry)
        report["decompositions"] = decompositions

    invocation.emit(report, {"labels": splitting.to_frame()})
    if splitting.unknown:
        logger.warning("unknown labels on components %s", splitting.unknown)
        finish(EXIT_UNDETERMINED)
    finish(EXIT_PASS)
