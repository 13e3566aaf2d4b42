import click

from app.commands.common import EXIT_PASS, EXIT_UNDETERMINED, common_options, finish, make_invocation
from app.spectral.dynamics import WeaklyWandering, weakly_wandering_search


@click.command("wander")
@common_options
@click.option("-m", "m", type=int, default=4, show_default=True, help="Number of indices to find.")
@click.option("--epsilon", type=float, default=0.1, show_default=True, help="Largest allowed pairing.")
@click.option("--n-max", type=int, default=4096, show_default=True, help="Largest index searched.")
def command(model_path, out_dir, tol, seq, frame, fmt, m, epsilon, n_max):
    """Weakly wandering indices for the first frame vector; exits 2 when none are found"""
    invocation = make_invocation("wander", model_path, out_dir, tol, seq, frame, fmt)
    model = invocation.require_model()
    x = invocation.frame[0] if invocation.frame else model.default_frame()[0]
    result = weakly_wandering_search(model, x, m, epsilon, n_max, invocation.tol)
    report = {
        "model": model.describe(),
        "parameters": {"m": m, "epsilon": epsilon, "n_max": n_max},
        "result": result.to_report(),
    }
    invocation.emit(report)
    finish(EXIT_PASS if isinstance(result, WeaklyWandering) else EXIT_UNDETERMINED)
