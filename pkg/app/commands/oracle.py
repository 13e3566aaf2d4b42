import logging

import click
import pandas as pd

from app.commands.common import EXIT_PASS, common_options, finish, make_invocation
from app.spectral.claims import EMPIRICAL, claim
from app.spectral.finite_oracle import DECAY_STEPS, analyze_batch, sample_limit_operators
from app.spectral.operators import FiniteContraction, cyclic_components
from app.validation import LabError

logger = logging.getLogger(__name__)

# coverage grids have grid_points ** rank points
MAX_COVERAGE_RANK = 3


@click.command("oracle")
@common_options
@click.option("--budget", type=int, default=64, show_default=True, help="Largest power visited by the sampler.")
@click.option("--threshold", type=float, default=0.1, show_default=True, help="Birch cluster radius.")
@click.option("--steps", type=int, default=DECAY_STEPS, show_default=True, help="Power used by the decay oracle.")
def command(model_path, out_dir, tol, seq, frame, fmt, budget, threshold, steps):
    """Unitary part, splitting and limit-operator samples of finite contractions"""
    invocation = make_invocation("oracle", model_path, out_dir, tol, seq, frame, fmt)
    model = invocation.require_model()
    components = cyclic_components(model)
    if not all(isinstance(c, FiniteContraction) for _, c in components):
        raise LabError("oracle needs a finite model or a direct sum of finite models")

    splittings = analyze_batch([c.matrix for _, c in components], steps=steps)
    entries, rows = [], []
    for (index, _), splitting in zip(components, splittings):
        entry = {"component": index, **splitting.to_report()}
        analysis = splitting.analysis
        if analysis.unitary_rank and analysis.unitary_defect <= analysis.rank_tol:
            sample = sample_limit_operators(analysis.restriction(), budget, threshold)
            entry["limit_sample"] = sample.to_report()
            if analysis.unitary_rank <= MAX_COVERAGE_RANK:
                entry["limit_sample"]["coverage"] = claim(sample.coverage(), None, EMPIRICAL)
        elif analysis.unitary_rank:
            logger.warning("component %d: unitary restriction too far from unitary to sample", index)
        entries.append(entry)
        rows.append({"component": index, "dimension": analysis.dimension, "unitary_rank": analysis.unitary_rank,
                     "flight_rank": splitting.flight_basis.shape[1], "decay": splitting.decay})

    report = {
        "parameters": {"budget": budget, "threshold": threshold, "steps": steps},
        "components": entries,
    }
    invocation.emit(report, {"summary": pd.DataFrame(rows)})
    finish(EXIT_PASS)
