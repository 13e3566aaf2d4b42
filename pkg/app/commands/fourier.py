from numbers import Real

import click
import pandas as pd
from joblib import Parallel, delayed

from app.commands.common import EXIT_PASS, common_options, finish, make_invocation
from app.config import settings
from app.spectral.claims import EMPIRICAL, claim, fourier_claim
from app.spectral.measures import fourier_stieltjes, wiener_atom_index
from app.spectral.operators import CyclicUnitary, cyclic_components
from app.storage import read_json_argument
from app.validation import LabError


@click.command("fourier")
@common_options
@click.option("--xi", "xi_list", default=None, help="Frequencies: JSON list or a file.")
@click.option("--component", type=int, default=0, show_default=True, help="Direct summand to read the measure from.")
@click.option("--wiener", "wiener_terms", type=int, default=None, help="Also report the Wiener index over N terms.")
def command(model_path, out_dir, tol, seq, frame, fmt, xi_list, component, wiener_terms):
    """Fourier-Stieltjes coefficients of a spectral measure with their bounds"""
    invocation = make_invocation("fourier", model_path, out_dir, tol, seq, frame, fmt)
    components = dict(cyclic_components(invocation.require_model()))
    model = components.get(component)
    if not isinstance(model, CyclicUnitary):
        raise LabError(f"component {component} is not a cyclic unitary")

    if xi_list is not None:
        frequencies = read_json_argument(xi_list, "--xi")
        if not isinstance(frequencies, list) or not all(isinstance(v, Real) for v in frequencies):
            raise LabError("--xi must be a list of numbers")
    elif invocation.sequence is not None:
        frequencies = invocation.sequence.terms()
    else:
        raise LabError("fourier needs --xi or --seq")

    values = Parallel(n_jobs=settings.n_jobs)(
        delayed(fourier_stieltjes)(model.measure, xi, invocation.tol) for xi in frequencies)

    report = {
        "model": model.describe(),
        "parameters": {"component": component, "frequencies": list(frequencies)},
        "values": [fourier_claim(v) for v in values],
    }
    if wiener_terms is not None:
        index = wiener_atom_index(model.measure, wiener_terms)
        report["wiener_index"] = claim(index, None, EMPIRICAL)
        report["parameters"]["wiener_terms"] = wiener_terms
    table = pd.DataFrame({
        "xi": list(frequencies),
        "re": [v.value.real for v in values],
        "im": [v.value.imag for v in values],
        "bound": [v.error_bound for v in values],
    })
    invocation.emit(report, {"values": table})
    finish(EXIT_PASS)
