"""
The entanglement pipeline on a singular cyclic unitary summed with the shift.

Discrete-side certified claims are re-verified here and any failure turns into exit code 1 with the
failed bound on stderr; continuous-side evidence is recorded as it is tagged.
"""
import logging
from dataclasses import replace
from typing import Dict, List, Optional

import click

from app.commands.common import (
    DATA_DIR,
    EXIT_FAILURE,
    EXIT_PASS,
    EXIT_UNDETERMINED,
    common_options,
    finish,
    make_invocation,
)
from app.config import settings
from app.spectral.algebra import UNDETERMINED, entanglement_check
from app.spectral.cayley import resolvent_two_ways
from app.spectral.claims import CERTIFIED, EMPIRICAL, claim, fourier_claim
from app.spectral.dynamics import (
    H_M,
    PoissonRecurrence,
    Policy,
    ScalarLimit,
    SequenceSpec,
    limit_cycle_check,
    limit_operator_estimate,
    trajectory,
)
from app.spectral.operators import CyclicUnitary, OperatorModel, SparseVector, cyclic_components

logger = logging.getLogger(__name__)

LIMIT_CYCLE_SHIFTS = (1, 2, 3)


def _natural_sequence(certificate) -> Optional[SequenceSpec]:
    if isinstance(certificate, (PoissonRecurrence, ScalarLimit)) and not certificate.sequence.is_continuous:
        return certificate.sequence
    return None


def _frame_vector(component: OperatorModel):
    return component.default_frame()[0] if not isinstance(component, CyclicUnitary) else SparseVector.basis(0)


def _orbit_report(component: CyclicUnitary, seq: SequenceSpec, tol: float, failures: List[str]) -> Dict:
    x = SparseVector.basis(0)
    values = trajectory(component, x, x, seq, tol)
    estimate = limit_operator_estimate(component, seq, None, tol)
    report = {
        "sequence": seq.describe(),
        "trajectory": [fourier_claim(v) for v in values],
        "limit_estimate": estimate.to_report(),
    }
    if estimate.tier == CERTIFIED and estimate.prediction_error > estimate.rate_bound + tol:
        failures.append(f"limit estimate misses its certified rate: {estimate.prediction_error:.3e} > "
                        f"{estimate.rate_bound:.3e}")
    if estimate.prediction is not None:
        cycle = limit_cycle_check(component, estimate, x, x, LIMIT_CYCLE_SHIFTS, tol)
        report["limit_cycle"] = cycle.to_report()
        if cycle.tier == CERTIFIED and not cycle.passed:
            failures.append("limit cycle check failed its certified bound")
    return report


@click.command("example56")
@common_options
@click.option("--resolvent-tol", type=float, default=1e-6, show_default=True,
              help="Tolerance of the resolvent comparison on H_m components.")
@click.option("--window", type=click.IntRange(min=1), default=None,
              help="Largest frame window of the limit-space witnesses (default LAB_WITNESS_MAX_WINDOW).")
@click.option("--scan-windows", type=(int, int), default=None,
              help="Dyadic exponent range of the continuous recurrence scan (default LAB_SCAN_WINDOWS).")
def command(model_path, out_dir, tol, seq, frame, fmt, resolvent_tol, window, scan_windows):
    """Splitting, limit operators and entanglement of a singular component summed with the shift"""
    invocation = make_invocation("example56", model_path, out_dir, tol, seq, frame, fmt,
                                 default_model=DATA_DIR / "example56.json")
    model = invocation.require_model()
    grid = None
    if invocation.sequence is not None and invocation.sequence.is_continuous:
        grid = tuple(invocation.sequence.terms())
    policy = Policy(continuous_grid=grid)
    if scan_windows is not None:
        policy = replace(policy, scan_windows=tuple(scan_windows))
    window = window if window is not None else settings.witness_max_window
    tol = invocation.tol

    verdict = entanglement_check(model, policy, tol, window)
    failures: List[str] = []
    components = []
    resolvents = []
    for index, component in cyclic_components(model):
        classification = verdict.discrete.classifications[index]
        entry = {"component": index, "kind": component.kind, "label": classification.label}
        certificate = classification.certificate
        if certificate.tier == CERTIFIED and not certificate.verify(component, _frame_vector(component), tol):
            failures.append(f"component {index}: {certificate.kind} certificate failed re-verification")
        sequence = _natural_sequence(certificate)
        if isinstance(component, CyclicUnitary) and sequence is not None:
            entry.update(_orbit_report(component, sequence, tol, failures))
        components.append(entry)

        # the Laplace side needs a group measure whose mass stays away from the pole
        recurrent_both = classification.label == verdict.continuous.labels[index] == H_M
        if recurrent_both and isinstance(component, CyclicUnitary):
            x = SparseVector.basis(0)
            comparison = resolvent_two_ways(component, x, x, resolvent_tol)
            allowed = comparison.spectral.error_bound + comparison.laplace.error_bound + resolvent_tol
            resolvents.append({
                "component": index,
                "spectral": fourier_claim(comparison.spectral),
                "laplace": fourier_claim(comparison.laplace),
                "discrepancy": claim(comparison.discrepancy, allowed, CERTIFIED),
                "horizon": claim(comparison.horizon, None, EMPIRICAL),
                "simpson_points": comparison.simpson_points,
            })
            if comparison.discrepancy > allowed:
                failures.append(f"component {index}: resolvent discrepancy {comparison.discrepancy:.3e} "
                                f"exceeds {allowed:.3e}")

    report = {
        "model": model.describe(),
        "policy": policy.describe(),
        "parameters": {"resolvent_tol": resolvent_tol, "window": window},
        "h_m": verdict.discrete.h_m,
        "h_w": verdict.discrete.h_w,
        "components": components,
        "entanglement": verdict.to_report(),
        "resolvent": resolvents,
        "failures": failures,
    }
    invocation.emit(report, {"discrete_labels": verdict.discrete.to_frame(),
                             "continuous_labels": verdict.continuous.to_frame()})
    if failures:
        for failure in failures:
            click.echo(f"certified assertion failed: {failure}", err=True)
        finish(EXIT_FAILURE)
    if verdict.verdict == UNDETERMINED:
        finish(EXIT_UNDETERMINED)
    finish(EXIT_PASS)
