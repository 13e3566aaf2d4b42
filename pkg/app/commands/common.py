"""
Options and output plumbing shared by the lab subcommands
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional

import click
import pandas as pd
from pydantic import ValidationError

from app.config import settings
from app.models.schemas import ExperimentConfig
from app.spectral.dynamics import SequenceSpec
from app.spectral.operators import OperatorModel, VectorRep
from app.storage import load_model, parse_frame, read_json_argument, schema_error, write_report, write_table
from app.validation import LabError

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_FAILURE = 1
EXIT_UNDETERMINED = 2

DATA_DIR = Path(__file__).resolve().parents[2] / "data"


def common_options(command):
    """--model --out --tol --seq --frame --format, in that order"""
    options = [
        click.option("--model", "model_path", type=click.Path(dir_okay=False, path_type=Path), default=None,
                     help="Model file (JSON)."),
        click.option("--out", "out_dir", type=click.Path(file_okay=False, path_type=Path),
                     default=Path("reports"), show_default=True, help="Report directory."),
        click.option("--tol", type=float, default=None, help="Tolerance override."),
        click.option("--seq", default=None, help="Sequence: inline JSON or a file."),
        click.option("--frame", default=None, help="Frame vectors: inline JSON or a file."),
        click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True,
                     help="csv also writes plot-ready tables next to the JSON report."),
    ]
    for option in reversed(options):
        command = option(command)
    return command


@dataclass
class Invocation:
    config: ExperimentConfig
    model: Optional[OperatorModel]
    sequence: Optional[SequenceSpec]
    frame: Optional[List[VectorRep]]

    @property
    def tol(self) -> float:
        return self.config.tol if self.config.tol is not None else settings.default_tol

    def require_model(self) -> OperatorModel:
        if self.model is None:
            raise LabError(f"{self.config.experiment} needs --model")
        return self.model

    def emit(self, report: Dict, tables: Optional[Dict[str, pd.DataFrame]] = None) -> None:
        name = self.config.experiment
        report = dict(report)
        report["experiment"] = name
        report.setdefault("parameters", {})["tol"] = self.tol
        write_report(report, self.config.out_dir, name)
        if "csv" in self.config.formats:
            for table_name, frame in (tables or {}).items():
                write_table(frame, self.config.out_dir, f"{name}_{table_name}")


def make_invocation(experiment: str, model_path: Optional[Path], out_dir: Path, tol: Optional[float],
                    seq: Optional[str], frame: Optional[str], fmt: str,
                    default_model: Optional[Path] = None) -> Invocation:
    """Validate the common options and load what they point at"""
    raw_sequence = read_json_argument(seq, "--seq") if seq else None
    raw_frame = read_json_argument(frame, "--frame") if frame else None
    formats = ("json", "csv") if fmt == "csv" else ("json",)
    try:
        config = ExperimentConfig(experiment=experiment, model_path=model_path or default_model, out_dir=out_dir,
                                  tol=tol, sequence=raw_sequence, frame=raw_frame, formats=formats)
    except ValidationError as exc:
        raise schema_error(exc, experiment) from exc
    model = load_model(config.model_path) if config.model_path else None
    sequence = config.sequence.build() if config.sequence else None
    vectors = None
    if config.frame is not None:
        if model is None:
            raise LabError("--frame needs --model")
        vectors = parse_frame(model, config.frame)
    logger.debug("%s: model %s, tol %.3e", experiment, config.model_path, config.tol or settings.default_tol)
    return Invocation(config, model, sequence, vectors)


def finish(code: int) -> None:
    click.get_current_context().exit(code)
