"""
Pydantic schemas for model, sequence and frame files
"""
from pathlib import Path
from typing import Annotated, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.config import settings
from app.spectral.dynamics import SequenceSpec
from app.spectral.measures import (
    AtomicMeasure,
    CircleMeasure,
    ExponentRule,
    InfiniteConvolutionMeasure,
    LebesgueMeasure,
    MixtureMeasure,
    SelfSimilarMeasure,
    TrigDensityMeasure,
)
from app.spectral.operators import CyclicUnitary, DirectSum, FiniteContraction, OperatorModel, UnilateralShift

Complex = Tuple[float, float]


class _Schema(BaseModel):
    model_config = ConfigDict(extra="forbid")


class AtomicSchema(_Schema):
    kind: Literal["atomic"]
    # angles as floats or exact fractions such as "1/3"
    atoms: List[Tuple[Union[str, float], float]] = Field(min_length=1)

    def build(self) -> CircleMeasure:
        return AtomicMeasure(tuple((theta, w) for theta, w in self.atoms))


class LebesgueSchema(_Schema):
    kind: Literal["lebesgue"]

    def build(self) -> CircleMeasure:
        return LebesgueMeasure()


class TrigDensitySchema(_Schema):
    kind: Literal["trig_density"]
    coefficients: List[Complex] = Field(min_length=1)

    def build(self) -> CircleMeasure:
        return TrigDensityMeasure(tuple(complex(re, im) for re, im in self.coefficients))


class SelfSimilarSchema(_Schema):
    kind: Literal["self_similar"]
    base: int = Field(ge=2)
    digits: List[int]
    weights: List[float]

    def build(self) -> CircleMeasure:
        return SelfSimilarMeasure(self.base, tuple(self.digits), tuple(self.weights))


class ExponentRuleSchema(_Schema):
    form: Literal["power", "explicit"]
    base: Optional[int] = None
    values: List[int] = []

    def build(self) -> ExponentRule:
        return ExponentRule(self.form, self.base, tuple(self.values))


class InfiniteConvolutionSchema(_Schema):
    kind: Literal["infinite_convolution"]
    base: int = Field(ge=2)
    exponents: ExponentRuleSchema
    j_max: int = Field(default_factory=lambda: settings.j_max, ge=1)

    def build(self) -> CircleMeasure:
        return InfiniteConvolutionMeasure(self.base, self.exponents.build(), self.j_max)


class MixtureSchema(_Schema):
    kind: Literal["mixture"]
    components: List[Tuple["MeasureSchema", float]] = Field(min_length=1)

    def build(self) -> CircleMeasure:
        return MixtureMeasure(tuple((m.build(), w) for m, w in self.components))


MeasureSchema = Annotated[
    Union[AtomicSchema, LebesgueSchema, TrigDensitySchema, SelfSimilarSchema,
          InfiniteConvolutionSchema, MixtureSchema],
    Field(discriminator="kind"),
]


class CyclicUnitarySchema(_Schema):
    kind: Literal["cyclic_unitary"]
    measure: MeasureSchema
    synthetic_group_measure: Optional[MeasureSchema] = None

    def build(self) -> OperatorModel:
        synthetic = self.synthetic_group_measure.build() if self.synthetic_group_measure else None
        return CyclicUnitary(self.measure.build(), synthetic)


class ShiftSchema(_Schema):
    kind: Literal["shift"]
    truncation: int = Field(16, ge=1)

    def build(self) -> OperatorModel:
        return UnilateralShift(self.truncation)


class FiniteSchema(_Schema):
    kind: Literal["finite"]
    matrix: List[List[Complex]] = Field(min_length=1)

    @field_validator("matrix")
    @classmethod
    def square(cls, rows):
        if any(len(row) != len(rows) for row in rows):
            raise ValueError("matrix must be square")
        return rows

    def build(self) -> OperatorModel:
        return FiniteContraction(np.array([[complex(re, im) for re, im in row] for row in self.matrix]))


class DirectSumSchema(_Schema):
    kind: Literal["direct_sum"]
    components: List["ModelSchema"] = Field(min_length=1)

    def build(self) -> OperatorModel:
        return DirectSum(tuple(c.build() for c in self.components))


ModelSchema = Annotated[
    Union[CyclicUnitarySchema, ShiftSchema, FiniteSchema, DirectSumSchema],
    Field(discriminator="kind"),
]

MixtureSchema.model_rebuild()
DirectSumSchema.model_rebuild()


class SequenceSchema(_Schema):
    form: Literal["powers", "tower", "arithmetic", "explicit", "grid"]
    length: int = Field(1, ge=1)
    base: Optional[int] = None
    exponents: Optional[ExponentRuleSchema] = None
    start: int = 1
    step: int = 1
    values: List[Union[int, float]] = []

    def build(self) -> SequenceSpec:
        rule = self.exponents.build() if self.exponents else None
        values = tuple(self.values) if self.form == "grid" else tuple(int(v) for v in self.values)
        return SequenceSpec(self.form, self.length, self.base, rule, self.start, self.step, values)


class ExperimentConfig(_Schema):
    """One CLI invocation: inputs, tolerances and where the reports go"""
    experiment: str
    model_path: Optional[Path] = None
    out_dir: Path
    tol: Optional[float] = Field(None, gt=0)
    sequence: Optional[SequenceSchema] = None
    frame: Optional[list] = None
    formats: Tuple[str, ...] = ("json",)

    @field_validator("model_path")
    @classmethod
    def model_exists(cls, path):
        if path is not None and not path.is_file():
            raise ValueError(f"model file {path} does not exist")
        return path

    @field_validator("formats")
    @classmethod
    def known_formats(cls, formats):
        unknown = set(formats) - {"json", "csv"}
        if unknown:
            raise ValueError(f"unknown output formats {sorted(unknown)}")
        return formats
