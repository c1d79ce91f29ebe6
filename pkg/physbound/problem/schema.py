"""On-disk schema of problem files (JSON, ``schema_version`` "1").

    {
      "schema_version": "1",
      "dims": {"m": 2, "n": 2, "d": 1},
      "domain": "interval",            # or "boolean"
      "hexfloat": false,
      "a0": [[...], ...],              # or {"shape": [m, n], "triplets": [[i, j, x], ...]}
      "terms": [{"u": [[...]], "v": [[...]]}, {"a": [[...]]}],
      "b": [...],
      "objective": {"qmat": [[...]], "qvec": [...], "r": 0.0}
    }

Every real may be a JSON number or a hex-float string such as "0x1.8p+0".
"""
from __future__ import annotations

import math
from typing import Annotated, Literal, Union

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, model_validator

SCHEMA_VERSION = "1"


def _real(value: object) -> float:
    if isinstance(value, bool):
        raise ValueError("expected a real number, got a boolean")
    if isinstance(value, str):
        try:
            x = float.fromhex(value)
        except ValueError:
            raise ValueError(f"not a hex float: {value!r}") from None
    elif isinstance(value, (int, float)):
        x = float(value)
    else:
        raise ValueError(f"expected a real number, got {type(value).__name__}")
    if not math.isfinite(x):
        raise ValueError(f"non-finite value {x!r}")
    return x


Real = Annotated[float, BeforeValidator(_real)]
Matrix = list[list[Real]]


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid")


class Dims(_Model):
    m: int = Field(ge=1)
    n: int = Field(ge=1)
    d: int = Field(ge=1)


class SparseMatrix(_Model):
    shape: tuple[int, int]
    triplets: list[tuple[int, int, Real]] = Field(default_factory=list)

    @model_validator(mode="after")
    def _in_range(self) -> SparseMatrix:
        rows, cols = self.shape
        for k, (i, j, _) in enumerate(self.triplets):
            if not (0 <= i < rows and 0 <= j < cols):
                raise ValueError(f"triplet {k}: index ({i}, {j}) outside shape {self.shape}")
        return self


class FactoredTermDoc(_Model):
    u: Matrix
    v: Matrix


class DenseTermDoc(_Model):
    a: Matrix


TermDoc = Union[FactoredTermDoc, DenseTermDoc]


class ObjectiveDoc(_Model):
    qmat: Matrix
    qvec: list[Real]
    r: Real = 0.0


def _shape(rows: Matrix) -> tuple[int, int]:
    widths = {len(r) for r in rows}
    if len(widths) > 1:
        raise ValueError(f"ragged matrix with row lengths {sorted(widths)}")
    return len(rows), (widths.pop() if widths else 0)


class ProblemDocument(_Model):
    schema_version: Literal["1"]
    dims: Dims
    domain: Literal["interval", "boolean"] = "interval"
    hexfloat: bool = False
    a0: Union[Matrix, SparseMatrix]
    terms: list[TermDoc]
    b: list[Real]
    objective: ObjectiveDoc

    @model_validator(mode="after")
    def _check_dims(self) -> ProblemDocument:
        m, n, d = self.dims.m, self.dims.n, self.dims.d
        a0_shape = self.a0.shape if isinstance(self.a0, SparseMatrix) else _shape(self.a0)
        if tuple(a0_shape) != (m, n):
            raise ValueError(f"a0: shape {tuple(a0_shape)} does not match dims ({m}, {n})")
        if len(self.terms) != d:
            raise ValueError(f"terms: {len(self.terms)} entries, dims.d = {d}")
        for i, term in enumerate(self.terms):
            if isinstance(term, DenseTermDoc):
                if _shape(term.a) != (m, n):
                    raise ValueError(f"terms.{i}.a: shape {_shape(term.a)}, expected ({m}, {n})")
                continue
            (ur, uc), (vr, vc) = _shape(term.u), _shape(term.v)
            if ur != m or vr != n or uc != vc:
                raise ValueError(
                    f"terms.{i}: u is {ur}x{uc} and v is {vr}x{vc}; "
                    f"expected {m}xk and {n}xk"
                )
        if len(self.b) != m:
            raise ValueError(f"b: length {len(self.b)}, expected {m}")
        if _shape(self.objective.qmat) != (n, n) or len(self.objective.qvec) != n:
            raise ValueError(f"objective: qmat must be {n}x{n} and qvec length {n}")
        return self
