"""JSON serialization and deserialization of problem files."""
from __future__ import annotations

import json
import logging
import os
from typing import Any

import numpy as np
from pydantic import ValidationError

from physbound.errors import FactorizationError, ProblemFileError
from physbound.problem.factorization import factor_term, reconstruction_error
from physbound.problem.models import (
    Domain,
    FactoredTerm,
    FloatArray,
    PhysicsProblem,
    ProblemInstance,
    QuadraticObjective,
)
from physbound.problem.schema import (
    SCHEMA_VERSION,
    DenseTermDoc,
    ProblemDocument,
    SparseMatrix,
)
from physbound.util.paths import atomic_write_text

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Parse
# ---------------------------------------------------------------------------

def _location(err: dict[str, Any]) -> str:
    loc = ".".join(str(part) for part in err.get("loc", ()))
    return loc or "document"


def _dense(a0: list[list[float]] | SparseMatrix) -> FloatArray:
    if isinstance(a0, SparseMatrix):
        out = np.zeros(a0.shape)
        for i, j, x in a0.triplets:
            out[i, j] += x
        return out
    return np.array(a0, dtype=np.float64)


def _matrix(rows: list[list[float]], ncols: int) -> FloatArray:
    return np.array(rows, dtype=np.float64).reshape(len(rows), ncols)


def document_to_instance(doc: ProblemDocument) -> ProblemInstance:
    """Build the problem, factoring dense terms and recording their error."""
    terms: list[FactoredTerm] = []
    reconstruction: list[float | None] = []
    sources: list[FloatArray | None] = []
    for i, term in enumerate(doc.terms):
        if isinstance(term, DenseTermDoc):
            a = _matrix(term.a, doc.dims.n)
            try:
                factored = factor_term(a)
            except FactorizationError as e:
                raise ProblemFileError(str(e), location=f"terms.{i}.a") from e
            err = reconstruction_error(factored, a)
            logger.debug("terms.%d: factored at rank %d, error %.3e", i, factored.rank, err)
            terms.append(factored)
            reconstruction.append(err)
            sources.append(a)
        else:
            k = len(term.u[0]) if term.u else 0
            terms.append(FactoredTerm(u=_matrix(term.u, k), v=_matrix(term.v, k)))
            reconstruction.append(None)
            sources.append(None)

    n = doc.dims.n
    problem = PhysicsProblem(
        a0=_dense(doc.a0),
        terms=tuple(terms),
        b=np.array(doc.b, dtype=np.float64),
        domain=Domain(doc.domain),
    )
    objective = QuadraticObjective(
        qmat=_matrix(doc.objective.qmat, n),
        qvec=np.array(doc.objective.qvec, dtype=np.float64),
        r=doc.objective.r,
    )
    return ProblemInstance(
        problem=problem,
        objective=objective,
        reconstruction=tuple(reconstruction),
        dense_sources=tuple(sources),
    )


def parse_problem(text: str) -> ProblemInstance:
    """Parse a problem file; errors carry a line/column or field location."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ProblemFileError(e.msg, location=f"line {e.lineno}, column {e.colno}") from e
    try:
        doc = ProblemDocument.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        raise ProblemFileError(first["msg"], location=_location(first)) from e
    return document_to_instance(doc)


# ---------------------------------------------------------------------------
# Serialize
# ---------------------------------------------------------------------------

def _real(x: float, hexfloat: bool) -> float | str:
    return float(x).hex() if hexfloat else float(x)


def _vec(a: FloatArray, hexfloat: bool) -> list[float | str]:
    return [_real(x, hexfloat) for x in np.ravel(a)]


def _mat(a: FloatArray, hexfloat: bool) -> list[list[float | str]]:
    return [_vec(row, hexfloat) for row in np.atleast_2d(a)]


def instance_to_dict(instance: ProblemInstance, hexfloat: bool = False) -> dict[str, Any]:
    p, obj = instance.problem, instance.objective
    sources = instance.dense_sources or (None,) * p.d
    terms: list[dict[str, Any]] = []
    for term, source in zip(p.terms, sources):
        if source is not None:
            terms.append({"a": _mat(source, hexfloat)})
        else:
            terms.append({"u": _mat(term.u, hexfloat), "v": _mat(term.v, hexfloat)})
    return {
        "schema_version": SCHEMA_VERSION,
        "dims": {"m": p.m, "n": p.n, "d": p.d},
        "domain": p.domain.value,
        "hexfloat": hexfloat,
        "a0": _mat(p.a0, hexfloat),
        "terms": terms,
        "b": _vec(p.b, hexfloat),
        "objective": {
            "qmat": _mat(obj.qmat, hexfloat),
            "qvec": _vec(obj.qvec, hexfloat),
            "r": _real(obj.r, hexfloat),
        },
    }


def serialize_problem(instance: ProblemInstance, hexfloat: bool = False) -> str:
    return json.dumps(instance_to_dict(instance, hexfloat), indent=2) + "\n"


# ---------------------------------------------------------------------------
# File I/O
# ---------------------------------------------------------------------------

def save_problem(
    instance: ProblemInstance, file_path: str | os.PathLike[str], hexfloat: bool = False
) -> str:
    """Save a problem file atomically. Returns the path saved to."""
    return atomic_write_text(file_path, serialize_problem(instance, hexfloat))


def load_problem(file_path: str | os.PathLike[str]) -> ProblemInstance:
    """Load a problem file; I/O and decoding failures become ``ProblemFileError``."""
    try:
        with open(file_path, "r", encoding="utf-8") as f:
            text = f.read()
    except (OSError, UnicodeDecodeError) as e:
        raise ProblemFileError(str(e), location=os.fspath(file_path)) from e
    return parse_problem(text)
