"""Collinearity characterization x = alpha y, |alpha| <= 1, with witnesses.

x = alpha y with -1 <= alpha <= 1 holds iff x^T N x <= y^T N y for every PSD
N. When it fails, a single N shows it: N = v v^T with
v = (y^T y) x - (x^T y) y if x and y are not collinear, N = I if |alpha| > 1.
For Boolean parameters (|alpha| = 1 required, N ranging over all symmetric
matrices) the extra witness for |alpha| < 1 is N = -I.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from physbound.config import DEFAULT_TOLERANCES
from physbound.errors import DimensionError
from physbound.problem.models import Domain, FloatArray


@dataclass(frozen=True)
class CollinearityCertificate:
    collinear: bool
    alpha: float | None = None
    witness: FloatArray | None = None

    @property
    def admissible(self) -> bool:
        """True iff the inequality holds for every N (no witness needed)."""
        return self.collinear and self.witness is None


def form_gap(n: FloatArray, x: FloatArray, y: FloatArray) -> float:
    """x^T N x - y^T N y; positive means N violates the inequality."""
    return float(x @ n @ x - y @ n @ y)


def collinearity_check(
    x: ArrayLike,
    y: ArrayLike,
    domain: Domain = Domain.INTERVAL,
    tol: float = DEFAULT_TOLERANCES.collinear,
) -> CollinearityCertificate:
    """Decide whether x = alpha y with an admissible alpha.

    Collinearity is tested on the sine of the angle between x and y,
    sin^2 = ||v||^2 / ((y^T y)^2 (x^T x)) <= tol^2, so scaling either
    vector never changes the verdict.
    """
    x = np.ravel(np.asarray(x, dtype=np.float64))
    y = np.ravel(np.asarray(y, dtype=np.float64))
    if x.shape != y.shape:
        raise DimensionError(f"x has length {x.size}, y has length {y.size}")
    k = x.size
    eye = np.eye(k)
    xx = float(x @ x)
    yy = float(y @ y)
    xy = float(x @ y)

    if yy == 0.0:
        if xx == 0.0:
            # x = 0 = alpha y for every alpha, both domains included
            return CollinearityCertificate(collinear=True, alpha=0.0)
        return CollinearityCertificate(collinear=False, witness=eye)

    # ||v||^2 = yy * ((y^T y)(x^T x) - (x^T y)^2), free of cancellation
    v = yy * x - xy * y
    vv = float(v @ v)
    if vv > tol * tol * xx * yy * yy:
        witness = np.outer(v, v) / vv
        return CollinearityCertificate(collinear=False, witness=witness)

    alpha = xy / yy
    if abs(alpha) > 1.0 + tol:
        return CollinearityCertificate(collinear=True, alpha=alpha, witness=eye)
    if domain is Domain.BOOLEAN and abs(alpha) < 1.0 - tol:
        return CollinearityCertificate(collinear=True, alpha=alpha, witness=-eye)
    return CollinearityCertificate(collinear=True, alpha=alpha)
