"""Action of the matrix logarithm on a vector by Newton-Leja interpolation.

The degree-m interpolant is accumulated incrementally:

    w_0 = v,  P_0 = d_0 w_0,
    w_{m+1} = ((Q - c I)/gamma - xi_m I) w_m,
    P_{m+1} = P_m + d_{m+1} w_{m+1},

one sparse product per accepted degree.  The recurrence runs in the
xi-coordinates of the map (dividing out gamma each step), which pairs with
the coefficients produced by the divided-difference module and keeps the
iterate norms from over- or underflowing.  The a-posteriori indicator
e_m = |d_m| * ||w_m||_2 estimates the next correction and drives the stop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .divdiff import DividedDiffs
from .sparse import SparseMatrixCSR
from .spectral import MapParams

__all__ = ["ActionResult", "log_matvec"]


@dataclass
class ActionResult:
    """Interpolant value P_m(Q) v with convergence diagnostics."""

    vector: np.ndarray = field(repr=False)
    degree_used: int
    error_estimate: float
    matvecs: int
    converged: bool
    error_history: np.ndarray = field(repr=False, default=None)


def log_matvec(Q: SparseMatrixCSR, v: np.ndarray, mp: MapParams,
               dd: DividedDiffs | None, tol: float | None = None,
               max_degree: int = 400) -> ActionResult:
    """Approximate log(Q) v to the requested tolerance.

    ``dd`` must hold divided differences computed for the same map
    parameters.  ``tol`` is the absolute stopping threshold for
    e_m = |d_m| * ||w_m||; the default is 1e-7 * ||v||_2.  If the map is
    degenerate (gamma = 0, the enclosure is a single point c) the result is
    log(c) * v at degree zero and ``dd`` is not consulted.

    A result with ``converged=False`` means ``max_degree`` (or the end of
    the coefficient sequence) was hit first; the caller decides whether the
    reached ``error_estimate`` is acceptable.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (Q.n,):
        raise ValueError(f"vector has shape {v.shape}, expected ({Q.n},)")
    if tol is None:
        tol = 1e-7 * float(np.linalg.norm(v))
    if mp.degenerate:
        out = math.log(mp.c) * v
        return ActionResult(vector=out, degree_used=0, error_estimate=0.0,
                            matvecs=0, converged=True,
                            error_history=np.zeros(1))
    if dd is None:
        raise ValueError("divided differences are required for a non-degenerate map")
    if dd.map_params != mp:
        raise ValueError("divided differences were computed for different map parameters")

    m_sp = Q.to_scipy()
    coeffs = dd.coeffs
    xi = dd.nodes
    cap = min(max_degree, coeffs.shape[0] - 1)
    inv_gamma = 1.0 / mp.gamma

    w = v.copy()
    p = coeffs[0] * w
    m = 0
    err = abs(coeffs[0]) * float(np.linalg.norm(w))
    history = [err]
    converged = True
    while err > tol:
        if m >= cap:
            converged = False
            break
        w = (m_sp @ w - mp.c * w) * inv_gamma - xi[m] * w
        m += 1
        p += coeffs[m] * w
        err = abs(coeffs[m]) * float(np.linalg.norm(w))
        history.append(err)
        if not np.isfinite(err):
            raise FloatingPointError(f"non-finite iterate at degree {m}")
    return ActionResult(vector=p, degree_used=m, error_estimate=err,
                        matvecs=m, converged=converged,
                        error_history=np.asarray(history))
