"""Entropic functionals in bits.

Every logarithm here is base 2, so entropies come out in bits and the
closed-form benchmark values elsewhere in the package are normalized to
one bit per maximally entangled qubit pair. Quantities that are provably
nonnegative are returned as computed; values that dip into (-1e-9, 0)
raise NegativeValueWarning instead of being clipped, so genuine
violations stay observable in tests.
"""

from __future__ import annotations

import math
import warnings

import numpy as np

from .matqi import (
    DensityMatrix,
    DomainError,
    ShapeError,
    herm_eig,
    partial_trace,
)

SUPPORT_RTOL = 1e-12
SUPPORT_MASS_TOL = 1e-10
TOL_NEG = 1e-9
_LN2 = math.log(2.0)


class NegativeValueWarning(UserWarning):
    """A provably nonnegative quantity came out slightly negative."""


def _flag_negative(name: str, value: float) -> float:
    if -TOL_NEG < value < 0.0:
        warnings.warn(f"{name} = {value:.3e} is slightly negative", NegativeValueWarning)
    return value


def _spectrum_entropy(w: np.ndarray) -> float:
    top = float(w.max(initial=0.0))
    keep = w > SUPPORT_RTOL * top
    lam = w[keep]
    return float(-(lam * np.log2(lam)).sum()) if lam.size else 0.0


def vn_entropy(rho: DensityMatrix) -> float:
    """Von Neumann entropy in bits, between 0 and log2(dim)."""
    w = np.linalg.eigvalsh(rho.mat)
    return _flag_negative("vn_entropy", _spectrum_entropy(w))


def qrel_entropy(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Quantum relative entropy D(rho || sigma) in bits.

    Evaluated in sigma's eigenbasis: tr(rho log rho) minus the overlap
    of rho's diagonal with log of sigma's spectrum. Returns +inf when
    rho carries weight on sigma's null space, decided by eigenvector
    overlap against a cutoff relative to sigma's largest eigenvalue.
    """
    if rho.dim != sigma.dim:
        raise ShapeError(f"dimension mismatch: {rho.dim} vs {sigma.dim}")
    s, v = herm_eig(sigma.mat)
    cutoff = SUPPORT_RTOL * max(float(s[0]), 0.0)
    diag = np.einsum("ij,jk,ki->i", v.conj().T, rho.mat, v).real
    null_mass = float(diag[s <= cutoff].sum())
    if null_mass > SUPPORT_MASS_TOL:
        return math.inf
    on = s > cutoff
    term_rho = -_spectrum_entropy(np.linalg.eigvalsh(rho.mat))
    term_cross = float((diag[on] * np.log2(s[on])).sum())
    return _flag_negative("qrel_entropy", term_rho - term_cross)


def cond_mutual_info(
    rho: DensityMatrix,
    a: tuple[int, ...] | None = None,
    b: tuple[int, ...] | None = None,
    e: tuple[int, ...] | None = None,
) -> float:
    """Conditional mutual information I(A;B|E) = S(AE)+S(BE)-S(ABE)-S(E).

    The three blocks are index sets into rho.dims and must partition all
    subsystems; defaults take the first subsystem as A, the second as B,
    and everything else as E.
    """
    n = len(rho.dims)
    if a is None and b is None and e is None:
        if n < 3:
            raise ShapeError("need at least 3 subsystems to condition on a block")
        a, b, e = (0,), (1,), tuple(range(2, n))
    if a is None or b is None or e is None:
        raise ShapeError("give either all of a, b, e or none of them")
    a, b, e = tuple(a), tuple(b), tuple(e)
    blocks = a + b + e
    if not a or not b or not e or sorted(blocks) != list(range(n)):
        raise ShapeError(
            f"blocks a={a}, b={b}, e={e} must be nonempty and partition 0..{n - 1}"
        )
    s_ae = vn_entropy(partial_trace(rho, a + e))
    s_be = vn_entropy(partial_trace(rho, b + e))
    s_abe = vn_entropy(rho)
    s_e = vn_entropy(partial_trace(rho, e))
    return _flag_negative("cond_mutual_info", s_ae + s_be - s_abe - s_e)


def _as_dist(p) -> np.ndarray:
    arr = np.asarray(getattr(p, "probs", p), dtype=float).reshape(-1)
    if arr.size == 0:
        raise ShapeError("empty probability vector")
    if arr.min(initial=0.0) < -TOL_NEG:
        raise DomainError(f"negative probability {arr.min():.3e}")
    if abs(arr.sum() - 1.0) > 1e-8:
        raise DomainError(f"probabilities sum to {arr.sum():.12g}, not 1")
    return np.clip(arr, 0.0, None)


def classical_rel_entropy(p, q) -> float:
    """Relative entropy between two distributions in bits, +inf off support."""
    pv, qv = _as_dist(p), _as_dist(q)
    if pv.size != qv.size:
        raise ShapeError(f"length mismatch: {pv.size} vs {qv.size}")
    on_p = pv > SUPPORT_RTOL * pv.max()
    null_q = qv <= SUPPORT_RTOL * qv.max()
    if np.any(on_p & null_q):
        return math.inf
    val = float((pv[on_p] * np.log2(pv[on_p] / qv[on_p])).sum())
    return _flag_negative("classical_rel_entropy", val)


def eta(x: float) -> float:
    """The concave function -x log2 x on [0, 1], with eta(0) = 0."""
    x = float(x)
    if x < -1e-12 or x > 1.0 + 1e-12:
        raise DomainError(f"eta is defined on [0, 1], got {x}")
    x = min(max(x, 0.0), 1.0)
    return 0.0 if x == 0.0 else -x * math.log2(x)
