"""Finite-dimensional quantum states and the matrix operations behind them.

Multipartite systems are described by a tuple of subsystem dimensions; the
joint space is their Kronecker product in that order. All tolerances live
here so the rest of the package agrees on what counts as Hermitian, PSD,
or trace one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

TOL_HERM = 1e-10
TOL_TR = 1e-10
TOL_PSD = 1e-9
TOL_EIG = 1e-10
DIM_CAP = 4096

_EINSUM_LETTERS = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"


class EntkitError(Exception):
    """Base class for errors raised by this package."""


class ShapeError(EntkitError, ValueError):
    """Array shape or subsystem layout does not match what was asked for."""


class DomainError(EntkitError, ValueError):
    """Scalar argument outside its admissible range."""


class InvariantError(EntkitError, ValueError):
    """A constructed object fails its defining invariants."""


class DimensionCapError(EntkitError, ValueError):
    """Joint dimension exceeds the supported cap."""


class NumericError(EntkitError, RuntimeError):
    """Internal numerical failure (non-convergent eigensolver and the like)."""


def _as_complex(mat) -> np.ndarray:
    arr = np.asarray(mat, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr.view(np.float64))):
        raise InvariantError("matrix has non-finite entries")
    return arr


def _check_dims(dims) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if len(dims) == 0 or any(d < 1 for d in dims):
        raise ShapeError(f"subsystem dimensions must be positive, got {dims}")
    if math.prod(dims) > DIM_CAP:
        raise DimensionCapError(
            f"joint dimension {math.prod(dims)} exceeds cap {DIM_CAP}"
        )
    return dims


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Validated density matrix on a multipartite system.

    Construction checks Hermiticity (within TOL_HERM), positivity
    (eigenvalues above -TOL_PSD) and unit trace (within TOL_TR), and
    raises InvariantError naming every check that failed.
    """

    dims: tuple[int, ...]
    mat: np.ndarray = field(repr=False)

    def __post_init__(self):
        dims = _check_dims(self.dims)
        mat = _as_complex(self.mat)
        side = math.prod(dims)
        failed = []
        if mat.shape[0] != side:
            raise ShapeError(
                f"matrix side {mat.shape[0]} does not match dims {dims}"
            )
        if np.abs(mat - mat.conj().T).max() > TOL_HERM:
            failed.append("hermiticity")
        tr = np.trace(mat)
        if abs(tr - 1.0) > TOL_TR:
            failed.append(f"trace (got {tr:.6g})")
        # Positivity is checked on the Hermitian part so a tiny asymmetry
        # does not make eigvalsh itself misbehave.
        w = np.linalg.eigvalsh((mat + mat.conj().T) / 2.0)
        if w[0] < -TOL_PSD:
            failed.append(f"positivity (min eigenvalue {w[0]:.3e})")
        if failed:
            raise InvariantError("not a density matrix: " + ", ".join(failed))
        mat = mat.copy()
        mat.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "mat", mat)

    @property
    def dim(self) -> int:
        return math.prod(self.dims)


@dataclass(frozen=True, eq=False)
class PureState:
    """Unit vector on a multipartite system."""

    dims: tuple[int, ...]
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        dims = _check_dims(self.dims)
        vec = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        if vec.size != math.prod(dims):
            raise ShapeError(
                f"vector length {vec.size} does not match dims {dims}"
            )
        nrm = np.linalg.norm(vec)
        if abs(nrm - 1.0) > 1e-10:
            raise InvariantError(f"state vector norm {nrm:.12g} is not 1")
        vec = vec.copy()
        vec.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amplitudes", vec)

    def density(self) -> DensityMatrix:
        return DensityMatrix(self.dims, np.outer(self.amplitudes, self.amplitudes.conj()))


def tensor(a: DensityMatrix, b: DensityMatrix) -> DensityMatrix:
    """Tensor product of two states; subsystems of b are appended after a's."""
    dims = _check_dims(a.dims + b.dims)
    return DensityMatrix(dims, np.kron(a.mat, b.mat))


def partial_trace_mat(mat: np.ndarray, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Partial trace of a square matrix over every subsystem not in keep."""
    dims = tuple(dims)
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in keep):
        raise ShapeError(f"keep indices {keep} out of range for {n} subsystems")
    if not keep:
        raise ShapeError("keep must name at least one subsystem")
    mat = _as_complex(mat)
    if mat.shape[0] != math.prod(dims):
        raise ShapeError(f"matrix side {mat.shape[0]} does not match dims {dims}")
    if 2 * n > len(_EINSUM_LETTERS):
        raise DimensionCapError(f"too many subsystems ({n})")
    rows = list(_EINSUM_LETTERS[:n])
    cols = []
    nxt = n
    for i in range(n):
        if i in keep:
            cols.append(_EINSUM_LETTERS[nxt])
            nxt += 1
        else:
            cols.append(rows[i])  # repeated letter contracts the pair
    out = "".join(rows[i] for i in keep) + "".join(cols[i] for i in keep)
    spec = "".join(rows) + "".join(cols) + "->" + out
    kd = math.prod(dims[i] for i in keep)
    res = np.einsum(spec, mat.reshape(dims + dims))
    return np.ascontiguousarray(res.reshape(kd, kd))


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Reduced state on the kept subsystems, ordered as in rho.dims."""
    keep = sorted(set(int(k) for k in keep))
    red = partial_trace_mat(rho.mat, rho.dims, keep)
    return DensityMatrix(tuple(rho.dims[i] for i in keep), red)


def partial_transpose_mat(mat: np.ndarray, dims: Sequence[int], party: int) -> np.ndarray:
    """Transpose one subsystem's indices; a pure reindexing, hence exact."""
    dims = tuple(dims)
    n = len(dims)
    party = int(party)
    if party < 0 or party >= n:
        raise ShapeError(f"party {party} out of range for {n} subsystems")
    mat = _as_complex(mat)
    if mat.shape[0] != math.prod(dims):
        raise ShapeError(f"matrix side {mat.shape[0]} does not match dims {dims}")
    arr = mat.reshape(dims + dims)
    axes = list(range(2 * n))
    axes[party], axes[party + n] = axes[party + n], axes[party]
    return np.ascontiguousarray(arr.transpose(axes).reshape(mat.shape))


def partial_transpose(rho: DensityMatrix, party: int) -> np.ndarray:
    """Partial transpose of a state; returned as a plain matrix since it
    can fail positivity."""
    return partial_transpose_mat(rho.mat, rho.dims, party)


def permute_systems_mat(mat: np.ndarray, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder subsystems so that output slot j holds input subsystem perm[j]."""
    dims = tuple(dims)
    n = len(dims)
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != list(range(n)):
        raise ShapeError(f"perm {perm} is not a permutation of 0..{n - 1}")
    mat = _as_complex(mat)
    arr = mat.reshape(dims + dims)
    axes = list(perm) + [p + n for p in perm]
    return np.ascontiguousarray(arr.transpose(axes).reshape(mat.shape))


def herm_eig(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns (w, v) with eigenvalues w in descending order and matching
    eigenvectors in the columns of v, so m = v @ diag(w) @ v^dagger up to
    TOL_EIG times the Frobenius norm.
    """
    m = _as_complex(m)
    scale = max(1.0, float(np.linalg.norm(m)))
    if np.abs(m - m.conj().T).max() > TOL_HERM * scale:
        raise InvariantError("herm_eig requires a Hermitian matrix")
    try:
        w, v = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise NumericError(f"eigensolver failed: {exc}") from exc
    return w[::-1].copy(), np.ascontiguousarray(v[:, ::-1])


def trace_norm(m: np.ndarray) -> float:
    """Sum of singular values; for Hermitian input, sum of |eigenvalues|."""
    m = _as_complex(m)
    if np.abs(m - m.conj().T).max() <= TOL_HERM * max(1.0, float(np.linalg.norm(m))):
        return float(np.abs(np.linalg.eigvalsh((m + m.conj().T) / 2.0)).sum())
    return float(np.linalg.svd(m, compute_uv=False).sum())


def max_entangled(d: int) -> DensityMatrix:
    """Maximally entangled state of two d-level systems."""
    d = int(d)
    if d < 2:
        raise DomainError(f"local dimension must be at least 2, got {d}")
    vec = np.zeros(d * d, dtype=np.complex128)
    vec[:: d + 1] = 1.0 / math.sqrt(d)
    return DensityMatrix((d, d), np.outer(vec, vec.conj()))


def isotropic(d: int, p: float) -> DensityMatrix:
    """Mixture p * (maximally entangled) + (1 - p) * (maximally mixed).

    The admissible range -1/(d^2-1) <= p <= 1 is exactly where the matrix
    stays positive semidefinite.
    """
    d = int(d)
    if d < 2:
        raise DomainError(f"local dimension must be at least 2, got {d}")
    p = float(p)
    lo = -1.0 / (d * d - 1)
    if p < lo - 1e-12 or p > 1.0 + 1e-12:
        raise DomainError(f"mixing weight {p} outside [{lo:.6g}, 1]")
    phi = max_entangled(d).mat
    mat = p * phi + (1.0 - p) * np.eye(d * d) / (d * d)
    return DensityMatrix((d, d), mat)


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_density(dims: Sequence[int], rank: int | None = None, seed=0) -> DensityMatrix:
    """Random state from a normalized Gaussian square-root factor.

    Draws a complex Gaussian G with `rank` columns and returns
    G G^dagger / tr(G G^dagger). Full rank when rank is omitted.
    Deterministic for a fixed integer seed.
    """
    dims = _check_dims(dims)
    dim = math.prod(dims)
    r = dim if rank is None else int(rank)
    if r < 1 or r > dim:
        raise DomainError(f"rank must be in 1..{dim}, got {r}")
    rng = _as_rng(seed)
    g = rng.standard_normal((dim, r)) + 1j * rng.standard_normal((dim, r))
    mat = g @ g.conj().T
    return DensityMatrix(dims, mat / np.trace(mat).real)


def random_pure(dims: Sequence[int], seed=0) -> PureState:
    """Haar-random pure state on the joint space."""
    dims = _check_dims(dims)
    rng = _as_rng(seed)
    dim = math.prod(dims)
    vec = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return PureState(dims, vec / np.linalg.norm(vec))


def purify(rho: DensityMatrix) -> PureState:
    """Pure state on (original systems, reference) whose reduction is rho.

    The reference dimension equals the rank of rho, so a pure input gets a
    trivial one-dimensional reference.
    """
    w, v = herm_eig(rho.mat)
    cutoff = 1e-12 * max(w[0], 0.0)
    r = max(1, int(np.sum(w > cutoff)))
    amps = np.zeros(rho.dim * r, dtype=np.complex128)
    for i in range(r):
        amps[i::r] = math.sqrt(max(w[i], 0.0)) * v[:, i]
    amps /= np.linalg.norm(amps)
    return PureState(rho.dims + (r,), amps)


def matrix_to_json(mat: np.ndarray, dims: Sequence[int]) -> dict:
    """JSON-ready form of a complex matrix: dims plus real and imaginary parts."""
    mat = _as_complex(mat)
    return {
        "dims": [int(d) for d in dims],
        "re": mat.real.tolist(),
        "im": mat.imag.tolist(),
    }


def matrix_from_json(obj: dict) -> tuple[tuple[int, ...], np.ndarray]:
    """Parse the dict form back into (dims, matrix), checking layout only."""
    if not isinstance(obj, dict):
        raise ShapeError("expected a JSON object with dims/re/im")
    missing = [k for k in ("dims", "re", "im") if k not in obj]
    if missing:
        raise ShapeError(f"matrix object missing keys: {', '.join(missing)}")
    dims = _check_dims(obj["dims"])
    re = np.asarray(obj["re"], dtype=float)
    im = np.asarray(obj["im"], dtype=float)
    if re.shape != im.shape:
        raise ShapeError(f"re shape {re.shape} does not match im shape {im.shape}")
    mat = _as_complex(re + 1j * im)
    if mat.shape[0] != math.prod(dims):
        raise ShapeError(f"matrix side {mat.shape[0]} does not match dims {dims}")
    return dims, mat


def density_to_json(rho: DensityMatrix) -> dict:
    return matrix_to_json(rho.mat, rho.dims)


def density_from_json(obj: dict) -> DensityMatrix:
    """Parse and validate a state; InvariantError lists every failed check."""
    dims, mat = matrix_from_json(obj)
    return DensityMatrix(dims, mat)
