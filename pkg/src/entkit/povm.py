"""Measurements on bipartite systems and the quantities they induce.

A Povm is a flat list of elements on the joint space with a class tag
recording how the measurement can be implemented. Tags LO and ONE_LOCC
are structural claims by the constructor (local measurements, or local
measurement by the first party followed by a conditional one on the
second); the PPT tag is verified element by element, since partial
transposes are cheap to check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .entropy import classical_rel_entropy
from .matqi import (
    TOL_HERM,
    TOL_PSD,
    DensityMatrix,
    DomainError,
    InvariantError,
    NumericError,
    ShapeError,
    _as_complex,
    _as_rng,
    _check_dims,
    max_entangled,
    partial_transpose_mat,
)

CLASS_TAGS = ("LO", "ONE_LOCC", "GENERIC", "PPT")


def _check_psd(mat: np.ndarray, what: str) -> None:
    if np.abs(mat - mat.conj().T).max() > TOL_HERM:
        raise InvariantError(f"{what} is not Hermitian")
    w = np.linalg.eigvalsh((mat + mat.conj().T) / 2.0)
    if w[0] < -TOL_PSD:
        raise InvariantError(f"{what} has negative eigenvalue {w[0]:.3e}")


def is_ppt_element(mat: np.ndarray, dims) -> bool:
    """Whether the partial transpose on the second subsystem stays PSD."""
    pt = partial_transpose_mat(mat, dims, 1)
    return bool(np.linalg.eigvalsh((pt + pt.conj().T) / 2.0)[0] >= -TOL_PSD)


@dataclass(frozen=True, eq=False)
class Povm:
    """Measurement given by its elements on the joint space.

    Elements must be PSD and sum to the identity within 1e-10. Labels
    default to outcome indices.
    """

    dims: tuple[int, ...]
    elements: tuple[np.ndarray, ...] = field(repr=False)
    class_tag: str = "GENERIC"
    labels: tuple = ()

    def __post_init__(self):
        dims = _check_dims(self.dims)
        if self.class_tag not in CLASS_TAGS:
            raise DomainError(f"unknown class tag {self.class_tag!r}; use one of {CLASS_TAGS}")
        dim = math.prod(dims)
        elems = tuple(_as_complex(e) for e in self.elements)
        if not elems:
            raise ShapeError("a measurement needs at least one element")
        for i, e in enumerate(elems):
            if e.shape[0] != dim:
                raise ShapeError(f"element {i} side {e.shape[0]} does not match dims {dims}")
            _check_psd(e, f"element {i}")
        total = np.sum(elems, axis=0)
        if np.abs(total - np.eye(dim)).max() > 1e-10:
            raise InvariantError("elements do not sum to the identity")
        if self.class_tag == "PPT":
            if len(dims) != 2:
                raise ShapeError("PPT tag needs a bipartite dims tuple")
            for i, e in enumerate(elems):
                if not is_ppt_element(e, dims):
                    raise InvariantError(f"element {i} fails the PPT condition")
        labels = tuple(self.labels) if self.labels else tuple(range(len(elems)))
        if len(labels) != len(elems):
            raise ShapeError("labels must match the number of elements")
        elems = tuple(e.copy() for e in elems)
        for e in elems:
            e.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "elements", elems)
        object.__setattr__(self, "labels", labels)

    @property
    def n_outcomes(self) -> int:
        return len(self.elements)


@dataclass(frozen=True, eq=False)
class OneWayLoccPovm:
    """Measurement by the first party, then one by the second conditioned
    on the first outcome: elements R_k on A and S_{k,l} on B with
    sum_k R_k = I and sum_l S_{k,l} = I for every k."""

    dims: tuple[int, int]
    alice: tuple[np.ndarray, ...] = field(repr=False)
    bob: tuple[tuple[np.ndarray, ...], ...] = field(repr=False)

    def __post_init__(self):
        dims = _check_dims(self.dims)
        if len(dims) != 2:
            raise ShapeError(f"expected two subsystems, got dims {dims}")
        da, db = dims
        alice = tuple(_as_complex(r) for r in self.alice)
        bob = tuple(tuple(_as_complex(s) for s in row) for row in self.bob)
        if len(bob) != len(alice) or not alice:
            raise ShapeError("need one row of B elements per A outcome")
        for k, r in enumerate(alice):
            if r.shape[0] != da:
                raise ShapeError(f"A element {k} has side {r.shape[0]}, expected {da}")
            _check_psd(r, f"A element {k}")
        if np.abs(np.sum(alice, axis=0) - np.eye(da)).max() > 1e-10:
            raise InvariantError("A elements do not sum to the identity")
        for k, row in enumerate(bob):
            if not row:
                raise ShapeError(f"empty B row for A outcome {k}")
            for l, s in enumerate(row):
                if s.shape[0] != db:
                    raise ShapeError(f"B element ({k},{l}) has side {s.shape[0]}, expected {db}")
                _check_psd(s, f"B element ({k},{l})")
            if np.abs(np.sum(row, axis=0) - np.eye(db)).max() > 1e-10:
                raise InvariantError(f"B elements for A outcome {k} do not sum to the identity")
        alice = tuple(r.copy() for r in alice)
        bob = tuple(tuple(s.copy() for s in row) for row in bob)
        for r in alice:
            r.setflags(write=False)
        for row in bob:
            for s in row:
                s.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "alice", alice)
        object.__setattr__(self, "bob", bob)


@dataclass(frozen=True, eq=False)
class ProbDist:
    """Outcome distribution: nonnegative entries summing to one."""

    probs: np.ndarray = field(repr=False)
    labels: tuple = ()

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float).reshape(-1)
        if probs.size == 0:
            raise ShapeError("empty distribution")
        if probs.min() < -TOL_PSD:
            raise InvariantError(f"probability {probs.min():.3e} below -{TOL_PSD}")
        probs = np.clip(probs, 0.0, None)
        if abs(probs.sum() - 1.0) > 1e-9:
            raise InvariantError(f"probabilities sum to {probs.sum():.12g}")
        labels = tuple(self.labels) if self.labels else tuple(range(probs.size))
        if len(labels) != probs.size:
            raise ShapeError("labels must match the number of outcomes")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "labels", labels)


def apply_povm(m: Povm, rho: DensityMatrix) -> ProbDist:
    """Outcome distribution tr(rho M_i); tiny negative traces are clamped."""
    if rho.dim != math.prod(m.dims):
        raise ShapeError(f"state dim {rho.dim} does not match measurement dims {m.dims}")
    probs = np.array([np.trace(rho.mat @ e).real for e in m.elements])
    return ProbDist(probs, m.labels)


def measured_rel_entropy(m: Povm, rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Relative entropy in bits between the two outcome distributions."""
    return classical_rel_entropy(apply_povm(m, rho), apply_povm(m, sigma))


def measured_distance(family, rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Largest l1 distance between outcome distributions over a finite
    family of measurements; a lower bound on the distance the full
    measurement class would see."""
    if not family:
        raise ShapeError("empty measurement family")
    best = 0.0
    for m in family:
        if isinstance(m, OneWayLoccPovm):
            m = onelocc_to_povm(m)
        d = float(np.abs(apply_povm(m, rho).probs - apply_povm(m, sigma).probs).sum())
        best = max(best, d)
    return best


def uu_bar_twirl(x: np.ndarray) -> np.ndarray:
    """Project onto the span of the maximally entangled projector and its
    complement, the exact average over conjugations by U tensor conj(U).

    Deterministic two-projector formula; no sampling is involved.
    """
    x = _as_complex(x)
    d = math.isqrt(x.shape[0])
    if d * d != x.shape[0] or d < 2:
        raise ShapeError(f"side {x.shape[0]} is not a square of a local dimension >= 2")
    phi = max_entangled(d).mat
    comp = np.eye(d * d) - phi
    a = np.trace(x @ phi)
    b = np.trace(x @ comp)
    return a * phi + (b / (d * d - 1)) * comp


def iso_two_outcome_povm(d: int) -> Povm:
    """Two-outcome test for maximal entanglement whose elements both stay
    PSD under partial transposition."""
    d = int(d)
    if d < 2:
        raise DomainError(f"local dimension must be at least 2, got {d}")
    phi = max_entangled(d).mat
    comp = np.eye(d * d) - phi
    m0 = phi + comp / (d + 1)
    m1 = (d / (d + 1)) * comp
    return Povm((d, d), (m0, m1), class_tag="PPT")


def comp_basis_povm(dims) -> Povm:
    """Product computational-basis measurement."""
    dims = _check_dims(dims)
    dim = math.prod(dims)
    eye = np.eye(dim)
    elems = tuple(np.outer(eye[i], eye[i]) for i in range(dim))
    labels = tuple(np.ndindex(*dims)) if len(dims) > 1 else tuple(range(dim))
    return Povm(dims, elems, class_tag="LO", labels=labels)


def twirl_basis_povm(d: int) -> Povm:
    """Twirl-then-measure in the computational product basis.

    Realized by local basis measurements plus shared randomness; by joint
    convexity its measured relative entropy never exceeds the best value
    over deterministic local-basis choices, so it is a sound member of
    local-measurement families used for lower bounds. Tagged LO.
    """
    d = int(d)
    if d < 2:
        raise DomainError(f"local dimension must be at least 2, got {d}")
    base = comp_basis_povm((d, d))
    elems = tuple(uu_bar_twirl(e) for e in base.elements)
    return Povm((d, d), elems, class_tag="LO", labels=base.labels)


def rotated_basis_povm(u_a: np.ndarray, u_b: np.ndarray) -> Povm:
    """Local basis measurement after rotating each side by a fixed unitary."""
    u_a, u_b = _as_complex(u_a), _as_complex(u_b)
    da, db = u_a.shape[0], u_b.shape[0]
    u = np.kron(u_a, u_b)
    eye = np.eye(da * db)
    elems = tuple(np.outer(u[:, i], u[:, i].conj()) for i in range(da * db))
    return Povm((da, db), elems, class_tag="LO",
                labels=tuple((i // db, i % db) for i in range(da * db)))


def comp_basis_onelocc(dims) -> OneWayLoccPovm:
    """Computational basis on A, then (unconditionally) on B."""
    dims = _check_dims(dims)
    if len(dims) != 2:
        raise ShapeError(f"expected two subsystems, got dims {dims}")
    da, db = dims
    ia, ib = np.eye(da), np.eye(db)
    alice = tuple(np.outer(ia[k], ia[k]) for k in range(da))
    row = tuple(np.outer(ib[l], ib[l]) for l in range(db))
    return OneWayLoccPovm(dims, alice, tuple(row for _ in range(da)))


def onelocc_to_povm(m: OneWayLoccPovm) -> Povm:
    """Flatten to joint elements R_k tensor S_{k,l} with labels (k, l)."""
    elems = []
    labels = []
    for k, r in enumerate(m.alice):
        for l, s in enumerate(m.bob[k]):
            elems.append(np.kron(r, s))
            labels.append((k, l))
    return Povm(m.dims, tuple(elems), class_tag="ONE_LOCC", labels=tuple(labels))


def _normalize_to_identity(parts: list[np.ndarray]) -> list[np.ndarray]:
    total = np.sum(parts, axis=0)
    w, v = np.linalg.eigh((total + total.conj().T) / 2.0)
    if w[0] <= 1e-12:
        raise NumericError("random measurement total is numerically singular")
    inv_sqrt = (v * (1.0 / np.sqrt(w))) @ v.conj().T
    out = [inv_sqrt @ a @ inv_sqrt for a in parts]
    return [(a + a.conj().T) / 2.0 for a in out]


def random_onelocc_povm(dims, k_outcomes: int, l_outcomes: int, seed=0) -> OneWayLoccPovm:
    """Random one-way measurement built from Gaussian factors.

    Each raw element is X^dagger X for a complex Gaussian X, then the set
    is conjugated by the inverse square root of its sum so it resolves
    the identity. Deterministic for a fixed integer seed.
    """
    dims = _check_dims(dims)
    if len(dims) != 2:
        raise ShapeError(f"expected two subsystems, got dims {dims}")
    if k_outcomes < 1 or l_outcomes < 1:
        raise DomainError("outcome counts must be positive")
    da, db = dims
    rng = _as_rng(seed)

    def raw(d: int, count: int) -> list[np.ndarray]:
        out = []
        for _ in range(count):
            x = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            out.append(x.conj().T @ x)
        return out

    alice = tuple(_normalize_to_identity(raw(da, k_outcomes)))
    bob = tuple(tuple(_normalize_to_identity(raw(db, l_outcomes))) for _ in range(k_outcomes))
    return OneWayLoccPovm(dims, alice, bob)


def haar_unitary(d: int, seed=0) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian with the
    phases of R's diagonal fixed."""
    rng = _as_rng(seed)
    g = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2.0)
    q, r = np.linalg.qr(g)
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))


def _mat_json(mat: np.ndarray) -> dict:
    return {"re": mat.real.tolist(), "im": mat.imag.tolist()}


def _mat_unjson(obj: dict, side: int, what: str) -> np.ndarray:
    if not isinstance(obj, dict) or "re" not in obj or "im" not in obj:
        raise ShapeError(f"{what}: expected an object with re/im")
    mat = np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)
    if mat.shape != (side, side):
        raise ShapeError(f"{what}: shape {mat.shape}, expected ({side}, {side})")
    return mat


def povm_to_json(m: Povm | OneWayLoccPovm) -> dict:
    if isinstance(m, OneWayLoccPovm):
        return {
            "class": "ONE_LOCC",
            "dims": list(m.dims),
            "alice": [_mat_json(r) for r in m.alice],
            "bob": [[_mat_json(s) for s in row] for row in m.bob],
        }
    return {
        "class": m.class_tag,
        "dims": list(m.dims),
        "elements": [_mat_json(e) for e in m.elements],
    }


def povm_from_json(obj: dict) -> Povm | OneWayLoccPovm:
    """Parse a measurement; the structured one-way form keeps its A and B
    factors, flat element lists become Povm with the stored tag."""
    if not isinstance(obj, dict) or "dims" not in obj:
        raise ShapeError("measurement object needs a dims key")
    dims = _check_dims(obj["dims"])
    if "alice" in obj or "bob" in obj:
        if "alice" not in obj or "bob" not in obj:
            raise ShapeError("one-way measurement needs alice and bob keys")
        da, db = dims
        alice = tuple(_mat_unjson(r, da, f"alice[{k}]") for k, r in enumerate(obj["alice"]))
        bob = tuple(
            tuple(_mat_unjson(s, db, f"bob[{k}][{l}]") for l, s in enumerate(row))
            for k, row in enumerate(obj["bob"])
        )
        return OneWayLoccPovm(dims, alice, bob)
    if "elements" not in obj:
        raise ShapeError("measurement object needs elements or alice/bob")
    side = math.prod(dims)
    elems = tuple(_mat_unjson(e, side, f"elements[{i}]") for i, e in enumerate(obj["elements"]))
    tag = obj.get("class", "GENERIC")
    return Povm(dims, elems, class_tag=tag)
