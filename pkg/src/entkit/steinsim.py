"""Finite-blocklength hypothesis-testing simulation for one-way local
measurements.

One party measures, broadcasts the outcome, the other applies a
two-valued Kraus pair per received string; the accept/reject rule is a
likelihood-ratio threshold on the n-fold product of the single-copy
outcome distributions. Classical error rates never materialize n-copy
matrices; only the back-action (disturbance) computation assembles
quantum objects, blockwise per first-party outcome string.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .entropy import classical_rel_entropy
from .matqi import (
    DIM_CAP,
    DensityMatrix,
    DimensionCapError,
    DomainError,
    InvariantError,
    ShapeError,
    _as_complex,
    herm_eig,
    partial_trace,
    partial_trace_mat,
    permute_systems_mat,
    trace_norm,
)
from .povm import OneWayLoccPovm, ProbDist, apply_povm, onelocc_to_povm

STRING_CAP = 10_000_000
_MASS_SLOP = 1e-12


def _uniform_bob_count(m: OneWayLoccPovm) -> int:
    counts = {len(row) for row in m.bob}
    if len(counts) != 1:
        raise ShapeError("second-party outcome count must not depend on the first party's outcome")
    return counts.pop()


def product_outcome_dists(m: OneWayLoccPovm, rho: DensityMatrix,
                          sigma: DensityMatrix) -> tuple[ProbDist, ProbDist]:
    """Single-copy outcome distributions of both hypotheses under m.

    The n-copy distributions are their n-fold products and are never
    formed here. Outcomes are flattened as k * n_bob + l.
    """
    flat = onelocc_to_povm(m)
    if tuple(rho.dims) != tuple(m.dims) or tuple(sigma.dims) != tuple(m.dims):
        raise ShapeError(f"state dims must match measurement dims {m.dims}")
    _uniform_bob_count(m)
    return apply_povm(flat, rho), apply_povm(flat, sigma)


def _nfold_product(vec: np.ndarray, n: int) -> np.ndarray:
    out = vec
    for _ in range(n - 1):
        out = (out[:, None] * vec[None, :]).reshape(-1)
    return out


@dataclass(frozen=True, eq=False)
class SteinPartition:
    """Threshold decision rule on n-fold outcome strings.

    The Null set is {llr > threshold} plus the explicitly listed
    exception strings (the part of the tie group that the greedy fill
    admitted, in lexicographic order); everything else is Alt. The
    single-copy distributions are kept so the full mask is recomputable.
    """

    n: int
    base_size: int
    p1: np.ndarray = field(repr=False)
    q1: np.ndarray = field(repr=False)
    threshold: float
    exceptions: tuple[int, ...]
    alpha: float
    beta: float
    flags: tuple[str, ...]

    @property
    def size(self) -> int:
        return self.base_size ** self.n

    def _llr(self) -> np.ndarray:
        pn = _nfold_product(self.p1, self.n)
        qn = _nfold_product(self.q1, self.n)
        with np.errstate(divide="ignore", invalid="ignore"):
            llr = np.log2(pn) - np.log2(qn)
        llr[(pn == 0.0)] = -math.inf  # never admitted
        llr[(pn > 0.0) & (qn == 0.0)] = math.inf
        return llr

    def null_mask(self) -> np.ndarray:
        """Boolean Null-membership over all base_size**n strings,
        rebuilt from the stored threshold and exception list."""
        llr = self._llr()
        mask = llr > self.threshold
        if self.exceptions:
            mask[np.asarray(self.exceptions, dtype=np.intp)] = True
        return mask


def build_partition(p, q, n: int, alpha_target: float) -> SteinPartition:
    """Most-powerful threshold test on n-fold products of (p, q).

    Strings are ranked by log-likelihood ratio, descending, ties in
    lexicographic order, and admitted into Null until the p-mass reaches
    1 - alpha_target; zero-p strings are never admitted. The achieved
    beta is minimal among threshold tests at the achieved alpha.
    """
    p1 = p.probs if isinstance(p, ProbDist) else np.asarray(p, dtype=float)
    q1 = q.probs if isinstance(q, ProbDist) else np.asarray(q, dtype=float)
    if p1.shape != q1.shape or p1.ndim != 1:
        raise ShapeError("p and q must be distributions over the same outcome alphabet")
    if n < 1:
        raise DomainError(f"copy count {n} must be at least 1")
    if not 0.0 <= alpha_target < 1.0:
        raise DomainError(f"alpha_target {alpha_target} outside [0, 1)")
    base = p1.size
    if base ** n > STRING_CAP:
        raise DimensionCapError(
            f"{base}^{n} outcome strings exceed the enumeration cap {STRING_CAP}")

    pn = _nfold_product(p1, n)
    qn = _nfold_product(q1, n)
    with np.errstate(divide="ignore", invalid="ignore"):
        llr = np.log2(pn) - np.log2(qn)
    support_violation = bool(np.any((pn > 0.0) & (qn == 0.0)))
    llr[(pn > 0.0) & (qn == 0.0)] = math.inf
    llr[pn == 0.0] = -math.inf

    order = np.argsort(-llr, kind="stable")  # descending llr, lex ties
    cum = np.cumsum(pn[order])
    target = (1.0 - alpha_target) - _MASS_SLOP
    hit = np.flatnonzero(cum >= target)
    count = int(hit[0]) + 1 if hit.size else int(np.count_nonzero(pn > 0.0))
    # drop any zero-p tail the cumsum may have walked onto
    while count > 0 and pn[order[count - 1]] == 0.0:
        count -= 1
    chosen = order[:count]

    thr = float(llr[chosen[-1]]) if count else math.inf
    in_null = np.zeros(base ** n, dtype=bool)
    in_null[chosen] = True
    # chosen strings strictly above the threshold are implied by it; only
    # the admitted part of the tie group needs listing (inf == inf holds,
    # so an all-infinite prefix lands here too)
    tie = np.flatnonzero((llr == thr) & in_null) if count else np.array([], dtype=np.intp)
    alpha = float(1.0 - pn[chosen].sum())
    beta = float(qn[chosen].sum())
    alpha = min(max(alpha, 0.0), 1.0)
    beta = min(max(beta, 0.0), 1.0)
    flags = []
    if support_violation:
        flags.append("support_violation")
    if beta == 0.0:
        flags.append("infinite_exponent")
    return SteinPartition(
        n=n, base_size=base, p1=p1.copy(), q1=q1.copy(), threshold=thr,
        exceptions=tuple(int(i) for i in tie), alpha=alpha, beta=beta,
        flags=tuple(flags))


def threshold_test_curve(p, q, n: int):
    """All achievable (alpha, beta) pairs of threshold tests: one per
    prefix of the llr-sorted string list. Exhaustive oracle for small n."""
    p1 = p.probs if isinstance(p, ProbDist) else np.asarray(p, dtype=float)
    q1 = q.probs if isinstance(q, ProbDist) else np.asarray(q, dtype=float)
    pn = _nfold_product(p1, n)
    qn = _nfold_product(q1, n)
    with np.errstate(divide="ignore", invalid="ignore"):
        llr = np.log2(pn) - np.log2(qn)
    llr[(pn > 0.0) & (qn == 0.0)] = math.inf
    llr[pn == 0.0] = -math.inf
    order = np.argsort(-llr, kind="stable")
    alphas = 1.0 - np.cumsum(pn[order])
    betas = np.cumsum(qn[order])
    return np.clip(alphas, 0.0, 1.0), np.clip(betas, 0.0, 1.0)


@dataclass(frozen=True, eq=False)
class Instrument:
    """Two-valued quantum instrument built from a one-way measurement
    and a partition: the first party measures every copy, and for each
    outcome string the second party applies one of two Kraus operators
    whose squares sum the retained/rejected outcome blocks."""

    n: int
    dims: tuple[int, int]
    alice_strings: tuple[tuple[int, ...], ...]
    sqrt_alice: tuple[np.ndarray, ...] = field(repr=False)
    bob_kraus: tuple[tuple[np.ndarray, np.ndarray], ...] = field(repr=False)

    def flag_probs(self, rho: DensityMatrix) -> tuple[float, float]:
        """(Null, Alt) probabilities of the classical flag on the n-fold
        power of a single-copy state, computed through the quantum
        operators rather than the outcome distributions."""
        if tuple(rho.dims) != self.dims:
            raise ShapeError(f"state dims {rho.dims} do not match instrument dims {self.dims}")
        da, db = self.dims
        rho_n = rho.mat
        for _ in range(self.n - 1):
            rho_n = np.kron(rho_n, rho.mat)
        dims_n = (da,) * self.n + (db,) * self.n
        perm = [None] * (2 * self.n)
        for i in range(self.n):
            perm[i] = 2 * i        # A_i position in the interleaved kron
            perm[self.n + i] = 2 * i + 1
        rho_n = permute_systems_mat(rho_n, (da, db) * self.n, tuple(perm))
        dan, dbn = da ** self.n, db ** self.n
        r4 = rho_n.reshape(dan, dbn, dan, dbn)
        p_null = 0.0
        for ra, (qn_, qa_) in zip(self.sqrt_alice, self.bob_kraus):
            cond = np.einsum("ij,jakb,ki->ab", ra, r4, ra)
            p_null += float(np.einsum("ab,ba->", qn_ @ qn_, cond).real)
        return p_null, 1.0 - p_null


def _index_strings(base: int, n: int):
    idx = np.indices((base,) * n).reshape(n, -1).T
    return [tuple(int(x) for x in row) for row in idx]


def build_instrument(m: OneWayLoccPovm, part: SteinPartition) -> Instrument:
    """Kraus assembly for the instrument defined by a partition.

    For each first-party string the retained-block operator is the
    square root of the sum of the second party's outcome operators over
    strings the partition keeps; the pair must square-sum to the
    identity within 1e-9.
    """
    n_bob = _uniform_bob_count(m)
    n_alice = len(m.alice)
    if part.base_size != n_alice * n_bob:
        raise ShapeError(
            f"partition alphabet {part.base_size} does not match measurement "
            f"({n_alice} x {n_bob})")
    n = part.n
    da, db = m.dims
    dbn = db ** n
    work = (n_alice ** n) * (n_bob ** n + 1) * dbn * dbn
    if work > 5e8 or n_alice ** n > 1e6:
        raise DimensionCapError(f"instrument assembly work {work:.1e} exceeds the cap")

    mask = part.null_mask().reshape([n_alice, n_bob] * n)
    mask = mask.transpose(tuple(range(0, 2 * n, 2)) + tuple(range(1, 2 * n, 2)))
    mask = mask.reshape(n_alice ** n, n_bob ** n)

    sqrt_r = []
    for r in m.alice:
        w, v = herm_eig(r)
        sqrt_r.append(v @ np.diag(np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T)

    alice_strings = _index_strings(n_alice, n)
    bob_strings = _index_strings(n_bob, n)
    eye_b = np.eye(dbn)
    out_alice = []
    out_bob = []
    for a_i, ks in enumerate(alice_strings):
        ra = sqrt_r[ks[0]]
        for ki in ks[1:]:
            ra = np.kron(ra, sqrt_r[ki])
        null_sum = np.zeros((dbn, dbn), dtype=np.complex128)
        row = mask[a_i]
        for b_i in np.flatnonzero(row):
            ls = bob_strings[b_i]
            s = m.bob[ks[0]][ls[0]]
            for ki, li in zip(ks[1:], ls[1:]):
                s = np.kron(s, m.bob[ki][li])
            null_sum += s
        null_sum = (null_sum + null_sum.conj().T) / 2.0
        w, v = herm_eig(null_sum)
        q_null = v @ np.diag(np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
        alt_sum = (eye_b - null_sum)
        alt_sum = (alt_sum + alt_sum.conj().T) / 2.0
        w, v = herm_eig(alt_sum)
        q_alt = v @ np.diag(np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
        resid = float(np.abs(q_null @ q_null + q_alt @ q_alt - eye_b).max())
        if resid > 1e-9:
            raise InvariantError(f"Kraus completeness violated by {resid:.3e}")
        out_alice.append(ra)
        out_bob.append((q_null, q_alt))
    return Instrument(n=n, dims=(da, db), alice_strings=tuple(alice_strings),
                      sqrt_alice=tuple(out_alice), bob_kraus=tuple(out_bob))


@dataclass(frozen=True)
class SteinReport:
    """One sweep point: classical error rates, exponents, and the
    measurement back-action against its gentle-measurement budget."""

    n: int
    alpha: float
    beta: float
    exponent: float
    norm_rel_ent: float
    disturbance: float
    gentle_bound: float
    flags: tuple[str, ...]

    def __post_init__(self):
        if not (0.0 <= self.alpha <= 1.0 and 0.0 <= self.beta <= 1.0):
            raise InvariantError(
                f"error rates out of range: alpha={self.alpha}, beta={self.beta}")
        if math.isfinite(self.disturbance) and \
                self.disturbance > self.gentle_bound + 1e-9:
            raise InvariantError(
                f"disturbance {self.disturbance:.6e} exceeds the gentle bound "
                f"{self.gentle_bound:.6e}")

    def to_json(self) -> dict:
        return {
            "n": self.n, "alpha_n": self.alpha, "beta_n": self.beta,
            "exponent": self.exponent, "norm_rel_ent": self.norm_rel_ent,
            "disturbance": self.disturbance, "gentle_bound": self.gentle_bound,
            "flags": list(self.flags),
        }


def _disturbance(m: OneWayLoccPovm, instr: Instrument,
                 rho_abe: DensityMatrix) -> float:
    da, db = m.dims
    de = rho_abe.dims[2]
    n = instr.n
    dbn, den = db ** n, de ** n
    rho_mat = rho_abe.mat

    # per-copy conditional states on BE, one per first-party outcome
    omegas = []
    sqrt_r1 = []
    for r in m.alice:
        w, v = herm_eig(r)
        sqrt_r1.append(v @ np.diag(np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T)
    for sr in sqrt_r1:
        big = np.kron(sr, np.eye(db * de))
        cond = big @ rho_mat @ big
        omegas.append(partial_trace_mat(cond, (da, db, de), (1, 2)))

    rho_be = partial_trace(rho_abe, (1, 2)).mat
    target = rho_be
    for _ in range(n - 1):
        target = np.kron(target, rho_be)
    perm = tuple(range(0, 2 * n, 2)) + tuple(range(1, 2 * n, 2))
    target = permute_systems_mat(target, (db, de) * n, perm)

    out = np.zeros((dbn * den, dbn * den), dtype=np.complex128)
    for ks, (q_null, q_alt) in zip(instr.alice_strings, instr.bob_kraus):
        w = omegas[ks[0]]
        for ki in ks[1:]:
            w = np.kron(w, omegas[ki])
        w = permute_systems_mat(w, (db, de) * n, perm)
        w4 = w.reshape(dbn, den, dbn, den)
        for q in (q_null, q_alt):
            out += np.einsum("ij,jalb,kl->iakb", q, w4, q.conj()).reshape(
                dbn * den, dbn * den)
    return trace_norm(out - target)


def run_stein(m: OneWayLoccPovm, rho_abe: DensityMatrix,
              sigma_abe: DensityMatrix, n: int,
              alpha_target: float = 0.05) -> SteinReport:
    """One simulation point: build the threshold partition on the n-fold
    outcome strings, read off the error rates and exponents, then (caps
    permitting) assemble the instrument and measure its back-action on
    the Null hypothesis against the gentle-measurement budget.

    A run past the matrix caps still reports the classical quantities,
    with the disturbance marked skipped instead of failing.
    """
    if len(rho_abe.dims) != 3 or len(sigma_abe.dims) != 3:
        raise ShapeError("expected tripartite states (third system may have dimension 1)")
    if rho_abe.dims[:2] != tuple(m.dims) or sigma_abe.dims[:2] != tuple(m.dims):
        raise ShapeError(f"first two subsystem dims must match measurement dims {m.dims}")
    rho_ab = partial_trace(rho_abe, (0, 1))
    sigma_ab = partial_trace(sigma_abe, (0, 1))
    p, q = product_outcome_dists(m, rho_ab, sigma_ab)
    part = build_partition(p, q, n, alpha_target)

    alpha, beta = part.alpha, part.beta
    exponent = math.inf if beta == 0.0 else -math.log2(beta) / n
    null_dist = np.array([1.0 - alpha, alpha])
    alt_dist = np.array([beta, 1.0 - beta])
    norm_rel_ent = classical_rel_entropy(null_dist, alt_dist) / n
    gentle = alpha + 2.0 * math.sqrt(alpha)
    flags = list(part.flags)

    db, de = m.dims[1], rho_abe.dims[2]
    disturbance = math.nan
    if (db * de) ** n > DIM_CAP:
        flags.append("disturbance_skipped")
    else:
        try:
            instr = build_instrument(m, part)
        except DimensionCapError:
            flags.append("disturbance_skipped")
        else:
            disturbance = _disturbance(m, instr, rho_abe)
    return SteinReport(n=n, alpha=alpha, beta=beta, exponent=exponent,
                       norm_rel_ent=norm_rel_ent, disturbance=disturbance,
                       gentle_bound=gentle, flags=tuple(flags))


def gentle_check(lam, tau: DensityMatrix) -> tuple[float, float]:
    """Gentle-measurement inequality instance: trace distance moved by
    the sqrt-operator pinch versus twice the root failure probability."""
    lam = _as_complex(lam)
    if lam.shape[0] != tau.dim:
        raise ShapeError(f"operator side {lam.shape[0]} does not match state dim {tau.dim}")
    w, v = herm_eig(lam)
    if w.min() < -1e-9 or w.max() > 1.0 + 1e-9:
        raise DomainError(f"operator spectrum [{w.min():.3e}, {w.max():.3e}] outside [0, 1]")
    sq = v @ np.diag(np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    lhs = trace_norm(sq @ tau.mat @ sq - tau.mat)
    rhs = 2.0 * math.sqrt(max(0.0, 1.0 - float(np.trace(tau.mat @ lam).real)))
    return lhs, rhs


def stein_sweep(m: OneWayLoccPovm, rho_abe: DensityMatrix,
                sigma_abe: DensityMatrix, n_values,
                alpha_target: float = 0.05) -> list[SteinReport]:
    """Independent simulation points over a list of copy counts."""
    return [run_stein(m, rho_abe, sigma_abe, n, alpha_target) for n in n_values]
