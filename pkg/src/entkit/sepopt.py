"""Relative entropy minimization over separable states.

The feasible set is the convex hull of pure product states, kept explicit:
every iterate is a weighted list of product factors, so separability is
certified by construction rather than tested after the fact. Linear
minimization over the hull (the only oracle the solver needs) is a
seeded alternating eigenvector heuristic with restarts, and each run
reports a duality-gap certificate: the true minimum lies within
[value - gap, value] whenever the oracle found the minimizing vertex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .entropy import SUPPORT_RTOL
from .matqi import (
    DensityMatrix,
    DomainError,
    InvariantError,
    ShapeError,
    _as_complex,
    _as_rng,
    _check_dims,
)
from .povm import OneWayLoccPovm, Povm, apply_povm, onelocc_to_povm

_LN2 = math.log(2.0)
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
_Q_FLOOR = 1e-15
_EIG_FLOOR = 1e-18
_DEGEN_RTOL = 1e-8


def _hermitize(m: np.ndarray) -> np.ndarray:
    return (m + m.conj().T) / 2.0


@dataclass(frozen=True, eq=False)
class SepPoint:
    """Separable state as an explicit mixture of pure product states."""

    dims: tuple[int, int]
    weights: np.ndarray = field(repr=False)
    factors: tuple[tuple[np.ndarray, np.ndarray], ...] = field(repr=False)

    def __post_init__(self):
        dims = _check_dims(self.dims)
        if len(dims) != 2:
            raise ShapeError(f"expected two subsystems, got dims {dims}")
        da, db = dims
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if w.size == 0 or w.size != len(self.factors):
            raise ShapeError("need one weight per product factor")
        if w.min() < -1e-12:
            raise InvariantError(f"negative mixture weight {w.min():.3e}")
        w = np.clip(w, 0.0, None)
        total = w.sum()
        if not total > 0.0:
            raise InvariantError("mixture weights sum to zero")
        w = w / total
        facs = []
        for a, b in self.factors:
            a = np.asarray(a, dtype=np.complex128).reshape(-1)
            b = np.asarray(b, dtype=np.complex128).reshape(-1)
            if a.size != da or b.size != db:
                raise ShapeError(f"factor shapes ({a.size},{b.size}) do not match dims {dims}")
            na, nb = np.linalg.norm(a), np.linalg.norm(b)
            if na < 1e-12 or nb < 1e-12:
                raise InvariantError("zero product factor")
            facs.append((a / na, b / nb))
        w.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "factors", tuple(facs))

    def matrix(self) -> np.ndarray:
        d = self.dims[0] * self.dims[1]
        out = np.zeros((d, d), dtype=np.complex128)
        for w, (a, b) in zip(self.weights, self.factors):
            if w == 0.0:
                continue
            v = (a[:, None] * b[None, :]).reshape(-1)
            out += w * np.outer(v, v.conj())
        return _hermitize(out)

    def density(self) -> DensityMatrix:
        return DensityMatrix(self.dims, self.matrix())


@dataclass(frozen=True)
class FwResult:
    """Outcome of one solver run, with its per-iteration history."""

    value: float
    sigma: SepPoint
    duality_gap: float
    iterations: int
    trace: tuple[tuple[int, float, float], ...]
    converged: bool
    flags: tuple[str, ...]
    mix_x: float = 1.0

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "gap": self.duality_gap,
            "iterations": self.iterations,
            "flags": list(self.flags),
            "trace": [[int(t), float(v), float(g)] for t, v, g in self.trace],
        }


@dataclass(frozen=True)
class OneLoccBound:
    """Best certified lower bound over a family of local measurements."""

    bound: float
    best_index: int
    slack: float
    indices: tuple[int, ...]
    values: tuple[float, ...]
    gaps: tuple[float, ...]


def random_sep_point(dims, atoms: int = 6, seed=0) -> SepPoint:
    """Seeded separable state: Dirichlet weights over random product pures."""
    dims = _check_dims(dims)
    if len(dims) != 2:
        raise ShapeError(f"expected two subsystems, got dims {dims}")
    if atoms < 1:
        raise DomainError("need at least one product factor")
    rng = _as_rng(seed)
    da, db = dims
    w = rng.dirichlet(np.ones(atoms))
    facs = []
    for _ in range(atoms):
        a = rng.standard_normal(da) + 1j * rng.standard_normal(da)
        b = rng.standard_normal(db) + 1j * rng.standard_normal(db)
        facs.append((a, b))
    return SepPoint(dims, w, tuple(facs))


def _min_eigvec_batch(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Smallest-eigenvalue eigenvectors for a batch of Hermitian matrices.

    Closed form for side 2 (the common case for the small systems this
    package sweeps), batched eigh otherwise. Returns (vectors, values).
    """
    d = h.shape[-1]
    if d == 2:
        al = h[:, 0, 0].real
        de = h[:, 1, 1].real
        be = h[:, 0, 1]
        half = (al - de) / 2.0
        rad = np.sqrt(half * half + (be * be.conj()).real)
        lam = (al + de) / 2.0 - rad
        v1 = np.stack([-be, (al - lam).astype(np.complex128)], axis=1)
        v2 = np.stack([(de - lam).astype(np.complex128), -be.conj()], axis=1)
        n1 = np.linalg.norm(v1, axis=1)
        n2 = np.linalg.norm(v2, axis=1)
        use2 = n2 > n1
        v = np.where(use2[:, None], v2, v1)
        n = np.where(use2, n2, n1)
        degenerate = n < 1e-14  # matrix proportional to identity
        if np.any(degenerate):
            v = v.copy()
            v[degenerate] = np.array([1.0, 0.0], dtype=np.complex128)
            n = np.where(degenerate, 1.0, n)
        return v / n[:, None], lam
    w, v = np.linalg.eigh(h)
    return np.ascontiguousarray(v[..., 0]), w[..., 0]


def lmo_product(g, dims, restarts: int = 20, seed=0, init=None):
    """Approximate minimizer of <a b| g |a b> over pure product states.

    Alternating smallest-eigenvector updates from `restarts` random
    starts (plus any warm starts in `init`), keeping the best value seen;
    ties go to the first-found candidate. Heuristic: the value is an
    upper bound on the true product minimum.

    Returns (a, b, value) with unit vectors a on A and b on B.
    """
    dims = tuple(int(d) for d in dims)
    if len(dims) != 2:
        raise ShapeError(f"expected two subsystems, got dims {dims}")
    da, db = dims
    g = _hermitize(_as_complex(g))
    if g.shape[0] != da * db:
        raise ShapeError(f"matrix side {g.shape[0]} does not match dims {dims}")
    if restarts < 0 or (restarts == 0 and not init):
        raise DomainError("need at least one start")
    rng = _as_rng(seed)
    starts_a = []
    starts_b = []
    for _ in range(restarts):
        starts_a.append(rng.standard_normal(da) + 1j * rng.standard_normal(da))
        starts_b.append(rng.standard_normal(db) + 1j * rng.standard_normal(db))
    for a0, b0 in init or ():
        starts_a.append(np.asarray(a0, dtype=np.complex128))
        starts_b.append(np.asarray(b0, dtype=np.complex128))
    a_batch = np.stack(starts_a)
    b_batch = np.stack(starts_b)
    a_batch /= np.linalg.norm(a_batch, axis=1)[:, None]
    b_batch /= np.linalg.norm(b_batch, axis=1)[:, None]
    g4 = np.ascontiguousarray(g.reshape(da, db, da, db))
    scale = max(1.0, float(np.linalg.norm(g)))
    vals = None
    for _ in range(40):
        hb = np.einsum("ri,ijkl,rk->rjl", a_batch.conj(), g4, a_batch)
        b_batch, _ = _min_eigvec_batch(_hermitize_batch(hb))
        ha = np.einsum("rj,ijkl,rl->rik", b_batch.conj(), g4, b_batch)
        a_batch, new_vals = _min_eigvec_batch(_hermitize_batch(ha))
        if vals is not None and np.max(np.abs(new_vals - vals)) < 1e-12 * scale:
            vals = new_vals
            break
        vals = new_vals
    best = int(np.argmin(vals))
    return a_batch[best], b_batch[best], float(vals[best])


def _hermitize_batch(h: np.ndarray) -> np.ndarray:
    return (h + h.conj().transpose(0, 2, 1)) / 2.0


def _golden_section(phi, hi: float, f0: float) -> tuple[float, float]:
    """Minimize a scalar convex function on [0, hi]; 40 shrink steps.

    Returns the best probed point, never worse than gamma = 0.
    """
    a, b = 0.0, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = phi(c), phi(d)
    best_g, best_f = 0.0, f0
    for g, fv in ((c, fc), (d, fd)):
        if fv < best_f:
            best_g, best_f = g, fv
    for _ in range(40):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = phi(c)
            if fc < best_f:
                best_g, best_f = c, fc
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = phi(d)
            if fd < best_f:
                best_g, best_f = d, fd
    f_hi = phi(hi)
    if f_hi <= best_f:
        best_g, best_f = hi, f_hi
    return best_g, best_f


def _dd_log_kernel(s: np.ndarray) -> np.ndarray:
    """Divided differences of the natural log over a positive spectrum.

    K[i, j] = (log s_i - log s_j) / (s_i - s_j); pairs closer than
    1e-8 * max(s) (the diagonal included) use the midpoint derivative
    2 / (s_i + s_j), which reduces to 1/s_i on the diagonal.
    """
    s = np.clip(s, _EIG_FLOOR, None)
    diff = s[:, None] - s[None, :]
    near = np.abs(diff) < _DEGEN_RTOL * float(s.max())
    ls = np.log(s)
    with np.errstate(divide="ignore", invalid="ignore"):
        k = (ls[:, None] - ls[None, :]) / diff
    mid = 2.0 / (s[:, None] + s[None, :])
    k[near] = mid[near]
    return k


def ree_objective(rho: DensityMatrix, sigma_mat: np.ndarray) -> float:
    """D(rho || sigma) in bits for a raw candidate matrix, +inf off support."""
    w = np.linalg.eigvalsh(rho.mat)
    top = float(w.max(initial=0.0))
    keep = w > SUPPORT_RTOL * top
    const = float((w[keep] * np.log2(w[keep])).sum()) if keep.any() else 0.0
    return _ree_f(rho.mat, const, _hermitize(_as_complex(sigma_mat)))


def ree_gradient(rho: DensityMatrix, sigma_mat: np.ndarray) -> np.ndarray:
    """Gradient in bits of sigma -> D(rho || sigma) at a full-rank sigma,
    assembled from the divided-difference kernel in sigma's eigenbasis."""
    return _ree_g(rho.mat, _hermitize(_as_complex(sigma_mat)))


def _ree_f(rho_mat: np.ndarray, const: float, sig: np.ndarray) -> float:
    w, v = np.linalg.eigh(sig)
    r = np.einsum("ji,jk,ki->i", v.conj(), rho_mat, v).real
    bad = w <= _EIG_FLOOR
    if np.any(r[bad] > 1e-12):
        return math.inf
    good = ~bad
    return const - float((r[good] * np.log2(w[good])).sum())


def _ree_g(rho_mat: np.ndarray, sig: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(sig)
    k = _dd_log_kernel(w)
    rt = v.conj().T @ rho_mat @ v
    g = v @ (k * rt) @ v.conj().T
    return _hermitize(-g / _LN2)


def _fw_solve(dims, f, grad, *, x_mix, tol_gap, max_iters, restarts, seed,
              away_steps=True, cheap_restarts=4):
    """Conditional-gradient loop shared by all solver entry points.

    Vertices are pure product states, optionally shrunk toward the
    maximally mixed state by x_mix. The active mixture is kept explicit;
    away steps reweight it, which is what lets runs certify small gaps
    instead of crawling at the boundary of the product hull. Stopping
    gaps are re-verified with the full restart budget before they count.
    """
    da, db = dims
    dim = da * db
    tau = np.eye(dim) / dim
    x = float(x_mix)

    eye_a, eye_b = np.eye(da, dtype=np.complex128), np.eye(db, dtype=np.complex128)
    factors = [(eye_a[i], eye_b[j]) for i in range(da) for j in range(db)]
    vstack = np.eye(dim, dtype=np.complex128)  # joint vectors, one row per atom
    u = np.full(dim, 1.0 / dim)
    sigma = tau.copy()
    f_cur = f(sigma)
    rng = _as_rng(seed)
    warm = None
    trace = []
    flags = set()
    converged = False

    def atom_matrix(vec):
        return x * np.outer(vec, vec.conj()) + (1.0 - x) * tau

    def rebuild():
        nonlocal sigma, f_cur, u, vstack, factors
        keepers = u > 1e-14
        if not keepers.all():
            u = u[keepers]
            vstack = vstack[keepers]
            factors = [fc for fc, k in zip(factors, keepers) if k]
        u = u / u.sum()
        prod = (vstack * u[:, None]).T @ vstack.conj()
        sigma = _hermitize(x * prod + (1.0 - x) * tau)
        f_cur = f(sigma)

    def certificate(n_starts):
        # The plain gap degenerates when the optimum touches the boundary
        # (log gradient diverges), so also certify at points nudged toward
        # the maximally mixed state: every nudge is feasible, hence gives
        # a valid interval, and the tightest combination is reported.
        best_upper, best_lower, best_delta = math.inf, -math.inf, 0.0
        for delta in (0.0, 1e-9, 1e-7, 1e-5, 1e-3):
            sig_c = sigma if delta == 0.0 else \
                _hermitize((1.0 - delta) * sigma + delta * tau)
            fc = f(sig_c)
            g = grad(sig_c)
            tr_gs = float(np.einsum("ij,ji->", g, sig_c).real)
            tr_gt = float(np.trace(g).real) / dim
            _, _, v = lmo_product(g, dims, restarts=n_starts, seed=rng,
                                  init=[warm] if warm is not None else None)
            gap_c = max(tr_gs - (x * v + (1.0 - x) * tr_gt), 0.0)
            if fc < best_upper:
                best_upper, best_delta = fc, delta
            best_lower = max(best_lower, fc - gap_c)
        return best_upper, best_lower, best_delta

    iterations = 0
    for t in range(1, max_iters + 1):
        iterations = t
        g = grad(sigma)
        tr_gs = float(np.einsum("ij,ji->", g, sigma).real)
        tr_gtau = float(np.trace(g).real) / dim
        a, b, v_lmo = lmo_product(g, dims, restarts=cheap_restarts, seed=rng,
                                  init=[warm] if warm is not None else None)
        gap = tr_gs - (x * v_lmo + (1.0 - x) * tr_gtau)
        if gap <= tol_gap:
            a2, b2, v2 = lmo_product(g, dims, restarts=restarts, seed=rng, init=[(a, b)])
            if v2 < v_lmo:
                a, b, v_lmo = a2, b2, v2
                gap = tr_gs - (x * v_lmo + (1.0 - x) * tr_gtau)
            if gap <= tol_gap:
                converged = True
                trace.append((t, f_cur, max(gap, 0.0)))
                break

        away_j = -1
        if away_steps and len(u) > 1:
            scores = x * np.einsum("ni,ij,nj->n", vstack.conj(), g, vstack).real \
                + (1.0 - x) * tr_gtau
            j = int(np.argmax(scores))
            if scores[j] - tr_gs > gap and u[j] < 1.0 - 1e-12:
                away_j = j

        vec = (a[:, None] * b[None, :]).reshape(-1)
        snap = -1
        if away_j < 0:
            ov = np.abs(vstack.conj() @ vec)
            cand = int(np.argmax(ov))
            if 1.0 - ov[cand] ** 2 < 1e-13:
                snap = cand
                vec = vstack[cand]
                a, b = factors[cand]

        def try_step(use_away: bool):
            if use_away:
                direction = sigma - atom_matrix(vstack[away_j])
                hi = min(u[away_j] / max(1.0 - u[away_j], 1e-12), 1e9)
            else:
                direction = atom_matrix(vec) - sigma
                hi = 1.0
            gma, fnew = _golden_section(lambda s: f(sigma + s * direction), hi, f_cur)
            if not use_away and fnew >= f_cur - 1e-15:
                fb = 2.0 / (t + 2.0)
                ffb = f(sigma + fb * direction)
                if ffb < fnew:
                    gma, fnew = fb, ffb
            return gma, fnew, direction

        order = (True, False) if away_j >= 0 else (False,)
        stepped = False
        for use_away in order:
            gma, fnew, direction = try_step(use_away)
            if fnew < f_cur - 1e-15:
                if use_away:
                    u = (1.0 + gma) * u
                    u[away_j] -= gma
                    if u[away_j] < 1e-14:
                        u[away_j] = 0.0
                else:
                    u = (1.0 - gma) * u
                    if snap >= 0:
                        u[snap] += gma
                    else:
                        u = np.append(u, gma)
                        vstack = np.vstack([vstack, vec])
                        factors.append((a, b))
                    warm = (a, b)
                sigma = _hermitize(sigma + gma * direction)
                f_cur = fnew
                stepped = True
                break
        trace.append((t, f_cur, max(gap, 0.0)))
        if not stepped:
            flags.add("stalled")
            break
        if t % 100 == 0:
            rebuild()
    else:
        flags.add("max_iters")

    rebuild()
    g = grad(sigma)
    tr_gs = float(np.einsum("ij,ji->", g, sigma).real)
    tr_gtau = float(np.trace(g).real) / dim
    _, _, v_fin = lmo_product(g, dims, restarts=restarts, seed=rng,
                              init=[warm] if warm is not None else None)
    final_gap = max(tr_gs - (x * v_fin + (1.0 - x) * tr_gtau), 0.0)
    converged = final_gap <= tol_gap
    if converged:
        flags.discard("max_iters")
        flags.discard("stalled")
    trace.append((iterations, f_cur, final_gap))
    point = SepPoint((da, db), u, tuple(factors))
    return f_cur, point, final_gap, iterations, tuple(trace), converged, flags


def fw_ree(rho: DensityMatrix, tol_gap: float = 1e-4, max_iters: int = 5000,
           seed=0, restarts: int = 20, away_steps: bool = True) -> FwResult:
    """Relative entropy of entanglement upper solve.

    Minimizes D(rho || sigma) in bits over the explicit separable
    mixture, starting from the maximally mixed state. Non-convergence
    within max_iters is reported through flags, never raised.
    """
    if len(rho.dims) != 2:
        raise ShapeError(f"expected a bipartite state, got dims {rho.dims}")
    w = np.linalg.eigvalsh(rho.mat)
    keep = w > SUPPORT_RTOL * float(w.max(initial=0.0))
    const = float((w[keep] * np.log2(w[keep])).sum()) if keep.any() else 0.0
    rho_mat = rho.mat

    value, point, gap, iters, trace, converged, flags = _fw_solve(
        rho.dims, lambda s: _ree_f(rho_mat, const, s), lambda s: _ree_g(rho_mat, s),
        x_mix=1.0, tol_gap=tol_gap, max_iters=max_iters, restarts=restarts,
        seed=seed, away_steps=away_steps)
    return FwResult(value, point, gap, iters, trace, converged, tuple(sorted(flags)))


def _measured_problem(m, rho: DensityMatrix):
    if isinstance(m, OneWayLoccPovm):
        m = onelocc_to_povm(m)
    if not isinstance(m, Povm):
        raise ShapeError("expected a Povm or OneWayLoccPovm")
    p = apply_povm(m, rho).probs
    sup = p > SUPPORT_RTOL * float(p.max())
    psup = p[sup]
    mstack = np.stack([m.elements[i] for i in np.flatnonzero(sup)])
    const = float((psup * np.log2(psup)).sum())
    floored = {"hit": False}

    def f(sig):
        q = np.einsum("oij,ji->o", mstack, sig).real
        if q.min() < _Q_FLOOR:
            floored["hit"] = True
            q = np.clip(q, _Q_FLOOR, None)
        return const - float((psup * np.log2(q)).sum())

    def grad(sig):
        q = np.einsum("oij,ji->o", mstack, sig).real
        if q.min() < _Q_FLOOR:
            floored["hit"] = True
            q = np.clip(q, _Q_FLOOR, None)
        coef = psup / q
        g = -np.tensordot(coef, mstack, axes=1) / _LN2
        return _hermitize(g)

    return m, f, grad, floored


def fw_measured_ree(m, rho: DensityMatrix, tol_gap: float = 1e-4,
                    max_iters: int = 2000, seed=0, restarts: int = 20,
                    away_steps: bool = True) -> FwResult:
    """Minimum of D(M(rho) || M(sigma)) in bits over separable sigma for a
    fixed measurement M. Outcome probabilities of candidates are floored
    at 1e-15 where the state's probability is positive; runs that hit the
    floor carry a q_floor flag."""
    m, f, grad, floored = _measured_problem(m, rho)
    if len(m.dims) != 2 or tuple(m.dims) != tuple(rho.dims):
        raise ShapeError(f"measurement dims {m.dims} do not match state dims {rho.dims}")
    value, point, gap, iters, trace, converged, flags = _fw_solve(
        m.dims, f, grad, x_mix=1.0, tol_gap=tol_gap, max_iters=max_iters,
        restarts=restarts, seed=seed, away_steps=away_steps)
    if floored["hit"]:
        flags.add("q_floor")
    return FwResult(value, point, gap, iters, trace, converged, tuple(sorted(flags)))


def onelocc_ree_lower_bound(rho: DensityMatrix, family, per_m_tol: float = 1e-3,
                            seed=0, max_iters: int = 1500) -> OneLoccBound:
    """Certified lower bound on the one-way-local relative entropy of
    entanglement from a finite measurement family.

    Only members implementable with local measurements (OneWayLoccPovm,
    or Povm tagged LO or ONE_LOCC) are admissible; others are skipped, so
    a family containing e.g. a PPT-only test still yields a sound bound.
    The reported bound is the best per-measurement solver value; subtract
    `slack` (that run's duality gap) for the fully certified number.
    """
    indices = []
    members = []
    for i, m in enumerate(family):
        if isinstance(m, OneWayLoccPovm) or (isinstance(m, Povm) and m.class_tag in ("LO", "ONE_LOCC")):
            indices.append(i)
            members.append(m)
    if not members:
        raise DomainError("family has no local-measurement members")
    values = []
    gaps = []
    rng = _as_rng(seed)
    for m in members:
        res = fw_measured_ree(m, rho, tol_gap=per_m_tol, max_iters=max_iters,
                              seed=rng)
        values.append(res.value)
        gaps.append(res.duality_gap)
    best = int(np.argmax(values))
    return OneLoccBound(
        bound=float(values[best]),
        best_index=indices[best],
        slack=float(gaps[best]),
        indices=tuple(indices),
        values=tuple(values),
        gaps=tuple(gaps),
    )


def mixed_set_ree(rho: DensityMatrix, x: float, tol_gap: float = 1e-4,
                  max_iters: int = 3000, seed=0, restarts: int = 20) -> FwResult:
    """Relative entropy distance to the separable set shrunk toward the
    maximally mixed state by weight x.

    Every vertex is x * (pure product) + (1 - x) * (maximally mixed), so
    x = 1 recovers the plain solve and x = 0 collapses the feasible set
    to the maximally mixed state alone, where the distance has the
    closed form log2(dim) - S(rho). The result's sigma is the separable
    component; the optimizer itself is x * sigma + (1 - x) * mixed.
    """
    if len(rho.dims) != 2:
        raise ShapeError(f"expected a bipartite state, got dims {rho.dims}")
    x = float(x)
    if x < 0.0 or x > 1.0:
        raise DomainError(f"mixing weight {x} outside [0, 1]")
    da, db = rho.dims
    dim = da * db
    w = np.linalg.eigvalsh(rho.mat)
    keep = w > SUPPORT_RTOL * float(w.max(initial=0.0))
    const = float((w[keep] * np.log2(w[keep])).sum()) if keep.any() else 0.0
    if x == 0.0:
        value = math.log2(dim) + const
        eye_a, eye_b = np.eye(da, dtype=np.complex128), np.eye(db, dtype=np.complex128)
        tau_point = SepPoint((da, db), np.full(dim, 1.0 / dim),
                             tuple((eye_a[i], eye_b[j]) for i in range(da) for j in range(db)))
        return FwResult(value, tau_point, 0.0, 0, ((0, value, 0.0),), True,
                        ("closed_form",), mix_x=0.0)
    rho_mat = rho.mat
    value, point, gap, iters, trace, converged, flags = _fw_solve(
        rho.dims, lambda s: _ree_f(rho_mat, const, s), lambda s: _ree_g(rho_mat, s),
        x_mix=x, tol_gap=tol_gap, max_iters=max_iters, restarts=restarts, seed=seed)
    flags.add(f"mixed_set_x={x:g}")
    return FwResult(value, point, gap, iters, trace, converged,
                    tuple(sorted(flags)), mix_x=x)
