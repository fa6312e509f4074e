"""Randomized verification batteries.

Each battery draws seeded samples, checks one inequality or closed form,
and reports violations with worst-case margins. Margins are always
LHS - RHS of the claimed inequality, so negative means violated; solver
slack (duality gaps) is added explicitly on the side where solver bias
could otherwise mask a violation, never silently absorbed.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .entropy import classical_rel_entropy, cond_mutual_info, eta, vn_entropy
from .matqi import (
    DensityMatrix,
    DomainError,
    isotropic,
    max_entangled,
    partial_trace,
    random_density,
    random_pure,
    trace_norm,
)
from .povm import (
    OneWayLoccPovm,
    Povm,
    apply_povm,
    comp_basis_povm,
    iso_two_outcome_povm,
    is_ppt_element,
    measured_distance,
    measured_rel_entropy,
    onelocc_to_povm,
    random_onelocc_povm,
    twirl_basis_povm,
)
from .sepopt import fw_measured_ree, fw_ree, onelocc_ree_lower_bound

TOL_CHECK = 1e-6


@dataclass(frozen=True)
class CheckReport:
    """Battery outcome; reproducible from (check, params, seed)."""

    check: str
    params: dict
    seed: int
    samples: int
    violations: int
    worst_margin: float
    records: tuple[dict, ...]

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_json(self) -> dict:
        return {
            "check": self.check,
            "params": self.params,
            "seed": self.seed,
            "samples": self.samples,
            "violations": self.violations,
            "worst_margin": self.worst_margin,
            "records": list(self.records),
        }


def _make_report(check: str, params: dict, seed: int, records) -> CheckReport:
    records = tuple(records)
    margins = [r["margin"] for r in records if not r.get("skipped", False)]
    violations = sum(1 for m in margins if m < -TOL_CHECK)
    worst = float(min(margins)) if margins else math.inf
    return CheckReport(check=check, params=params, seed=seed,
                       samples=len(records), violations=violations,
                       worst_margin=worst, records=records)


def parallel_map(fn, items, jobs: int = 1):
    """Order-preserving map; forks worker processes when jobs > 1.

    Sample seeds are derived from indices, never from job layout, so the
    result is identical for every jobs value.
    """
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _rng_for(seed: int, *path: int) -> np.random.Generator:
    return np.random.default_rng([int(seed)] + [int(p) for p in path])


def default_family(dims, seed: int = 0, n_random: int = 8) -> list:
    """Standard measurement family for a bipartition: the computational
    product basis, the twirl-then-basis procedure and the isotropic
    two-outcome test when the sides match, plus seeded random one-way
    measurements. Mixes known-optimal probes with generic ones."""
    da, db = dims
    family: list = [comp_basis_povm((da, db))]
    if da == db:
        family.append(twirl_basis_povm(da))
        family.append(iso_two_outcome_povm(da))
    for i in range(n_random):
        family.append(random_onelocc_povm((da, db), da, db,
                                          seed=_rng_for(seed, 7001, i)))
    return family


def admissible_local(family) -> list[int]:
    """Indices of members usable for one-way-local lower bounds."""
    keep = []
    for i, m in enumerate(family):
        if isinstance(m, OneWayLoccPovm) or \
                (isinstance(m, Povm) and m.class_tag in ("LO", "ONE_LOCC")):
            keep.append(i)
    return keep


# -- closed-form table ------------------------------------------------------

def check_phi_table(d_max: int) -> CheckReport:
    """Maximally entangled state against its separable isotropic partner.

    Per rank d: the twirl-then-basis value and the two-outcome test both
    hit log2(d+1) - 1; no PPT two-outcome isotropic test beats it on a
    sweep grid; and over separable isotropic candidates the boundary
    point minimizes the measured divergence.
    """
    if not 2 <= d_max <= 6:
        raise DomainError(f"d_max {d_max} outside [2, 6]")
    records = []
    for d in range(2, d_max + 1):
        closed = math.log2(d + 1) - 1.0
        phi = max_entangled(d)
        iso_sep = isotropic(d, 1.0 / (d + 1))
        lo_value = measured_rel_entropy(twirl_basis_povm(d), phi, iso_sep)
        two_value = measured_rel_entropy(iso_two_outcome_povm(d), phi, iso_sep)

        # sweep over two-outcome tests a*Phi + b*(I-Phi) with both
        # elements PPT: b >= a/(d+1) and (1-b) >= (1-a)/(d+1)
        phi_mat = phi.mat
        eye = np.eye(d * d)
        grid = list(np.linspace(0.0, 1.0, 21)) + [1.0 / (d + 1)]
        sweep_max = -math.inf
        checked_ppt = False
        for a in grid:
            for b in grid:
                if b < a / (d + 1) or (1.0 - b) < (1.0 - a) / (d + 1):
                    continue
                m0 = a * phi_mat + b * (eye - phi_mat)
                if not checked_ppt:
                    # matrix-level cross-check of the closed-form condition
                    if not (is_ppt_element(m0, (d, d)) and
                            is_ppt_element(eye - m0, (d, d))):
                        records.append({"d": d, "margin": -1.0,
                                        "detail": "ppt condition mismatch"})
                    checked_ppt = True
                pr = float(np.trace(phi_mat @ m0).real)
                qr = float(np.trace(iso_sep.mat @ m0).real)
                val = classical_rel_entropy(
                    np.array([pr, 1.0 - pr]), np.array([qr, 1.0 - qr]))
                sweep_max = max(sweep_max, val)

        # separable isotropic candidates: boundary p should minimize
        m_twirl = twirl_basis_povm(d)
        p_lo = -1.0 / (d * d - 1.0)
        p_grid = np.linspace(p_lo, 1.0 / (d + 1), 41)
        vals = []
        for pv in p_grid:
            v = measured_rel_entropy(m_twirl, phi, isotropic(d, float(pv)))
            formula = -math.log2(pv + (1.0 - pv) / d)
            if abs(v - formula) > 1e-9:
                vals.append(math.nan)
            else:
                vals.append(v)
        vals = np.asarray(vals)
        argmin_margin = float(np.min(vals - vals[-1]))

        margin = min(
            1e-9 - abs(lo_value - closed),
            1e-9 - abs(two_value - closed),
            (closed + 1e-6) - sweep_max,
            argmin_margin + 1e-9,
        )
        records.append({
            "d": d, "closed_form": closed, "lo_value": lo_value,
            "two_outcome_value": two_value, "sweep_max": sweep_max,
            "boundary_argmin_margin": argmin_margin, "margin": margin,
        })
    return _make_report("phi_table", {"d_max": d_max}, 0, records)


# -- inequality batteries ---------------------------------------------------

def _classical_extension_sample(args):
    dims, ensemble_size, seed, idx = args
    rng = _rng_for(seed, 11, idx)
    da, db = dims
    weights = rng.dirichlet(np.ones(ensemble_size))
    members = [random_density(dims, seed=rng) for _ in range(ensemble_size)]
    mix = sum(w * s.mat for w, s in zip(weights, members))
    k = ensemble_size
    ext = np.zeros((da * db * k, da * db * k), dtype=np.complex128)
    for i, (w, s) in enumerate(zip(weights, members)):
        ext += w * np.kron(s.mat, np.outer(np.eye(k)[i], np.eye(k)[i]))
    rho_abe = DensityMatrix((da, db, k), ext)
    lhs = cond_mutual_info(rho_abe)
    # looser gap than the headline solves: the gap is subtracted from the
    # right side anyway, so this trades a slightly weaker (still sound)
    # check for battery throughput
    res = fw_ree(DensityMatrix(dims, mix), tol_gap=1e-3, max_iters=600,
                 seed=_rng_for(seed, 12, idx))
    rhs = res.value - res.duality_gap
    return {"index": idx, "cmi": lhs, "ree_value": res.value,
            "ree_gap": res.duality_gap, "flags": list(res.flags),
            "margin": lhs - rhs}


def check_classical_extension_bound(samples: int, dims=(2, 2),
                                    ensemble_size: int = 3, seed: int = 0,
                                    jobs: int = 1) -> CheckReport:
    """Conditional mutual information of a classical-register extension
    against the certified lower edge of the mixture's relative entropy
    of entanglement."""
    if ensemble_size < 1:
        raise DomainError("ensemble_size must be at least 1")
    args = [(tuple(dims), ensemble_size, seed, i) for i in range(samples)]
    records = parallel_map(_classical_extension_sample, args, jobs)
    return _make_report("classical_extension",
                        {"dims": list(dims), "ensemble_size": ensemble_size},
                        seed, records)


def _ssa_sample(args):
    family, dims, seed, idx = args
    rng = _rng_for(seed, 21, idx)
    rho_abe = random_density(dims, seed=rng)
    lhs = cond_mutual_info(rho_abe)
    rho_ab = partial_trace(rho_abe, (0, 1))
    res = onelocc_ree_lower_bound(rho_ab, family, per_m_tol=1e-3,
                                  seed=_rng_for(seed, 22, idx), max_iters=600)
    rhs = res.bound - res.slack
    return {"index": idx, "cmi": lhs, "bound": res.bound, "slack": res.slack,
            "best_index": res.best_index, "margin": lhs - rhs}


def check_ssa_strengthening(samples: int, dims=(2, 2, 2), family=None,
                            seed: int = 0, jobs: int = 1) -> CheckReport:
    """Conditional mutual information against the certified one-way-local
    lower bound on the marginal's entanglement."""
    dims = tuple(dims)
    if family is None:
        family = default_family(dims[:2], seed=seed)
    if not admissible_local(family):
        raise DomainError("family has no local-measurement members")
    args = [(family, dims, seed, i) for i in range(samples)]
    records = parallel_map(_ssa_sample, args, jobs)
    return _make_report("ssa_strengthening",
                        {"dims": list(dims), "family_size": len(family)},
                        seed, records)


def _pinsker_sample(args):
    family, dims, seed, idx = args
    rng = _rng_for(seed, 31, idx)
    rho_abe = random_density(dims, seed=rng)
    lhs = 0.5 * cond_mutual_info(rho_abe)
    rho_ab = partial_trace(rho_abe, (0, 1))
    local = [family[i] for i in admissible_local(family)]
    flats = [onelocc_to_povm(m) if isinstance(m, OneWayLoccPovm) else m
             for m in local]
    # candidate separable states found by the measured solvers, plus the
    # maximally mixed state; each is separable by construction, so the
    # candidate minimum can only overestimate the true one: the check can
    # false-fail but never false-pass
    dim = dims[0] * dims[1]
    candidates = [DensityMatrix(dims[:2], np.eye(dim) / dim)]
    for m in local:
        res = fw_measured_ree(m, rho_ab, tol_gap=1e-3, max_iters=400,
                              seed=_rng_for(seed, 32, idx))
        candidates.append(res.sigma.density())
    dist = min(measured_distance(local, rho_ab, c) for c in candidates)
    rhs = dist * dist / (4.0 * math.log(2.0))
    # classical Pinsker with constant 1/(2 ln 2) on every measured pair;
    # an infinite divergence satisfies the bound trivially
    classical_margin = math.inf
    for m in flats:
        p_m = apply_povm(m, rho_ab).probs
        for c in candidates:
            q_m = apply_povm(m, c).probs
            d_cl = classical_rel_entropy(p_m, q_m)
            l1 = float(np.abs(p_m - q_m).sum())
            classical_margin = min(
                classical_margin, d_cl - l1 * l1 / (2.0 * math.log(2.0)))
    margin = min(lhs - rhs, classical_margin)
    return {"index": idx, "half_cmi": lhs, "dist_bound": dist,
            "chain_margin": lhs - rhs, "classical_margin": classical_margin,
            "margin": margin}


def check_pinsker_chain(samples: int, dims=(2, 2, 2), family=None,
                        seed: int = 0, jobs: int = 1) -> CheckReport:
    """Squared-distance chain: half the conditional mutual information
    against 1/(4 ln 2) times the squared measured distance to the best
    separable candidate, plus classical Pinsker on measured pairs."""
    dims = tuple(dims)
    if family is None:
        family = default_family(dims[:2], seed=seed)
    if not admissible_local(family):
        raise DomainError("family has no local-measurement members")
    args = [(family, dims, seed, i) for i in range(samples)]
    records = parallel_map(_pinsker_sample, args, jobs)
    return _make_report("pinsker_chain",
                        {"dims": list(dims), "family_size": len(family)},
                        seed, records)


def _family_ree(family, rho, seed_rng, tol_gap=1e-3, max_iters=400):
    best = -math.inf
    worst_gap = 0.0
    for m in family:
        res = fw_measured_ree(m, rho, tol_gap=tol_gap, max_iters=max_iters,
                              seed=seed_rng)
        best = max(best, res.value)
        worst_gap = max(worst_gap, res.duality_gap)
    return best, worst_gap


def _continuity_sample(args):
    family, dims, eps_grid, seed, idx = args
    rng = _rng_for(seed, 41, idx)
    rho = random_density(dims, seed=rng)
    far = random_density(dims, seed=rng)
    reach = measured_distance(family, rho, far)
    k = dims[0] * dims[1]
    e0, g0 = _family_ree(family, rho, _rng_for(seed, 42, idx))
    out = []
    for eps in eps_grid:
        if eps > 1.0 / math.e + 1e-12:
            raise DomainError(f"eps {eps} beyond 1/e")
        if reach < eps:
            out.append({"index": idx, "eps": eps, "skipped": True,
                        "detail": "eps unreachable by mixing", "margin": math.inf})
            continue
        # bisection on the mixing weight; the distance is monotone in it
        lo, hi = 0.0, 1.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            mix = DensityMatrix(dims, (1.0 - mid) * rho.mat + mid * far.mat)
            if measured_distance(family, rho, mix) < eps:
                lo = mid
            else:
                hi = mid
        mix = DensityMatrix(dims, (1.0 - hi) * rho.mat + hi * far.mat)
        achieved = measured_distance(family, rho, mix)
        e1, g1 = _family_ree(family, mix, _rng_for(seed, 43, idx))
        bound = 2.0 * achieved * math.log2(6.0 * k / achieved)
        margin = bound + g0 + g1 - abs(e0 - e1)
        out.append({"index": idx, "eps": eps, "achieved_eps": achieved,
                    "diff": abs(e0 - e1), "bound": bound,
                    "slack": g0 + g1, "margin": margin})
    return out


def check_asymptotic_continuity(samples: int, dims=(2, 2), family=None,
                                eps_grid=(0.01, 0.05, 0.1), seed: int = 0,
                                jobs: int = 1) -> CheckReport:
    """Fixed-family measured entanglement under measured-distance
    perturbations against the 2 eps log2(6k/eps) continuity bound."""
    dims = tuple(dims)
    if family is None:
        family = default_family(dims, seed=seed)
    args = [(family, dims, tuple(eps_grid), seed, i) for i in range(samples)]
    nested = parallel_map(_continuity_sample, args, jobs)
    records = [r for chunk in nested for r in chunk]
    return _make_report("asymptotic_continuity",
                        {"dims": list(dims), "eps_grid": list(eps_grid),
                         "family_size": len(family)},
                        seed, records)


def _dh_sample(args):
    dims, seed, idx = args
    rng = _rng_for(seed, 51, idx)
    rho1 = random_density(dims, seed=rng)
    other = random_density(dims, seed=rng)
    t_full = trace_norm(rho1.mat - other.mat)
    w_max = min(1.0, (1.0 / math.e) / max(t_full, 1e-12))
    w = float(rng.uniform(0.1, 1.0)) * w_max
    rho2 = DensityMatrix(dims, (1.0 - w) * rho1.mat + w * other.mat)
    t = trace_norm(rho1.mat - rho2.mat)
    # gap-loose solves; both gaps are added to the bound side explicitly
    r1 = fw_ree(rho1, tol_gap=1e-3, max_iters=600, seed=_rng_for(seed, 52, idx))
    r2 = fw_ree(rho2, tol_gap=1e-3, max_iters=600, seed=_rng_for(seed, 53, idx))
    bound = 2.0 * (2.0 + math.log2(dims[0]) + math.log2(dims[1])) * t \
        + 2.0 * eta(t)
    margin = bound + r1.duality_gap + r2.duality_gap - abs(r1.value - r2.value)
    return {"index": idx, "trace_dist": t, "e1": r1.value, "e2": r2.value,
            "bound": bound, "slack": r1.duality_gap + r2.duality_gap,
            "margin": margin}


def check_donald_horodecki(samples: int, dims=(2, 2), seed: int = 0,
                           jobs: int = 1) -> CheckReport:
    """Entanglement difference of nearby states against the trace-norm
    continuity bound 2(2 + log2 dA + log2 dB) t + 2 eta(t), t <= 1/e."""
    args = [(tuple(dims), seed, i) for i in range(samples)]
    records = parallel_map(_dh_sample, args, jobs)
    return _make_report("donald_horodecki", {"dims": list(dims)}, seed, records)


def _pure_sample(args):
    family, dims, seed, idx = args
    rng = _rng_for(seed, 61, idx)
    psi = random_pure(dims, seed=rng).density()
    closed = vn_entropy(partial_trace(psi, (0,)))
    res = fw_ree(psi, tol_gap=1e-4, max_iters=2000, seed=_rng_for(seed, 62, idx))
    closed_margin = (res.duality_gap + 1e-3) - abs(res.value - closed)
    lower_margin = math.inf
    for m in family:
        mr = fw_measured_ree(m, psi, tol_gap=1e-3, max_iters=400,
                             seed=_rng_for(seed, 63, idx))
        lower_margin = min(lower_margin,
                           res.value - (mr.value - mr.duality_gap))
    return {"index": idx, "entropy": closed, "ree_value": res.value,
            "ree_gap": res.duality_gap, "closed_margin": closed_margin,
            "lower_margin": lower_margin,
            "margin": min(closed_margin, lower_margin)}


def check_pure_state_entropy(samples: int, dims=(2, 2), seed: int = 0,
                             jobs: int = 1) -> CheckReport:
    """Pure-state closed form: solver value equals the reduced-state
    entropy within gap + 1e-3, and no family lower bound exceeds it."""
    dims = tuple(dims)
    family = default_family(dims, seed=seed)
    args = [(family, dims, seed, i) for i in range(samples)]
    records = parallel_map(_pure_sample, args, jobs)
    return _make_report("pure_state_entropy", {"dims": list(dims)}, seed, records)


BATTERIES = {
    "phi": check_phi_table,
    "classical-extension": check_classical_extension_bound,
    "ssa": check_ssa_strengthening,
    "pinsker": check_pinsker_chain,
    "continuity": check_asymptotic_continuity,
    "donald-horodecki": check_donald_horodecki,
    "pure-entropy": check_pure_state_entropy,
}
