"""Property suites run by ``r1lab verify-all``.

Each suite takes a seed and a sample count and returns a list of
VerificationReports. Sub-seeds are derived from (seed, suite tag), so suites
can run in any order without affecting each other.
"""
from __future__ import annotations

from typing import Callable

import numpy as np

from . import integrands as zoo
from .convexity import (
    ScanConfig,
    convexity_along_segment,
    euler_check,
    fit_on_samples,
    homogeneity_bound_check,
    homogeneity_check,
    isotropy_check,
    minor_dependence_rank,
    rank_one_scan,
    rank_one_scan_many,
    zigzag_scan,
)
from .integrands import COMPLEX_PAIR, IntegrandHandle
from .laminate import DiscreteMeasure, choquet_decompose_1d, default_family, jensen_gap, test_measure
from .matrix_core import (
    FULL,
    SYMMETRIC,
    conformal_norms,
    minor_specs,
    minors_array,
    signed_svd,
)
from .prelaminate import (
    HomSplitRequest,
    diagonal_homogeneity_split,
    h_coefficient,
    lemma_hom_split,
    to_measure,
    verify_prelaminate,
)
from .reports import VerificationReport

BURKHOLDER_EXPONENTS = (1.2, 1.5, 2.0, 3.0)


def _rng(seed: int, tag: str) -> np.random.Generator:
    return np.random.default_rng([seed, *tag.encode()])


def _bound(name: str, err, tol, details: dict | None = None) -> VerificationReport:
    """Pass iff err <= tol elementwise; the worst offender is reported."""
    err = np.atleast_1d(np.asarray(err, dtype=float))
    tol = np.broadcast_to(np.asarray(tol, dtype=float), err.shape)
    excess = np.where(err <= tol, 0.0, np.nan_to_num(err - tol, nan=np.inf))
    worst = int(np.argmax(excess)) if err.size else 0
    ok = bool(np.all(err <= tol))
    failures = [] if ok else [{"sample": worst, "error": float(err[worst]),
                               "tolerance": float(tol[worst])}]
    info = {"samples": int(err.size), "max_error": float(np.max(err)) if err.size else 0.0}
    info.update(details or {})
    return VerificationReport(name, ok, failures, info)


def _check(name: str, ok: bool, details: dict | None = None) -> VerificationReport:
    return VerificationReport(name, bool(ok), [] if ok else [{"check": name}], details or {})


def zoo_members(n: int) -> list[IntegrandHandle]:
    """Rank-one convex zoo members on n x n matrices (plus the complex-pair ones)."""
    out = [zoo.det_plus(n), zoo.det_minus(n), zoo.abs_det(n), zoo.sq_norm(n)]
    out += [zoo.truncated_minor(s, sign, n) for s in minor_specs(n) if s.order < n for sign in "+-"]
    out += [zoo.sverak_F(k, n) for k in range(n + 1)]
    out += [zoo.burkholder(p) for p in BURKHOLDER_EXPONENTS]
    out += [zoo.burkholder_plus(p) for p in BURKHOLDER_EXPONENTS]
    out.append(zoo.sverak_L())
    if n == 2:
        out += [zoo.lift_to_matrix(zoo.burkholder_plus(p)) for p in BURKHOLDER_EXPONENTS]
    return out


# ---------------------------------------------------------------------------
# matrix_core


def matrix_core_suite(seed: int, samples: int) -> list[VerificationReport]:
    rng = _rng(seed, "matrix_core")
    out = []
    errs, tols = [], []
    for n in (2, 3, 4):
        for A in rng.uniform(-3, 3, (samples, n, n)):
            svd = signed_svd(A)
            errs.append(np.linalg.norm(svd.reconstruct() - A))
            tols.append(1e-10 * (1 + np.linalg.norm(A)))
    out.append(_bound("signed_svd reconstructs A", errs, tols))

    A = rng.uniform(-3, 3, (samples, 2, 2))
    zp, zm = conformal_norms(A)
    sig = np.array([signed_svd(a).sigma for a in A])
    err = np.maximum(np.abs(sig[:, 0] - (zp + zm) / np.sqrt(2)),
                     np.abs(sig[:, 1] - (zp - zm) / np.sqrt(2)))
    out.append(_bound("signed singular values from the conformal split", err, 1e-10))
    out.append(_bound("2 det = |A+|^2 - |A-|^2", np.abs(2 * np.linalg.det(A) - (zp ** 2 - zm ** 2)), 1e-10))

    u, v = rng.standard_normal((2, samples, 2))
    zp, zm = conformal_norms(u[:, :, None] * v[:, None, :])
    out.append(_bound("rank-one X has |X+| = |X-|", np.abs(zp - zm), 1e-10))

    n = 4
    errs, tols = [], []
    for s in range(1, n):
        A = rng.standard_normal((samples, n, s)) @ rng.standard_normal((samples, s, n))
        scale = 1 + np.linalg.norm(A, axis=(1, 2))
        for order in range(s + 1, n + 1):
            m = np.abs(minors_array(A, order=order)).max(axis=1)
            errs.extend(m)
            tols.extend(1e-10 * scale ** order)
    out.append(_bound("minors above the rank vanish", errs, tols))
    return out


# ---------------------------------------------------------------------------
# integrand_zoo


def _sym(rng, count, n, R=2.0):
    a = rng.uniform(-R, R, (count, n, n))
    return (a + np.swapaxes(a, 1, 2)) / 2


def integrand_suite(seed: int, samples: int) -> list[VerificationReport]:
    rng = _rng(seed, "integrand_zoo")
    out = []
    for n in (2, 3):
        A = rng.uniform(-2, 2, (samples, n, n))
        gap = np.abs(zoo.abs_det(n)(A) - zoo.det_plus(n)(A) - zoo.det_minus(n)(A))
        out.append(_bound(f"|det| = det+ + det- (n={n})", gap, 1e-12))

    for n in (2, 3, 4):
        S = _sym(rng, samples, n)
        F = np.array([zoo.sverak_F(k, n)(S) for k in range(n + 1)])
        even, odd = F[0::2].sum(axis=0), F[1::2].sum(axis=0)
        err = np.maximum(np.abs(zoo.det_plus(n)(S) - even), np.abs(zoo.det_minus(n)(S) - odd))
        out.append(_bound(f"det+- = sums of F_k by index parity (n={n})", err, 1e-12))

    for p in BURKHOLDER_EXPONENTS + (1.5, 4.0):
        c = zoo.burkholder_constant(p)
        z = rng.uniform(0.1, 2, samples) * np.exp(1j * rng.uniform(0, 2 * np.pi, samples))
        w = c * np.abs(z) * np.exp(1j * rng.uniform(0, 2 * np.pi, samples))
        vals = zoo.burkholder(p)(np.stack([z, w], axis=-1))
        out.append(_bound(f"B_p vanishes on its cone (p={p:g})", np.abs(vals),
                          1e-12 * (np.abs(z) + np.abs(w)) ** p))

    cfg = ScanConfig(seed=seed, n_base_points=samples)
    for n in (2, 3):
        for f in zoo_members(n):
            if f.domain == COMPLEX_PAIR and n == 3:
                continue
            if f.homogeneity is not None:
                rep = homogeneity_check(f, cfg, n=n)
                rep.name += f" (n={n})" if f.domain != COMPLEX_PAIR else ""
                out.append(rep)
            if f.isotropic:
                rep = isotropy_check(f, cfg, n=n)
                rep.name += f" (n={n})" if f.domain != COMPLEX_PAIR else ""
                out.append(rep)

    # L on the switching curve |z| + |w| = 1
    r = rng.uniform(0, 1, samples)
    az, aw = r, 1 - r
    out.append(_bound("L continuous across |z| + |w| = 1",
                      np.abs((az * az - aw * aw) - (2 * az - 1)), 1e-12))
    return out


# ---------------------------------------------------------------------------
# prelaminate_engine


def lemma_split_samples(rng, count: int):
    """Random (a, t, k) with a >= 1, t >= 1, 0 <= k <= 1."""
    a = 1 + rng.exponential(2.0, count)
    t = 1 + rng.exponential(2.0, count)
    k = rng.uniform(0, 1, count)
    return a, t, k


def check_lemma_split(a: float, t: float, k: float, z: complex = 1.0) -> dict:
    """Errors of one lemma_hom_split call (all should be ~0)."""
    P, l1, l2 = lemma_hom_split(HomSplitRequest.from_k(a, t, k, z))
    leaves = P.atoms
    # atoms: tA, B2, B1 (left subtree first)
    cone = max(abs(a * abs(p[0]) - abs(p[1])) / (1 + np.abs(p).sum()) for _, p in leaves[1:])
    return {"lambda_range": max(0.0, -l1, -l2, l1 - 1, l2 - 1),
            "product": abs(l1 * l2 - h_coefficient(a, t, k)),
            "cone": cone,
            "verified": verify_prelaminate(P).passed}


def prelaminate_suite(seed: int, samples: int) -> list[VerificationReport]:
    rng = _rng(seed, "prelaminate_engine")
    out = []
    a, t, k = lemma_split_samples(rng, samples)
    phase = np.exp(1j * rng.uniform(0, 2 * np.pi, samples)) * rng.uniform(0.2, 3, samples)
    checks = [check_lemma_split(*args) for args in zip(a, t, k, phase)]
    out.append(_bound("lemma split weights in [0,1]", [c["lambda_range"] for c in checks], 0.0))
    out.append(_bound("lemma split l1 l2 = h_a(t,k)", [c["product"] for c in checks], 1e-10))
    out.append(_bound("lemma split B1, B2 on the cone", [c["cone"] for c in checks], 1e-12))
    out.append(_check("lemma split trees verify", all(c["verified"] for c in checks)))

    verified, det_errs, det_tols = True, [], []
    ineq_errs, ineq_tols = [], []
    for n in (2, 3):
        members = [zoo.det_plus(n), zoo.det_minus(n), zoo.abs_det(n), zoo.power(zoo.det_plus(n), 2)]
        sym_members = [zoo.sverak_F(j, n) for j in range(n + 1)]
        for i in range(samples):
            space = SYMMETRIC if i % 2 else FULL
            A = rng.uniform(-2, 2, (n, n))
            if space == SYMMETRIC:
                A = (A + A.T) / 2
            tt = 1 + rng.exponential(1.0)
            P = diagonal_homogeneity_split(A, tt, space)
            verified &= verify_prelaminate(P).passed
            norm_n = np.linalg.norm(A) ** n
            for _, B in P.atoms[1:]:
                det_errs.append(abs(np.linalg.det(B)))
                det_tols.append(1e-9 * max(norm_n, 1e-300))
            s = rng.uniform(0.05, 1.0)
            for E in members + (sym_members if space == SYMMETRIC else []):
                for scale, sign in ((tt, 1.0), (s, -1.0)):
                    lhs, rhs = scale ** n * E(A), E(scale * A)
                    # t >= 1: t^n E(A) <= E(tA); 0 < t <= 1: reversed
                    ineq_errs.append(max(0.0, sign * (lhs - rhs)))
                    ineq_tols.append(1e-9 * (1 + abs(rhs)))
    out.append(_check("diagonal splits verify", verified))
    out.append(_bound("diagonal split B_j atoms are singular", det_errs, det_tols))
    out.append(_bound("t^n E(A) vs E(tA) on the non-positive-on-cone members", ineq_errs, ineq_tols))
    out.append(prelaminate_jensen(rng, max(10, samples // 10)))
    return out


def constructed_measures(rng, count: int) -> list[DiscreteMeasure]:
    """Leaf measures of random lemma and diagonal splits."""
    out = []
    a, t, k = lemma_split_samples(rng, count)
    for i in range(count):
        z = rng.uniform(0.2, 2) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        P, _, _ = lemma_hom_split(HomSplitRequest.from_k(a[i], t[i], k[i], z))
        out.append(to_measure(P))
        n = 2 + i % 2
        A = rng.uniform(-2, 2, (n, n))
        space = FULL
        if i % 3 == 0:
            A, space = (A + A.T) / 2, SYMMETRIC
        out.append(to_measure(diagonal_homogeneity_split(A, t[i], space)))
    return out


def prelaminate_jensen(rng, count: int) -> VerificationReport:
    """Jensen for every rank-one convex zoo member against constructed prelaminates."""
    errs, tols = [], []
    for nu in constructed_measures(rng, count):
        for f in zoo_members(nu.n):
            if f.domain == COMPLEX_PAIR or not f.accepts(nu.space, nu.n):
                continue
            gap = jensen_gap(f, nu)
            errs.append(max(0.0, -gap))
            tols.append(1e-9 * (1 + abs(f(nu.barycenter))))
    return _bound("Jensen on constructed prelaminates", errs, tols)


# ---------------------------------------------------------------------------
# convexity_verifier


def convexity_suite(seed: int, samples: int) -> list[VerificationReport]:
    rng = _rng(seed, "convexity_verifier")
    out = []
    cfg = ScanConfig(seed=seed, n_base_points=samples, n_directions=20)

    neg = zoo.negate(zoo.det_plus(2))
    first, second = rank_one_scan(neg, cfg), rank_one_scan(neg, cfg)
    out.append(_check("rank_one_scan is deterministic", first.to_json() == second.to_json(),
                      {"violations": first.n_violations}))
    errs = []
    for w in first.witnesses:
        vals = neg(w.base[None] + np.array(w.t)[:, None, None] * w.direction[None])
        errs.append(abs((vals[0] + vals[2]) / 2 - vals[1] - w.gap))
    out.append(_bound("witnesses reproduce their gaps", errs, 1e-12,
                      {"witnesses": len(first.witnesses)}))
    out.append(_check("-det+ has rank-one violations", not first.passed))
    out.append(_check("-|A|^2 has rank-one violations", not rank_one_scan(zoo.negate(zoo.sq_norm(2)), cfg).passed))

    groups: dict = {}
    for n in (2, 3):
        for f in zoo_members(n):
            if f.domain == COMPLEX_PAIR and n == 3:
                continue
            groups.setdefault((f.domain, n if f.domain != COMPLEX_PAIR else None), []).append(f)
    for (domain, n), fs in groups.items():
        for rep in rank_one_scan_many(fs, cfg, n=n):
            suffix = f" (n={n})" if n else ""
            out.append(_check(f"rank-one scan {rep.integrand}{suffix}", rep.passed,
                              {"segments": rep.n_segments, "violations": rep.n_violations}))

    for p in BURKHOLDER_EXPONENTS:
        rep = zigzag_scan(p, cfg)
        out.append(_check(f"zigzag convexity of B_p (p={p:g})", rep.passed, {"segments": rep.n_segments}))
    rep = zigzag_scan(1.5, cfg, reverse=True)
    out.append(_check("B_p not convex along |a| < |b|", not rep.passed, {"violations": rep.n_violations}))

    for n in (2, 3):
        for f in zoo_members(n):
            if f.homogeneity is None or (f.domain == COMPLEX_PAIR and n == 3):
                continue
            rep = euler_check(f, ScanConfig(seed=seed, n_base_points=samples), n=n)
            rep.name += f" (n={n})" if f.domain != COMPLEX_PAIR else ""
            out.append(rep)

    errs = []
    for a in (1.0, 1.5, 2.0, 4.0):
        for p in (1.1, 1.5, 2.0, 3.0):
            hb = homogeneity_bound_check(a, p)
            errs.append(abs(hb.derivative_at_1 - hb.derivative_fd))
    out.append(_bound("F_a'(1): closed form vs finite differences", errs, 1e-6))

    A = rng.uniform(-2, 2, (max(60, samples), 2, 2))
    for f, tol in ((zoo.det(2), 1e-10), (zoo.sq_norm(2), 1e-10)):
        base = fit_on_samples(f, A)
        shuffled = fit_on_samples(f, A[rng.permutation(len(A))])
        doubled = fit_on_samples(f, np.concatenate([A, A]))
        err = max(abs(base.residual - shuffled.residual), abs(base.residual - doubled.residual))
        out.append(_bound(f"fit residual unchanged by shuffling/duplication ({f.name})", err,
                          tol * (1 + base.residual), {"residual": base.residual}))

    dep_full = minor_dependence_rank(FULL, 4, 2, ScanConfig(seed=seed))
    dep_sym = minor_dependence_rank(SYMMETRIC, 4, 2, ScanConfig(seed=seed))
    out.append(_check("2x2 minors independent on R^{4x4}", dep_full.rank == 36, dep_full.to_json()))
    out.append(_check("2x2 minors dependent on Sym(4)",
                      dep_sym.rank < 36 and dep_sym.relation_residual < 1e-12, dep_sym.to_json()))
    return out


# ---------------------------------------------------------------------------
# laminate_jensen


def _combine(f: IntegrandHandle, g: IntegrandHandle, alpha: float, beta: float) -> IntegrandHandle:
    return IntegrandHandle(f"{alpha:g}*{f.name}+{beta:g}*{g.name}", f.domain,
                           lambda x: alpha * f.func(x) + beta * g.func(x), n=f.n)


def laminate_suite(seed: int, samples: int) -> list[VerificationReport]:
    rng = _rng(seed, "laminate_jensen")
    out = []
    measures = constructed_measures(rng, max(5, samples // 20))

    errs, tols = [], []
    for nu in measures:
        fam = default_family(nu.space, nu.n)
        f, g = fam[int(rng.integers(len(fam)))], fam[int(rng.integers(len(fam)))]
        alpha, beta = rng.uniform(0, 3, 2)
        lhs = jensen_gap(_combine(f, g, alpha, beta), nu)
        rhs = alpha * jensen_gap(f, nu) + beta * jensen_gap(g, nu)
        errs.append(abs(lhs - rhs))
        tols.append(1e-12 * (1 + abs(lhs) + abs(rhs)) * 100)
    out.append(_bound("jensen_gap is linear in f", errs, tols))

    errs, tols = [], []
    for nu in measures:
        atoms = list(nu.atoms)
        w, p = atoms[0]
        split_atoms = [(w / 3, p), (2 * w / 3, p)] + atoms[1:]
        relabeled = split_atoms[::-1]
        other = DiscreteMeasure(nu.space, nu.n, relabeled)
        for f in default_family(nu.space, nu.n):
            g1, g2 = jensen_gap(f, nu), jensen_gap(f, other)
            errs.append(abs(g1 - g2))
            tols.append(1e-12 * (1 + abs(f(nu.barycenter))) * 100)
    out.append(_bound("jensen_gap invariant under relabeling and merging", errs, tols))

    verdicts = [test_measure(nu).verdict for nu in measures]
    out.append(_check("prelaminate-derived measures test consistent",
                      all(v == "consistent" for v in verdicts), {"measures": len(verdicts)}))

    same = True
    for nu in measures:
        fam = default_family(nu.space, nu.n)
        perm = [fam[i] for i in rng.permutation(len(fam))]
        same &= test_measure(nu, fam).to_json() == test_measure(nu, perm).to_json()
    bad = DiscreteMeasure(FULL, 2, [(0.5, np.eye(2)), (0.5, -np.eye(2))])
    rep = test_measure(bad)
    same &= rep.to_json() == test_measure(bad, default_family(FULL, 2)[::-1]).to_json()
    out.append(_check("test_measure independent of family order", same))
    out.append(_check("1/2 delta_I + 1/2 delta_-I is not a laminate",
                      rep.verdict == "not_laminate" and rep.witness["check"] == "det equality"
                      and abs(abs(rep.witness["gap"]) - 1) <= 1e-12, {"witness": rep.witness}))

    errors = []
    for N in (50, 100, 200, 400):
        x = np.linspace(0, 1, N + 1)
        _, err = choquet_decompose_1d(np.exp(x), np.exp)
        errors.append(err)
    rates = [errors[i] / errors[i + 1] for i in range(len(errors) - 1)]
    out.append(_check("Choquet reconstruction error is O(h^2)", min(rates) > 3.5,
                      {"errors": errors, "ratios": rates}))
    return out


SUITES: dict[str, Callable[[int, int], list[VerificationReport]]] = {
    "matrix_core": matrix_core_suite,
    "integrand_zoo": integrand_suite,
    "prelaminate_engine": prelaminate_suite,
    "convexity_verifier": convexity_suite,
    "laminate_jensen": laminate_suite,
}


def run_all(seed: int, samples: int) -> list[tuple[str, VerificationReport]]:
    """Every suite in a fixed order, as (suite name, report) pairs."""
    return [(name, rep) for name, suite in SUITES.items() for rep in suite(seed, samples)]
