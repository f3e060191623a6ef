"""Sampling-based checks: rank-one convexity along segments, zigzag
convexity of B_p, the homogeneity bound for integrands vanishing on a cone,
null-Lagrangian fitting, linear relations between minors, and metadata checks
(homogeneity, isotropy, Euler's relation).

All scans are deterministic in ``ScanConfig.seed``: base point ``i`` and its
directions come from a generator seeded with ``(seed, i)``, so results do not
depend on chunking or evaluation order.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from math import comb
from typing import Callable

import numpy as np

from .errors import DimensionError, InvalidDirectionError, InvalidParameterError
from .integrands import COMPLEX_PAIR, IntegrandHandle, burkholder
from .matrix_core import (
    FULL,
    SYMMETRIC,
    MinorSpec,
    minor,
    minor_count,
    minor_specs,
    minors_array,
    numerical_rank,
)
from .reports import VerificationReport, jsonable

# points per evaluation chunk; bounds memory of the batched scans
_CHUNK_POINTS = 400_000


@dataclass(frozen=True)
class ScanConfig:
    """``t_span``: segments are A + tX for t in [-t_span, t_span]."""

    seed: int = 0
    n_base_points: int = 1000
    n_directions: int = 100
    segment_grid: int = 41
    box_radius: float = 2.0
    tolerance: float = 1e-9
    t_span: float = 2.0
    max_witnesses: int = 20

    def __post_init__(self):
        for name in ("n_base_points", "n_directions", "segment_grid", "max_witnesses"):
            if getattr(self, name) <= 0:
                raise InvalidParameterError(f"{name} must be positive")
        if self.segment_grid < 3:
            raise InvalidParameterError("segment_grid must be at least 3")
        if self.seed < 0:
            raise InvalidParameterError("seed must be a non-negative integer")
        if self.box_radius <= 0 or self.t_span <= 0:
            raise InvalidParameterError("box_radius and t_span must be positive")

    @property
    def ts(self) -> np.ndarray:
        return np.linspace(-self.t_span, self.t_span, self.segment_grid)

    def to_json(self) -> dict:
        return asdict(self)


@dataclass
class Witness:
    base: np.ndarray
    direction: np.ndarray
    t: tuple[float, float, float]
    gap: float

    def to_json(self) -> dict:
        return jsonable({"base": self.base, "direction": self.direction,
                         "t": list(self.t), "gap": self.gap})


@dataclass
class ViolationReport:
    passed: bool
    witnesses: list[Witness] = field(default_factory=list)
    n_segments: int = 0
    n_violations: int = 0
    integrand: str = ""
    config: ScanConfig | None = None

    def to_json(self) -> dict:
        return jsonable({"passed": self.passed, "integrand_id": self.integrand,
                         "n_segments": self.n_segments, "n_violations": self.n_violations,
                         "witnesses": self.witnesses,
                         "config_echo": self.config.to_json() if self.config else None})


# ---------------------------------------------------------------------------
# segment evaluation


def _along(bases: np.ndarray, dirs: np.ndarray, ts: np.ndarray, domain: str) -> np.ndarray:
    """Points base + t * dir, shape (S, G, ...) for S segments and G grid values."""
    if domain == COMPLEX_PAIR:
        return bases[:, None, :] + ts[None, :, None] * dirs[:, None, :]
    return bases[:, None, :, :] + ts[None, :, None, None] * dirs[:, None, :, :]


def _midpoint_gaps(f: IntegrandHandle, bases, dirs, ts, domain, tolerance):
    values = f.func(_along(bases, dirs, ts, domain))
    gaps = (values[:, :-2] + values[:, 2:]) / 2 - values[:, 1:-1]
    scale = 1.0 + np.max(np.abs(values), axis=1)
    return gaps, gaps < -tolerance * scale[:, None]


def _collect(report: ViolationReport, f, bases, dirs, ts, domain, cfg) -> None:
    gaps, bad = _midpoint_gaps(f, bases, dirs, ts, domain, cfg.tolerance)
    report.n_segments += len(bases)
    report.n_violations += int(bad.sum())
    for s, g in np.argwhere(bad):
        if len(report.witnesses) >= cfg.max_witnesses:
            break
        report.witnesses.append(Witness(bases[s].copy(), dirs[s].copy(),
                                        (float(ts[g]), float(ts[g + 1]), float(ts[g + 2])),
                                        float(gaps[s, g])))


def _check_rank_one(direction: np.ndarray, domain: str) -> None:
    if domain == COMPLEX_PAIR:
        xi, zeta = abs(direction[0]), abs(direction[1])
        if max(xi, zeta) == 0 or abs(xi - zeta) > 1e-10 * max(xi, zeta):
            raise InvalidDirectionError(f"|xi| = {xi} and |zeta| = {zeta} differ")
        return
    if domain == SYMMETRIC and not np.allclose(direction, direction.T, rtol=0, atol=1e-14):
        raise InvalidDirectionError("direction must be symmetric on the symmetric domain")
    if numerical_rank(direction) != 1:
        raise InvalidDirectionError(f"direction has rank {numerical_rank(direction)}, need 1")


def convexity_along_segment(f: IntegrandHandle, base, direction,
                            cfg: ScanConfig = ScanConfig()) -> ViolationReport:
    """Midpoint convexity of t -> f(base + t direction) on the config's t-grid."""
    dtype = complex if f.domain == COMPLEX_PAIR else float
    base = np.asarray(base, dtype=dtype)
    direction = np.asarray(direction, dtype=dtype)
    _check_rank_one(direction, f.domain)
    report = ViolationReport(True, integrand=f.name, config=cfg)
    _collect(report, f, base[None], direction[None], cfg.ts, f.domain, cfg)
    report.passed = report.n_violations == 0
    return report


# ---------------------------------------------------------------------------
# seeded sampling


def _unit(rng, size, d):
    v = rng.standard_normal((size, d))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def sample_base(rng, domain: str, n: int | None, R: float, size: int | None = None):
    shape = () if size is None else (size,)
    if domain == COMPLEX_PAIR:
        return rng.uniform(-R, R, shape + (2,)) + 1j * rng.uniform(-R, R, shape + (2,))
    a = rng.uniform(-R, R, shape + (n, n))
    if domain == SYMMETRIC:
        a = (a + np.swapaxes(a, -1, -2)) / 2
    return a


def sample_rank_one(rng, domain: str, n: int | None, size: int) -> np.ndarray:
    """Rank-one directions: u (x) v with unit u, v; v (x) v on symmetric
    matrices; (e^{i theta}, e^{i phi}) on complex pairs."""
    if domain == COMPLEX_PAIR:
        ang = rng.uniform(0.0, 2 * np.pi, (size, 2))
        return np.exp(1j * ang)
    u = _unit(rng, size, n)
    v = u if domain == SYMMETRIC else _unit(rng, size, n)
    return u[:, :, None] * v[:, None, :]


def _segments(cfg: ScanConfig, domain: str, n: int | None, sampler):
    """Yield (bases, dirs) chunks; base i and its directions use rng (seed, i)."""
    per_point = cfg.segment_grid * (2 if domain == COMPLEX_PAIR else n * n)
    per_base = max(1, _CHUNK_POINTS // (per_point * cfg.n_directions))
    for lo in range(0, cfg.n_base_points, per_base):
        bases, dirs = [], []
        for i in range(lo, min(lo + per_base, cfg.n_base_points)):
            rng = np.random.default_rng([cfg.seed, i])
            b, d = sampler(rng)
            bases.append(np.broadcast_to(b, d.shape))
            dirs.append(d)
        yield np.concatenate(bases), np.concatenate(dirs)


def _domain_n(f: IntegrandHandle, n: int | None) -> int | None:
    if f.domain == COMPLEX_PAIR:
        return None
    n = f.n if f.n is not None else n
    if n is None:
        raise DimensionError(f"{f.name} has no fixed dimension; pass n")
    return n


def rank_one_scan(f: IntegrandHandle, cfg: ScanConfig = ScanConfig(),
                  n: int | None = None) -> ViolationReport:
    """Midpoint convexity on n_base_points x n_directions seeded rank-one segments."""
    n = _domain_n(f, n)

    def sampler(rng):
        base = sample_base(rng, f.domain, n, cfg.box_radius)
        return base, sample_rank_one(rng, f.domain, n, cfg.n_directions)

    report = ViolationReport(True, integrand=f.name, config=cfg)
    for bases, dirs in _segments(cfg, f.domain, n, sampler):
        _collect(report, f, bases, dirs, cfg.ts, f.domain, cfg)
    report.passed = report.n_violations == 0
    return report


def rank_one_scan_many(fs: list[IntegrandHandle], cfg: ScanConfig = ScanConfig(),
                       n: int | None = None) -> list[ViolationReport]:
    """``rank_one_scan`` for several integrands on one domain.

    The segments are generated once and shared; every report equals the one
    ``rank_one_scan`` would give on its own.
    """
    if not fs:
        return []
    domain = fs[0].domain
    dims = {_domain_n(f, n) for f in fs}
    if len(dims) != 1 or any(f.domain != domain for f in fs):
        raise DimensionError("rank_one_scan_many needs integrands on one domain and dimension")
    n = dims.pop()

    def sampler(rng):
        base = sample_base(rng, domain, n, cfg.box_radius)
        return base, sample_rank_one(rng, domain, n, cfg.n_directions)

    reports = [ViolationReport(True, integrand=f.name, config=cfg) for f in fs]
    for bases, dirs in _segments(cfg, domain, n, sampler):
        for f, report in zip(fs, reports):
            _collect(report, f, bases, dirs, cfg.ts, domain, cfg)
    for report in reports:
        report.passed = report.n_violations == 0
    return reports


def zigzag_scan(p: float, cfg: ScanConfig = ScanConfig(), reverse: bool = False) -> ViolationReport:
    """Convexity of t -> B_p(x + ta, y + tb) over samples with |a| >= |b|.

    ``reverse=True`` samples |a| < |b| instead, where convexity is not expected.
    """
    f = burkholder(p)

    def sampler(rng):
        base = sample_base(rng, COMPLEX_PAIR, None, cfg.box_radius)
        ab = rng.standard_normal((cfg.n_directions, 2)) + 1j * rng.standard_normal((cfg.n_directions, 2))
        swap = (np.abs(ab[:, 0]) < np.abs(ab[:, 1])) != reverse
        ab[swap] = ab[swap][:, ::-1]
        return base, ab

    report = ViolationReport(True, integrand=f"zigzag:{f.name}" + (":reversed" if reverse else ""),
                             config=cfg)
    for bases, dirs in _segments(cfg, COMPLEX_PAIR, None, sampler):
        _collect(report, f, bases, dirs, cfg.ts, COMPLEX_PAIR, cfg)
    report.passed = report.n_violations == 0
    return report


# ---------------------------------------------------------------------------
# homogeneity bound for integrands vanishing on C_a


def F_curve(a: float, p: float, t):
    """F_a(t) = t^(p-1) (at + a - t + 1) / (at + a + t - 1)."""
    t = np.asarray(t, dtype=float)
    return t ** (p - 1) * (a * t + a - t + 1) / (a * t + a + t - 1)


@dataclass
class HomogeneityBound:
    a: float
    p: float
    satisfied: bool
    t: np.ndarray
    F: np.ndarray
    derivative_at_1: float
    derivative_fd: float

    def to_json(self) -> dict:
        return jsonable({"a": self.a, "p": self.p, "satisfied": self.satisfied,
                         "derivative_at_1": self.derivative_at_1,
                         "derivative_fd": self.derivative_fd,
                         "t": self.t, "F": self.F})


def homogeneity_bound_check(a: float, p: float, T: float = 4.0, samples: int = 121,
                            fd_step: float = 1e-5) -> HomogeneityBound:
    """F_a(1) = 1 and F_a'(1) = p - 1 - 1/a, so F_a >= 1 on [1, T] forces p >= 1/a + 1."""
    if a < 1 or p < 1:
        raise InvalidParameterError(f"need a >= 1 and p >= 1, got a={a}, p={p}")
    t = np.linspace(1.0, T, samples)
    exact = p - 1.0 - 1.0 / a
    fd = float((F_curve(a, p, 1 + fd_step) - F_curve(a, p, 1 - fd_step)) / (2 * fd_step))
    return HomogeneityBound(a, p, bool(p >= 1.0 / a + 1.0 - 1e-12), t, F_curve(a, p, t), exact, fd)


# ---------------------------------------------------------------------------
# null Lagrangians


def box_sampler(n: int, R: float = 2.0, space: str = FULL) -> Callable:
    def sample(rng, count):
        return sample_base(rng, space, n, R, size=count)
    return sample


def det_positive_sampler(n: int, R: float = 2.0) -> Callable:
    """Uniform box samples with the first row negated where det < 0, so det > 0 a.s."""
    def sample(rng, count):
        a = rng.uniform(-R, R, (count, n, n))
        flip = np.linalg.det(a) < 0
        a[flip, 0, :] *= -1
        return a
    return sample


@dataclass
class NullLagrangianFit:
    """f(A) ~ c + v . M(A); ``v`` follows the canonical minor order."""

    n: int
    c: float
    v: np.ndarray
    residual: float
    sample_count: int
    rank: int
    condition: float

    def coefficient(self, spec: MinorSpec) -> float:
        return float(self.v[list(minor_specs(self.n)).index(spec)])

    def to_json(self) -> dict:
        return jsonable({"n": self.n, "c": self.c, "v": self.v, "residual": self.residual,
                         "sample_count": self.sample_count, "rank": self.rank,
                         "condition": self.condition})


def null_lagrangian_fit(f: IntegrandHandle, region_sampler: Callable,
                        cfg: ScanConfig = ScanConfig(), n: int | None = None) -> NullLagrangianFit:
    """Least-squares fit of f by an affine combination of all minors.

    Uses max(3 (1 + #minors), cfg.n_base_points) samples. The residual is the
    relative RMS error. On symmetric samples the minors are linearly dependent,
    the minimum-norm solution is returned and only the residual is meaningful.
    """
    n = _domain_n(f, n)
    count = max(3 * (1 + minor_count(n)), cfg.n_base_points)
    rng = np.random.default_rng([cfg.seed, 0x4E4C])
    return fit_on_samples(f, region_sampler(rng, count))


def fit_on_samples(f: IntegrandHandle, A: np.ndarray) -> NullLagrangianFit:
    """The least-squares fit of :func:`null_lagrangian_fit` on given samples."""
    A = np.asarray(A, dtype=float)
    n, count = A.shape[-1], len(A)
    y = np.asarray(f(A), dtype=float)
    X = np.column_stack([np.ones(count), minors_array(A)])
    coef, _, rank, sv = np.linalg.lstsq(X, y, rcond=None)
    rms = np.sqrt(np.mean((X @ coef - y) ** 2))
    ref = np.sqrt(np.mean(y ** 2))
    residual = float(rms / ref) if ref > 0 else float(rms)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else float("inf")
    return NullLagrangianFit(n, float(coef[0]), coef[1:], residual, count, int(rank), cond)


@dataclass
class MinorDependence:
    space: str
    n: int
    order: int
    rank: int
    n_minors: int
    samples: int
    relation_residual: float | None = None

    def to_json(self) -> dict:
        return jsonable(asdict(self))


def minor_dependence_rank(space: str, n: int, s: int, cfg: ScanConfig = ScanConfig()
                          ) -> MinorDependence:
    """Numerical rank of order-s minors as functions on the full or symmetric space.

    For (symmetric, 4, 2) the residual of -M_{12,34} + M_{13,24} - M_{14,23} = 0
    over the samples is also reported.
    """
    if not 1 <= s <= n:
        raise InvalidParameterError(f"need 1 <= s <= n, got s={s}, n={n}")
    count = 4 * comb(n, s) ** 2
    rng = np.random.default_rng([cfg.seed, 0x4D44])
    A = sample_base(rng, space, n, cfg.box_radius, size=count)
    rows = minors_array(A, order=s)
    rank = int(np.linalg.matrix_rank(rows))
    residual = None
    if space == SYMMETRIC and n == 4 and s == 2:
        rel = (-minor(A, MinorSpec((1, 2), (3, 4))) + minor(A, MinorSpec((1, 3), (2, 4)))
               - minor(A, MinorSpec((1, 4), (2, 3))))
        residual = float(np.max(np.abs(rel)))
    return MinorDependence(space, n, s, rank, rows.shape[1], count, residual)


# ---------------------------------------------------------------------------
# metadata checks


def _random_rotation(rng, n: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] *= -1
    return q


def homogeneity_check(f: IntegrandHandle, cfg: ScanConfig = ScanConfig(), n: int | None = None,
                      rtol: float = 1e-9) -> VerificationReport:
    """f(tA) = t^p f(A) for t > 0 on seeded samples, p the declared degree."""
    if f.homogeneity is None:
        raise InvalidParameterError(f"{f.name} declares no homogeneity")
    n = _domain_n(f, n)
    rng = np.random.default_rng([cfg.seed, 0x484F])
    A = sample_base(rng, f.domain, n, cfg.box_radius, size=cfg.n_base_points)
    t = rng.uniform(0.1, 3.0, cfg.n_base_points)
    tb = t[:, None] if f.domain == COMPLEX_PAIR else t[:, None, None]
    lhs, rhs = f(tb * A), t ** f.homogeneity * f(A)
    err = np.abs(lhs - rhs) / (1.0 + np.abs(rhs))
    worst = int(np.argmax(err))
    failures = [] if err[worst] <= rtol else [{"sample": worst, "relative_error": float(err[worst])}]
    return VerificationReport(f"homogeneity:{f.name}", not failures, failures,
                              {"degree": f.homogeneity, "max_relative_error": float(err.max())})


def isotropy_check(f: IntegrandHandle, cfg: ScanConfig = ScanConfig(), n: int | None = None,
                   rtol: float = 1e-9) -> VerificationReport:
    """f(QAR) = f(A) for sampled Q, R in SO(n); phase rotations on complex pairs."""
    n = _domain_n(f, n)
    rng = np.random.default_rng([cfg.seed, 0x4953])
    count = cfg.n_base_points
    A = sample_base(rng, f.domain, n, cfg.box_radius, size=count)
    if f.domain == COMPLEX_PAIR:
        moved = A * np.exp(1j * rng.uniform(0, 2 * np.pi, (count, 2)))
    else:
        Q = np.stack([_random_rotation(rng, n) for _ in range(count)])
        R = np.swapaxes(Q, -1, -2) if f.domain == SYMMETRIC else \
            np.stack([_random_rotation(rng, n) for _ in range(count)])
        moved = Q @ A @ R
        if f.domain == SYMMETRIC:
            moved = (moved + np.swapaxes(moved, -1, -2)) / 2
    base = f(A)
    err = np.abs(f(moved) - base) / (1.0 + np.abs(base))
    ok = float(err.max()) <= rtol
    return VerificationReport(f"isotropy:{f.name}", ok,
                              [] if ok else [{"sample": int(np.argmax(err)), "relative_error": float(err.max())}],
                              {"max_relative_error": float(err.max())})


def euler_check(f: IntegrandHandle, cfg: ScanConfig = ScanConfig(), n: int | None = None,
                atol: float = 1e-5) -> VerificationReport:
    """p f(A) = <grad f(A), A> with the right side by central differences along A."""
    if f.homogeneity is None:
        raise InvalidParameterError(f"{f.name} declares no homogeneity")
    n = _domain_n(f, n)
    rng = np.random.default_rng([cfg.seed, 0x4555])
    A = sample_base(rng, f.domain, n, cfg.box_radius, size=cfg.n_base_points)
    axes = -1 if f.domain == COMPLEX_PAIR else (-2, -1)
    norm = np.sqrt(np.sum(np.abs(A) ** 2, axis=axes))
    h = 1e-5 * (1.0 + norm)
    step = (h / norm)[:, None] if f.domain == COMPLEX_PAIR else (h / norm)[:, None, None]
    deriv = (f(A + step * A) - f(A - step * A)) / (2 * h) * norm
    target = f.homogeneity * f(A)
    err = np.abs(deriv - target) / (1.0 + np.abs(target))
    ok = float(err.max()) <= atol
    return VerificationReport(f"euler:{f.name}", ok,
                              [] if ok else [{"sample": int(np.argmax(err)), "error": float(err.max())}],
                              {"max_error": float(err.max())})
