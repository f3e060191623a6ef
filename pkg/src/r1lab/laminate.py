"""Discrete measures on matrices, Jensen gaps, the laminate test against a
family of extremal integrands, and the one-dimensional extreme functions and
Choquet decomposition on [0, 1].
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import integrands as zoo
from .errors import (
    DimensionError,
    DomainError,
    InvalidInputError,
    InvalidSpaceError,
    NonConvexError,
    ValidationError,
)
from .integrands import IntegrandHandle
from .matrix_core import FULL, SPACES, SYMMETRIC, SquareMatrix, as_array, minor_specs
from .reports import jsonable

WEIGHT_SUM_TOL = 1e-9
DEFAULT_TOLERANCE = 1e-9
BURKHOLDER_EXPONENTS = (1.2, 1.5, 3.0)


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """A finitely supported probability measure on n x n matrices."""

    space: str
    n: int
    atoms: Sequence[tuple[float, np.ndarray]]

    def __post_init__(self):
        if self.space not in SPACES:
            raise ValidationError(f"unknown space {self.space!r}")
        if not self.atoms:
            raise ValidationError("a measure needs at least one atom")
        clean = []
        for i, (w, point) in enumerate(self.atoms):
            w = float(w)
            if not w > 0:
                raise ValidationError(f"atom {i} has non-positive weight {w}")
            # SquareMatrix does the shape and symmetry validation
            try:
                m = SquareMatrix(as_array(point), self.space)
            except (DimensionError, InvalidSpaceError) as exc:
                raise ValidationError(f"atom {i}: {exc}") from None
            if m.n != self.n:
                raise ValidationError(f"atom {i} is {m.n}x{m.n}, expected {self.n}x{self.n}")
            clean.append((w, m.entries))
        total = sum(w for w, _ in clean)
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise ValidationError(f"weights sum to {total:.12g}, off by {total - 1.0:+.3g}")
        object.__setattr__(self, "atoms", tuple(clean))

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.atoms])

    @property
    def points(self) -> np.ndarray:
        return np.stack([p for _, p in self.atoms])

    @property
    def barycenter(self) -> np.ndarray:
        # plain left-to-right sum keeps symmetric inputs exactly symmetric
        total = np.zeros((self.n, self.n))
        for w, p in self.atoms:
            total = total + w * p
        return total

    @classmethod
    def dirac(cls, A, space: str = FULL) -> "DiscreteMeasure":
        a = as_array(A)
        return cls(space, a.shape[0], [(1.0, a)])

    def to_json(self) -> dict:
        return {"space": self.space, "n": self.n,
                "atoms": [{"weight": w, "matrix": p.tolist()} for w, p in self.atoms]}

    @classmethod
    def from_json(cls, obj: dict) -> "DiscreteMeasure":
        try:
            space, n = obj["space"], int(obj["n"])
            atoms = [(float(a["weight"]), np.asarray(a["matrix"], dtype=float)) for a in obj["atoms"]]
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed measure: missing or bad field {exc}") from None
        return cls(space, n, atoms)

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def jensen_gap(f: IntegrandHandle, nu: DiscreteMeasure) -> float:
    """<nu, f> - f(barycenter); non-negative for every rank-one convex f when nu is a laminate."""
    if not f.accepts(nu.space, nu.n):
        raise InvalidInputError(f"{f.name} ({f.domain}, n={f.n}) cannot act on a {nu.space} "
                                f"measure with n={nu.n}")
    values = f(nu.points)
    return float(np.dot(nu.weights, values) - f(nu.barycenter))


# ---------------------------------------------------------------------------
# laminate test


def default_family(space: str, n: int) -> list[IntegrandHandle]:
    """The default test family: det+-, truncated minors, F_k (symmetric),
    lifted B_p^+ (n = 2) and the rank-one affine pairs +-M for every minor."""
    fam = [zoo.det_plus(n), zoo.det_minus(n)]
    lower = [s for s in minor_specs(n) if s.order < n]
    fam += [zoo.truncated_minor(s, sign, n) for s in lower for sign in "+-"]
    if space == SYMMETRIC:
        fam += [zoo.sverak_F(k, n) for k in range(n + 1)]
    if n == 2:
        fam += [zoo.lift_to_matrix(zoo.burkholder_plus(p)) for p in BURKHOLDER_EXPONENTS]
    affine = [zoo.det(n)] + [zoo.signed_minor(s, n) for s in lower]
    for m in affine:
        fam += [m, zoo.negate(m)]
    return fam


def _check_label(name: str) -> str:
    base = name[4:] if name.startswith("neg:") else name
    if base == "det":
        return "det equality"
    if base.startswith("minor:") and base.count(":") == 2:
        return f"minor {base[6:]} equality"
    return "jensen inequality"


@dataclass
class LaminateTestReport:
    """One-sided verdict: 'consistent' only means no tested integrand was violated."""

    verdict: str
    witness: dict | None
    per_integrand_gaps: dict[str, float]
    tolerance: float
    family: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.verdict == "consistent"

    def to_json(self) -> dict:
        return jsonable({"verdict": self.verdict, "passed": self.passed, "witness": self.witness,
                         "tolerance": self.tolerance, "family": self.family,
                         "per_integrand_gaps": self.per_integrand_gaps})


def test_measure(nu: DiscreteMeasure, family: Iterable[IntegrandHandle] | None = None,
                 tolerance: float = DEFAULT_TOLERANCE) -> LaminateTestReport:
    """Jensen's inequality against each member of ``family``.

    The verdict is 'not_laminate' iff some gap is below -tolerance; the witness
    is the most negative gap (ties broken by integrand id), so the result does
    not depend on the family's order.
    """
    fam = default_family(nu.space, nu.n) if family is None else list(family)
    if not fam:
        raise InvalidInputError("empty integrand family")
    gaps = {}
    for f in fam:
        gaps[f.name] = jensen_gap(f, nu)
    gaps = dict(sorted(gaps.items()))
    bad = sorted((g, name) for name, g in gaps.items() if g < -tolerance)
    if bad:
        g, name = bad[0]
        witness = {"integrand": name, "gap": g, "check": _check_label(name)}
        verdict = "not_laminate"
    else:
        witness, verdict = None, "consistent"
    return LaminateTestReport(verdict, witness, gaps, tolerance, list(gaps))


# keep pytest from collecting the public function above as a test
test_measure.__test__ = False


# ---------------------------------------------------------------------------
# one-dimensional extreme functions


@dataclass(frozen=True)
class Extreme1DSpec:
    kind: str
    y: float

    def __post_init__(self):
        if self.kind not in ("phi", "psi"):
            raise DomainError(f"kind must be 'phi' or 'psi', got {self.kind!r}")
        if not 0.0 <= self.y <= 1.0:
            raise DomainError(f"y must lie in [0, 1], got {self.y}")


def extreme_1d(spec: Extreme1DSpec, x):
    """phi_y(x) = (x-y)+/(1-y), psi_y(x) = (y-x)+/y, with phi_1 = 1_{1}, psi_0 = 1_{0}."""
    x = np.asarray(x, dtype=float)
    if np.any((x < 0) | (x > 1)):
        raise DomainError("x must lie in [0, 1]")
    y = spec.y
    if spec.kind == "phi":
        out = (x == 1.0).astype(float) if y == 1.0 else np.maximum(x - y, 0.0) / (1.0 - y)
    else:
        out = (x == 0.0).astype(float) if y == 0.0 else np.maximum(y - x, 0.0) / y
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class RepresentingMeasure1D:
    """f = f(0)(1-x) + f(1)x + sum_i h*density_i * g(x, y_i),
    g(x, y) = (x-y)+ - x(1-y), over interior grid nodes y_i.

    ``vertex_masses`` = (mass on phi_0 = f(1), mass on psi_1 = f(0)).
    """

    vertex_masses: tuple[float, float]
    density: np.ndarray
    grid_step: float
    samples: np.ndarray

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, len(self.samples))[1:-1]

    @property
    def masses(self) -> np.ndarray:
        """Slope jumps at the interior nodes."""
        return self.density * self.grid_step

    def reconstruct(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y, m = self.nodes, self.masses
        phi_mass, psi_mass = self.vertex_masses
        out = psi_mass * (1.0 - x) + phi_mass * x - x * np.dot(m, 1.0 - y)
        for lo in range(0, len(x), 2048):
            xs = x[lo:lo + 2048]
            out[lo:lo + 2048] += np.maximum(xs[:, None] - y[None, :], 0.0) @ m
        return out

    def extreme_weights(self) -> list[tuple[Extreme1DSpec, float]]:
        """Non-negative weights on {phi_y, psi_y} representing a non-negative convex f.

        Kinks right of the minimum node become phi's, kinks left of it psi's,
        and the minimum value is spread as f_min (phi_0 + psi_1).
        """
        f, h = self.samples, self.grid_step
        N = len(f) - 1
        x = np.linspace(0.0, 1.0, N + 1)
        m = int(np.argmin(f))
        second = np.diff(f, 2) / h  # slope jumps at nodes 1..N-1
        out = [(Extreme1DSpec("phi", 0.0), f[m]), (Extreme1DSpec("psi", 1.0), f[m])]
        if m < N:
            out.append((Extreme1DSpec("phi", x[m]), (f[m + 1] - f[m]) / h * (1.0 - x[m])))
        if m > 0:
            out.append((Extreme1DSpec("psi", x[m]), (f[m - 1] - f[m]) / h * x[m]))
        for i in range(1, N):
            if i > m:
                out.append((Extreme1DSpec("phi", x[i]), second[i - 1] * (1.0 - x[i])))
            elif i < m:
                out.append((Extreme1DSpec("psi", x[i]), second[i - 1] * x[i]))
        return [(s, float(w)) for s, w in out if w != 0.0]


def choquet_decompose_1d(f_samples, f: Callable | None = None
                         ) -> tuple[RepresentingMeasure1D, float]:
    """Decompose convex samples on a uniform grid of [0, 1] into an affine part
    plus kinks read off the second differences.

    The returned error is the sup-norm gap between the reconstruction and the
    samples; when the function ``f`` itself is supplied the midpoints of the
    grid cells are checked too, which exposes the O(h^2) interpolation error.
    """
    samples = np.asarray(f_samples, dtype=float)
    if samples.ndim != 1 or len(samples) < 3:
        raise InvalidInputError("need at least 3 samples on a uniform grid")
    N = len(samples) - 1
    h = 1.0 / N
    second = np.diff(samples, 2)
    bad = np.flatnonzero(second < -1e-9 * (1.0 + np.max(np.abs(samples))))
    if bad.size:
        i = int(bad[0]) + 1
        raise NonConvexError(f"samples are not convex at grid index {i}", i)
    rep = RepresentingMeasure1D((float(samples[-1]), float(samples[0])), second / h ** 2, h, samples)
    x = np.linspace(0.0, 1.0, N + 1)
    err = float(np.max(np.abs(rep.reconstruct(x) - samples)))
    if f is not None:
        mid = (x[:-1] + x[1:]) / 2
        err = max(err, float(np.max(np.abs(rep.reconstruct(mid) - np.asarray(f(mid), dtype=float)))))
    return rep, err
