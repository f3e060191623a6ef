"""Integrands: truncated minors, Sverak's F_k, Burkholder's B_p, Sverak's L
and a few combinators (negation, powers, homogenisation, lifting a C^2
integrand to 2x2 matrices).

Every handle evaluates vectorised: a matrix-domain handle takes ``(..., n, n)``
real arrays, a complex-pair handle takes ``(..., 2)`` complex arrays whose last
axis holds ``(z, w)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import DimensionError, InvalidParameterError, InvalidSpaceError
from .matrix_core import (
    FULL,
    SYMMETRIC,
    MinorSpec,
    as_array,
    index_array,
    minor,
    to_complex_pair,
)

COMPLEX_PAIR = "complex_pair"
DOMAINS = (FULL, SYMMETRIC, COMPLEX_PAIR)


@dataclass(frozen=True, eq=False)
class IntegrandHandle:
    """An evaluatable integrand plus the metadata verifiers rely on.

    ``homogeneity`` is the degree p of positive homogeneity when known.
    ``rank_one_convex`` / ``rank_one_affine`` record what is known about the
    integrand, they are claims that the verifiers test, not guarantees.
    """

    name: str
    domain: str
    func: Callable[[np.ndarray], np.ndarray]
    n: int | None = None
    params: dict = field(default_factory=dict)
    homogeneity: float | None = None
    isotropic: bool = False
    nonnegative: bool = False
    rank_one_convex: bool = False
    rank_one_affine: bool = False

    def __post_init__(self):
        if self.domain not in DOMAINS:
            raise InvalidParameterError(f"unknown domain {self.domain!r}")
        if self.domain == COMPLEX_PAIR:
            object.__setattr__(self, "n", None)

    def _coerce(self, x) -> np.ndarray:
        if self.domain == COMPLEX_PAIR:
            x = np.asarray(x, dtype=complex)
            if x.ndim == 0 or x.shape[-1] != 2:
                raise DimensionError(f"{self.name}: expected (..., 2) complex pairs, got {x.shape}")
            return x
        x = as_array(x)
        if x.ndim < 2 or x.shape[-1] != x.shape[-2]:
            raise DimensionError(f"{self.name}: expected square matrices, got {x.shape}")
        if self.n is not None and x.shape[-1] != self.n:
            raise DimensionError(f"{self.name}: expected n={self.n}, got {x.shape[-1]}")
        if self.domain == SYMMETRIC and not np.array_equal(x, np.swapaxes(x, -1, -2)):
            raise InvalidSpaceError(f"{self.name} is defined on symmetric matrices only")
        return x

    def __call__(self, x):
        out = self.func(self._coerce(x))
        return float(out) if np.ndim(out) == 0 else out

    evaluate = __call__

    def accepts(self, space: str, n: int | None) -> bool:
        """Whether points of ``space`` (dimension n) lie in this integrand's domain."""
        if self.domain == COMPLEX_PAIR or space == COMPLEX_PAIR:
            return self.domain == space
        if self.n is not None and n != self.n:
            return False
        return self.domain == FULL or space == SYMMETRIC


# ---------------------------------------------------------------------------
# determinant family


def _det(a: np.ndarray) -> np.ndarray:
    n = a.shape[-1]
    if n == 1:
        return a[..., 0, 0]
    if n == 2:
        return a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] * a[..., 1, 0]
    return np.linalg.det(a)


def det(n: int) -> IntegrandHandle:
    return IntegrandHandle("det", FULL, _det, n=n, homogeneity=n, isotropic=True,
                           rank_one_convex=True, rank_one_affine=True)


def det_plus(n: int) -> IntegrandHandle:
    return IntegrandHandle("det+", FULL, lambda a: np.maximum(_det(a), 0.0), n=n,
                           homogeneity=n, isotropic=True, nonnegative=True, rank_one_convex=True)


def det_minus(n: int) -> IntegrandHandle:
    return IntegrandHandle("det-", FULL, lambda a: np.maximum(-_det(a), 0.0), n=n,
                           homogeneity=n, isotropic=True, nonnegative=True, rank_one_convex=True)


def abs_det(n: int) -> IntegrandHandle:
    return IntegrandHandle("absdet", FULL, lambda a: np.abs(_det(a)), n=n,
                           homogeneity=n, isotropic=True, nonnegative=True, rank_one_convex=True)


def signed_minor(spec: MinorSpec, n: int) -> IntegrandHandle:
    """The minor M itself, rank-one affine."""
    spec.check(n)
    return IntegrandHandle(f"minor:{spec.label}", FULL, lambda a: minor(a, spec), n=n,
                           params={"minor": spec.label}, homogeneity=spec.order,
                           rank_one_convex=True, rank_one_affine=True)


def truncated_minor(spec: MinorSpec, sign: str, n: int) -> IntegrandHandle:
    """max(0, M) for sign '+', max(0, -M) for sign '-'."""
    if sign not in ("+", "-", "plus", "minus"):
        raise InvalidParameterError(f"sign must be '+' or '-', got {sign!r}")
    s = 1.0 if sign in ("+", "plus") else -1.0
    spec.check(n)
    tag = "+" if s > 0 else "-"
    return IntegrandHandle(f"minor:{spec.label}:{tag}", FULL,
                           lambda a: np.maximum(s * minor(a, spec), 0.0), n=n,
                           params={"minor": spec.label, "sign": tag}, homogeneity=spec.order,
                           nonnegative=True, rank_one_convex=True)


def sverak_F(k: int, n: int) -> IntegrandHandle:
    """|det A| on symmetric matrices of index k, zero elsewhere.

    Numerically singular matrices (see ``index_array``) evaluate to 0.
    """
    if not 0 <= k <= n:
        raise InvalidParameterError(f"F_k needs 0 <= k <= n, got k={k}, n={n}")

    def f(a):
        return np.where(index_array(a) == k, np.abs(_det(a)), 0.0)

    return IntegrandHandle(f"F:{k}", SYMMETRIC, f, n=n, params={"k": k}, homogeneity=n,
                           nonnegative=True, rank_one_convex=True)


def sq_norm(n: int | None = None, domain: str = FULL) -> IntegrandHandle:
    """|A|^2 (Frobenius), or |z|^2 + |w|^2 on complex pairs. Convex."""
    if domain == COMPLEX_PAIR:
        func = lambda x: np.sum(np.abs(x) ** 2, axis=-1)  # noqa: E731
    else:
        func = lambda a: np.sum(a * a, axis=(-2, -1))  # noqa: E731
    return IntegrandHandle("sqnorm", domain, func, n=n, homogeneity=2, isotropic=True,
                           nonnegative=True, rank_one_convex=True)


# ---------------------------------------------------------------------------
# complex-pair integrands


def burkholder_constant(p: float) -> float:
    """p* - 1 = max(p - 1, 1/(p - 1))."""
    if not 1.0 < p < np.inf:
        raise InvalidParameterError(f"Burkholder's function needs 1 < p < inf, got p={p}")
    return max(p - 1.0, 1.0 / (p - 1.0))


def _burkholder_values(p: float, c: float, x: np.ndarray) -> np.ndarray:
    az, aw = np.abs(x[..., 0]), np.abs(x[..., 1])
    return (c * az - aw) * (az + aw) ** (p - 1.0)


def burkholder(p: float) -> IntegrandHandle:
    """B_p(z, w) = ((p* - 1)|z| - |w|)(|z| + |w|)^(p-1)."""
    c = burkholder_constant(p)
    return IntegrandHandle(f"burkholder:{p:g}", COMPLEX_PAIR,
                           lambda x: _burkholder_values(p, c, x),
                           params={"p": p, "p_star_minus_1": c}, homogeneity=p,
                           isotropic=True, rank_one_convex=True)


def burkholder_plus(p: float) -> IntegrandHandle:
    c = burkholder_constant(p)
    return IntegrandHandle(f"burkholder+:{p:g}", COMPLEX_PAIR,
                           lambda x: np.maximum(_burkholder_values(p, c, x), 0.0),
                           params={"p": p, "p_star_minus_1": c}, homogeneity=p,
                           isotropic=True, nonnegative=True, rank_one_convex=True)


def _L_values(x: np.ndarray) -> np.ndarray:
    az, aw = np.abs(x[..., 0]), np.abs(x[..., 1])
    return np.where(az + aw <= 1.0, az * az - aw * aw, 2.0 * az - 1.0)


def sverak_L() -> IntegrandHandle:
    """|z|^2 - |w|^2 inside |z| + |w| <= 1, 2|z| - 1 outside."""
    return IntegrandHandle("L", COMPLEX_PAIR, _L_values, isotropic=True, rank_one_convex=True)


def lift_to_matrix(E: IntegrandHandle) -> IntegrandHandle:
    """Evaluate a complex-pair integrand at (z, w)/sqrt(2) of a 2x2 matrix.

    With this scaling |z|/sqrt(2) = |A+| and |w|/sqrt(2) = |A-|, so for
    instance the lift of B_2 is |A+|^2 - |A-|^2 = 2 det A. Rank-one
    directions correspond exactly, so rank-one convexity carries over.
    """
    if E.domain != COMPLEX_PAIR:
        raise InvalidParameterError(f"{E.name} is not a complex-pair integrand")
    scale = 1.0 / np.sqrt(2.0)
    return IntegrandHandle(f"mat:{E.name}", FULL, lambda a: E.func(scale * to_complex_pair(a)),
                           n=2, params={**E.params, "pair_scale": scale},
                           homogeneity=E.homogeneity, isotropic=E.isotropic,
                           nonnegative=E.nonnegative, rank_one_convex=E.rank_one_convex,
                           rank_one_affine=E.rank_one_affine)


# ---------------------------------------------------------------------------
# combinators


def _norm(E: IntegrandHandle, x: np.ndarray) -> np.ndarray:
    if E.domain == COMPLEX_PAIR:
        return np.sqrt(np.sum(np.abs(x) ** 2, axis=-1))
    return np.sqrt(np.sum(x * x, axis=(-2, -1)))


def homogenize(E: IntegrandHandle, degree: float) -> IntegrandHandle:
    """E^h(A) = |A|^degree E(A/|A|), with E^h(0) = 0."""
    if degree <= 0:
        raise InvalidParameterError(f"homogeneity degree must be positive, got {degree}")

    def f(x):
        r = _norm(E, x)
        nz = r > 0
        shape = (...,) + (None,) * (2 if E.domain != COMPLEX_PAIR else 1)
        safe = np.where(nz, r, 1.0)
        vals = E.func(x / safe[shape]) * safe ** degree
        return np.where(nz, vals, 0.0)

    return IntegrandHandle(f"homog:{degree:g}:{E.name}", E.domain, f, n=E.n,
                           params={"degree": degree, "inner": E.name}, homogeneity=degree,
                           isotropic=E.isotropic, nonnegative=E.nonnegative)


def negate(E: IntegrandHandle) -> IntegrandHandle:
    return IntegrandHandle(f"neg:{E.name}", E.domain, lambda x: -E.func(x), n=E.n,
                           params=dict(E.params), homogeneity=E.homogeneity,
                           isotropic=E.isotropic, rank_one_convex=E.rank_one_affine,
                           rank_one_affine=E.rank_one_affine)


def power(E: IntegrandHandle, m: float) -> IntegrandHandle:
    """E^m for a non-negative E; rank-one convex whenever E is and m >= 1."""
    if not E.nonnegative:
        raise InvalidParameterError(f"power needs a non-negative integrand, {E.name} is not")
    hom = None if E.homogeneity is None else m * E.homogeneity
    return IntegrandHandle(f"pow:{m:g}:{E.name}", E.domain, lambda x: E.func(x) ** m, n=E.n,
                           params={"m": m, "inner": E.name}, homogeneity=hom,
                           isotropic=E.isotropic, nonnegative=True,
                           rank_one_convex=E.rank_one_convex and m >= 1)


# ---------------------------------------------------------------------------
# the L / B_p integral identity


def _check_identity_args(z, w, p):
    if not 1.0 < p < 2.0:
        raise InvalidParameterError(f"the integral converges only for 1 < p < 2, got p={p}")
    if z == 0 and w == 0:
        raise InvalidParameterError("(z, w) must be non-zero")


def lb_integral_identity(z: complex, w: complex, p: float) -> tuple[float, float]:
    """Both sides of  int_0^inf t^(p-1) L(z/t, w/t) dt = 2/(p(2-p)) B_p(z, w).

    The left side is integrated in closed form, splitting at t0 = |z| + |w|:
    below t0 the integrand is 2|z| t^(p-2) - t^(p-1), above it is
    (|z|^2 - |w|^2) t^(p-3).
    """
    _check_identity_args(z, w, p)
    az, aw = abs(z), abs(w)
    t0 = az + aw
    lhs = (2.0 * az * t0 ** (p - 1.0) / (p - 1.0) - t0 ** p / p
           + (az * az - aw * aw) * t0 ** (p - 2.0) / (2.0 - p))
    rhs = 2.0 / (p * (2.0 - p)) * burkholder(p)(np.array([z, w]))
    return float(lhs), float(rhs)


def lb_integral_quadrature(z: complex, w: complex, p: float) -> float:
    """Left side of the identity by adaptive quadrature on L itself."""
    _check_identity_args(z, w, p)
    L = sverak_L()
    t0 = abs(z) + abs(w)
    pair = np.array([z, w], dtype=complex)
    # t^(p-1) L(.) = t^(p-2) * [t L(.)]; the bracket tends to 2|z| as t -> 0
    def bracket(t):
        return t * L(pair / t) if t > 0 else 2.0 * abs(z)

    head, _ = integrate.quad(bracket, 0.0, t0, weight="alg",
                             wvar=(p - 2.0, 0.0), epsabs=0.0, epsrel=1e-10, limit=200)
    tail, _ = integrate.quad(lambda t: t ** (p - 1.0) * L(pair / t), t0, np.inf,
                             epsabs=0.0, epsrel=1e-10, limit=200)
    return head + tail


# ---------------------------------------------------------------------------
# string ids


def integrand_from_id(ident: str, n: int = 2) -> IntegrandHandle:
    """Build an integrand from its string id.

    Recognised ids: ``det``, ``det+``, ``det-``, ``absdet``, ``sqnorm``,
    ``minor:{rows}:{cols}`` (signed), ``minor:{rows}:{cols}:{+|-}``, ``F:{k}``,
    ``burkholder:{p}``, ``burkholder+:{p}``, ``L``, ``homog:{deg}:{inner}``,
    ``neg:{inner}``, ``pow:{m}:{inner}``, ``mat:{inner}``. ``n`` is the matrix
    dimension for matrix-domain ids.
    """
    head, _, rest = ident.partition(":")
    try:
        if ident == "det":
            return det(n)
        if ident == "det+":
            return det_plus(n)
        if ident == "det-":
            return det_minus(n)
        if ident == "absdet":
            return abs_det(n)
        if ident == "sqnorm":
            return sq_norm(n)
        if ident == "L":
            return sverak_L()
        if head == "minor":
            parts = rest.split(":")
            spec = MinorSpec.parse(":".join(parts[:2]))
            if len(parts) == 2:
                return signed_minor(spec, n)
            if len(parts) == 3:
                return truncated_minor(spec, parts[2], n)
        if head == "F":
            return sverak_F(int(rest), n)
        if head == "burkholder":
            return burkholder(float(rest))
        if head == "burkholder+":
            return burkholder_plus(float(rest))
        if head == "homog":
            deg, _, inner = rest.partition(":")
            return homogenize(integrand_from_id(inner, n), float(deg))
        if head == "pow":
            m, _, inner = rest.partition(":")
            return power(integrand_from_id(inner, n), float(m))
        if head == "neg":
            return negate(integrand_from_id(rest, n))
        if head == "mat":
            return lift_to_matrix(integrand_from_id(rest, n))
    except ValueError as exc:
        if isinstance(exc, InvalidParameterError):
            raise
        raise InvalidParameterError(f"bad integrand id {ident!r}: {exc}") from None
    raise InvalidParameterError(f"unknown integrand id {ident!r}")
