"""Small dense matrix primitives: minors, signed singular values, the
conformal/anticonformal split of 2x2 matrices and the index of a symmetric
matrix.

Most functions accept a single ``(n, n)`` array or a stack ``(..., n, n)``
and broadcast over the leading axes.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Iterator

import numpy as np

from .errors import DimensionError, InvalidSpaceError, InvalidSpecError

FULL = "full"
SYMMETRIC = "symmetric"
SPACES = (FULL, SYMMETRIC)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


def _first_asymmetry(a: np.ndarray) -> tuple[int, int] | None:
    bad = np.argwhere(a != a.T)
    if bad.size == 0:
        return None
    i, j = bad[0]
    return int(i), int(j)


@dataclass(frozen=True, eq=False)
class SquareMatrix:
    """An immutable n x n real matrix tagged with the space it lives in."""

    entries: np.ndarray
    space_tag: str = FULL

    def __post_init__(self):
        a = _readonly(self.entries)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise DimensionError(f"expected a non-empty square matrix, got shape {a.shape}")
        if self.space_tag not in SPACES:
            raise InvalidSpaceError(f"unknown space tag {self.space_tag!r}")
        if self.space_tag == SYMMETRIC:
            bad = _first_asymmetry(a)
            if bad is not None:
                i, j = bad
                raise InvalidSpaceError(
                    f"entry ({i + 1},{j + 1}) = {float(a[i, j])!r} differs from "
                    f"entry ({j + 1},{i + 1}) = {float(a[j, i])!r}"
                )
        object.__setattr__(self, "entries", a)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, SquareMatrix):
            return NotImplemented
        return self.space_tag == other.space_tag and np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash((self.space_tag, self.entries.tobytes()))

    def to_json(self) -> dict:
        return {"space_tag": self.space_tag, "entries": self.entries.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "SquareMatrix":
        return cls(np.asarray(obj["entries"], dtype=float), obj.get("space_tag", FULL))


def as_array(A) -> np.ndarray:
    if isinstance(A, SquareMatrix):
        return A.entries
    return np.asarray(A, dtype=float)


def _square(A) -> np.ndarray:
    a = as_array(A)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise DimensionError(f"expected square matrices, got shape {a.shape}")
    return a


# ---------------------------------------------------------------------------
# minors


@dataclass(frozen=True)
class MinorSpec:
    """Row and column index sets (1-based, strictly increasing) of a minor."""

    rows: tuple[int, ...]
    cols: tuple[int, ...]

    def __post_init__(self):
        rows, cols = tuple(int(i) for i in self.rows), tuple(int(j) for j in self.cols)
        if not rows or len(rows) != len(cols):
            raise InvalidSpecError(f"rows {rows} and cols {cols} must be non-empty and equal-sized")
        for name, idx in (("rows", rows), ("cols", cols)):
            if any(b <= a for a, b in zip(idx, idx[1:])):
                raise InvalidSpecError(f"{name} {idx} must be strictly increasing")
            if idx[0] < 1:
                raise InvalidSpecError(f"{name} {idx} must be 1-based")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)

    @property
    def order(self) -> int:
        return len(self.rows)

    def check(self, n: int) -> None:
        if max(self.rows[-1], self.cols[-1]) > n:
            raise InvalidSpecError(f"minor {self.label} out of range for n={n}")

    @property
    def label(self) -> str:
        return f"{','.join(map(str, self.rows))}:{','.join(map(str, self.cols))}"

    @classmethod
    def parse(cls, label: str) -> "MinorSpec":
        try:
            r, c = label.split(":")
            return cls(tuple(int(x) for x in r.split(",")), tuple(int(x) for x in c.split(",")))
        except ValueError as exc:
            if isinstance(exc, InvalidSpecError):
                raise
            raise InvalidSpecError(f"cannot parse minor label {label!r}") from None


def minor_count(n: int) -> int:
    """Number of minors of an n x n matrix, sum_j C(n, j)^2 = C(2n, n) - 1."""
    return sum(comb(n, j) ** 2 for j in range(1, n + 1))


def minor_specs(n: int, order: int | None = None) -> Iterator[MinorSpec]:
    """Minors in canonical order: ascending order, then lexicographic (rows, cols)."""
    orders = range(1, n + 1) if order is None else (order,)
    for s in orders:
        for rows in combinations(range(1, n + 1), s):
            for cols in combinations(range(1, n + 1), s):
                yield MinorSpec(rows, cols)


def _det(sub: np.ndarray) -> np.ndarray:
    s = sub.shape[-1]
    if s == 1:
        return sub[..., 0, 0]
    if s == 2:
        return sub[..., 0, 0] * sub[..., 1, 1] - sub[..., 0, 1] * sub[..., 1, 0]
    return np.linalg.det(sub)


def minor(A, spec: MinorSpec):
    """Plain determinant of the submatrix selected by ``spec`` (no cofactor sign)."""
    a = _square(A)
    spec.check(a.shape[-1])
    r = np.asarray(spec.rows) - 1
    c = np.asarray(spec.cols) - 1
    out = _det(a[..., r[:, None], c[None, :]])
    return float(out) if np.ndim(out) == 0 else out


def minors_array(A, order: int | None = None) -> np.ndarray:
    """All minors (or those of one order) of a stack of matrices, shape ``(..., L)``."""
    a = _square(A)
    n = a.shape[-1]
    orders = range(1, n + 1) if order is None else (order,)
    blocks = []
    for s in orders:
        idx = np.array(list(combinations(range(n), s)), dtype=int)
        # (..., C, C, s, s): rows from idx[i], cols from idx[j]
        sub = a[..., idx[:, None, :, None], idx[None, :, None, :]]
        blocks.append(_det(sub).reshape(a.shape[:-2] + (-1,)))
    return np.concatenate(blocks, axis=-1)


@dataclass(frozen=True, eq=False)
class MinorVector:
    n: int
    values: np.ndarray

    def __post_init__(self):
        v = _readonly(self.values)
        if v.shape != (minor_count(self.n),):
            raise DimensionError(f"minor vector for n={self.n} needs length {minor_count(self.n)}")
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.values)

    def of_order(self, s: int) -> np.ndarray:
        start = sum(comb(self.n, j) ** 2 for j in range(1, s))
        return self.values[start:start + comb(self.n, s) ** 2]


def all_minors(A) -> MinorVector:
    a = _square(A)
    if a.ndim != 2:
        raise DimensionError("all_minors takes a single matrix; use minors_array for stacks")
    return MinorVector(a.shape[0], minors_array(a))


# ---------------------------------------------------------------------------
# signed singular values


@dataclass(frozen=True, eq=False)
class SignedSvd:
    """A = R @ diag(sigma) @ Q with Q, R in SO(n) and sign(sigma[-1]) = sign(det A)."""

    Q: np.ndarray
    R: np.ndarray
    sigma: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return self.R @ np.diag(self.sigma) @ self.Q


def signed_svd(A) -> SignedSvd:
    a = _square(A)
    if a.ndim != 2:
        raise DimensionError("signed_svd takes a single matrix")
    U, s, Vt = np.linalg.svd(a)
    s = s.copy()
    if np.linalg.det(U) < 0:
        U[:, -1] *= -1
        s[-1] *= -1
    if np.linalg.det(Vt) < 0:
        Vt[-1, :] *= -1
        s[-1] *= -1
    return SignedSvd(Q=Vt, R=U, sigma=s)


def signed_singular_values(A) -> np.ndarray:
    """Signed singular values of a stack of matrices (no factors)."""
    a = _square(A)
    s = np.linalg.svd(a, compute_uv=False)
    sign = np.sign(np.linalg.det(a))
    s[..., -1] *= np.where(sign == 0, 1.0, sign)
    return s


# ---------------------------------------------------------------------------
# 2x2: conformal / anticonformal split and the C^2 identification


@dataclass(frozen=True, eq=False)
class ConformalSplit:
    a_plus: np.ndarray
    a_minus: np.ndarray


def _check_2x2(a: np.ndarray) -> None:
    if a.shape[-2:] != (2, 2):
        raise DimensionError(f"expected 2x2 matrices, got shape {a.shape}")


def conformal_split(A) -> ConformalSplit:
    a = _square(A)
    _check_2x2(a)
    p = (a[..., 0, 0] + a[..., 1, 1]) / 2
    q = (a[..., 1, 0] - a[..., 0, 1]) / 2
    r = (a[..., 0, 0] - a[..., 1, 1]) / 2
    s = (a[..., 0, 1] + a[..., 1, 0]) / 2
    plus = np.stack([np.stack([p, -q], -1), np.stack([q, p], -1)], -2)
    minus = np.stack([np.stack([r, s], -1), np.stack([s, -r], -1)], -2)
    return ConformalSplit(plus, minus)


def conformal_norms(A) -> tuple[np.ndarray, np.ndarray]:
    """Frobenius norms |A+|, |A-| without forming the split matrices."""
    a = _square(A)
    _check_2x2(a)
    zp = np.hypot(a[..., 0, 0] + a[..., 1, 1], a[..., 1, 0] - a[..., 0, 1])
    zm = np.hypot(a[..., 0, 0] - a[..., 1, 1], a[..., 0, 1] + a[..., 1, 0])
    return zp / np.sqrt(2), zm / np.sqrt(2)


@dataclass(frozen=True)
class ComplexPair:
    z: complex
    w: complex

    def as_array(self) -> np.ndarray:
        return np.array([self.z, self.w], dtype=complex)


def to_complex_pair(A) -> np.ndarray:
    """[[a, b], [c, d]] -> ((a+d) + i(c-b), (a-d) + i(b+c)); shape (..., 2) complex."""
    a = _square(A)
    _check_2x2(a)
    z = (a[..., 0, 0] + a[..., 1, 1]) + 1j * (a[..., 1, 0] - a[..., 0, 1])
    w = (a[..., 0, 0] - a[..., 1, 1]) + 1j * (a[..., 0, 1] + a[..., 1, 0])
    return np.stack([z, w], axis=-1)


def from_complex_pair(zw) -> np.ndarray:
    """Inverse of :func:`to_complex_pair`."""
    zw = np.asarray(zw, dtype=complex)
    if zw.shape[-1] != 2:
        raise DimensionError(f"expected (..., 2) complex pairs, got shape {zw.shape}")
    z, w = zw[..., 0], zw[..., 1]
    a = (z.real + w.real) / 2
    d = (z.real - w.real) / 2
    c = (z.imag + w.imag) / 2
    b = (w.imag - z.imag) / 2
    return np.stack([np.stack([a, b], -1), np.stack([c, d], -1)], -2)


# ---------------------------------------------------------------------------
# index of a symmetric matrix


def _require_symmetric(A) -> np.ndarray:
    if isinstance(A, SquareMatrix):
        if A.space_tag != SYMMETRIC:
            raise InvalidSpaceError("index_of needs a matrix tagged symmetric")
        return A.entries
    a = _square(A)
    if not np.array_equal(a, np.swapaxes(a, -1, -2)):
        raise InvalidSpaceError("index_of needs a symmetric matrix")
    return a


def _eigvalsh_2x2(s: np.ndarray) -> np.ndarray:
    a, b, d = s[..., 0, 0], s[..., 0, 1], s[..., 1, 1]
    m = (a + d) / 2
    r = np.hypot((a - d) / 2, b)
    big = m + np.where(m >= 0, r, -r)
    # the other root from det / big avoids cancellation in m - r
    small = np.where(big != 0, (a * d - b * b) / np.where(big != 0, big, 1.0), 0.0)
    return np.stack([big, small], axis=-1)


def index_array(S) -> np.ndarray:
    """Number of negative eigenvalues for a stack of symmetric matrices.

    Entries are -1 where some eigenvalue lies within eps = 1e-10 (1 + |S|) of
    zero. Symmetry is not checked here.
    """
    s = _square(S)
    if s.shape[-1] == 3:
        return _index_3x3(s)
    return _index_from_eig(s, _eigvalsh_2x2(s) if s.shape[-1] == 2 else np.linalg.eigvalsh(s))


def _index_from_eig(s: np.ndarray, eig: np.ndarray) -> np.ndarray:
    eps = 1e-10 * (1.0 + np.linalg.norm(s, axis=(-2, -1)))
    eps = eps[..., None]
    idx = np.sum(eig < -eps, axis=-1)
    singular = np.any(np.abs(eig) <= eps, axis=-1)
    return np.where(singular, -1, idx)


def _index_3x3(s: np.ndarray) -> np.ndarray:
    """Descartes' rule on the characteristic polynomial (exact for real roots).

    Sign changes in (1, E1, E2, E3), E_j the sums of principal j-minors, count
    the negative eigenvalues. It is used only where |det| > 100 eps |S|^2,
    which keeps every eigenvalue out of [-eps, eps]; the rest go to eigvalsh.
    """
    a, b, c = s[..., 0, 0], s[..., 1, 1], s[..., 2, 2]
    x, y, z = s[..., 0, 1], s[..., 0, 2], s[..., 1, 2]
    e1 = a + b + c
    e2 = a * b + a * c + b * c - x * x - y * y - z * z
    e3 = a * (b * c - z * z) - x * (x * c - z * y) + y * (x * z - b * y)
    fro2 = np.sum(s * s, axis=(-2, -1))
    eps = 1e-10 * (1.0 + np.sqrt(fro2))
    signs = np.stack([np.ones_like(e1), e1, e2, e3], axis=-1) > 0
    out = np.sum(signs[..., 1:] != signs[..., :-1], axis=-1)
    unsure = ~(np.abs(e3) > 100.0 * eps * fro2)
    if np.any(unsure):
        out = np.array(out)
        sub = s[unsure]
        out[unsure] = _index_from_eig(sub, np.linalg.eigvalsh(sub))
    return out


def index_of(A) -> int | None:
    """Index (count of negative eigenvalues) of a symmetric matrix.

    Returns None when the matrix is numerically singular, i.e. some
    eigenvalue lies in [-eps, eps] with eps = 1e-10 (1 + |A|).
    """
    a = _require_symmetric(A)
    if a.ndim != 2:
        raise DimensionError("index_of takes a single matrix; use index_array for stacks")
    k = int(index_array(a))
    return None if k < 0 else k


def numerical_rank(X, rtol: float = 1e-10) -> np.ndarray | int:
    """Rank of (a stack of) matrices, counting singular values above rtol * max(1, s_max)."""
    x = _square(X)
    s = np.linalg.svd(x, compute_uv=False)
    thresh = rtol * np.maximum(1.0, s[..., :1])
    r = np.sum(s > thresh, axis=-1)
    return int(r) if np.ndim(r) == 0 else r

