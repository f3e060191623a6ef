"""Prelaminates: finite splitting trees along rank-one directions.

Two explicit constructions are provided. :func:`lemma_hom_split` splits a
point (z, w) of C^2 into tA and two points on the cone a|z| = |w|;
:func:`diagonal_homogeneity_split` splits a matrix A into tA and n matrices of
zero determinant.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import InvalidParameterError, InvalidRequestError, ValidationError
from .integrands import COMPLEX_PAIR
from .matrix_core import FULL, SYMMETRIC, SquareMatrix, as_array, numerical_rank, signed_svd
from .reports import VerificationReport

BARYCENTER_TOL = 1e-10
RANK_TOL = 1e-10
WEIGHT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Node:
    """A tree node. Internal nodes satisfy point = lam * left + (1 - lam) * right."""

    point: np.ndarray
    lam: float | None = None
    left: "Node | None" = None
    right: "Node | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    def to_json(self) -> dict:
        out = {"point": _point_json(self.point)}
        if not self.is_leaf:
            out.update(**{"lambda": float(self.lam), "left": self.left.to_json(),
                          "right": self.right.to_json()})
        return out


def leaf(point) -> Node:
    return Node(np.asarray(point))


def split(point, lam: float, left: Node, right: Node) -> Node:
    """Internal node; a degenerate weight collapses to the surviving child."""
    if lam == 1.0:
        return left
    if lam == 0.0:
        return right
    return Node(np.asarray(point), float(lam), left, right)


def _point_json(p: np.ndarray):
    if np.iscomplexobj(p):
        return [[float(c.real), float(c.imag)] for c in p]
    return p.tolist()


def _point_from_json(obj, domain: str) -> np.ndarray:
    if domain == COMPLEX_PAIR:
        return np.array([complex(re, im) for re, im in obj])
    return np.asarray(obj, dtype=float)


@dataclass(frozen=True, eq=False)
class Prelaminate:
    root: Node
    domain: str = FULL

    @property
    def barycenter(self) -> np.ndarray:
        return self.root.point

    def leaves(self) -> Iterator[tuple[float, Node, str]]:
        """(weight, leaf, path) triples, left subtree first."""
        stack = [(1.0, self.root, "root")]
        while stack:
            w, node, path = stack.pop()
            if node.is_leaf:
                yield w, node, path
            else:
                stack.append((w * (1.0 - node.lam), node.right, path + ".R"))
                stack.append((w * node.lam, node.left, path + ".L"))

    @property
    def atoms(self) -> list[tuple[float, np.ndarray]]:
        return [(w, node.point) for w, node, _ in self.leaves()]

    def internal_nodes(self) -> Iterator[tuple[Node, str]]:
        stack = [(self.root, "root")]
        while stack:
            node, path = stack.pop()
            if not node.is_leaf:
                yield node, path
                stack.append((node.right, path + ".R"))
                stack.append((node.left, path + ".L"))

    def to_json(self) -> dict:
        return {"domain": self.domain, "tree": self.root.to_json()}

    @classmethod
    def from_json(cls, obj: dict) -> "Prelaminate":
        domain = obj.get("domain", FULL)

        def build(d):
            point = _point_from_json(d["point"], domain)
            if "left" not in d:
                return Node(point)
            return Node(point, float(d["lambda"]), build(d["left"]), build(d["right"]))

        return cls(build(obj["tree"]), domain)

    def atoms_csv(self) -> str:
        """One row per atom: weight, then the flattened point (complex as re, im)."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        for w, p in self.atoms:
            flat = np.ravel(p)
            if np.iscomplexobj(flat):
                flat = np.column_stack([flat.real, flat.imag]).ravel()
            writer.writerow([repr(float(w))] + [repr(float(x)) for x in flat])
        return buf.getvalue()


# ---------------------------------------------------------------------------
# h_a(t, k) and the two-level split in C^2


def h_coefficient(a: float, t: float, k: float) -> float:
    """h_a(t,k) = (1/t) (a-k)[t(k-1)(a-1) - (a+1)(k+1)] / ((a+k)[t(k-1)(a+1) - (a-1)(k+1)])."""
    if a < 1 or t < 1 or not 0 <= k <= 1:
        raise InvalidParameterError(f"need a >= 1, t >= 1, 0 <= k <= 1; got a={a}, t={t}, k={k}")
    if a == 1:
        # removable 0/0 at k = 1; the expression reduces to 1/t^2
        return 1.0 / (t * t)
    num = (a - k) * (t * (k - 1) * (a - 1) - (a + 1) * (k + 1))
    den = (a + k) * (t * (k - 1) * (a + 1) - (a - 1) * (k + 1))
    if den == 0:
        raise InvalidParameterError(f"h_a(t,k) undefined at a={a}, t={t}, k={k}")
    return num / (den * t)


@dataclass(frozen=True)
class HomSplitRequest:
    a: float
    z: complex
    w: complex
    t: float

    def __post_init__(self):
        if self.a < 1:
            raise InvalidRequestError(f"aperture a must be >= 1, got {self.a}")
        if self.t < 1:
            raise InvalidRequestError(f"t must be >= 1, got {self.t}")
        if self.z == 0:
            raise InvalidRequestError("z must be non-zero")
        if self.k > 1:
            raise InvalidRequestError(f"need |w| <= |z|, got k = {self.k}")

    @property
    def k(self) -> float:
        # |w| = |z| computed from rounded inputs may land a few ulps above 1
        k = abs(self.w) / abs(self.z)
        return 1.0 if 1.0 < k <= 1.0 + 1e-12 else k

    @classmethod
    def from_k(cls, a: float, t: float, k: float, z: complex = 1.0) -> "HomSplitRequest":
        return cls(a, z, k * abs(z), t)


def split_weights(a: float, t: float, k: float) -> tuple[float, float]:
    """The weights (lambda_1, lambda_2) of the two-level split."""
    if a == 1:
        # (a - k)/(a - k) cancels; this also covers the 0/0 at k = 1
        lam1 = 1.0 / t
    else:
        lam1 = 2 * (a - k) / ((a - 1) * (k + 1) - t * (a + 1) * (k - 1))
    lam2 = (1 + k + t * k - t + a * (1 + k + t - k * t)) / (2 * (a + k) * t)
    return lam1, lam2


def lemma_hom_split(req: HomSplitRequest) -> tuple[Prelaminate, float, float]:
    """Split A = (z, w) as A = l1 A1 + (1-l1) B1, A1 = l2 (tA) + (1-l2) B2.

    B1 and B2 lie on the cone a|z| = |w|, both split directions are rank-one
    and l1 * l2 = h_a(t, k).
    """
    a, t, k = float(req.a), float(req.t), req.k
    A = np.array([req.z, req.w], dtype=complex)
    if t == 1:
        return Prelaminate(leaf(A), COMPLEX_PAIR), 1.0, 1.0
    r = abs(req.z)
    # phases via angle(): z / |z| overflows for subnormal inputs
    u = np.exp(1j * np.angle(req.z))
    v = np.exp(1j * np.angle(req.w))

    def point(x, y):
        return np.array([x * u, y * v], dtype=complex)

    A1 = point(r / 2 * (1 + k + t - k * t), r / 2 * (1 + k - t + k * t))
    B1 = point(r * (1 + k) / (a + 1), r * (1 + k) * a / (a + 1))
    B2 = point(t * r * (1 - k) / (a + 1), -t * r * (1 - k) * a / (a + 1))
    lam1, lam2 = split_weights(a, t, k)
    inner = split(A1, lam2, leaf(t * A), leaf(B2))
    root = split(A, lam1, inner, leaf(B1))
    return Prelaminate(root, COMPLEX_PAIR), lam1, lam2


# ---------------------------------------------------------------------------
# diagonal splitting in R^{n x n}


def _rotation_eigh(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    lam, V = np.linalg.eigh(a)
    if np.linalg.det(V) < 0:
        V[:, 0] *= -1
    return lam, V


def diagonal_homogeneity_split(A, t: float, space: str | None = None) -> Prelaminate:
    """Prelaminate A = t^-n (tA) + sum_j (t-1) t^-j B_j with det B_j = 0.

    For diagonal Sigma the chain is A_{j-1} = A_j / t + (1 - 1/t) B_j where A_j
    scales the first j diagonal slots by t and B_j also zeroes slot j. A general
    A is conjugated through its signed SVD; a symmetric A through a rotation
    diagonalising it, so every atom stays symmetric.
    """
    if t < 1:
        raise InvalidParameterError(f"t must be >= 1, got {t}")
    if space is None:
        space = A.space_tag if isinstance(A, SquareMatrix) else FULL
    a = as_array(A)
    n = a.shape[0]
    if space == SYMMETRIC:
        if not np.array_equal(a, a.T):
            raise ValidationError("symmetric split requested for a non-symmetric matrix")
        sigma, V = _rotation_eigh(a)

        def conj(d):
            m = V @ np.diag(d) @ V.T
            return (m + m.T) / 2
    else:
        svd = signed_svd(a)
        sigma = svd.sigma

        def conj(d):
            return svd.R @ np.diag(d) @ svd.Q

    node = leaf(t * a)
    for j in range(n, 0, -1):
        a_prev = np.concatenate([t * sigma[: j - 1], sigma[j - 1:]])
        b_j = np.concatenate([t * sigma[: j - 1], [0.0], sigma[j:]])
        point = a if j == 1 else conj(a_prev)
        node = split(point, 1.0 / t, node, leaf(conj(b_j)))
    return Prelaminate(node, space)


# ---------------------------------------------------------------------------
# verification


def _is_rank_one(direction: np.ndarray, domain: str) -> bool:
    """Rank <= 1; a zero direction is a trivial split and accepted."""
    if domain == COMPLEX_PAIR:
        xi, zeta = abs(direction[0]), abs(direction[1])
        return abs(xi - zeta) <= RANK_TOL * max(1.0, xi, zeta)
    return numerical_rank(direction, RANK_TOL) <= 1


def _scale(p: np.ndarray) -> float:
    return 1.0 + float(np.linalg.norm(np.ravel(p)))


def verify_prelaminate(P: Prelaminate) -> VerificationReport:
    """Check the splitting-tree witness: weights, barycenters, rank-one directions."""
    failures = []
    for node, path in P.internal_nodes():
        if not 0.0 <= node.lam <= 1.0:
            failures.append({"node": path, "check": "lambda in [0,1]", "lambda": node.lam})
        combo = node.lam * node.left.point + (1.0 - node.lam) * node.right.point
        err = float(np.linalg.norm(np.ravel(node.point - combo)))
        if err > BARYCENTER_TOL * _scale(node.point):
            failures.append({"node": path, "check": "barycenter", "error": err})
        direction = node.left.point - node.right.point
        if not _is_rank_one(direction, P.domain):
            failures.append({"node": path, "check": "rank-one direction"})
        if P.domain == SYMMETRIC and not np.allclose(node.point, node.point.T, rtol=0, atol=1e-12 * _scale(node.point)):
            failures.append({"node": path, "check": "symmetric"})

    leaves = list(P.leaves())
    weights = np.array([w for w, _, _ in leaves])
    if np.any(weights <= 0):
        failures.append({"node": "leaves", "check": "positive weights", "min": float(weights.min())})
    total = float(weights.sum())
    if abs(total - 1.0) > WEIGHT_TOL:
        failures.append({"node": "leaves", "check": "weights sum to 1", "sum": total})
    mean = sum(w * node.point for w, node, _ in leaves)
    err = float(np.linalg.norm(np.ravel(mean - P.root.point)))
    if err > BARYCENTER_TOL * _scale(P.root.point):
        failures.append({"node": "root", "check": "leaf barycenter", "error": err})
    return VerificationReport("prelaminate", not failures, failures,
                              {"atoms": len(leaves), "weight_sum": total, "barycenter_error": err})


def to_measure(P: Prelaminate):
    """The leaf measure of a verified prelaminate.

    Complex-pair points are mapped to 2x2 matrices through the inverse of
    the C^2 identification, which preserves rank-one directions.
    """
    from .laminate import DiscreteMeasure
    from .matrix_core import from_complex_pair

    report = verify_prelaminate(P)
    if not report.passed:
        raise ValidationError(f"not a valid prelaminate: {report.failures[0]}")
    atoms = P.atoms
    if P.domain == COMPLEX_PAIR:
        return DiscreteMeasure(FULL, 2, [(w, from_complex_pair(p)) for w, p in atoms])
    return DiscreteMeasure(P.domain, P.root.point.shape[0], atoms)
