"""Subspaces and closed linear relations in finite-dimensional real inner-product spaces.

Every subspace is stored through a column-orthonormal basis together with the
tolerance used to decide its rank.  A linear relation from ``H_a`` to ``H_b`` is a
subspace of ``H_a + H_b``; the first ``dim_a`` coordinates are the source block
and the remaining ``dim_b`` the target block.  Partially defined operators,
their (possibly multivalued) adjoints, compositions and sums are all relations.

Rank decisions inside a graph (domain, kernel, range, multivalued part) use the
orthonormal graph basis as the unit of scale, so ``dim(graph) = dim(domain) +
dim(mul)`` and ``dim(graph) = dim(kernel) + dim(range)`` hold exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "DimensionMismatch",
    "Tolerance",
    "DEFAULT_TOL",
    "Subspace",
    "LinearRelation",
    "orthonormalize",
    "column_span",
    "zero_subspace",
    "full_subspace",
    "coordinate_subspace",
    "sum",
    "intersect",
    "complement",
    "project",
    "contains",
    "equal",
    "angle_defect",
    "containment_defect",
    "image",
    "relation_from_operator",
    "relation_from_pairs",
    "identity_relation",
    "zero_relation",
    "adjoint",
    "compose",
    "relation_sum",
    "direct_sum",
    "transform",
    "domain",
    "range",
    "kernel",
    "mul",
]

_builtin_range = range


class DimensionMismatch(ValueError):
    """Raised when operands live in spaces of different dimensions."""


@dataclass(frozen=True)
class Tolerance:
    """Rank and angle thresholds.

    ``rel_eps`` scales the largest singular value of an input to give the rank
    cutoff, floored at ``abs_floor``.  ``angle_eps`` is the largest sine of a
    principal angle that still counts as "inside" for containment and equality.
    """

    rel_eps: float = 1e-10
    abs_floor: float = 1e-13
    angle_eps: float = 1e-8

    def __post_init__(self):
        if not (self.rel_eps > 0 and self.abs_floor > 0 and self.angle_eps > 0):
            raise ValueError("tolerance entries must be strictly positive")

    def cutoff(self, scale: float) -> float:
        return max(self.rel_eps * float(scale), self.abs_floor)

    def looser(self, other: "Tolerance") -> "Tolerance":
        if other is self:
            return self
        return Tolerance(
            max(self.rel_eps, other.rel_eps),
            max(self.abs_floor, other.abs_floor),
            max(self.angle_eps, other.angle_eps),
        )

    def to_dict(self) -> dict:
        return {"rel_eps": self.rel_eps, "abs_floor": self.abs_floor, "angle_eps": self.angle_eps}


DEFAULT_TOL = Tolerance()


def _looser(*tols: Tolerance) -> Tolerance:
    out = tols[0]
    for t in tols[1:]:
        out = out.looser(t)
    return out


@dataclass(frozen=True, eq=False)
class Subspace:
    ambient_dim: int
    basis: np.ndarray
    tol: Tolerance = field(default=DEFAULT_TOL)

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float)
        if b.ndim != 2 or b.shape[0] != self.ambient_dim:
            b = b.reshape(self.ambient_dim, -1)
        if b.shape[1] > self.ambient_dim:
            raise DimensionMismatch("more basis vectors than ambient dimensions")
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def codim(self) -> int:
        return self.ambient_dim - self.dim

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.T

    def orthonormality_defect(self) -> float:
        if self.dim == 0:
            return 0.0
        return float(np.abs(self.basis.T @ self.basis - np.eye(self.dim)).max())

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim}, ambient_dim={self.ambient_dim})"


def _check_same_ambient(*subs: Subspace) -> None:
    dims = {s.ambient_dim for s in subs}
    if len(dims) > 1:
        raise DimensionMismatch(f"ambient dimensions differ: {sorted(dims)}")


def _svd_rank(m: np.ndarray, tol: Tolerance, scale: float | None):
    u, s, vt = np.linalg.svd(m, full_matrices=True)
    if s.size == 0:
        return u, s, vt, 0
    ref = s[0] if scale is None else scale
    r = int(np.count_nonzero(s > tol.cutoff(ref)))
    return u, s, vt, r


def column_span(m, tol: Tolerance = DEFAULT_TOL, scale: float | None = None) -> Subspace:
    """Orthonormal basis of the column span of ``m``.

    The rank cutoff is ``tol.cutoff(scale)``; by default ``scale`` is the largest
    singular value of ``m``.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise DimensionMismatch("column_span expects a 2-d array")
    n = m.shape[0]
    if m.shape[1] == 0 or n == 0:
        return Subspace(n, np.zeros((n, 0)), tol)
    u, _, _, r = _svd_rank(m, tol, scale)
    return Subspace(n, u[:, :r].copy(), tol)


def orthonormalize(vectors: Iterable, tol: Tolerance = DEFAULT_TOL, ambient_dim: int | None = None) -> Subspace:
    """Orthonormal basis of the span of a list of vectors."""
    vecs = [np.asarray(v, dtype=float).ravel() for v in vectors]
    lengths = {v.size for v in vecs}
    if ambient_dim is not None:
        lengths.add(ambient_dim)
    if len(lengths) > 1:
        raise DimensionMismatch(f"vectors have mismatched lengths {sorted(lengths)}")
    if not vecs:
        if ambient_dim is None:
            raise DimensionMismatch("ambient_dim is required for an empty vector list")
        return zero_subspace(ambient_dim, tol)
    return column_span(np.column_stack(vecs), tol)


def zero_subspace(n: int, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    return Subspace(n, np.zeros((n, 0)), tol)


def full_subspace(n: int, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    return Subspace(n, np.eye(n), tol)


def coordinate_subspace(n: int, indices: Sequence[int], tol: Tolerance = DEFAULT_TOL) -> Subspace:
    return Subspace(n, np.eye(n)[:, list(indices)], tol)


def sum(a: Subspace, b: Subspace) -> Subspace:  # noqa: A001 - mirrors the "+" of subspaces
    _check_same_ambient(a, b)
    return column_span(np.hstack([a.basis, b.basis]), _looser(a.tol, b.tol), scale=1.0)


def complement(a: Subspace) -> Subspace:
    n, k = a.ambient_dim, a.dim
    if k == 0:
        return full_subspace(n, a.tol)
    if k == n:
        return zero_subspace(n, a.tol)
    u, _, _ = np.linalg.svd(a.basis, full_matrices=True)
    return Subspace(n, u[:, k:].copy(), a.tol)


def intersect(a: Subspace, b: Subspace) -> Subspace:
    """``A ∩ B = (A^⊥ + B^⊥)^⊥``."""
    _check_same_ambient(a, b)
    return complement(sum(complement(a), complement(b)))


def project(a: Subspace, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape[0] != a.ambient_dim:
        raise DimensionMismatch("vector does not live in the ambient space")
    return a.basis @ (a.basis.T @ v)


def containment_defect(a: Subspace, b: Subspace) -> float:
    """Largest sine of a principal angle between ``b`` and ``a`` (0 when b ⊆ a)."""
    _check_same_ambient(a, b)
    if b.dim == 0:
        return 0.0
    if a.dim == 0:
        return 1.0
    resid = b.basis - a.basis @ (a.basis.T @ b.basis)
    return float(np.linalg.norm(resid, 2))


def contains(a: Subspace, b: Subspace) -> bool:
    """True when ``b ⊆ a`` within the looser angle tolerance of the two."""
    return containment_defect(a, b) <= _looser(a.tol, b.tol).angle_eps


def angle_defect(a: Subspace, b: Subspace) -> float:
    """Max principal-angle sine between two subspaces; 1.0 if dimensions differ."""
    _check_same_ambient(a, b)
    if a.dim != b.dim:
        return 1.0
    return max(containment_defect(a, b), containment_defect(b, a))


def equal(a: Subspace, b: Subspace) -> bool:
    return angle_defect(a, b) <= _looser(a.tol, b.tol).angle_eps


def image(m, a: Subspace) -> Subspace:
    """Image of subspace ``a`` under the linear map ``m``."""
    m = np.asarray(m, dtype=float)
    if m.shape[1] != a.ambient_dim:
        raise DimensionMismatch("map does not act on the subspace's ambient space")
    return column_span(m @ a.basis, a.tol)


def _null(m: np.ndarray, tol: Tolerance, scale: float = 1.0) -> np.ndarray:
    """Orthonormal basis (columns) of the null space of ``m``."""
    k = m.shape[1]
    if k == 0:
        return np.zeros((0, 0))
    if m.shape[0] == 0:
        return np.eye(k)
    _, _, vt, r = _svd_rank(m, tol, scale)
    return vt[r:].T.copy()


@dataclass(frozen=True, eq=False)
class LinearRelation:
    dim_a: int
    dim_b: int
    graph: Subspace

    def __post_init__(self):
        if self.graph.ambient_dim != self.dim_a + self.dim_b:
            raise DimensionMismatch(
                f"graph lives in dimension {self.graph.ambient_dim}, expected {self.dim_a}+{self.dim_b}"
            )

    @property
    def tol(self) -> Tolerance:
        return self.graph.tol

    @property
    def source_block(self) -> np.ndarray:
        return self.graph.basis[: self.dim_a]

    @property
    def target_block(self) -> np.ndarray:
        return self.graph.basis[self.dim_a :]

    @cached_property
    def _source_split(self):
        g1, g2 = self.source_block, self.target_block
        k = self.graph.dim
        if k == 0:
            return zero_subspace(self.dim_a, self.tol), zero_subspace(self.dim_b, self.tol)
        if self.dim_a == 0:
            return zero_subspace(0, self.tol), column_span(g2, self.tol, scale=1.0)
        u, _, vt, r = _svd_rank(g1, self.tol, 1.0)
        dom = Subspace(self.dim_a, u[:, :r].copy(), self.tol)
        mul_coeffs = vt[r:].T
        m = column_span(g2 @ mul_coeffs, self.tol, scale=1.0)
        return dom, m

    @cached_property
    def _target_split(self):
        g1, g2 = self.source_block, self.target_block
        k = self.graph.dim
        if k == 0:
            return zero_subspace(self.dim_a, self.tol), zero_subspace(self.dim_b, self.tol)
        if self.dim_b == 0:
            return column_span(g1, self.tol, scale=1.0), zero_subspace(0, self.tol)
        u, _, vt, r = _svd_rank(g2, self.tol, 1.0)
        rng = Subspace(self.dim_b, u[:, :r].copy(), self.tol)
        ker = column_span(g1 @ vt[r:].T, self.tol, scale=1.0)
        return ker, rng

    def domain(self) -> Subspace:
        return self._source_split[0]

    def mul(self) -> Subspace:
        """Multivalued part ``{v : (0, v) in graph}``."""
        return self._source_split[1]

    def kernel(self) -> Subspace:
        """``{u : (u, 0) in graph}``."""
        return self._target_split[0]

    def range(self) -> Subspace:
        return self._target_split[1]

    @property
    def is_single_valued(self) -> bool:
        return self.mul().dim == 0

    @cached_property
    def _adjoint(self) -> "LinearRelation":
        tau = np.vstack([self.target_block, -self.source_block])
        g = complement(Subspace(self.dim_a + self.dim_b, tau, self.tol))
        return LinearRelation(self.dim_b, self.dim_a, g)

    def adjoint(self) -> "LinearRelation":
        return self._adjoint

    def operator_matrix(self) -> np.ndarray:
        """Ambient matrix of a single-valued relation, zero off the domain."""
        if not self.is_single_valued:
            raise ValueError("relation is multivalued")
        g1, g2 = self.source_block, self.target_block
        if self.graph.dim == 0:
            return np.zeros((self.dim_b, self.dim_a))
        return g2 @ np.linalg.pinv(g1, rcond=self.tol.cutoff(1.0))

    def contains_pairs(self, us, vs) -> float:
        """Largest relative distance of the pairs ``(u_j, v_j)`` (columns) from the graph."""
        us, vs = np.asarray(us, float), np.asarray(vs, float)
        k = us.shape[1] if us.ndim == 2 else (vs.shape[1] if vs.ndim == 2 else 1)
        pairs = np.vstack([us.reshape(self.dim_a, k), vs.reshape(self.dim_b, k)])
        if pairs.shape[1] == 0:
            return 0.0
        resid = pairs - self.graph.basis @ (self.graph.basis.T @ pairs)
        norms = np.maximum(np.linalg.norm(pairs, axis=0), 1.0)
        return float((np.linalg.norm(resid, axis=0) / norms).max())

    def __repr__(self) -> str:
        return f"LinearRelation({self.dim_a}->{self.dim_b}, graph_dim={self.graph.dim})"


def domain(r: LinearRelation) -> Subspace:
    return r.domain()


def range(r: LinearRelation) -> Subspace:  # noqa: A001
    return r.range()


def kernel(r: LinearRelation) -> Subspace:
    return r.kernel()


def mul(r: LinearRelation) -> Subspace:
    return r.mul()


def adjoint(r: LinearRelation) -> LinearRelation:
    """``G* = {(v, w) : <u', v> = <u, w> for all (u, u') in G}``."""
    return r.adjoint()


def relation_from_operator(action, dom: Subspace) -> LinearRelation:
    """Graph of ``action`` restricted to ``dom``."""
    a = np.asarray(action, dtype=float)
    if a.ndim != 2 or a.shape[1] != dom.ambient_dim:
        raise DimensionMismatch(f"action of shape {a.shape} cannot act on dimension {dom.ambient_dim}")
    q = dom.basis
    g = np.vstack([q, a @ q])
    return LinearRelation(a.shape[1], a.shape[0], column_span(g, dom.tol, scale=1.0))


def relation_from_pairs(us, vs, tol: Tolerance = DEFAULT_TOL) -> LinearRelation:
    """Relation spanned by pairs ``(u_j, v_j)`` given as matrix columns."""
    us = np.asarray(us, dtype=float)
    vs = np.asarray(vs, dtype=float)
    if us.shape[1] != vs.shape[1]:
        raise DimensionMismatch("pair lists have different lengths")
    return LinearRelation(us.shape[0], vs.shape[0], column_span(np.vstack([us, vs]), tol))


def identity_relation(n: int, tol: Tolerance = DEFAULT_TOL) -> LinearRelation:
    return relation_from_operator(np.eye(n), full_subspace(n, tol))


def zero_relation(dim_a: int, dim_b: int, tol: Tolerance = DEFAULT_TOL) -> LinearRelation:
    """The relation whose graph is ``{0}``."""
    return LinearRelation(dim_a, dim_b, zero_subspace(dim_a + dim_b, tol))


def _embed(blocks: Sequence[np.ndarray], sizes: Sequence[int], where: Sequence[int]) -> np.ndarray:
    """Stack ``blocks`` into the coordinate blocks ``where`` of a product space."""
    k = blocks[0].shape[1]
    out = np.zeros((int(np.sum(sizes)), k))
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    for blk, w in zip(blocks, where):
        out[offsets[w] : offsets[w + 1]] = blk
    return out


def _block_eye(sizes: Sequence[int], which: int) -> np.ndarray:
    n = int(np.sum(sizes))
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    return np.eye(n)[:, offsets[which] : offsets[which + 1]]


def compose(s: LinearRelation, r: LinearRelation) -> LinearRelation:
    """``s ∘ r = {(u, w) : (u, v) in r and (v, w) in s for some v}``."""
    if r.dim_b != s.dim_a:
        raise DimensionMismatch(f"cannot compose {r!r} with {s!r}")
    tol = _looser(r.tol, s.tol)
    sizes = (r.dim_a, r.dim_b, s.dim_b)
    r_tilde = np.hstack([_embed([r.source_block, r.target_block], sizes, (0, 1)), _block_eye(sizes, 2)])
    s_tilde = np.hstack([_block_eye(sizes, 0), _embed([s.source_block, s.target_block], sizes, (1, 2))])
    n = int(np.sum(sizes))
    x = intersect(column_span(r_tilde, tol, scale=1.0), column_span(s_tilde, tol, scale=1.0))
    keep = np.r_[0 : r.dim_a, r.dim_a + r.dim_b : n]
    return LinearRelation(r.dim_a, s.dim_b, column_span(x.basis[keep], tol, scale=1.0))


def relation_sum(r1: LinearRelation, r2: LinearRelation) -> LinearRelation:
    """Operator sum ``{(u, w1 + w2) : (u, w1) in r1, (u, w2) in r2}``."""
    if (r1.dim_a, r1.dim_b) != (r2.dim_a, r2.dim_b):
        raise DimensionMismatch("relation_sum needs relations between the same spaces")
    tol = _looser(r1.tol, r2.tol)
    a, b = r1.dim_a, r1.dim_b
    sizes = (a, b, b)
    t1 = np.hstack([_embed([r1.source_block, r1.target_block], sizes, (0, 1)), _block_eye(sizes, 2)])
    t2 = np.hstack([_embed([r2.source_block, r2.target_block], sizes, (0, 2)), _block_eye(sizes, 1)])
    x = intersect(column_span(t1, tol, scale=1.0), column_span(t2, tol, scale=1.0))
    fold = np.zeros((a + b, a + 2 * b))
    fold[:a, :a] = np.eye(a)
    fold[a:, a : a + b] = np.eye(b)
    fold[a:, a + b :] = np.eye(b)
    return LinearRelation(a, b, column_span(fold @ x.basis, tol, scale=1.0))


def direct_sum(relations: Sequence[LinearRelation]) -> LinearRelation:
    """Block-diagonal relation ``⊕ r_k`` from ``⊕ H_a`` to ``⊕ H_b``."""
    tol = _looser(*[r.tol for r in relations])
    da = [r.dim_a for r in relations]
    db = [r.dim_b for r in relations]
    a, b = int(np.sum(da)), int(np.sum(db))
    cols = []
    oa = np.concatenate([[0], np.cumsum(da)])
    ob = np.concatenate([[0], np.cumsum(db)])
    for k, r in enumerate(relations):
        blk = np.zeros((a + b, r.graph.dim))
        blk[oa[k] : oa[k + 1]] = r.source_block
        blk[a + ob[k] : a + ob[k + 1]] = r.target_block
        cols.append(blk)
    g = np.hstack(cols) if cols else np.zeros((a + b, 0))
    return LinearRelation(a, b, Subspace(a + b, g, tol))


def transform(r: LinearRelation, source_map, target_map) -> LinearRelation:
    """``{(M u, N v) : (u, v) in r}`` for linear maps ``M`` (source) and ``N`` (target)."""
    m = np.asarray(source_map, dtype=float)
    n = np.asarray(target_map, dtype=float)
    if m.shape[1] != r.dim_a or n.shape[1] != r.dim_b:
        raise DimensionMismatch("transform maps do not match the relation's spaces")
    g = np.vstack([m @ r.source_block, n @ r.target_block])
    return LinearRelation(m.shape[0], n.shape[0], column_span(g, r.tol, scale=1.0))
