"""Finite-dimensional Hilbert complexes with partially defined differentials.

A complex ``H_0 -> H_1 -> ... -> H_n`` is stored twice: the raw data (actions,
domain bases and optional diagonal weights) exactly as supplied, and the
differentials as linear relations in orthonormal coordinates ``x~ = W^(1/2) x``.
All computations run on the second form, so every returned subspace lives in
orthonormal coordinates of the relevant degree.

Boundary conventions: ``D_{-1}`` is the zero relation ``0 -> H_0`` and ``D_n``
is the full-domain zero map ``H_n -> 0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import linrel as lr
from .linrel import DEFAULT_TOL, LinearRelation, Subspace, Tolerance
from .report import ValidationReport

__all__ = [
    "StructureError",
    "ConsistencyError",
    "GradedSpace",
    "PartialOperator",
    "HilbertComplex",
    "KodairaSplit",
    "validate_complex",
    "cohomology_dim",
    "cohomology_dims",
    "harmonic_space",
    "kodaira",
    "laplacian",
    "dual_complex",
    "dual_cohomology_dims",
    "dirac_relation",
    "d_plus_dstar_index",
    "euler_characteristic",
]


class StructureError(ValueError):
    """Inconsistent shapes or degrees in a complex."""


class ConsistencyError(RuntimeError):
    """A decomposition that must hold exactly failed numerically."""


@dataclass(frozen=True, eq=False)
class GradedSpace:
    dims: tuple
    weights: tuple | None = None

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) < 1 or any(d < 0 for d in dims):
            raise StructureError("dims must be a nonempty list of nonnegative integers")
        object.__setattr__(self, "dims", dims)
        if self.weights is not None:
            ws = []
            if len(self.weights) != len(dims):
                raise StructureError("one weight vector per degree is required")
            for i, w in enumerate(self.weights):
                w = np.asarray(w, dtype=float).ravel()
                if w.size != dims[i]:
                    raise StructureError(f"weights[{i}] has length {w.size}, expected {dims[i]}")
                if np.any(~(w > 0)) or not np.all(np.isfinite(w)):
                    raise StructureError(f"weights[{i}] must be strictly positive")
                w.setflags(write=False)
                ws.append(w)
            object.__setattr__(self, "weights", tuple(ws))

    @property
    def top_degree(self) -> int:
        return len(self.dims) - 1

    def sqrt_weight(self, i: int) -> np.ndarray:
        if self.weights is None:
            return np.ones(self.dims[i])
        return np.sqrt(self.weights[i])

    def to_orthonormal(self, i: int, x) -> np.ndarray:
        """Raw coordinates of degree ``i`` to orthonormal coordinates (vectors are columns)."""
        x = np.asarray(x, dtype=float)
        s = self.sqrt_weight(i)
        return s[:, None] * x if x.ndim == 2 else s * x

    def from_orthonormal(self, i: int, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        s = self.sqrt_weight(i)
        return x / s[:, None] if x.ndim == 2 else x / s

    def conjugate(self, i: int, j: int, m) -> np.ndarray:
        """Matrix of a raw map ``H_i -> H_j`` in orthonormal coordinates."""
        m = np.asarray(m, dtype=float)
        return self.sqrt_weight(j)[:, None] * m / self.sqrt_weight(i)[None, :]


@dataclass(frozen=True, eq=False)
class PartialOperator:
    """Ambient action matrix evaluated only on ``domain`` (raw coordinates)."""

    action: np.ndarray
    domain: Subspace

    def __post_init__(self):
        a = np.asarray(self.action, dtype=float)
        if a.ndim != 2:
            raise StructureError("action must be a matrix")
        a.setflags(write=False)
        object.__setattr__(self, "action", a)


class HilbertComplex:
    """Graded spaces with differentials ``D_0 ... D_{n-1}``.

    ``diffs`` is a list of :class:`PartialOperator` in raw coordinates; use
    :meth:`from_relations` for chains whose differentials are already relations
    in orthonormal coordinates (those carry ``diffs = None``).
    """

    def __init__(self, spaces: GradedSpace, diffs: Sequence[PartialOperator], tol: Tolerance = DEFAULT_TOL):
        if not isinstance(spaces, GradedSpace):
            spaces = GradedSpace(tuple(spaces))
        self.spaces = spaces
        self.tol = tol
        n = spaces.top_degree
        diffs = list(diffs)
        if len(diffs) != n:
            raise StructureError(f"expected {n} differentials for dims {list(spaces.dims)}, got {len(diffs)}")
        rels = []
        for i, d in enumerate(diffs):
            src, tgt = spaces.dims[i], spaces.dims[i + 1]
            if d.action.shape != (tgt, src):
                raise StructureError(f"degree {i}: action has shape {d.action.shape}, expected {(tgt, src)}")
            if d.domain.ambient_dim != src:
                raise StructureError(f"degree {i}: domain lives in dimension {d.domain.ambient_dim}, expected {src}")
            dom = lr.column_span(spaces.to_orthonormal(i, d.domain.basis), tol)
            rels.append(lr.relation_from_operator(spaces.conjugate(i, i + 1, d.action), dom))
        self.diffs = diffs
        self._rels = rels
        self._boundary()

    @classmethod
    def from_relations(cls, dims: Sequence[int], relations: Sequence[LinearRelation], tol: Tolerance | None = None):
        self = cls.__new__(cls)
        self.spaces = GradedSpace(tuple(dims))
        rels = list(relations)
        self.tol = tol if tol is not None else (rels[0].tol if rels else DEFAULT_TOL)
        n = self.spaces.top_degree
        if len(rels) != n:
            raise StructureError(f"expected {n} relations, got {len(rels)}")
        for i, r in enumerate(rels):
            if (r.dim_a, r.dim_b) != (self.spaces.dims[i], self.spaces.dims[i + 1]):
                raise StructureError(f"degree {i}: relation {r!r} does not match dims")
        self.diffs = None
        self._rels = rels
        self._boundary()
        return self

    def _boundary(self):
        d = self.spaces.dims
        self._before = lr.zero_relation(0, d[0], self.tol)
        self._after = lr.relation_from_operator(np.zeros((0, d[-1])), lr.full_subspace(d[-1], self.tol))

    @property
    def n(self) -> int:
        """Top degree (number of differentials)."""
        return self.spaces.top_degree

    @property
    def dims(self) -> tuple:
        return self.spaces.dims

    @property
    def relations(self) -> list:
        return list(self._rels)

    def rel(self, i: int) -> LinearRelation:
        """``D_i`` in orthonormal coordinates, with boundary conventions for ``i = -1, n``."""
        if i == -1:
            return self._before
        if i == self.n:
            return self._after
        if 0 <= i < self.n:
            return self._rels[i]
        raise StructureError(f"degree {i} out of range for a complex of top degree {self.n}")

    def adj(self, i: int) -> LinearRelation:
        return self.rel(i).adjoint()

    def dim(self, i: int) -> int:
        if 0 <= i <= self.n:
            return self.dims[i]
        return 0

    def __repr__(self) -> str:
        return f"HilbertComplex(dims={list(self.dims)})"


@dataclass(frozen=True)
class KodairaSplit:
    harmonic: Subspace
    im_prev: Subspace
    im_adj: Subspace


def _check_degree(c: HilbertComplex, i: int) -> None:
    if not 0 <= i <= c.n:
        raise StructureError(f"degree {i} out of range 0..{c.n}")


def _opnorm(m: np.ndarray) -> float:
    return float(np.linalg.norm(m, 2)) if m.size else 0.0


def _composition_residual(c: HilbertComplex, i: int) -> float:
    r, s = c.rel(i), c.rel(i + 1)
    if r.is_single_valued and s.is_single_valued:
        mi, ms = r.operator_matrix(), s.operator_matrix()
        q = r.domain().basis
        if q.shape[1] == 0:
            return 0.0
        scale = max(1.0, _opnorm(mi) * _opnorm(ms))
        return _opnorm(ms @ mi @ q) / scale
    return lr.containment_defect(s.mul(), lr.compose(s, r).range())


def validate_complex(c: HilbertComplex, prefix: str = "complex") -> ValidationReport:
    """Per-degree image inclusion, composition-zero residuals and domain dims."""
    rep = ValidationReport()
    eps = c.tol.angle_eps
    for i in range(c.n):
        r = c.rel(i)
        rep.add(f"{prefix}.domain_dim[{i}]", True, 0.0, dim=r.domain().dim, ambient=c.dims[i])
        defect = lr.containment_defect(c.rel(i + 1).domain(), r.range())
        rep.add(f"{prefix}.image_in_domain[{i}]", defect <= eps, defect)
        res = _composition_residual(c, i)
        rep.add(f"{prefix}.composition_zero[{i}]", res <= eps, res)
        rep.add(f"{prefix}.density[{i}]", True, 0.0, note="modeled by relation-adjoint convention")
    return rep


def cohomology_dim(c: HilbertComplex, i: int) -> int:
    """``dim ker D_i - dim range D_{i-1}``."""
    _check_degree(c, i)
    return c.rel(i).kernel().dim - c.rel(i - 1).range().dim


def cohomology_dims(c: HilbertComplex) -> list:
    return [cohomology_dim(c, i) for i in range(c.n + 1)]


def euler_characteristic(c: HilbertComplex) -> int:
    return int(sum((-1) ** i * h for i, h in enumerate(cohomology_dims(c))))


def harmonic_space(c: HilbertComplex, i: int) -> Subspace:
    """``ker D_i ∩ ker D_{i-1}^*``."""
    _check_degree(c, i)
    return lr.intersect(c.rel(i).kernel(), c.adj(i - 1).kernel())


def kodaira(c: HilbertComplex, i: int) -> KodairaSplit:
    """Orthogonal split ``H_i = harmonic + range D_{i-1} + range D_i^*``."""
    _check_degree(c, i)
    parts = (harmonic_space(c, i), c.rel(i - 1).range(), c.adj(i).range())
    eps = c.tol.angle_eps
    for a in range(3):
        for b in range(a + 1, 3):
            x, y = parts[a].basis, parts[b].basis
            if x.shape[1] and y.shape[1] and np.abs(x.T @ y).max() > eps:
                raise ConsistencyError(f"degree {i}: Kodaira summands {a} and {b} are not orthogonal")
    total = sum(p.dim for p in parts)
    if total != c.dims[i]:
        raise ConsistencyError(f"degree {i}: Kodaira summands have total dimension {total}, expected {c.dims[i]}")
    return KodairaSplit(*parts)


def laplacian(c: HilbertComplex, i: int) -> LinearRelation:
    """``D_i^* D_i + D_{i-1} D_{i-1}^*`` as a relation on ``H_i``."""
    _check_degree(c, i)
    up = lr.compose(c.adj(i), c.rel(i))
    down = lr.compose(c.rel(i - 1), c.adj(i - 1))
    return lr.relation_sum(up, down)


def dual_complex(c: HilbertComplex) -> list:
    """Adjoint chain ``(D_{n-1}^*, ..., D_0^*)``; degree ``i`` of the dual lives on ``H_{n-i}``."""
    return [c.adj(c.n - 1 - i) for i in range(c.n)]


def dual_cohomology_dims(c: HilbertComplex) -> list:
    """``dim ker D_{n-i-1}^* - dim range D_{n-i}^*`` for ``i = 0..n``."""
    n = c.n
    return [c.adj(n - i - 1).kernel().dim - c.adj(n - i).range().dim for i in range(n + 1)]


def _degrees(c: HilbertComplex, part: str) -> list:
    if part == "even":
        return [p for p in range(c.n + 1) if p % 2 == 0]
    if part == "odd":
        return [p for p in range(c.n + 1) if p % 2 == 1]
    if part == "total":
        return list(range(c.n + 1))
    raise ValueError(f"unknown part {part!r}")


def dirac_relation(c: HilbertComplex, part: str = "even") -> tuple:
    """Relation ``u -> D u + D^* u`` from the ``part`` degrees to the complementary ones.

    ``part`` is "even" (even to odd), "odd" (odd to even) or "total" (the whole
    graded space to itself).  Returns ``(relation, source_degrees, target_degrees)``.
    On degree ``p`` the domain is ``dom D_p ∩ dom D_{p-1}^*``.
    """
    src = _degrees(c, part)
    if part == "total":
        tgt = src
    else:
        tgt = _degrees(c, "odd" if part == "even" else "even")
    tgt_off = {}
    off = 0
    for q in tgt:
        tgt_off[q] = off
        off += c.dims[q]
    tgt_dim = off

    def embed(q):
        m = np.zeros((tgt_dim, c.dim(q)))
        if q in tgt_off:
            m[tgt_off[q] : tgt_off[q] + c.dims[q]] = np.eye(c.dims[q])
        return m

    pieces = []
    for p in src:
        up = lr.transform(c.rel(p), np.eye(c.dims[p]), embed(p + 1))
        down = lr.transform(c.adj(p - 1), np.eye(c.dims[p]), embed(p - 1))
        pieces.append(lr.relation_sum(up, down))
    block = lr.direct_sum(pieces)
    # fold the per-degree targets into a single copy of the target space
    src_dim = block.dim_a
    fold = np.zeros((src_dim + tgt_dim, block.graph.ambient_dim))
    fold[:src_dim, :src_dim] = np.eye(src_dim)
    for k in range(len(src)):
        start = src_dim + k * tgt_dim
        fold[src_dim:, start : start + tgt_dim] = np.eye(tgt_dim)
    g = lr.column_span(fold @ block.graph.basis, c.tol, scale=1.0)
    return LinearRelation(src_dim, tgt_dim, g), src, tgt


def d_plus_dstar_index(c: HilbertComplex) -> tuple:
    """``(dim ker, dim coker, index)`` of the even-to-odd operator ``D + D^*``."""
    r, _, _ = dirac_relation(c, "even")
    k = r.kernel().dim
    ck = r.adjoint().kernel().dim
    return k, ck, k - ck
