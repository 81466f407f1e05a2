"""Instance generators: random nested pairs, self-dual complementary pairs, grids and cones."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import sympy

from . import linrel as lr
from .hilbert import GradedSpace, HilbertComplex, PartialOperator
from .linrel import DEFAULT_TOL, Tolerance
from .sandwich import DualityData, SandwichPair, check_complementary, check_extension

__all__ = [
    "GeneratorError",
    "GeneratorSpec",
    "GridSpec",
    "default_signs",
    "default_constants",
    "gen_random_pair",
    "conjugate_chain",
    "gen_complementary",
    "gen_grid_interval",
    "gen_cone_2d",
]

MAX_TRIES = 1000


class GeneratorError(RuntimeError):
    """A generator could not produce a valid instance."""


@dataclass(frozen=True)
class GeneratorSpec:
    seed: int = 0
    dims: tuple = (3, 4, 3)
    length: int | None = None
    domain_codim_range: tuple = (0, 2)
    scalar_range: tuple = (-3, 3)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        if any(d <= 0 for d in dims):
            raise ValueError("dims must be positive")
        length = len(dims) - 1 if self.length is None else int(self.length)
        if length != len(dims) - 1 or length < 1:
            raise ValueError(f"length {length} does not match dims {list(dims)}")
        object.__setattr__(self, "length", length)
        lo, hi = (int(x) for x in self.domain_codim_range)
        if lo < 0 or hi < lo:
            raise ValueError("domain_codim_range must be an interval of nonnegative integers")
        object.__setattr__(self, "domain_codim_range", (lo, hi))
        a, b = (int(x) for x in self.scalar_range)
        if b <= a:
            raise ValueError("scalar_range must be a nonempty interval")
        object.__setattr__(self, "scalar_range", (a, b))


@dataclass(frozen=True)
class GridSpec:
    cells: int = 4
    weight_exponent: float = 0.0
    boundary_mode: str = "two_ends"

    def __post_init__(self):
        if int(self.cells) < 2:
            raise ValueError("a grid needs at least 2 cells")
        if not -1.0 < float(self.weight_exponent) <= 10.0:
            raise ValueError("weight_exponent must lie in (-1, 10]")
        if self.boundary_mode not in ("one_end", "two_ends"):
            raise ValueError("boundary_mode must be 'one_end' or 'two_ends'")


# --------------------------------------------------------------------------- exact helpers


def _int_nullspace(m: np.ndarray) -> np.ndarray:
    """Integer basis (columns) of the right null space of an integer matrix."""
    rows, cols = m.shape
    if cols == 0:
        return np.zeros((0, 0), dtype=np.int64)
    if rows == 0:
        return np.eye(cols, dtype=np.int64)
    vecs = sympy.Matrix(m.astype(np.int64).tolist()).nullspace()
    out = []
    for v in vecs:
        den = sympy.ilcm(1, *[sympy.fraction(x)[1] for x in v])
        w = [int(x * den) for x in v]
        g = np.gcd.reduce(np.abs(w)) or 1
        out.append(np.array(w, dtype=np.int64) // g)
    if not out:
        return np.zeros((cols, 0), dtype=np.int64)
    return np.column_stack(out)


def _int_rank(m: np.ndarray) -> int:
    if m.size == 0:
        return 0
    return int(sympy.Matrix(m.astype(np.int64).tolist()).rank())


def _rand_int(rng, lo, hi, shape) -> np.ndarray:
    return rng.integers(lo, hi + 1, size=shape).astype(np.int64)


# --------------------------------------------------------------------------- random nested pairs


def _unimodular(rng, k: int) -> tuple:
    """Integer matrix with determinant ±1 and small entries, with its integer inverse."""
    u = np.eye(k, dtype=np.int64)
    for _ in range(k):
        i, j = rng.choice(k, size=2, replace=False) if k > 1 else (0, 0)
        if i != j:
            u[i] += int(rng.choice([-1, 1])) * u[j]
    perm = rng.permutation(k)
    u = u[perm]
    inv = np.array(sympy.Matrix(u.tolist()).inv().tolist(), dtype=np.int64) if k else u
    return u, inv


def _random_top(spec: GeneratorSpec, rng):
    """Integer actions and spanning sets of domains for a random complex ``L``.

    In the basis given by the columns of a unimodular ``U_i`` the first ``b_i``
    coordinates span a block containing the image of ``L_{i-1}``; ``L_i`` kills
    that block and maps the remaining coordinates into the next block.
    """
    dims = spec.dims
    lo, hi = spec.scalar_range
    bases = [_unimodular(rng, d) for d in dims]
    blocks = [0] * len(dims)
    actions, doms = [], []
    for i in range(spec.length):
        a, b = dims[i], dims[i + 1]
        u_in, u_in_inv = bases[i]
        u_out = bases[i + 1][0]
        bi = blocks[i]
        bn = int(rng.integers(0, min(b, a - bi) + 1))
        blocks[i + 1] = bn
        j = _rand_int(rng, lo, hi, (bn, a - bi))
        act = u_out[:, :bn] @ j @ u_in_inv[bi:, :]
        k = int(rng.integers(0, a - bi + 1))
        extra = _rand_int(rng, lo, hi, (a, k))
        doms.append(np.hstack([u_in[:, :bi], extra]))
        actions.append(act)
    return actions, doms


def _random_sub_domains(spec: GeneratorSpec, actions, doms, rng):
    lo, hi = spec.scalar_range
    kmin, kmax = spec.domain_codim_range
    subs = []
    image = None
    for i, dom in enumerate(doms):
        rank = _int_rank(dom)
        base = np.zeros((dom.shape[0], 0), dtype=np.int64) if image is None else image
        base_rank = _int_rank(base)
        k = int(rng.integers(kmin, kmax + 1))
        target = max(rank - k, base_rank)
        if target == rank:
            sub = np.hstack([base, dom])
        else:
            # resample until the random combinations reach the target rank
            for _ in range(50):
                extra = dom @ _rand_int(rng, lo, hi, (dom.shape[1], target - base_rank))
                sub = np.hstack([base, extra])
                if _int_rank(sub) == target:
                    break
        subs.append(sub)
        image = actions[i] @ sub
    return subs


def _pair_from_integers(dims, actions, doms, subs, tol: Tolerance) -> SandwichPair:
    diffs = [PartialOperator(a.astype(float), lr.column_span(d.astype(float), tol)) for a, d in zip(actions, doms)]
    top = HilbertComplex(GradedSpace(dims), diffs, tol)
    return SandwichPair(top, [lr.column_span(s.astype(float), tol) for s in subs])


def gen_random_pair(spec: GeneratorSpec, tol: Tolerance = DEFAULT_TOL) -> SandwichPair:
    """Random integer pair ``D ⊆ L``; deterministic given ``spec.seed``.

    ``L_i`` kills the image of ``L_{i-1}`` exactly, domains of ``L`` contain the
    previous image, and domains of ``D`` have codimension drawn from
    ``domain_codim_range`` inside ``dom L_i`` while containing the image of
    ``D_{i-1}``.  The integer data is kept on the pair as ``integer_data``.
    """
    rng = np.random.default_rng(spec.seed)
    last = None
    for attempt in range(MAX_TRIES):
        actions, doms = _random_top(spec, rng)
        subs = _random_sub_domains(spec, actions, doms, rng)
        pair = _pair_from_integers(spec.dims, actions, doms, subs, tol)
        rep = check_extension(pair)
        if rep.passed:
            pair.integer_data = {"actions": actions, "domains": doms, "sub_domains": subs}
            pair.retries = attempt
            return pair
        last = rep.first_failure().name
    raise GeneratorError(f"no valid pair after {MAX_TRIES} tries; last failure: {last}")


# --------------------------------------------------------------------------- complementary pairs


def default_signs(n: int) -> list:
    """``s_p = (-1)^(p(n-p))``."""
    return [(-1) ** (p * (n - p)) for p in range(n + 1)]


def default_constants(n: int, signs: Sequence[int]) -> list:
    """Constants solving ``C_i C_{n-i-1} s_i s_{i+1} = 1`` with ``C_i = 1`` on the lower half."""
    out = [1.0] * n
    for i in range(n):
        j = n - i - 1
        if i > j:
            out[i] = 1.0 / (out[j] * signs[i] * signs[i + 1])
    return out


def _orthogonal(rng, k: int) -> np.ndarray:
    if k == 0:
        return np.zeros((0, 0))
    q, r = np.linalg.qr(rng.standard_normal((k, k)))
    return q * np.sign(np.diag(r))


def _duality_maps(dims, signs, rng):
    n = len(dims) - 1
    phis = [None] * (n + 1)
    for i in range((n + 1) // 2):
        phis[i] = _orthogonal(rng, dims[i])
        phis[n - i] = signs[i] * phis[i].T
    if n % 2 == 0:
        k, m = n // 2, dims[n // 2]
        q = _orthogonal(rng, m)
        if signs[k] == 1:
            npos = int(rng.integers(0, m + 1))
            diag = np.r_[np.ones(npos), -np.ones(m - npos)]
            phis[k] = q @ np.diag(diag) @ q.T
        else:
            if m % 2:
                raise GeneratorError(f"sign -1 in the middle degree needs an even dimension, got {m}")
            h = m // 2
            j = np.block([[np.zeros((h, h)), -np.eye(h)], [np.eye(h), np.zeros((h, h))]])
            phis[k] = q @ j @ q.T
    return phis


def _free_map(rng, src_dim, tgt_basis, prev_image, scale=1.0):
    """Random map ``H -> span(tgt_basis)`` vanishing on ``prev_image``."""
    q = lr.complement(lr.column_span(prev_image)).basis
    r = tgt_basis.shape[1]
    x = rng.standard_normal((r, q.shape[1])) @ q.T
    return scale * tgt_basis @ x


def _isotropic_basis(phi: np.ndarray, sign: int, rng) -> np.ndarray:
    """Orthonormal basis of a random maximal isotropic subspace for ``<x, phi^T y>``."""
    m = phi.shape[0]
    if sign == 1:
        w, v = np.linalg.eigh((phi + phi.T) / 2)
        pos, neg = v[:, w > 0], v[:, w < 0]
        k = min(pos.shape[1], neg.shape[1])
        pos = pos @ _orthogonal(rng, pos.shape[1])[:, :k]
        neg = neg @ _orthogonal(rng, neg.shape[1])[:, :k]
        return (pos + neg) / np.sqrt(2.0)
    # phi is a complex structure: span{x, phi x} is a symplectic pair; pick one leg of each
    basis = []
    remaining = np.eye(m)
    for _ in range(m // 2):
        x = remaining @ rng.standard_normal(remaining.shape[1])
        x /= np.linalg.norm(x)
        basis.append(x)
        used = lr.column_span(np.column_stack([x, phi @ x] + [b for b in basis] + [phi @ b for b in basis]))
        remaining = lr.complement(used).basis
    return np.column_stack(basis) if basis else np.zeros((m, 0))


def _self_dual_chain(dims, phis, constants, signs, rng):
    """Full-domain chain ``A`` with ``A_{n-i-1}^T phi_i = C_i phi_{i+1} A_i``."""
    n = len(dims) - 1
    acts = [None] * n
    half = n // 2
    image = np.zeros((dims[0], 0))
    for i in range(half):
        b = dims[i + 1]
        if n % 2 == 0 and i == half - 1:
            iso = _isotropic_basis(phis[half], signs[half], rng)
            r = int(rng.integers(min(1, iso.shape[1]), iso.shape[1] + 1))
            tgt = iso[:, :r]
        else:
            r = int(rng.integers(min(1, b), b + 1))
            tgt = rng.standard_normal((b, r))
        acts[i] = _free_map(rng, dims[i], tgt, image)
        image = acts[i]
    if n % 2 == 1:
        k = half
        c = constants[k]
        sym = c * signs[k + 1]
        if not np.isclose(abs(sym), 1.0):
            raise GeneratorError(f"middle constant {c} is incompatible with sign {signs[k + 1]}")
        q = lr.complement(lr.column_span(image)).basis
        x = rng.standard_normal((q.shape[1], q.shape[1]))
        x = x + sym * x.T
        m = q @ x @ q.T
        acts[k] = signs[k + 1] * phis[k] @ m
    for i in range(half):
        j = n - i - 1
        acts[j] = constants[i] * phis[i] @ acts[i].T @ phis[i + 1].T
    return acts


def conjugate_chain(relations, phis, constants) -> list:
    """``Phi(T)_i = C_i^{-1} phi_{i+1}^{-1} T_{n-i-1}^* phi_i`` as relations."""
    n = len(relations)
    out = []
    for i in range(n):
        adj = relations[n - i - 1].adjoint()
        out.append(lr.transform(adj, phis[i].T, phis[i + 1].T / constants[i]))
    return out


def gen_complementary(spec: GeneratorSpec, constants=None, signs=None, tol: Tolerance = DEFAULT_TOL):
    """Complementary pair with duality data; deterministic given ``spec.seed``.

    A seed chain ``T`` is drawn from the family fixed by the conjugation
    ``Phi``; ``D`` and ``L`` are the graph meet and join of ``T`` and
    ``Phi(T)`` and the result is certified with ``check_complementary``.
    """
    dims = spec.dims
    n = spec.length
    if list(dims) != list(dims[::-1]):
        raise GeneratorError(f"dims {list(dims)} are not palindromic")
    signs = default_signs(n) if signs is None else [int(s) for s in signs]
    constants = default_constants(n, signs) if constants is None else [float(c) for c in constants]
    if len(signs) != n + 1 or len(constants) != n:
        raise GeneratorError("need n+1 signs and n constants")
    for i in range(n + 1):
        if signs[i] != signs[n - i]:
            raise GeneratorError(f"signs must satisfy s_i = s_(n-i); fails at {i}")
    for i in range(n):
        prod = constants[i] * constants[n - i - 1] * signs[i] * signs[i + 1]
        if not np.isclose(prod, 1.0):
            raise GeneratorError(f"C_{i} C_{n - i - 1} s_{i} s_{i + 1} = {prod}, expected 1")
    rng = np.random.default_rng(spec.seed)
    last = None
    for attempt in range(MAX_TRIES):
        phis = _duality_maps(dims, signs, rng)
        acts = _self_dual_chain(dims, phis, constants, signs, rng)
        t_rels = [lr.relation_from_operator(a, lr.full_subspace(dims[i], tol)) for i, a in enumerate(acts)]
        c_rels = conjugate_chain(t_rels, phis, constants)
        meet = [lr.LinearRelation(t.dim_a, t.dim_b, lr.intersect(t.graph, c.graph)) for t, c in zip(t_rels, c_rels)]
        join = [lr.LinearRelation(t.dim_a, t.dim_b, lr.sum(t.graph, c.graph)) for t, c in zip(t_rels, c_rels)]
        if not all(r.is_single_valued for r in join):
            last = "join is multivalued"
            continue
        diffs = [PartialOperator(r.operator_matrix(), r.domain()) for r in join]
        top = HilbertComplex(GradedSpace(dims), diffs, tol)
        pair = SandwichPair(top, [r.domain() for r in meet])
        duality = DualityData(phis, constants, signs)
        if not check_extension(pair).passed:
            last = check_extension(pair).first_failure().name
            continue
        rep = check_complementary(pair, duality)
        if rep.passed:
            pair.retries = attempt
            return pair, duality
        last = rep.first_failure().name
    raise GeneratorError(f"no complementary pair after {MAX_TRIES} tries; last failure: {last}")


# --------------------------------------------------------------------------- grids and cones


def _mass(a: float, b: float, c: float) -> float:
    """``∫_a^b x^c dx`` for ``0 <= a < b`` and ``c > -1``."""
    return (b ** (c + 1) - a ** (c + 1)) / (c + 1)


def gen_grid_interval(spec: GridSpec, tol: Tolerance = DEFAULT_TOL) -> SandwichPair:
    """Weighted cochains on ``n`` cells of ``[0, 1]`` with absolute ``L`` and relative ``D``.

    Vertex weights are the masses of ``x^c`` on the dual cells, edge weights the
    masses on the edges.  ``D`` vanishes at ``x = 0`` (one_end) or at both ends.
    No duality data is produced: the spaces have dimensions ``n+1`` and ``n``.
    """
    n, c = int(spec.cells), float(spec.weight_exponent)
    x = np.linspace(0.0, 1.0, n + 1)
    h = 1.0 / n
    vw = np.array([_mass(max(xk - h / 2, 0.0), min(xk + h / 2, 1.0), c) for xk in x])
    ew = np.array([_mass(x[k], x[k + 1], c) for k in range(n)])
    d = np.zeros((n, n + 1))
    d[np.arange(n), np.arange(n)] = -1.0
    d[np.arange(n), np.arange(1, n + 1)] = 1.0
    spaces = GradedSpace((n + 1, n), (vw, ew))
    top = HilbertComplex(spaces, [PartialOperator(d, lr.full_subspace(n + 1, tol))], tol)
    pinned = [0, n] if spec.boundary_mode == "two_ends" else [0]
    free = [k for k in range(n + 1) if k not in pinned]
    return SandwichPair(top, [lr.coordinate_subspace(n + 1, free, tol)])


def gen_cone_2d(k: int, weight_exponent: float = 0.0, vertex_condition: bool = True, tol: Tolerance = DEFAULT_TOL) -> SandwichPair:
    """Cochains of the cone over a ``k``-gon, weighted by radial masses of ``r^c``.

    Vertices: apex then rim ``0..k-1``; edges: spokes then rim edges ``j -> j+1``;
    faces: triangles ``(apex, j, j+1)``.  ``D_0`` kills the apex value when
    ``vertex_condition`` is set; all other domains are full.
    """
    if k < 3:
        raise ValueError("the cone needs k >= 3")
    c = float(weight_exponent)
    if not -1.0 < c <= 10.0:
        raise ValueError("weight_exponent must lie in (-1, 10]")
    nv, ne, nf = k + 1, 2 * k, k
    d0 = np.zeros((ne, nv))
    d1 = np.zeros((nf, ne))
    for j in range(k):
        d0[j, 0], d0[j, 1 + j] = -1.0, 1.0
        d0[k + j, 1 + j], d0[k + j, 1 + (j + 1) % k] = -1.0, 1.0
        # boundary of (apex, j, j+1) = rim_j - spoke_{j+1} + spoke_j
        d1[j, k + j] += 1.0
        d1[j, (j + 1) % k] -= 1.0
        d1[j, j] += 1.0
    vw = np.r_[_mass(0.0, 0.5, c), np.full(k, _mass(0.5, 1.0, c) / k)]
    ew = np.r_[np.full(k, _mass(0.0, 1.0, c) / k), np.full(k, 1.0 / k)]
    fw = np.full(k, _mass(0.0, 1.0, c + 1.0) / k)
    spaces = GradedSpace((nv, ne, nf), (vw, ew, fw))
    full = [lr.full_subspace(m, tol) for m in (nv, ne)]
    top = HilbertComplex(spaces, [PartialOperator(d0, full[0]), PartialOperator(d1, full[1])], tol)
    dom0 = lr.coordinate_subspace(nv, range(1, nv), tol) if vertex_condition else full[0]
    return SandwichPair(top, [dom0, full[1]])
