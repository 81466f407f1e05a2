"""Nested pairs of complexes ``D ⊆ L`` and the intermediate complex between them.

A :class:`SandwichPair` is a complex ``L`` (partial operators) together with
smaller domains for ``D``, which acts as ``L`` restricted.  The intermediate
complex ``P`` is built degree by degree in graph coordinates ``u -> (u, L u)``:

* ``K = ker L × 0`` and ``V = graph(L) ⊖ K``
* ``A = graph(D) ⊖ (ker D × 0)``
* ``N = proj_V(A)`` and ``graph(P) = K ⊕ N``

so that ``D ⊆ P ⊆ L``, ``ker P = ker L`` and ``range P = range D``.  The same
construction applied to the adjoint chains ``L^* ⊆ D^*`` yields ``S`` with
``adjoint(P_i) = S_i``.  Everything runs in orthonormal coordinates; duality
maps are converted with :meth:`DualityData.orthonormal`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from . import hilbert as hb
from . import linrel as lr
from .hilbert import HilbertComplex, PartialOperator
from .linrel import LinearRelation, Subspace, Tolerance
from .report import ValidationReport

__all__ = [
    "ContractError",
    "ConstructionError",
    "DualityError",
    "SandwichPair",
    "DualityData",
    "IntermediateComplex",
    "IndexReport",
    "SignatureReport",
    "check_extension",
    "check_complementary",
    "complementary_relations",
    "paired_dims",
    "paired_dims_check",
    "intermediate_from_relations",
    "build_intermediate",
    "intermediate_cohomology",
    "dual_intermediate",
    "operator_equality_from_ker_im",
    "quotient_dims",
    "cohomological_formula_check",
    "psi",
    "index_difference",
    "hodge_M",
    "random_admissible_domains",
    "injectivity_chain",
    "extension_conditions",
    "euler_M",
    "duality_harmonic_check",
    "epsilon_grading",
    "signature",
    "full_suite",
]


class ContractError(ValueError):
    """Inputs violate an operation's precondition."""


class ConstructionError(RuntimeError):
    """The intermediate complex failed one of its certificates."""


class DualityError(ValueError):
    """Duality data is inconsistent with the requested computation."""


@dataclass(frozen=True, eq=False)
class DualityData:
    """Maps ``phi_i : H_i -> H_{n-i}``, constants ``C_i`` (i < n) and signs ``s_i``.

    ``phi_i^{-1} = s_i phi_{n-i}`` is expected.  Maps are stored in raw
    coordinates and must be isometries of the weighted inner products.
    """

    phis: tuple
    constants: tuple
    signs: tuple

    def __post_init__(self):
        phis = []
        for p in self.phis:
            p = np.asarray(p, dtype=float)
            p = p.reshape(p.shape[0] if p.ndim else 0, -1) if p.ndim < 2 else p
            p.setflags(write=False)
            phis.append(p)
        object.__setattr__(self, "phis", tuple(phis))
        object.__setattr__(self, "constants", tuple(float(c) for c in self.constants))
        object.__setattr__(self, "signs", tuple(int(s) for s in self.signs))

    def check_shapes(self, dims: Sequence[int]) -> None:
        n = len(dims) - 1
        if len(self.phis) != n + 1:
            raise DualityError(f"expected {n + 1} duality maps, got {len(self.phis)}")
        if len(self.constants) != n:
            raise DualityError(f"expected {n} constants, got {len(self.constants)}")
        if len(self.signs) != n + 1:
            raise DualityError(f"expected {n + 1} signs, got {len(self.signs)}")
        for i, p in enumerate(self.phis):
            if p.shape != (dims[n - i], dims[i]):
                raise DualityError(f"phis[{i}] has shape {p.shape}, expected {(dims[n - i], dims[i])}")
        for i, s in enumerate(self.signs):
            if s not in (1, -1):
                raise DualityError(f"signs[{i}] must be +1 or -1")

    def orthonormal(self, spaces: hb.GradedSpace) -> list:
        self.check_shapes(spaces.dims)
        n = spaces.top_degree
        return [spaces.conjugate(i, n - i, p) for i, p in enumerate(self.phis)]


class SandwichPair:
    """``L`` as a complex plus domains ``dom D_i ⊆ dom L_i`` (raw coordinates)."""

    def __init__(self, top: HilbertComplex, sub_domains: Sequence[Subspace]):
        if top.diffs is None:
            raise ContractError("the top complex must be made of partial operators")
        sub_domains = list(sub_domains)
        if len(sub_domains) != top.n:
            raise hb.StructureError(f"expected {top.n} sub-domains, got {len(sub_domains)}")
        for i, s in enumerate(sub_domains):
            if s.ambient_dim != top.dims[i]:
                raise hb.StructureError(f"sub_domains[{i}] lives in dimension {s.ambient_dim}, expected {top.dims[i]}")
        self.top = top
        self.sub_domains = sub_domains
        diffs = [PartialOperator(d.action, s) for d, s in zip(top.diffs, sub_domains)]
        self.sub = HilbertComplex(top.spaces, diffs, top.tol)

    @classmethod
    def trivial(cls, top: HilbertComplex) -> "SandwichPair":
        """The pair ``(L, L)``."""
        return cls(top, [d.domain for d in top.diffs])

    @property
    def n(self) -> int:
        return self.top.n

    @property
    def dims(self) -> tuple:
        return self.top.dims

    @property
    def tol(self) -> Tolerance:
        return self.top.tol

    @cached_property
    def intermediate(self) -> "IntermediateComplex":
        return intermediate_from_relations(self.dims, self.top.relations, self.sub.relations, self.tol)

    def __repr__(self) -> str:
        return f"SandwichPair(dims={list(self.dims)})"


@dataclass(eq=False)
class IntermediateComplex:
    P: HilbertComplex
    W: list
    N: list
    pi1: list
    certificates: ValidationReport


@dataclass
class IndexReport:
    betti_top: list
    betti_sub: list
    betti_M: list
    chi_top: int
    chi_sub: int
    chi_M: int
    psi: int
    quotient_dims: list
    checks: ValidationReport = field(default_factory=ValidationReport)

    def to_dict(self) -> dict:
        return {
            "betti_top": self.betti_top,
            "betti_sub": self.betti_sub,
            "betti_M": self.betti_M,
            "chi_top": self.chi_top,
            "chi_sub": self.chi_sub,
            "chi_M": self.chi_M,
            "psi": self.psi,
            "quotient_dims": self.quotient_dims,
        }


@dataclass
class SignatureReport:
    gram: np.ndarray
    sigma: int
    eps_plus_dim: int
    eps_minus_dim: int
    orientation_sign: int = 1
    index_plus: int | None = None
    checks: ValidationReport = field(default_factory=ValidationReport)

    def to_dict(self) -> dict:
        return {
            "gram": np.asarray(self.gram).tolist(),
            "sigma": self.sigma,
            "eps_plus_dim": self.eps_plus_dim,
            "eps_minus_dim": self.eps_minus_dim,
            "orientation_sign": self.orientation_sign,
            "index_plus": self.index_plus,
        }


def _alt(xs) -> int:
    return int(sum((-1) ** i * x for i, x in enumerate(xs)))


def _graph_block(basis: np.ndarray, dim_b: int) -> np.ndarray:
    """``{(u, 0)}`` for the columns ``u`` of ``basis``."""
    return np.vstack([basis, np.zeros((dim_b, basis.shape[1]))])


# --------------------------------------------------------------------------- extension


def check_extension(p: SandwichPair) -> ValidationReport:
    """``dom D_i ⊆ dom L_i`` plus validity of both complexes."""
    rep = ValidationReport()
    rep.extend(hb.validate_complex(p.top, "complex"))
    eps = p.tol.angle_eps
    for i in range(p.n):
        defect = lr.containment_defect(p.top.rel(i).domain(), p.sub.rel(i).domain())
        rep.add(f"extension.domain_inclusion[{i}]", defect <= eps, defect)
    rep.extend(hb.validate_complex(p.sub, "sub"))
    return rep


# --------------------------------------------------------------------------- complementarity


def complementary_relations(subs, tops, phis, constants, signs, tol: Tolerance, prefix: str = "complementary"):
    """Checks that ``subs`` and ``tops`` (relation chains) are complementary under ``phis``.

    For each ``i``: ``phi_i`` is an isometry, ``phi_{n-i} phi_i = s_i``,
    ``phi_i(dom sub_i) = dom(top_{n-i-1}^*)`` and every
    ``(phi_i u, C_i phi_{i+1} sub_i u)`` lies in the graph of ``top_{n-i-1}^*``.
    """
    n = len(subs)
    eps = tol.angle_eps
    rep = ValidationReport()
    for i in range(n + 1):
        ph = phis[i]
        k = ph.shape[1]
        iso = float(np.abs(ph.T @ ph - np.eye(k)).max()) if k else 0.0
        rep.add(f"{prefix}.isometry[{i}]", iso <= eps, iso)
        inv = phis[n - i] @ ph - signs[i] * np.eye(k)
        res = float(np.abs(inv).max()) if k else 0.0
        rep.add(f"{prefix}.inverse_sign[{i}]", res <= eps, res)
    for i in range(n):
        c = constants[i]
        rep.add(f"{prefix}.constant_nonzero[{i}]", c != 0.0, 0.0, value=c)
        d = subs[i]
        t_adj = tops[n - i - 1].adjoint()
        dom = d.domain()
        defect = lr.angle_defect(lr.image(phis[i], dom), t_adj.domain())
        rep.add(f"{prefix}.domain_match[{i}]", defect <= eps, defect)
        if not d.is_single_valued:
            rep.add(f"{prefix}.intertwining[{i}]", False, 1.0, reason="multivalued differential")
            continue
        q = dom.basis
        res = t_adj.contains_pairs(phis[i] @ q, c * phis[i + 1] @ d.operator_matrix() @ q) if c != 0 else 1.0
        rep.add(f"{prefix}.intertwining[{i}]", res <= eps, res)
    return rep


def _adjoint_duality(phis, constants, signs):
    n = len(phis) - 1
    new_phis = [phis[n - j].T for j in range(n + 1)]
    new_consts = [1.0 / constants[n - j - 1] if constants[n - j - 1] != 0 else 0.0 for j in range(n)]
    return new_phis, new_consts, list(signs)


def check_complementary(p: SandwichPair, d: DualityData) -> ValidationReport:
    """Complementarity of ``(D, L)`` under ``d``, replayed for ``(L, D)`` under the adjoint maps."""
    phis = d.orthonormal(p.top.spaces)
    subs, tops = p.sub.relations, p.top.relations
    rep = complementary_relations(subs, tops, phis, d.constants, d.signs, p.tol)
    aphis, aconsts, asigns = _adjoint_duality(phis, d.constants, d.signs)
    rep.extend(complementary_relations(tops, subs, aphis, aconsts, asigns, p.tol, "adjoint_maps"))
    return rep


def _is_complementary(p: SandwichPair, d: DualityData | None):
    if d is None:
        return False, None
    rep = check_complementary(p, d)
    return rep.passed, rep


# --------------------------------------------------------------------------- intermediate complex


def _intermediate_degree(top: LinearRelation, sub: LinearRelation, tol: Tolerance):
    a, b = top.dim_a, top.dim_b
    g_top = top.graph
    k_top = lr.Subspace(a + b, _graph_block(top.kernel().basis, b), tol)
    v = lr.intersect(g_top, lr.complement(k_top))
    k_sub = lr.Subspace(a + b, _graph_block(sub.kernel().basis, b), tol)
    big_a = lr.intersect(sub.graph, lr.complement(k_sub))
    n_sub = lr.column_span(v.projector() @ big_a.basis, tol, scale=1.0)
    pi1 = lr.column_span(k_top.projector() @ big_a.basis, tol, scale=1.0)
    w = lr.sum(k_top, n_sub)
    return LinearRelation(a, b, w), n_sub, pi1, big_a


def intermediate_from_relations(dims, tops, subs, tol: Tolerance, prefix: str = "intermediate") -> IntermediateComplex:
    """Intermediate complex of relation chains ``subs ⊆ tops`` with certificates."""
    eps = tol.angle_eps
    rep = ValidationReport()
    rels, ws, ns, pis = [], [], [], []
    for j, (t, s) in enumerate(zip(tops, subs)):
        pj, nj, pi1, aj = _intermediate_degree(t, s, tol)
        rels.append(pj)
        ws.append(pj.graph)
        ns.append(nj)
        pis.append(pi1)
        d1 = lr.containment_defect(pj.graph, s.graph)
        rep.add(f"{prefix}.sub_in_P[{j}]", d1 <= eps, d1)
        d2 = lr.containment_defect(t.graph, pj.graph)
        rep.add(f"{prefix}.P_in_top[{j}]", d2 <= eps, d2)
        d3 = lr.angle_defect(pj.kernel(), t.kernel())
        rep.add(f"{prefix}.kernel[{j}]", d3 <= eps, d3)
        d4 = lr.angle_defect(pj.range(), s.range())
        rep.add(f"{prefix}.range[{j}]", d4 <= eps, d4)
        rep.add(f"{prefix}.pi2_injective[{j}]", nj.dim == aj.dim, float(abs(nj.dim - aj.dim)), dim_N=nj.dim, dim_A=aj.dim)
    pc = HilbertComplex.from_relations(dims, rels, tol)
    top_c = HilbertComplex.from_relations(dims, tops, tol)
    sub_c = HilbertComplex.from_relations(dims, subs, tol)
    for j in range(len(dims)):
        h_p = hb.cohomology_dim(pc, j)
        expected = top_c.rel(j).kernel().dim - sub_c.rel(j - 1).range().dim
        rep.add(f"{prefix}.cohomology[{j}]", h_p == expected, float(abs(h_p - expected)), h_P=h_p, expected=expected)
    rep.extend(hb.validate_complex(pc, f"{prefix}.complex"))
    return IntermediateComplex(pc, ws, ns, pis, rep)


def build_intermediate(p: SandwichPair, strict: bool = True) -> IntermediateComplex:
    """Intermediate complex ``D ⊆ P ⊆ L``; raises :class:`ConstructionError` on a failed certificate."""
    ic = p.intermediate
    if strict:
        bad = ic.certificates.first_failure()
        if bad is not None:
            raise ConstructionError(f"certificate {bad.name} failed (residual {bad.residual:.3g})")
    return ic


def intermediate_cohomology(p: SandwichPair) -> list:
    """``dim ker L_j - dim range D_{j-1}`` per degree."""
    return [p.top.rel(j).kernel().dim - p.sub.rel(j - 1).range().dim for j in range(p.n + 1)]


def dual_intermediate(p: SandwichPair, d: DualityData | None = None):
    """Intermediate complex ``S`` of the adjoint sandwich ``L^* ⊆ D^*``.

    Returns ``(S, report)`` with ``S[i] : H_{i+1} -> H_i``.  The report holds
    the graph equalities ``adjoint(P_i) = S_i`` and, when ``d`` is given, the
    conjugation identity ``S_i = C_i^{-1} phi_i^{-1} P_{n-i-1} phi_{i+1}``
    written with ``phi_i^{-1} = s_i phi_{n-i}``.
    """
    n, dims, tol = p.n, p.dims, p.tol
    eps = tol.angle_eps
    rev_dims = [dims[n - i] for i in range(n + 1)]
    tops = [p.sub.adj(n - i - 1) for i in range(n)]
    subs = [p.top.adj(n - i - 1) for i in range(n)]
    dual_ic = intermediate_from_relations(rev_dims, tops, subs, tol, prefix="dual_intermediate")
    s_rels = [dual_ic.P.rel(n - i - 1) for i in range(n)]
    rep = ValidationReport()
    rep.extend(dual_ic.certificates)
    pc = p.intermediate.P
    for i in range(n):
        defect = lr.angle_defect(pc.adj(i).graph, s_rels[i].graph)
        rep.add(f"dual.adjoint_equals_S[{i}]", defect <= eps, defect)
    if d is not None:
        phis = d.orthonormal(p.top.spaces)
        s = d.signs
        for i in range(n):
            c = d.constants[i]
            target = s[i] * phis[n - i] / c
            source = s[i + 1] * phis[n - i - 1]
            conj = lr.transform(pc.rel(n - i - 1), source, target)
            defect = lr.angle_defect(conj.graph, s_rels[i].graph)
            rep.add(f"dual.conjugation[{i}]", defect <= eps, defect)
    return s_rels, rep


# --------------------------------------------------------------------------- predicates


def operator_equality_from_ker_im(t: LinearRelation, s: LinearRelation) -> bool:
    """Whether ``graph(t) = graph(s)`` for a single-valued extension ``t ⊆ s``."""
    if (t.dim_a, t.dim_b) != (s.dim_a, s.dim_b):
        raise ContractError("relations act between different spaces")
    if not (t.is_single_valued and s.is_single_valued):
        raise ContractError("both relations must be single-valued")
    if not lr.contains(s.graph, t.graph):
        raise ContractError("s does not extend t")
    return lr.equal(t.graph, s.graph)


# --------------------------------------------------------------------------- index data


def quotient_dims(p: SandwichPair) -> list:
    """``dim dom L_j - dim dom D_j`` per degree (zero in the top degree)."""
    return [p.top.rel(j).domain().dim - p.sub.rel(j).domain().dim for j in range(p.n + 1)]


def cohomological_formula_check(p: SandwichPair) -> list:
    """Residuals of ``q_j = h_P^j - h_L^{j+1} + h_P^{j+1} - h_D^j`` (all must vanish)."""
    q = quotient_dims(p)
    h_p = hb.cohomology_dims(p.intermediate.P) + [0]
    h_l = hb.cohomology_dims(p.top) + [0]
    h_d = hb.cohomology_dims(p.sub)
    return [q[j] - (h_p[j] - h_l[j + 1] + h_p[j + 1] - h_d[j]) for j in range(p.n + 1)]


def paired_dims(p: SandwichPair) -> list:
    """Pairs ``(h_M^j, h_M^{n-j})`` with ``h_M^j = dim ker L_j - dim range D_{j-1}``."""
    h = intermediate_cohomology(p)
    return [(h[j], h[p.n - j]) for j in range(p.n + 1)]


def paired_dims_check(p: SandwichPair, d: DualityData) -> ValidationReport:
    """On a complementary pair the two entries of every :func:`paired_dims` pair agree."""
    ok, comp = _is_complementary(p, d)
    rep = ValidationReport()
    rep.add("paired.complementary", ok, 0.0)
    for j, (a, b) in enumerate(paired_dims(p)):
        rep.add(f"paired.dims[{j}]", (a == b) or not ok, float(abs(a - b)), dims=[a, b])
    return rep


def psi(p: SandwichPair, d: DualityData | None = None) -> IndexReport:
    """Betti numbers of ``L``, ``D`` and ``P``, Euler characteristics and ``psi``."""
    bt = hb.cohomology_dims(p.top)
    bs = hb.cohomology_dims(p.sub)
    bm = hb.cohomology_dims(p.intermediate.P)
    q = quotient_dims(p)
    out = IndexReport(bt, bs, bm, _alt(bt), _alt(bs), _alt(bm), _alt(q), q)
    rep = out.checks
    diff = out.psi - (out.chi_top - out.chi_sub)
    rep.add("psi.euler_difference", diff == 0, float(abs(diff)), psi=out.psi, chi_top=out.chi_top, chi_sub=out.chi_sub)
    ok, _ = _is_complementary(p, d)
    if ok:
        expected = 0 if p.n % 2 == 0 else 2 * out.chi_top
        rep.add("psi.dichotomy", out.psi == expected, float(abs(out.psi - expected)), expected=expected)
    return out


def index_difference(p: SandwichPair) -> tuple:
    """``(ind_top, ind_sub, ind_top - ind_sub)`` of the even-to-odd operators."""
    it = hb.d_plus_dstar_index(p.top)[2]
    isub = hb.d_plus_dstar_index(p.sub)[2]
    return it, isub, it - isub


# --------------------------------------------------------------------------- Hodge theory of P


def hodge_M(p: SandwichPair):
    """Kernels of the Laplacians of ``P`` with their identification checks.

    The kernel of ``Δ_{P,i}`` must have dimension ``h_M^i``, coincide with
    ``ker L_i ∩ ker D_{i-1}^*`` and the Laplacian relation must be self-adjoint.
    """
    pc = p.intermediate.P
    expected = intermediate_cohomology(p)
    eps = p.tol.angle_eps
    rep = ValidationReport()
    kernels = []
    for i in range(p.n + 1):
        lap = hb.laplacian(pc, i)
        ker = lap.kernel()
        kernels.append(ker)
        rep.add(f"hodge.kernel_dim[{i}]", ker.dim == expected[i], float(abs(ker.dim - expected[i])), dim=ker.dim)
        h_max = lr.intersect(p.top.rel(i).kernel(), p.sub.adj(i - 1).kernel())
        defect = lr.angle_defect(ker, h_max)
        rep.add(f"hodge.equals_max_harmonic[{i}]", defect <= eps, defect)
        sa = lr.angle_defect(lap.graph, lap.adjoint().graph)
        rep.add(f"hodge.self_adjoint[{i}]", sa <= eps, sa)
    return kernels, rep


def random_admissible_domains(p: SandwichPair, rng: np.random.Generator) -> list:
    """Random orthonormal-coordinate domains ``dom D_i ⊆ dom T_i ⊆ dom L_i`` closing into a complex."""
    n, tol = p.n, p.tol
    doms = [None] * n
    nxt = None
    for i in reversed(range(n)):
        t = p.top.rel(i)
        if nxt is None:
            allowed = t.domain()
        else:
            # u in dom L_i with L_i u in dom T_{i+1}
            m = t.operator_matrix()
            q = t.domain().basis
            comp = lr.complement(nxt).basis
            coeffs = lr._null(comp.T @ m @ q, tol) if q.shape[1] else np.zeros((0, 0))
            allowed = lr.column_span(q @ coeffs, tol, scale=1.0) if coeffs.size else lr.zero_subspace(p.dims[i], tol)
        base = p.sub.rel(i).domain()
        extra = allowed.basis @ rng.standard_normal((allowed.dim, rng.integers(0, allowed.dim + 1)))
        doms[i] = lr.sum(base, lr.column_span(extra, tol)) if extra.size else base
        nxt = doms[i]
    return doms


def _harmonic_dims(c: HilbertComplex) -> list:
    return [hb.harmonic_space(c, i).dim for i in range(c.n + 1)]


def injectivity_chain(p: SandwichPair, t_domains=None, seed: int = 0) -> ValidationReport:
    """``dim (ker T_i ∩ ker T_{i-1}^*) ≤ h_M^i`` for ``T = D``, ``T = L`` and an admissible ``T``.

    ``t_domains`` are orthonormal-coordinate domains; if omitted a random
    admissible chain is drawn from ``seed``.
    """
    h_m = intermediate_cohomology(p)
    rep = ValidationReport()
    if t_domains is None:
        t_domains = random_admissible_domains(p, np.random.default_rng(seed))
    t_rels = []
    for i, dom in enumerate(t_domains):
        if not lr.contains(p.top.rel(i).domain(), dom) or not lr.contains(dom, p.sub.rel(i).domain()):
            raise ContractError(f"degree {i}: intermediate domain is not sandwiched between dom D and dom L")
        t_rels.append(lr.relation_from_operator(p.top.rel(i).operator_matrix(), dom))
    tc = HilbertComplex.from_relations(p.dims, t_rels, p.tol)
    if not hb.validate_complex(tc).passed:
        raise ContractError("intermediate domains do not form a complex")
    for label, c in (("sub", p.sub), ("top", p.top), ("random", tc)):
        for i, h in enumerate(_harmonic_dims(c)):
            rep.add(f"injectivity.{label}[{i}]", h <= h_m[i], float(max(0, h - h_m[i])), dim=h, bound=h_m[i])
    for i, h in enumerate(_harmonic_dims(p.intermediate.P)):
        rep.add(f"injectivity.intermediate[{i}]", h == h_m[i], float(abs(h - h_m[i])), dim=h)
    return rep


def extension_conditions(p: SandwichPair, d: DualityData | None = None):
    """The five conditions comparing ``D`` with ``L``, and the implications among them.

    Returns ``(flags, report)``.  ``flags`` maps "domains", "images", "kernels",
    "betti_top", "betti_sub" to booleans.  Always asserted: domains implies the
    rest, and images with kernels together imply domains.  On complementary
    pairs all five must agree.
    """
    n = p.n
    top, sub = p.top, p.sub
    h_m = intermediate_cohomology(p)
    flags = {
        "domains": all(lr.equal(top.rel(i).domain(), sub.rel(i).domain()) for i in range(n)),
        "images": all(lr.equal(top.rel(i).range(), sub.rel(i).range()) for i in range(n)),
        "kernels": all(lr.equal(top.rel(i).kernel(), sub.rel(i).kernel()) for i in range(n)),
        "betti_top": hb.cohomology_dims(top) == h_m,
        "betti_sub": hb.cohomology_dims(sub) == h_m,
    }
    rep = ValidationReport()
    rest = [flags[k] for k in ("images", "kernels", "betti_top", "betti_sub")]
    rep.add("conditions.domains_implies_all", (not flags["domains"]) or all(rest), 0.0, **flags)
    rep.add("conditions.images_kernels_imply_domains", not (flags["images"] and flags["kernels"]) or flags["domains"], 0.0)
    ok, _ = _is_complementary(p, d)
    if ok:
        vals = set(flags.values())
        rep.add("conditions.all_equal", len(vals) == 1, 0.0)
    return flags, rep


def euler_M(p: SandwichPair, d: DualityData | None = None):
    """``(chi_M, index, report)`` for the even-to-odd operator of ``P``."""
    pc = p.intermediate.P
    chi = _alt(hb.cohomology_dims(pc))
    _, _, ind = hb.d_plus_dstar_index(pc)
    rep = ValidationReport()
    rep.add("euler.index_equals_chi", ind == chi, float(abs(ind - chi)), chi_M=chi, index=ind)
    ok, _ = _is_complementary(p, d)
    if ok and p.n % 2 == 1:
        rep.add("euler.odd_vanishing", chi == 0, float(abs(chi)))
    return chi, ind, rep


def duality_harmonic_check(p: SandwichPair, d: DualityData) -> ValidationReport:
    """``phi_j`` maps harmonic forms of ``D`` onto those of ``L`` in degree ``n-j``."""
    phis = d.orthonormal(p.top.spaces)
    eps = p.tol.angle_eps
    ok, _ = _is_complementary(p, d)
    rep = ValidationReport()
    rep.add("harmonic_duality.complementary", ok, 0.0)
    n = p.n
    for j in range(n + 1):
        hd = hb.harmonic_space(p.sub, j)
        hl = hb.harmonic_space(p.top, n - j)
        defect = lr.angle_defect(lr.image(phis[j], hd), hl)
        rep.add(f"harmonic_duality.harmonic_image[{j}]", defect <= eps or not ok, defect)
        a, b = hb.cohomology_dim(p.sub, j), hb.cohomology_dim(p.top, n - j)
        rep.add(f"harmonic_duality.cohomology_dims[{j}]", a == b or not ok, float(abs(a - b)), dims=[a, b])
        dual = hb.dual_cohomology_dims(p.top)
        rep.add(f"harmonic_duality.dual_cohomology[{j}]", a == dual[j] or not ok, float(abs(a - dual[j])), dims=[a, dual[j]])
    return rep


# --------------------------------------------------------------------------- signature


def _grading_sign(deg: int, l: int) -> int:
    return -1 if ((deg * (deg - 1) + 2 * l) // 2) % 2 else 1


def epsilon_grading(p: SandwichPair, d: DualityData) -> np.ndarray:
    """Total-space matrix of ``eps_q = (-1)^((q(q-1)+2l)/2) phi_q`` in orthonormal coordinates."""
    n = p.n
    if n % 4:
        raise ContractError(f"top degree {n} is not a multiple of 4")
    l = n // 4
    phis = d.orthonormal(p.top.spaces)
    off = np.concatenate([[0], np.cumsum(p.dims)])
    e = np.zeros((off[-1], off[-1]))
    for q in range(n + 1):
        r = n - q
        e[off[r] : off[r + 1], off[q] : off[q + 1]] = _grading_sign(q, l) * phis[q]
    return e


def _eigenspace(m: np.ndarray, value: float, tol: Tolerance) -> Subspace:
    k = m.shape[0]
    return lr.relation_from_operator(m - value * np.eye(k), lr.full_subspace(k, tol)).kernel()


def signature(p: SandwichPair, d: DualityData) -> SignatureReport:
    """Signature of the middle-degree pairing ``<eta, phi(omega)>`` on harmonic forms of ``P``.

    Computed three ways: Gram eigenvalue signs, the ``±1`` eigenspaces of the
    grading on the middle harmonic space, and the index of the grading-positive
    part of ``D + D^*`` for ``P``.
    """
    n = p.n
    if n % 4 or n == 0:
        raise ContractError(f"signature needs top degree 4l with l >= 1, got {n}")
    l = n // 4
    mid = 2 * l
    tol = p.tol
    eps = tol.angle_eps
    rep = ValidationReport()
    ok, comp = _is_complementary(p, d)
    rep.add("signature.complementary", ok, 0.0)
    phis = d.orthonormal(p.top.spaces)
    kernels, hodge_rep = hodge_M(p)
    harm = kernels[mid]
    e = harm.basis
    phi = phis[mid]
    gram = e.T @ phi @ e
    asym = float(np.abs(gram - gram.T).max()) if gram.size else 0.0
    if asym > eps:
        raise DualityError(f"middle-degree Gram matrix is not symmetric (defect {asym:.3g})")
    rep.add("signature.gram_symmetric", True, asym)
    pres = lr.containment_defect(harm, lr.image(phi, harm))
    rep.add("signature.phi_preserves_harmonic", pres <= eps, pres)
    evals = np.linalg.eigvalsh((gram + gram.T) / 2) if gram.size else np.zeros(0)
    sigma = int(np.count_nonzero(evals > eps) - np.count_nonzero(evals < -eps))

    grading = epsilon_grading(p, d)
    sq = float(np.abs(grading @ grading - np.eye(grading.shape[0])).max()) if grading.size else 0.0
    rep.add("signature.epsilon_involution", sq <= 1e-10, sq)
    eps_mid = _grading_sign(mid, l) * phi
    plus = lr.intersect(harm, _eigenspace(eps_mid, 1.0, tol)).dim
    minus = lr.intersect(harm, _eigenspace(eps_mid, -1.0, tol)).dim
    rep.add("signature.eigenspace_split", sigma == plus - minus, float(abs(sigma - plus + minus)), plus=plus, minus=minus)

    dirac, _, _ = hb.dirac_relation(p.intermediate.P, "total")
    ker = dirac.kernel()
    idx = lr.intersect(ker, _eigenspace(grading, 1.0, tol)).dim - lr.intersect(ker, _eigenspace(grading, -1.0, tol)).dim
    rep.add("signature.index_plus", idx == sigma, float(abs(idx - sigma)), index=idx)
    return SignatureReport(gram, sigma, plus, minus, 1, idx, rep)


# --------------------------------------------------------------------------- full suite


def full_suite(p: SandwichPair, d: DualityData | None = None, seed: int = 0) -> ValidationReport:
    """Every identity that applies to ``p`` (and ``d`` when given) in one report."""
    rep = ValidationReport()
    rep.extend(check_extension(p))
    if not rep.passed:
        # every later identity presupposes a valid pair
        return rep
    rep.extend(build_intermediate(p, strict=False).certificates)
    rep.extend(dual_intermediate(p, d)[1])
    for j, r in enumerate(cohomological_formula_check(p)):
        rep.add(f"formula.residual[{j}]", r == 0, float(abs(r)))
    ir = psi(p, d)
    rep.extend(ir.checks)
    it, isub, diff = index_difference(p)
    rep.add("index.difference_equals_psi", diff == ir.psi, float(abs(diff - ir.psi)), ind_top=it, ind_sub=isub)
    rep.extend(hodge_M(p)[1])
    rep.extend(injectivity_chain(p, seed=seed))
    rep.extend(extension_conditions(p, d)[1])
    rep.extend(euler_M(p, d)[2])
    if d is not None:
        rep.extend(check_complementary(p, d))
        rep.extend(paired_dims_check(p, d))
        rep.extend(duality_harmonic_check(p, d))
        if p.n % 4 == 0:
            try:
                rep.extend(signature(p, d).checks)
            except DualityError as exc:
                rep.add("signature.gram_symmetric", False, 1.0, error=str(exc))
    return rep
