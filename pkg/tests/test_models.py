import numpy as np
import pytest

from kodaira import hilbert as hb
from kodaira import linrel as lr
from kodaira import models as md
from kodaira import sandwich as sw
from kodaira.models import GeneratorSpec, GridSpec

import oracles as orc
from helpers import exact_grid


def alt(xs):
    return sum((-1) ** i * x for i, x in enumerate(xs))


def raw_data(pair):
    """Raw integer-valued actions and domain bases of a grid or cone pair."""
    acts = [np.rint(d.action).astype(int) for d in pair.top.diffs]
    doms = [np.rint(d.domain.basis).astype(int) for d in pair.top.diffs]
    subs = [np.rint(s.basis).astype(int) for s in pair.sub_domains]
    return list(pair.dims), acts, doms, subs


def test_zero_codimension_gives_equal_pair():
    pair = md.gen_random_pair(GeneratorSpec(2, (2, 3, 3, 1), None, (0, 0)))
    assert sw.quotient_dims(pair) == [0] * (pair.n + 1)
    assert sw.extension_conditions(pair)[0]["domains"]


def test_seed_one_validates():
    pair = md.gen_random_pair(GeneratorSpec(1, (3, 4, 3)))
    assert sw.check_extension(pair).passed
    assert hb.validate_complex(pair.top).passed and hb.validate_complex(pair.sub).passed


def test_random_pairs_are_deterministic():
    a = md.gen_random_pair(GeneratorSpec(9, (3, 4, 4, 2)))
    b = md.gen_random_pair(GeneratorSpec(9, (3, 4, 4, 2)))
    for key in ("actions", "domains", "sub_domains"):
        for x, y in zip(a.integer_data[key], b.integer_data[key]):
            assert np.array_equal(x, y)
    for x, y in zip(a.top.relations, b.top.relations):
        assert np.array_equal(x.graph.basis, y.graph.basis)


def test_random_pairs_keep_integer_entries_small():
    for seed in range(20):
        pair = md.gen_random_pair(GeneratorSpec(seed, (4, 5, 4)))
        assert max(int(np.abs(a).max(initial=0)) for a in pair.integer_data["actions"]) < 1000
        assert sw.build_intermediate(pair).certificates.passed


def test_random_pair_generator_budget(monkeypatch):
    monkeypatch.setattr(md, "MAX_TRIES", 0)
    with pytest.raises(md.GeneratorError):
        md.gen_random_pair(GeneratorSpec(0, (2, 2)))


def test_generator_spec_validation():
    with pytest.raises(ValueError):
        GeneratorSpec(0, (2, 0, 2))
    with pytest.raises(ValueError):
        GeneratorSpec(0, (2, 2), length=3)
    with pytest.raises(ValueError):
        GridSpec(1)
    with pytest.raises(ValueError):
        GridSpec(4, weight_exponent=-1.0)
    with pytest.raises(ValueError):
        GridSpec(4, weight_exponent=10.5)
    with pytest.raises(ValueError):
        GridSpec(4, boundary_mode="middle")


def test_complementary_sweep_length_three():
    for seed in range(20):
        pair, d = md.gen_complementary(GeneratorSpec(seed, (2, 3, 3, 2)))
        assert sw.check_complementary(pair, d).passed
        assert all(a == b for a, b in sw.paired_dims(pair))
        assert sw.check_extension(pair).passed


def test_complementary_pairs_have_equal_sub_and_top():
    for seed in range(10):
        pair, _ = md.gen_complementary(GeneratorSpec(seed, (1, 2, 3, 2, 1)))
        for i in range(pair.n):
            assert lr.equal(pair.sub.rel(i).graph, pair.top.rel(i).graph)


def test_complementary_pairs_are_deterministic():
    a, da = md.gen_complementary(GeneratorSpec(4, (2, 2, 2)))
    b, db = md.gen_complementary(GeneratorSpec(4, (2, 2, 2)))
    assert all(np.array_equal(x, y) for x, y in zip(da.phis, db.phis))
    assert all(np.array_equal(x.action, y.action) for x, y in zip(a.top.diffs, b.top.diffs))


def test_complementary_generator_rejects_bad_input():
    with pytest.raises(md.GeneratorError):
        md.gen_complementary(GeneratorSpec(0, (2, 3)))
    with pytest.raises(md.GeneratorError):
        md.gen_complementary(GeneratorSpec(0, (2, 2)), constants=[2.0])
    with pytest.raises(md.GeneratorError):
        md.gen_complementary(GeneratorSpec(0, (2, 3, 2)))


def test_custom_constants_and_signs():
    for consts, signs in (([2.0, 1.0, 0.5], [1, 1, 1, 1]), ([2.0, -1.0, -0.5], [1, -1, -1, 1])):
        pair, d = md.gen_complementary(GeneratorSpec(1, (2, 2, 2, 2)), constants=consts, signs=signs)
        assert d.constants == tuple(consts)
        assert sw.check_complementary(pair, d).passed
        assert sw.dual_intermediate(pair, d)[1].passed


def test_default_duality_conventions():
    assert md.default_signs(4) == [1, -1, 1, -1, 1]
    assert md.default_signs(3) == [1, 1, 1, 1]
    for n in range(1, 7):
        s = md.default_signs(n)
        c = md.default_constants(n, s)
        assert all(np.isclose(c[i] * c[n - i - 1] * s[i] * s[i + 1], 1.0) for i in range(n))


def test_grid_two_ends_against_oracle():
    data = exact_grid(4)
    dims, acts, full, rel = data
    bt, bs = orc.betti(dims, acts, full), orc.betti(dims, acts, rel)
    bm = orc.intermediate_betti(*data)
    q = orc.quotient_dims(dims, full, rel)
    assert (bm, q, alt(bt), alt(bs)) == ([1, 1], [2, 0], 1, -1)
    ir = sw.psi(md.gen_grid_interval(GridSpec(4, 0.0, "two_ends")))
    assert (ir.betti_M, ir.quotient_dims, ir.psi, ir.chi_top, ir.chi_sub) == (bm, q, alt(q), alt(bt), alt(bs))
    assert ir.psi == 2


def test_grid_one_end_against_oracle():
    dims, acts, full, rel = exact_grid(4, pinned=(0,))
    q = orc.quotient_dims(dims, full, rel)
    assert q == [1, 0]
    ir = sw.psi(md.gen_grid_interval(GridSpec(4, 0.0, "one_end")))
    assert ir.quotient_dims == q and ir.psi == 1
    assert ir.psi == alt(orc.betti(dims, acts, full)) - alt(orc.betti(dims, acts, rel))


def test_grid_integer_data_is_weight_and_refinement_invariant():
    for mode in ("one_end", "two_ends"):
        ref = sw.psi(md.gen_grid_interval(GridSpec(3, 0.0, mode))).to_dict()
        for n in (3, 4, 7):
            for c in (0.0, 2.0, -0.5, 9.0):
                ir = sw.psi(md.gen_grid_interval(GridSpec(n, c, mode)))
                assert ir.to_dict() == ref


def test_cone_three_against_oracle():
    pair = md.gen_cone_2d(3, 1.0)
    dims, acts, doms, subs = raw_data(pair)
    bt, bs = orc.betti(dims, acts, doms), orc.betti(dims, acts, subs)
    q = orc.quotient_dims(dims, doms, subs)
    ir = sw.psi(pair)
    assert (ir.betti_top, ir.betti_sub) == (bt, bs) == ([1, 0, 0], [0, 0, 0])
    assert ir.psi == alt(q) == alt(bt) - alt(bs) == 1
    assert sw.cohomological_formula_check(pair) == [0, 0, 0]
    assert sw.build_intermediate(pair).certificates.passed


def test_cone_subdivision_and_full_domain_variant():
    assert sw.psi(md.gen_cone_2d(3)).psi == sw.psi(md.gen_cone_2d(6, 2.0)).psi
    full = md.gen_cone_2d(4, vertex_condition=False)
    assert sw.psi(full).psi == 0
    with pytest.raises(ValueError):
        md.gen_cone_2d(2)


def test_generated_instances_validate():
    pairs = [md.gen_grid_interval(GridSpec(5)), md.gen_cone_2d(5, 0.5)]
    pairs += [md.gen_random_pair(GeneratorSpec(s, (2, 3, 2))) for s in range(5)]
    pairs += [md.gen_complementary(GeneratorSpec(s, (1, 2, 1)))[0] for s in range(5)]
    for pair in pairs:
        assert sw.check_extension(pair).passed
