"""Small random-instance helpers shared by the test modules."""

import numpy as np

from kodaira import linrel as lr


def int_matrix(rng, rows, cols, lo=-3, hi=3):
    return rng.integers(lo, hi + 1, size=(rows, cols))


def random_int_relation(rng, dim_a, dim_b, max_pairs=None):
    """Relation spanned by random integer pairs, returned with the raw pair matrices."""
    k = int(rng.integers(0, (max_pairs or dim_a + dim_b) + 1))
    us = int_matrix(rng, dim_a, k)
    vs = int_matrix(rng, dim_b, k)
    if k and rng.random() < 0.3:
        # make some pairs dependent so ranks drop
        us[:, -1] = us[:, 0]
        vs[:, -1] = vs[:, 0]
    return lr.relation_from_pairs(us.reshape(dim_a, k), vs.reshape(dim_b, k)), us, vs


def random_partial_operator(rng, dim_a, dim_b):
    act = int_matrix(rng, dim_b, dim_a)
    dom_cols = int_matrix(rng, dim_a, int(rng.integers(0, dim_a + 1)))
    return act, dom_cols, lr.relation_from_operator(act, lr.column_span(dom_cols))


COMPLEMENTARY_SHAPES = [(2, 2), (1, 2, 1), (2, 3, 3, 2), (1, 2, 2, 1), (1, 2, 3, 2, 1), (2, 2, 2, 2, 2), (1, 4, 1), (2, 1, 2, 1, 2)]


def complementary_instances(count, shapes=None, seed0=0):
    """``count`` generated complementary pairs cycling through palindromic shapes."""
    from kodaira import models as md

    shapes = shapes or COMPLEMENTARY_SHAPES
    out = []
    for k in range(count):
        dims = shapes[k % len(shapes)]
        pair, duality = md.gen_complementary(md.GeneratorSpec(seed0 + k, dims))
        out.append((pair, duality))
    return out


def random_pairs(count, max_len=4, max_dim=6, seed0=0, codims=(0, 2)):
    from kodaira import models as md

    out = []
    for s in range(count):
        rng = np.random.default_rng(10_000 + seed0 + s)
        length = int(rng.integers(1, max_len + 1))
        dims = tuple(int(d) for d in rng.integers(1, max_dim + 1, length + 1))
        out.append(md.gen_random_pair(md.GeneratorSpec(seed0 + s, dims, None, codims)))
    return out


def exact_grid(n, pinned=(0, -1)):
    """Integer data ``(dims, actions, absolute domains, relative domains)`` of the interval grid."""
    d = [[(-1 if v == e else 1 if v == e + 1 else 0) for v in range(n + 1)] for e in range(n)]
    pins = {p % (n + 1) for p in pinned}
    free = [k for k in range(n + 1) if k not in pins]
    full = [[int(i == j) for j in range(n + 1)] for i in range(n + 1)]
    rel = [[int(i == j) for j in free] for i in range(n + 1)]
    return [n + 1, n], [d], [full], [rel]
