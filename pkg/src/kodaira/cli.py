"""Command-line front end and the JSON instance format.

Exit codes: 0 when every check passes, 1 when a check fails, 2 for input or
usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np

from . import hilbert as hb
from . import linrel as lr
from . import models as md
from . import sandwich as sw
from .linrel import DEFAULT_TOL, Tolerance
from .report import ValidationReport

__all__ = ["InstanceError", "load_instance", "read_instance", "instance_to_dict", "write_instance", "main"]

FORMAT_VERSION = 1


class InstanceError(ValueError):
    """Malformed instance file; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"field '{field}': {message}")
        self.field = field


# --------------------------------------------------------------------------- instance format


def _matrix(value, rows: int, field: str, cols: int | None = None) -> np.ndarray:
    try:
        m = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InstanceError(field, f"not a numeric matrix ({exc})") from None
    if m.ndim == 1 and m.size == 0:
        m = m.reshape(rows, 0) if cols in (None, 0) else m
    if m.ndim == 2 and m.shape == (0, 0) and rows == 0:
        m = m.reshape(0, cols or 0)
    if m.ndim != 2 or m.shape[0] != rows or (cols is not None and m.shape[1] != cols):
        want = f"{rows} x {cols}" if cols is not None else f"{rows} rows"
        raise InstanceError(field, f"expected a {want} row-major matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InstanceError(field, "entries must be finite")
    return m


def load_instance(doc: dict, tol: Tolerance | None = None):
    """``(pair, duality, tol)`` from a parsed instance document."""
    if not isinstance(doc, dict):
        raise InstanceError("<root>", "expected a JSON object")
    if "version" not in doc:
        raise InstanceError("version", "missing mandatory field")
    if doc["version"] != FORMAT_VERSION:
        raise InstanceError("version", f"unsupported version {doc['version']!r}")
    if doc.get("scalar", "real") != "real":
        raise InstanceError("scalar", "only 'real' is supported")
    dims = doc.get("dims")
    if not isinstance(dims, list) or not dims or not all(isinstance(d, int) and d >= 0 for d in dims):
        raise InstanceError("dims", "expected a nonempty list of nonnegative integers")
    n = len(dims) - 1
    file_tol = DEFAULT_TOL
    if "tolerance" in doc:
        t = doc["tolerance"]
        try:
            file_tol = Tolerance(float(t.get("rel_eps", DEFAULT_TOL.rel_eps)), float(t.get("abs_floor", DEFAULT_TOL.abs_floor)), float(t.get("angle_eps", DEFAULT_TOL.angle_eps)))
        except (AttributeError, TypeError, ValueError) as exc:
            raise InstanceError("tolerance", str(exc)) from None
    if tol is not None:
        file_tol = replace(file_tol, angle_eps=tol.angle_eps)
    tol = file_tol
    weights = doc.get("weights")
    try:
        spaces = hb.GradedSpace(tuple(dims), None if weights is None else tuple(weights))
    except (hb.StructureError, TypeError, ValueError) as exc:
        raise InstanceError("weights", str(exc)) from None
    ls = doc.get("L")
    if not isinstance(ls, list) or len(ls) != n:
        raise InstanceError("L", f"expected a list of {n} differentials")
    diffs, raw_acts, raw_doms = [], [], []
    for i, entry in enumerate(ls):
        if not isinstance(entry, dict) or "action" not in entry or "domain_basis" not in entry:
            raise InstanceError(f"L[{i}]", "expected an object with 'action' and 'domain_basis'")
        act = _matrix(entry["action"], dims[i + 1], f"L[{i}].action", dims[i])
        dom = _matrix(entry["domain_basis"], dims[i], f"L[{i}].domain_basis")
        diffs.append(hb.PartialOperator(act, lr.column_span(dom, tol)))
        raw_acts.append(act)
        raw_doms.append(dom)
    top = hb.HilbertComplex(spaces, diffs, tol)
    subs_raw = doc.get("D_domains")
    if not isinstance(subs_raw, list) or len(subs_raw) != n:
        raise InstanceError("D_domains", f"expected a list of {n} basis matrices")
    raw_subs = [_matrix(m, dims[i], f"D_domains[{i}]") for i, m in enumerate(subs_raw)]
    pair = sw.SandwichPair(top, [lr.column_span(m, tol) for m in raw_subs])
    # keep the file's matrices so that writing the pair back is exact
    pair.source_data = {"actions": raw_acts, "domains": raw_doms, "sub_domains": raw_subs}
    duality = None
    if doc.get("duality") is not None:
        du = doc["duality"]
        if not isinstance(du, dict):
            raise InstanceError("duality", "expected an object")
        phis_raw = du.get("phis")
        if not isinstance(phis_raw, list) or len(phis_raw) != n + 1:
            raise InstanceError("duality.phis", f"expected {n + 1} matrices")
        phis = [_matrix(m, dims[n - i], f"duality.phis[{i}]", dims[i]) for i, m in enumerate(phis_raw)]
        consts = du.get("constants")
        if not isinstance(consts, list) or len(consts) != n:
            raise InstanceError("duality.constants", f"expected {n} numbers")
        signs = du.get("signs")
        if not isinstance(signs, list) or len(signs) != n + 1 or any(s not in (1, -1) for s in signs):
            raise InstanceError("duality.signs", f"expected {n + 1} entries of +1 or -1")
        try:
            duality = sw.DualityData(phis, [float(c) for c in consts], signs)
        except (TypeError, ValueError) as exc:
            raise InstanceError("duality", str(exc)) from None
    return pair, duality, tol


def read_instance(path: str, tol: Tolerance | None = None):
    """Parse an instance file; JSON syntax errors become :class:`InstanceError` with line/column."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise InstanceError("<file>", f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError("<json>", f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return load_instance(doc, tol)


def _rows(m) -> list:
    m = np.asarray(m)
    return [[_num(x) for x in row] for row in m.tolist()] if m.shape[0] else []


def _num(x):
    return int(x) if float(x).is_integer() and abs(x) < 2**53 else float(x)


def instance_to_dict(pair: sw.SandwichPair, duality: sw.DualityData | None = None, integer_data=None) -> dict:
    """Serializable instance document; integer data (if any) is written exactly."""
    top = pair.top
    doc = {"version": FORMAT_VERSION, "scalar": "real", "dims": list(top.dims)}
    if top.spaces.weights is not None:
        doc["weights"] = [[float(v) for v in w] for w in top.spaces.weights]
    if integer_data is None:
        integer_data = getattr(pair, "integer_data", None) or getattr(pair, "source_data", None)
    if integer_data is not None:
        acts, doms, subs = integer_data["actions"], integer_data["domains"], integer_data["sub_domains"]
    else:
        acts = [d.action for d in top.diffs]
        doms = [d.domain.basis for d in top.diffs]
        subs = [s.basis for s in pair.sub_domains]
    doc["L"] = [{"action": _rows(a), "domain_basis": _rows(d)} for a, d in zip(acts, doms)]
    doc["D_domains"] = [_rows(s) for s in subs]
    if duality is not None:
        doc["duality"] = {
            "phis": [_rows(p) for p in duality.phis],
            "constants": [float(c) for c in duality.constants],
            "signs": [int(s) for s in duality.signs],
        }
    doc["tolerance"] = {"rel_eps": pair.tol.rel_eps, "abs_floor": pair.tol.abs_floor}
    return doc


def write_instance(path: str, pair, duality=None) -> None:
    with open(path, "w") as fh:
        json.dump(instance_to_dict(pair, duality), fh, indent=1)
        fh.write("\n")


# --------------------------------------------------------------------------- commands


def _table(headers, rows) -> str:
    cells = [[str(h) for h in headers]] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[k]) for r in cells) for k in range(len(headers))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    return "\n".join(lines)


def _betti(pair, duality, args):
    ir = sw.psi(pair, duality)
    rows = [[j, ir.betti_top[j], ir.betti_sub[j], ir.betti_M[j]] for j in range(pair.n + 1)]
    text = _table(["degree", "betti_top", "betti_sub", "betti_M"], rows)
    return ir.checks, {"betti_top": ir.betti_top, "betti_sub": ir.betti_sub, "betti_M": ir.betti_M}, text


def _validate(pair, duality, args):
    rep = sw.check_extension(pair)
    dims = [pair.top.rel(i).domain().dim for i in range(pair.n)]
    sub = [pair.sub.rel(i).domain().dim for i in range(pair.n)]
    return rep, {"domain_dims_top": dims, "domain_dims_sub": sub}, _table(["degree", "dom L", "dom D"], [[i, a, b] for i, (a, b) in enumerate(zip(dims, sub))])


def _sandwich(pair, duality, args):
    ic = sw.build_intermediate(pair, strict=False)
    rep = ValidationReport().extend(ic.certificates)
    h = sw.intermediate_cohomology(pair)
    doms = [ic.P.rel(j).domain().dim for j in range(pair.n)]
    rows = [[j, doms[j] if j < pair.n else "-", h[j]] for j in range(pair.n + 1)]
    return rep, {"intermediate_cohomology": h, "domain_dims_P": doms}, _table(["degree", "dom P", "h_M"], rows)


def _need_duality(duality):
    if duality is None:
        raise InstanceError("duality", "this command needs duality data")


def _duality(pair, duality, args):
    _need_duality(duality)
    rep = ValidationReport()
    rep.extend(sw.check_complementary(pair, duality))
    rep.extend(sw.paired_dims_check(pair, duality))
    rep.extend(sw.dual_intermediate(pair, duality)[1])
    rep.extend(sw.duality_harmonic_check(pair, duality))
    dims = sw.paired_dims(pair)
    return rep, {"paired_dims": dims}, _table(["degree", "h_M^j", "h_M^(n-j)"], [[j, a, b] for j, (a, b) in enumerate(dims)])


def _indices(pair, duality, args):
    ir = sw.psi(pair, duality)
    rep = ValidationReport().extend(ir.checks)
    it, isub, diff = sw.index_difference(pair)
    rep.add("index.difference_equals_psi", diff == ir.psi, float(abs(diff - ir.psi)))
    chi_m, ind_m, erep = sw.euler_M(pair, duality)
    rep.extend(erep)
    for j, r in enumerate(sw.cohomological_formula_check(pair)):
        rep.add(f"formula.residual[{j}]", r == 0, float(abs(r)))
    res = ir.to_dict()
    res.update({"ind_top": it, "ind_sub": isub, "index_difference": diff, "index_M": ind_m})
    rows = [[k, res[k]] for k in ("psi", "chi_top", "chi_sub", "chi_M", "ind_top", "ind_sub", "index_difference", "index_M")]
    rows.append(["quotient_dims", " ".join(map(str, ir.quotient_dims))])
    return rep, res, _table(["quantity", "value"], rows)


def _signature(pair, duality, args):
    _need_duality(duality)
    if pair.n % 4 or pair.n == 0:
        raise InstanceError("dims", f"signature needs top degree 4l with l >= 1, got {pair.n}")
    try:
        sr = sw.signature(pair, duality)
    except sw.DualityError as exc:
        rep = ValidationReport()
        rep.add("signature.gram_symmetric", False, 1.0, error=str(exc))
        return rep, {}, str(exc)
    res = sr.to_dict()
    rows = [[k, res[k]] for k in ("sigma", "eps_plus_dim", "eps_minus_dim", "index_plus", "orientation_sign")]
    return sr.checks, res, _table(["quantity", "value"], rows)


COMMANDS = {
    "validate": _validate,
    "betti": _betti,
    "sandwich": _sandwich,
    "duality": _duality,
    "indices": _indices,
    "signature": _signature,
}


def _tolerance(args) -> Tolerance | None:
    raw = args.tol if args.tol is not None else os.environ.get("KODAIRA_TOL")
    if raw is None:
        return None
    try:
        value = float(raw)
        return replace(DEFAULT_TOL, angle_eps=value)
    except ValueError:
        raise InstanceError("--tol", f"invalid tolerance {raw!r}") from None


def _emit(args, command, rep, results, text, tol):
    doc = rep.to_dict(tol, command=command, results=results)
    payload = json.dumps(doc, indent=1, sort_keys=False)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(payload + "\n")
    if args.json:
        print(payload)
    else:
        if text:
            print(text)
        bad = rep.first_failure()
        npass = sum(c.passed for c in rep.checks)
        print(f"checks: {npass}/{len(rep)} passed")
        if bad is not None:
            print(f"FAIL: first failing check: {bad.name} (residual {bad.residual:.3g})")
    if not rep.passed and args.json:
        print(f"FAIL: first failing check: {rep.first_failure().name}", file=sys.stderr)
    return 0 if rep.passed else 1


def _run_file_command(args) -> int:
    tol = _tolerance(args)
    pair, duality, used = read_instance(args.path, tol)
    rep, results, text = COMMANDS[args.command](pair, duality, args)
    return _emit(args, args.command, rep, results, text, used)


def _generate(args, tol):
    kind = args.kind
    if kind == "grid":
        return md.gen_grid_interval(md.GridSpec(args.cells, args.exponent, args.mode), tol), None
    if kind == "cone":
        return md.gen_cone_2d(args.k, args.exponent, not args.no_vertex_condition, tol), None
    dims = tuple(args.dims) if args.dims else None
    if kind == "random":
        spec = md.GeneratorSpec(args.seed, dims or (3, 4, 3), None, tuple(args.codims), tuple(args.scalars))
        return md.gen_random_pair(spec, tol), None
    if kind == "complementary":
        spec = md.GeneratorSpec(args.seed, dims or (2, 3, 4, 3, 2))
        return md.gen_complementary(spec, args.constants, args.signs, tol)
    raise InstanceError("kind", f"unknown generator {kind!r}")


def _cmd_gen(args) -> int:
    tol = _tolerance(args) or DEFAULT_TOL
    try:
        pair, duality = _generate(args, tol)
    except (ValueError, md.GeneratorError) as exc:
        raise InstanceError(args.kind, str(exc)) from None
    doc = instance_to_dict(pair, duality)
    payload = json.dumps(doc, indent=1)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(payload + "\n")
        if not args.json:
            print(f"wrote {args.kind} instance with dims {list(pair.dims)} to {args.out}")
    else:
        print(payload)
    return 0


def suite_instances(seed: int):
    """Instances verified for one seed: a random pair and a complementary pair."""
    rng = np.random.default_rng(seed)
    length = int(rng.integers(1, 5))
    dims = tuple(int(d) for d in rng.integers(1, 7, length + 1))
    random_pair = md.gen_random_pair(md.GeneratorSpec(seed, dims, None, (0, 2)))
    half = [int(d) for d in rng.integers(1, 4, 3)]
    shapes = [(half[0], 2 * half[1], half[0]), (half[0], 2 * half[1], 2 * half[1], half[0]), (half[0], half[1], half[2], half[1], half[0])]
    cdims = shapes[seed % 3]
    comp_pair, duality = md.gen_complementary(md.GeneratorSpec(seed, cdims))
    return [(f"random[{seed}]", random_pair, None), (f"complementary[{seed}]", comp_pair, duality)]


def _verify_seed(seed: int) -> list:
    out = []
    for label, pair, duality in suite_instances(seed):
        out.append((label, sw.full_suite(pair, duality, seed)))
    return out


def _cmd_verify_all(args) -> int:
    tol = _tolerance(args)
    if args.path:
        pair, duality, used = read_instance(args.path, tol)
        results = [(args.path, sw.full_suite(pair, duality, args.seed))]
    else:
        used = DEFAULT_TOL
        seeds = range(args.seed, args.seed + args.seeds)
        with ThreadPoolExecutor(max_workers=max(1, args.workers)) as pool:
            chunks = list(pool.map(_verify_seed, seeds))
        results = [r for chunk in chunks for r in chunk]
    rep = ValidationReport()
    for label, r in results:
        rep.extend(r, prefix=f"{label}.")
    nfail = len(rep.failures())
    summary = {"instances": len(results), "checks": len(rep), "failed": nfail}
    if args.json or args.out:
        doc = rep.to_dict(used, command="verify-all", results=summary)
        payload = json.dumps(doc, indent=1)
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(payload + "\n")
        if args.json:
            print(payload)
    if not args.json:
        print(f"instances: {len(results)}  checks: {len(rep)}")
        if nfail == 0:
            print("checks passed: all")
        else:
            print(f"checks failed: {nfail}; first failing check: {rep.first_failure().name}")
    return 0 if nfail == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    common.add_argument("--tol", default=None, help="check tolerance for subspace/residual tests (env KODAIRA_TOL)")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--out", default=None, help="write the JSON report (or instance for gen) here")

    parser = argparse.ArgumentParser(prog="kodaira", description="Finite-dimensional Hilbert complexes and sandwiched extensions.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("validate", "check that L and D are complexes with dom D inside dom L"),
        ("betti", "cohomology dimensions of L, D and the intermediate complex"),
        ("sandwich", "build the intermediate complex and its certificates"),
        ("duality", "complementarity, paired dimensions and the dual intermediate complex"),
        ("indices", "psi, Euler characteristics, index differences and the cohomological formula"),
        ("signature", "middle-degree signature for top degree 4l"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("path")
    g = sub.add_parser("gen", parents=[common], help="write a generated instance")
    g.add_argument("kind", choices=["random", "complementary", "grid", "cone"])
    g.add_argument("--dims", type=int, nargs="+")
    g.add_argument("--codims", type=int, nargs=2, default=[0, 2], metavar=("MIN", "MAX"))
    g.add_argument("--scalars", type=int, nargs=2, default=[-3, 3], metavar=("LO", "HI"))
    g.add_argument("--constants", type=float, nargs="+")
    g.add_argument("--signs", type=int, nargs="+")
    g.add_argument("--cells", type=int, default=4)
    g.add_argument("--mode", choices=["one_end", "two_ends"], default="two_ends")
    g.add_argument("--exponent", type=float, default=0.0)
    g.add_argument("--k", type=int, default=3)
    g.add_argument("--no-vertex-condition", action="store_true")
    v = sub.add_parser("verify-all", parents=[common], help="run every identity on a file or on generated seeds")
    v.add_argument("path", nargs="?")
    v.add_argument("--seeds", type=int, default=10)
    v.add_argument("--workers", type=int, default=1)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        if args.command == "gen":
            return _cmd_gen(args)
        if args.command == "verify-all":
            return _cmd_verify_all(args)
        return _run_file_command(args)
    except InstanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (hb.StructureError, sw.DualityError, sw.ContractError, lr.DimensionMismatch) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
