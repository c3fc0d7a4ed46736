"""``descred`` command-line tool.

Exit codes: 0 success, 1 other numerical failure, 2 parse/schema error,
3 pencil not regular, 4 pure descriptor system, 5 E nonsingular (no fast
part), 6 switched modes do not share a range, 7 oracle check failed.
"""
import argparse
import sys

import numpy as np

from descred import io
from descred.errors import (
    CommonRangeError,
    DescredError,
    DimensionError,
    NoFastPartError,
    NotRegularError,
    ParseError,
    PureSystemError,
    SchemaError,
)
from descred.linalg import RankTolerance, norm2
from descred.model import DescriptorSystem, analyze, shift, shifted
from descred.oracle import (
    PolynomialInput,
    ResidualReport,
    check_reduction_identities,
    check_residual,
    check_switched,
    check_unforced_reduction,
    default_seed,
    random_polynomial_input,
)
from descred.qw import QuasiWeierstrass, qw_decompose
from descred.reduction import ReducedSystem, reduce_via_corange, reduce_via_range, to_standard
from descred.switching import SwitchedDescriptorSystem, SwitchedReduction, reduce_switching

CHECK_THRESHOLD = 1e-6

EXIT_CODES = [
    (ParseError, 2),
    (SchemaError, 2),
    (NotRegularError, 3),
    (PureSystemError, 4),
    (NoFastPartError, 5),
    (CommonRangeError, 6),
]


class CheckFailed(Exception):
    pass


def _lambda(text):
    parts = text.split(",")
    if len(parts) > 2:
        raise argparse.ArgumentTypeError("lambda must be 're' or 're,im'")
    try:
        vals = [float(p) for p in parts]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    return complex(vals[0], vals[1] if len(vals) == 2 else 0.0)


def _k_list(text):
    try:
        return [int(k) for k in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError("expected comma-separated integers") from exc


def parse_poly(text, m):
    """``poly:c0;c1;...`` where each ``c_j`` is ``m`` comma-separated numbers."""
    if not text.startswith("poly:"):
        raise SchemaError("input must look like poly:<c0>;<c1>;...")
    body = text[len("poly:"):]
    try:
        coeffs = [[float(v) for v in term.split(",")] for term in body.split(";")]
    except ValueError as exc:
        raise SchemaError(f"bad polynomial coefficient: {exc}") from exc
    if any(len(c) != m for c in coeffs):
        raise SchemaError(f"each coefficient needs {m} entries (one per input)")
    return PolynomialInput(np.array(coeffs).reshape(len(coeffs), m))


def _tolerance(args):
    return None if args.tol is None else RankTolerance("relative", args.tol)


def _provenance(args, **extra):
    tol = _tolerance(args)
    prov = {
        "source_sha256": io.file_sha256(args.file),
        "tool_version": io.TOOL_VERSION,
        "tolerance": (tol or RankTolerance()).to_dict(),
        "seed": default_seed(),
    }
    prov.update(extra)
    return prov


def _emit(doc, out):
    text = io.dumps(doc)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _single(path):
    system = io.parse_system_file(path)
    if not isinstance(system, DescriptorSystem):
        raise SchemaError(f"{path} describes a switched system; use switch-reduce")
    return system


def _basis(path):
    doc = io.load_json(path)
    if isinstance(doc, dict):
        if "basis" not in doc:
            raise SchemaError(f"{path}: expected a 'basis' entry")
        doc = doc["basis"]
    return io.parse_matrix(doc, "basis")


def cmd_analyze(args):
    system = io.parse_system_file(args.file)
    tol = _tolerance(args)
    if isinstance(system, SwitchedDescriptorSystem):
        lam = args.lam if args.lam is not None else system.common_lambda(tol)
        doc = {"modes": [io.index_report_to_dict(analyze(m, tol, lam)) for m in system.modes]}
    else:
        doc = io.index_report_to_dict(analyze(system, tol, args.lam))
    _emit(doc, None)
    return 0


def cmd_reduce(args):
    system = _single(args.file)
    tol = _tolerance(args)
    sh = shifted(system, args.lam, tol)
    basis = _basis(args.basis) if args.basis else None
    if args.side == "range":
        red = reduce_via_range(sh, args.k, basis, tol)
    else:
        red = reduce_via_corange(sh, args.k, basis, tol)
    _emit(io.reduction_to_dict(red, _provenance(args)), args.output)
    return 0


def cmd_standard(args):
    system = _single(args.file)
    tol = _tolerance(args)
    sh = shifted(system, args.lam, tol)
    basis = _basis(args.basis) if args.basis else None
    std = to_standard(sh, args.side, basis, tol)
    _emit(io.reduction_to_dict(std, _provenance(args)), args.output)
    return 0


def cmd_qw(args):
    system = _single(args.file)
    tol = _tolerance(args)
    bases = None
    if args.bases:
        doc = io.load_json(args.bases)
        if not isinstance(doc, dict) or set("XYVW") - set(doc):
            raise SchemaError(f"{args.bases}: expected an object with X, Y, V and W")
        bases = tuple(io.parse_matrix(doc[name], name) for name in "XYVW")
    qw = qw_decompose(system, args.lam, args.k, tol, bases)
    _emit(io.reduction_to_dict(qw, _provenance(args)), args.output)
    return 0


def cmd_switch_reduce(args):
    system = io.parse_system_file(args.file)
    if not isinstance(system, DescriptorSystem):
        sws = system
    else:
        sws = SwitchedDescriptorSystem([system])
    if args.lam is not None:
        sws = SwitchedDescriptorSystem(sws.modes, args.lam)
    red = reduce_switching(sws, args.k, _tolerance(args))
    _emit(io.reduction_to_dict(red, _provenance(args)), args.output)
    return 0


def _merge(reports):
    grid, res, norms = [], [], []
    ident = [r.identity_residual for r in reports if r.identity_residual is not None]
    for r in reports:
        grid += r.grid
        res += r.per_sample
        norms += r.state_norms
    return ResidualReport.from_samples(grid, res, norms, max(ident) if ident else None)


def _check_qw(system, red, args, rng):
    if not isinstance(system, DescriptorSystem):
        raise SchemaError("a quasi-Weierstrass file is checked against a single system")
    m = system.m
    grid = np.linspace(0.0, 1.0, 5)
    reports = []
    for _ in range(args.trials):
        u = parse_poly(args.input, m) if args.input else random_polynomial_input(rng, m, 2)
        z1 = rng.standard_normal(red.A_tilde.shape[0])
        reports.append(check_residual(system, red, z1, u, grid))
    return _merge(reports)


def _check_switched(system, red, args, rng):
    if isinstance(system, DescriptorSystem):
        system = SwitchedDescriptorSystem([system])
    ident = 0.0
    for mode, F_t in zip(system.modes, red.F_tilde_list):
        F = shift(mode, red.lam).F
        ident = max(ident, norm2(F @ red.X - red.X @ F_t) / max(norm2(F), 1e-300))
    r = red.X.shape[1]
    invertible = r > 0 and all(np.linalg.matrix_rank(F) == r for F in red.F_tilde_list)
    if not invertible:
        return ResidualReport.from_samples([], [], [], ident)
    reports = []
    modes = len(red.F_tilde_list)
    for _ in range(args.trials):
        schedule = [(i % modes, 0.25) for i in range(2 * modes)]
        z0 = rng.standard_normal(r)
        reports.append(check_switched(system, red, schedule, z0))
    rep = _merge(reports)
    return ResidualReport.from_samples(rep.grid, rep.per_sample, rep.state_norms, ident)


def cmd_check(args):
    system = io.parse_system_file(args.system)
    red, prov = io.parse_reduction_file(args.reduction)
    if prov.get("source_sha256") not in (None, io.file_sha256(args.system)):
        print("descred: warning: reduction was computed from a different system file", file=sys.stderr)
    seed = default_seed()
    rng = np.random.default_rng(seed)
    if isinstance(red, QuasiWeierstrass):
        rep = _check_qw(system, red, args, rng)
    elif isinstance(red, SwitchedReduction):
        rep = _check_switched(system, red, args, rng)
    elif not isinstance(system, DescriptorSystem):
        raise SchemaError("reduced and standard files are checked against a single system")
    elif isinstance(red, ReducedSystem) and red.index > 0:
        F = shift(system, red.lam).F
        rep = ResidualReport.from_samples([], [], [], check_reduction_identities(F, red))
    else:
        rep = check_unforced_reduction(system, red, trials=args.trials, seed=seed)
    worst = max(rep.max_residual, rep.identity_residual or 0.0)
    passed = worst <= CHECK_THRESHOLD
    doc = rep.to_dict()
    doc.update({"passed": passed, "seed": seed, "threshold": CHECK_THRESHOLD})
    _emit(doc, None)
    if not passed:
        raise CheckFailed(f"residual {worst:.3e} exceeds {CHECK_THRESHOLD:g}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="descred", description="Order and index reduction of descriptor systems.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, output=True):
        p.add_argument("file")
        p.add_argument("--lambda", dest="lam", type=_lambda, default=None, help="shift as re[,im]")
        p.add_argument("--tol", type=float, default=None, help="relative rank tolerance")
        if output:
            p.add_argument("-o", "--output", default=None)

    p = sub.add_parser("analyze", help="index, rank sequence and consistency dimension")
    common(p, output=False)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("reduce", help="equivalent lower-order, lower-index system")
    common(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--side", choices=("range", "corange"), default="range")
    p.add_argument("--basis", default=None, help="JSON file with a basis override")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("standard", help="equivalent standard system")
    common(p)
    p.add_argument("--side", choices=("range", "corange"), default="range")
    p.add_argument("--basis", default=None, help="JSON file with a basis override")
    p.set_defaults(func=cmd_standard)

    p = sub.add_parser("qw", help="quasi-Weierstrass decomposition")
    common(p)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--bases", default=None, help="JSON file with X, Y, V, W overrides")
    p.set_defaults(func=cmd_qw)

    p = sub.add_parser("switch-reduce", help="joint reduction of a switched system")
    common(p)
    p.add_argument("--k", type=_k_list, required=True, help="k1,k2,...")
    p.set_defaults(func=cmd_switch_reduce)

    p = sub.add_parser("check", help="verify a reduction against its system")
    p.add_argument("system")
    p.add_argument("reduction")
    p.add_argument("--trials", type=int, default=3)
    p.add_argument("--input", default=None, help="poly:c0;c1;... (entries comma-separated per input)")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CheckFailed as exc:
        print(f"descred: check failed: {exc}", file=sys.stderr)
        return 7
    except DescredError as exc:
        print(f"descred: error: {exc}", file=sys.stderr)
        for cls, code in EXIT_CODES:
            if isinstance(exc, cls):
                return code
        if isinstance(exc, DimensionError) and args.command != "check":
            return 2
        return 1
    except ValueError as exc:
        print(f"descred: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
