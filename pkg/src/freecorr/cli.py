"""Command-line interface: every computation as a reproducible report.

Exit codes: 0 pass, 1 computation error, 2 invariant or acceptance
failure, 64 usage error.
"""

import argparse
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, info, maxcorr, nc_lattice, plotting, projections, rmt, transforms
from .algebra import parse_polynomial
from .errors import FreeCorrError
from .linalg import fmt_scalar, parse_scalar
from .moments import (
    CumulantSequence,
    FreeFamily,
    MomentSequence,
    cumulants_to_moments,
    moments_to_cumulants,
)
from .report import SCHEMA_VERSION, VerificationReport, csv_text, dumps, table_text

EXIT_OK, EXIT_ERROR, EXIT_FAIL, EXIT_USAGE = 0, 1, 2, 64
PRESENTATION = ("out", "figure", "no_figure", "format", "config", "func", "threads")


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


class Outcome:
    """What a command hands back to the driver."""

    def __init__(self, result, header, rows, passed=True, tolerances=None, figure=None):
        self.result = result
        self.header = header
        self.rows = rows
        self.passed = passed
        self.tolerances = tolerances or {}
        self.figure = figure


# ------------------------------------------------------------------ inputs


def _measure(args):
    name = args.dist
    if name.endswith(".json"):
        with open(name) as fh:
            mu = transforms.measure_from_json(json.load(fh))
    elif name == "atomic":
        if not args.atoms:
            raise FreeCorrError("--dist atomic needs --atoms FILE")
        mu = transforms.Atomic(_read_atoms(args.atoms))
    else:
        params = {}
        if args.mean is not None:
            params["mean"] = parse_scalar(args.mean)
        if args.var is not None:
            params["var"] = parse_scalar(args.var)
        if args.a is not None:
            params["a"] = parse_scalar(args.a)
        if args.b is not None:
            params["b"] = parse_scalar(args.b)
        mu = transforms.named_measure(name, **params)
    smooth = parse_scalar(args.smooth) if args.smooth else 0
    if smooth:
        mu = transforms.Convolved(mu, 1, smooth)
    return mu


def _read_atoms(path):
    text = Path(path).read_text()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError:
        rows = [line.split(",") for line in text.splitlines() if line.strip() and not line.startswith("#")]
        return tuple((parse_scalar(a.strip()), parse_scalar(w.strip())) for a, w in rows)
    if isinstance(obj, dict):
        obj = obj.get("params", obj).get("atoms")
    return tuple((parse_scalar(a), parse_scalar(w)) for a, w in obj)


def _seq(text):
    return [parse_scalar(v.strip()) for v in text.split(",") if v.strip()]


def _labels(text):
    return [int(v) for v in text.split(",") if v.strip()]


def _cumulants(args, order):
    if getattr(args, "cumulants", None):
        k = CumulantSequence(_seq(args.cumulants))
    elif getattr(args, "moments", None):
        k = moments_to_cumulants(MomentSequence(_seq(args.moments)))
    else:
        k = _measure(args).cumulants(order)
    return k.to_float() if args.mode == "float" else k


def _cell(v):
    if isinstance(v, Fraction):
        return fmt_scalar(v)
    return v


# ------------------------------------------------------------------ commands


def cmd_cumulants(args):
    if args.moments:
        m = MomentSequence(_seq(args.moments))
    else:
        m = _measure(args).moments(args.order)
    if args.mode == "float":
        m = m.to_float()
    k = moments_to_cumulants(m, method=args.method)
    rows = [(r, _cell(m[r]), _cell(k[r])) for r in range(1, m.order + 1)]
    return Outcome({"moments": m, "cumulants": k}, ["r", "moment", "cumulant"], rows)


def cmd_moments(args):
    k = _cumulants(args, args.order)
    m = cumulants_to_moments(k, method=args.method)
    rows = [(r, _cell(k[r]), _cell(m[r])) for r in range(1, k.order + 1)]
    return Outcome({"cumulants": k, "moments": m}, ["r", "cumulant", "moment"], rows)


def cmd_convolve(args):
    mu = _measure(args)
    k = mu.cumulants(args.order)
    if args.mode == "float":
        k = k.to_float()
    if args.with_dist:
        other = transforms.named_measure(args.with_dist).cumulants(args.order)
        k = k + (other.to_float() if args.mode == "float" else other)
    k = k.scale(args.power)
    m = cumulants_to_moments(k)
    rows = [(r, _cell(k[r]), _cell(m[r])) for r in range(1, k.order + 1)]
    result = {"base": mu.to_json(), "with": args.with_dist, "power": args.power, "cumulants": k, "moments": m}
    return Outcome(result, ["r", "cumulant", "moment"], rows)


def cmd_density(args):
    mu = _measure(args)
    eps = tuple(float(e) for e in _seq(args.eps)) if args.eps else transforms.DEFAULT_EPS
    if args.method == "subordination":
        grid = transforms.density_on_grid(mu, points=args.points)
    else:
        k = mu.cumulants(args.order)
        grid = transforms.density_from_cumulants(k, eps_sequence=eps, method=args.method)
    # recovered moments against the exact ones, first min(8, N)
    nm = min(8, args.order)
    exact = mu.moments(nm)
    rec = grid.moments(nm)
    rel = []
    for r in range(1, nm + 1):
        e, g = float(exact[r]), float(rec[r])
        rel.append(abs(g - e) / max(abs(e), 1.0))
    tol = 2e-3
    ok_sign, far = transforms.cauchy_sanity(mu) if not isinstance(mu, transforms.GridDensity) else (True, 0.0)
    result = {
        "measure": mu.to_json(),
        "meta": grid.meta,
        "mass_before_renormalization": 1.0 + grid.meta.get("renormalization_delta", 0.0),
        "moment_relative_deviation": rel,
        "cauchy_im_negative": ok_sign,
        "t": grid.t,
        "rho": grid.values,
    }

    def fig(path):
        ref = getattr(mu, "density", None)
        return plotting.density_figure(grid, path, title=f"density of {mu.describe()}", reference=ref)

    rows = list(zip(grid.t.tolist(), grid.values.tolist()))
    passed = max(rel) <= tol and ok_sign
    return Outcome(result, ["t", "rho"], rows, passed, {"moment_relative": tol, "mass": transforms.MASS_TOL}, fig)


def _family(args, n):
    k = _measure(args).cumulants(2 * args.degree + 2)
    if args.mode == "float":
        k = k.to_float()
    return FreeFamily.iid(k, n)


def cmd_project(args):
    z = parse_polynomial(args.poly)
    n = args.letters or max((x for x in z.letters() if isinstance(x, int)), default=1)
    fam = _family(args, n)
    if args.mode == "float":
        z = z.to_float()
    subset = frozenset(_labels(args.subset))
    res = projections.conditional_expectation(z, subset, fam, args.degree)
    rows = [(" ".join(map(str, w)) or "1", _cell(c)) for w, c in res.projection.items()]
    return Outcome({"z": z, **res.to_json()}, ["word", "coefficient"], rows)


def cmd_efron_stein(args):
    z = parse_polynomial(args.poly)
    n = args.letters or max((x for x in z.letters() if isinstance(x, int)), default=1)
    fam = _family(args, n)
    if args.mode == "float":
        z = z.to_float()
    cache = {}
    full = frozenset(range(1, n + 1))
    comps = []
    rows = []
    for J in projections._subsets(full):
        comp = projections.efron_stein_component(z, J, fam, args.degree, cache).component
        comps.append({"subset": sorted(J), "component": comp})
        for w, c in comp.items():
            rows.append((",".join(map(str, sorted(J))) or "{}", " ".join(map(str, w)) or "1", _cell(c)))
    checks = [projections.verify_decomposition(z, full, fam, args.degree, cache=cache)]
    subsets = list(projections._subsets(full))
    for I in subsets:
        for J in subsets:
            if I - J:
                checks.append(projections.verify_orthogonality(z, I, J, fam, args.degree, cache=cache))
    passed = all(c.passed for c in checks)
    tol = checks[0].tolerance
    return Outcome({"z": z, "components": comps, "checks": checks}, ["subset", "word", "coefficient"], rows, passed, {"deviation": tol})


def cmd_maxcorr(args):
    k = _cumulants(args, 2 * args.degree)
    name = args.dist + (f"+sc({args.smooth})" if args.smooth else "")
    rep = maxcorr.max_correlation(args.m, args.n, args.degree, k, name, args.mode)
    sweep = None
    if args.sweep:
        sweep = maxcorr.correlation_sweep(args.m, args.n, args.degree, k, name, args.mode)
        rows = [(d, r, rep.theoretical, abs(r - rep.theoretical)) for d, r in sweep]
    else:
        rows = [(args.degree, rep.rho_max, rep.theoretical, rep.deviation)]
    result = rep.to_json()
    if sweep:
        result["sweep"] = [{"degree": d, "rho_max": r} for d, r in sweep]

    def fig(path):
        data = sweep or maxcorr.correlation_sweep(args.m, args.n, args.degree, k, name, args.mode)
        return plotting.correlation_figure(data, rep.theoretical, path, f"m={args.m}, n={args.n}, {name}")

    return Outcome(result, ["degree", "rho_max", "theoretical", "deviation"], rows, rep.passed, {"excess": maxcorr.EXCESS_TOL}, fig)


def cmd_entropy(args):
    mu = _measure(args)
    est = info.free_entropy_estimate(mu, args.points)
    var = float(mu.variance())
    chi_sc = info.CHI_SEMICIRCLE + 0.5 * math.log(var)
    result = {"measure": mu.to_json(), "chi": est.chi, "tolerance": est.tolerance, "semicircle_bound": chi_sc, "meta": est.meta}
    rows = [("direct", est.chi, est.tolerance)]
    if args.via_fisher:
        val = info.entropy_via_fisher(mu, D=args.degree)
        result["chi_via_fisher"] = val
        rows.append(("fisher-integral", val, ""))
    passed = est.chi <= chi_sc + est.tolerance + 1e-9
    return Outcome(result, ["method", "chi", "tolerance"], rows, passed, {"grid": est.tolerance})


def _xi_text(coefficients):
    """Human-readable conjugate variable, e.g. 'z' or '1/2*z - 3*z^3'."""
    terms = []
    for k, c in enumerate(coefficients):
        if c == 0:
            continue
        mono = "1" if k == 0 else ("z" if k == 1 else f"z^{k}")
        coef = str(c) if isinstance(c, Fraction) else f"{float(c):.6g}"
        if k and coef == "1":
            terms.append(mono)
        elif k and coef == "-1":
            terms.append("-" + mono)
        else:
            terms.append(coef if k == 0 else f"{coef}*{mono}")
    return " + ".join(terms).replace("+ -", "- ") or "0"


def cmd_fisher(args):
    if args.moments:
        m = MomentSequence(_seq(args.moments))
    else:
        m = _measure(args).moments(2 * args.degree + 1)
    if args.mode == "float":
        m = m.to_float()
    res = info.fisher_information(m, args.degree)
    var = float(m.variance())
    passed = res.divergent or res.atoms or res.phi * var >= 1.0 - 1e-10
    rows = [(d, float(p)) for d, p in res.history]
    result = {**res.to_json(), "xi": _xi_text(res.coefficients), "variance": var, "cramer_rao_product": res.phi * var}

    def fig(path):
        return plotting.fisher_figure(res.history, path)

    return Outcome(result, ["degree", "phi"], rows, passed, {"cramer_rao": 1e-10, "divergence_ratio": info.DIVERGENCE_RATIO}, fig)


def cmd_monotonicity(args):
    mu = _measure(args)
    rep = info.monotonicity_report(mu, args.nmax, args.degree, args.order, args.points, args.density)
    rows = [
        (r.n, r.chi, r.chi_tol, "inf" if r.phi_divergent else r.phi, r.phi_tol, int(r.phi_divergent))
        for r in rep.rows
    ]

    def fig(path):
        return plotting.monotonicity_figure(rep, path)

    return Outcome(rep, ["n", "chi", "chi_tol", "phi", "phi_tol", "phi_divergent"], rows, rep.passed, {}, fig)


def cmd_rmt_check(args):
    mu = _measure(args)
    spec = rmt.EnsembleSpec(args.N, args.T, mu, args.diagonal, args.seed, args.threads)
    rng = np.random.default_rng(args.seed)
    words = rmt.random_mixed_words(rng, args.words, args.max_len)
    fam = FreeFamily.iid(mu.cumulants(args.max_len), 2)
    checks = rmt.cross_validate(words, spec, fam)
    frac = float(np.mean([c.within(3.0) for c in checks]))
    corr = rmt.empirical_max_correlation(args.m, args.n, args.degree, spec)
    rows = [("".join(map(str, c.word)), c.mean, c.stderr, c.engine_value) for c in checks]
    passed = frac >= 0.95 and corr.deviation <= 0.02
    result = {
        "ensemble": spec,
        "words": checks,
        "fraction_within_3_stderr": frac,
        "max_correlation": {"m": args.m, "n": args.n, "degree": args.degree, "rho": corr.rho_max, "theoretical": corr.theoretical},
    }

    def fig(path):
        return plotting.rmt_figure(checks, path)

    return Outcome(result, ["word", "mean", "stderr", "engine_value"], rows, passed, {"fraction": 0.95, "rho": 0.02}, fig)


def verification_suite():
    """Fast invariant checks across the modules."""
    out = []
    dev = max(abs(len(nc_lattice.enumerate_nc(r)) - nc_lattice.catalan(r)) for r in range(1, 9))
    out.append(VerificationReport("|NC(r)| = Catalan(r)", {"r": "1..8"}, dev, 0))
    dev = max(abs(sum(w for _, w, _ in nc_lattice.moebius_profile(r)) - (1 if r == 1 else 0)) for r in range(1, 8))
    out.append(VerificationReport("Moebius row sums", {"r": "1..7"}, float(dev), 0))
    rng = np.random.default_rng(0)
    worst = 0
    for _ in range(10):
        m = MomentSequence([Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 6))) for _ in range(8)])
        worst = max(worst, float(max(abs(a - b) for a, b in zip(cumulants_to_moments(moments_to_cumulants(m)).values, m.values))))
    out.append(VerificationReport("moment-cumulant round trip", {"N": 8, "samples": 10}, worst, 0))
    bb = transforms.free_power(transforms.bernoulli(), 2, 10)
    dev = max(abs(bb[2 * k] - math.comb(2 * k, k)) for k in range(1, 6))
    out.append(VerificationReport("Bernoulli boxplus Bernoulli even moments", {"k": "1..5"}, float(dev), 0))
    for name, kappa in (("semicircular", transforms.Semicircular().cumulants(8)), ("bernoulli", transforms.bernoulli().cumulants(8))):
        worst = 0.0
        for n in range(2, 5):
            for m in range(1, n):
                rep = maxcorr.max_correlation(m, n, 3, kappa, name)
                worst = max(worst, rep.deviation)
        out.append(VerificationReport("maximal correlation sqrt(m/n)", {"distribution": name, "n": "2..4", "D": 3}, worst, 1e-6))
    fam = FreeFamily.iid(transforms.bernoulli().cumulants(8), 3)
    z = parse_polynomial("x1*x2*x1 + 1/2*x2*x3 - x3^2 + 2")
    out.append(projections.verify_decomposition(z, {1, 2, 3}, fam))
    out.append(projections.verify_orthogonality(z, {1, 2}, {2, 3}, fam))
    out.append(projections.verify_commuting(z, {1, 2}, {2, 3}, fam))
    out.append(projections.verify_sum_projection([0, 1, 1, 1], 2, 3, fam, 3))
    chi = info.free_entropy(transforms.Semicircular())
    out.append(VerificationReport("chi(semicircle)", {"points": 4000}, abs(chi - info.CHI_SEMICIRCLE), 1e-4))
    fr = info.fisher_information(transforms.Semicircular(0, 2).moments(12), 6)
    out.append(VerificationReport("Phi(SC(0,2)) = 1/2", {"D": 6}, abs(fr.phi - 0.5), 1e-10))
    return out


def cmd_verify(args):
    checks = verification_suite()
    rows = [(c.claim, c.deviation, c.tolerance, "pass" if c.passed else "FAIL") for c in checks]
    return Outcome({"checks": checks}, ["claim", "deviation", "tolerance", "status"], rows, all(c.passed for c in checks))


# ------------------------------------------------------------------ parser


def _common(p, dist="bernoulli"):
    g = p.add_argument_group("distribution")
    g.add_argument("--dist", default=dist, help="semicircular | bernoulli | uniform | atomic | FILE.json")
    g.add_argument("--mean", help="semicircular mean")
    g.add_argument("--var", help="semicircular variance")
    g.add_argument("--a", help="uniform left end")
    g.add_argument("--b", help="uniform right end")
    g.add_argument("--atoms", help="file with location,weight pairs (JSON or CSV)")
    g.add_argument("--smooth", help="free convolution with SC(0, t)")
    o = p.add_argument_group("output")
    o.add_argument("--mode", choices=("exact", "float"), default="exact")
    o.add_argument("--format", choices=("json", "csv", "table"), default="json")
    o.add_argument("--out", help="write the report here instead of stdout")
    o.add_argument("--figure", help="render a figure to this path (png, pdf, svg); default: next to --out")
    o.add_argument("--no-figure", action="store_true", help="skip the figure even when --out is given")
    o.add_argument("--config", help="key=value file supplying defaults")
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--threads", type=int, default=1)


def build_parser():
    parser = Parser(prog="freecorr", description="Free probability toolkit: correlations, projections, entropy.")
    parser.add_argument("--version", action="version", version=f"freecorr {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=Parser)
    sub.required = True

    p = sub.add_parser("cumulants", help="free cumulants from moments")
    _common(p)
    p.add_argument("--moments", help="comma-separated m_1,...,m_N")
    p.add_argument("--order", type=int, default=8)
    p.add_argument("--method", choices=("recursive", "lattice"), default="recursive")
    p.set_defaults(func=cmd_cumulants)

    p = sub.add_parser("moments", help="moments from free cumulants")
    _common(p)
    p.add_argument("--cumulants", help="comma-separated kappa_1,...,kappa_N")
    p.add_argument("--order", type=int, default=8)
    p.add_argument("--method", choices=("recursive", "lattice"), default="recursive")
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("convolve", help="free convolution powers")
    _common(p)
    p.add_argument("--power", type=int, default=2)
    p.add_argument("--with", dest="with_dist", help="second named distribution")
    p.add_argument("--order", type=int, default=10)
    p.set_defaults(func=cmd_convolve)

    p = sub.add_parser("density", help="density by Stieltjes inversion")
    _common(p)
    p.add_argument("--order", type=int, default=16)
    p.add_argument("--method", choices=("jacobi", "rseries", "subordination"), default="jacobi")
    p.add_argument("--eps", help="comma-separated epsilon sequence")
    p.add_argument("--points", type=int, default=4000)
    p.set_defaults(func=cmd_density)

    for name, func, hlp in (
        ("project", cmd_project, "conditional expectation onto letters"),
        ("efron-stein", cmd_efron_stein, "Efron-Stein components and checks"),
    ):
        p = sub.add_parser(name, help=hlp)
        _common(p)
        p.add_argument("--poly", required=True, help="e.g. 'x1*x2*x1 - 1/2*x3 + 2'")
        p.add_argument("--letters", type=int, help="number of free letters (default: largest label)")
        p.add_argument("--degree", type=int, default=3)
        if name == "project":
            p.add_argument("--subset", required=True, help="comma-separated labels")
        p.set_defaults(func=func)

    p = sub.add_parser("maxcorr", help="maximal correlation of partial sums")
    _common(p)
    p.add_argument("--cumulants", help="comma-separated kappa_1,...")
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--degree", type=int, default=3)
    p.add_argument("--sweep", action="store_true", help="report every degree up to --degree")
    p.set_defaults(func=cmd_maxcorr)

    p = sub.add_parser("entropy", help="free entropy")
    _common(p, "semicircular")
    p.add_argument("--points", type=int, default=4000)
    p.add_argument("--via-fisher", action="store_true")
    p.add_argument("--degree", type=int, default=12)
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("fisher", help="free Fisher information")
    _common(p, "semicircular")
    p.add_argument("--moments", help="comma-separated m_1,...")
    p.add_argument("--degree", type=int, default=8)
    p.set_defaults(func=cmd_fisher)

    p = sub.add_parser("monotonicity", help="entropy and Fisher information along the free CLT")
    _common(p)
    p.add_argument("--nmax", type=int, default=6)
    p.add_argument("--degree", type=int, default=8)
    p.add_argument("--order", type=int, default=16)
    p.add_argument("--points", type=int, default=4000)
    p.add_argument("--density", choices=("cumulants", "subordination"), default="cumulants")
    p.set_defaults(func=cmd_monotonicity)

    p = sub.add_parser("rmt-check", help="random-matrix cross-validation")
    _common(p)
    p.add_argument("--N", type=int, default=1024)
    p.add_argument("--T", type=int, default=20)
    p.add_argument("--words", type=int, default=40)
    p.add_argument("--max-len", type=int, default=6)
    p.add_argument("--diagonal", choices=("quantile", "iid"), default="quantile")
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--degree", type=int, default=2)
    p.set_defaults(func=cmd_rmt_check)

    p = sub.add_parser("verify", help="run the invariant suite")
    _common(p)
    p.set_defaults(func=cmd_verify)
    return parser


def _read_config(path):
    out = {}
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line without '=': {line!r}")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.replace("-", "_")] = v
    return out


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            cfg = _read_config(args.config)
        except (OSError, UsageError) as exc:
            parser.error(str(exc))
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest: a for a in sub._actions}
        for k in cfg:
            if k not in known:
                sub.error(f"unknown config key {k!r}")
        defaults = {}
        for k, v in cfg.items():
            act = known[k]
            if act.type is not None:
                v = act.type(v)
            elif act.const is True:
                v = v.lower() in ("1", "true", "yes")
            defaults[k] = v
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def _config(args):
    return {k: v for k, v in vars(args).items() if k not in PRESENTATION}


def render(outcome, args):
    if args.format == "json":
        doc = {
            "schema_version": SCHEMA_VERSION,
            "library": {"name": "freecorr", "version": __version__},
            "command": args.command,
            "config": _config(args),
            "tolerances": outcome.tolerances,
            "pass": bool(outcome.passed),
            "result": outcome.result,
        }
        return dumps(doc)
    rows = [[_cell(c) for c in r] for r in outcome.rows]
    if args.format == "csv":
        return csv_text(outcome.header, rows)
    return table_text(outcome.header, rows) + f"\npass: {bool(outcome.passed)}\n"


def run(argv=None):
    """Entry point returning the exit code."""
    try:
        args = parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        outcome = args.func(args)
    except (FreeCorrError, ValueError, ArithmeticError, OSError) as exc:
        sys.stderr.write(dumps({"error": type(exc).__name__, "message": str(exc), "command": args.command}))
        return EXIT_ERROR
    text = render(outcome, args)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    figure = args.figure
    if figure is None and args.out and not args.no_figure:
        figure = str(Path(args.out).with_suffix(".png"))
    if figure and outcome.figure is not None:
        outcome.figure(figure)
    return EXIT_OK if outcome.passed else EXIT_FAIL


def main():
    try:
        code = run(sys.argv[1:])
    except BrokenPipeError:
        code = EXIT_OK
    sys.exit(code)


if __name__ == "__main__":
    main()
