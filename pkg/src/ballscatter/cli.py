"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 precondition violation, 3 failed
certificate.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field

from . import certify, fields, modal, norms, resonance
from .errors import BallScatterError, DivergentSeriesError, PreconditionError
from .fields import IncidentField
from .modal import ScatteringConfig

EXIT_OK, EXIT_USAGE, EXIT_PRECONDITION, EXIT_CERT = 0, 1, 2, 3

SUITES = ("small_freq", "quadratic", "farfield", "lemma71", "hankel", "lowcontrast", "blowup", "broadband")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

_CONFIG_KEYS = {
    "lambda", "omega_eps", "eps", "q", "q0", "omega", "incident", "sigma", "r_over_eps", "n_max", "format", "out", "tol",
}


@dataclass
class RunConfig:
    """Validated inputs of one CLI invocation."""

    subcommand: str
    scattering: ScatteringConfig | None
    incident: IncidentField
    fmt: str = "json"
    out: str | None = None
    sigma: float = 0.0
    r_over_eps: float = 1.0
    n_max: int | None = None
    tol: float = certify.TOL_REL
    reduction: dict | None = None
    options: dict = field(default_factory=dict)

    def meta(self) -> dict:
        doc = {"subcommand": self.subcommand}
        if self.scattering is not None:
            doc.update({"lambda": self.scattering.lam, "omega_eps": self.scattering.omega_eps, "eps": self.scattering.eps})
        if self.reduction is not None:
            doc["reduction"] = self.reduction
        return doc


def _fmt(x: float) -> str:
    return format(x, ".17g")


def _load_incident(src: str | None) -> IncidentField:
    if src is None:
        return certify.plane_wave()
    text = src.strip()
    if not text.startswith("{"):
        with open(text, encoding="utf-8") as fh:
            text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"incident field is not valid JSON: {exc}") from exc
    return IncidentField.from_json(doc)


def _merge_config_file(args):
    if not getattr(args, "config", None):
        return
    with open(args.config, encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise UsageError("configuration file must hold a JSON object")
    extra = set(doc) - _CONFIG_KEYS
    if extra:
        raise UsageError(f"unknown configuration keys: {sorted(extra)}")
    for key, val in doc.items():
        attr = "lam" if key == "lambda" else key
        if key == "incident" and not isinstance(val, str):
            val = json.dumps(val)
        if getattr(args, attr, None) is None:
            setattr(args, attr, val)


def _scattering(args, required: bool = True):
    phys = [args.q, args.q0, args.omega]
    if any(v is not None for v in phys):
        if any(v is None for v in phys) or args.lam is not None or args.omega_eps is not None:
            raise UsageError("give either --q, --q0 and --omega (with --eps) or --lambda and --omega-eps")
        eps = 1.0 if args.eps is None else args.eps
        cfg = ScatteringConfig.from_physical(args.q, args.q0, args.omega, eps)
        red = {"q": args.q, "q0": args.q0, "omega": args.omega, "eps": eps, "lambda": cfg.lam, "omega_eps": cfg.omega_eps}
        return cfg, red
    if args.lam is None or args.omega_eps is None:
        if required:
            raise UsageError("--lambda and --omega-eps are required")
        return None, None
    return ScatteringConfig(float(args.lam), float(args.omega_eps), 1.0 if args.eps is None else float(args.eps)), None


_DEFAULT_FORMAT = {"coeffs": "csv", "field": "csv"}


def build_config(args, need_scattering: bool = True) -> RunConfig:
    _merge_config_file(args)
    cfg, red = _scattering(args, need_scattering)
    return RunConfig(
        subcommand=args.command,
        scattering=cfg,
        incident=_load_incident(args.incident),
        fmt=args.format or _DEFAULT_FORMAT.get(args.command, "json"),
        out=args.out,
        sigma=0.0 if args.sigma is None else float(args.sigma),
        r_over_eps=1.0 if args.r_over_eps is None else float(args.r_over_eps),
        n_max=args.n_max,
        tol=certify.TOL_REL if args.tol is None else float(args.tol),
        reduction=red,
    )


# ---------------------------------------------------------------------------
# emission
# ---------------------------------------------------------------------------


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _json_text(doc) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _finite(x: float):
    return x if math.isfinite(x) else ("inf" if x > 0 else "nan")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

COEFF_HEADER = ("n", "re_r", "im_r", "abs_r", "re_t", "im_t")


def cmd_coeffs(rc: RunConfig) -> int:
    n_max = 10 if rc.n_max is None else rc.n_max
    rows = []
    for n in range(n_max + 1):
        c = modal.coefficients(rc.scattering, n)
        rows.append((n, c.r.real, c.r.imag, abs(c.r), c.t.real, c.t.imag))
    if rc.fmt == "csv":
        _emit(_csv_text(COEFF_HEADER, rows), rc.out)
    else:
        doc = {"meta": rc.meta(), "rows": [dict(zip(COEFF_HEADER, r)) for r in rows]}
        _emit(_json_text(doc), rc.out)
    return EXIT_OK


FIELD_HEADER = ("kind", "R", "theta", "phi", "re", "im", "tail_bound", "n_max", "error")


def _parse_locations(spec: str | None, path: str | None) -> list[tuple[float, float, float]]:
    text = spec
    if path:
        with open(path, encoding="utf-8") as fh:
            text = ";".join(line.strip() for line in fh if line.strip() and not line.startswith("#"))
    if not text:
        raise UsageError("--at or --locations is required")
    out = []
    for item in text.split(";"):
        parts = [p for p in item.replace(" ", "").split(",") if p]
        if len(parts) != 3:
            raise UsageError(f"location {item!r} must be R,theta,phi")
        out.append(tuple(float(p) for p in parts))
    return out


def cmd_field(rc: RunConfig) -> int:
    locs = _parse_locations(rc.options.get("at"), rc.options.get("locations"))
    kinds = fields.FIELD_KINDS if rc.options.get("kind") in (None, "all") else (rc.options["kind"],)
    rows = []
    for loc in locs:
        for kind in kinds:
            try:
                s = fields.evaluate_field(kind, rc.scattering, rc.incident, loc, rc.n_max)
                rows.append((kind, *loc, s.value.real, s.value.imag, s.tail_bound, s.n_max, ""))
            except BallScatterError as exc:
                rows.append((kind, *loc, "", "", "", "", f"error: {exc}"))
    if rc.fmt == "csv":
        _emit(_csv_text(FIELD_HEADER, rows), rc.out)
    else:
        doc = {"meta": rc.meta(), "rows": [{k: (None if v == "" else v) for k, v in zip(FIELD_HEADER, r)} for r in rows]}
        for row in doc["rows"]:
            if row["error"] is None:
                row.pop("error")
        _emit(_json_text(doc), rc.out)
    return EXIT_OK


def _norm_doc(v) -> dict:
    return {"value": _finite(v.value), "lower": _finite(v.lower), "upper": _finite(v.upper), "n_terms": v.n_terms, "note": v.note}


def cmd_norms(rc: RunConfig) -> int:
    kind = rc.options.get("kind") or "scattered"
    if kind == "all":
        raise UsageError("norms needs a single --kind")
    cfg = rc.scattering
    R = rc.r_over_eps * cfg.eps
    out = {"meta": {**rc.meta(), "kind": kind, "sigma": rc.sigma, "r_over_eps": rc.r_over_eps}}
    out["h_sigma"] = _norm_doc(norms.h_sigma_norm(fields.modal_trace(kind, cfg, rc.incident, R, rc.n_max), rc.sigma))
    try:
        out["n_sigma"] = _norm_doc(norms.n_sigma_norm(kind, cfg, rc.incident, rc.sigma))
    except DivergentSeriesError as exc:
        out["n_sigma"] = {"value": "inf", "lower": _finite(max(exc.partial_sums or [0.0])), "upper": "inf",
                          "n_terms": len(exc.partial_sums or []), "note": str(exc)}
    p, q, kappa = rc.options.get("p_index"), rc.options.get("q_index"), rc.options.get("kappa")
    if p is not None:
        qv = math.inf if q in (None, "inf") else int(q)
        val = norms.n_pq_seminorm(kind, cfg, rc.incident, rc.sigma, int(p), qv, 1.0 if kappa is None else float(kappa))
        out["n_pq"] = {**_norm_doc(val), "p": int(p), "q": _finite(float(qv)), "kappa": 1.0 if kappa is None else float(kappa)}
    if rc.fmt == "csv":
        rows = [(name, d["value"], d["lower"], d["upper"], d["n_terms"]) for name, d in out.items() if name != "meta"]
        _emit(_csv_text(("norm", "value", "lower", "upper", "n_terms"), rows), rc.out)
    else:
        _emit(_json_text(out), rc.out)
    return EXIT_OK


def cmd_resonances(rc: RunConfig) -> int:
    opts = rc.options
    if opts.get("t") is not None:
        t = float(opts["t"])
    elif opts.get("n") is not None:
        t = int(opts["n"]) + 0.5
    else:
        raise UsageError("resonances needs --t or --n")
    lam = opts.get("lam")
    if lam is None:
        raise UsageError("resonances needs --lambda")
    x_max = math.inf if opts.get("x_max") is None else float(opts["x_max"])
    brackets = resonance.find_quasi_resonances(t, float(lam), x_max)
    if rc.fmt == "csv":
        rows = [(b.t, b.k, b.lo, b.hi, "" if b.root is None else b.root, "" if b.residual is None else b.residual) for b in brackets]
        _emit(_csv_text(("t", "k", "lo", "hi", "root", "residual"), rows), rc.out)
    else:
        _emit(_json_text({"brackets": [b.to_json() for b in brackets]}), rc.out)
    return EXIT_OK


def cmd_excluded_set(rc: RunConfig) -> int:
    opts = rc.options
    lam = opts.get("lam")
    if lam is None:
        raise UsageError("excluded-set needs --lambda")
    lam = float(lam)
    if opts.get("mode") is not None:
        n = int(opts["mode"])
        if opts.get("tau") is None:
            raise UsageError("--mode requires --tau")
        tau = float(opts["tau"])
        fs = resonance.bad_set(n, lam, tau)
        doc = {"intervals": fs.to_json(), "measure": fs.total_measure, "bound": resonance.bad_set_bound(n, lam, tau)}
    else:
        eps = opts.get("eps")
        if eps is None:
            raise UsageError("excluded-set needs --eps (radius) or --mode")
        alpha = 1.0 if opts.get("alpha") is None else float(opts["alpha"])
        n_max = 10 if rc.n_max is None else rc.n_max
        res = resonance.broadband_excluded_set(float(eps), lam, alpha, n_max)
        doc = {
            "intervals": res.intervals.to_json(),
            "measure": res.intervals.total_measure,
            "bound": res.measure_bound,
            "bound_constant": res.bound_constant,
            "regime": res.regime,
            "valid_below": _finite(res.valid_below),
        }
    if rc.fmt == "csv":
        _emit(_csv_text(("lo", "hi"), doc["intervals"]), rc.out)
    else:
        _emit(_json_text(doc), rc.out)
    return EXIT_OK


def _run_suite(name: str, rc: RunConfig, grid):
    tol = rc.tol
    if name == "small_freq":
        return [certify.certify_upper_small_freq(grid, tol)]
    if name == "quadratic":
        return [certify.certify_upper_quadratic(grid, tol)]
    if name == "farfield":
        return [certify.certify_upper_farfield(grid, tol)]
    if name == "lemma71":
        return [certify.certify_lemma71(grid, tol)]
    if name == "hankel":
        return [certify.certify_hankel_lemma(grid, tol)]
    if name == "lowcontrast":
        lams = grid.lambdas if grid else (0.3, 0.7)
        ratios = grid.r_over_eps if grid else (1.0, 2.0)
        return [certify.certify_lower_lowcontrast(lam, R, rc.sigma, rc.incident, tol_rel=tol)
                for lam in lams if lam < 1 for R in ratios]
    if name == "blowup":
        lams = grid.lambdas if grid else (10.0, 50.0)
        return [certify.certify_lower_blowup(lam, 1.0, (2, 4, 8), rc.sigma, rc.incident, tol) for lam in lams if lam > 1]
    if name == "broadband":
        return [certify.certify_broadband(tol_rel=tol)]
    raise UsageError(f"unknown suite {name!r}")


def cmd_certify(rc: RunConfig) -> int:
    suites = rc.options.get("suite") or ["upper"]
    names = []
    for s in suites:
        if s == "all":
            names.extend(SUITES)
        elif s == "upper":
            names.extend(("small_freq", "quadratic", "farfield"))
        else:
            names.append(s)
    grid = None
    if rc.options.get("grid"):
        with open(rc.options["grid"], encoding="utf-8") as fh:
            grid = certify.SweepGrid.from_json(json.load(fh))
    reports = []
    for name in names:
        reports.extend(_run_suite(name, rc, grid))
    ok = all(r.passed for r in reports)
    if rc.fmt == "table":
        lines = [certify.table_header()] + [r.table_row() for r in reports]
        _emit("\n".join(lines) + "\n", rc.out)
    else:
        doc = {"passed": ok, "reports": [r.to_json() for r in reports]}
        _emit(_json_text(doc), rc.out)
    return EXIT_OK if ok else EXIT_CERT


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser, formats=("csv", "json")):
    p.add_argument("--config", help="JSON file with any of the flags below")
    p.add_argument("--lambda", dest="lam", type=float, help="contrast sqrt(q/q0)")
    p.add_argument("--omega-eps", type=float, help="rescaled frequency sqrt(q0) omega eps")
    p.add_argument("--eps", type=float, help="ball radius")
    p.add_argument("--q", type=float, help="physical index inside the ball")
    p.add_argument("--q0", type=float, help="physical index outside the ball")
    p.add_argument("--omega", type=float, help="physical frequency")
    p.add_argument("--incident", help="incident field: JSON file path or inline JSON (default: plane wave along e3)")
    p.add_argument("--sigma", type=float)
    p.add_argument("--r-over-eps", type=float)
    p.add_argument("--n-max", type=int)
    p.add_argument("--format", choices=formats)
    p.add_argument("--out")
    p.add_argument("--tol", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ballscatter", description="Modal scattering by a small penetrable ball.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("coeffs", help="reflection and transmission coefficients r_n, t_n")
    _common(p)

    p = sub.add_parser("field", help="evaluate incident, scattered or transmitted fields")
    _common(p)
    p.add_argument("--kind", choices=fields.FIELD_KINDS + ("all",), default="all")
    p.add_argument("--at", help="locations 'R,theta,phi;R,theta,phi'")
    p.add_argument("--locations", help="file with one R,theta,phi per line")

    p = sub.add_parser("norms", help="H^sigma, N^sigma and N_{p,q}^sigma norms")
    _common(p)
    p.add_argument("--kind", choices=fields.FIELD_KINDS, default="scattered")
    p.add_argument("--p-index", type=int)
    p.add_argument("--q-index")
    p.add_argument("--kappa", type=float)

    p = sub.add_parser("resonances", help="quasi-resonances in the Dixon brackets")
    _common(p)
    p.add_argument("--t", type=float, help="half-integer order n + 1/2")
    p.add_argument("--n", type=int, help="mode index n (t = n + 1/2)")
    p.add_argument("--x-max", type=float)

    p = sub.add_parser("excluded-set", help="excluded frequencies for the broadband bound")
    _common(p)
    p.add_argument("--alpha", type=float)
    p.add_argument("--mode", type=int, help="build B_n(tau) for this mode instead of the broadband set")
    p.add_argument("--tau", type=float)

    p = sub.add_parser("certify", help="run certificate suites")
    _common(p, formats=("json", "table"))
    p.add_argument("--suite", action="append", choices=SUITES + ("upper", "all"))
    p.add_argument("--grid", help="JSON sweep grid")
    return parser


_COMMANDS = {
    "coeffs": (cmd_coeffs, True),
    "field": (cmd_field, True),
    "norms": (cmd_norms, True),
    "resonances": (cmd_resonances, False),
    "excluded-set": (cmd_excluded_set, False),
    "certify": (cmd_certify, False),
}

_OPTION_KEYS = ("kind", "at", "locations", "p_index", "q_index", "kappa", "t", "n", "x_max", "alpha", "mode", "tau", "suite", "grid")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    func, need = _COMMANDS[args.command]
    try:
        rc = build_config(args, need)
        rc.options = {k: getattr(args, k) for k in _OPTION_KEYS if hasattr(args, k)}
        rc.options["lam"] = args.lam
        rc.options["eps"] = args.eps
        return func(rc)
    except UsageError as exc:
        print(f"ballscatter: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PreconditionError as exc:
        clause = f" [{exc.clause}]" if getattr(exc, "clause", None) else ""
        print(f"ballscatter: precondition violated: {exc}{clause}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (BallScatterError, ValueError) as exc:
        print(f"ballscatter: precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except OSError as exc:
        print(f"ballscatter: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
