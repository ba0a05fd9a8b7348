"""Command-line front end.

Exit codes: 0 success, 1 inequality violation, 2 usage error, 3 a numerical
contract (convergence, quadrature, commensurability) could not be certified.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Dict, List, Optional, Sequence

from . import ap_poly, charge_core as cc, density_charge as dc, fefferman_model as fm, tm_spaces as tm
from .errors import ApChargeError, NumericalError, UnknownFormat
from .inequalities import INEQUALITIES, CampaignConfig, InequalityReport, records_csv, run_campaign
from .lorentz import LorentzParams, seq_lorentz_norm

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3
FORMATS = ("json", "csv", "text")


class UsageError(Exception):
    pass


def _exponent(text: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "infinity", "oo"):
        return math.inf
    try:
        v = float(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not v > 0:
        raise argparse.ArgumentTypeError(f"exponent must be positive, got {text!r}")
    return v


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="apcharge", description="Charges, Lorentz norms and inequality checks "
                                                  "for almost periodic polynomials.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    def common(p):
        p.add_argument("--format", choices=FORMATS, default=None)
        p.add_argument("--output", help="write to this file instead of stdout")
        return p

    p = common(sub.add_parser("coeffs", help="Fourier coefficients of a polynomial"))
    p.add_argument("--poly", required=True, help="re,im@freq;...")
    p.add_argument("--eta", type=float, action="append", help="query this frequency (repeatable)")

    p = common(sub.add_parser("norm", help="B^q, L^{p,q}(gamma) or l^{p,q} norm"))
    p.add_argument("--space", choices=("b", "lpq", "seq"), default="b")
    p.add_argument("--poly")
    p.add_argument("--seq", help="comma-separated sequence entries (complex allowed, e.g. 1+2j)")
    p.add_argument("--p", type=_exponent)
    p.add_argument("--q", type=_exponent)
    p.add_argument("--tol", type=float, default=1e-10)

    p = common(sub.add_parser("gamma", help="density charge of a periodic interval set"))
    p.add_argument("--set", dest="set_text", required=True, help="period=q;trace=[a,b)...;plus=..;minus=..")
    p.add_argument("--op", choices=("union", "intersection", "difference", "complement"))
    p.add_argument("--with", dest="other", help="second set for a binary --op")
    p.add_argument("--shift", help="translate the result by this rational amount")
    p.add_argument("--profile", action="store_true", help="include the window-average ladder")

    for name, hlp in (("verify", "run one seeded inequality campaign"),
                      ("campaign", "run a campaign from a JSON config; flags override")):
        p = common(sub.add_parser(name, help=hlp))
        p.add_argument("--config", help="JSON file with campaign keys")
        p.add_argument("--ineq", choices=INEQUALITIES)
        p.add_argument("--q", type=_exponent)
        p.add_argument("--p", type=_exponent)
        p.add_argument("--eta", type=float)
        p.add_argument("--trials", type=_positive_int)
        p.add_argument("--seed", type=int)
        p.add_argument("--tol", type=float)
        p.add_argument("--mode", choices=("integer-lattice", "generic-real"))
        p.add_argument("--records", action="store_true", help="include per-trial records in JSON")

    p = common(sub.add_parser("embed-demo", help="charge-side vs model-side norms of the prefix indicators"))
    p.add_argument("--horizon", type=_positive_int, default=32)
    p.add_argument("--tol", type=float, default=2.0 ** -16)
    return parser


# -- rendering ----------------------------------------------------------------

def _num(x) -> str:
    if isinstance(x, complex):
        return f"{x.real:.12g}{x.imag:+.12g}j"
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def _clean(v):
    """JSON-safe copy: non-finite floats become strings, complex becomes [re, im]."""
    if isinstance(v, float) and not math.isfinite(v):
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    if isinstance(v, complex):
        return [_clean(v.real), _clean(v.imag)]
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    return v


def _json(obj) -> str:
    return json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n"


def _table(rows: Sequence[Sequence], header: Sequence[str]) -> str:
    cells = [list(header)] + [[_num(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    return "".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() + "\n" for r in cells)


def _csv(rows: Sequence[Sequence], header: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(c) if isinstance(c, float) else c for c in r])
    return buf.getvalue()


def format_report(report: InequalityReport, fmt: str, records: bool = False) -> str:
    if fmt == "json":
        obj = report.to_json()
        if not records:
            obj.pop("records", None)
        return _json(obj)
    if fmt == "csv":
        return records_csv(report.records or [])
    if fmt == "text":
        pr = report.params
        lines = [("inequality", report.name), ("p", pr.get("p")), ("q", pr.get("q")),
                 ("q_prime", pr.get("q_prime")), ("trials", report.trials), ("skipped", report.skipped),
                 ("failures", report.failures), ("violations", report.violations),
                 ("max_ratio", report.max_ratio), ("mean_ratio", report.mean_ratio),
                 ("last_quartile_max", report.last_quartile_max), ("passed", report.passed)]
        if report.spot_check:
            lines += [("spot_lhs", report.spot_check["lhs"]), ("spot_rhs", report.spot_check["rhs"]),
                      ("spot_ratio", report.spot_check["ratio"])]
        out = _table(lines, ("field", "value"))
        out += "".join(f"# {m}\n" for m in report.failure_messages)
        return out + f"# {report.restriction}\n"
    raise UnknownFormat(f"unknown format {fmt!r}; choose from {FORMATS}")


# -- subcommands --------------------------------------------------------------
# Each returns (exit code, payload for json, rows, header, text override).

def _cmd_coeffs(args):
    P = ap_poly.parse_poly(args.poly)
    freqs = args.eta if args.eta else list(P.freqs)
    rows = []
    for eta in freqs:
        a = ap_poly.fourier_coefficient(P, eta)
        rows.append((float(eta), a.real, a.imag, abs(a)))
    header = ("freq", "re", "im", "modulus")
    payload = {"poly": P.format(), "coefficients": [dict(zip(header, r)) for r in rows]}
    return EXIT_OK, payload, rows, header, None


def _cmd_norm(args):
    if args.space == "seq":
        if args.seq is None or args.p is None:
            raise UsageError("norm --space seq needs --seq and --p")
        try:
            a = [complex(x.strip().replace(" ", "")) for x in args.seq.split(",") if x.strip()]
        except ValueError as exc:
            raise UsageError(f"bad --seq entry: {exc}")
        q = args.q if args.q is not None else math.inf
        val = seq_lorentz_norm(a, LorentzParams(args.p, q))
        payload = {"space": "seq", "p": args.p, "q": q, "value": val}
    else:
        if args.poly is None:
            raise UsageError(f"norm --space {args.space} needs --poly")
        P = ap_poly.parse_poly(args.poly)
        if args.space == "b":
            if args.q is None or math.isinf(args.q):
                raise UsageError("norm --space b needs a finite --q")
            est = ap_poly.abs_pow_mean(P, args.q, args.tol)
            val = est.value.real ** (1 / args.q)
            payload = {"space": "b", "q": args.q, "poly": P.format(), "value": val,
                       "exact": est.exact, "residual": est.residual}
        else:
            if args.p is None:
                raise UsageError("norm --space lpq needs --p")
            q = args.q if args.q is not None else math.inf
            val = ap_poly.lorentz_gamma_norm(P, LorentzParams(args.p, q))
            payload = {"space": "lpq", "p": args.p, "q": q, "poly": P.format(), "value": val}
    return EXIT_OK, payload, [(val,)], ("value",), _num(val) + "\n"


def _cmd_gamma(args):
    E = dc.parse_density_set(args.set_text)
    if args.op == "complement":
        E = dc.set_algebra(E, op="complement")
    elif args.op:
        if args.other is None:
            raise UsageError(f"gamma --op {args.op} needs --with")
        E = dc.set_algebra(E, dc.parse_density_set(args.other), args.op)
    elif args.other is not None:
        raise UsageError("--with needs --op")
    if args.shift is not None:
        E = dc.shift(E, args.shift)
    g = dc.gamma_eval(E)
    payload = {"set": E.format(), "gamma": float(g), "gamma_exact": str(g)}
    rows = [(float(g),)]
    header = ("gamma",)
    if args.profile:
        prof = dc.density_profile(E)
        payload["profile"] = [{"tau": float(t), "average": float(m)} for t, m in prof.samples]
        payload["error_bound"] = float(prof.error_bound)
        rows = [(float(t), float(m)) for t, m in prof.samples]
        header = ("tau", "average")
    text = f"{_num(float(g))}\n" if not args.profile else None
    return EXIT_OK, payload, rows, header, text


def _campaign_config(args) -> Dict:
    cfg: Dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config!r}: {exc}")
        if not isinstance(cfg, dict):
            raise UsageError("config must be a JSON object")
    flags = {"inequality": args.ineq, "q": args.q, "p": args.p, "eta": args.eta, "trials": args.trials,
             "base_seed": args.seed, "tol": args.tol, "mode": args.mode}
    for k, v in flags.items():
        if v is not None:
            cfg[k] = v
    if "inequality" not in cfg:
        raise UsageError(f"{args.command} needs --ineq (or an 'inequality' key in --config)")
    return cfg


def _cmd_campaign(args):
    cfg = CampaignConfig.from_dict(_campaign_config(args))
    report = run_campaign(cfg)
    if report.violations:
        code = EXIT_VIOLATION
    elif report.failures:
        code = EXIT_NUMERICAL
    else:
        code = EXIT_OK
    return code, report, None, None, None


def _prefix_sequence(horizon: int) -> tm.SimpleFunctionSequence:
    mu = cc.halving_charge(5)
    return tm.SimpleFunctionSequence(lambda n: cc.indicator(mu.field, cc.finite(*range(1, n + 1))), mu, horizon)


def _cmd_embed(args):
    rep = fm.verify_isometry(_prefix_sequence(args.horizon), tol=args.tol)
    rows = [(r.space, r.charge_value, r.model_value, r.discrepancy, r.residual) for r in rep.rows]
    header = ("space", "charge_norm", "model_norm", "discrepancy", "residual")
    payload = {"sequence": "indicators of {1..n} under mu({n}) = 2^-n, mu(N) = 5",
               "horizon": args.horizon, **rep.to_json()}
    payload["rows"] = [dict(zip(header, r)) for r in rows]
    return (EXIT_OK if rep.passed else EXIT_NUMERICAL), payload, rows, header, None


COMMANDS = {"coeffs": _cmd_coeffs, "norm": _cmd_norm, "gamma": _cmd_gamma, "verify": _cmd_campaign,
            "campaign": _cmd_campaign, "embed-demo": _cmd_embed}
DEFAULT_FORMAT = {"coeffs": "text", "norm": "text", "gamma": "text", "verify": "json",
                  "campaign": "json", "embed-demo": "json"}


def _render(args, code, payload, rows, header, text) -> str:
    fmt = args.format or DEFAULT_FORMAT[args.command]
    if isinstance(payload, InequalityReport):
        return format_report(payload, fmt, records=getattr(args, "records", False))
    if fmt == "json":
        return _json(payload)
    if fmt == "csv":
        return _csv(rows, header)
    return text if text is not None else _table(rows, header)


def run_command(argv: Optional[List[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        code, *rest = COMMANDS[args.command](args)
        out = _render(args, code, *rest)
    except UsageError as exc:
        msg = str(exc)
        if not msg.startswith("usage:"):
            msg = f"{parser.format_usage()}apcharge: error: {msg}"
        stderr.write(msg + "\n")
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    except NumericalError as exc:
        stderr.write(f"apcharge: {type(exc).__name__}: {exc}\n")
        return EXIT_NUMERICAL
    except (ApChargeError, ValueError) as exc:
        stderr.write(f"{parser.format_usage()}apcharge: error: {exc}\n")
        return EXIT_USAGE
    if args.output:
        try:
            with open(args.output, "w") as fh:
                fh.write(out)
        except OSError as exc:
            stderr.write(f"apcharge: cannot write {args.output!r}: {exc}\n")
            return EXIT_USAGE
    else:
        stdout.write(out)
    return code


def main(argv: Optional[List[str]] = None) -> int:
    sys.exit(run_command(argv))
