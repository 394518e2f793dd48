"""Command-line front end.

Exit codes: 0 success, 1 precondition or convergence failure, 2 verification
failure, 64 malformed input.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import io
from .constants import FracParams, VARIANTS
from .errors import FracError, SpecError
from .fracsolver import build_grid, parse_nonlinearity, solve_semilinear, solve_torsion
from .geometry.domains import parse_domain

EXIT_OK, EXIT_PRECONDITION, EXIT_VERIFY, EXIT_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


@dataclass
class RunConfig:
    command: str
    domain: Optional[str] = None
    s: float = 0.5
    t: float = 0.3
    h: float = 1 / 32
    m: int = 128
    variant: str = "T13"
    f: Optional[str] = None
    out: Optional[str] = None
    svg: Optional[str] = None
    extra: Dict[str, object] = field(default_factory=dict)

    def validate(self) -> None:
        if not 0 < self.s < 1:
            raise SpecError(f"s must lie in (0,1), got {self.s}")
        for k in ("t", "h"):
            v = getattr(self, k)
            if not (v > 0 and math.isfinite(v)):
                raise SpecError(f"{k} must be positive, got {v}")
        if self.m < 16:
            raise SpecError(f"m must be at least 16, got {self.m}")
        if self.variant not in VARIANTS:
            raise SpecError(f"variant must be one of {', '.join(VARIANTS)}")


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def _direction(text: str) -> List[float]:
    try:
        v = [float(q) for q in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed direction {text!r}") from None
    if not v or not all(map(math.isfinite, v)) or not any(v):
        raise argparse.ArgumentTypeError(f"malformed direction {text!r}")
    return v


def _common(sp, *, t=False, m=False, variant=False, f=False, h=True):
    sp.add_argument("--config", help="file of key=value lines overriding defaults")
    sp.add_argument("--domain", help="domain spec, e.g. disk:R=1 or ellipse:a=1.2,b=1")
    sp.add_argument("--s", type=float, default=0.5, help="fractional order in (0,1)")
    if h:
        sp.add_argument("--h", type=_positive_float, default=1 / 32, help="grid spacing")
    if t:
        sp.add_argument("--t", type=_positive_float, default=0.3, help="parallel-surface offset")
    if m:
        sp.add_argument("--m", type=int, default=128, help="trace samples on the parallel surface")
    if variant:
        sp.add_argument("--variant", choices=VARIANTS, default="T13")
    if f:
        sp.add_argument("--f", help="nonlinearity, e.g. affine:a=1,b=0.1")
    sp.add_argument("--out", help="output path")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="fracoverdet", description="Fractional overdetermined problems: solver and verifier.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("solve", help="torsion or semilinear solve; field CSV and SVG")
    _common(sp, f=True)
    sp.add_argument("--svg", help="SVG path (default: next to the CSV)")

    sp = sub.add_parser("neumann", help="nonlocal Neumann trace on the parallel surface")
    _common(sp, t=True, m=True)
    sp.add_argument("--json", help="seminorm JSON path")
    sp.add_argument("--svg", help="SVG path")

    sp = sub.add_parser("movingplane", help="critical values and classification per direction")
    _common(sp, t=True, h=False)
    sp.add_argument("--omega", type=_direction, action="append", help="direction x,y (repeatable)")
    sp.add_argument("--directions", type=int, default=16, help="size of the direction fan")

    sp = sub.add_parser("verify", help="stability theorem report")
    _common(sp, t=True, m=True, variant=True, f=True)
    sp.add_argument("--directions", type=int, default=16, help="size of the direction fan")

    sp = sub.add_parser("steiner", help="Steiner coefficient and half-tube bound table")
    _common(sp, h=False)
    sp.add_argument("--gammas", type=lambda q: [_positive_float(x) for x in q.split(",")],
                    help="comma-separated tube widths")

    sp = sub.add_parser("corpus", help="run the acceptance criteria")
    sp.add_argument("--config", help="file of key=value lines overriding defaults")
    sp.add_argument("--only", type=lambda q: [int(x) for x in q.split(",")], help="criterion numbers")
    sp.add_argument("--out", help="JSON summary path")
    return ap


def read_config(path: str) -> Dict[str, str]:
    vals = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SpecError(f"cannot read config {path!r}: {exc.strerror}") from None
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, val = line.partition("=")
        key = key.strip().lstrip("-").replace("-", "_")
        if not eq or not key:
            raise SpecError(f"{path}:{no}: expected key=value")
        vals[key] = val.strip()
    return vals


def _apply_config(ap: argparse.ArgumentParser, argv: Sequence[str]) -> argparse.Namespace:
    """Parse argv; config values replace defaults, explicit flags win."""
    ns = ap.parse_args(argv)
    if not getattr(ns, "config", None):
        return ns
    sub = next(a for a in ap._actions if isinstance(a, argparse._SubParsersAction)).choices[ns.command]
    actions = {a.dest: a for a in sub._actions if a.dest not in ("help", "config")}
    conf = read_config(ns.config)
    defaults = {}
    for key, text in conf.items():
        if key not in actions:
            raise SpecError(f"unknown config key {key!r} for {ns.command}")
        act = actions[key]
        try:
            defaults[key] = act.type(text) if act.type else text
        except (argparse.ArgumentTypeError, ValueError) as exc:
            raise SpecError(f"bad value for {key!r}: {exc}") from None
        if act.choices is not None and defaults[key] not in act.choices:
            raise SpecError(f"{key} must be one of {', '.join(map(str, act.choices))}")
    sub.set_defaults(**defaults)
    return ap.parse_args(argv)


def _config(ns) -> RunConfig:
    known = {k: getattr(ns, k) for k in ("domain", "s", "t", "h", "m", "variant", "f", "out", "svg")
             if hasattr(ns, k)}
    cfg = RunConfig(ns.command, **known)
    cfg.validate()
    if ns.command != "corpus" and not cfg.domain:
        raise SpecError("--domain is required")
    return cfg


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        io.write_text(out, text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------


def cmd_solve(ns, cfg: RunConfig) -> int:
    d = parse_domain(cfg.domain)
    p = FracParams(d.n, cfg.s)
    g = build_grid(d, cfg.h)
    if cfg.f:
        u = solve_semilinear(d, g, p, parse_nonlinearity(cfg.f))
    else:
        u = solve_torsion(d, g, p)
    out = cfg.out or "u.csv"
    io.write_field_csv(out, u)
    io.write_text(cfg.svg or str(Path(out).with_suffix(".svg")), io.field_svg(u))
    print(f"{g.node_count} nodes, max u = {io.fmt(u.values.max())}")
    return EXIT_OK


def cmd_neumann(ns, cfg: RunConfig) -> int:
    from .neumann import neumann_trace

    d = parse_domain(cfg.domain)
    p = FracParams(d.n, cfg.s)
    u = solve_torsion(d, build_grid(d, cfg.h), p)
    tr = neumann_trace(u, d, p, cfg.t, cfg.m)
    out = cfg.out or "trace.csv"
    io.write_trace_csv(out, tr)
    summary = {
        "domain": d.spec, "s": cfg.s, "t": cfg.t, "h": cfg.h, "m": cfg.m,
        "sampled_seminorm": tr.seminorm, "pair": list(tr.pair), "mean": tr.mean,
    }
    io.write_json(ns.json or str(Path(out).with_suffix(".json")), summary)
    if ns.svg:
        io.write_text(ns.svg, io.trace_svg(d, tr))
    print(f"sampled seminorm {io.fmt(tr.seminorm)}")
    return EXIT_OK


def cmd_movingplane(ns, cfg: RunConfig) -> int:
    from .movingplane import analyze_direction, direction_fan

    d = parse_domain(cfg.domain)
    if d.n == 1:
        dirs = [[1.0], [-1.0]]
    elif ns.omega:
        dirs = ns.omega
    else:
        dirs = direction_fan(ns.directions).tolist()
    for w in dirs:
        if len(w) != d.n:
            raise SpecError(f"direction {w} does not match dimension {d.n}")
    res = [analyze_direction(d, cfg.t, np.array(w)).to_dict() for w in dirs]
    _emit(io.dumps(res), cfg.out)
    return EXIT_OK


def cmd_verify(ns, cfg: RunConfig) -> int:
    from .stability import verify_theorem

    d = parse_domain(cfg.domain)
    p = FracParams(d.n, cfg.s)
    f = parse_nonlinearity(cfg.f) if cfg.f else None
    rep = verify_theorem(d, p, cfg.t, cfg.h, cfg.m, cfg.variant, f=f, n_dirs=ns.directions)
    _emit(io.dumps(rep.to_dict()), cfg.out)
    return EXIT_OK if rep.ok else EXIT_VERIFY


def cmd_steiner(ns, cfg: RunConfig) -> int:
    from .geometry.measures import steiner_fit
    from .stability import tube_checks

    d = parse_domain(cfg.domain)
    fit = steiner_fit(d)
    rows = tube_checks(d, ns.gammas)
    doc = {
        "domain": d.spec, "phi": fit.phi, "fit_residual": fit.residual, "fit_error": fit.error,
        "tube": [
            dict(asdict(r), ok_convex=r.ok_convex, ok_reach=r.ok_reach, ok_reach_perimeter=r.ok_reach_perimeter)
            for r in rows
        ],
    }
    _emit(io.dumps(doc), cfg.out)
    return EXIT_OK


def cmd_corpus(ns, cfg: RunConfig) -> int:
    from .acceptance import CRITERIA, run_all

    nums = ns.only or sorted(CRITERIA)
    bad = [k for k in nums if k not in CRITERIA]
    if bad:
        raise SpecError(f"unknown criteria {bad}")
    results = []
    for c in run_all(nums):
        print("\n".join(c.lines()), flush=True)
        results.append({"number": c.number, "title": c.title, "passed": c.passed,
                        "checks": [{"label": lab, "ok": ok} for lab, ok in c.checks]})
    if ns.out:
        io.write_json(ns.out, results)
    return EXIT_OK if all(r["passed"] for r in results) else EXIT_VERIFY


COMMANDS = {
    "solve": cmd_solve, "neumann": cmd_neumann, "movingplane": cmd_movingplane,
    "verify": cmd_verify, "steiner": cmd_steiner, "corpus": cmd_corpus,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        ns = _apply_config(ap, argv)
        cfg = _config(ns)
        return COMMANDS[ns.command](ns, cfg)
    except UsageError as exc:
        print(f"fracoverdet: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SpecError as exc:
        ap.print_usage(sys.stderr)
        print(f"fracoverdet: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FracError as exc:
        print(f"fracoverdet: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except SystemExit as exc:  # --help
        return int(exc.code or 0)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
