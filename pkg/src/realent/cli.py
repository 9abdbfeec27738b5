"""``realent`` command line.

Exit codes: 0 on success, 1 when a computation or file operation fails,
2 for usage errors (unknown flags, out-of-range parameters, bad config keys).
"""

from __future__ import annotations

import argparse
import io
import math
import os
import sys
from pathlib import Path

import numpy as np

from .bifurcation import BifurcationConfig, bifurcation_sweep
from .bones import DEFAULT_WINDOWS, trace_bones_many
from .entropy import METHODS, EntropyConfig, entropy
from .exceptions import RealEntError
from .preimages import DEFAULT_N_MAX, random_panel
from .qmap import ModuliPoint, NormalFormMap, ParameterPoint, moduli_fiber
from .regions import classify, family_domain, trivial_entropy
from .sweep import (
    REGION_MASKS,
    band_counts,
    band_image,
    band_interval,
    isentrope_connectivity,
    parse_bands,
    parse_domain,
    parse_resolution,
    project_to_moduli,
    read_csv,
    sweep_entropy,
    write_csv,
    write_ppm,
)


class UsageError(Exception):
    """Bad arguments discovered after argparse has accepted them."""


# period q > 0 uses entry (q - 1) mod 12 (orange is 1, yellow 2); period 0 is black
PERIOD_COLOURS = (
    (255, 140, 0), (255, 255, 0), (0, 160, 0), (0, 0, 255), (255, 0, 0), (160, 0, 255),
    (0, 200, 200), (255, 0, 160), (120, 80, 0), (0, 90, 120), (160, 160, 0), (160, 160, 160),
)


def _real(text: str) -> float:
    """Float parser that also accepts ``inf``/``-inf`` (for points at infinity)."""
    try:
        return float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc


def _finite(text: str) -> float:
    v = _real(text)
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"expected a finite number, got {text!r}")
    return v


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from exc
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _default_threads() -> int:
    raw = os.environ.get("REALENT_THREADS")
    if raw is None:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _periods(text: str) -> list[int]:
    """``2..7`` or ``2,3,5``."""
    try:
        if ".." in text:
            a, b = text.split("..")
            out = list(range(int(a), int(b) + 1))
        else:
            out = [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad period list {text!r}") from exc
    if not out:
        raise argparse.ArgumentTypeError("empty period list")
    return out


def _entropy_flags(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--method", choices=METHODS, default="auto")
    sp.add_argument("--depth", type=_positive_int, default=DEFAULT_N_MAX, help="preimage oracle depth")
    sp.add_argument("--tol", type=_finite, default=2e-3)


def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    """Global flags are accepted before or after the subcommand; only the top level holds defaults."""

    def d(value):
        return argparse.SUPPRESS if suppress else value

    p.add_argument("--out", default=d(None), help="output path (prefix for commands writing several files)")
    p.add_argument("--threads", type=_positive_int, default=d(_default_threads()))
    p.add_argument("--seed", type=int, default=d(None), help="seed for a random oracle probe panel")
    p.add_argument("--config", default=d(None), help="key=value file; flags override it")


GLOBAL_KEYS = ("out", "threads", "seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="realent", description="Entropy of real quadratic rational maps.")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def cmd(name: str, help_: str) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, help=help_)
        _global_flags(sp, suppress=True)
        return sp

    sp = cmd("eval", "evaluate the map at x")
    sp.add_argument("--mu", type=_finite, required=True)
    sp.add_argument("--t", type=_finite, required=True)
    sp.add_argument("--x", type=_real, required=True)

    sp = cmd("classify", "region, family and trivial entropy of (mu, t)")
    sp.add_argument("--mu", type=_finite, required=True)
    sp.add_argument("--t", type=_finite, required=True)

    sp = cmd("fixed-points", "fixed-point multipliers and real fixed points")
    sp.add_argument("--mu", type=_finite, required=True)
    sp.add_argument("--t", type=_finite, required=True)

    sp = cmd("fiber", "parameter points over a moduli point")
    sp.add_argument("--sigma1", type=_finite, required=True)
    sp.add_argument("--sigma2", type=_finite, required=True)

    sp = cmd("entropy", "entropy of one parameter point")
    sp.add_argument("--mu", type=_finite, required=True)
    sp.add_argument("--t", type=_finite, required=True)
    _entropy_flags(sp)

    sp = cmd("sweep", "entropy over a parameter rectangle; writes CSV and PPM")
    sp.add_argument("--domain", default="U1", help="U1, U2, U3 or rect:mu0,mu1,t0,t1")
    sp.add_argument("--res", default="300x200", help="WxH")
    sp.add_argument("--bands", default="fig6", help="fig6, fig9 or custom:v1,v2,...")
    sp.add_argument("--checkpoint", default=None)
    _entropy_flags(sp)

    sp = cmd("project", "scatter a sweep CSV into the (sigma1, sigma2) plane")
    sp.add_argument("--input", required=True)
    sp.add_argument("--bands", default="fig6")
    sp.add_argument("--clamp", type=_finite, default=10.0)

    sp = cmd("bones", "trace bones of the given periods")
    sp.add_argument("--n", type=_periods, default=[2, 3, 4, 5, 6, 7], help="e.g. 2..7 or 2,3")
    sp.add_argument("--family", choices=sorted(DEFAULT_WINDOWS), default="U2")
    sp.add_argument("--domain", default=None, help="rect:mu0,mu1,t0,t1 (defaults to the family window)")
    sp.add_argument("--res", default="400x400")
    sp.add_argument("--no-refine", action="store_true")

    sp = cmd("bifurcation", "attracting periods from both critical values")
    sp.add_argument("--domain", default="U3")
    sp.add_argument("--res", default="300x150")
    sp.add_argument("--burn-in", type=int, default=5000)
    sp.add_argument("--orbit-window", type=_positive_int, default=2000)
    sp.add_argument("--max-period", type=_positive_int, default=64)

    sp = cmd("connectivity", "connected components of a banded isentrope")
    sp.add_argument("--input", required=True)
    sp.add_argument("--bands", default="fig6")
    sp.add_argument("--band", type=int, default=None, help="band index")
    sp.add_argument("--value", type=_finite, default=None, help="use [value - delta, value + delta)")
    sp.add_argument("--delta", type=_finite, default=0.01)
    sp.add_argument("--region", choices=REGION_MASKS, default="all")
    return parser


def read_config(path: str) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment. Dashes and underscores are interchangeable in keys."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    """Parse twice: once to find ``--config`` and the subcommand, then with file values as defaults."""
    first = parser.parse_args(argv)
    if first.config is None:
        return first
    values = read_config(first.config)
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    sp = sub.choices[first.command]
    known = {a.dest: a for a in sp._actions if a.dest != "help"}
    for key, raw in values.items():
        if key in GLOBAL_KEYS:
            parser.set_defaults(**{key: raw})
            continue
        if key in ("config", "command") or key not in known:
            raise UsageError(f"unknown config key {key!r} for {first.command}")
        act = known[key]
        if isinstance(act, argparse._StoreTrueAction):
            sp.set_defaults(**{key: raw.lower() in ("1", "true", "yes", "on")})
        else:
            sp.set_defaults(**{key: raw})  # argparse applies ``type`` to string defaults
    return parser.parse_args(argv)


def _entropy_config(args: argparse.Namespace) -> EntropyConfig:
    panel = None if args.seed is None else random_panel(args.seed)
    return EntropyConfig(method=args.method, tol=args.tol, n_max=args.depth, y_panel=panel)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="ascii")


def _prefix(out: str | None, default: str) -> str:
    base = default if out is None else out
    for ext in (".csv", ".ppm"):
        if base.endswith(ext):
            return base[: -len(ext)]
    return base


def _fmt(x: float) -> str:
    return repr(float(x))


def run_eval(args) -> int:
    p = ParameterPoint(args.mu, args.t)
    print(_fmt(NormalFormMap(p)(args.x)))
    return 0


def run_classify(args) -> int:
    p = ParameterPoint(args.mu, args.t)
    lab = classify(p)
    triv = trivial_entropy(p)
    adj = "" if not lab.adjacent else " (" + "|".join(r.value for r in lab.adjacent) + ")"
    print(f"region: {lab.token}{adj}")
    print(f"family: {family_domain(p).value}")
    print(f"trivial_entropy: {'none' if triv is None else _fmt(triv)}")
    return 0


def run_fixed_points(args) -> int:
    fps = NormalFormMap(ParameterPoint(args.mu, args.t)).fixed_points()
    for m in fps.multipliers:
        print(f"multiplier: {_fmt(m.real)}{'' if m.imag == 0 else f' {m.imag:+.17g}i'}")
    for x, m in fps.real_fixed_points:
        print(f"fixed_point: {_fmt(x)} multiplier {_fmt(m)}")
    if fps.degenerate:
        print("degenerate: true")
    return 0


def run_fiber(args) -> int:
    rows = moduli_fiber(ModuliPoint(args.sigma1, args.sigma2))
    buf = io.StringIO()
    buf.write("mu,t\n")
    for q in rows:
        buf.write(f"{_fmt(q.mu)},{_fmt(q.t)}\n")
    _emit(buf.getvalue(), args.out)
    return 0


def run_entropy(args) -> int:
    est = entropy(ParameterPoint(args.mu, args.t), _entropy_config(args))
    print(f"entropy: {est.value:.10f}")
    print(f"error: {est.error_bound:.3e}")
    print(f"method: {est.method.value}")
    print(f"status: {est.status.value}")
    print(f"depth: {est.depth}")
    return 1 if est.status.value == "failed" else 0


def run_sweep(args) -> int:
    window = parse_domain(args.domain)
    w, h = parse_resolution(args.res)
    bands = parse_bands(args.bands)
    g = sweep_entropy(window, w, h, _entropy_config(args), threads=args.threads, checkpoint=args.checkpoint)
    base = _prefix(args.out, "sweep")
    write_csv(g, base + ".csv")
    write_ppm(band_image(g, bands), base + ".ppm")
    for label, count in band_counts(g, bands).items():
        print(f"{label}: {count}")
    return 0


def run_project(args) -> int:
    g = read_csv(args.input)
    proj = project_to_moduli(g, parse_bands(args.bands), args.clamp)
    _emit(proj.to_csv(), args.out)
    print(f"suppressed: {proj.suppressed}", file=sys.stderr)
    return 0


def run_bones(args) -> int:
    w, h = parse_resolution(args.res)
    window = None if args.domain is None else _rect(args.domain)
    curves = trace_bones_many(args.n, threads=args.threads, window=window, grid=(w, h), refine=not args.no_refine, family=args.family)
    buf = io.StringIO()
    buf.write("period,chain,vertex,mu,t\n")
    for c in curves:
        for k, (poly, ends) in enumerate(zip(c.polylines, c.endpoints_on)):
            print(f"n={c.period} chain={k} vertices={len(poly)} ends={ends[0]},{ends[1]}")
            for v, (m, t) in enumerate(poly):
                buf.write(f"{c.period},{k},{v},{_fmt(m)},{_fmt(t)}\n")
    if args.out is not None:
        _emit(buf.getvalue(), args.out)
    return 0


def _rect(text: str) -> tuple[float, float, float, float]:
    if not text.startswith("rect:"):
        raise UsageError(f"expected rect:mu0,mu1,t0,t1, got {text!r}")
    return parse_domain(text)


def bifurcation_csv(grid) -> str:
    buf = io.StringIO()
    buf.write("mu,t,period_plus,period_minus,multiplier_plus,multiplier_minus\n")
    for m, t, pp, pm, lp, lm in zip(
        grid.mu.ravel(), grid.t.ravel(), grid.period_plus.ravel(), grid.period_minus.ravel(),
        grid.multiplier_plus.ravel(), grid.multiplier_minus.ravel(),
    ):
        buf.write(f"{_fmt(m)},{_fmt(t)},{int(pp)},{int(pm)},{_fmt(lp)},{_fmt(lm)}\n")
    return buf.getvalue()


def period_image(periods: np.ndarray) -> np.ndarray:
    """RGB raster of a period array; the largest t is the top row."""
    table = np.array(PERIOD_COLOURS, dtype=np.uint8)
    img = np.zeros(periods.shape + (3,), dtype=np.uint8)
    hit = periods > 0
    img[hit] = table[(periods[hit] - 1) % len(table)]
    return img[::-1]


def run_bifurcation(args) -> int:
    window = parse_domain(args.domain)
    w, h = parse_resolution(args.res)
    cfg = BifurcationConfig(burn_in=args.burn_in, window=args.orbit_window, max_period=args.max_period)
    grid = bifurcation_sweep(window, w, h, cfg, threads=args.threads)
    base = _prefix(args.out, "bifurcation")
    Path(base + ".csv").write_text(bifurcation_csv(grid), encoding="ascii")
    write_ppm(period_image(grid.period_plus), base + "_plus.ppm")
    write_ppm(period_image(grid.period_minus), base + "_minus.ppm")
    found = np.unique(np.concatenate([grid.period_plus.ravel(), grid.period_minus.ravel()]))
    print("periods: " + ",".join(str(int(p)) for p in found if p > 0))
    return 0


def run_connectivity(args) -> int:
    g = read_csv(args.input)
    if (args.band is None) == (args.value is None):
        raise UsageError("give exactly one of --band or --value")
    if args.band is not None:
        band, closed = band_interval(parse_bands(args.bands), args.band)
    else:
        band, closed = (args.value - args.delta, args.value + args.delta), False
    rep = isentrope_connectivity(g, band, args.region, closed)
    _emit(rep.to_json() + "\n", args.out)
    return 0


COMMANDS = {
    "eval": run_eval,
    "classify": run_classify,
    "fixed-points": run_fixed_points,
    "fiber": run_fiber,
    "entropy": run_entropy,
    "sweep": run_sweep,
    "project": run_project,
    "bones": run_bones,
    "bifurcation": run_bifurcation,
    "connectivity": run_connectivity,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _apply_config(parser, argv)
        return COMMANDS[args.command](args)
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code) if isinstance(exc.code, int) else 2
    except (UsageError, ValueError) as exc:
        # ValueError covers the library's configuration and domain errors
        print(f"realent: error: {exc}", file=sys.stderr)
        return 2
    except (RealEntError, OSError, ArithmeticError) as exc:
        print(f"realent: failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
