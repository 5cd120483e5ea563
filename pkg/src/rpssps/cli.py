"""Command-line front end: ``rpssps {derive,trace,sweep,verify}``.

Exit codes: 0 success, 1 usage error, 2 verification failure, 3 derivation failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys

from .errors import DerivationFailure, DomainError, RpsError
from .experiments import (
    SWEEP_HEADER,
    TRACE_HEADER,
    Scenario,
    draw_trials,
    sweep_rows,
    trace_rows,
    verify,
)
from .kernels import BACKEND
from .rps import derive_factors
from .simulator import SCHEMES
from .timebase import UNITS, format_us, to_ticks

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_DERIVE = 0, 1, 2, 3

PRESETS = {
    "fig3": {"wsch_us": "71", "period_us": "2800", "packets": "200"},
    "fig4": {"wsch_us": "71", "p_from_us": "1000", "p_to_us": "3000", "p_step_us": "5",
             "packets": "200", "scheme": "rps,psps,csps"},
}

DEFAULTS = {
    "tau0_us": "0", "packets": "200", "scheme": "rps", "gamma": "3",
    "method": "exact", "unit": "us", "trials": "500", "seed": "42", "w_min_us": "2",
    "w_max_us": "1000", "p_max_factor": "100", "jobs": "1",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def read_config(path: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment. Keys accept '-' or '_'."""
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def _settings(args, preset: str | None = None, defaults: dict | None = None) -> dict:
    """Merge defaults < preset < config file < command-line flags."""
    merged = {**DEFAULTS, **(defaults or {})}
    name = getattr(args, "preset", None) or preset
    if name:
        merged.update(PRESETS[name])
    if args.config:
        merged.update(read_config(args.config))
    for key, value in vars(args).items():
        if value is not None and key not in ("config", "preset", "cmd", "func"):
            merged[key] = str(value)
    return merged


def _int(s: dict, key: str) -> int:
    try:
        return int(s[key])
    except KeyError:
        raise UsageError(f"missing required setting --{key.replace('_', '-')}") from None
    except ValueError:
        raise UsageError(f"--{key.replace('_', '-')} must be an integer, got {s[key]!r}") from None


def _ticks(s: dict, key: str) -> int:
    if key not in s:
        raise UsageError(f"missing required setting --{key.replace('_', '-')}")
    try:
        return to_ticks(s[key], s["unit"])
    except DomainError as exc:
        raise UsageError(f"--{key.replace('_', '-')}: {exc}") from None


def _scenario(s: dict) -> Scenario:
    if s["unit"] not in UNITS:
        raise UsageError(f"--unit must be one of {sorted(UNITS)}")
    sc = Scenario(
        wsch=_ticks(s, "wsch_us"),
        period=_ticks(s, "period_us") if "period_us" in s else 0,
        tau_traffic=_ticks(s, "tau_traffic_us") if "tau_traffic_us" in s else _ticks(s, "tau0_us"),
        tau0=_ticks(s, "tau0_us"),
        packets=_int(s, "packets"),
        scheme=s["scheme"],
        gamma=_int(s, "gamma"),
        method=s["method"],
        unit=s["unit"],
    )
    if sc.wsch <= 0:
        raise UsageError("--wsch-us must be positive")
    if sc.packets < 1:
        raise UsageError("--packets must be >= 1")
    if sc.gamma < 1:
        raise UsageError("--gamma must be >= 1")
    if sc.method not in ("exact", "jdv"):
        raise UsageError("--method must be 'exact' or 'jdv'")
    if sc.tau_traffic < sc.tau0:
        raise UsageError("--tau-traffic-us must not precede --tau0-us")
    return sc


def _check_period(sc: Scenario) -> None:
    if sc.period < sc.wsch:
        raise UsageError(
            f"--period-us ({format_us(sc.period, sc.unit)}) must be >= --wsch-us "
            f"({format_us(sc.wsch, sc.unit)})"
        )


def _open_out(path):
    if path is None or path == "-":
        return sys.stdout, False
    try:
        return open(path, "w", encoding="utf-8", newline=""), True
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from None


def _write_csv(path, header, rows) -> None:
    buf = io.StringIO(newline="")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    fh, close = _open_out(path)
    try:
        fh.write(buf.getvalue())
    finally:
        if close:
            fh.close()


# ---------------------------------------------------------------------------
# subcommands


def cmd_derive(args) -> int:
    s = _settings(args)
    sc = _scenario(s)
    _check_period(sc)
    f = derive_factors(sc.traffic, sc.grid, sc.gamma, sc.method)
    sign = {1: "+1", -1: "-1"}
    rows = []
    for n, (v, d) in enumerate(zip(f.levels, f.deltas)):
        rows.append((n, v.p, sign[v.q], v.t, format_us(d, sc.unit)))
    print(f"N={f.n_levels}")
    print(f"p={[v.p for v in f.levels]}")
    print(f"q={[sign[v.q] for v in f.levels]}".replace("'", ""))
    print(f"t={[v.t for v in f.levels]}")
    print(f"delta_us={[format_us(d, sc.unit) for d in f.deltas]}".replace("'", ""))
    print(f"{'level':>5} {'p':>8} {'q':>3} {'t':>8} {'delta_next_us':>14}")
    for n, p, q, t, d in rows:
        print(f"{n:>5} {p:>8} {q:>3} {t:>8} {d:>14}")
    if args.out:
        _write_csv(args.out, ("level", "p", "q", "t", "delta_next_us"), rows)
    return EXIT_OK


def cmd_trace(args) -> int:
    s = _settings(args, preset="fig3")
    sc = _scenario(s)
    _check_period(sc)
    if sc.scheme not in SCHEMES:
        raise UsageError(f"--scheme must be one of {', '.join(SCHEMES)}")
    _write_csv(args.out, TRACE_HEADER, trace_rows(sc))
    return EXIT_OK


def cmd_sweep(args) -> int:
    s = _settings(args, preset="fig4")
    base = _scenario(s)
    p_from, p_to, p_step = _ticks(s, "p_from_us"), _ticks(s, "p_to_us"), _ticks(s, "p_step_us")
    if p_step < 1:
        raise UsageError("--p-step-us must be positive")
    if p_from < base.wsch:
        raise UsageError("--p-from-us must be >= --wsch-us")
    if p_to < p_from:
        raise UsageError("--p-to-us must be >= --p-from-us")
    schemes = [x.strip() for x in s["scheme"].split(",") if x.strip()]
    bad = [x for x in schemes if x not in SCHEMES]
    if bad or not schemes:
        raise UsageError(f"unknown scheme(s) {bad}; choose from {', '.join(SCHEMES)}")
    rows = sweep_rows(base, p_from, p_to, p_step, schemes, jobs=_int(s, "jobs"))
    _write_csv(args.out, SWEEP_HEADER, rows)
    return EXIT_OK


def cmd_verify(args) -> int:
    s = _settings(args, defaults={"packets": "1000"})
    unit = s["unit"]
    trials, seed = _int(s, "trials"), _int(s, "seed")
    w_min, w_max = _ticks(s, "w_min_us"), _ticks(s, "w_max_us")
    factor = _int(s, "p_max_factor")
    packets, gamma = _int(s, "packets"), _int(s, "gamma")
    tau0 = _ticks(s, "tau0_us")
    if trials < 1 or packets < 1 or gamma < 1 or factor < 1:
        raise UsageError("--trials, --packets, --gamma and --p-max-factor must be >= 1")
    if not 1 <= w_min <= w_max:
        raise UsageError("need 1 <= --w-min-us <= --w-max-us")
    forced_w = _ticks(s, "wsch_us") if "wsch_us" in s else None
    forced_p = _ticks(s, "period_us") if "period_us" in s else None
    forced_t = _ticks(s, "tau_traffic_us") if "tau_traffic_us" in s else None
    if forced_t is not None:
        forced_t -= tau0
    draws = draw_trials(trials, seed, w_min, w_max, factor, forced_w, forced_p, forced_t)
    for w, p, t in draws:
        if p < w:
            raise UsageError(f"forced period {format_us(p, unit)} shorter than slot {format_us(w, unit)}")
        if t < 0:
            raise UsageError("--tau-traffic-us must not precede --tau0-us")
    results = verify(draws, packets, tau0, gamma, s["method"], jobs=_int(s, "jobs"))
    failed = [r for r in results if r.failures]
    for r in failed:
        print(f"FAIL W={format_us(r.wsch, unit)} P={format_us(r.period, unit)} "
              f"tau={format_us(r.tau_traffic + tau0, unit)}: {'; '.join(r.failures)}")
        print(f"  reproduce: rpssps verify --trials 1 --unit {unit} "
              f"--wsch-us {format_us(r.wsch, unit)} --period-us {format_us(r.period, unit)} "
              f"--tau-traffic-us {format_us(r.tau_traffic + tau0, unit)} "
              f"--tau0-us {format_us(tau0, unit)} --packets {packets} --gamma {gamma} "
              f"--method {s['method']}")
    levels = [r.n_levels for r in results if r.n_levels is not None]
    print(f"trials={len(results)} failures={len(failed)} packets={packets} "
          f"max_N={max(levels, default=0)} method={s['method']} backend={BACKEND}")
    if len(results) == 1 and not failed:
        r = results[0]
        print(f"N={r.n_levels}")
    return EXIT_VERIFY if failed else EXIT_OK


# ---------------------------------------------------------------------------


def _add_scenario(p, period=True):
    p.add_argument("--config", help="scenario file of 'key = value' lines")
    p.add_argument("--wsch-us", help="slot width in microseconds")
    if period:
        p.add_argument("--period-us", help="traffic period in microseconds")
    p.add_argument("--tau-traffic-us", help="first packet arrival in microseconds")
    p.add_argument("--tau0-us", help="slot grid origin in microseconds")
    p.add_argument("--packets", type=int, help="packet count M")
    p.add_argument("--gamma", type=int, help="JDV validation horizon (default 3)")
    p.add_argument("--method", choices=("exact", "jdv"),
                   help="initial-position derivation (default exact)")
    p.add_argument("--unit", choices=sorted(UNITS), help="base time unit (default us)")
    p.add_argument("--out", help="output CSV path (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rpssps", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    p = sub.add_parser("derive", help="print the scheduling-factor tuple")
    _add_scenario(p)
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("trace", help="per-packet delay trace as CSV")
    _add_scenario(p)
    p.add_argument("--scheme", choices=SCHEMES)
    p.add_argument("--preset", choices=["fig3"])
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("sweep", help="mean/max delay versus traffic period as CSV")
    _add_scenario(p, period=False)
    p.add_argument("--scheme", help="comma-separated schemes (default all)")
    p.add_argument("--p-from-us")
    p.add_argument("--p-to-us")
    p.add_argument("--p-step-us")
    p.add_argument("--preset", choices=["fig4"])
    p.add_argument("--jobs", type=int, help="worker processes (default 1)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="fuzz the closed form against the greedy reference")
    _add_scenario(p)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--w-min-us")
    p.add_argument("--w-max-us")
    p.add_argument("--p-max-factor", type=int)
    p.add_argument("--jobs", type=int, help="worker processes (default 1)")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"rpssps {args.cmd}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DerivationFailure as exc:
        print(f"rpssps {args.cmd}: derivation failure: {exc}", file=sys.stderr)
        return EXIT_DERIVE
    except RpsError as exc:
        print(f"rpssps {args.cmd}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
