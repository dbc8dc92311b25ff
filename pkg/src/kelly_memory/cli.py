"""Command-line front end.

Subcommands: kelly (optimal fractions), elg (evaluate a policy), simulate
(Monte Carlo), scenario (three-bettor comparison table), estimate (fit
coefficients from outcomes), ingest (prices to +1/-1 moves). Output is
JSON or CSV on stdout, or written atomically to --out. Exit codes: 0
success, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from pathlib import Path

from . import estimate, model, policy, simulate
from .errors import InputError, KellyMemoryError, NumericalError

JSON_SIG_DIGITS = 12
CSV_SIG_DIGITS = 6

SEED_ENV_VAR = "KELLY_MEMORY_SEED"


def _parse_float_list(text: str, flag: str) -> list[float]:
    try:
        return [float(tok) for tok in text.replace(",", " ").split()]
    except ValueError:
        raise InputError(f"{flag} expects a comma-separated list of numbers, got {text!r}")


def _parse_history(text: str) -> model.History:
    tokens = text.replace(",", " ").split()
    values = []
    for tok in tokens:
        upper = tok.upper()
        if upper in ("H", "+1", "1"):
            values.append(1)
        elif upper in ("T", "-1"):
            values.append(-1)
        else:
            raise InputError(f"--history tokens must be +1/-1 or H/T, got {tok!r}")
    if not values:
        raise InputError("--history needs at least one token")
    return model.History(tuple(values))


def _resolve_seed(arg_seed: int | None) -> int:
    if arg_seed is not None:
        return arg_seed
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise InputError(f"{SEED_ENV_VAR}={env!r} is not an integer")
    return 0


def _fmt(x: float, sig: int) -> str:
    return f"{x:.{sig}g}"


def _jround(x: float, sig: int) -> float:
    return float(f"{x:.{sig}g}")


def _write_output(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    target = Path(out)
    fd, tmp = tempfile.mkstemp(dir=target.parent or Path("."), prefix=".kelly-tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _csv_lines(header: str, rows: list[list[str]]) -> str:
    lines = [header] + [",".join(row) for row in rows]
    return "\n".join(lines) + "\n"


def _game_spec(args) -> model.GameSpec:
    params = model.validate_params(_parse_float_list(args.omega, "--omega"))
    history = _parse_history(args.history)
    return model.GameSpec(params=params, history=history, n=args.n)


def _nat_scale(args) -> float:
    return 1.0 / math.log(2.0) if getattr(args, "bits", False) else 1.0


def cmd_kelly(args) -> str:
    spec = _game_spec(args)
    kstar = policy.kelly_limit(spec.params)
    kn = policy.kelly_horizon(spec)
    kvec = policy.kelly_timevarying(spec).fractions
    if args.format == "json":
        sig = args.precision or JSON_SIG_DIGITS
        payload = {
            "kstar": _jround(kstar, sig),
            "kn": _jround(kn, sig),
            "kinf": _jround(kstar, sig),
            "kvec": [_jround(k, sig) for k in kvec],
        }
        return json.dumps(payload) + "\n"
    sig = args.precision or CSV_SIG_DIGITS
    rows = [
        ["kstar", _fmt(kstar, sig)],
        ["kn", _fmt(kn, sig)],
        ["kinf", _fmt(kstar, sig)],
    ]
    rows += [[f"kvec_{i}", _fmt(k, sig)] for i, k in enumerate(kvec)]
    return _csv_lines("name,value", rows)


def _policy_from_fractions(ks: list[float], n: int) -> policy.BettorPolicy:
    if len(ks) == 1:
        return policy.BettorPolicy.constant(ks[0])
    if len(ks) == n:
        return policy.BettorPolicy.varying(ks)
    raise InputError(f"--k needs 1 or {n} fractions, got {len(ks)}")


def cmd_elg(args) -> str:
    spec = _game_spec(args)
    ks = _parse_float_list(args.k, "--k")
    pol = _policy_from_fractions(ks, spec.n)
    if pol.kind is policy.PolicyKind.TIME_INVARIANT:
        value = policy.elg_time_invariant(spec, pol.fractions[0])
    else:
        value = policy.elg_time_varying(spec, pol)
    value *= _nat_scale(args)
    unit = "bits" if args.bits else "nats"
    if args.format == "json":
        sig = args.precision or JSON_SIG_DIGITS
        payload = {
            "k": [_jround(k, sig) for k in pol.fractions],
            "elg": _jround(value, sig),
            "unit": unit,
        }
        return json.dumps(payload) + "\n"
    sig = args.precision or CSV_SIG_DIGITS
    rows = [[f"k_{i}", _fmt(k, sig)] for i, k in enumerate(pol.fractions)]
    rows.append(["elg", _fmt(value, sig)])
    return _csv_lines("name,value", rows)


def cmd_scenario(args) -> str:
    params = model.validate_params(_parse_float_list(args.omega, "--omega"))
    history = _parse_history(args.history)
    table = simulate.scenario_table(params, history, n_max=args.n)
    scale = _nat_scale(args)
    if args.format == "json":
        sig = args.precision or JSON_SIG_DIGITS
        payload = {
            "rows": [
                {
                    "n": row.n,
                    "elg_kstar": _jround(row.elg_kstar * scale, sig),
                    "elg_kn": _jround(row.elg_kn * scale, sig),
                    "elg_kvec": _jround(row.elg_kvec * scale, sig),
                    "kstar": _jround(row.kstar, sig),
                    "kn": _jround(row.kn, sig),
                }
                for row in table
            ]
        }
        return json.dumps(payload) + "\n"
    sig = args.precision or CSV_SIG_DIGITS
    rows = [
        [
            str(row.n),
            _fmt(row.elg_kstar * scale, sig),
            _fmt(row.elg_kn * scale, sig),
            _fmt(row.elg_kvec * scale, sig),
            _fmt(row.kstar, sig),
            _fmt(row.kn, sig),
        ]
        for row in table
    ]
    return _csv_lines("n,elg_kstar,elg_kn,elg_kvec,kstar,kn", rows)


def cmd_simulate(args) -> str:
    spec = _game_spec(args)
    if args.k is not None:
        ks = _parse_float_list(args.k, "--k")
        policies = (("custom", _policy_from_fractions(ks, spec.n)),)
    else:
        policies = simulate.standard_policies(spec)
    config = simulate.SimConfig(
        spec=spec,
        policies=tuple(policies),
        paths=args.paths,
        seed=_resolve_seed(args.seed),
    )
    result = simulate.monte_carlo_elg(config)
    scale = _nat_scale(args)
    if args.format == "json":
        sig = args.precision or JSON_SIG_DIGITS
        payload = {
            "paths": result.paths,
            "seed": result.seed,
            "policies": [
                {
                    "name": s.name,
                    "mean_log_growth": _jround(s.mean_log_growth * scale, sig),
                    "std_error": _jround(s.std_error * scale, sig),
                    "analytic_elg": _jround(s.analytic_elg * scale, sig),
                    "q05": _jround(s.final_value_quantiles[0], sig),
                    "q50": _jround(s.final_value_quantiles[1], sig),
                    "q95": _jround(s.final_value_quantiles[2], sig),
                }
                for s in result.stats
            ],
        }
        return json.dumps(payload) + "\n"
    sig = args.precision or CSV_SIG_DIGITS
    rows = [
        [
            s.name,
            _fmt(s.mean_log_growth * scale, sig),
            _fmt(s.std_error * scale, sig),
            _fmt(s.analytic_elg * scale, sig),
            _fmt(s.final_value_quantiles[0], sig),
            _fmt(s.final_value_quantiles[1], sig),
            _fmt(s.final_value_quantiles[2], sig),
        ]
        for s in result.stats
    ]
    return _csv_lines(
        "policy,mean_log_growth,std_error,analytic_elg,q05,q50,q95", rows
    )


def cmd_estimate(args) -> str:
    outcomes = estimate.read_outcomes(args.data, column=args.column)
    obs = estimate.ObservationSet(
        data=tuple(int(v) for v in outcomes), m=args.m
    )
    fit = estimate.constrained_fit(obs) if args.constrained else estimate.ols_fit(obs)
    if args.format == "csv":
        sig = args.precision or CSV_SIG_DIGITS
        rows = [[f"omega_{i}", _fmt(w, sig)] for i, w in enumerate(fit.omega_hat)]
        rows.append(["rss", _fmt(fit.rss, sig)])
        rows.append(["constrained", str(fit.constrained).lower()])
        rows.append(["projected", str(fit.projected).lower()])
        return _csv_lines("name,value", rows)
    sig = args.precision or JSON_SIG_DIGITS
    payload = fit.as_json_dict()
    payload["omega"] = [_jround(w, sig) for w in payload["omega"]]
    payload["rss"] = _jround(payload["rss"], sig)
    return json.dumps(payload) + "\n"


def cmd_ingest(args) -> str:
    prices = estimate.read_prices(args.data)
    moves = estimate.ingest_prices(prices, tie_rule=args.tie)
    return "".join("+1\n" if v == 1 else "-1\n" for v in moves)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kelly-memory",
        description="Kelly-optimal bet sizing for coins with Markov memory.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, game: bool, seedable: bool = False, bits: bool = False):
        if game:
            p.add_argument("--omega", required=True, help="coefficients w0,w1,...,wm")
            p.add_argument(
                "--history",
                required=True,
                help="prior outcomes, most recent first (+1/-1 or H/T)",
            )
        if seedable:
            p.add_argument(
                "--seed",
                type=int,
                default=None,
                help=f"RNG seed (default: ${SEED_ENV_VAR} or 0)",
            )
        if bits:
            p.add_argument(
                "--bits", action="store_true", help="report growth in bits instead of nats"
            )
        p.add_argument("--format", choices=("csv", "json"), default="json")
        p.add_argument("--out", default=None, help="write output atomically to this path")
        p.add_argument(
            "--precision", type=int, default=None, help="significant digits in output"
        )

    p = sub.add_parser("kelly", help="optimal betting fractions")
    p.add_argument("--n", type=int, required=True, help="number of bets")
    add_common(p, game=True)
    p.set_defaults(func=cmd_kelly)

    p = sub.add_parser("elg", help="expected log growth of a given policy")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", required=True, help="one fraction, or n comma-separated")
    add_common(p, game=True, bits=True)
    p.set_defaults(func=cmd_elg)

    p = sub.add_parser("simulate", help="Monte Carlo account-growth simulation")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", default=None, help="custom policy (default: three bettors)")
    p.add_argument("--paths", type=int, default=100_000)
    add_common(p, game=True, seedable=True, bits=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("scenario", help="three-bettor comparison over horizons")
    p.add_argument("--n", type=int, default=30, help="largest horizon (default 30)")
    add_common(p, game=True, bits=True)
    p.set_defaults(func=cmd_scenario)
    p.set_defaults(format="csv")

    p = sub.add_parser("estimate", help="fit coefficients from observed outcomes")
    p.add_argument("data", help="outcome file: one value per line, or CSV")
    p.add_argument("--m", type=int, required=True, help="memory depth to fit")
    p.add_argument("--column", default=None, help="CSV column holding the outcomes")
    p.add_argument(
        "--constrained", action="store_true", help="restrict fit to the hyperdiamond"
    )
    add_common(p, game=False)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("ingest", help="convert a price CSV to +1/-1 moves")
    p.add_argument("data", help="CSV file with a 'price' column")
    p.add_argument("--tie", choices=("drop", "up", "down"), default="drop")
    add_common(p, game=False)
    p.set_defaults(func=cmd_ingest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        text = args.func(args)
        _write_output(text, args.out)
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (KellyMemoryError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
