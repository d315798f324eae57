"""
Command-line front end.

Exit codes: 0 success, 1 malformed or unreadable input, 2 insufficient data
or invalid parameters. Every command ends by writing a ``manifest.json``
(``<out>.manifest.json`` for ``generate``) listing its outputs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__
from . import distributions as dist
from . import estimators as est
from . import generator as gen
from . import signal as sig
from .errors import EmptyLogError, FitError, InsufficientDataError, ParseError
from .ingest import file_digest, filter_events, read_log, summarize, write_log

DEFAULT_THRESHOLDS = "0,1e4,1e5,1e6"


class CommandError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def parse_thresholds(text):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad threshold list {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty threshold list")
    return values


def threshold_label(S):
    return str(int(S)) if float(S).is_integer() else f"{S:g}"


def _write(out_dir, name, text, outputs):
    path = os.path.join(out_dir, name)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    outputs.append(path)
    return path


def _dump(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_manifest(path, command, params, input_path, outputs):
    manifest = {
        "command": command,
        "parameters": params,
        "input_digest": file_digest(input_path) if input_path else None,
        "tool_version": __version__,
        "outputs": list(outputs),
        "created": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_dump(manifest))
    return manifest


def _params(args):
    return {k: v for k, v in vars(args).items() if k != "func"}


def _load(args):
    try:
        log = read_log(args.input)
    except (ParseError, EmptyLogError, UnicodeDecodeError, OSError) as exc:
        raise CommandError(f"cannot read {args.input}: {exc}", 1) from exc
    printer = getattr(args, "printer", None)
    if printer is not None:
        log = filter_events(log, printer=printer, min_size=-1)
    return log


def _threshold_intervals(log, S):
    try:
        return dist.thresholded_intervals(log, S)
    except InsufficientDataError as exc:
        raise CommandError(f"threshold {threshold_label(S)}: {exc}", 2) from exc


def cmd_analyze(args):
    log = _load(args)
    os.makedirs(args.out, exist_ok=True)
    outputs = []
    try:
        summary = summarize(log)
    except InsufficientDataError as exc:
        raise CommandError(str(exc), 2) from exc

    rates = []
    densities = {}
    for S in args.thresholds:
        ivs = _threshold_intervals(log, S)
        densities[S] = dist.log_binned_density(ivs, args.bin_ratio, args.t_min)
        entry = dist.event_rate(log, S).to_dict()
        entry["n_intervals"] = len(ivs)
        entry["n_dropped_zero"] = ivs.n_dropped_zero
        rates.append(entry)

    _write(args.out, "summary.json", _dump(summary.to_dict()), outputs)
    for S, d in densities.items():
        _write(args.out, f"density_S{threshold_label(S)}.csv", d.to_csv(), outputs)
    _write(args.out, "rates.json", _dump({"rates": rates}), outputs)
    ccdf = dist.size_ccdf(log)
    _write(args.out, "ccdf.csv", ccdf.to_csv(), outputs)
    try:
        fit = est.fit_q_exponential(ccdf)
        _write(args.out, "qexp_fit.json", _dump(fit.to_dict()), outputs)
    except (InsufficientDataError, FitError) as exc:
        print(f"warning: size CCDF fit skipped: {exc}", file=sys.stderr)
    write_manifest(os.path.join(args.out, "manifest.json"), "analyze", _params(args), args.input, outputs)
    return 0


def cmd_collapse(args):
    log = _load(args)
    os.makedirs(args.out, exist_ok=True)
    curves, pooled = [], []
    for S in args.thresholds:
        ivs = _threshold_intervals(log, S)
        R = dist.event_rate(log, S).rate
        curves.append(dist.rescale_density(dist.log_binned_density(ivs, args.bin_ratio, args.t_min), R))
        pooled.append(ivs.intervals * R)
    try:
        result = dist.collapse(curves, args.min_count)
        lognormal = est.fit_lognormal(np.concatenate(pooled))
    except (InsufficientDataError, FitError, ValueError) as exc:
        raise CommandError(str(exc), 2) from exc

    outputs = []
    for S, c in zip(args.thresholds, curves):
        _write(args.out, f"collapse_S{threshold_label(S)}.csv", c.to_csv(), outputs)
    report = {
        "thresholds": args.thresholds,
        "score": result.score,
        "common_support": list(result.common_support),
        "n_grid_points": int(len(result.grid)),
        "bin_ratio": args.bin_ratio,
        "min_count": args.min_count,
    }
    _write(args.out, "collapse.json", _dump(report), outputs)
    _write(args.out, "lognormal.json", _dump(lognormal.to_dict()), outputs)
    write_manifest(os.path.join(args.out, "manifest.json"), "collapse", _params(args), args.input, outputs)
    return 0


def cmd_user_stats(args):
    log = _load(args)
    os.makedirs(args.out, exist_ok=True)
    counts = dist.user_request_counts(log)
    if args.user is not None and args.user not in counts:
        raise CommandError(f"user {args.user!r} not found in trace", 2)
    try:
        pooled = dist.per_user_intervals(log, args.min_requests)
        density = dist.log_binned_density(pooled, args.bin_ratio, args.t_min)
        user = args.user if args.user is not None else dist.busiest_user(log)
        own = dist.user_intervals(log, user)
        user_rate = dist.event_rate(log.subset(log.users == user), -1).rate
    except InsufficientDataError as exc:
        raise CommandError(str(exc), 2) from exc

    outputs = []
    _write(args.out, "user_density.csv", density.to_csv(), outputs)
    report = {
        "n_users": pooled.label,
        "n_intervals": len(pooled),
        "n_dropped_zero": pooled.n_dropped_zero,
        "user": user,
        "user_requests": counts[user],
        "user_rate": user_rate,
    }
    try:
        report["slope"] = est.density_slope(density, (args.fit_lo, args.fit_hi), args.min_count).to_dict()
    except InsufficientDataError as exc:
        report["slope"] = None
        report["slope_error"] = str(exc)
    _write(args.out, "user_stats.json", _dump(report), outputs)

    tau_max = min(args.max_lag, len(own) - 1)
    if tau_max < 1:
        raise CommandError(f"user {user!r} has too few intervals for autocorrelation", 2)
    acf = sig.autocorrelation(own, tau_max)
    _write(args.out, "autocorr.csv", acf.to_csv(), outputs)
    side = {"user": user, "n": acf.n, "tau_max": tau_max, "shuffle_seed": args.shuffle_seed}
    if tau_max >= 5:
        try:
            side["decay_fit"] = est.fit_slope(acf.lags[1:], acf.values[1:]).to_dict()
        except InsufficientDataError:
            pass
    if args.shuffle_seed is not None:
        shuffled = sig.autocorrelation(sig.shuffle_intervals(own, args.shuffle_seed), tau_max)
        _write(args.out, "autocorr_shuffled.csv", shuffled.to_csv(), outputs)
        band = sig.noise_band(shuffled)
        side["shuffled_noise_band"] = band
        side["shuffled_fraction_within_band"] = float(np.mean(np.abs(shuffled.values[1:]) < band))
    _write(args.out, "autocorr.json", _dump(side), outputs)
    write_manifest(os.path.join(args.out, "manifest.json"), "user-stats", _params(args), args.input, outputs)
    return 0


def cmd_spectrum(args):
    log = _load(args)
    os.makedirs(args.out, exist_ok=True)
    series = sig.counts_per_second(log)
    band = (args.fit_lo, args.fit_hi)
    try:
        spec = sig.power_spectrum(series, args.segment, args.bins_per_decade)
        fit = sig.spectral_slope(spec, band)
    except InsufficientDataError as exc:
        raise CommandError(str(exc), 2) from exc
    outputs = []
    _write(args.out, "spectrum.csv", spec.to_csv(), outputs)
    _write(args.out, "spectrum.json", sig.spectrum_sidecar(spec, band, fit) + "\n", outputs)
    write_manifest(os.path.join(args.out, "manifest.json"), "spectrum", _params(args), args.input, outputs)
    return 0


def _parse_sizes(text):
    try:
        s_star, g = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("--sizes expects S_STAR,GAMMA_MINUS_1") from None
    return {"s_star": s_star, "gamma_minus_1": g}


def cmd_generate(args):
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except (OSError, ValueError) as exc:
            raise CommandError(f"cannot read config {args.config}: {exc}", 1) from exc
    else:
        cfg = {
            "n_streams": args.streams,
            "k": args.k,
            "a": args.a,
            "b": args.b,
            "warmup": args.warmup_years * gen.YEAR,
            "horizon": args.years * gen.YEAR,
            "seed": args.seed,
            "size_model": args.sizes,
        }
    if not cfg.get("a", gen.DEFAULT_A) < cfg.get("b", gen.DEFAULT_B):
        raise CommandError("invalid parameters: need a < b", 2)
    try:
        config = gen.GeneratorConfig.from_dict(cfg)
    except (TypeError, ValueError) as exc:
        raise CommandError(f"invalid parameters: {exc}", 2) from exc
    out_dir = os.path.dirname(os.path.abspath(args.out))
    os.makedirs(out_dir, exist_ok=True)
    log = gen.simulate(config)
    write_log(log, args.out)
    params = _params(args)
    params["config"] = config.to_dict()
    write_manifest(args.out + ".manifest.json", "generate", params, None, [args.out])
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="arrivalkit", description=__doc__.splitlines()[1])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def trace_args(sp, thresholds=True):
        sp.add_argument("--input", required=True, help="canonical CSV trace")
        sp.add_argument("--out", required=True, help="output directory")
        if thresholds:
            sp.add_argument("--thresholds", type=parse_thresholds, default=parse_thresholds(DEFAULT_THRESHOLDS),
                            help="comma-separated size thresholds in bytes (default %(default)s)")

    def binning_args(sp):
        sp.add_argument("--bin-ratio", type=float, default=dist.DEFAULT_BIN_RATIO, help="geometric bin ratio r")
        sp.add_argument("--t-min", type=float, default=dist.DEFAULT_T_MIN, help="left edge of the first bin, seconds")
        sp.add_argument("--min-count", type=int, default=dist.DEFAULT_MIN_COUNT, help="bins with fewer counts are ignored")

    sp = sub.add_parser("analyze", help="thresholded interval densities, rates and summary")
    trace_args(sp)
    sp.add_argument("--printer", help="keep only this printer")
    binning_args(sp)
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("collapse", help="rescaled densities, collapse score, log-normal fit")
    trace_args(sp)
    sp.add_argument("--printer", help="keep only this printer")
    binning_args(sp)
    sp.set_defaults(func=cmd_collapse)

    sp = sub.add_parser("user-stats", help="per-user interval density, slope and autocorrelation")
    trace_args(sp, thresholds=False)
    sp.add_argument("--printer", help="keep only this printer")
    sp.add_argument("--min-requests", type=int, default=4, help="users with fewer requests are skipped")
    sp.add_argument("--user", help="user for the autocorrelation (default: busiest)")
    sp.add_argument("--max-lag", type=int, default=1000, help="largest lag tau")
    sp.add_argument("--shuffle-seed", type=int, help="also write a shuffled-control autocorrelation")
    sp.add_argument("--fit-lo", type=float, default=est.USER_FIT_RANGE[0])
    sp.add_argument("--fit-hi", type=float, default=est.USER_FIT_RANGE[1])
    binning_args(sp)
    sp.set_defaults(func=cmd_user_stats)

    sp = sub.add_parser("spectrum", help="power spectrum of the counts-per-second series")
    trace_args(sp, thresholds=False)
    sp.add_argument("--printer", help="keep only this printer")
    sp.add_argument("--segment", type=int, default=sig.DEFAULT_SEGMENT, help="segment length in seconds")
    sp.add_argument("--bins-per-decade", type=int, default=sig.DEFAULT_BINS_PER_DECADE)
    sp.add_argument("--fit-lo", type=float, default=sig.DEFAULT_FIT_BAND[0])
    sp.add_argument("--fit-hi", type=float, default=sig.DEFAULT_FIT_BAND[1])
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("generate", help="simulate N truncated-Pareto renewal streams")
    sp.add_argument("--streams", type=int, default=gen.DEFAULT_STREAMS, help="number of renewal streams N")
    sp.add_argument("--k", type=float, default=gen.DEFAULT_K, help="Pareto exponent")
    sp.add_argument("--a", type=float, default=gen.DEFAULT_A, help="shortest interval, seconds")
    sp.add_argument("--b", type=float, default=gen.DEFAULT_B, help="longest interval, seconds")
    sp.add_argument("--warmup-years", type=float, default=5.0)
    sp.add_argument("--years", type=float, default=1.0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--sizes", type=_parse_sizes, help="S_STAR,GAMMA_MINUS_1")
    sp.add_argument("--config", help="JSON file with GeneratorConfig fields; overrides flags")
    sp.add_argument("--out", required=True, help="output CSV path")
    sp.set_defaults(func=cmd_generate)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CommandError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
