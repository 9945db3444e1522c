"""Command-line front end: ``ftnfde {ber,rmse,weights,channel,selfcheck}``."""

import argparse
import csv
import datetime
import hashlib
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .channel import discretize, identity_channel, rayleigh_channel
from .equalizer import SpectralNullError, build_spectrum, noise_psd, weight_colored_diag, weight_white
from .ftnlink import NoiseCovarianceError
from .harness import (
    CSV_HEADER,
    RMSE_HEADER,
    ConfigError,
    ExperimentConfig,
    block_ref,
    ebn0_to_n0,
    run_ber,
    run_rmse,
)
from .oracles import run_selfcheck

log = logging.getLogger("ftnfde")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2
WEIGHT_HEADER = ("bin", "lambda_re", "lambda_im", "psd", "w_white_re", "w_white_im",
                 "w_colored_re", "w_colored_im")
_DEFAULT_MODE = {"ber": None, "rmse": "rmse_position", "weights": "ber_overlap", "channel": "ber_overlap"}


def parse_override(text):
    key, sep, raw = text.partition("=")
    if not sep or not key:
        raise ConfigError(f"--set expects key=value, got {text!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


def load_config(args):
    doc = {}
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise ConfigError(f"config: cannot read {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: {args.config} is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config: top level must be a JSON object")
    for item in args.set or ():
        key, value = parse_override(item)
        doc[key] = value
    if args.seed is not None:
        doc["rng_seed"] = args.seed
    if "mode" not in doc and _DEFAULT_MODE.get(args.command):
        doc["mode"] = _DEFAULT_MODE[args.command]
    return ExperimentConfig.from_dict(doc)


def run_stamp(config):
    canon = json.dumps(config.to_dict(), sort_keys=True)
    digest = hashlib.sha1(canon.encode()).hexdigest()[:10]
    now = datetime.datetime.now(datetime.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    return f"run {digest} {now}"


def _write_csv(path, header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    if path is None:
        sys.stdout.write(buf.getvalue())
    else:
        Path(path).write_text(buf.getvalue())


def _channel(config):
    if config.channel == "rayleigh":
        span = config.delay_span_symbols * config.gamma[0] * config.pulse.t0
        return rayleigh_channel(config.num_taps, span, config.rng_seed)
    return identity_channel()


def dump_weights(config):
    """Per-bin Lambda, noise PSD, white and colored one-tap weights for gamma[0]."""
    gamma = config.gamma[0]
    spec = config.pulse
    n0 = config.n0 if config.n0 is not None else ebn0_to_n0(config.ebn0_db[0], config.sigma2)
    dch = discretize(spec, _channel(config), gamma)
    spectrum = build_spectrum(dch, config.n, block_ref(config, dch))
    psd = noise_psd(spec, gamma, n0, config.n)
    white = weight_white(spectrum, n0, config.sigma2).diag
    colored = weight_colored_diag(spectrum, psd, config.sigma2).diag
    lam = spectrum.lam
    cols = (lam.real, lam.imag, psd, white.real, white.imag, colored.real, colored.imag)
    return [(k, *(repr(float(c[k])) for c in cols)) for k in range(config.n)]


def _rmse_path(out, gamma, many):
    if out is None or not many:
        return out
    path = Path(out)
    return path.with_name(f"{path.stem}_gamma{gamma:g}{path.suffix}")


def _cmd_ber(config, args):
    rows = run_ber(config)
    _write_csv(args.out, CSV_HEADER, [r.csv_fields() for r in rows])
    failed = [r for r in rows if r.error]
    for r in failed:
        log.error("gamma=%g Eb/N0=%g dB: %s", r.gamma, r.ebn0_db, r.error)
    return EXIT_NUMERIC if failed else EXIT_OK


def _cmd_rmse(config, args):
    many = len(config.gamma) > 1
    for gamma, rmse in zip(config.gamma, run_rmse(config)):
        _write_csv(_rmse_path(args.out, gamma, many), RMSE_HEADER,
                   [(i, f"{v:.6e}") for i, v in enumerate(rmse)])
    return EXIT_OK


def _cmd_weights(config, args):
    _write_csv(args.out, WEIGHT_HEADER, dump_weights(config))
    return EXIT_OK


def _cmd_channel(config, args):
    text = _channel(config).to_json() + "\n"
    if args.out is None:
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
    return EXIT_OK


COMMANDS = {"ber": _cmd_ber, "rmse": _cmd_rmse, "weights": _cmd_weights, "channel": _cmd_channel}


def build_parser():
    parser = argparse.ArgumentParser(prog="ftnfde", description="FTN overlap-FDE link simulator")
    parser.add_argument("-v", "--verbose", action="store_true", help="log per-point progress")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "ber": "BER vs Eb/N0 sweep (ber_cp or ber_overlap)",
        "rmse": "per-position RMSE of untrimmed FDE blocks",
        "weights": "dump Lambda, noise PSD and one-tap weights per bin",
        "channel": "emit a channel realization as JSON",
        "selfcheck": "run the small-size oracle checks",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        if name == "selfcheck":
            continue
        p.add_argument("--config", metavar="PATH", help="JSON experiment config")
        p.add_argument("--out", metavar="PATH", help="output file (default stdout)")
        p.add_argument("--seed", type=int, help="override rng_seed")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config field; VALUE is parsed as JSON when possible")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    if args.command == "selfcheck":
        return EXIT_OK if run_selfcheck() else EXIT_NUMERIC
    try:
        config = load_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(json.dumps(config.to_dict(), sort_keys=True), file=sys.stderr)
    print(run_stamp(config), file=sys.stderr)
    try:
        return COMMANDS[args.command](config, args)
    except (SpectralNullError, NoiseCovarianceError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        # ConfigError and geometry checks (e.g. block shorter than the channel)
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
