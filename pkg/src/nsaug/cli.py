"""
Command-line front end.

    nsaug changepoints --input eeg.csv --output-dir out --fs 256
    nsaug peaks        --input ecg.csv --output-dir out --min-distance 50 --max-interval 150
    nsaug augment-eeg  --input eeg.csv --output-dir out --seed 7 --n-surrogates 3
    nsaug augment-ecg  --input ecg.csv --output-dir out --seed 7 --point-margin 10
    nsaug metrics      --input eeg.csv --surrogate out/surrogate_000.csv --output-dir m

Input is a headered CSV with one column per channel; the sampling rate comes
from ``--fs`` or a ``# fs=<value>`` comment line. Exit codes: 0 ok, 2 usage or
I/O problem, 3 bad data, 4 engine failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import math
import re
import sys
from pathlib import Path

import numpy as np

from .changepoint import ChangepointConfig, detect_changepoints
from .core import Signal
from .errors import EngineError, InsufficientLengthError, InvalidSignalError, NsaugError
from .iaaft import IaaftConfig
from .metrics import STFT_HOP, STFT_WINDOW, compare
from .peaks import PeakConfig
from .pipeline import AugmentationRequest, augment_ecg, augment_eeg, ecg_fixed_indices

log = logging.getLogger("nsaug")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_ENGINE = 0, 2, 3, 4

# every tunable, with its default; flags and config files use these names
DEFAULTS = {
    "fs": None,
    "seed": None,
    "n_surrogates": 1,
    "channels": None,
    "lambda": 0.9,
    "kappa": 16,
    "sigma_mult": 4.0,
    "density": 0.7,
    "min_separation": 256,
    "warmup": 64,
    "union_channels": False,
    "min_distance": 50,
    "max_interval": 150,
    "prominence": None,
    "point_margin": 5,
    "smoothing_sigma": 5.0,
    "edge_fraction": 0.10,
    "max_iter": None,
    "mse_threshold": 1e-6,
    "stft_window": STFT_WINDOW,
    "stft_hop": STFT_HOP,
}


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


_FS_RE = re.compile(r"^#\s*fs\s*=\s*(\S+)\s*$", re.IGNORECASE)


def read_csv(path):
    """Read a headered multi-channel CSV.

    Returns ``(names, data, fs)`` with ``data`` shaped ``(n_channels, n_samples)``
    and ``fs`` taken from a ``# fs=`` comment (``None`` if absent). Data rows
    are numbered from 1 in error messages.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise CliError(f"cannot read input {path}: {exc}", EXIT_USAGE) from exc
    fs = None
    body = []
    for line in text.splitlines():
        if line.lstrip().startswith("#"):
            m = _FS_RE.match(line.strip())
            if m:
                try:
                    fs = float(m.group(1))
                except ValueError:
                    raise CliError(f"{path}: bad fs metadata {line.strip()!r}", EXIT_DATA)
            continue
        if line.strip():
            body.append(line)
    rows = list(csv.reader(body))
    if not rows:
        raise CliError(f"{path}: no header row and no data", EXIT_DATA)
    names = [h.strip() for h in rows[0]]
    if len(rows) == 1:
        raise CliError(f"{path}: no data rows", EXIT_DATA)
    data = np.empty((len(rows) - 1, len(names)))
    for r, row in enumerate(rows[1:], start=1):
        if len(row) != len(names):
            raise CliError(f"{path}: row {r} has {len(row)} fields, expected {len(names)}",
                           EXIT_DATA)
        for c, cell in enumerate(row):
            try:
                v = float(cell)
            except ValueError:
                raise CliError(f"{path}: row {r}, column {names[c]!r}: "
                               f"not a number ({cell.strip()!r})", EXIT_DATA) from None
            if not math.isfinite(v):
                raise CliError(f"{path}: row {r}, column {names[c]!r}: "
                               f"non-finite value ({cell.strip()!r})", EXIT_DATA)
            data[r - 1, c] = v
    return names, data.T.copy(), fs


def write_csv(path, names, data, fs=None):
    """Write ``(n_channels, n_samples)`` with shortest round-trip float formatting."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if fs is not None:
            fh.write(f"# fs={fs!r}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in np.asarray(data).T:
            w.writerow([repr(float(v)) for v in row])


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, ensure_ascii=False)
        fh.write("\n")


def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _load_config_file(path):
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise CliError(f"cannot read config file {path}: {exc}", EXIT_USAGE) from exc
    if not isinstance(doc, dict):
        raise CliError(f"config file {path} must hold a JSON object", EXIT_USAGE)
    # a provenance document re-runs with its resolved settings and input
    if "resolved" in doc and isinstance(doc["resolved"], dict):
        settings = dict(doc["resolved"])
        if "input" in doc and "input" not in settings:
            settings["input"] = doc["input"]
        doc = settings
    unknown = set(doc) - set(DEFAULTS) - {"input", "surrogate", "output_dir"}
    if unknown:
        raise CliError(f"config file {path}: unknown keys {sorted(unknown)}", EXIT_USAGE)
    return doc


def resolve(args):
    """Merge defaults < config file < explicit flags."""
    file_cfg = _load_config_file(args.config) if args.config else {}
    flags = {k: v for k, v in vars(args).items()
             if v is not None and k not in ("command", "config", "func", "verbose")}
    settings = dict(DEFAULTS)
    settings.update({k: v for k, v in file_cfg.items()})
    settings.update(flags)
    for key in ("input", "output_dir"):
        if not settings.get(key):
            raise CliError(f"missing required --{key.replace('_', '-')}", EXIT_USAGE)
    return settings, file_cfg, flags


def _select(names, data, channels):
    if not channels:
        return names, data
    if isinstance(channels, str):
        channels = [c.strip() for c in channels.split(",") if c.strip()]
    idx = []
    for c in channels:
        if c in names:
            idx.append(names.index(c))
        elif str(c).isdigit() and int(c) < len(names):
            idx.append(int(c))
        else:
            raise CliError(f"unknown channel {c!r}; available: {names}", EXIT_USAGE)
    return [names[i] for i in idx], data[idx]


def _load_input(settings):
    names, data, meta_fs = read_csv(settings["input"])
    fs = settings.get("fs") or meta_fs
    if fs is None:
        raise CliError("sampling rate unknown: pass --fs or add a '# fs=<value>' line",
                       EXIT_USAGE)
    if not fs > 0:
        raise CliError(f"--fs must be positive, got {fs}", EXIT_USAGE)
    names, data = _select(names, data, settings.get("channels"))
    if data.shape[1] < 2:
        raise CliError(f"{settings['input']}: need at least 2 samples", EXIT_DATA)
    return names, data, float(fs)


def _changepoint_cfg(s):
    return ChangepointConfig(lambda_=s["lambda"], kappa=s["kappa"], sigma_mult=s["sigma_mult"],
                             density=s["density"], min_separation=s["min_separation"],
                             warmup=s["warmup"])


def _peak_cfg(s):
    return PeakConfig(min_distance=s["min_distance"], max_interval=s["max_interval"],
                      prominence=s["prominence"])


def _iaaft_cfg(s):
    return IaaftConfig(n_surrogates=s["n_surrogates"], max_iter=s["max_iter"],
                       mse_threshold=s["mse_threshold"], edge_fraction=s["edge_fraction"],
                       point_margin=s["point_margin"], rng_seed=s["seed"])


def _safe(name):
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", name) or "channel"


def _outdir(settings):
    out = Path(settings["output_dir"])
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(f"cannot create output directory {out}: {exc}", EXIT_USAGE) from exc
    return out


def cmd_changepoints(settings):
    names, data, fs = _load_input(settings)
    cfg = _changepoint_cfg(settings)
    out = _outdir(settings)
    written = []
    for name, x in zip(names, data):
        cp = detect_changepoints(Signal(x, fs), cfg=cfg)
        doc = {"fs": fs, "channel": name, **cp.to_dict(), "config": cfg.to_dict()}
        path = out / f"changepoints_{_safe(name)}.json"
        _write_json(path, doc)
        written.append(str(path))
    return written


def cmd_peaks(settings):
    names, data, fs = _load_input(settings)
    cfg = _peak_cfg(settings)
    out = _outdir(settings)
    written = []
    for name, x in zip(names, data):
        fixed = ecg_fixed_indices(Signal(x, fs), cfg)
        doc = {"fs": fs, "channel": name, **fixed.to_dict(), "config": cfg.to_dict()}
        path = out / f"peaks_{_safe(name)}.json"
        _write_json(path, doc)
        written.append(str(path))
    return written


def _augment(settings, file_cfg, flags, mode):
    if settings.get("seed") is None:
        raise CliError("--seed is required for augmentation (runs must be reproducible)",
                       EXIT_USAGE)
    names, data, fs = _load_input(settings)
    req = AugmentationRequest(
        data, fs, mode=mode,
        changepoint_cfg=_changepoint_cfg(settings),
        peak_cfg=_peak_cfg(settings),
        iaaft_cfg=_iaaft_cfg(settings),
        union_channels=bool(settings["union_channels"]),
        smoothing_sigma=settings["smoothing_sigma"],
    )
    result = augment_eeg(req) if mode == "eeg" else augment_ecg(req)
    out = _outdir(settings)
    written = []
    for k in range(result.surrogates.shape[0]):
        path = out / f"surrogate_{k:03d}.csv"
        write_csv(path, names, result.surrogates[k], fs)
        written.append(path.name)

    resolved = {k: settings[k] for k in DEFAULTS}
    resolved["fs"] = fs
    resolved["input"] = str(Path(settings["input"]).resolve())
    channels = {}
    for ch, name in enumerate(names):
        prov = result.provenance[ch]
        entry = {"segments": result.diagnostics[ch]}
        if mode == "eeg":
            entry["changepoints"] = prov.to_dict()
        else:
            entry["fixed_indices"] = prov.to_dict()
        channels[name] = entry
    doc = {
        "command": f"augment-{mode}",
        "mode": mode,
        "input": resolved["input"],
        "input_sha256": _sha256(settings["input"]),
        "seed": settings["seed"],
        "resolved": resolved,
        "flags": {k: v for k, v in flags.items() if k not in ("input", "output_dir")},
        "config_file": file_cfg,
        "channels": channels,
        "outputs": written,
    }
    _write_json(out / "provenance.json", doc)
    return [str(out / w) for w in written] + [str(out / "provenance.json")]


def cmd_metrics(settings):
    if not settings.get("surrogate"):
        raise CliError("missing required --surrogate", EXIT_USAGE)
    names, data, fs = _load_input(settings)
    snames, sdata, _ = read_csv(settings["surrogate"])
    snames, sdata = _select(snames, sdata, settings.get("channels"))
    if sdata.shape != data.shape:
        raise CliError(f"shape mismatch: original {data.shape[0]}x{data.shape[1]} vs "
                       f"surrogate {sdata.shape[0]}x{sdata.shape[1]} (channels x samples)",
                       EXIT_DATA)
    out = _outdir(settings)
    reports = {}
    for name, x, s in zip(names, data, sdata):
        rep = compare(Signal(x, fs), s, settings["stft_window"], settings["stft_hop"])
        reports[name] = rep.to_dict()
        if settings.get("csv"):
            rep.write_csv(out, prefix=f"{_safe(name)}_")
    path = out / "metrics.json"
    _write_json(path, {"fs": fs, "original": str(settings["input"]),
                       "surrogate": str(settings["surrogate"]), "channels": reports})
    return [str(path)]


def _add_shared(p):
    p.add_argument("--input", help="headered CSV, one column per channel")
    p.add_argument("--output-dir", dest="output_dir")
    p.add_argument("--fs", type=float, help="sampling rate in Hz (overrides '# fs=' metadata)")
    p.add_argument("--seed", type=int)
    p.add_argument("--n-surrogates", dest="n_surrogates", type=int)
    p.add_argument("--channels", help="comma-separated channel names or column numbers")
    p.add_argument("--config", help="JSON settings file or a provenance.json to re-run")
    p.add_argument("-v", "--verbose", action="store_true")


def _add_changepoint(p):
    p.add_argument("--lambda", dest="lambda", type=float, help="forgetting factor")
    p.add_argument("--kappa", type=int, help="lag in samples")
    p.add_argument("--sigma-mult", dest="sigma_mult", type=float)
    p.add_argument("--density", type=float)
    p.add_argument("--min-separation", dest="min_separation", type=int)
    p.add_argument("--warmup", type=int)
    p.add_argument("--union-channels", dest="union_channels", action="store_const", const=True)


def _add_peaks(p):
    p.add_argument("--min-distance", dest="min_distance", type=int)
    p.add_argument("--max-interval", dest="max_interval", type=int)
    p.add_argument("--prominence", type=float)
    p.add_argument("--point-margin", dest="point_margin", type=int)
    p.add_argument("--smoothing-sigma", dest="smoothing_sigma", type=float)


def _add_iaaft(p):
    p.add_argument("--edge-fraction", dest="edge_fraction", type=float)
    p.add_argument("--max-iter", dest="max_iter", type=int)
    p.add_argument("--mse-threshold", dest="mse_threshold", type=float)


def build_parser():
    parser = argparse.ArgumentParser(prog="nsaug", description=__doc__.split("\n\n")[0].strip())
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("changepoints", help="detect EEG changepoints")
    _add_shared(p)
    _add_changepoint(p)

    p = sub.add_parser("peaks", help="detect ECG peaks and gap-fill points")
    _add_shared(p)
    _add_peaks(p)

    p = sub.add_parser("augment-eeg", help="changepoint-informed fixed-edges surrogates")
    _add_shared(p)
    _add_changepoint(p)
    _add_iaaft(p)

    p = sub.add_parser("augment-ecg", help="peak-preserving fixed-points surrogates")
    _add_shared(p)
    _add_peaks(p)
    _add_iaaft(p)

    p = sub.add_parser("metrics", help="compare an original with a surrogate")
    _add_shared(p)
    p.add_argument("--surrogate", help="surrogate CSV with the same shape as --input")
    p.add_argument("--stft-window", dest="stft_window", type=int)
    p.add_argument("--stft-hop", dest="stft_hop", type=int)
    p.add_argument("--csv", action="store_const", const=True,
                   help="also dump periodogram/histogram/spectrogram panels as CSV")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        settings, file_cfg, flags = resolve(args)
        if args.command == "changepoints":
            written = cmd_changepoints(settings)
        elif args.command == "peaks":
            written = cmd_peaks(settings)
        elif args.command == "augment-eeg":
            written = _augment(settings, file_cfg, flags, "eeg")
        elif args.command == "augment-ecg":
            written = _augment(settings, file_cfg, flags, "ecg")
        else:
            written = cmd_metrics(settings)
    except CliError as exc:
        print(f"nsaug: error: {exc}", file=sys.stderr)
        return exc.code
    except (InvalidSignalError, InsufficientLengthError) as exc:
        print(f"nsaug: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (EngineError, NsaugError) as exc:
        print(f"nsaug: engine error: {exc}", file=sys.stderr)
        return EXIT_ENGINE
    except ValueError as exc:
        # invalid parameter values from the config dataclasses
        print(f"nsaug: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for w in written:
        print(w)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
