"""Command-line front end.

Subcommands wire simulation/ingestion into metrics, reconstruction, key
generation, and authentication experiments with machine-readable JSON/CSV
reports.  Every run is determined by (config, seed); reports embed the
resolved configuration for provenance.

Config files are INI-style; section.key values provide defaults and
command-line flags win.  Exit codes: 0 success, 1 usage error, 2 data
error.  ``CSIRECIP_OUT_DIR`` sets the default output directory.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import chansim
from .authsim import AuthPolicy, replay_attack, run_handshake, sign_csi
from .errors import CsiRecipError
from .keygen import PIPELINES, SessionConfig, preprocess_pair, wskg_session
from .metrics import DivergenceConfig, jeffrey_divergence, pearson, wasserstein_1d, xcorr_lag
from .traces import magnitude_series, pair_traces, parse_csi_csv, write_csi_csv
from .wavelet import coherence_summary, default_params, wavelet_coherence

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


def _out_dir(args) -> Path:
    d = Path(args.out_dir or os.environ.get("CSIRECIP_OUT_DIR", "."))
    d.mkdir(parents=True, exist_ok=True)
    return d


def _load_config(path: str | None) -> configparser.ConfigParser:
    cp = configparser.ConfigParser()
    if path:
        if not Path(path).exists():
            raise FileNotFoundError(f"config file not found: {path}")
        cp.read(path)
    return cp


def _cfg_get(cp, section, key, fallback):
    if cp.has_option(section, key):
        return cp.get(section, key)
    return fallback


def _channel_config(args, cp) -> chansim.ChannelConfig:
    preset = args.preset or _cfg_get(cp, "input", "preset", "los-short")
    duration = float(args.duration if args.duration is not None
                     else _cfg_get(cp, "input", "duration_s", 600.0))
    seed = int(args.seed if args.seed is not None
               else _cfg_get(cp, "input", "seed", 0))
    overrides = {}
    if args.snr_db is not None:
        overrides["snr_db"] = args.snr_db
    if args.lag is not None:
        overrides["lag_samples"] = args.lag
    return chansim.preset(preset, duration_s=duration, seed=seed, **overrides)


def _load_pair(args, cp):
    """Either simulate a pair or parse the two dataset CSVs."""
    ap_path = args.ap or _cfg_get(cp, "input", "ap", None)
    sta_path = args.sta or _cfg_get(cp, "input", "sta", None)
    if ap_path and sta_path:
        with open(ap_path, "rb") as f:
            ap = parse_csi_csv(f)
        with open(sta_path, "rb") as f:
            sta = parse_csi_csv(f)
        resolved = {"input": {"ap": str(ap_path), "sta": str(sta_path)}}
        return ap, sta, resolved
    cfg = _channel_config(args, cp)
    ap, sta, _truth = chansim.gen_pair(cfg)
    resolved = {"input": {"simulate": _jsonable(asdict(cfg))}}
    return ap, sta, resolved


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def _subcarrier(args, cp) -> int:
    return int(args.subcarrier if args.subcarrier is not None
               else _cfg_get(cp, "input", "subcarrier", 6))


# --- subcommands ---

def cmd_simulate(args, cp) -> int:
    cfg = _channel_config(args, cp)
    ap, sta, truth = chansim.gen_pair(cfg)
    out = _out_dir(args)
    for trace, name in ((ap, "ap"), (sta, "sta")):
        with open(out / f"{name}.csv", "w", newline="") as f:
            write_csi_csv(trace, f)
    truth["config"] = _jsonable(asdict(cfg))
    with open(out / "truth.json", "w") as f:
        json.dump(truth, f, indent=2)
    print(f"wrote {out}/ap.csv, {out}/sta.csv, {out}/truth.json")
    return EXIT_OK


def cmd_metrics(args, cp) -> int:
    ap, sta, resolved = _load_pair(args, cp)
    sub = _subcarrier(args, cp)
    m_ap, m_sta = pair_traces(ap, sta, sub, gap_policy="drop_both")
    i_ap, i_sta = pair_traces(ap, sta, sub, gap_policy="interpolate_linear")
    x, y = m_ap.values, m_sta.values
    max_lag = min(200, (len(x) - 1) // 2)
    est = xcorr_lag(x, y, max_lag)
    params = default_params(len(i_ap.values), i_ap.rate_hz)
    cmap = wavelet_coherence(i_ap.values, i_sta.values, params)
    report = {
        "config": resolved,
        "subcarrier": sub,
        "n_paired_samples": len(x),
        "pearson": pearson(x, y),
        "jeffrey_divergence": jeffrey_divergence(x, y, DivergenceConfig()),
        "wasserstein": wasserstein_1d(x, y),
        "lag_estimate": {
            "lag": est.lag,
            "peak_corr": est.peak_corr,
            "max_lag": est.max_lag,
        },
        "wc_summary": coherence_summary(cmap),
    }
    text = json.dumps(_jsonable(report), indent=2)
    if args.out:
        Path(args.out).write_text(text)
    else:
        print(text)
    return EXIT_OK


def cmd_reconstruct(args, cp) -> int:
    ap, sta, resolved = _load_pair(args, cp)
    sub = _subcarrier(args, cp)
    i_ap, i_sta = pair_traces(ap, sta, sub, gap_policy="interpolate_linear")
    pipeline = args.pipeline or _cfg_get(cp, "pipelines", "pipeline", "wt")
    if pipeline not in PIPELINES:
        print(f"unknown pipeline {pipeline!r}", file=sys.stderr)
        return EXIT_USAGE
    sync = (not args.no_sync) if getattr(args, "no_sync", None) is not None else True
    scfg = SessionConfig(pipeline=pipeline, sync=sync)
    pre = preprocess_pair(i_ap, i_sta, scfg)
    out = _out_dir(args)
    path = out / f"reconstructed_{pipeline}.csv"
    seqs = i_ap.seqs[scfg.probe_len:scfg.probe_len + len(pre.x)]
    with open(path, "w", newline="") as f:
        f.write("seq,ap,sta\n")
        for s, va, vs in zip(seqs, pre.x, pre.y):
            f.write(f"{s},{float(va)!r},{float(vs)!r}\n")
    meta = {
        "config": resolved,
        "pipeline": pipeline,
        "sync": sync,
        "lag": pre.lag,
        "band_hz": list(pre.band_x.band),
        "alpha": pre.band.alpha,
        "beta": pre.band.beta,
        "pearson_before": pearson(i_ap.values, i_sta.values),
        "pearson_after": pearson(pre.x, pre.y),
    }
    with open(out / f"reconstructed_{pipeline}.json", "w") as f:
        json.dump(_jsonable(meta), f, indent=2)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_keygen(args, cp) -> int:
    ap, sta, resolved = _load_pair(args, cp)
    sub = _subcarrier(args, cp)
    i_ap, i_sta = pair_traces(ap, sta, sub, gap_policy="interpolate_linear")
    pipelines = (args.pipelines.split(",") if args.pipelines
                 else _cfg_get(cp, "pipelines", "list", "raw,golay,fft,wpt,wt").split(","))
    thresholds = tuple(
        int(t) for t in (args.thresholds or _cfg_get(cp, "pipelines", "thresholds",
                                                     "5,15,20")).split(",")
    )
    sync = (not args.no_sync) if args.no_sync is not None else True
    out = _out_dir(args)
    rows = []
    scenario = args.preset or _cfg_get(cp, "input", "preset", "dataset")
    for pipe in pipelines:
        pipe = pipe.strip()
        if pipe not in PIPELINES:
            print(f"unknown pipeline {pipe!r}", file=sys.stderr)
            return EXIT_USAGE
        scfg = SessionConfig(pipeline=pipe, sync=sync, error_thresholds=thresholds)
        report = wskg_session(i_ap, i_sta, scfg)
        payload = report.to_dict()
        payload["config"] = resolved
        with open(out / f"session_{pipe}.json", "w") as f:
            json.dump(_jsonable(payload), f, indent=2)
        for st in report.per_threshold:
            rows.append((pipe, scenario, st.error_threshold, st.kgr,
                         st.mean_ber, report.overall_ber))
    csv_path = out / "keygen_comparison.csv"
    with open(csv_path, "w", newline="") as f:
        f.write("pipeline,scenario,theta,kgr,mean_ber,overall_ber\n")
        for pipe, scen, theta, kgr, mber, ober in rows:
            mb = "" if mber is None else repr(mber)
            ob = "" if ober is None else repr(ober)
            f.write(f"{pipe},{scen},{theta},{kgr!r},{mb},{ob}\n")
    print(f"wrote {csv_path} and per-pipeline session JSON")
    return EXIT_OK


def cmd_auth(args, cp) -> int:
    trials = int(args.trials if args.trials is not None
                 else _cfg_get(cp, "auth", "trials", 12))
    seed = int(args.seed if args.seed is not None
               else _cfg_get(cp, "auth", "seed", 0))
    policy = AuthPolicy(
        min_corr=float(args.min_corr if args.min_corr is not None
                       else _cfg_get(cp, "auth", "min_corr", 0.4)),
        max_shift=int(args.max_shift if args.max_shift is not None
                      else _cfg_get(cp, "auth", "max_shift", 50)),
    )
    key = b"csirecip-demo-identity-key"
    preset = args.preset or _cfg_get(cp, "input", "preset", "los-short")
    duration = policy.probe_len / 10.0
    decisions = []
    confusion = {"legit_accept": 0, "legit_reject": 0,
                 "replay_accept": 0, "replay_reject": 0}
    for i in range(trials):
        cfg = chansim.preset(preset, duration_s=duration, seed=seed + i,
                             snr_db=15.0, lag_samples=1)
        ap, sta, _ = chansim.gen_pair(cfg)
        x = magnitude_series(ap, 6).values
        y = magnitude_series(sta, 6).values
        d = run_handshake(x, y, policy, key)
        confusion["legit_accept" if d.accepted else "legit_reject"] += 1
        decisions.append({"trial": i, "kind": "legitimate", **d.to_dict()})

        attacker = chansim.gen_attacker(cfg, mode="independent")
        fresh = magnitude_series(attacker, 6).values
        s3 = sign_csi(y, key)
        d = replay_attack(x, s3, fresh, policy, key)
        confusion["replay_accept" if d.accepted else "replay_reject"] += 1
        decisions.append({"trial": i, "kind": "replay", **d.to_dict()})
    out = _out_dir(args)
    payload = {
        "policy": {"min_corr": policy.min_corr, "max_shift": policy.max_shift,
                   "probe_len": policy.probe_len},
        "preset": preset,
        "trials": trials,
        "confusion": confusion,
        "decisions": decisions,
    }
    with open(out / "auth_decisions.json", "w") as f:
        json.dump(_jsonable(payload), f, indent=2)
    print(json.dumps(confusion, indent=2))
    return EXIT_OK


def cmd_report(args, cp) -> int:
    """Aggregate session JSON files into one comparison CSV."""
    src = Path(args.sessions_dir)
    files = sorted(src.glob("session_*.json"))
    if not files:
        print(f"no session_*.json under {src}", file=sys.stderr)
        return EXIT_DATA
    out = _out_dir(args)
    csv_path = out / "report.csv"
    with open(csv_path, "w", newline="") as f:
        f.write("pipeline,sync,theta,kgr,mean_ber,overall_ber,blocks,lag\n")
        for path in files:
            d = json.loads(path.read_text())
            for st in d["per_threshold"]:
                mb = "" if st["mean_ber"] is None else repr(st["mean_ber"])
                ob = "" if d["overall_ber"] is None else repr(d["overall_ber"])
                f.write(
                    f"{d['pipeline']},{d['sync']},{st['error_threshold']},"
                    f"{st['kgr']!r},{mb},{ob},{d['blocks']},{d['lag']}\n"
                )
    print(f"wrote {csv_path}")
    return EXIT_OK


def _add_common(p):
    p.add_argument("--config", help="INI config file; flags override it")
    p.add_argument("--out-dir", help="output directory (or $CSIRECIP_OUT_DIR)")
    p.add_argument("--preset", help="chansim scenario preset")
    p.add_argument("--duration", type=float, help="simulated duration, seconds")
    p.add_argument("--seed", type=int, help="simulation seed")
    p.add_argument("--snr-db", type=float, help="override preset SNR")
    p.add_argument("--lag", type=int, help="override preset lag, samples")
    p.add_argument("--ap", help="AP trace CSV (dataset mode)")
    p.add_argument("--sta", help="STA trace CSV (dataset mode)")
    p.add_argument("--subcarrier", type=int, help="subcarrier index (default 6)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="csirecip",
        description="Channel-reciprocity experiments on CSI traces",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="write a simulated AP/STA trace pair")
    _add_common(p)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("metrics", help="reciprocity metrics for a trace pair")
    _add_common(p)
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(fn=cmd_metrics)

    p = sub.add_parser("reconstruct", help="run one preprocessing pipeline")
    _add_common(p)
    p.add_argument("--pipeline", choices=PIPELINES)
    p.add_argument("--no-sync", action="store_true", default=None,
                   help="skip lag synchronization")
    p.set_defaults(fn=cmd_reconstruct)

    p = sub.add_parser("keygen", help="key-generation session comparison")
    _add_common(p)
    p.add_argument("--pipelines", help="comma list, default raw,golay,fft,wpt,wt")
    p.add_argument("--thresholds", help="comma list of bit-error thresholds")
    p.add_argument("--no-sync", action="store_true", default=None,
                   help="disable lag synchronization")
    p.set_defaults(fn=cmd_keygen)

    p = sub.add_parser("auth", help="legitimate vs replay handshake trials")
    _add_common(p)
    p.add_argument("--trials", type=int, help="trials per class (default 12)")
    p.add_argument("--min-corr", type=float, help="policy correlation floor")
    p.add_argument("--max-shift", type=int, help="policy shift ceiling")
    p.set_defaults(fn=cmd_auth)

    p = sub.add_parser("report", help="aggregate session JSONs into CSV")
    p.add_argument("sessions_dir", help="directory holding session_*.json")
    p.add_argument("--out-dir", help="output directory")
    p.add_argument("--config", help=argparse.SUPPRESS)
    p.set_defaults(fn=cmd_report)

    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK
    try:
        cp = _load_config(getattr(args, "config", None))
        return args.fn(args, cp)
    except (CsiRecipError, FileNotFoundError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
