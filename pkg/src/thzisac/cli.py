"""Experiment harness: Monte-Carlo orchestration and CSV persistence.

CSV schema (UTF-8, LF, header row):

    experiment,waveform,M,N,snr_db,seed,metric,value

Values use %.9e formatting; rows are sorted by (waveform, M, N, snr, metric)
so reruns diff cleanly.  Per-trial seeds derive as master seed XOR global
trial index, so output bytes are independent of the worker count.

Exit codes: 0 success, 2 configuration error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import channel as ch
from . import config as cfgmod
from . import metrics, numerics, rxcomm, sensing, waveform

CSV_HEADER = "experiment,waveform,M,N,snr_db,seed,metric,value"
OUTDIR_ENV = "THZISAC_OUTDIR"

_CHUNK_FRAMES = 500
_CHUNK_TRIALS = 25


def _papr_task(args):
    wf_cfg, oversample, seed, start, count = args
    return metrics.frame_paprs(wf_cfg, count, oversample, seed, start=start)


def _sense_task(args):
    wf_cfg, scenario, snr_db, seed, start, count = args
    r_err = np.empty(count)
    v_err = np.empty(count)
    for i in range(count):
        est = sensing.estimate_trial(wf_cfg, scenario, snr_db,
                                     numerics.derive_seed(seed, start + i))
        r_err[i] = est.range_m - scenario.range_m
        v_err[i] = est.velocity_mps - scenario.velocity_mps
    return r_err, v_err


def _ber_trial(wf_cfg, path, snr_db, seed):
    rng = numerics.make_rng(seed)
    pilots = waveform.resource_map(wf_cfg, "none")
    bits = rng.integers(0, 2, waveform.bits_per_frame(wf_cfg, pilots),
                        dtype=np.uint8)
    frame = waveform.modulate(bits, pilots, wf_cfg)
    spec = ch.ChannelSpec(paths=(path,), snr_db=snr_db)
    rx = ch.apply_channel(frame.samples, spec, wf_cfg.sample_rate, rng,
                          cp_len=wf_cfg.cp_len)
    grid = waveform.demodulate(rx, wf_cfg)
    if wf_cfg.kind in waveform.TF_KINDS:
        gains = rxcomm.tf_channel_gains((path,), wf_cfg)
        eq = rxcomm.equalize_onetap(grid, gains, snr_db=snr_db)
    else:
        op = rxcomm.DDChannelOperator((path,), wf_cfg)
        ridge = 10.0 ** (-snr_db / 10.0)
        eq = rxcomm.equalize_iterative_ls(grid, op, ridge=ridge).grid
    _, ber = rxcomm.detect_bits(eq, wf_cfg, pilots, reference_bits=bits)
    return ber * bits.size, bits.size


def _ber_task(args):
    wf_cfg, path, snr_db, seed, start, count = args
    errors = 0.0
    total = 0
    for i in range(count):
        e, n = _ber_trial(wf_cfg, path, snr_db,
                          numerics.derive_seed(seed, start + i))
        errors += e
        total += n
    return errors, total


def _chunks(total: int, size: int):
    return [(lo, min(size, total - lo)) for lo in range(0, total, size)]


def _run_tasks(fn, tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def run_experiment(cfg: cfgmod.ExperimentConfig, workers: int = 1):
    """Execute the configured experiment; returns the list of CSV rows."""
    rows = []
    scenario = ch.SensingScenario(range_m=cfg.range_m,
                                  velocity_mps=cfg.velocity_mps)
    for wf_cfg in cfg.combos():
        if cfg.experiment == "papr":
            tasks = [(wf_cfg, cfg.oversample, cfg.seed, lo, n)
                     for lo, n in _chunks(cfg.trials, _CHUNK_FRAMES)]
            paprs = np.concatenate(_run_tasks(_papr_task, tasks, workers))
            curve = metrics.ccdf_from_paprs(paprs)
            for axis, prob in zip(curve.papr_axis, curve.probability):
                rows.append((cfg.experiment, wf_cfg.kind, wf_cfg.M, wf_cfg.N,
                             "", cfg.seed, f"ccdf[{axis:04.1f}]", prob))
        elif cfg.experiment == "sense":
            for snr in cfg.snr_db:
                tasks = [(wf_cfg, scenario, snr, cfg.seed, lo, n)
                         for lo, n in _chunks(cfg.trials, _CHUNK_TRIALS)]
                parts = _run_tasks(_sense_task, tasks, workers)
                r_err = np.concatenate([p[0] for p in parts])
                v_err = np.concatenate([p[1] for p in parts])
                coarse = sensing.range_resolution(wf_cfg)
                for metric, value in (
                        ("range_rmse_m", np.sqrt(np.mean(r_err ** 2))),
                        ("range_mean_err_m", np.mean(r_err)),
                        ("velocity_rmse_mps", np.sqrt(np.mean(v_err ** 2))),
                        ("outlier_count",
                         float(np.count_nonzero(np.abs(r_err) > coarse)))):
                    rows.append((cfg.experiment, wf_cfg.kind, wf_cfg.M,
                                 wf_cfg.N, snr, cfg.seed, metric, value))
        elif cfg.experiment == "ber":
            path = ch.scenario_to_paths(scenario, cfg.f_c)
            for snr in cfg.snr_db:
                tasks = [(wf_cfg, path, snr, cfg.seed, lo, n)
                         for lo, n in _chunks(cfg.trials, _CHUNK_TRIALS)]
                parts = _run_tasks(_ber_task, tasks, workers)
                errors = sum(p[0] for p in parts)
                total = sum(p[1] for p in parts)
                rows.append((cfg.experiment, wf_cfg.kind, wf_cfg.M, wf_cfg.N,
                             snr, cfg.seed, "ber", errors / total))
        else:  # psd
            nbits = waveform.bits_per_frame(wf_cfg)
            frames = []
            for t in range(cfg.trials):
                rng = numerics.make_rng(numerics.derive_seed(cfg.seed, t))
                bits = rng.integers(0, 2, nbits, dtype=np.uint8)
                pilots = waveform.resource_map(wf_cfg, "none")
                frames.append(waveform.modulate(bits, pilots, wf_cfg).samples)
            spectrum = metrics.psd(np.concatenate(frames), segments=cfg.trials)
            for idx, value in enumerate(spectrum):
                rows.append((cfg.experiment, wf_cfg.kind, wf_cfg.M, wf_cfg.N,
                             "", cfg.seed, f"psd[{idx:05d}]", value))
    return rows


def format_rows(rows) -> str:
    def sort_key(r):
        return (r[1], r[2], r[3], str(r[4]), r[6])
    lines = [CSV_HEADER]
    for exp, wf, m, n, snr, seed, metric, value in sorted(rows, key=sort_key):
        snr_s = "" if snr == "" else f"{snr:g}"
        lines.append(f"{exp},{wf},{m},{n},{snr_s},{seed},{metric},{value:.9e}")
    return "\n".join(lines) + "\n"


def resolve_out(path: str) -> str:
    outdir = os.environ.get(OUTDIR_ENV)
    if outdir and not os.path.isabs(path):
        return os.path.join(outdir, path)
    return path


def write_csv(text: str, path: str):
    """Atomic write: results appear fully or not at all."""
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _summarize(rows, out_path: str):
    combos = sorted({(r[1], r[2], r[3]) for r in rows})
    print(f"wrote {len(rows)} rows to {out_path}")
    for wf, m, n in combos:
        picks = [r for r in rows if (r[1], r[2], r[3]) == (wf, m, n)
                 and r[6] in ("range_rmse_m", "ber")]
        extra = "".join(f"  {r[6]}={r[7]:.3e}" for r in picks)
        print(f"  {wf} M={m} N={n}{extra}")


def _cmd_run(args) -> int:
    cfg = cfgmod.load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.trials is not None:
        cfg.trials = args.trials
    cfg.validate()
    rows = run_experiment(cfg, workers=args.workers)
    if any(not np.isfinite(r[7]) for r in rows):
        raise ArithmeticError("non-finite metric in results")
    out_path = resolve_out(cfg.out)
    write_csv(format_rows(rows), out_path)
    _summarize(rows, out_path)
    return 0


def _cmd_preset(args) -> int:
    text = cfgmod.preset_text(args.name)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote preset {args.name} to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thzisac",
        description="THz ISAC waveform simulation experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run an experiment from a config file")
    p_run.add_argument("config")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--trials", type=int, default=None)
    p_run.add_argument("--workers", type=int, default=1)
    p_run.set_defaults(func=_cmd_run)
    p_pre = sub.add_parser("preset", help="emit a built-in experiment config")
    p_pre.add_argument("name", choices=sorted(cfgmod.PRESETS))
    p_pre.add_argument("--out", default=None)
    p_pre.set_defaults(func=_cmd_preset)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except cfgmod.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # numeric / runtime failure
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
