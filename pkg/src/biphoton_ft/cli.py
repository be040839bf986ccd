"""Command-line front end.

    biphoton-ft simulate-histogram --config run.yaml --out out/
    biphoton-ft simulate-demo      ...
    biphoton-ft simulate-sweep     ...  --threads 4
    biphoton-ft reconstruct        ...
    biphoton-ft compare            ...
    biphoton-ft analytic           ...

Exit status: 0 on success, 1 for configuration errors, 2 for runtime errors.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path


from . import io
from .analysis import chi2_against_model, chi2_two_sample, dominant_ripple_period, fit_oscillation_frequency
from .config import ConfigError, ScenarioConfig, dump_config, parse_config
from .detection import (
    expected_first_bin_count,
    histogram_coincidences,
    run_frequency_sweep,
)
from .modulator import (
    ModulatorPair,
    Open,
    Sinusoid,
    modulator_correlation,
    modulator_correlation_analytic,
)
from .montecarlo import expected_coincidence_rate, generate_pairs, make_rng, simulate, write_events_csv
from .reconstruct import (
    compare,
    cosine_transform,
    forward_transform,
    model_histogram,
    one_point_scale,
    remove_dc,
    synthetic_trace,
)
from .waveform import g2_zero

COMMANDS = {
    "simulate-histogram": "histogram",
    "simulate-demo": "modulation-demo",
    "simulate-sweep": "sweep",
    "reconstruct": "reconstruct",
    "compare": "compare",
    "analytic": "analytic",
}


def _fmt_ns(x):
    return f"{x * 1e9:.3f}"


def _fmt_mhz(x):
    return f"{x * 1e-6:.6f}"


def _histogram(cfg: ScenarioConfig, events, duration):
    h = cfg.histogram
    return histogram_coincidences(events, h["width"], (h["start"], h["stop"]), integration_time=duration)


def run_histogram(cfg: ScenarioConfig, out: Path) -> list[Path]:
    events = simulate(cfg.sim, stream=0)
    hist = _histogram(cfg, events, cfg.sim.duration)
    files = [out / "histogram.csv", out / "metrics.txt"]
    io.write_histogram(files[0], hist)
    io.write_metrics(files[1], {"coincidences": len(events), "binned": int(hist.total()),
                                "dropped": hist.dropped, "duration_s": cfg.sim.duration})
    if cfg.dump_events:
        files.append(out / "events.csv")
        write_events_csv(files[-1], events)
    return files


def run_demo(cfg: ScenarioConfig, out: Path) -> list[Path]:
    """Modulated histogram next to an unmodulated run and the model curve."""
    sim = cfg.sim
    rng = make_rng(sim.seed, 0)
    n_pairs = generate_pairs(sim, rng)[0].size
    events = simulate(sim, stream=0)
    reference = simulate(sim.with_(modulators=ModulatorPair(Open(), Open())), stream=1)
    hist = _histogram(cfg, events, sim.duration)
    ref_hist = _histogram(cfg, reference, sim.duration)
    lag = hist.centers - sim.delay
    expected = model_histogram(sim.source, hist.width, (hist.origin, hist.edges[-1]), sim.delay)
    expected.counts = sim.duration * expected_coincidence_rate(sim, lag, hist.width)

    chi_shape, dof_shape = chi2_two_sample(hist, ref_hist)
    chi_model, dof_model = chi2_against_model(hist.counts, expected.counts)
    metrics = {
        "pairs_generated": n_pairs,
        "coincidences": len(events),
        "coincidences_unmodulated": len(reference),
        "survival_fraction": len(events) / max(n_pairs, 1),
        "counts_ratio": float(hist.total()) / max(float(ref_hist.total()), 1.0),
        "chi2_dof_vs_unmodulated": chi_shape,
        "dof_vs_unmodulated": dof_shape,
        "chi2_dof_vs_model": chi_model,
        "dof_vs_model": dof_model,
    }
    m1, m2 = sim.modulators.m1, sim.modulators.m2
    if isinstance(m1, Sinusoid) and isinstance(m2, Sinusoid) and m1.freq == m2.freq and m1.freq > 0:
        baseline = g2_zero(sim.source, lag)
        nu, err = fit_oscillation_frequency(hist, baseline)
        metrics["fitted_modulation_mhz"] = nu * 1e-6
        metrics["fitted_modulation_err_mhz"] = err * 1e-6
        metrics["applied_mhz"] = m1.freq * 1e-6
    files = [out / "histogram.csv", out / "unmodulated.csv", out / "expected.csv", out / "metrics.txt"]
    io.write_histogram(files[0], hist)
    io.write_histogram(files[1], ref_hist)
    io.write_histogram(files[2], expected)
    io.write_metrics(files[3], metrics)
    return files


def _simulated_trace(cfg: ScenarioConfig, threads: int):
    s = cfg.sweep
    return run_frequency_sweep(cfg.sim, cfg.f_grid, s["integration"], slow_width=s["slow_width"],
                               origin=s["origin"], threads=threads)


def run_sweep(cfg: ScenarioConfig, out: Path, threads: int) -> list[Path]:
    trace = _simulated_trace(cfg, threads)
    expected = expected_first_bin_count(cfg.sim, trace.freqs, trace.integration_time)
    period = dominant_ripple_period(trace)
    files = [out / "trace.csv", out / "expected_trace.csv", out / "metrics.txt"]
    io.write_trace(files[0], trace)
    io.write_curve(files[1], io.TRACE_COLUMNS, trace.freqs, expected, _fmt_mhz)
    io.write_metrics(files[2], {
        "points": trace.freqs.size,
        "integration_s": trace.integration_time,
        "total_counts": int(trace.counts.sum()),
        "ripple_period_applied_mhz": period * 1e-6,
        "ripple_period_observed_mhz": 2 * period * 1e-6,
        "delay_ripple_applied_mhz": (0.5 / cfg.sim.delay * 1e-6) if cfg.sim.delay > 0 else float("nan"),
    })
    return files


def _trace(cfg: ScenarioConfig, threads: int):
    rec = cfg.reconstruct
    if rec["source"] == "files":
        trace = io.read_trace(rec["trace"])
        if rec["static_zero"]:
            trace.static_phase = cfg.sim.modulators.m1.phase if isinstance(cfg.sim.modulators.m1, Sinusoid) else 0.0
        return trace
    if rec["source"] == "simulate":
        return _simulated_trace(cfg, threads)
    return synthetic_trace(cfg.spec, cfg.f_grid, cfg.sim.delay)


def _reference(cfg: ScenarioConfig):
    rec = cfg.reconstruct
    h = cfg.histogram
    if rec["source"] == "files":
        return io.read_histogram(rec["reference"]) if rec["reference"] else None
    if rec["source"] == "simulate":
        duration = rec["reference_duration"] or cfg.sim.duration
        sim = cfg.sim.with_(modulators=ModulatorPair(Open(), Open()), duration=duration)
        return _histogram(cfg, simulate(sim, stream=10 ** 6), duration)
    return model_histogram(cfg.spec, h["width"], (h["start"], h["stop"]), cfg.sim.delay)


def _reconstruct(cfg: ScenarioConfig, threads: int):
    rec = cfg.reconstruct
    trace = _trace(cfg, threads)
    clean = remove_dc(trace, rec["dc_strategy"], rec["tail_fraction"])
    return trace, cosine_transform(clean, cfg.tau_grid)


def run_reconstruct(cfg: ScenarioConfig, out: Path, threads: int) -> list[Path]:
    trace, recon = _reconstruct(cfg, threads)
    reference = _reference(cfg) if cfg.reconstruct["reference"] or cfg.reconstruct["source"] != "files" else None
    if reference is not None:
        recon = one_point_scale(recon, reference, cfg.reconstruct["guard"])
    if cfg.reconstruct["subtract_delay"]:
        recon.tau = recon.tau - cfg.sim.delay
    files = [out / "reconstruction.csv"]
    io.write_reconstruction(files[0], recon)
    if cfg.reconstruct["source"] != "files":
        files.append(out / "trace.csv")
        io.write_trace(files[-1], trace)
    return files


def run_compare(cfg: ScenarioConfig, out: Path, threads: int) -> list[Path]:
    trace, recon = _reconstruct(cfg, threads)
    reference = _reference(cfg)
    guard = cfg.reconstruct["guard"]
    scaled = one_point_scale(recon, reference, guard)
    metrics = compare(scaled, reference, guard)
    files = [out / "reconstruction.csv", out / "reference.csv", out / "metrics.txt"]
    io.write_reconstruction(files[0], scaled)
    io.write_histogram(files[1], reference)
    io.write_metrics(files[2], {**metrics.as_dict(), "scale": scaled.scale, "dc": scaled.dc,
                                "source": cfg.reconstruct["source"]})
    return files


def run_analytic(cfg: ScenarioConfig, out: Path) -> list[Path]:
    tau = cfg.tau_grid
    pair = cfg.sim.modulators
    try:
        m = modulator_correlation_analytic(pair, tau)
    except ValueError:
        m = modulator_correlation(pair, tau)
    files = [out / "modulator_correlation.csv", out / "g2_zero.csv", out / "forward_transform.csv"]
    io.write_curve(files[0], io.RECONSTRUCTION_COLUMNS, tau, m, _fmt_ns)
    io.write_curve(files[1], io.RECONSTRUCTION_COLUMNS, tau, g2_zero(cfg.spec, tau), _fmt_ns)
    io.write_curve(files[2], ("applied_freq_mhz", "value"), cfg.f_grid,
                   forward_transform(cfg.spec, cfg.f_grid), _fmt_mhz)
    return files


def run_scenario(cfg: ScenarioConfig, out_dir, threads: int = 1) -> list[Path]:
    """Run ``cfg`` and write its files into ``out_dir``; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    scenario = cfg.scenario
    if scenario == "histogram":
        files = run_histogram(cfg, out)
    elif scenario == "modulation-demo":
        files = run_demo(cfg, out)
    elif scenario == "sweep":
        files = run_sweep(cfg, out, threads)
    elif scenario == "reconstruct":
        files = run_reconstruct(cfg, out, threads)
    elif scenario == "compare":
        files = run_compare(cfg, out, threads)
    else:
        files = run_analytic(cfg, out)
    resolved = out / "config.resolved.yaml"
    resolved.write_text(dump_config(cfg))
    return files + [resolved]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="biphoton-ft",
                                     description="Simulate and reconstruct biphoton correlations "
                                                 "measured with modulators and slow detectors.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="YAML scenario file (defaults used when omitted)")
        p.add_argument("--seed", type=int, help="override the config seed (unsigned 64-bit)")
        p.add_argument("--out", default="out", help="output directory (default: out)")
        p.add_argument("--threads", type=int, default=1, help="worker threads for sweep points")
        if name in ("reconstruct", "compare"):
            p.add_argument("--trace", help="trace CSV; implies reconstruct.source=files")
            p.add_argument("--reference", help="reference histogram CSV")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    scenario = COMMANDS[args.command]
    try:
        text = Path(args.config).read_text() if args.config else None
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 1
    overrides: dict = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if getattr(args, "trace", None):
        overrides.setdefault("reconstruct", {}).update(source="files", trace=args.trace)
    if getattr(args, "reference", None):
        overrides.setdefault("reconstruct", {})["reference"] = args.reference
    try:
        if args.threads < 1:
            raise ConfigError("--threads: must be >= 1")
        cfg = parse_config(text, scenario, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        run_scenario(cfg, args.out, args.threads)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
