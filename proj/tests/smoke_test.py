"""End-to-end smoke checks of the Python bindings.

The heavy validation lives in the C++ test suites; this only proves the
bindings expose working, consistent entry points.
"""
import json
import math
import shutil
import sys
import tempfile
from pathlib import Path

import mqsim


def check(cond, label):
    if not cond:
        print(f"FAIL: {label}")
        sys.exit(1)
    print(f"ok: {label}")


def main():
    # spectrum + paired-state parity
    sector = mqsim.SectorSpec(10, 10)
    spec = mqsim.cosphi_spectrum(sector)
    check(len(spec) == 21, "spectrum length")
    check(abs(spec[0] + 1.0) < 1e-14 and abs(spec[-1] - 1.0) < 1e-14,
          "spectrum endpoints")
    paired = mqsim.symmetric_pair_state(10)
    odd = max(abs(a) for a in paired.amps[1::2])
    check(odd == 0.0, "paired-state parity")
    check(abs(mqsim.cosphi_expectation(paired)) < 1e-12, "paired-state phase")

    # transform round trip
    num = mqsim.plusminus_to_number(paired)
    back = mqsim.number_to_plusminus(num)
    rt = max(abs(a - b) for a, b in zip(back.amps, paired.amps))
    check(rt < 1e-12, "basis round trip")

    # pulse moments at a reduced working point
    pulse = mqsim.CouplingParams(1.0, math.pi / 4, math.asin(math.sqrt(0.03)))
    joint = mqsim.evolve_general_alpha(mqsim.SectorSpec(100, 100), pulse)
    hist = mqsim.n0_distribution(joint)
    check(abs(hist.mean() - 3.0) < 1e-9, "transfer mean")
    check(hist.variance() > hist.mean(), "super-poissonian transfer")

    # conditioning + exception mapping
    state, prob = mqsim.project_on_n0(joint, 3)
    check(0 < prob < 1 and abs(state.norm2() - 1.0) < 1e-9, "projection")
    try:
        mqsim.project_on_n0(joint, joint.n0_max + 1)
        check(False, "out-of-range outcome raises")
    except mqsim.Error:
        check(True, "out-of-range outcome raises")
    try:
        mqsim.CouplingParams(-1.0, 0.5, 0.1).validate(mqsim.SectorSpec(5, 5))
        check(False, "config error raises")
    except mqsim.ConfigError:
        check(True, "config error raises")

    # one stochastic record, deterministically
    params = mqsim.ContinuousParams(1.0 / 400.0, 5, 77)
    initial = mqsim.symmetric_pair_state(100)
    rec_a = mqsim.run_trajectory(mqsim.SectorSpec(100, 100), params, initial, 0)
    rec_b = mqsim.run_trajectory(mqsim.SectorSpec(100, 100), params, initial, 0)
    check(rec_a.taus == rec_b.taus, "trajectory determinism")
    check(len(rec_a.taus) == 5 and rec_a.final_state.n_removed == 5,
          "detection bookkeeping")

    # fringe analysis of a synthetic comb
    comb = mqsim.CountHistogram()
    comb.observable = "delta"
    comb.values = list(range(-8, 9, 2))
    comb.probs = [1.0 if v % 4 == 0 else 0.0 for v in range(-8, 9, 2)]
    total = sum(comb.probs)
    comb.probs = [p / total for p in comb.probs]
    report = mqsim.analyze_fringes(comb)
    check(report.peak_spacing == 4 and report.visibility == 1.0,
          "fringe analysis")

    # collapse kernel
    n = 2048
    grid = [-10.0 + (i + 0.5) * (20.0 / n) for i in range(n)]
    psi = mqsim.collapse.Wavefunction1D()
    psi.grid = grid
    psi.amplitudes = [complex(math.exp(-x * x / 8.0), 0.0) for x in grid]
    psi.normalize()
    f = mqsim.collapse.MeasuredFunction.sample(grid, lambda x: x * x,
                                               lambda x: 2.0 * x)
    g = mqsim.collapse.DetectorKernel(4.0, 0.6)
    out = mqsim.collapse.collapse(psi, f, g)
    check(abs(out.norm2() - 1.0) < 1e-10, "collapse normalization")
    check(mqsim.collapse.peaks_resolved(out, g, [-2.0, 2.0], f),
          "collapse resolution predicate")

    # config round trip + a full run through the driver
    cfg = mqsim.RunConfig()
    mqsim.apply_desk_profile(cfg)
    cfg.mode = mqsim.RunMode.coherent
    cfg.seed = 20260823
    again = mqsim.config_from_json_text(mqsim.config_to_json_text(cfg))
    check(mqsim.config_to_json_text(again) == mqsim.config_to_json_text(cfg),
          "config json round trip")
    check(mqsim.validate_config(cfg) == [], "config validates")

    out_dir = Path(tempfile.mkdtemp(prefix="mqsim_smoke_"))
    try:
        cfg.out_dir = str(out_dir)
        check(mqsim.run(cfg) == 0, "driver run")
        hist_file = out_dir / "n0_distribution.csv"
        check(hist_file.exists(), "histogram file written")
        lines = hist_file.read_text().splitlines()
        header = [ln for ln in lines if ln.startswith("# ")]
        check(any(ln.startswith("# config:") for ln in header)
              and any(ln.startswith("# seed:") for ln in header),
              "provenance header present")
    finally:
        shutil.rmtree(out_dir, ignore_errors=True)

    print("smoke test passed")


if __name__ == "__main__":
    main()
