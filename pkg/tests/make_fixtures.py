"""Regenerate the frozen reference fixtures.

Run ``python3 tests/make_fixtures.py [jy|coeffs|golden|all]`` from the
repository root.  Outputs are written under ``tests/fixtures``.
"""

from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

import mpmath as mp
import numpy as np

HERE = Path(__file__).resolve().parent
FIX = HERE / "fixtures"
sys.path.insert(0, str(HERE))

from oracle import spherical_jy  # noqa: E402

JY_SEED = 20240611
JY_POINTS = 10_000


def jy_points(seed: int = JY_SEED, count: int = JY_POINTS):
    rng = np.random.default_rng(seed)
    n = rng.integers(0, 201, count)
    x = 10.0 ** rng.uniform(-3.0, 4.0, count)
    return [(int(a), float(b)) for a, b in zip(n, x)]


def make_jy():
    rows = []
    for i, (n, x) in enumerate(jy_points()):
        j, jp, y, yp = spherical_jy(n, x, 40)
        rows.append({"n": n, "x": x.hex(), "j": mp.nstr(j, 30), "jp": mp.nstr(jp, 30), "y": mp.nstr(y, 30), "yp": mp.nstr(yp, 30)})
        if i % 500 == 0:
            print(f"jy {i}", flush=True)
    doc = {"seed": JY_SEED, "digits": 40, "x_encoding": "float.hex", "points": rows}
    (FIX / "oracle_jy.json").write_text(json.dumps(doc, indent=0) + "\n")


def mp_coefficients(n: int, lam, w, digits: int = 50):
    """``(r_n, t_n)`` from the series reference at ``digits`` digits."""
    with mp.workdps(digits + 10):
        lam = mp.mpf(lam)
        w = mp.mpf(w)
        j, jp, y, yp = spherical_jy(n, w, digits + 10)
        jl, jpl, _, _ = spherical_jy(n, lam * w, digits + 10)
        u = jp * jl - lam * jpl * j
        v = yp * jl - lam * jpl * y
        D = mp.mpc(u, v)
        r = -u / D
        t = mp.mpc(0, 1) / (w * w * D)
        return r, t


COEFF_CASES = [
    (2.0, 0.3, 12), (0.5, 0.3, 12), (10.0, 0.05, 8), (0.1, 2.0, 12), (5.0, 1.7, 20),
    (50.0, 0.02, 6), (1.5, 10.0, 30), (0.9, 25.0, 45), (3.0, 1e-3, 6), (20.0, 0.31130447515855647 / 2, 10),
]


def make_coeffs():
    out = []
    for lam, w, n_max in COEFF_CASES:
        for n in range(n_max + 1):
            r, t = mp_coefficients(n, lam, w)
            out.append({"lambda": lam, "omega_eps": w, "n": n,
                        "re_r": mp.nstr(r.real, 25), "im_r": mp.nstr(r.imag, 25),
                        "re_t": mp.nstr(t.real, 25), "im_t": mp.nstr(t.imag, 25)})
    (FIX / "oracle_coeffs.json").write_text(json.dumps({"digits": 50, "rows": out}, indent=1) + "\n")


GOLDEN = {
    "coeffs_l2_w03.csv": ["coeffs", "--lambda", "2", "--omega-eps", "0.3", "--n-max", "12", "--format", "csv"],
    "coeffs_l2_w03.json": ["coeffs", "--lambda", "2", "--omega-eps", "0.3", "--n-max", "12", "--format", "json"],
    "coeffs_physical.json": ["coeffs", "--q", "4", "--q0", "1", "--omega", "3", "--eps", "0.1", "--n-max", "4", "--format", "json"],
    "field_l2_w03.csv": ["field", "--lambda", "2", "--omega-eps", "0.3", "--format", "csv",
                          "--at", "0,0,0;0.5,0.3,0.2;1,0.3,0.2;1,1.2,-0.7;3,2.5,1.0"],
    "field_l05_w2.json": ["field", "--lambda", "0.5", "--omega-eps", "2", "--format", "json",
                           "--at", "0.25,0.1,0;1,1.0,0.5;4,2.0,3.0"],
    "field_modal.csv": ["field", "--lambda", "3", "--omega-eps", "0.7", "--format", "csv", "--at", "1,0.4,0.1;2,1.1,2.2",
                         "--incident", '{"kind": "modal", "coeffs": [{"n": 1, "m": 0, "re": 1.0, "im": 0.0}, {"n": 2, "m": -1, "re": 0.0, "im": 0.5}]}'],
    "norms_scattered.json": ["norms", "--lambda", "2", "--omega-eps", "0.3", "--kind", "scattered", "--r-over-eps", "2"],
    "norms_incident_pq.json": ["norms", "--lambda", "2", "--omega-eps", "0.3", "--kind", "incident",
                                "--sigma", "-0.3333333333333333", "--p-index", "0", "--q-index", "5", "--kappa", "1.5"],
    "norms_transmitted.csv": ["norms", "--lambda", "0.5", "--omega-eps", "1.0", "--kind", "transmitted", "--r-over-eps", "0.5",
                               "--format", "csv", "--incident", '{"kind": "plane_wave", "direction": [0, 0, 1], "n_max": 8}'],
    "resonances_t15_l10.json": ["resonances", "--t", "1.5", "--lambda", "10"],
    "resonances_n3_l50.json": ["resonances", "--n", "3", "--lambda", "50", "--x-max", "0.5"],
    "resonances_below.json": ["resonances", "--t", "2.5", "--lambda", "1.05"],
    "excluded_mode0.json": ["excluded-set", "--lambda", "20", "--mode", "0", "--tau", "0.5"],
    "excluded_mode5.csv": ["excluded-set", "--lambda", "10", "--mode", "5", "--tau", "0.1", "--format", "csv"],
    "excluded_empty.json": ["excluded-set", "--lambda", "50", "--eps", "0.001"],
    "certify_lowcontrast.json": ["certify", "--suite", "lowcontrast"],
    "certify_blowup.json": ["certify", "--suite", "blowup"],
    "certify_hankel.table": ["certify", "--suite", "hankel", "--format", "table"],
}


def run_cli(args, out: Path):
    cmd = [sys.executable, "-m", "ballscatter.cli", *args, "--out", str(out)]
    return subprocess.run(cmd, capture_output=True, text=True)


def make_golden():
    gdir = FIX / "golden"
    gdir.mkdir(exist_ok=True)
    for name, args in GOLDEN.items():
        proc = run_cli(args, gdir / name)
        if proc.returncode != 0:
            raise SystemExit(f"{name}: exit {proc.returncode}: {proc.stderr}")
    (gdir / "commands.json").write_text(json.dumps(GOLDEN, indent=1) + "\n")


if __name__ == "__main__":
    what = sys.argv[1] if len(sys.argv) > 1 else "all"
    FIX.mkdir(exist_ok=True)
    if what in ("coeffs", "all"):
        make_coeffs()
    if what in ("golden", "all"):
        make_golden()
    if what in ("jy", "all"):
        make_jy()
