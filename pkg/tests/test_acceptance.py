"""Acceptance criteria 1-9, one PASS/FAIL line each (repeated in the terminal summary)."""

import itertools
import math
import time

import mpmath as mp
import numpy as np
import pytest

from gtrcell.ase import LinkConfig, average_se
from gtrcell.cli import main
from gtrcell.fading import (
    GtrParams,
    SevereParams,
    Truncated,
    Uniform,
    VonMises,
    rayleigh,
    rician,
    signal_lt,
    zeta1,
    zeta1_prime,
    zeta2,
    zeta3,
)
from gtrcell.interference import NetworkParams, log_lt
from gtrcell.montecarlo import SimConfig, simulate_ase
from gtrcell.numerics import bessel_i0_scaled, kummer_1f1, lower_incomplete_gamma
from gtrcell.report import read_csv

NET = NetworkParams(lam=3e-6, power=3.0, eta=4.0, noise=1e-11)
GRID_FADINGS = {
    "rician_k3": rician(3, 1.0),
    "gtr_u_k5": GtrParams(5, 1.0, 1.0),
    "gtr_t_k5_p0.5": GtrParams(5, 1.0, 1.0, Truncated(0.5)),
}
GRID_R0 = (100.0, 300.0, 600.0)
GRID_S = np.logspace(8, 11, 3)
P_GRID = [round(0.1 * i, 1) for i in range(1, 11)]


def by_method(rows):
    out = {}
    for r in rows:
        out.setdefault(r.method, []).append(r)
    return out


def inversions(values, errs):
    """Count of decreasing steps, and whether each is within the summed error."""
    drops = [(i, values[i] - values[i + 1]) for i in range(len(values) - 1) if values[i + 1] < values[i]]
    within = all(d <= errs[i] + errs[i + 1] for i, d in drops)
    return len(drops), within


@pytest.fixture(scope="module")
def lt_grid():
    start = time.perf_counter()
    out = {}
    for name, fading in GRID_FADINGS.items():
        for r0 in GRID_R0:
            ex, _ = log_lt("exact", NET, fading, r0, GRID_S)
            di, _ = log_lt("direct", NET, fading, r0, GRID_S)
            lb, _ = log_lt("lower_bound", NET, fading, r0, GRID_S)
            out[name, r0] = (np.exp(ex), np.exp(di), np.exp(lb))
    return out, time.perf_counter() - start


@pytest.fixture(scope="module")
def figure1_rows(tmp_path_factory):
    out = tmp_path_factory.mktemp("figure1")
    status = main(["figure1", "--out", str(out), "--format", "both"])
    return status, {s: read_csv(out / f"figure1_{s}.csv") for s in ("gtr_t", "rician", "rayleigh")}, out


@pytest.fixture(scope="module")
def figure2_runs(tmp_path_factory):
    dirs = []
    statuses = []
    for tag, threads in (("a", 1), ("b", 1), ("c", 2)):
        out = tmp_path_factory.mktemp(f"figure2_{tag}")
        statuses.append(main(["figure2", "--seed", "42", "--threads", str(threads),
                              "--out", str(out), "--format", "both"]))
        dirs.append(out)
    return statuses, dirs


def test_criterion_1_lt_equivalence(lt_grid, acceptance):
    grid, elapsed = lt_grid
    worst = max(float(np.max(np.abs(ex - di) / di)) for ex, di, _ in grid.values())
    ok = worst <= 1e-5 and elapsed < 60
    acceptance(1, ok, f"max |exact - direct|/direct = {worst:.2e} over 27 points, {elapsed:.2f} s")


def test_criterion_2_bound_domination(lt_grid, acceptance):
    grid, _ = lt_grid
    strict = all(np.all(lb < ex) for ex, _, lb in grid.values())
    gap = max(float(np.max((ex - lb) / ex)) for ex, _, lb in grid.values())
    acceptance(2, strict, f"lower_bound < exact at all 27 points, max relative gap {gap:.3g}")


def rayleigh_lt_eta4(net, sigma_sq, r0, s):
    a = 2 * sigma_sq * s * net.power
    root = np.sqrt(a)
    return np.exp(-math.pi * net.lam * root * (math.pi / 2 - np.arctan(r0 * r0 / root)))


def rician_signal_lt(k, sigma_sq, p_bar, s):
    beta = 2 * sigma_sq * s * p_bar
    return np.exp(-k * beta / (1 + beta)) / (1 + beta)


def test_criterion_3_reductions(acceptance):
    s = np.logspace(8, 11, 4)
    y = np.logspace(-3, 2, 12)
    checks = {}

    # K = 0 against the arctan form of the Rayleigh LT, η = 4
    k0 = GtrParams(0.0, 1.0, 1.0)
    ref = rayleigh_lt_eta4(NET, 1.0, 200.0, s)
    for method in ("exact", "direct"):
        got = np.exp(log_lt(method, NET, k0, 200.0, s)[0])
        checks[f"K=0 {method}"] = float(np.max(np.abs(got / ref - 1))) <= 1e-6
    checks["K=0 zeta2"] = zeta2(k0, 4.0) == 1.0
    beta = 2.0 * 1e-9 * np.logspace(-2, 2, 9)
    checks["K=0 signal_lt"] = np.allclose(signal_lt(k0, 1e-9, beta / 2e-9), 1 / (1 + beta), rtol=1e-12, atol=0)

    # Δ = 0 with every phase law against Rician closed forms
    rel = 1e-8
    z2_ref = float(mp.hyp1f1(0.5, 2, -3) + mp.mpf(6) / 8 * 3 * mp.hyp1f1(0.5, 3, -3))
    g_ref = np.array([float(mp.gammainc(0.5, 0, v)) for v in y])
    ric = rician(3, 1.0)
    for ph in (Uniform(), Truncated(0.3), VonMises(2.0)):
        p = GtrParams(3, 0.0, 1.0, ph)
        tag = type(ph).__name__
        checks[f"D=0 {tag} zeta1"] = np.allclose(zeta1(p, y), np.exp(-y), rtol=rel, atol=0)
        checks[f"D=0 {tag} zeta2"] = abs(zeta2(p, 4.0) / z2_ref - 1) <= rel
        checks[f"D=0 {tag} zeta3"] = np.allclose(zeta3(p, 4.0, y), g_ref, rtol=rel, atol=0)
        checks[f"D=0 {tag} signal_lt"] = np.allclose(
            signal_lt(p, 1e-9, s), rician_signal_lt(3, 1.0, 1e-9, s), rtol=rel, atol=0)
        for method in ("exact", "lower_bound"):
            got = log_lt(method, NET, p, 200.0, s)[0]
            ref_m = "direct" if method == "exact" else "lower_bound"
            want = log_lt(ref_m, NET, ric, 200.0, s)[0]
            checks[f"D=0 {tag} {method}"] = np.allclose(np.exp(got), np.exp(want), rtol=rel, atol=0)

    # Truncated(1) = Uniform = VonMises(0)
    base = GtrParams(4, 0.9, 1.0)
    for ph in (Truncated(1.0), VonMises(0.0)):
        p = GtrParams(4, 0.9, 1.0, ph)
        tag = type(ph).__name__
        pairs = [
            (zeta1(p, y), zeta1(base, y)),
            (zeta2(p, 4.0), zeta2(base, 4.0)),
            (zeta3(p, 4.0, y), zeta3(base, 4.0, y)),
            (signal_lt(p, 1e-9, s), signal_lt(base, 1e-9, s)),
            (np.exp(log_lt("exact", NET, p, 200.0, s)[0]), np.exp(log_lt("exact", NET, base, 200.0, s)[0])),
            (np.exp(log_lt("lower_bound", NET, p, 200.0, s)[0]),
             np.exp(log_lt("lower_bound", NET, base, 200.0, s)[0])),
        ]
        checks[f"{tag} = Uniform"] = all(np.allclose(a, b, rtol=rel, atol=0) for a, b in pairs)

    bad = [k for k, v in checks.items() if not v]
    acceptance(3, not bad, f"{len(checks) - len(bad)}/{len(checks)} reduction checks" + (f", failed {bad}" if bad else ""))


def test_criterion_4_severe_limit(acceptance):
    k = 1e4
    s = np.logspace(8, 11, 5)
    sev = np.exp(log_lt("severe", NET, SevereParams(2.0, 1.0), 200.0, s)[0])
    ex = np.exp(log_lt("exact", NET, GtrParams(k, 1.0, 2.0 / (2 * (k + 1))), 200.0, s)[0])
    worst = float(np.max(np.abs(sev - ex) / ex))
    acceptance(4, worst <= 1e-2, f"max relative difference {worst:.2e} at K = 1e4 on 5 s points")


CRITERION_5 = {
    "rayleigh/rayleigh": LinkConfig(rayleigh(1.0), rayleigh(1.0)),
    "rician_k3/gtr_u": LinkConfig(rician(3, 1.0), GtrParams(5, 1.0, 1.0)),
    "gtr_t_p0.5/gtr_u": LinkConfig(GtrParams(5, 1.0, 1.0, Truncated(0.5)), GtrParams(5, 1.0, 1.0)),
}


def test_criterion_5_simulation_agreement(acceptance):
    # a region of 30 mean cell radii keeps the edge truncation well below the SE
    sim = SimConfig(realizations=50_000, region_radius_factor=30.0, seed=0)
    parts, ok = [], True
    for name, link in CRITERION_5.items():
        start = time.perf_counter()
        an = average_se(NET, link)
        mc = simulate_ase(sim, NET, link)
        elapsed = time.perf_counter() - start
        z = abs(an.nats - mc.mean) / math.hypot(mc.std_err, an.err_est)
        ok &= z <= 2 and elapsed <= 300
        parts.append(f"{name} {an.nats:.5f} vs {mc.mean:.5f}±{mc.std_err:.5f} ({z:.2f} SE, {elapsed:.0f} s)")
    acceptance(5, ok, "; ".join(parts))


def test_criterion_6_figure1(figure1_rows, acceptance):
    status, table, out = figure1_rows
    gtr = by_method(table["gtr_t"])
    exact = [r.ase_nats for r in gtr["exact"]]
    errs = [r.err for r in gtr["exact"]]
    n_inv, within = inversions(exact, errs)
    ric = [r.ase_nats for r in by_method(table["rician"])["exact"]]
    ray = [r.ase_nats for r in by_method(table["rayleigh"])["exact"]]
    hyb_z = max(abs(h.ase_nats - f.ase_nats) / f.err for h, f in zip(gtr["hybrid"], gtr["simulate"]))
    checks = {
        "exit 0": status == 0,
        "p grid": [r.swept_value for r in gtr["exact"]] == P_GRID,
        "GTR-T non-decreasing": n_inv == 0 or (n_inv == 1 and within),
        "Rician >= Rayleigh": all(a >= b for a, b in zip(ric, ray)),
        "Rician >= max GTR-T": min(ric) >= max(exact),
        "hybrid within 2 SE": hyb_z <= 2,
        "svg written": (out / "figure1.svg").stat().st_size > 0,
    }
    bad = [k for k, v in checks.items() if not v]
    acceptance(6, not bad, f"GTR-T exact {exact[0]:.4f} -> {exact[-1]:.4f} ({n_inv} inversions), "
                           f"Rician {ric[0]:.4f}, Rayleigh {ray[0]:.4f}, max hybrid gap {hyb_z:.2f} SE"
               + (f", failed {bad}" if bad else ""))


def test_criterion_7_figure2(figure2_runs, acceptance):
    statuses, dirs = figure2_runs
    out = dirs[0]
    table = {s: by_method(read_csv(out / f"figure2_{s}.csv")) for s in ("gtr_t", "rayleigh", "rician")}
    gtr = [r.ase_nats for r in table["gtr_t"]["exact"]]
    errs = [r.err for r in table["gtr_t"]["exact"]]
    ray = [r.ase_nats for r in table["rayleigh"]["exact"]]
    ric = [r.ase_nats for r in table["rician"]["exact"]]
    # non-increasing in p: count rises
    n_inv, within = inversions([-v for v in gtr], errs)
    bound_ok = all(lb.ase_nats <= ex.ase_nats
                   for s in table.values() for lb, ex in zip(s["lower_bound"], s["exact"]))
    checks = {
        "exit 0": statuses[0] == 0,
        "Rayleigh >= GTR-T >= Rician": all(a >= b >= c for a, b, c in zip(ray, gtr, ric)),
        "GTR-T non-increasing": n_inv == 0 or (n_inv == 1 and within),
        "lower_bound <= exact": bound_ok,
    }
    bad = [k for k, v in checks.items() if not v]
    acceptance(7, not bad, f"Rayleigh {ray[0]:.4f}, GTR-T {gtr[0]:.4f} -> {gtr[-1]:.4f} ({n_inv} inversions), "
                           f"Rician {ric[0]:.4f}" + (f", failed {bad}" if bad else ""))


def i0_series(x):
    with mp.workdps(40):
        x = mp.mpf(x)
        term, total, k = mp.mpf(1), mp.mpf(1), 0
        while abs(term) > mp.mpf(10) ** -45 * total:
            k += 1
            term *= (x / 2) ** 2 / (k * k)
            total += term
        return float(mp.exp(-x) * total)


def kummer_series(a, b, x):
    # e^{x} Σ (b-a)_n / (b)_n (-x)^n / n!, every term positive for x <= 0
    with mp.workdps(40):
        a, b, y = mp.mpf(a), mp.mpf(b), -mp.mpf(x)
        term, total, n = mp.mpf(1), mp.mpf(1), 0
        while abs(term) > mp.mpf(10) ** -45 * total:
            term *= (b - a + n) / (b + n) * y / (n + 1)
            total += term
            n += 1
        return float(mp.exp(-y) * total)


def test_criterion_8_kernels(acceptance):
    worst = {}
    xs = np.logspace(-3, 3, 50)
    worst["bessel_i0_scaled"] = max(abs(bessel_i0_scaled(x) / i0_series(x) - 1) for x in xs)
    xs = -np.logspace(-3, 3, 50)
    worst["kummer_1f1"] = max(abs(kummer_1f1(a, b, x) / kummer_series(a, b, x) - 1)
                              for (a, b), x in itertools.product(((0.5, 2.0), (0.5, 3.0)), xs))
    xs = np.logspace(-4, 2, 50)
    worst["lower_incomplete_gamma"] = max(
        max(abs(lower_incomplete_gamma(0.5, x) / (math.sqrt(math.pi) * math.erf(math.sqrt(x))) - 1),
            abs(lower_incomplete_gamma(1.0, x) / -math.expm1(-x) - 1))
        for x in xs)
    kernel_ok = all(v <= 1e-10 for v in worst.values())

    fd_worst = 0.0
    for p in (GtrParams(5, 1.0, 1.0), GtrParams(5, 0.7, 1.0, Truncated(0.4)),
              GtrParams(5, 0.7, 1.0, VonMises(2.0)), rician(3, 1.0)):
        for u in (0.1, 1.0, 5.0):
            h = 1e-4 * u
            fd = (zeta1(p, u + h) - zeta1(p, u - h)) / (2 * h)
            fd_worst = max(fd_worst, abs(zeta1_prime(p, u) / fd - 1))
    ok = kernel_ok and fd_worst <= 1e-5
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    acceptance(8, ok, f"max relative error {detail}; zeta1' vs central differences {fd_worst:.1e}")


def test_criterion_9_reproducibility(figure2_runs, acceptance):
    statuses, dirs = figure2_runs
    names = sorted(p.name for p in dirs[0].glob("*.csv"))
    same_seed = all((dirs[0] / n).read_bytes() == (dirs[1] / n).read_bytes() for n in names)
    threads = all((dirs[0] / n).read_bytes() == (dirs[2] / n).read_bytes() for n in names)
    ok = len(names) == 3 and same_seed and threads and statuses == [0, 0, 0]
    acceptance(9, ok, f"{len(names)} CSVs byte-identical across reruns: {same_seed}, across thread counts: {threads}")
