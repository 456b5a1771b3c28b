"""Acceptance criteria, one test per criterion.

Each test prints a single ``criterion k: PASS/FAIL (...)`` line; the lines are
repeated in the terminal summary.
"""

import json
import subprocess
import sys
import time

import numpy as np
import pytest

from fibrate.core import lambda_grad_vector, mu0, solve_t0
from fibrate.eigen import eigenbasis
from fibrate.functionals import WeightedPower
from fibrate.grid import build_grid
from fibrate.model import CLASS_ONE, CLASS_TWO
from fibrate.optimizer import SolveOptions, multistart, mu_sequence, optimize_lambda
from fibrate.potential import PoissonEnergy, bopp_podolski_potential, potential_at_origin
from fibrate.power_classes import class_constants, lambda_closed, lambda_grad_closed_vector, t0_closed
from fibrate.problems import build_problem, semilinear_bound
from fibrate.verification import directional_fd_check, invariant_suite, relabel_degree, sample_D, skew_gradient

from conftest import PROBLEMS, make_problem

ALL = list(PROBLEMS)


def _sp(a):
    return make_problem("schrodinger_poisson", a=a)


@pytest.fixture(scope="module")
def sequences():
    """mu_n estimates for n = 1..4 and the wall time spent on them."""
    start = time.perf_counter()
    models = {
        "concave_convex": make_problem("concave_convex"),
        "kirchhoff": make_problem("kirchhoff"),
        "schrodinger_poisson a=0": _sp(0.0),
        "schrodinger_poisson a=1": _sp(1.0),
    }
    out = {name: (m, mu_sequence(m, 4)) for name, m in models.items()}
    return out, time.perf_counter() - start


@pytest.fixture(scope="module")
def records(sequences):
    """All certified points: multistart on every problem plus the mu_n records."""
    seqs, _ = sequences
    out = []
    for name in ALL:
        model = make_problem(name)
        out += [(model, r) for r in multistart(model, 8)]
    for model, seq in seqs.values():
        out += [(model, r) for _, r in seq if r is not None]
    return out


def test_criterion_1_invariant_suite(criterion):
    start = time.perf_counter()
    failed, checks = [], 0
    for name in ALL:
        for rep in invariant_suite(make_problem(name), 100, seed=0):
            checks += 1
            if not rep.passed:
                failed.append(f"{name}/{rep.name}")
    elapsed = time.perf_counter() - start
    ok = not failed and elapsed < 60
    criterion(1, ok, f"{checks} checks on {len(ALL)} problems, failed={failed}, {elapsed:.1f} s < 60 s")
    assert ok


def test_criterion_2_closed_forms(criterion):
    worst = {"t0": 0.0, "lambda": 0.0, "gradient": 0.0}
    for model in (make_problem("concave_convex"), make_problem("kirchhoff")):
        for u in sample_D(model, 100, seed=7):
            d = solve_t0(model, u, method="generic")
            worst["t0"] = max(worst["t0"], abs(t0_closed(model, u) / d.t0 - 1))
            worst["lambda"] = max(worst["lambda"], abs(lambda_closed(model, u) / d.lam - 1))
            g_gen = lambda_grad_vector(model, u, d)
            g_cl = lambda_grad_closed_vector(model, u)
            worst["gradient"] = max(worst["gradient"], model.grid.norm(g_cl - g_gen) / model.grid.norm(g_gen))
    c1 = class_constants(CLASS_ONE, 1.5, 4, 2)
    c2 = class_constants(CLASS_TWO, 4, 3, 2)
    constants_ok = (
        abs(c1.constant - c1.derived_constant) <= 1e-12 * c1.constant
        and abs(c1.constant - c1.printed_constant) > 1e-2
        and abs(c2.constant - c2.printed_constant) <= 1e-12 * c2.constant
    )
    ok = max(worst.values()) <= 1e-10 and constants_ok
    msg = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    criterion(2, ok, f"worst relative errors {msg} <= 1e-10; class-one C={c1.constant:.5f} "
                     f"(exponent (eta-alpha)/(beta-alpha) gives {c1.printed_constant:.5f}), class-two D={c2.constant:.5f}")
    assert ok


def test_criterion_3_semilinear_benchmark(criterion):
    start = time.perf_counter()
    mus, parts = [], []
    for n in (512, 1024):
        model = build_problem({"kind": "semilinear", "q": 3, "r": 4}, build_grid("interval", 1.0, n))
        u = np.sin(np.pi * model.grid.nodes)
        rec = optimize_lambda(model, eigenbasis(model.grid, 1)[1][:, 0])
        mus.append(rec.mu)
        if n == 512:
            d = solve_t0(model, u)
            lam_err = abs(d.lam / (np.pi**2 - 512 / (243 * np.pi**2)) - 1)
            t0_err = abs(d.t0 / (64 / (27 * np.pi)) - 1)
            c_omega = semilinear_bound(model)
            parts = [lam_err <= 1e-3, t0_err <= 1e-3, rec.converged and rec.mu >= c_omega]
    elapsed = time.perf_counter() - start
    drift = abs(mus[1] / mus[0] - 1)
    ok = all(parts) and drift <= 1e-2 and elapsed < 10
    criterion(3, ok, f"Lambda err {lam_err:.1e}, t0 err {t0_err:.1e}, mu1={mus[0]:.6f} >= C_Omega={c_omega:.6f}, "
                     f"n=512 vs 1024 drift {drift:.1e}, {elapsed:.2f} s < 10 s")
    assert ok


def test_criterion_4_certification(criterion, records):
    conv = [(m, r) for m, r in records if r.converged]
    bad = []
    for model, r in conv:
        back = solve_t0(model, r.v)
        trip = max(abs(back.t0 - 1), abs(mu0(model, r.v) - r.mu) / max(1.0, abs(r.mu)))
        if r.energy_residual > 1e-9 or r.gradient_residual > 1e-6 or trip > 1e-8:
            bad.append((model.name, r.start))
    worst_e = max(r.energy_residual for _, r in conv)
    worst_g = max(r.gradient_residual for _, r in conv)
    per = sorted({m.name for m, _ in conv})
    ok = not bad and set(per) == set(ALL)
    criterion(4, ok, f"{len(conv)} converged records over {per}; max energy {worst_e:.1e}, max gradient {worst_g:.1e}, "
                     f"failures {bad}")
    assert ok


def test_criterion_5_nehari_labels(criterion, records):
    conv = [(m, r) for m, r in records if r.converged]
    wrong = []
    for model, r in conv:
        if model.class_tag == CLASS_ONE and r.nehari_class != "N_minus":
            wrong.append(model.name)
        if model.class_tag == CLASS_TWO and r.nehari_class != "N_plus":
            wrong.append(model.name)
        if model.name == "semilinear" and not (r.nehari_class == "N_plus" and r.nehari_discrepancy):
            wrong.append(model.name)
    n1 = sum(m.class_tag == CLASS_ONE for m, _ in conv)
    n2 = sum(m.class_tag == CLASS_TWO for m, _ in conv)
    ns = sum(m.name == "semilinear" for m, _ in conv)
    ok = not wrong and n1 and n2 and ns
    criterion(5, ok, f"class one {n1} x N-, class two {n2} x N+, semilinear {ns} x N+ flagged; mismatches {wrong}")
    assert ok


def test_criterion_6_mu_sequences(criterion, sequences):
    seqs, elapsed = sequences
    parts, ok = [], elapsed < 300
    for name, (model, seq) in seqs.items():
        vals = np.array([e.value for e, _ in seq])
        steps = np.diff(vals)
        good = bool(np.all(steps >= 0)) if model.class_tag == CLASS_ONE else bool(np.all(steps < 0))
        ok = ok and good and len(vals) == 4
        parts.append(f"{name} [{', '.join(f'{v:.4g}' for v in vals)}]")
    criterion(6, ok, "; ".join(parts) + f"; {elapsed:.0f} s < 300 s")
    assert ok


def test_criterion_7_potential(criterion):
    g = build_grid("radial", 15.0, 1000)
    r = g.nodes
    phi0 = potential_at_origin(g, np.exp(-r**2 / 2), 0.0)
    origin_err = abs(phi0 / (2 * np.pi) - 1)
    u = np.exp(-r**2 / 2) * (1 + 0.5 * np.cos(r))
    v = np.exp(-((r - 2) ** 2) / 3)
    sym, fd = 0.0, 0.0
    for a in (0.0, 1.0):
        lhs = np.sum(g.weights * bopp_podolski_potential(g, u, a) * v**2)
        rhs = np.sum(g.weights * bopp_podolski_potential(g, v, a) * u**2)
        sym = max(sym, abs(lhs - rhs) / abs(lhs))
        A = PoissonEnergy(g, a)
        exact = 4 * np.sum(g.weights * bopp_podolski_potential(g, u, a) * u * v)
        assert exact == pytest.approx(A.derivative(u, v), rel=1e-12)
        fd = max(fd, directional_fd_check(A, u, v, h=1e-4).worst_error)
    ok = origin_err <= 1e-3 and sym <= 1e-9 and fd <= 1e-5
    criterion(7, ok, f"phi(0) rel err {origin_err:.1e} <= 1e-3, symmetry {sym:.1e} <= 1e-9, A' vs FD {fd:.1e} <= 1e-5")
    assert ok


def test_criterion_8_eigen(criterion):
    worst = 0.0
    for n in (64, 256, 1000):
        h = 1 / (n + 1)
        lam = eigenbasis(build_grid("interval", 1.0, n), 1)[0][0]
        worst = max(worst, abs(lam / ((2 / h**2) * (1 - np.cos(np.pi * h))) - 1))
    g = build_grid("interval", 1.0, 256)
    _, B = eigenbasis(g, 5)
    orth = np.max(np.abs(B.T @ (g.weights[:, None] * B) - np.eye(5)))
    ok = worst <= 1e-10 and orth <= 1e-10
    criterion(8, ok, f"lambda_1 rel err {worst:.1e} <= 1e-10, orthonormality {orth:.1e} <= 1e-10")
    assert ok


def test_criterion_9_negative_controls(criterion):
    caught = {}
    for name in ALL:
        model = make_problem(name)
        for label, bad in (("degree", relabel_degree(model, 0.5)), ("gradient", skew_gradient(model, 1.01))):
            failed = [r.name for r in invariant_suite(bad, 10, seed=3) if not r.passed]
            caught[f"{name}/{label}"] = len(failed)
    ok = all(v >= 1 for v in caught.values())
    missed = [k for k, v in caught.items() if v == 0]
    criterion(9, ok, f"{len(caught)} corrupted models, failing checks per model {min(caught.values())}-"
                     f"{max(caught.values())}, undetected {missed}")
    assert ok


def test_criterion_10_determinism(criterion, tmp_path):
    cfg = {
        "problem": {"kind": "concave_convex", "p": 2, "q": 1.5, "r": 3},
        "grid": {"kind": "interval", "extent": 1.0, "n": 128},
        "options": {"seed": 11, "starts": 4, "samples_per_dim": 1000},
        "levels": 2,
        "samples": 10,
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    same = []
    for command in ("solve", "mu-seq", "verify"):
        docs = []
        for k in range(2):
            out = tmp_path / f"{command}{k}"
            proc = subprocess.run([sys.executable, "-m", "fibrate.cli", command, "--config", str(path), "--out", str(out)],
                                  capture_output=True, text=True)
            assert proc.returncode == 0, proc.stderr
            text = (out / "result.json").read_text()
            docs.append("\n".join(line for line in text.splitlines() if '"wall_time"' not in line))
        same.append(docs[0] == docs[1])
    ok = all(same)
    criterion(10, ok, f"solve/mu-seq/verify JSON byte-identical across two runs: {same}")
    assert ok
