"""Acceptance suite.

Every test carries ``@pytest.mark.criterion(num, title)``; the terminal
summary prints one PASS/FAIL line per criterion with the measured values.
"""

import math

import numpy as np
import pytest
import scipy.linalg as sla
from _helpers import random_operator
from conftest import SWEEP_SECONDS, timed_sweep

from cylgraph import eigen, graph, harness, netgen, oracle
from cylgraph import manifold as mf
from cylgraph import transfer as tr

C1 = pytest.mark.criterion(1, "interval convergence of lambda_1")
C2 = pytest.mark.criterion(2, "flat cylinder convergence of the first five eigenvalues")
C3 = pytest.mark.criterion(3, "sandwich bound stability")
C4 = pytest.mark.criterion(4, "green_identity on random pairs")
C5 = pytest.mark.criterion(5, "transfer operator identities")
C6 = pytest.mark.criterion(6, "smoothing suite")
C7 = pytest.mark.criterion(7, "interpolation energy")
C8 = pytest.mark.criterion(8, "eigensolver cross-validation")
C9 = pytest.mark.criterion(9, "truncation limit and domain monotonicity")
C10 = pytest.mark.criterion(10, "determinism of sweep reports")


def _fmt(xs):
    return "[" + ", ".join(f"{x:+.4f}" for x in xs) + "]"


# ---------------------------------------------------------------- criterion 1


@C1
def test_interval_oracle_value(interval_sweep, detail):
    lam = interval_sweep.levels[0].oracle_t[0]
    detail(f"lambda_1(M_0.1) = {lam:.7f}")
    assert lam == pytest.approx((math.pi / 0.8) ** 2, rel=1e-14)
    assert lam == pytest.approx(15.4212569, rel=1e-8)


@C1
def test_interval_finest_error(interval_sweep, detail):
    err = interval_sweep.levels[-1].rel_errors()[0]
    detail(f"finest eps={interval_sweep.levels[-1].eps}: rel error {err:+.4f} (target 0.03)")
    assert abs(err) <= 0.03


@C1
def test_interval_error_decreases_monotonically(interval_sweep, detail):
    errs = [abs(lv.rel_errors()[0]) for lv in interval_sweep.levels]
    eps = [lv.eps for lv in interval_sweep.levels]
    detail(f"eps {eps} -> |rel error| {_fmt(errs)}")
    assert all(b < a for a, b in zip(errs, errs[1:]))


@C1
def test_interval_runtime(interval_sweep, detail):
    secs = SWEEP_SECONDS["interval_sweep.json"]
    detail(f"{secs:.2f} s (limit 60 s)")
    assert secs <= 60.0


# ---------------------------------------------------------------- criterion 2


@C2
def test_cylinder_oracle_values(cylinder_sweep, detail):
    lam = cylinder_sweep.levels[0].oracle_t
    detail("oracle " + ", ".join(f"{x:.4f}" for x in lam))
    np.testing.assert_allclose(lam[:4], [27.4156, 66.8940, 66.8940, 109.6623], atol=1e-4)
    assert np.all(np.diff(lam) >= 0)


@C2
def test_cylinder_finest_errors(cylinder_sweep, detail):
    lv = cylinder_sweep.levels[-1]
    errs = lv.rel_errors()
    detail(f"finest eps={lv.eps}: rel errors {_fmt(errs)} (target 0.05)")
    assert lv.ok and len(errs) == 5
    assert np.all(np.abs(errs) <= 0.05)


@C2
def test_cylinder_size_and_runtime(cylinder_sweep, detail):
    biggest = max(lv.vertices for lv in cylinder_sweep.levels)
    secs = SWEEP_SECONDS["cylinder_sweep.json"]
    detail(f"{biggest} vertices (limit 50000), {secs:.1f} s (limit 300 s)")
    assert biggest <= 50_000
    assert secs <= 300.0


# ---------------------------------------------------------------- criterion 3


def _verdict_detail(v):
    c = ", ".join(f"{x:.4f}" for x in v.fitted_C)
    return f"{v.status}, C_fit [{c}], growth ok {v.growth_ok}"


@C3
def test_sandwich_interval_sweep(interval_sweep, detail):
    v = harness.check_sandwich(interval_sweep)
    detail(_verdict_detail(v))
    assert v.passed, v.text()


@C3
def test_sandwich_interval_sweep_first_five(detail):
    # the interval sweep extended to k = 5, so both sweeps cover k <= 5
    report = timed_sweep("interval_sweep.json", k=5)
    v = harness.check_sandwich(report)
    failures = [line for line in v.lines if line.startswith("containment")]
    detail(f"{_verdict_detail(v)}, {len(failures)} containment failures")
    assert v.passed, v.text()


@C3
def test_sandwich_cylinder_sweep(cylinder_sweep, detail):
    v = harness.check_sandwich(cylinder_sweep)
    detail(_verdict_detail(v))
    assert v.passed, v.text()


# ---------------------------------------------------------------- criterion 4


@C4
def test_green_identity(detail):
    net = netgen.build_layered_net(mf.flat_cylinder2(1.0, 1.0), 0.045, 0.2)
    L = graph.assemble_truncated_laplacian(graph.build_graph(net, 0.065))
    defect, scale = harness.green_identity_check(L, pairs=100, seed=0)
    detail(f"{net.size} vertices, worst defect {defect:.2e} vs 1e-10 x scale {scale:.2e}")
    assert 400 <= net.size <= 600
    assert defect <= 1e-10 * scale


# ---------------------------------------------------------------- criterion 5


@pytest.fixture(scope="module")
def level_setups():
    out = []
    for m, eps, t, rho in ((mf.interval(1.0), 0.005, 0.1, 0.02), (mf.flat_cylinder2(1.0, 1.0), 0.025, 0.3, 0.09)):
        net = netgen.build_layered_net(m, eps, t)
        g = graph.build_graph(net, rho)
        spec = tr.GridSpec.for_net(net)
        out.append((net, g, spec, tr.node_cells(spec, net)))
    return out


@C5
def test_transfer_identities(level_setups, detail):
    rng = np.random.default_rng(5)
    worst_iso, worst_adj, worst_con = 0.0, 0.0, 0.0
    for net, _, spec, cells in level_setups:
        for _, f in tr.function_family(spec, net.t + net.max_spacing / 2, seeds=(0, 1, 2, 3)):
            u = rng.standard_normal(net.size) * net.in_Xt
            Pf = tr.discretize(f, net, cells)
            Ps = tr.extend(u, net, spec, cells)
            nu = math.sqrt(float(np.dot(net.mu * u, u)))
            worst_iso = max(worst_iso, abs(Ps.norm() - nu) / nu)
            adj = abs(f.inner(Ps) - float(np.dot(net.mu * Pf, u)))
            worst_adj = max(worst_adj, adj / (f.norm() * nu))
            worst_con = max(worst_con, math.sqrt(float(np.dot(net.mu * Pf, Pf))) / f.norm())
    detail(f"isometry {worst_iso:.1e}, adjoint {worst_adj:.1e}, max ||Pf||/||f|| {worst_con:.12f}")
    assert worst_iso <= 1e-9
    assert worst_adj <= 1e-9
    assert worst_con <= 1 + 1e-9


# ---------------------------------------------------------------- criterion 6


@C6
def test_psi_and_theta(detail):
    ints = [tr.psi_integral(n) for n in (1, 2)]
    ths = []
    for m in (mf.interval(1.0), mf.flat_cylinder2(1.0, 1.0), mf.flat_cylinder3(1.0, 1.0, 1.0)):
        ks = tr.KernelSpec(0.05, m.dim)
        ths.append(tr.theta(ks, m, np.array([0.3] * (m.dim - 1) + [0.5]), resolution=60))
    detail(f"psi integrals {[f'{x:.8f}' for x in ints]}, theta {[f'{x:.6f}' for x in ths]}")
    assert all(abs(x - 1) <= 1e-6 for x in ints)
    assert all(abs(x - 1) <= 1e-4 for x in ths)


@C6
def test_smoothing_error_inequality(level_setups, detail):
    worst = 0.0
    for net, g, spec, _ in level_setups:
        n = net.model.dim
        r = g.rho - 2 * net.max_spacing
        c = (n + 2) / (mf.unit_ball_volume(n) * r**n)
        for _, f in tr.function_family(spec, net.t + net.max_spacing / 2):
            s = tr.smooth(f, r)
            region = spec.boundary_distance() >= f.support_depth - r
            diff = float(np.sum(((s.values - f.values) ** 2)[region]) * spec.cell_volume)
            bound = c * tr.dispersion(f, r, region=region)
            worst = max(worst, diff / bound)
    detail(f"max ||smooth f - f||^2 / (flat constant x dispersion) = {worst:.4f}")
    assert worst <= 1.0


@C6
def test_gradient_second_order(detail):
    m = mf.interval(1.0)
    errs = []
    for N in (1000, 2000, 4000):
        spec = tr.GridSpec.uniform(m, 1.0 / N)
        f = tr.sine_bump(spec, 0.2)
        fd, _ = tr.gradient(tr.smooth(f, 0.05))
        ga = tr.grad_smooth_analytic(f, 0.05)
        region = spec.boundary_distance() >= 0.2
        errs.append(float(np.abs(ga[0] - fd[0])[region].max()))
    order = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    detail(f"observed orders {[round(float(o), 3) for o in order]}")
    assert np.all((order > 1.8) & (order < 2.2))


# ---------------------------------------------------------------- criterion 7


@pytest.fixture(scope="module")
def interpolation_rows():
    m = mf.interval(1.0)
    cfg = harness.SweepConfig.from_dict({"model": {"kind": "Interval", "L": 1.0}, "t": 0.1, "k": 3,
                                         "eps": [0.005, 0.002], "rho_A": 0.2})
    rows = []
    for eps in cfg.eps_levels():
        p = harness.run_pipeline(m, eps, cfg.rho_for(eps), cfg.t, cfg.k)
        rows.append([harness.interpolation_energy(p, which=w) for w in range(cfg.k)])
    return rows


@C7
def test_interpolation_energy_bound(interpolation_rows, detail):
    flat = [r for level in interpolation_rows for r in level]
    kappa = harness.fit_kappa([r["energy_ratio"] for r in flat], [r["energy_bound"] for r in flat], [r["rho"] for r in flat])
    worst = max(r["energy_ratio"] / (r["energy_bound"] * (1 + kappa * r["rho"])) for r in flat)
    detail(f"kappa fit {kappa:.4f}, worst ratio/bound {worst:.4f}")
    assert worst <= 1.0 + 1e-12


@C7
def test_interpolation_ratio_tends_to_one(interpolation_rows, detail):
    coarse, fine = ([r["energy_ratio"] for r in level] for level in interpolation_rows)
    detail(f"ratios eps=0.005 {_fmt(coarse)} -> eps=0.002 {_fmt(fine)}")
    for a, b in zip(coarse, fine):
        assert b < a
        assert abs(b - 1) < abs(a - 1)


# ---------------------------------------------------------------- criterion 8


@C8
def test_lanczos_matches_dense(detail):
    worst, dims = 0.0, []
    for seed in range(30):
        _, B = random_operator(seed, max_dim=300)
        k = min(10, B.dim)
        d = eigen.dense_spectrum(B, k)
        s = eigen.lanczos_spectrum(B, k, max_iter=B.dim + 10)
        assert s.converged
        # clusters without Dirichlet mass give eigenvalue 0, compared on the scale of ||B||
        scale = np.maximum(np.abs(d.eigenvalues), 1e-4 * B.norm_estimate())
        worst = max(worst, float(np.max(np.abs(s.eigenvalues - d.eigenvalues) / scale)))
        dims.append(B.dim)
    detail(f"30 operators, dim {min(dims)}..{max(dims)}, worst relative gap {worst:.1e}")
    assert max(dims) <= 300
    assert worst <= 1e-8


@C8
def test_dense_trace_and_determinant(detail):
    worst_tr, worst_det = 0.0, 0.0
    for seed in range(30):
        L, B = random_operator(seed, max_dim=300)
        A = B.to_dense()
        vals = eigen.dense_spectrum(B, B.dim).eigenvalues
        worst_tr = max(worst_tr, abs(vals.sum() - np.trace(A)) / np.abs(np.diag(A)).sum())
        if np.any(np.abs(vals) < 1e-8 * B.norm_estimate()):
            continue  # singular operator: the determinant check is meaningless
        lu, piv = sla.lu_factor(A)
        diag = np.diag(lu)
        sign_lu = (-1) ** np.count_nonzero(piv != np.arange(B.dim)) * np.prod(np.sign(diag))
        log_lu = np.sum(np.log(np.abs(diag)))
        log_eig = np.sum(np.log(np.abs(vals)))
        assert np.prod(np.sign(vals)) == sign_lu
        worst_det = max(worst_det, abs(math.expm1(log_eig - log_lu)))
    detail(f"trace rel {worst_tr:.1e}, determinant rel {worst_det:.1e}")
    assert worst_tr <= 1e-10
    assert worst_det <= 1e-10


# ---------------------------------------------------------------- criterion 9


@C9
def test_oracle_truncation_path(detail):
    ts = [0.2, 0.1, 0.05, 0.01]
    rep = oracle.spectrum_limit_check(mf.interval(1.0), ts, 1)
    path = rep.paths[0]
    detail("path " + ", ".join(f"{x:.6f}" for x in path) + f" -> pi^2 = {math.pi**2:.6f}")
    np.testing.assert_allclose(path, [(math.pi / (1 - 2 * t)) ** 2 for t in ts], rtol=1e-14)
    assert rep.gap_decreasing and rep.monotone_in_t


@C9
def test_graph_spectra_follow_domain_monotonicity(detail):
    m = mf.interval(1.0)
    eps = 0.002
    rho = 0.2 * math.sqrt(eps)
    spec = {t: harness.run_pipeline(m, eps, rho, t, 5).spectrum for t in (0.2, 0.05)}
    big, small = spec[0.2].eigenvalues, spec[0.05].eigenvalues
    tol = 1e-8 * big
    detail(f"t=0.2 {np.round(big, 3).tolist()} vs t=0.05 {np.round(small, 3).tolist()}")
    assert np.all(big >= small - tol)


# ---------------------------------------------------------------- criterion 10


@C10
@pytest.mark.parametrize(
    "name,overrides",
    [("interval_sweep.json", {}), ("cylinder_sweep.json", {"eps": [0.02, 0.01]})],
)
def test_reports_are_byte_identical(tmp_path, name, overrides, detail):
    outs = []
    for run in ("a", "b"):
        report = timed_sweep(name, **overrides)
        harness.write_report(report, harness.check_sandwich(report), tmp_path / run)
        outs.append([(tmp_path / run / f).read_bytes() for f in ("report.csv", "report.json", "verdict.txt")])
    detail(f"{name} {overrides or ''}: {sum(len(b) for b in outs[0])} bytes compared")
    assert outs[0] == outs[1]
