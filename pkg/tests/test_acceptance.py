"""Acceptance suite: one pass/fail line per criterion (see the terminal summary)."""
import math

import numpy as np

from stokesdiff import models
from stokesdiff.diffmod import DiffSystem, FormalBlock, split_by_eigenvalues
from stokesdiff.exponents import Exponent, GrowthClass
from stokesdiff.sectorial import QuadratureParams, branch_log, classify_growth, lambda_op, ray_points
from stokesdiff.series import MatrixSeries
from stokesdiff.special import gamma_ratio, reflection_residual


def test_01_gamma_flat_section(acceptance):
    worst = 0.0
    for alpha in (0.5, 0.3 + 0.2j):
        for sigma in (0.0, 0.5, -0.5):
            for s in ray_points(sigma, 5.0, 40.0, 50):
                g, g1 = gamma_ratio(s, alpha), gamma_ratio(s + 1, alpha)
                worst = max(worst, abs((1 + alpha / s) * g1 - g) / abs(g))
    acceptance(1, "Gamma(s)/Gamma(s+alpha) flat for B_alpha", worst < 1e-10, f"max rel residual {worst:.2e}")


def test_02_egamma_flat_section(acceptance):
    sysm = models.e_gamma()
    worst = 0.0
    for s in ray_points(0.2, 5.0, 30.0, 50):
        ls = complex(branch_log(s, 0.2))
        h = models.e_gamma_section(s, ls)
        h1 = models.e_gamma_section(s + 1, ls + complex(np.log1p(1 / s)))
        worst = max(worst, abs(sysm(s, ls)[0, 0] * h1 - h) / abs(h))
    acceptance(2, "s^(-s) Gamma(s) flat for E_Gamma", worst < 1e-10, f"max rel residual {worst:.2e}")


def test_03_reflection(acceptance):
    rng = np.random.default_rng(3)
    pts = rng.uniform(-20, 20, 100) + 1j * rng.uniform(-5, 5, 100)
    worst = max(reflection_residual(s) for s in pts)
    acceptance(3, "reflection formula", worst < 1e-10, f"max residual {worst:.2e}")


TRIVIAL = FormalBlock(Exponent.zero(), [[0.0]])
B_HALF = FormalBlock(Exponent.zero(), [[-0.5]])
A_MINUS_S = FormalBlock(Exponent([-1.0]), [[0.0]])


def test_04_lambda_identity(acceptance):
    pts = ray_points(0.0, 2.0, 12.0, 20)
    f = lambda z: np.exp(-np.asarray(z))
    L = lambda_op(TRIVIAL, f, pts, QuadratureParams())
    nab = float(np.max(np.abs(L.next_values - L.values - f(pts)) / np.abs(f(pts))))
    tele = -np.exp(-pts) / (1 - math.exp(-1.0))
    dev = float(np.max(np.abs(L.values - tele) / np.abs(tele)))
    ok = nab < 1e-8 and dev < 1e-6
    acceptance(4, "Lambda identity and telescoping oracle", ok, f"nabla {nab:.2e}, telescoping {dev:.2e}")


RAPID_INPUTS = {
    "exp(-s)": lambda z: np.exp(-z),
    "exp(-2s)": lambda z: np.exp(-2 * z),
    "s^2 exp(-s)": lambda z: z**2 * np.exp(-z),
    "exp(-(1-0.5i)s)": lambda z: np.exp(-(1 - 0.5j) * z),
    "exp(-s)/(1+s)": lambda z: np.exp(-z) / (1 + z),
}


def test_05_rapid_decay_preserved(acceptance):
    bad = []
    for mname, block in (("trivial", TRIVIAL), ("B_1/2", B_HALF), ("a=-s", A_MINUS_S)):
        for fname, f in RAPID_INPUTS.items():
            for sigma in (0.3, -0.3):
                pts = ray_points(sigma, 4.0, 24.0, 16)
                L = lambda_op(block, f, pts)
                fit = classify_growth(L)
                if fit.cls is not GrowthClass.RapidDecay:
                    bad.append(f"{mname}/{fname}/sigma={sigma}: {fit.cls.name} mu={fit.mu:.3g}")
    acceptance(5, "Lambda preserves rapid decay (3 modules x 5 inputs x 2 rays)", not bad, "; ".join(bad) or "all RapidDecay")


def _random_system(rng, K=12):
    while True:
        ev = rng.uniform(-2, 2, 3) + 1j * rng.uniform(-2, 2, 3)
        d = np.abs(ev[:, None] - ev[None, :]) + np.eye(3) * 10
        if d.min() >= 0.3 and np.all(np.abs(ev) > 0.2):
            break
    P = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    coeffs = np.zeros((K + 1, 3, 3), dtype=complex)
    coeffs[0] = P @ np.diag(ev) @ np.linalg.inv(P)
    for k in range(1, 4):
        coeffs[k] = (rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))) / k
    return DiffSystem(MatrixSeries(coeffs, 0, 1))


def test_06_formal_reduction(acceptance):
    rng = np.random.default_rng(6)
    worst_off, worst_gauge = 0.0, 0.0
    for _ in range(20):
        sysm = _random_system(rng)
        norm = float(np.max(np.abs(sysm.A.coeffs)))
        sp = split_by_eigenvalues(sysm, 12, details=True, dps=40)
        G = sp.gauged_exact
        off = 0.0
        for i, si in enumerate(sp.slices):
            for j, sj in enumerate(sp.slices):
                if i != j:
                    off = max(off, max((abs(x) for x in G[:, si, sj].ravel()), default=0.0))
        worst_off = max(worst_off, float(off) / norm)
        worst_gauge = max(worst_gauge, sp.residual() / norm)
    ok = worst_off < 1e-10 and worst_gauge < 1e-10
    acceptance(6, "formal reduction of 20 random 3x3 systems (order 12)", ok,
               f"off-diagonal {worst_off:.2e}, gauge identity {worst_gauge:.2e} (relative to |A|)")


# ---------------------------------------------------------------------------

from stokesdiff.exponents import Arc, growth_class, leq, lt, shift, stokes_directions  # noqa: E402


def _random_exponent(rng, m):
    c = rng.normal(size=m) + 1j * rng.normal(size=m)
    return Exponent(c, m)


def _empirical_class(d: Exponent, sigma: float) -> GrowthClass:
    """Growth of |exp(d)| from samples far out on the ray (log form to avoid overflow)."""
    R = np.logspace(8, 14, 40)
    s = R * np.exp(1j * sigma)
    logs = np.log(R) + 1j * sigma
    vals = np.array([d(x, lx).real for x, lx in zip(s, logs)])
    tail = vals[-8:]
    if np.all(tail < -1) and np.all(np.diff(tail) < 0):
        return GrowthClass.RapidDecay
    if np.all(tail > 1) and np.all(np.diff(tail) > 0):
        return GrowthClass.Growth
    return GrowthClass.Moderate


def test_07_order_relations(acceptance):
    rng = np.random.default_rng(7)
    agree, total, bad = 0, 0, []
    while total < 100:
        a = _random_exponent(rng, int(rng.integers(1, 4)))
        b = _random_exponent(rng, int(rng.integers(1, 4)))
        sigma = float(rng.uniform(-math.pi, math.pi))
        crit = [sd.sigma for sd in stokes_directions(a, b)]
        if any(abs(math.remainder(sigma - c, 2 * math.pi)) < 1e-3 for c in crit):
            continue
        U = Arc.from_sigma(sigma - 1e-4, sigma + 1e-4)
        emp = _empirical_class(a - b, sigma)
        sym_leq, sym_lt = leq(a, b, U), lt(a, b, U)
        ok = sym_leq == (emp is not GrowthClass.Growth) and sym_lt == (emp is GrowthClass.RapidDecay)
        total += 1
        agree += ok
        if not ok:
            bad.append(f"{a.to_text()} vs {b.to_text()} at sigma={sigma:.4f}")
    acceptance(7, "symbolic leq/lt agree with growth fits (100 pairs)", agree == total, f"{agree}/{total} agree" + (f"; {bad[:3]}" if bad else ""))


def _overlap_ratio(s, alpha):
    u = np.exp(2j * np.pi * s)
    return (1 - u) / (1 - np.exp(2j * np.pi * alpha) * u)


def test_08_b_half_cocycle(acceptance):
    from stokesdiff.stokes import cocycle_from_solutions

    alpha = 0.5
    details, ok = [], True
    for sigma in (0.1, -0.1):
        pts = ray_points(sigma, 4.0, 30.0, 27)
        r = _overlap_ratio(pts, alpha)
        # fitted limit: mean over the outer quarter of the mid-overlap ray, where |u|^(+-1) is negligible
        mid = ray_points(math.copysign(math.pi / 2, sigma), 4.0, 30.0, 27)
        L = np.mean(_overlap_ratio(mid, alpha)[-7:])
        fit = classify_growth(pts, values=r - L)
        target = -2 * np.pi * abs(math.sin(sigma))
        good = fit.cls is GrowthClass.RapidDecay and abs(fit.mu - target) <= 0.2 * abs(target)
        ok &= good
        details.append(f"sigma={sigma:+}: limit {complex(L):.6g}, mu {fit.mu:.4f} vs {target:.4f}")
    sc = cocycle_from_solutions(models.b_alpha(alpha), _b_formal(alpha), strict=True)
    ok &= sc.certified
    details.append(f"certified={sc.certified}")
    acceptance(8, "B_1/2 overlap ratio decays like |u|^(+-1); cocycle certified", ok, "; ".join(details))


def _b_formal(alpha):
    from stokesdiff.diffmod import FormalDatum

    return FormalDatum([FormalBlock(Exponent.zero(), [[-alpha]])])


def test_09_solve_matches_gamma(acceptance, tmp_path):
    import csv

    from stokesdiff.cli import main

    src = tmp_path / "b_half.dsys"
    src.write_text("# B_1/2\nparam alpha = 0.5\nA = [[1 + alpha*t]]\n")
    code = main(["solve", str(src), "--theta", "0", "--smin", "10", "--smax", "40", "--n", "31", "--outdir", str(tmp_path)], out=open(tmp_path / "report.txt", "w"))
    rows = list(csv.reader(open(tmp_path / "b_half_theta+0.0000.csv")))[1:]
    s = np.array([float(r[0]) + 1j * float(r[1]) for r in rows])
    y = np.array([float(r[2]) + 1j * float(r[3]) for r in rows])
    g = np.array([gamma_ratio(x, 0.5) for x in s])
    c = np.vdot(y, g) / np.vdot(y, y)  # scalar normalization
    err = float(np.max(np.abs(c * y - g) / np.abs(g)))
    ok = code == 0 and err < 1e-8 and abs(s).min() >= 10 - 1e-9 and abs(s).max() <= 40 + 1e-9
    acceptance(9, "solve on B_1/2 reproduces Gamma(s)/Gamma(s+1/2)", ok, f"exit {code}, rel err {err:.2e}, scale {complex(c):.6g}")


def test_10_u_shift(acceptance):
    from stokesdiff.special import loggamma

    # flat sections g with |g| ~ |exp(b)| for the exponent b of g
    modules = {
        "trivial": (lambda s: 0j, Exponent.zero()),
        "B_1/2": (lambda s: loggamma(s) - loggamma(s + 0.5), Exponent.zero()),
        "a=-s": (lambda s: s, Exponent([1.0])),
    }
    bad, total = [], 0
    for name, (logg, b) in modules.items():
        for sigma in (0.4, 1.2, -0.7, 2.5):
            pts = ray_points(sigma, 4.0, 30.0, 27)
            for n in range(-2, 3):
                # |u^n g| from logs
                logv = np.array([2j * np.pi * n * s + logg(s) for s in pts])
                fit = classify_growth(pts, values=np.exp(logv.real))
                pred = growth_class(shift(b, n), sigma)
                total += 1
                if fit.cls is not pred:
                    bad.append(f"{name} sigma={sigma} n={n}: {fit.cls.name} vs {pred.name}")
    acceptance(10, "u^n shifts classify as growth_class(shift(b, n)) predicts", not bad, f"{total - len(bad)}/{total}" + (f"; {bad[:3]}" if bad else ""))


def test_11_parser_corpus(acceptance, tmp_path):
    from corpus import corrupt, offset_of, random_file

    from stokesdiff.errors import ParseError
    from stokesdiff.parser import parse_system, print_system, read_system

    rng = np.random.default_rng(11)
    paths = []
    for k in range(50):
        p = tmp_path / f"sys{k:02d}.dsys"
        p.write_text(random_file(rng))
        paths.append(p)
    trips, bad = 0, []
    for p in paths:
        sf = read_system(p)
        back = parse_system(print_system(sf))
        if sf.same_structure(back):
            trips += 1
        else:
            bad.append(p.name)
    near = 0
    for p in paths:
        text = p.read_text()
        broken, pos = corrupt(text, rng)
        try:
            parse_system(broken)
            bad.append(f"{p.name}: corruption at {pos} accepted")
        except ParseError as e:
            d = abs(offset_of(broken, e.line, e.column) - pos)
            if d <= 2:
                near += 1
            else:
                bad.append(f"{p.name}: error {d} chars away")
    ok = trips == 50 and near == 50
    acceptance(11, "parser corpus round-trips; corruptions located", ok, f"{trips}/50 round-trips, {near}/50 within 2 chars" + (f"; {bad[:3]}" if bad else ""))


def test_12_rh_round_trip(acceptance):
    import scipy.linalg as sla

    from stokesdiff.diffmod import FormalDatum
    from stokesdiff.exponents import canonicalize
    from stokesdiff.stokes import grading, identity_cocycle, rh_assemble

    rng = np.random.default_rng(12)
    worst, mismatch = 0.0, 0
    for _ in range(20):
        m = int(rng.integers(1, 4))
        blocks, reps = [], []
        while len(blocks) < int(rng.integers(1, 4)):
            a = Exponent(rng.normal(size=m) + 1j * rng.normal(size=m), m)
            c = canonicalize(a)[0]
            if any(c.allclose(x, 1e-6) for x in reps):
                continue
            reps.append(c)
            k = int(rng.integers(1, 3))
            G = rng.normal(size=(k, k)) * 0.3 + 1j * rng.normal(size=(k, k)) * 0.3
            blocks.append(FormalBlock(shift(a, int(rng.integers(-2, 3))), G))
        fd = FormalDatum(blocks)
        gd = grading(rh_assemble(fd, identity_cocycle(fd)))
        if len(gd.entries) != len(blocks):
            mismatch += 1
            continue
        M = fd.m
        for e, b, c in zip(gd.entries, blocks, reps):
            if e.rank != b.rank or not e.orbit.refine(M).allclose(c.refine(M), 1e-12):
                mismatch += 1
            worst = max(worst, float(np.max(np.abs(e.monodromy - sla.expm(2j * np.pi * M * b.G)))))
    ok = mismatch == 0 and worst < 1e-10
    acceptance(12, "RH round trip on 20 elementary modules", ok, f"{mismatch} structural mismatches, monodromy error {worst:.2e}")
