"""Numerical flat sections on sectors, the splitting operator Lambda, growth fits.

Flat sections satisfy ``y(s) = A(s) y(s+1)``; ``nabla y = A(s) y(s+1) - y(s)``.
Directions ``sigma`` are arguments in the s-plane (``sigma = -theta``).
"""
from __future__ import annotations

import cmath
import csv
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .diffmod import DiffSystem, FormalBlock, FormalDatum, _scalar_block, graded_module
from .diffmod import rank_one_formal, split_by_eigenvalues
from .errors import (
    InsufficientSamples,
    MissingCompanions,
    NormalizationViolated,
    QuadratureNoConvergence,
    SeedDivergence,
    StokesLineInArc,
    UnsupportedFormalStructure,
)
from .exponents import Arc, Exponent, GrowthClass, same_orbit, shift, stokes_directions
from .series import MatrixSeries

TWO_PI = 2.0 * math.pi


def branch_log(s, sigma_ref: float = 0.0):
    """log s with imaginary part within pi of ``sigma_ref``."""
    L = np.log(np.asarray(s, dtype=complex))
    k = np.round((sigma_ref - L.imag) / TWO_PI)
    return L + 2j * math.pi * k


def ray_points(sigma: float, rmin: float, rmax: float, n: int) -> np.ndarray:
    return np.linspace(rmin, rmax, n) * cmath.exp(1j * sigma)


@dataclass
class RaySamples:
    """Samples ``values[k]`` of a function at ``s[k]``, optionally with ``next_values[k]`` at ``s[k]+1``."""

    s: np.ndarray
    values: np.ndarray
    sigma: float | None = None
    next_values: np.ndarray | None = None
    errors: np.ndarray | None = None
    log_s: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.s = np.asarray(self.s, dtype=complex)
        self.values = np.asarray(self.values, dtype=complex)

    def __len__(self):
        return self.s.size

    @property
    def radii(self) -> np.ndarray:
        return np.abs(self.s)

    def map(self, fn) -> RaySamples:
        """Apply ``fn(s, value)`` pointwise (companions are dropped)."""
        vals = np.array([fn(s, v) for s, v in zip(self.s, self.values)])
        return RaySamples(self.s, vals, self.sigma, log_s=self.log_s)

    def column(self, j: int) -> RaySamples:
        nv = None if self.next_values is None else self.next_values[:, :, j]
        return RaySamples(self.s, self.values[:, :, j], self.sigma, nv, log_s=self.log_s)

    def csv_header(self):
        flat = self.values.reshape(len(self), -1)
        cols = ["re_s", "im_s"]
        for j in range(flat.shape[1]):
            cols += [f"re_y{j}", f"im_y{j}"]
        return cols

    def csv_rows(self):
        flat = self.values.reshape(len(self), -1)
        for s, row in zip(self.s, flat):
            out = [s.real, s.imag]
            for v in row:
                out += [v.real, v.imag]
            yield out

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.csv_header())
            for row in self.csv_rows():
                w.writerow([repr(float(x)) for x in row])


# ---------------------------------------------------------------------------
# frames


class _MatrixPower:
    """``exp(G * L)`` for many scalars ``L`` via an eigen-decomposition when safe."""

    def __init__(self, G):
        self.G = np.atleast_2d(np.asarray(G, dtype=complex))
        r = self.G.shape[0]
        self.scalar = r == 1 or np.allclose(self.G, self.G[0, 0] * np.eye(r), atol=0, rtol=0)
        self.V = None
        if not self.scalar:
            d, V = np.linalg.eig(self.G)
            if np.linalg.cond(V) < 1e6:
                self.d, self.V, self.Vinv = d, V, np.linalg.inv(V)

    def __call__(self, L, scale_log=0.0):
        """``exp(scale_log) * exp(G L)`` elementwise over the array ``L``; shape ``L.shape + (r, r)``."""
        L = np.asarray(L, dtype=complex)
        sl = np.broadcast_to(np.asarray(scale_log, dtype=complex), L.shape)
        r = self.G.shape[0]
        if self.scalar:
            e = np.exp(sl + self.G[0, 0] * L)
            return e[..., None, None] * np.eye(r)
        if self.V is not None:
            e = np.exp(sl[..., None] + L[..., None] * self.d)
            return np.einsum("ij,...j,jk->...ik", self.V, e, self.Vinv)
        out = np.empty(L.shape + (r, r), dtype=complex)
        for idx in np.ndindex(L.shape):
            out[idx] = np.exp(sl[idx]) * sla.expm(self.G * L[idx])
        return out


class Frame:
    """``Y(s) = exp(-a(s)) s**G`` with the branch of ``log s`` nearest ``sigma_ref``."""

    def __init__(self, a: Exponent, G, sigma_ref: float = 0.0):
        self.a = a
        self.G = np.atleast_2d(np.asarray(G, dtype=complex))
        self.sigma_ref = sigma_ref
        self._pow = _MatrixPower(self.G)

    @classmethod
    def from_block(cls, b: FormalBlock, sigma_ref: float = 0.0):
        return cls(b.a, b.G, sigma_ref)

    @property
    def rank(self) -> int:
        return self.G.shape[0]

    def log(self, s):
        return branch_log(s, self.sigma_ref)

    def __call__(self, s, log_s=None):
        s = np.asarray(s, dtype=complex)
        L = self.log(s) if log_s is None else np.asarray(log_s)
        return self._pow(L, -self.a(s, L))

    def inverse(self, s, log_s=None):
        s = np.asarray(s, dtype=complex)
        L = self.log(s) if log_s is None else np.asarray(log_s)
        return self._pow(-L, self.a(s, L))

    def transfer(self, s, zeta, extra_log=0.0):
        """``exp(extra_log) Y(s) Y(zeta)^{-1}`` computed as one exponential."""
        Ls = self.log(s)
        Lz = self.log(zeta)
        da = self.a(zeta, Lz) - self.a(s, Ls)
        return self._pow(Ls - Lz, da + extra_log)


# ---------------------------------------------------------------------------
# formal solutions


class FormalSolution:
    """Truncated formal fundamental matrix ``H(t) blockdiag(V_i(t) Y_i(s))``, columns in fd order."""

    def __init__(self, sys: DiffSystem, fd: FormalDatum | None = None):
        self.sys = sys
        self.exact = False
        if fd is not None and _is_graded(sys, fd):
            self.fd = fd
            self.exact = True
            self.H = None
            self.units = None
            self.shifts = [0] * len(fd)
            self.blocks = list(fd.blocks)
            return
        sp = split_by_eigenvalues(sys, details=True)
        found = []
        for blk, sl in zip(sp.blocks, sp.slices):
            if blk.rank == 1:
                a, gam, v = rank_one_formal(blk.A.entry(0, 0))
                V = MatrixSeries(v.coeffs[:, None, None], v.low, v.m)
                found.append((FormalBlock(a, [[gam]]), V, sl))
            else:
                a, G, V = _scalar_block(blk.A, blk.A.trunc)
                found.append((FormalBlock(a, G), V, sl))
        self.H = sp.H
        if fd is None:
            fd = FormalDatum([f[0] for f in found])
            order = list(range(len(found)))
            shifts = [0] * len(found)
        else:
            order, shifts = _match_blocks(fd, [f[0] for f in found])
        self.fd = fd
        self.shifts = shifts
        self.blocks = [found[i][0] for i in order]
        self.units = [found[i][1] for i in order]
        self.slices = [found[i][2] for i in order]

    def __call__(self, s, log_s):
        """Fundamental matrix at one point, columns ordered as ``fd``."""
        s = complex(s)
        r = self.sys.rank
        if self.exact:
            out = np.zeros((r, r), dtype=complex)
            for b, sl in self.fd.column_blocks():
                out[sl, sl] = Frame(b.a, b.G)(s, log_s)
            return out
        cols = np.zeros((r, r), dtype=complex)
        j = 0
        for b, V, sl, n in zip(self.blocks, self.units, self.slices, self.shifts):
            Y = Frame(b.a, b.G)(s, log_s)
            blockval = V.evaluate(s, log_s) @ Y
            if n:
                blockval = blockval * cmath.exp(-2j * math.pi * n * s)
            cols[sl, j : j + b.rank] = blockval
            j += b.rank
        return self.H.evaluate(s, log_s) @ cols


def _is_graded(sys: DiffSystem, fd: FormalDatum) -> bool:
    if fd.rank != sys.rank:
        return False
    try:
        ref = graded_module(fd, max(1, sys.A.trunc // max(1, fd.m)))
        return ref.A.allclose(sys.A, rtol=1e-10)
    except Exception:
        return False


def _match_blocks(fd: FormalDatum, found):
    order, shifts, used = [], [], set()
    for b in fd.blocks:
        hit = None
        for i, f in enumerate(found):
            if i in used or f.rank != b.rank:
                continue
            if same_orbit(b.a, f.a) and np.allclose(b.G, f.G, atol=1e-8):
                hit = i
                break
        if hit is None:
            raise ValueError(f"formal datum block {b.a.to_text()} does not match the system")
        used.add(hit)
        order.append(hit)
        n = (b.a - found[hit].a).top.imag / TWO_PI
        shifts.append(int(round(n)))
    return order, shifts


# ---------------------------------------------------------------------------
# flat sections


@dataclass
class SolveParams:
    rmin: float = 10.0
    rmax: float = 40.0
    n: int = 31
    sigma: float | None = None  # sampling ray; default: arc midpoint
    seed_radius: float = 60.0
    stokes_margin: float = 1e-3
    on_stokes: str = "raise"  # or "shift": move to a one-sided ray


@dataclass
class SectorialSolution:
    arc: Arc
    fd: FormalDatum
    samples: RaySamples  # values (n, r, r): fundamental matrix W(s)
    directions: list  # per column: +1 backward from s+N, -1 forward from s-N
    sigma_ref: float
    residual: float = float("nan")
    warnings: list = field(default_factory=list)


def _column_directions(fd: FormalDatum, arc: Arc):
    tops = [b.a.top for b in fd.blocks for _ in range(b.rank)]
    if arc.contains_zero:
        pref = 1
    elif arc.contains_pi:
        pref = -1
    else:
        pref = 1 if math.cos(arc.mid_sigma) >= 0 else -1
    out = []
    for i, ci in enumerate(tops):
        back = all(ci.real >= cj.real - 1e-12 for cj in tops)
        fwd = all(ci.real <= cj.real + 1e-12 for cj in tops)
        if back and fwd:
            out.append(pref)
        elif back:
            out.append(1)
        elif fwd:
            out.append(-1)
        else:
            raise SeedDivergence(f"column {i} is dominant in neither horizontal direction")
    return out


def _check_stokes(fd: FormalDatum, sigma: float, margin: float):
    exps = fd.exponents
    for i in range(len(exps)):
        for j in range(i + 1, len(exps)):
            d = exps[i] - exps[j]
            if d.is_zero():
                continue
            for sd in stokes_directions(exps[i], exps[j]):
                dist = abs(math.remainder(sd.sigma - sigma, TWO_PI))
                if dist < margin:
                    return sd.sigma
    return None


def _propagate(sys: DiffSystem, formal: FormalSolution, s: complex, d: int, R: float, ref: float):
    """Fundamental-matrix value at ``s`` and ``s+1`` by the recurrence from a formal seed.

    ``log`` is continued from ``log s`` (branch nearest ``ref``) along the horizontal path.
    """
    N = 1
    while abs(s + d * N) < R:
        N += 1
    start = s + d * N
    arg0 = float(branch_log(s, ref).imag)

    def lg(z):
        return complex(branch_log(z, arg0))

    y = formal(start, lg(start))
    if d > 0:
        nxt = None
        for k in range(N - 1, -1, -1):
            z = s + k
            if k == 0:
                nxt = y
            y = sys(z, lg(z)) @ y
        return y, nxt
    for k in range(N, 0, -1):
        z = s - k
        y = np.linalg.solve(sys(z, lg(z)), y)
    nxt = np.linalg.solve(sys(s, lg(s)), y)
    return y, nxt


def _cot_pi(z):
    """``pi cot(pi z)`` without overflow off the real axis."""
    z = complex(z)
    if z.imag >= 0:
        w = cmath.exp(2j * math.pi * z)
        return math.pi * 1j * (w + 1.0) / (w - 1.0)
    w = cmath.exp(-2j * math.pi * z)
    return math.pi * 1j * (1.0 + w) / (1.0 - w)


def _singular_points(sys: DiffSystem, forward: bool):
    """First poles ``s*`` of horizontally seeded solutions (forward: poles of ``A^{-1}`` moved by one)."""
    if sys.m != 1:
        raise UnsupportedFormalStructure("pole cancellation is implemented for unramified systems only")
    C = sys.A.coeffs
    if sys.A.low != 0:
        raise UnsupportedFormalStructure("system matrix has negative powers of t")
    scale = float(np.max(np.abs(C)))
    nz = [k for k in range(C.shape[0]) if np.max(np.abs(C[k])) > 1e-14 * scale]
    Ke = max(nz)
    if Ke == 0:
        return []
    if not forward:
        return [0j]
    # det of z^Ke A(z) = sum_j A_{Ke-j} z^j via the block companion matrix
    r = sys.rank
    A0inv = np.linalg.inv(C[0])
    comp = np.zeros((r * Ke, r * Ke), dtype=complex)
    comp[r:, :-r] = np.eye(r * (Ke - 1))
    for j in range(Ke):
        comp[:r, j * r : (j + 1) * r] = -A0inv @ C[j + 1]
    roots = [complex(z) for z in np.linalg.eigvals(comp)] + [0j]
    out = []
    for z in sorted(roots, key=lambda x: (x.real, x.imag)):
        if not any(abs(z + 1.0 - w) < 1e-9 for w in out):
            out.append(z + 1.0)
    return out


def _pole_terms(sys, formal, bad, good, dbad, R, ref, nodes: int = 32):
    """Residues ``rho`` with ``y_bad - W_good sum rho pi cot(pi (s - s*))`` free of poles."""
    cands = _singular_points(sys, dbad < 0)
    cands.sort(key=lambda z: -dbad * z.real)
    terms = []

    def good_at(z):
        return _propagate(sys, formal, z, -dbad, R, ref)[0][:, good]

    def bad_at(z):
        y = _propagate(sys, formal, z, dbad, R, ref)[0][:, bad]
        if terms:
            y = y - good_at(z) @ sum(rho * _cot_pi(z - c) for c, rho in terms)
        return y

    for c in cands:
        others = [abs(c - o - k) for o in cands for k in range(-3, 4) if abs(c - o - k) > 1e-9]
        rad = min([0.25] + [0.4 * d for d in others])
        zs = c + rad * np.exp(2j * math.pi * np.arange(nodes) / nodes)
        vals = np.array([bad_at(z) for z in zs])
        if not np.all(np.isfinite(vals)):
            raise UnsupportedFormalStructure(f"seeded solution is not finite near s={c:.6g}")
        dz = (zs - c)[:, None, None]
        res = np.mean(vals * dz, axis=0)
        c2 = np.mean(vals * dz**2, axis=0)
        size = float(np.max(np.abs(vals)))
        if np.max(np.abs(res)) < 1e-12 * size * rad:
            continue
        if np.max(np.abs(c2)) > 1e-6 * np.max(np.abs(res)) * rad + 1e-12 * size * rad**2:
            raise UnsupportedFormalStructure(f"higher-order pole of the seeded solution at s={c:.6g}")
        Wg = good_at(c)
        rho, *_ = np.linalg.lstsq(Wg, res, rcond=None)
        if np.linalg.norm(Wg @ rho - res) > 1e-8 * np.linalg.norm(res):
            raise UnsupportedFormalStructure(f"residue at s={c:.6g} is not spanned by the opposite columns")
        terms.append((c, rho))
    return terms


def flat_sections(sys: DiffSystem, fd: FormalDatum | None, arc: Arc, params: SolveParams | None = None) -> SectorialSolution:
    """Fundamental solution on a ray of ``arc`` with ``W(s) ~ formal solution`` columnwise.

    Each column is seeded from the formal solution at ``|s| >= seed_radius`` and
    carried back to the sample by the recurrence in its stable horizontal direction.
    """
    params = params or SolveParams()
    formal = FormalSolution(sys, fd)
    fd = formal.fd
    sigma = arc.mid_sigma if params.sigma is None else params.sigma
    notes = []
    hit = _check_stokes(fd, sigma, params.stokes_margin)
    if hit is not None:
        if params.on_stokes != "shift":
            raise StokesLineInArc(f"sampling ray sigma={sigma:.6g} lies on the Stokes direction {hit:.6g}")
        sigma = hit + 2 * params.stokes_margin
        msg = f"sampling ray moved to the one-sided direction sigma={sigma:.6g}"
        warnings.warn(msg)
        notes.append(msg)
    ref = arc.mid_sigma
    dirs = _column_directions(fd, arc)
    pts = ray_points(sigma, params.rmin, params.rmax, params.n)
    r = sys.rank
    W = np.zeros((pts.size, r, r), dtype=complex)
    Wn = np.zeros_like(W)
    # a sample on a pole lattice gives inf here; it is repaired below
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for dset in set(dirs):
            cols = [j for j, dj in enumerate(dirs) if dj == dset]
            for k, s in enumerate(pts):
                y, nxt = _propagate(sys, formal, complex(s), dset, params.seed_radius, ref)
                W[k][:, cols] = y[:, cols]
                Wn[k][:, cols] = nxt[:, cols]
    # columns seeded across a real direction of the arc pick up poles on the
    # horizontal lines through the singular points; cancel them with the
    # opposite columns times pi cot(pi (s - s*)), which is 1-periodic
    bad = [j for j, dj in enumerate(dirs) if (dj < 0 and arc.contains_zero) or (dj > 0 and arc.contains_pi)]
    if bad and not formal.exact:
        if arc.contains_zero and arc.contains_pi:
            raise UnsupportedFormalStructure("arc contains both real directions")
        good = [j for j in range(r) if j not in bad]
        terms = _pole_terms(sys, formal, bad, good, dirs[bad[0]], params.seed_radius, ref)
        def corrected(z):
            y, yn = _propagate(sys, formal, z, dirs[bad[0]], params.seed_radius, ref)
            if dirs[good[0]] != dirs[bad[0]]:
                g, gn = _propagate(sys, formal, z, dirs[good[0]], params.seed_radius, ref)
                y[:, good], yn[:, good] = g[:, good], gn[:, good]
            P = sum(rho * _cot_pi(z - c) for c, rho in terms)
            y[:, bad] -= y[:, good] @ P
            yn[:, bad] -= yn[:, good] @ P
            return y, yn

        for k, s in enumerate(pts):
            if not terms:
                break
            near = min(abs(math.remainder((s - c).real, 1.0)) + abs((s - c).imag) for c, _ in terms)
            if near < 1e-3:
                # removable singularity at the sample: mean value over a small circle
                ring = [corrected(s + 1e-2 * cmath.exp(2j * math.pi * q / 16)) for q in range(16)]
                W[k] = np.mean([x[0] for x in ring], axis=0)
                Wn[k] = np.mean([x[1] for x in ring], axis=0)
                continue
            P = sum(rho * _cot_pi(s - c) for c, rho in terms)
            W[k][:, bad] -= W[k][:, good] @ P
            Wn[k][:, bad] -= Wn[k][:, good] @ P
        notes.extend(f"pole term at s*={c:.6g}" for c, _ in terms)
    samples = RaySamples(pts, W, sigma, Wn, log_s=branch_log(pts, ref))
    sol = SectorialSolution(arc, fd, samples, dirs, ref, warnings=notes)
    sol.residual = residual(sys, samples, sigma_ref=ref)
    return sol


def residual(sys: DiffSystem, y: RaySamples, sigma_ref: float | None = None) -> float:
    """Max over samples of ``|A(s) y(s+1) - y(s)| / |y(s)|``."""
    if y.next_values is None:
        raise MissingCompanions("samples carry no values at s+1")
    ref = y.sigma if sigma_ref is None else sigma_ref
    ref = 0.0 if ref is None else ref
    worst = 0.0
    for s, v, vn in zip(y.s, y.values, y.next_values):
        A = sys(s, complex(branch_log(s, ref)))
        vv = v.reshape(sys.rank, -1)
        d = A @ vn.reshape(sys.rank, -1) - vv
        worst = max(worst, float(np.linalg.norm(d) / max(np.linalg.norm(vv), 1e-300)))
    return worst


def nabla(sys: DiffSystem, y: RaySamples, sigma_ref: float = 0.0) -> np.ndarray:
    """``A(s) y(s+1) - y(s)`` at the samples."""
    if y.next_values is None:
        raise MissingCompanions("samples carry no values at s+1")
    out = []
    for s, v, vn in zip(y.s, y.values, y.next_values):
        A = sys(s, complex(branch_log(s, sigma_ref)))
        out.append((A @ vn.reshape(sys.rank, -1)).reshape(v.shape) - v)
    return np.array(out)


# ---------------------------------------------------------------------------
# the operator Lambda

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


@dataclass
class QuadratureParams:
    """Path ``C(s)``: the line through ``s + 1/2`` at angle ``sigma + tilt``
    (upper side, ``sigma >= 0``) or ``sigma - tilt`` (lower side).

    Both half-lines are integrated outwards until the integrand drops below
    ``tail_tol`` times its running maximum.  ``shift`` fixes the
    representative ``a + 2 pi i n s``; None picks it.  ``side`` forces
    "upper" or "lower".
    """

    tilt: float = 0.5
    panel: float = 0.25
    near: float = 2.0
    ratio: float = 1.25
    tail_tol: float = 1e-16
    max_panels: int = 4000
    shift: int | None = None
    side: str | None = None
    rapid: bool = True  # f of rapid decay (closed normalization interval)


def _kernel_log(s, zeta):
    """``-log(1 - exp(2 pi i (s - zeta)))`` computed without overflow."""
    z = 2j * math.pi * (s - zeta)
    out = np.empty(np.shape(z), dtype=complex)
    small = z.real <= 0
    out[small] = -np.log1p(-np.exp(z[small]))
    zb = z[~small]
    # 1 - e^z = -e^z (1 - e^{-z})
    out[~small] = -(zb + np.log(-1.0 + 0j) + np.log1p(-np.exp(-zb)))
    return out


def _normalization_window(c: complex, theta: float, rapid: bool):
    """Admissible integers n for the top coefficient ``c + 2 pi i n`` along path angle ``theta``."""
    S = TWO_PI * math.sin(theta)
    w0 = (c * cmath.exp(1j * theta)).real
    # w(n) = w0 - n S
    if S > 0:
        lo, hi = w0 / S - 1.0, w0 / S  # w in (0, S] -> n in [w0/S - 1, w0/S)
        return lo, hi, rapid, False
    if S < 0:
        Sp = -S
        lo, hi = -w0 / Sp - 1.0, -w0 / Sp  # w in (-S', 0] -> n in (lo, hi]
        return lo, hi, False, True
    return None


def _choose_shift(c: complex, thetas, rapid: bool, fixed: int | None):
    lo_all, hi_all = -math.inf, math.inf
    lo_closed, hi_closed = True, True
    for th in thetas:
        win = _normalization_window(c, th, rapid)
        if win is None:
            raise NormalizationViolated("horizontal path direction: no admissible representative")
        lo, hi, lc, hc = win
        if lo > lo_all or (lo == lo_all and not lc):
            lo_all, lo_closed = lo, lc
        if hi < hi_all or (hi == hi_all and not hc):
            hi_all, hi_closed = hi, hc
    tol = 1e-12

    def ok(n):
        a = n > lo_all - tol if lo_closed else n > lo_all + tol
        b = n < hi_all + tol if hi_closed else n < hi_all - tol
        return a and b

    if fixed is not None:
        if not ok(fixed):
            raise NormalizationViolated(
                f"representative shift n={fixed} violates the decay normalization on these paths"
            )
        return fixed
    for n in range(math.floor(lo_all) - 1, math.ceil(hi_all) + 2):
        if ok(n):
            return n
    raise NormalizationViolated("no shift a + 2 pi i n s satisfies the decay normalization on all paths")


def _half_line(integrand, z0, direction, h, near, ratio, tail_tol, max_panels):
    """Integral of ``integrand`` over ``z0 + x * direction``, x in (0, inf)."""
    n0 = max(1, math.ceil(near / h))
    edges = np.linspace(0.0, n0 * h, n0 + 1)
    a, b = edges[:-1], edges[1:]
    x = (0.5 * (b - a))[:, None] * _GL_X[None, :] + (0.5 * (a + b))[:, None]
    wts = (0.5 * (b - a))[:, None] * _GL_W[None, :]
    vals = integrand(z0 + x.ravel() * direction)
    vals = vals.reshape(x.shape + vals.shape[1:])
    total = np.tensordot(wts, vals, axes=([0, 1], [0, 1]))
    running = float(np.max(np.abs(vals)))
    start, width = n0 * h, h
    for _ in range(max_panels):
        xa = start + 0.5 * width * (_GL_X + 1.0)
        v = integrand(z0 + xa * direction)
        if not np.all(np.isfinite(v)):
            break
        total = total + np.tensordot(0.5 * width * _GL_W, v, axes=(0, 0))
        mag = float(np.max(np.abs(v)))
        running = max(running, mag)
        if mag < tail_tol * running or mag == 0.0:
            return total * direction
        start += width
        width *= ratio
    raise QuadratureNoConvergence("integrand did not decay along the path")


def _line_integral(integrand, center, direction, h, params):
    args = (h, params.near, params.ratio, params.tail_tol, params.max_panels)
    # the backward half comes out with the reversed orientation
    return _half_line(integrand, center, direction, *args) - _half_line(integrand, center, -direction, *args)


def lambda_op(block, f, points, params: QuadratureParams | None = None, sigma_ref: float = 0.0):
    """``Lambda(f)(s) = -f(s) + eps Y(s) int_{C(s)} Y(zeta)^{-1} f(zeta) / (1 - e^{2 pi i (s - zeta)}) dzeta``.

    ``block`` is a FormalBlock (exponent ``a`` and residue ``G``) or a Frame.
    ``f`` is vectorized: array of ``zeta`` -> array ``(N,)`` (rank one) or ``(N, r)``.
    ``C(s)`` is oriented upwards (``eps = -1`` when it runs downwards), which
    makes ``A(s) Lambda(f)(s+1) - Lambda(f)(s) = f(s)``.  Returns RaySamples with
    values at ``s`` and ``s+1`` and the quadrature error estimate
    ``|Q_h - Q_{h/2}|`` (the finer value is returned).
    """
    params = params or QuadratureParams()
    frame = block if isinstance(block, Frame) else Frame(block.a, block.G, sigma_ref)
    r = frame.rank
    pts = np.atleast_1d(np.asarray(points, dtype=complex))
    if params.side is None:
        upper = float(np.mean(np.angle(pts))) >= 0.0
    else:
        upper = params.side == "upper"
    eps = 1.0 if upper else -1.0
    ang = np.angle(pts) + eps * params.tilt
    if np.any(np.sin(ang) * eps <= 0):
        raise NormalizationViolated("path direction leaves the open half plane of its side")
    targets = np.concatenate([pts, pts + 1.0])
    thetas = np.concatenate([ang, ang])
    n = _choose_shift(frame.a.top, thetas, params.rapid, params.shift)
    fr = Frame(shift(frame.a, n), frame.G, frame.sigma_ref)

    def value(s, theta, h):
        # C(s) runs upwards; for the lower side the line is traversed downwards
        direction = cmath.exp(1j * theta)

        def integrand(z):
            fz = np.asarray(f(z), dtype=complex).reshape(z.size, -1)
            M = fr.transfer(s, z, _kernel_log(s, z))
            return np.einsum("nij,nj->ni", M, fz)

        with np.errstate(over="ignore", invalid="ignore"):
            I = _line_integral(integrand, s + 0.5, direction, h, params)
        fs = np.asarray(f(np.array([s])), dtype=complex).reshape(-1)
        return -fs + eps * I

    out = np.zeros((targets.size, r), dtype=complex)
    err = np.zeros(targets.size)
    for k, (s, th) in enumerate(zip(targets, thetas)):
        coarse = value(s, th, params.panel)
        fine = value(s, th, 0.5 * params.panel)
        out[k] = fine
        err[k] = float(np.max(np.abs(fine - coarse)))
    n_pts = pts.size
    vals, nxt = out[:n_pts], out[n_pts:]
    if r == 1:
        vals, nxt = vals[:, 0], nxt[:, 0]
    res = RaySamples(pts, vals, None, nxt, errors=np.maximum(err[:n_pts], err[n_pts:]))
    res.meta.update(shift=n, side="upper" if upper else "lower")
    return res


# ---------------------------------------------------------------------------
# growth fits


@dataclass
class GrowthFit:
    cls: GrowthClass
    mu: float
    nu: float
    const: float
    rms: float


def classify_growth(y, tol: float = 1e-3, values=None) -> GrowthFit:
    """Least squares ``log|y| ~ mu R + nu log R + c``; the sign of ``mu`` decides the class.

    ``y`` is RaySamples (the norm over components is used) or an array of
    points together with ``values``.
    """
    if isinstance(y, RaySamples):
        s, v = y.s, y.values
    else:
        s, v = np.asarray(y, dtype=complex), np.asarray(values, dtype=complex)
    R = np.abs(s)
    if R.size < 8:
        raise InsufficientSamples(f"need at least 8 samples, got {R.size}")
    if R.max() < 4.0 * R.min():
        raise InsufficientSamples("samples must span a factor >= 4 in |s|")
    flat = v.reshape(R.size, -1)
    # row scaling keeps the norm finite for values near the overflow limit
    peak = np.max(np.abs(flat), axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        mags = np.where(peak > 0, peak * np.linalg.norm(flat / np.where(peak > 0, peak, 1.0)[:, None], axis=1), 0.0)
    good = mags > 0
    if good.sum() < 8:
        raise InsufficientSamples("fewer than 8 nonzero samples")
    R, L = R[good], np.log(mags[good])
    X = np.column_stack([R, np.log(R), np.ones_like(R)])
    coef, *_ = np.linalg.lstsq(X, L, rcond=None)
    mu, nu, c = (float(x) for x in coef)
    rms = float(np.sqrt(np.mean((X @ coef - L) ** 2)))
    if mu < -tol:
        cls = GrowthClass.RapidDecay
    elif mu > tol:
        cls = GrowthClass.Growth
    else:
        cls = GrowthClass.Moderate
    return GrowthFit(cls, mu, nu, c, rms)
