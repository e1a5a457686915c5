"""Difference systems at infinity and their desk-scale formal reduction.

Convention used throughout: a flat section satisfies ``y(s) = A(s) y(s+1)``
with ``s = 1/t``, i.e. ``y = A * phi(y)`` where ``phi`` substitutes
``t -> t/(1+t)`` (and ``tau -> tau (1+t)**(-1/m)`` on ramified grids).
A gauge ``y = H z`` turns ``A`` into ``A' = H^{-1} A phi(H)``.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.linalg as sla

from .errors import ClusteredEigenvalues, NotMild, UnsupportedFormalStructure, ZeroLeadingTerm
from .exponents import Exponent, canonicalize
from .series import (
    DEFAULT_TRUNCATION,
    MatrixSeries,
    PuiseuxSeries,
    _binomial_series,
    exp_series,
    log1p,
    log_series,
    matrix_power_1pt,
    unified_ramification,
)

CLUSTER_SEPARATION = 1e-6
SAME_EIGENVALUE = 1e-9
MILD_DET_TOL = 1e-12


class DiffSystem:
    """Rank-r system ``y(s) = A(s) y(s+1)``.

    ``A`` is a MatrixSeries in ``t`` (grid ``t**(1/m)``).  ``evaluator`` is an
    optional exact callable ``(s, log_s) -> r x r array``; without it the
    truncated series is summed.
    """

    def __init__(self, A: MatrixSeries, evaluator=None, name: str | None = None):
        self.A = A
        self.evaluator = evaluator
        self.name = name

    @classmethod
    def scalar(cls, g: PuiseuxSeries, evaluator=None, name=None):
        A = MatrixSeries(g.coeffs[:, None, None], g.low, g.m)
        return cls(A, evaluator, name)

    @classmethod
    def constant(cls, M, trunc: int = DEFAULT_TRUNCATION, name=None):
        M = np.atleast_2d(np.asarray(M, dtype=complex))
        return cls(MatrixSeries.constant(M, trunc), lambda s, log_s=None: M.copy(), name)

    @property
    def rank(self) -> int:
        return self.A.rank

    @property
    def m(self) -> int:
        return self.A.m

    def __call__(self, s, log_s=None) -> np.ndarray:
        s = complex(s)
        if log_s is None:
            log_s = cmath.log(s)
        if self.evaluator is not None:
            return np.asarray(self.evaluator(s, log_s), dtype=complex)
        return self.A.evaluate(s, log_s)

    def inverse_at(self, s, log_s=None) -> np.ndarray:
        return np.linalg.inv(self(s, log_s))

    def leading(self) -> np.ndarray:
        return self.A.coefficient(0)

    def __repr__(self):
        tag = f" {self.name}" if self.name else ""
        return f"DiffSystem{tag}(rank={self.rank}, m={self.m}, window=[{self.A.low}, {self.A.trunc}])"


@dataclass
class FormalBlock:
    a: Exponent
    G: np.ndarray

    def __post_init__(self):
        self.G = np.atleast_2d(np.asarray(self.G, dtype=complex))

    @property
    def rank(self) -> int:
        return self.G.shape[0]


@dataclass
class FormalDatum:
    """Elementary model ``sum_i E^{a_i} (x) R_{G_i}``."""

    blocks: list = field(default_factory=list)

    @property
    def m(self) -> int:
        return unified_ramification(*(b.a.m for b in self.blocks)) if self.blocks else 1

    @property
    def rank(self) -> int:
        return sum(b.rank for b in self.blocks)

    @property
    def exponents(self):
        return [b.a for b in self.blocks]

    def column_blocks(self):
        """Yield ``(block, slice)`` for the columns of a fundamental matrix."""
        i = 0
        for b in self.blocks:
            yield b, slice(i, i + b.rank)
            i += b.rank

    def column_exponents(self):
        out = []
        for b in self.blocks:
            out.extend([b.a] * b.rank)
        return out

    def __len__(self):
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def to_text(self) -> str:
        from .series import format_complex

        lines = []
        for b in self.blocks:
            rows = ", ".join("[" + ", ".join(format_complex(x) for x in row) + "]" for row in b.G)
            lines.append(f"({b.a.to_text()}, G=[{rows}])")
        return "\n".join(lines)


def check_mild(sys: DiffSystem) -> bool:
    """True iff ``A`` has no pole at ``t = 0`` and ``A(0)`` is invertible."""
    A = sys.A
    if A.low < 0 and np.any(np.abs(A.coeffs[: -A.low]) > 0):
        return False
    A0 = A.coefficient(0)
    scale = max(1.0, float(np.max(np.abs(A0))))
    return bool(abs(np.linalg.det(A0)) > MILD_DET_TOL * scale ** sys.rank)


def mildness_report(sys: DiffSystem) -> tuple[bool, str]:
    A = sys.A
    if A.low < 0 and np.any(np.abs(A.coeffs[: -A.low]) > 0):
        return False, "A has a pole at t = 0"
    d = np.linalg.det(A.coefficient(0))
    if not check_mild(sys):
        return False, f"A(0) singular (det = {d:.3e})"
    return True, f"mild, det A(0) = {d}"


# ---------------------------------------------------------------------------
# splitting by eigenvalues of A(0)


def _components(A: MatrixSeries) -> list[list[int]]:
    """Index sets decoupled in every coefficient."""
    r = A.rank
    pattern = np.any(np.abs(A.coeffs) > 0, axis=0)
    pattern = pattern | pattern.T
    seen, comps = set(), []
    for i in range(r):
        if i in seen:
            continue
        stack, comp = [i], []
        seen.add(i)
        while stack:
            k = stack.pop()
            comp.append(k)
            for j in np.nonzero(pattern[k])[0]:
                if int(j) not in seen:
                    seen.add(int(j))
                    stack.append(int(j))
        comps.append(sorted(comp))
    return comps


def _clusters(A0: np.ndarray):
    ev = np.linalg.eigvals(A0)
    scale = max(1.0, float(np.linalg.norm(A0, 2)))
    same = SAME_EIGENVALUE * scale
    sep = CLUSTER_SEPARATION * scale
    n = ev.size
    labels = list(range(n))

    def find(i):
        while labels[i] != i:
            i = labels[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            d = abs(ev[i] - ev[j])
            if d <= same:
                labels[find(j)] = find(i)
            elif d <= sep:
                raise ClusteredEigenvalues(
                    f"eigenvalues {ev[i]:.6g} and {ev[j]:.6g} of A(0) are closer than {sep:.1e}"
                )
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return [(ev[g].mean(), len(g)) for g in groups.values()]


def _spectral_basis(A0: np.ndarray, clusters) -> np.ndarray:
    r = A0.shape[0]
    I = np.eye(r)
    cols = []
    for i, (_, n) in enumerate(clusters):
        M = I.copy()
        for j, (nu, n2) in enumerate(clusters):
            if i == j:
                continue
            M = M @ np.linalg.matrix_power(A0 - nu * I, n2)
        U, _, _ = np.linalg.svd(M)
        cols.append(U[:, :n])
    return np.hstack(cols)


@dataclass
class Splitting:
    H: MatrixSeries
    gauged: MatrixSeries
    blocks: list
    slices: list
    # with extended precision: object arrays of mpmath numbers, shape (K+1, r, r)
    H_exact: np.ndarray | None = None
    gauged_exact: np.ndarray | None = None
    A_exact: np.ndarray | None = None

    def residual(self) -> float:
        """Max coefficient of ``A phi(H) - H A'`` in the precision the split was done in."""
        if self.A_exact is None:
            raise ValueError("no extended-precision data; use gauge_residual")
        m = self.H.m
        lhs = _conv(self.A_exact, _phi_coeffs(self.H_exact, m))
        rhs = _conv(self.H_exact, self.gauged_exact)
        return float(max(abs(x) for x in (lhs - rhs).ravel()))


class _Field:
    """Scalar backend: complex doubles or mpmath numbers in object arrays."""

    def __init__(self, dps=None):
        self.dps = dps
        if dps is not None:
            import mpmath

            self.mp = mpmath.MPContext()
            self.mp.dps = dps

    @property
    def exact(self) -> bool:
        return self.dps is not None

    def array(self, x):
        x = np.asarray(x)
        if not self.exact:
            return x.astype(complex)
        if x.dtype == object:
            return x
        out = np.empty(x.shape, dtype=object)
        for idx, v in np.ndenumerate(x):
            out[idx] = self.mp.mpc(complex(v))
        return out

    def zeros(self, shape):
        if not self.exact:
            return np.zeros(shape, dtype=complex)
        out = np.empty(shape, dtype=object)
        out.fill(self.mp.mpc(0))
        return out

    def eye(self, r):
        out = self.zeros((r, r))
        for i in range(r):
            out[i, i] = self.mp.mpc(1) if self.exact else 1.0
        return out

    def binomials(self, e, n):
        """``binom(e, j)`` for j = 0..n, with ``e`` a Fraction."""
        if not self.exact:
            return _binomial_series(float(e), n)
        mp = self.mp
        ef = mp.mpf(e.numerator) / e.denominator
        out = [mp.mpf(1)]
        for j in range(1, n + 1):
            out.append(out[-1] * (ef - j + 1) / j)
        return out

    def inv(self, M):
        if not self.exact:
            return np.linalg.inv(M)
        Mi = self.mp.inverse(self.mp.matrix(M.tolist()))
        return np.array(Mi.tolist(), dtype=object)

    def sylvester(self, a, b, q):
        """Solve ``a X + X b = q``."""
        if not self.exact:
            return sla.solve_sylvester(a, b, q)
        p, n = q.shape
        # column-major vec: (I (x) a + b^T (x) I) vec X = vec q
        Kmat = np.kron(np.eye(n, dtype=object), a) + np.kron(b.T, np.eye(p, dtype=object))
        Kmat = self.mp.matrix(Kmat.tolist())
        rhs = self.mp.matrix(q.T.reshape(-1).tolist())
        x = self.mp.lu_solve(Kmat, rhs)
        return np.array([x[i] for i in range(p * n)], dtype=object).reshape(n, p).T


def _conv(F, G):
    """Cauchy product of coefficient stacks starting at index 0, truncated to the shorter length."""
    n = min(F.shape[0], G.shape[0])
    out = np.zeros((n,) + F.shape[1:], dtype=F.dtype) if F.dtype != object else F[:n] * 0
    for a in range(n):
        for b in range(n - a):
            out[a + b] = out[a + b] + F[a] @ G[b]
    return out


def _phi_coeffs(C, m, field: _Field | None = None):
    """Coefficients of ``phi`` applied to a stack ``C`` (index 0 = tau**0)."""
    field = field or _Field(None if C.dtype != object else 60)
    n = C.shape[0]
    out = C * 0
    for k in range(n):
        nj = (n - 1 - k) // m
        b = field.binomials(Fraction(-k, m), nj)
        for j in range(nj + 1):
            out[k + m * j] = out[k + m * j] + C[k] * b[j]
    return out


def _block_diagonalize_constant(B0, sl, field: _Field, sweeps: int = 4):
    """Constant gauge T with ``T^{-1} B0 T`` block diagonal (Newton-type Sylvester sweeps)."""
    r = B0.shape[0]
    T = field.eye(r)
    cur = B0
    for _ in range(sweeps):
        X = field.zeros((r, r))
        for i, si in enumerate(sl):
            for j, sj in enumerate(sl):
                if i != j:
                    X[si, sj] = field.sylvester(cur[si, si], -cur[sj, sj], -cur[si, sj])
        step = field.eye(r) + X
        T = T @ step
        cur = field.inv(step) @ cur @ step
    return T, cur


def _split_component(Ac: np.ndarray, m: int, K: int, field: _Field):
    r = Ac.shape[1]
    A0 = np.asarray(Ac[0], dtype=complex)
    clusters = _clusters(A0)
    sizes = [n for _, n in clusters]
    if len(clusters) == 1:
        H = field.zeros((K + 1, r, r))
        H[0] = field.eye(r)
        return H, Ac[: K + 1].copy(), [slice(0, r)]
    bounds = np.cumsum([0, *sizes])
    sl = [slice(int(bounds[i]), int(bounds[i + 1])) for i in range(len(sizes))]
    P = field.array(_spectral_basis(A0, clusters))
    Pinv = field.inv(P)
    Bc = np.array([Pinv @ Ac[k] @ P for k in range(K + 1)])
    T, _ = _block_diagonalize_constant(Bc[0], sl, field)
    Tinv = field.inv(T)
    Bc = np.array([Tinv @ Bc[k] @ T for k in range(K + 1)])
    P = P @ T
    mask = np.zeros((r, r), dtype=bool)
    for s_ in sl:
        mask[s_, s_] = True
    zero = field.zeros((r, r))
    B0 = np.where(mask, Bc[0], zero)
    Hc = field.zeros((K + 1, r, r))
    Hc[0] = field.eye(r)
    Gc = field.zeros((K + 1, r, r))
    Gc[0] = B0
    for k in range(1, K + 1):
        phiH = _phi_coeffs(Hc[: k + 1], m, field)  # H_k is still zero here
        R = Bc[0] @ phiH[k]
        for j in range(1, k + 1):
            R = R + Bc[j] @ phiH[k - j]
        for j in range(1, k):
            R = R - Hc[j] @ Gc[k - j]
        # order-k equation: B0 H_k - H_k B0 - A'_k = -R
        Hk = field.zeros((r, r))
        for i, si in enumerate(sl):
            for j, sj in enumerate(sl):
                if i != j:
                    Hk[si, sj] = field.sylvester(B0[si, si], -B0[sj, sj], -R[si, sj])
        Hc[k] = Hk
        Gc[k] = np.where(mask, R, zero)
    Hc = np.array([P @ Hc[k] for k in range(K + 1)])
    return Hc, Gc, sl


def split_by_eigenvalues(sys: DiffSystem, K: int | None = None, details: bool = False, dps: int | None = None):
    """Gauge ``A`` block-diagonally to order ``K`` by order-wise Sylvester solves.

    Returns ``(H, blocks)`` with ``A phi(H) = H A'`` coefficientwise, ``A'`` the
    block-diagonal system assembled from ``blocks``.  With ``details=True``
    a :class:`Splitting` is returned instead.

    The gauge coefficients grow factorially (the formal gauge is divergent),
    so at high order double rounding dominates the identity; ``dps`` runs the
    recursion with that many decimal digits and keeps the exact coefficients
    on the Splitting.
    """
    if not check_mild(sys):
        raise NotMild("system is not mild: A must be holomorphic at 0 with A(0) invertible")
    field = _Field(dps)
    A = sys.A.window(0, sys.A.trunc)
    K = A.trunc if K is None else K
    A = A.window(0, K)
    r, m = A.rank, A.m
    comps = _components(A)
    perm = [i for c in comps for i in c]
    Ac = field.array(A.coeffs)
    Ap = Ac[:, perm][:, :, perm]
    Hc = field.zeros((K + 1, r, r))
    Gc = field.zeros((K + 1, r, r))
    slices = []
    off = 0
    for c in comps:
        idx = slice(off, off + len(c))
        Hs, Gs, sl = _split_component(Ap[:, idx, idx], m, K, field)
        Hc[:, idx, idx] = Hs
        Gc[:, idx, idx] = Gs
        slices.extend(slice(off + s_.start, off + s_.stop) for s_ in sl)
        off += len(c)
    inv_perm = np.argsort(perm)
    Hc = Hc[:, inv_perm, :]  # y = Pm H z with Pm the permutation
    H = MatrixSeries(np.asarray(Hc, dtype=complex), 0, m)
    gauged = MatrixSeries(np.asarray(Gc, dtype=complex), 0, m)
    blocks = [DiffSystem(gauged.block(s_, s_)) for s_ in slices]
    if details:
        if field.exact:
            return Splitting(H, gauged, blocks, slices, Hc, Gc, Ac)
        return Splitting(H, gauged, blocks, slices)
    return H, blocks


def gauge_residual(A: MatrixSeries, H: MatrixSeries, Aprime: MatrixSeries) -> float:
    """Max coefficient of ``A phi(H) - H A'`` over the common window."""
    K = min(A.trunc, H.trunc, Aprime.trunc)
    lhs = A.window(0, K) @ H.window(0, K).phi()
    rhs = H.window(0, K) @ Aprime.window(0, K)
    return float(np.max(np.abs((lhs - rhs).coeffs)))


# ---------------------------------------------------------------------------
# rank one


def exponent_increment(a: Exponent, trunc: int) -> PuiseuxSeries:
    """``a(s+1) - a(s)`` as a series in ``tau = s**(-1/m)`` up to grid index ``trunc``."""
    m = a.m
    out = np.zeros(trunc + 1, dtype=complex)
    out[0] += a.coeffs[m - 1]
    for l in range(1, m):
        c = a.coeffs[l - 1]
        if c == 0:
            continue
        # c tau^{-l} [(1+tau^m)^{l/m} - 1]
        nmax = (trunc + l) // m
        b = _binomial_series(l / m, nmax)
        for n in range(1, nmax + 1):
            k = n * m - l
            if k <= trunc:
                out[k] += c * b[n]
    return PuiseuxSeries(out, 0, m)


def _phi_gap(w: np.ndarray, m: int) -> np.ndarray:
    """Coefficients of ``w - phi(w)`` for ``w`` on the tau-grid starting at index 0."""
    f = PuiseuxSeries(w, 0, m)
    return (f - f.phi()).coeffs


def rank_one_formal(g: PuiseuxSeries):
    """Return ``(a, gamma, v)`` with ``g = exp(a(s+1)-a(s)) (1+t)**(-gamma) v / phi(v)``.

    The flat section of ``y(s) = g y(s+1)`` is then ``exp(-a(s)) s**gamma v(s)``.
    ``a`` has ``c_m = log g(0)`` (principal branch, so canonical).
    """
    g = g.window(0, g.trunc) if g.low < 0 else g
    if g.low > 0:
        g = g.window(0, g.trunc)
    lam = g[0]
    if abs(lam) <= 1e-300 or abs(lam) < 1e-14 * max(1.0, g.scale()):
        raise ZeroLeadingTerm("g(0) = 0: not a mild scalar")
    m, K = g.m, g.trunc
    L = log_series(g / lam).coeffs  # valuation >= 1
    c = np.zeros(m, dtype=complex)
    for j in range(1, m):
        if j <= K:
            c[m - j - 1] = m / (m - j) * L[j]
    c[m - 1] = cmath.log(lam)
    a = Exponent(c, m)
    gam = -L[m] if m <= K else 0j
    # remainder solved by w - phi(w) = R, valuation of R >= m + 1
    inc = exponent_increment(a, K).coeffs.copy()
    inc[0] = 0
    R = L - inc + gam * log1p(K, m).coeffs
    w = np.zeros(K + 1, dtype=complex)
    for k in range(1, K - m + 1):
        gap = _phi_gap(w, m)
        w[k] = (R[k + m] - gap[k + m]) * m / k
    wtr = w[: max(K - m, 0) + 1]
    v = exp_series(PuiseuxSeries(wtr, 0, m))
    return canonicalize(a)[0], complex(gam), v


def rank_one_residual(g: PuiseuxSeries, a: Exponent, gam, v: PuiseuxSeries) -> float:
    """Max coefficient of ``exp(a(s+1)-a(s)) (1+t)**(-gamma) v/phi(v) - g`` on v's window."""
    K = v.trunc
    m = unified_ramification(g.m, a.m, v.m)
    e = exp_series(exponent_increment(a.refine(m), K * m // v.m))
    p = matrix_power_1pt([[gam]], -1, K * m // v.m, m).entry(0, 0)
    vv = v.refine(m)
    prod = e * p * vv * vv.phi().invert()
    diff = prod - g.refine(m)
    return float(np.max(np.abs(diff.coeffs[: K * m // v.m + 1])))


# ---------------------------------------------------------------------------
# full formal datum


def _scalar_block(B: MatrixSeries, K: int):
    """Scalar-leading block ``lam (I + B1 t + ...)`` -> exponent, G and unit gauge V."""
    r = B.rank
    B0 = B.coefficient(0)
    lam = B0[0, 0]
    if np.max(np.abs(B0 - lam * np.eye(r))) > 1e-9 * max(1.0, abs(lam)):
        raise UnsupportedFormalStructure("leading block is not scalar (non-semisimple)", block=B0)
    if B.m > 1:
        raise UnsupportedFormalStructure("ramified higher-rank block needs a Turrittin-type reduction", block=B0)
    b = B * (1.0 / lam)
    B1 = b.coefficient(1) if b.trunc >= 1 else np.zeros((r, r))
    G = -B1
    ev = np.linalg.eigvals(G)
    diffs = ev[:, None] - ev[None, :]
    for k in range(1, K + 1):
        if np.any(np.abs(diffs - k) < 1e-8):
            raise UnsupportedFormalStructure(
                f"resonant residue matrix: eigenvalues of G differ by the integer {k}", block=B1
            )
    # solve b phi(V) = V (1+t)^{-G}, V = I + V_1 t + ...
    E = matrix_power_1pt(G, -1, K).coeffs
    bc = b.window(0, K).coeffs
    Vc = np.zeros((K + 1, r, r), dtype=complex)
    Vc[0] = np.eye(r)
    for k in range(1, K):
        # coefficient k+1 of b phi(V) - V E with V_k unknown (V_{k+1} cancels)
        Vm = MatrixSeries(Vc[: k + 2], 0, 1)
        phiV = Vm.phi().coeffs
        res = sum(bc[j] @ phiV[k + 1 - j] for j in range(k + 2)) - sum(
            Vc[j] @ E[k + 1 - j] for j in range(k + 2)
        )
        # dependence on V_k: -k V_k + B1 V_k + V_k G = -k V_k - G V_k + V_k G
        Vc[k] = sla.solve_sylvester(-G - k * np.eye(r), G, -res)
    a = Exponent([cmath.log(lam)], 1)
    return a, G, MatrixSeries(Vc[:K], 0, 1)


def _clean(x, tol: float = 1e-13):
    """Zero real or imaginary parts that are rounding noise."""
    x = np.asarray(x, dtype=complex)
    scale = tol * (1.0 + np.abs(x))
    re = np.where(np.abs(x.real) < scale, 0.0, x.real)
    im = np.where(np.abs(x.imag) < scale, 0.0, x.imag)
    return re + 1j * im


def formal_datum(sys: DiffSystem, K: int | None = None) -> FormalDatum:
    """Formal model of a mild system in the supported class.

    Blocks from :func:`split_by_eigenvalues` must be 1x1 (any ramification) or
    unramified with scalar leading term; otherwise UnsupportedFormalStructure.
    """
    sp = split_by_eigenvalues(sys, K, details=True)
    blocks = []
    for blk in sp.blocks:
        if blk.rank == 1:
            a, gam, _ = rank_one_formal(blk.A.entry(0, 0))
            a = Exponent(_clean(a.coeffs), a.m).minimal(tol=1e-14)
            blocks.append(FormalBlock(a, _clean([[gam]])))
        else:
            a, G, _ = _scalar_block(blk.A, blk.A.trunc)
            blocks.append(FormalBlock(Exponent(_clean(a.coeffs), 1), _clean(G)))
    return FormalDatum(blocks)


# ---------------------------------------------------------------------------
# constructions


def _block_evaluator(a: Exponent, G: np.ndarray):
    def ev(s, log_s):
        # log(s+1) continued from log s
        L = complex(np.log1p(1.0 / s))
        da = complex(a(s + 1, log_s + L) - a(s, log_s))
        return cmath.exp(da) * sla.expm(-G * L)

    return ev


def graded_module(fd: FormalDatum, order: int = DEFAULT_TRUNCATION) -> DiffSystem:
    """Block-diagonal system ``exp(a_i(s+1)-a_i(s)) (1+t)**(-G_i)``; ``order`` is in powers of ``t``."""
    m = fd.m
    K = order * m
    r = fd.rank
    C = np.zeros((K + 1, r, r), dtype=complex)
    evs = []
    for b, sl in fd.column_blocks():
        a = b.a.refine(m)
        e = exp_series(exponent_increment(a, K))
        P = matrix_power_1pt(b.G, -1, K, m)
        C[:, sl, sl] = (P * e).window(0, K).coeffs
        evs.append((sl, _block_evaluator(b.a, b.G)))

    def evaluator(s, log_s):
        out = np.zeros((r, r), dtype=complex)
        for sl, ev in evs:
            out[sl, sl] = ev(s, log_s)
        return out

    return DiffSystem(MatrixSeries(C, 0, m), evaluator, name="graded")


def tensor(sys1: DiffSystem, sys2: DiffSystem) -> DiffSystem:
    A = sys1.A.kron(sys2.A)

    def ev(s, log_s):
        return np.kron(sys1(s, log_s), sys2(s, log_s))

    return DiffSystem(A, ev, name="tensor")


def hom(sys1: DiffSystem, sys2: DiffSystem) -> DiffSystem:
    """System on ``r2 x r1`` matrices ``h(s) = A2(s) h(s+1) A1(s)^{-1}``, column-major vec."""
    A1inv = sys1.A.window(0, sys1.A.trunc).invert()
    A = A1inv.transpose().kron(sys2.A)

    def ev(s, log_s):
        return np.kron(np.linalg.inv(sys1(s, log_s)).T, sys2(s, log_s))

    return DiffSystem(A, ev, name="hom")


def end(sys: DiffSystem) -> DiffSystem:
    return hom(sys, sys)


def direct_sum(*systems: DiffSystem) -> DiffSystem:
    m = unified_ramification(*(x.m for x in systems))
    As = [x.A.refine(m) for x in systems]
    low = min(a.low for a in As)
    trunc = min(a.trunc for a in As)
    r = sum(a.rank for a in As)
    C = np.zeros((trunc - low + 1, r, r), dtype=complex)
    i = 0
    sls = []
    for a in As:
        sl = slice(i, i + a.rank)
        C[:, sl, sl] = a.window(low, trunc).coeffs
        sls.append(sl)
        i += a.rank

    def ev(s, log_s):
        out = np.zeros((r, r), dtype=complex)
        for sl, x in zip(sls, systems):
            out[sl, sl] = x(s, log_s)
        return out

    return DiffSystem(MatrixSeries(C, low, m), ev, name="sum")
