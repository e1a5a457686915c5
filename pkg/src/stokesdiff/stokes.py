"""Stokes data: periodic rings on arcs, coverings, cocycles and gradings.

A Stokes filtered module is represented by its classification data: the
graded datum (orbit representatives, ranks, monodromies), a covering of the
circle by arcs with only adjacent overlaps, and a cocycle of transition
matrices on the overlaps.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg as sla

from .diffmod import DiffSystem, FormalDatum
from .errors import CertificationFailed, FullCircleArc, InconsistentData, UnsupportedFormalStructure
from .exponents import Arc, Exponent, GrowthClass, canonicalize, lt, same_orbit, stokes_directions
from .sectorial import Frame, RaySamples, SolveParams, classify_growth, flat_sections
from .series import format_complex

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# the ring of periodic functions on an arc


class RingKind(enum.Enum):
    SmallV = "SmallV"  # convergent series in v = 1/u with finitely many poles
    SmallU = "SmallU"  # convergent series in u
    LaurentPoly = "LaurentPoly"  # C[u, 1/u]


@dataclass(frozen=True)
class APerRingModel:
    arc: Arc
    kind: RingKind

    @property
    def rapid_generator(self) -> str | None:
        """Generator of the rapid-decay ideal (``v`` or ``u``), None for Laurent polynomials."""
        return {RingKind.SmallV: "v", RingKind.SmallU: "u"}.get(self.kind)


def aper_ring(arc: Arc) -> APerRingModel:
    """Periodic functions of moderate growth on ``arc`` (theta-arc in the t-plane)."""
    if arc.width >= TWO_PI - 1e-12:
        raise FullCircleArc("the periodic ring is only modelled on proper arcs")
    if arc.contains_zero or arc.contains_pi:
        return APerRingModel(arc, RingKind.LaurentPoly)
    # arc avoids 0 and pi, so it lies in one half plane
    if math.sin(arc.mid_theta) > 0:
        return APerRingModel(arc, RingKind.SmallV)
    return APerRingModel(arc, RingKind.SmallU)


# ---------------------------------------------------------------------------
# graded data


@dataclass
class GradedEntry:
    orbit: Exponent  # canonical representative
    rank: int
    monodromy: np.ndarray


@dataclass
class GradedDatum:
    entries: list
    m: int = 1

    @property
    def rank(self) -> int:
        return sum(e.rank for e in self.entries)

    @property
    def orbits(self):
        return [e.orbit for e in self.entries]

    @classmethod
    def from_formal(cls, fd: FormalDatum, monodromies=None) -> GradedDatum:
        """Merge the blocks of ``fd`` by orbit.  Default monodromy ``exp(2 pi i m G)``."""
        m = fd.m
        if monodromies is None:
            monodromies = [sla.expm(2j * math.pi * m * np.asarray(b.G, dtype=complex)) for b in fd.blocks]
        groups = []
        for b, M in zip(fd.blocks, monodromies):
            rep = canonicalize(b.a.refine(m) if b.a.m != m else b.a)[0]
            for g in groups:
                if same_orbit(g[0], rep):
                    g[1].append(np.atleast_2d(M))
                    break
            else:
                groups.append((rep, [np.atleast_2d(M)]))
        entries = [GradedEntry(rep, sum(x.shape[0] for x in Ms), sla.block_diag(*Ms)) for rep, Ms in groups]
        return cls(entries, m)

    def allclose(self, other: GradedDatum, atol: float = 1e-10) -> bool:
        if self.m != other.m or len(self.entries) != len(other.entries):
            return False
        for a, b in zip(self.entries, other.entries):
            if a.rank != b.rank or not same_orbit(a.orbit, b.orbit):
                return False
            if not np.allclose(a.monodromy, b.monodromy, rtol=0, atol=atol):
                return False
        return True

    def to_text(self) -> str:
        lines = []
        for e in self.entries:
            lines.append(f"orbit={e.orbit.to_text()}; rank={e.rank}; monodromy={_matrix_text(e.monodromy)}")
        return "\n".join(lines)


def _matrix_text(M) -> str:
    M = np.atleast_2d(M)
    return "[" + ", ".join("[" + ", ".join(format_complex(x) for x in row) + "]" for row in M) + "]"


# ---------------------------------------------------------------------------
# coverings


@dataclass(frozen=True)
class Covering:
    """Cyclically ordered arcs ``U_0 .. U_{N-1}`` in theta; ``U_alpha = (c_{alpha-1}, c_{alpha+1})``.

    Built from sorted cut points ``c_0 < ... < c_{N-1}`` in ``[-pi, pi)``; the
    overlap ``U_alpha & U_{alpha+1}`` is ``(c_alpha, c_{alpha+1})`` (indices mod N,
    with ``c_N = c_0 + 2 pi``).  Only adjacent arcs meet, so there are no triple
    overlaps and the cocycle condition is vacuous.
    """

    cuts: tuple

    def __post_init__(self):
        c = list(self.cuts)
        if len(c) < 2:
            raise ValueError("a covering needs at least two cut points")
        if any(b <= a for a, b in zip(c[:-1], c[1:])) or c[-1] - c[0] >= TWO_PI:
            raise ValueError("cut points must increase within one turn")

    def __len__(self):
        return len(self.cuts)

    def cut(self, k: int) -> float:
        N = len(self.cuts)
        q, r = divmod(k, N)
        return self.cuts[r] + q * TWO_PI

    def arc(self, alpha: int) -> Arc:
        return Arc(self.cut(alpha - 1), self.cut(alpha + 1))

    @property
    def arcs(self):
        return [self.arc(a) for a in range(len(self))]

    def overlap(self, alpha: int) -> Arc:
        return Arc(self.cut(alpha), self.cut(alpha + 1))

    @property
    def overlaps(self):
        return [self.overlap(a) for a in range(len(self))]

    def to_text(self) -> str:
        return "\n".join(f"U{a}: theta in ({u.start:.12g}, {u.end:.12g})" for a, u in enumerate(self.arcs))


def _cut_points(exps, extra=()):
    pts = [0.0, -math.pi, *extra]
    for i in range(len(exps)):
        for j in range(i + 1, len(exps)):
            if (exps[i] - exps[j]).is_zero():
                continue
            for sd in stokes_directions(exps[i], exps[j]):
                pts.append(sd.theta)
    norm = sorted(math.remainder(p, TWO_PI) if math.remainder(p, TWO_PI) < math.pi - 1e-12 else -math.pi for p in pts)
    out = []
    for p in norm:
        if not out or p - out[-1] > 1e-9:
            out.append(p)
    return out


def default_covering(fd) -> Covering:
    """Arcs separated by the Stokes directions of all exponent pairs and by theta = 0, pi."""
    if isinstance(fd, GradedDatum):
        exps = fd.orbits
    else:
        exps = fd.exponents
    return Covering(tuple(_cut_points(exps)))


def stokes_in_overlap(exps, ov: Arc):
    """Stokes directions (as theta) of exponent pairs strictly inside ``ov``."""
    hits = []
    for i in range(len(exps)):
        for j in range(i + 1, len(exps)):
            if (exps[i] - exps[j]).is_zero():
                continue
            for sd in stokes_directions(exps[i], exps[j]):
                if ov.contains_theta(sd.theta):
                    hits.append((i, j, sd.theta))
    return hits


def aut_pattern(exps, arc: Arc) -> np.ndarray:
    """Allowed entries of a transition in ``Aut^{<0}`` on ``arc``: (i, j) with ``a_j < a_i`` there."""
    n = len(exps)
    P = np.eye(n, dtype=bool)
    for i in range(n):
        for j in range(n):
            if i != j and lt(exps[j], exps[i], arc):
                P[i, j] = True
    return P


# ---------------------------------------------------------------------------
# cocycles


@dataclass
class BlockCertificate:
    rows: slice
    cols: slice
    status: str  # "rapid", "negligible" or "failed"
    fit: object = None  # GrowthFit when a fit was made
    peak: float = 0.0


@dataclass
class OverlapData:
    index: int
    arc: Arc
    ring: APerRingModel | None
    limit: np.ndarray  # block-diagonal limit of the raw transition
    sigma: float | None = None  # sample ray
    raw: RaySamples | None = None  # W_alpha^{-1} W_{alpha+1}
    frame: RaySamples | None = None  # Y_alpha g Y_{alpha+1}^{-1}
    confidence: float = 0.0  # relative spread of the limit samples
    certificates: list = field(default_factory=list)

    @property
    def certified(self) -> bool:
        return all(c.status != "failed" for c in self.certificates)


@dataclass
class StokesCocycle:
    fd: FormalDatum
    covering: Covering
    overlaps: list
    symbolic: bool = False
    note: str = "adjacent overlaps only: cocycle condition vacuous"

    @property
    def rank(self) -> int:
        return self.fd.rank

    @property
    def certified(self) -> bool:
        return all(o.certified for o in self.overlaps)

    def summary_rows(self):
        """``(overlap, theta_lo, theta_hi, sigma, block_i, block_j, status, mu)``."""
        rows = []
        for o in self.overlaps:
            for c in o.certificates:
                mu = c.fit.mu if c.fit is not None else float("nan")
                rows.append((o.index, o.arc.start, o.arc.end, o.sigma, c.rows.start, c.cols.start, c.status, mu))
        return rows


def identity_cocycle(fd: FormalDatum, covering: Covering | None = None) -> StokesCocycle:
    """Cocycle of the graded module itself.

    Frames on consecutive arcs agree except across the branch cut of ``log s``,
    which sits on the last overlap; there the transition is ``exp(2 pi i m G)``.
    """
    covering = covering or default_covering(fd)
    r, m = fd.rank, fd.m
    ovs = []
    N = len(covering)
    for a in range(N):
        L = np.eye(r, dtype=complex)
        if a == N - 1:
            for b, sl in fd.column_blocks():
                L[sl, sl] = sla.expm(2j * math.pi * m * np.asarray(b.G, dtype=complex))
        arc = covering.overlap(a)
        ovs.append(OverlapData(a, arc, aper_ring(arc), L))
    return StokesCocycle(fd, covering, ovs, symbolic=True)


@dataclass
class CocycleParams:
    rmin: float = 4.0
    rmax: float = 30.0
    n: int = 27
    edge: float = 0.1  # distance of the sample ray from the overlap end
    seed_radius: float = 60.0
    floor: float = 1e-12  # deviations below this are numerically zero
    rays: dict | None = None  # overlap index -> sigma override


def _overlap_ray(ov: Arc, edge: float) -> float:
    """Sample ray (theta) close to the overlap end where exponentials separate slowest."""
    e = min(edge, 0.25 * ov.width)
    cands = [(abs(math.sin(ov.start)), -math.cos(ov.start), ov.start + e), (abs(math.sin(ov.end)), -math.cos(ov.end), ov.end - e)]
    return min(cands)[2]


def _frame_matrix(fd: FormalDatum, s, log_s) -> np.ndarray:
    r = fd.rank
    out = np.zeros((len(s), r, r), dtype=complex)
    for b, sl in fd.column_blocks():
        out[:, sl, sl] = Frame(b.a, b.G)(s, log_s)
    return out


def _certify_block(D, cols_rows, s, floor, scale):
    rows, cols = cols_rows
    mags = np.array([np.linalg.norm(x[rows, cols]) for x in D])
    peak = float(mags.max())
    keep = mags > floor * scale
    if keep.sum() < 8:
        if peak <= 1e3 * floor * scale:
            return BlockCertificate(rows, cols, "negligible", None, peak)
        return BlockCertificate(rows, cols, "failed", None, peak)
    fit = classify_growth(s[keep], values=mags[keep])
    status = "rapid" if fit.cls is GrowthClass.RapidDecay else "failed"
    return BlockCertificate(rows, cols, status, fit, peak)


def cocycle_from_solutions(sys: DiffSystem, fd: FormalDatum, covering: Covering | None = None,
                           params: CocycleParams | None = None, strict: bool = True) -> StokesCocycle:
    """Transition matrices ``W_alpha^{-1} W_{alpha+1}`` on every overlap, certified blockwise.

    The deviation ``Y_alpha g Y_{alpha+1}^{-1} - I`` (frame coordinates) must be of rapid
    decay in every block; the block-diagonal limit of ``g`` itself is fitted on the
    quarter of samples with the largest ``|s|``.
    """
    params = params or CocycleParams()
    if fd.m != 1:
        raise UnsupportedFormalStructure("numerical cocycles are implemented for unramified data only")
    covering = covering or default_covering(fd)
    exps = fd.exponents
    N = len(covering)
    for a in range(N):
        hits = stokes_in_overlap(exps, covering.overlap(a))
        if hits:
            i, j, th = hits[0]
            raise CertificationFailed(f"overlap {a} contains the Stokes direction theta={th:.6g} of blocks {i},{j}")
    blocks = list(fd.column_blocks())
    ovs = []
    for a in range(N):
        ov = covering.overlap(a)
        if params.rays and a in params.rays:
            sigma = float(params.rays[a])
        else:
            sigma = -_overlap_ray(ov, params.edge)
        sp = SolveParams(params.rmin, params.rmax, params.n, sigma, params.seed_radius)
        # W_N is W_0 itself (its own branch), so the last overlap carries the monodromy
        U0, U1 = covering.arc(a), covering.arc((a + 1) % N)
        W0 = flat_sections(sys, fd, U0, sp)
        W1 = flat_sections(sys, fd, U1, sp)
        s = W0.samples.s
        g = np.linalg.solve(W0.samples.values, W1.samples.values)
        Y0 = _frame_matrix(fd, s, W0.samples.log_s)
        Y1 = _frame_matrix(fd, s, W1.samples.log_s)
        gf = Y0 @ g @ np.linalg.inv(Y1)
        # limits of the diagonal blocks: largest |s| on the middle ray, where deviations are smallest
        spm = SolveParams(params.rmin, params.rmax, params.n, -ov.mid_theta, params.seed_radius)
        gm = np.linalg.solve(flat_sections(sys, fd, U0, spm).samples.values, flat_sections(sys, fd, U1, spm).samples.values)
        k = max(1, len(s) // 4)
        tail = gm[np.argsort(np.abs(s))[-k:]]
        L = np.zeros(g.shape[1:], dtype=complex)
        conf = 0.0
        for _, sl in blocks:
            L[sl, sl] = tail[:, sl, sl].mean(axis=0)
            spread = float(np.max(np.abs(tail[:, sl, sl] - L[sl, sl])))
            conf = max(conf, spread / max(float(np.max(np.abs(L[sl, sl]))), 1e-300))
        D = gf - np.eye(fd.rank)
        certs = []
        for _, rs in blocks:
            for _, cs in blocks:
                certs.append(_certify_block(D, (rs, cs), s, params.floor, 1.0))
        raw = RaySamples(s, g, sigma, None, log_s=W0.samples.log_s)
        frm = RaySamples(s, gf, sigma, None, log_s=W0.samples.log_s)
        od = OverlapData(a, ov, aper_ring(ov), L, sigma, raw, frm, conf, certs)
        if strict and not od.certified:
            bad = next(c for c in certs if c.status == "failed")
            raise CertificationFailed(
                f"overlap {a} (theta in ({ov.start:.4g}, {ov.end:.4g})): block ({bad.rows.start},{bad.cols.start}) "
                "does not decay"
            )
        ovs.append(od)
    return StokesCocycle(fd, covering, ovs)


def grading(x) -> GradedDatum:
    """Graded datum: orbits and ranks from the formal datum, monodromy = ordered product of limits."""
    if isinstance(x, GradedDatum):
        return x
    if isinstance(x, FilteredModuleDatum):
        x = x.cocycle
    if isinstance(x, FormalDatum):
        return GradedDatum.from_formal(x)
    sc: StokesCocycle = x
    P = np.eye(sc.rank, dtype=complex)
    for o in sc.overlaps:
        P = P @ o.limit
    mons = [P[sl, sl] for _, sl in sc.fd.column_blocks()]
    return GradedDatum.from_formal(sc.fd, mons)


# ---------------------------------------------------------------------------
# index arithmetic on orbit sets


def _dedup(exps):
    out = []
    for e in exps:
        c = canonicalize(e)[0]
        if not any(same_orbit(c, o) for o in out):
            out.append(c)
    return out


def tensor_indices(S1, S2):
    """Orbit set of a tensor product: all sums ``a + b``."""
    return _dedup([a + b for a in S1 for b in S2])


def hom_indices(S1, S2):
    """Orbit set of Hom(L1, L2): all differences ``b - a``."""
    return _dedup([b - a for a in S1 for b in S2])


# ---------------------------------------------------------------------------
# assembled output


@dataclass
class FilteredModuleDatum:
    graded: GradedDatum
    covering: Covering
    cocycle: StokesCocycle
    levels: list  # per arc: list of exponents realised by the frame columns

    def level(self, column: int, alpha: int) -> Exponent:
        return self.levels[alpha][column]

    def to_text(self, csv_refs=None) -> str:
        out = ["[graded]", f"ramification {self.graded.m}", self.graded.to_text(), "[covering]", self.covering.to_text()]
        out.append("[cocycle]")
        out.append(f"# {self.cocycle.note}")
        for o in self.cocycle.overlaps:
            ref = csv_refs.get(o.index, "-") if csv_refs else "-"
            state = "symbolic" if o.raw is None else ("certified" if o.certified else "FAILED")
            sig = "-" if o.sigma is None else f"{o.sigma:.12g}"
            out.append(
                f"overlap {o.index}: theta in ({o.arc.start:.12g}, {o.arc.end:.12g}); ring={o.ring.kind.value}; "
                f"sigma={sig}; limit={_matrix_text(o.limit)}; {state}; samples={ref}"
            )
            for c in o.certificates:
                mu = "-" if c.fit is None else f"{c.fit.mu:.6g}"
                out.append(f"  block ({c.rows.start},{c.cols.start}): {c.status} mu={mu} peak={c.peak:.3e}")
        return "\n".join(out) + "\n"

    def write(self, directory, stem: str = "module") -> Path:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        refs = {}
        for o in self.cocycle.overlaps:
            if o.raw is not None:
                name = f"{stem}_overlap{o.index}.csv"
                o.raw.write_csv(d / name)
                refs[o.index] = name
        path = d / f"{stem}.stokes"
        path.write_text(self.to_text(refs))
        return path


def rh_assemble(fd: FormalDatum, sc: StokesCocycle) -> FilteredModuleDatum:
    """Package the graded datum, covering and cocycle; levels are the column exponents."""
    if sc.rank != fd.rank or [b.rank for b in sc.fd.blocks] != [b.rank for b in fd.blocks]:
        raise InconsistentData("cocycle and formal datum have different block structure")
    for b, c in zip(fd.blocks, sc.fd.blocks):
        if not same_orbit(b.a, c.a):
            raise InconsistentData(f"exponent orbits differ: {b.a.to_text()} vs {c.a.to_text()}")
    for o in sc.overlaps:
        if o.limit.shape != (fd.rank, fd.rank):
            raise InconsistentData(f"overlap {o.index} has a transition of the wrong size")
    cols = fd.column_exponents()
    levels = [list(cols) for _ in range(len(sc.covering))]
    return FilteredModuleDatum(grading(sc), sc.covering, sc, levels)
