"""Periodic spectrum of the Hill equation phi'' + [lambda f(y) - p^2] phi = 0.

For each Fourier index p the eigenvalues gamma_i(p) of the a-periodic
problem are the roots of Psi(p^2, lambda)^2 = 4, where Psi is the
discriminant z1(b) + z2'(b) of the fundamental pair integrated over the
half period b = a/2 (f has period b and is even).  Roots of Psi - 2 and
Psi + 2 are bracketed separately on a lambda grid and polished by
bisection; each eigenfunction is classified even or odd from which of
z1'(b), z2(b) vanishes.

Counting the eigenvalues below lambda = 2 with the torus or Klein-bottle
selection rules yields the rank of the extremal eigenvalue and the
multiplicity-5 cluster at 2.

The propagation uses a fixed-step Cooper-Verner RK8 vectorized across
(p, lambda) columns, with f precomputed at all stage nodes; grid scans
and bisections therefore batch into a handful of array sweeps.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import IO, Optional, Sequence

import numpy as np

from .surface_model import (
    SurfaceParams,
    Topology,
    ParityClass,
    area_closed_form,
    derive_params,
    metric_f_array,
    period_a,
)

__all__ = [
    "SpectrumMismatchError",
    "Parity",
    "FloquetMatrix",
    "Eigenvalue",
    "SpectralLine",
    "CountResult",
    "MonotonicityReport",
    "ExtremalReport",
    "floquet",
    "transfer_state",
    "discriminant",
    "find_branch",
    "branch_monotonicity",
    "count_below_two",
    "multiplicity_at_two",
    "extremal_rank",
    "surface_lines",
    "eigenfunction_samples",
    "count_zeros",
    "write_spectrum_csv",
    "DEFAULT_SOLVER_TOL",
    "BISECTION_TOL",
    "CLUSTER_DELTA",
]

DEFAULT_SOLVER_TOL = 1e-9
BISECTION_TOL = 1e-11
#: half-width of the eigenvalue cluster identified with lambda = 2
CLUSTER_DELTA = 1e-6
#: below this, a located root counts as the zero eigenvalue
ZERO_EIGENVALUE_TOL = 1e-6
PARITY_THRESHOLD = 1e-7
#: lambda grid for bracketing; offset keeps exact eigenvalues off the grid
GRID_STEP = 0.01
LAMBDA_MIN = -0.0503713
LAMBDA_MAX_COUNT = 2.0513713


class SpectrumMismatchError(RuntimeError):
    """Numerically counted spectrum disagrees with the closed-form count."""


class Parity(Enum):
    EVEN = "Even"
    ODD = "Odd"


# ---------------------------------------------------------------------------
# Cooper-Verner eighth-order tableau (stage sums keep sqrt(21) exactly)
# ---------------------------------------------------------------------------

_S21 = math.sqrt(21.0)
_CV_C = np.array([0.0, 0.5, 0.5, (7 + _S21) / 14, (7 + _S21) / 14, 0.5,
                  (7 - _S21) / 14, (7 - _S21) / 14, 0.5, (7 + _S21) / 14, 1.0])
_CV_A = [
    [],
    [(0, 0.5)],
    [(0, 0.25), (1, 0.25)],
    [(0, 1 / 7), (1, (-7 - 3 * _S21) / 98), (2, (21 + 5 * _S21) / 49)],
    [(0, (11 + _S21) / 84), (2, (18 + 4 * _S21) / 63), (3, (21 - _S21) / 252)],
    [(0, (5 + _S21) / 48), (2, (9 + _S21) / 36), (3, (-231 + 14 * _S21) / 360),
     (4, (63 - 7 * _S21) / 80)],
    [(0, (10 - _S21) / 42), (2, (-432 + 92 * _S21) / 315),
     (3, (633 - 145 * _S21) / 90), (4, (-504 + 115 * _S21) / 70),
     (5, (63 - 13 * _S21) / 35)],
    [(0, 1 / 14), (4, (14 - 3 * _S21) / 126), (5, (13 - 3 * _S21) / 63), (6, 1 / 9)],
    [(0, 1 / 32), (4, (91 - 21 * _S21) / 576), (5, 11 / 72),
     (6, (-385 - 75 * _S21) / 1152), (7, (63 + 13 * _S21) / 128)],
    [(0, 1 / 14), (4, 1 / 9), (5, (-733 - 147 * _S21) / 2205),
     (6, (515 + 111 * _S21) / 504), (7, (-51 - 11 * _S21) / 56),
     (8, (132 + 28 * _S21) / 245)],
    [(4, (-42 + 7 * _S21) / 18), (5, (-18 + 28 * _S21) / 45),
     (6, (-273 - 53 * _S21) / 72), (7, (301 + 53 * _S21) / 72),
     (8, (28 - 28 * _S21) / 45), (9, (49 - 7 * _S21) / 18)],
]
_CV_B = [(0, 1 / 20), (7, 49 / 180), (8, 16 / 45), (9, 49 / 180), (10, 1 / 20)]

_F_NODE_CACHE: dict[tuple, np.ndarray] = {}


def _f_nodes(params: SurfaceParams, y_end: float, n_steps: int) -> np.ndarray:
    key = (params.n, params.m, float(y_end), int(n_steps))
    cached = _F_NODE_CACHE.get(key)
    if cached is None:
        h = y_end / n_steps
        nodes = (np.arange(n_steps)[:, None] + _CV_C[None, :]) * h
        cached = metric_f_array(nodes.ravel(), params).reshape(n_steps, 11)
        _F_NODE_CACHE[key] = cached
    return cached


def _steps_for(params: SurfaceParams, tol: float, y_end: float) -> int:
    """Fixed step count giving global error below tol for the RK8 scheme."""
    n, m = params.n, params.m
    omega = math.sqrt((n + 2) ** 2 + 1.03 * (n * n + m * m))
    n_steps = int(math.ceil(1.5 * omega * y_end * tol ** (-1.0 / 8.0)))
    return min(max(n_steps, 96), 4096)


def _propagate(params: SurfaceParams, p2, lam, y_end: float,
               n_steps: int) -> np.ndarray:
    """Fundamental pair of the Hill equation at y_end, batched over columns.

    Returns shape (4, B): rows z1, z1', z2, z2'.
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    p2 = np.broadcast_to(np.asarray(p2, dtype=float), lam.shape)
    nodes = _f_nodes(params, y_end, n_steps)
    h = y_end / n_steps
    rows = [[(j, h * a) for j, a in row] for row in _CV_A]
    weights = [(i, h * w) for i, w in _CV_B]
    state = np.zeros((4, lam.shape[0]))
    state[0] = 1.0
    state[3] = 1.0
    for step in range(n_steps):
        fj = nodes[step]
        ks: list[np.ndarray] = []
        for i in range(11):
            yi = state
            for j, ha in rows[i]:
                yi = yi + ha * ks[j]
            q = p2 - lam * fj[i]
            ki = np.empty_like(state)
            ki[0] = yi[1]
            ki[1] = q * yi[0]
            ki[2] = yi[3]
            ki[3] = q * yi[2]
            ks.append(ki)
        acc = state
        for i, hw in weights:
            acc = acc + hw * ks[i]
        state = acc
    return state


# ---------------------------------------------------------------------------
# public data types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FloquetMatrix:
    """Fundamental-solution data at the half period b = a/2."""

    z1_b: float
    dz1_b: float
    z2_b: float
    dz2_b: float
    p: float
    lam: float

    def wronskian(self) -> float:
        return self.z1_b * self.dz2_b - self.z2_b * self.dz1_b


@dataclass(frozen=True)
class Eigenvalue:
    """One located root gamma_index(p) with its parity label."""

    gamma: float
    index: int
    parity: Parity
    psi_target: float          # +2 (b-periodic) or -2 (b-antiperiodic)
    fm: FloquetMatrix
    anomaly: Optional[str] = None


@dataclass(frozen=True)
class SpectralLine:
    """Ordered eigenvalues of one Fourier index p, gamma_0 < gamma_1 <= ..."""

    p: float
    eigenvalues: tuple[Eigenvalue, ...]
    double_root_flags: tuple[str, ...] = ()

    def gamma(self, index: int) -> float:
        return self.eigenvalues[index].gamma


@dataclass(frozen=True)
class CountResult:
    """Eigenvalues below lambda = 2 with their selection bookkeeping."""

    count: int
    closed_form: int
    contributing: tuple[tuple, ...]   # (p, branch_index, gamma, parity, weight)


@dataclass(frozen=True)
class MonotonicityReport:
    p_grid: np.ndarray
    gammas: np.ndarray
    diffs: np.ndarray

    @property
    def strictly_increasing(self) -> bool:
        return bool(np.all(self.diffs > 0.0))

    @property
    def min_diff(self) -> float:
        return float(np.min(self.diffs))


@dataclass(frozen=True)
class ExtremalReport:
    """Rank and multiplicity data for one surface."""

    params: SurfaceParams
    rank_i: int
    multiplicity: int
    lambda_functional: float
    residuals: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# basic operations
# ---------------------------------------------------------------------------

def transfer_state(params: SurfaceParams, p: float, lam: float, y_end: float,
                   tol: float = DEFAULT_SOLVER_TOL) -> tuple[float, float, float, float]:
    """(z1, z1', z2, z2') at y_end for initial data z1=1, z1'=0, z2=0, z2'=1."""
    st = _propagate(params, p * p, [lam], y_end, _steps_for(params, tol, y_end))
    return float(st[0, 0]), float(st[1, 0]), float(st[2, 0]), float(st[3, 0])


def floquet(p: float, lam: float, params: SurfaceParams,
            tol: float = DEFAULT_SOLVER_TOL) -> FloquetMatrix:
    """Integrate the fundamental pair over [0, b], b = a/2."""
    if not math.isfinite(lam) or p < 0:
        raise ValueError("need finite lambda and p >= 0")
    b = period_a(params) / 2.0
    z1, dz1, z2, dz2 = transfer_state(params, p, lam, b, tol)
    return FloquetMatrix(z1_b=z1, dz1_b=dz1, z2_b=z2, dz2_b=dz2, p=p, lam=lam)


def discriminant(fm: FloquetMatrix) -> float:
    """Floquet discriminant Psi = z1(b) + z2'(b); eigenvalues solve Psi^2 = 4."""
    return fm.z1_b + fm.dz2_b


# ---------------------------------------------------------------------------
# root location
# ---------------------------------------------------------------------------

# objective kinds for bracketing: the discriminant offset plus the two
# auxiliary functions whose zeros are exactly the even/odd eigenvalues
_KIND_PSI = 0
_KIND_Z2 = 1      # z2(b) = 0  <=>  odd a-periodic eigenfunction
_KIND_DZ1 = 2     # z1'(b) = 0 <=>  even a-periodic eigenfunction


def _state_grid(params: SurfaceParams, p_values: Sequence[float],
                lam_grid: np.ndarray, n_steps: int) -> np.ndarray:
    b = period_a(params) / 2.0
    p2 = np.repeat(np.square(np.asarray(p_values, float)), lam_grid.size)
    lam = np.tile(lam_grid, len(p_values))
    st = _propagate(params, p2, lam, b, n_steps)
    return st.reshape(4, len(p_values), lam_grid.size)


def _objective(st: np.ndarray, kind: np.ndarray, target: np.ndarray) -> np.ndarray:
    return np.where(kind == _KIND_PSI, st[0] + st[3] - target,
                    np.where(kind == _KIND_Z2, st[2], st[1]))


def _bisect_batch(params: SurfaceParams, p2: np.ndarray, lo: np.ndarray,
                  hi: np.ndarray, g_lo: np.ndarray, kind: np.ndarray,
                  target: np.ndarray, n_steps: int) -> np.ndarray:
    """Vectorized bisection of the per-column objective on given brackets."""
    b = period_a(params) / 2.0
    iters = int(math.ceil(math.log2(GRID_STEP / BISECTION_TOL))) + 3
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        st = _propagate(params, p2, mid, b, n_steps)
        g_mid = _objective(st, kind, target)
        same = g_lo * g_mid > 0.0
        lo = np.where(same, mid, lo)
        g_lo = np.where(same, g_mid, g_lo)
        hi = np.where(same, hi, mid)
    return 0.5 * (lo + hi)


def _expected_targets(count: int) -> list[float]:
    """Discriminant signs along a line: +2, -2, -2, +2, +2, -2, -2, ..."""
    out = [2.0]
    sign = -2.0
    while len(out) < count:
        out.extend([sign, sign])
        sign = -sign
    return out[:count]


def _line_roots_raw(params, p_values, lam_grid, n_steps):
    """Bracket sign changes on the grid; per line, a list of
    (lo, hi, g_lo, kind, target).

    Psi - 2 and Psi + 2 are bracketed separately (kind _KIND_PSI); in
    addition the auxiliaries z2(b) and z1'(b) are bracketed so that a
    narrow instability interval whose two discriminant roots fall inside
    one grid cell is still recovered (each family has simple, well
    separated zeros, and every zero is an a-periodic eigenvalue).
    """
    st = _state_grid(params, p_values, lam_grid, n_steps)
    psi = st[0] + st[3]
    jobs: list[list[tuple]] = [[] for _ in p_values]
    for li in range(len(p_values)):
        for target in (2.0, -2.0):
            g = psi[li] - target
            crossings = np.nonzero(g[:-1] * g[1:] < 0.0)[0]
            for i in crossings:
                jobs[li].append((lam_grid[i], lam_grid[i + 1], g[i],
                                 _KIND_PSI, target))
            for i in np.nonzero(g == 0.0)[0]:
                # grid point exactly on a root (the offsets make this rare)
                jobs[li].append((lam_grid[i] - 1e-12, lam_grid[i] + 1e-12,
                                 -1.0, _KIND_PSI, target))
        for kind, row in ((_KIND_Z2, st[2, li]), (_KIND_DZ1, st[1, li])):
            crossings = np.nonzero(row[:-1] * row[1:] < 0.0)[0]
            for i in crossings:
                jobs[li].append((lam_grid[i], lam_grid[i + 1], row[i],
                                 kind, 0.0))
    return jobs


def _classify(params: SurfaceParams, p: float, roots: list[float],
              n_steps: int) -> SpectralLine:
    """Build a SpectralLine from bisected roots."""
    b = period_a(params) / 2.0
    roots = sorted(roots)
    flags = []
    eigs = []
    if roots:
        lam = np.array(roots)
        st = _propagate(params, p * p, lam, b, n_steps)
        for idx, gamma in enumerate(roots):
            fm = FloquetMatrix(z1_b=float(st[0, idx]), dz1_b=float(st[1, idx]),
                               z2_b=float(st[2, idx]), dz2_b=float(st[3, idx]),
                               p=p, lam=gamma)
            psi = fm.z1_b + fm.dz2_b
            target = 2.0 if psi > 0.0 else -2.0
            if abs(psi - target) > 1e-6:
                raise SpectrumMismatchError(
                    f"located root gamma={gamma!r} at p={p} has Psi={psi!r}, "
                    "not an eigenvalue")
            s_even = abs(fm.dz1_b)
            s_odd = abs(fm.z2_b) / b
            anomaly = None
            if s_even < PARITY_THRESHOLD and s_odd < PARITY_THRESHOLD:
                anomaly = "coexistence: both z2(b) and z1'(b) vanish"
                flags.append(f"gamma_{idx}({p})={gamma:.12g}: {anomaly}")
            elif min(s_even, s_odd) >= PARITY_THRESHOLD:
                anomaly = (f"unresolved parity: |z1'(b)|={s_even:.3e}, "
                           f"|z2(b)|/b={s_odd:.3e}")
                flags.append(f"gamma_{idx}({p})={gamma:.12g}: {anomaly}")
            parity = Parity.EVEN if s_even < s_odd else Parity.ODD
            eigs.append(Eigenvalue(gamma=gamma, index=idx, parity=parity,
                                   psi_target=target, fm=fm, anomaly=anomaly))
    return SpectralLine(p=p, eigenvalues=tuple(eigs),
                        double_root_flags=tuple(flags))


def _scan_lines(params: SurfaceParams, p_values: Sequence[float],
                lambda_max: float, tol: float) -> list[SpectralLine]:
    """Locate all eigenvalues in (LAMBDA_MIN, lambda_max] for several lines."""
    b = period_a(params) / 2.0
    n_steps = _steps_for(params, tol, b)
    npts = int(math.ceil((lambda_max - LAMBDA_MIN) / GRID_STEP)) + 1
    lam_grid = LAMBDA_MIN + GRID_STEP * np.arange(npts)
    jobs = _line_roots_raw(params, p_values, lam_grid, n_steps)
    flat = [(li, job) for li, line_jobs in enumerate(jobs) for job in line_jobs]
    if flat:
        lo = np.array([j[1][0] for j in flat])
        hi = np.array([j[1][1] for j in flat])
        glo = np.array([j[1][2] for j in flat])
        kind = np.array([j[1][3] for j in flat])
        tgt = np.array([j[1][4] for j in flat])
        p2 = np.array([p_values[li] ** 2 for li, _ in flat])
        roots = _bisect_batch(params, p2, lo, hi, glo, kind, tgt, n_steps)
    lines: list[SpectralLine] = []
    for li, p in enumerate(p_values):
        primary = [float(roots[i]) for i in range(len(flat))
                   if flat[i][0] == li and flat[i][1][3] == _KIND_PSI]
        recovered = [float(roots[i]) for i in range(len(flat))
                     if flat[i][0] == li and flat[i][1][3] != _KIND_PSI]
        mine = sorted(primary)
        for root in recovered:
            if not mine or min(abs(root - r) for r in mine) > 1e-9:
                mine.append(root)
                mine.sort()
        line = _classify(params, p, mine, n_steps)
        _check_sign_pattern(line)
        lines.append(line)
    return lines


def _check_sign_pattern(line: SpectralLine) -> None:
    """The target signs must follow the +, -, -, +, +, ... interlacing;
    a violation means a bracket was missed on the grid."""
    targets = [e.psi_target for e in line.eigenvalues]
    if targets != _expected_targets(len(targets)):
        raise SpectrumMismatchError(
            f"discriminant sign pattern broken on line p={line.p}: {targets}")


def find_branch(p: int, lambda_max: float, params: SurfaceParams,
                tol: float = DEFAULT_SOLVER_TOL) -> SpectralLine:
    """All eigenvalues gamma_i(p) <= lambda_max with parity labels.

    lambda_max may not exceed 3: beyond that simple-root bracketing loses
    its guarantee (coexistence becomes possible).
    """
    if lambda_max > 3.0:
        raise ValueError("lambda_max above 3 voids the simplicity guarantee")
    return _scan_lines(params, [p], lambda_max, tol)[0]


_SURFACE_LINES_CACHE: dict[tuple, tuple[SpectralLine, ...]] = {}


def surface_lines(params: SurfaceParams,
                  tol: float = DEFAULT_SOLVER_TOL) -> tuple[SpectralLine, ...]:
    """Spectral lines p = 0..n+1 up to just past lambda = 2 (cached)."""
    key = (params.n, params.m, tol)
    if key not in _SURFACE_LINES_CACHE:
        p_values = list(range(params.n + 2))
        _SURFACE_LINES_CACHE[key] = tuple(
            _scan_lines(params, p_values, LAMBDA_MAX_COUNT, tol))
    return _SURFACE_LINES_CACHE[key]


# ---------------------------------------------------------------------------
# monotonicity
# ---------------------------------------------------------------------------

def branch_monotonicity(params: SurfaceParams, branch_index: int,
                        p_grid: Sequence[float],
                        tol: float = DEFAULT_SOLVER_TOL) -> MonotonicityReport:
    """gamma_{branch_index}(p) on a real p grid with consecutive differences."""
    lines = _scan_lines(params, list(p_grid), LAMBDA_MAX_COUNT, tol)
    gammas = []
    for line in lines:
        if branch_index >= len(line.eigenvalues):
            raise SpectrumMismatchError(
                f"branch {branch_index} not found at p={line.p}")
        gammas.append(line.gamma(branch_index))
    gammas = np.array(gammas)
    return MonotonicityReport(p_grid=np.asarray(p_grid, float), gammas=gammas,
                              diffs=np.diff(gammas))


# ---------------------------------------------------------------------------
# counting and the extremal rank
# ---------------------------------------------------------------------------

def _keeps(parity: Parity, p: int, topology: Topology) -> bool:
    """Klein-bottle selection: cos(px) phi(y) survives the deck map
    (x, y) -> (x + pi, -y) iff (-1)^p matches the parity of phi."""
    if topology is Topology.TORUS:
        return True
    even_p = p % 2 == 0
    return even_p == (parity is Parity.EVEN)


def count_below_two(params: SurfaceParams,
                    topology_override: Optional[Topology] = None,
                    tol: float = DEFAULT_SOLVER_TOL) -> CountResult:
    """Count nonzero eigenvalues of the surface below lambda = 2.

    Every root located on the lines p = 0..n+1 is inspected, so a stray
    branch would break the exact match with the closed-form count
    2(n+m) - 3 (torus) or n+m - 3 (Klein bottle), raising
    SpectrumMismatchError with the branch data.
    """
    topo = topology_override or params.topology
    lines = surface_lines(params, tol)
    contributing = []
    total = 0
    for line in lines:
        p = int(line.p)
        for eig in line.eigenvalues:
            if eig.gamma < ZERO_EIGENVALUE_TOL:
                continue          # the zero mode gamma_0(0) = 0
            if eig.gamma >= 2.0 - CLUSTER_DELTA:
                continue
            if not _keeps(eig.parity, p, topo):
                continue
            weight = 1 if p == 0 else 2
            total += weight
            contributing.append((p, eig.index, eig.gamma, eig.parity.value, weight))
    n, m = params.n, params.m
    closed = 2 * (n + m) - 3 if topo is Topology.TORUS else n + m - 3
    if total != closed:
        dump = "\n".join(
            f"  p={line.p}: " + ", ".join(
                f"g{e.index}={e.gamma:.9f}[{e.parity.value}]"
                for e in line.eigenvalues)
            for line in lines)
        raise SpectrumMismatchError(
            f"count below 2 is {total}, closed form {closed} "
            f"({params}, counting as {topo.value});\n{dump}")
    return CountResult(count=total, closed_form=closed,
                       contributing=tuple(contributing))


def multiplicity_at_two(params: SurfaceParams,
                        topology_override: Optional[Topology] = None,
                        tol: float = DEFAULT_SOLVER_TOL) -> tuple[int, tuple]:
    """Weighted count of eigenvalues inside [2 - delta, 2 + delta]."""
    topo = topology_override or params.topology
    cluster = []
    mult = 0
    for line in surface_lines(params, tol):
        p = int(line.p)
        for eig in line.eigenvalues:
            if abs(eig.gamma - 2.0) > CLUSTER_DELTA:
                continue
            if not _keeps(eig.parity, p, topo):
                continue
            weight = 1 if p == 0 else 2
            mult += weight
            cluster.append((p, eig.index, eig.gamma, eig.parity.value, weight))
    return mult, tuple(cluster)


_RANK_FORMULAS = {
    ParityClass.EVEN_RK: lambda r: 4 * r - 2,
    ParityClass.RK_1_MOD_4: lambda r: 2 * r - 2,
    ParityClass.RK_3_MOD_4: lambda r: r - 2,
}


def rank_formula(params: SurfaceParams) -> int:
    """Closed-form extremal rank: 4r-2, 2r-2, or r-2 by parity class."""
    return _RANK_FORMULAS[params.parity_class](params.r)


def extremal_rank(r: int, k: int, tol: float = DEFAULT_SOLVER_TOL) -> ExtremalReport:
    """Smallest index i with lambda_i = 2, checked against the closed form.

    Also verifies mult(2) = 5 and the branch anchors gamma_0(n) = 2,
    gamma_1(m) = 2, gamma_2(0) = 2, gamma_0(0) = 0.
    """
    params = derive_params(r, k)
    counted = count_below_two(params, tol=tol)
    rank = counted.count + 1
    expected = rank_formula(params)
    if rank != expected:
        raise SpectrumMismatchError(
            f"rank {rank} disagrees with the closed form {expected} for {params}")
    mult, cluster = multiplicity_at_two(params, tol=tol)
    if mult != 5:
        raise SpectrumMismatchError(
            f"multiplicity at 2 is {mult}, expected 5 for {params}; "
            f"cluster: {cluster}")
    lines = {int(line.p): line for line in surface_lines(params, tol)}
    anomalies = [f for line in lines.values() for f in line.double_root_flags]
    residuals = {
        "anchor_gamma0_at_0": abs(lines[0].gamma(0)),
        "anchor_gamma2_at_0": abs(lines[0].gamma(2) - 2.0),
        "anchor_gamma1_at_m": abs(lines[params.m].gamma(1) - 2.0),
        "anchor_gamma0_at_n": abs(lines[params.n].gamma(0) - 2.0),
        "count_gap": float(abs(counted.count - counted.closed_form)),
        "double_root_flags": float(len(anomalies)),
    }
    return ExtremalReport(params=params, rank_i=rank, multiplicity=mult,
                          lambda_functional=2.0 * area_closed_form(params),
                          residuals=residuals)


# ---------------------------------------------------------------------------
# eigenfunction reconstruction
# ---------------------------------------------------------------------------

def eigenfunction_samples(params: SurfaceParams, p: float, gamma: float,
                          parity: Parity, n_samples: int = 4096,
                          tol: float = DEFAULT_SOLVER_TOL):
    """Sample the eigenfunction (z1 if even, z2 if odd) on [0, a)."""
    a = period_a(params)
    n_steps = max(_steps_for(params, tol, a), n_samples)
    n_steps = int(math.ceil(n_steps / n_samples)) * n_samples
    nodes = _f_nodes(params, a, n_steps)
    h = a / n_steps
    rows = [[(j, h * c) for j, c in row] for row in _CV_A]
    weights = [(i, h * w) for i, w in _CV_B]
    state = np.array([1.0, 0.0]) if parity is Parity.EVEN else np.array([0.0, 1.0])
    keep_every = n_steps // n_samples
    ys = np.empty(n_samples)
    vals = np.empty(n_samples)
    for step in range(n_steps):
        if step % keep_every == 0:
            ys[step // keep_every] = step * h
            vals[step // keep_every] = state[0]
        fj = nodes[step]
        ks = []
        for i in range(11):
            yi = state
            for j, ha in rows[i]:
                yi = yi + ha * ks[j]
            q = p * p - gamma * fj[i]
            ks.append(np.array([yi[1], q * yi[0]]))
        for i, hw in weights:
            state = state + hw * ks[i]
    return ys, vals


def count_zeros(values: np.ndarray, rel_tol: float = 1e-9) -> int:
    """Zeros of a sampled function on one period (sign changes plus
    isolated zero samples; a zero run and its sign flip count once)."""
    scale = float(np.max(np.abs(values)))
    zeros = 0
    last_sign = 0
    after_zero_run = False
    in_zero_run = False
    for v in values:
        if abs(v) <= rel_tol * scale:
            if not in_zero_run:
                zeros += 1
                in_zero_run = True
                after_zero_run = True
            continue
        in_zero_run = False
        s = 1 if v > 0 else -1
        if last_sign != 0 and s != last_sign and not after_zero_run:
            zeros += 1
        last_sign = s
        after_zero_run = False
    return zeros


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------

def write_spectrum_csv(stream: IO[str], lines: Sequence[SpectralLine]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["p", "branch_index", "gamma", "parity", "z2_b", "dz1_b", "psi"])
    for line in lines:
        for eig in line.eigenvalues:
            writer.writerow([
                format(float(line.p), ".17g"), eig.index,
                format(eig.gamma, ".17g"), eig.parity.value,
                format(eig.fm.z2_b, ".17g"), format(eig.fm.dz1_b, ".17g"),
                format(discriminant(eig.fm), ".17g"),
            ])
