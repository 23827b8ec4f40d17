"""Biorthogonal eigenpairs, band tracking and the Zak phase.

Gauge convention
----------------
Right eigenvectors are fixed by setting their fourth (d-site) component to 1,
which is the gauge of the closed-form eigenvector below.  The left partner is
the plain transpose of the right eigenvector at -k (no conjugation; this
works because H(k)^T = H(-k) and the spectrum is even in k).  The Zak phase
is a Wilson loop evaluated in this fixed gauge, so its integer part is
meaningful and any rescaling of the stored vectors is undone before the loop.

Summing the phase over all four bands in this gauge gives the 0 / 2pi
plateaus of the insulating phases.  The occupied pair on its own does not
give quantized values above u2c, see `zak_phase`.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .lattice import (
    ModelParams,
    analytic_eigenvalues,
    bloch_hamiltonian,
    in_gapless_window,
    numeric_gapless,
    spectral_gap,
)

DENOM_TOL = 1e-8        # closed-form eigenvector denominator floor
SELF_ORTH_TOL = 1e-8    # relative |phi.psi| below this = self-orthogonal
OFFDIAG_TOL = 1e-6      # relative cross-band overlap allowed before normalization
MARGIN_TOL = 1e-3       # tracking assignment margin below this is flagged
U_GAUGE_FLOOR = 1e-5    # below this u the loop is evaluated at this u (see zak_phase)


class TopologyError(RuntimeError):
    code = "TOPOLOGY"


class DegenerateFormula(TopologyError):
    code = "DEGENERATE_FORMULA"


class SelfOrthogonal(TopologyError):
    code = "SELF_ORTHOGONAL"

    def __init__(self, msg, bands=()):
        super().__init__(msg)
        self.bands = tuple(bands)


class IdentityMismatch(TopologyError):
    code = "IDENTITY_MISMATCH"


class Unresolved(TopologyError):
    code = "UNRESOLVED"


# ---------------------------------------------------------------- eigenpairs

def analytic_right_eigenvector(params: ModelParams, k: float, z: complex) -> np.ndarray:
    """Closed-form right eigenvector with fourth component 1."""
    w1, w2, u = params.w1, params.w2, params.u
    e = np.exp(1j * k)
    D = z * (1 + e) - 1j * u
    if abs(D) < DENOM_TOL:
        raise DegenerateFormula(f"|z(1+e^ik) - iu| = {abs(D):.3g} at k={k}, z={z}")
    return np.array([
        (z * z - w1 ** 2 + w2 ** 2 / e) / (w2 * D),
        (z ** 3 - 1j * u * z * z - (w1 ** 2 + w2 ** 2) * z + 1j * u * w1 ** 2) / (w1 * w2 * D),
        (z * (z - 1j * u) + w1 ** 2 * e - w2 ** 2) / (w1 * D),
        1.0 + 0j,
    ])


def _numeric_right(params, k, z, ambiguity=1e-9):
    """Numeric right eigenvector of H(k) for the eigenvalue closest to z."""
    vals, vecs = np.linalg.eig(bloch_hamiltonian(params, k))
    d = np.abs(vals - z)
    order = np.argsort(d)
    if d[order[1]] - d[order[0]] < ambiguity:
        raise IdentityMismatch(f"two eigenvalues of H({k}) equally close to {z}")
    v = vecs[:, order[0]]
    if abs(v[3]) > 1e-12:
        v = v / v[3]
    return v


def left_eigenvector(params: ModelParams, k: float, z: complex, analytic: bool = True) -> np.ndarray:
    """Left eigenvector phi(k) = psi(-k)^T for the band with eigenvalue z.

    Band identity is carried by the eigenvalue, which is the same at k and -k.
    The closed form is used when it is well conditioned.
    """
    if analytic:
        try:
            return analytic_right_eigenvector(params, -k, z)
        except DegenerateFormula:
            pass
    return _numeric_right(params, -k, z)


def _rel_overlap(phi, psi):
    return abs(phi @ psi) / (np.linalg.norm(phi) * np.linalg.norm(psi))


def biorthonormalize(rights: np.ndarray, lefts: np.ndarray):
    """Rescale so that phi_n . psi_n = 1.  rights: columns, lefts: rows.

    psi is divided by the overlap, phi is left alone.  Raises SelfOrthogonal
    if some |phi_n psi_n| / (|phi_n| |psi_n|) < 1e-8, and ValueError if the
    cross-band overlaps are not small (the inputs are not matched bands).
    """
    R = np.array(rights, dtype=complex)
    L = np.array(lefts, dtype=complex)
    S = L @ R
    nl = np.linalg.norm(L, axis=1)
    nr = np.linalg.norm(R, axis=0)
    rel = np.abs(S) / np.outer(nl, nr)
    diag = np.diag(rel)
    bad = np.flatnonzero(diag < SELF_ORTH_TOL)
    if bad.size:
        raise SelfOrthogonal(f"self-orthogonal band(s) {bad.tolist()}, |phi psi| = {diag[bad]}", bad)
    off = rel - np.diag(diag)
    if off.max(initial=0.0) > OFFDIAG_TOL * diag.min():
        raise ValueError(f"cross-band overlap {off.max():.3g} exceeds tolerance")
    return R / np.diag(S)[None, :], L


def coalescing_pair(params: ModelParams, k: float):
    """Nearest pair of analytic eigenvalues at k.

    Returns (mean, separation).  The mean of a nearly defective pair is far
    better conditioned than either member, so it is the right eigenvalue to
    build the coalesced eigenvector from.
    """
    z = analytic_eigenvalues(params, k)
    d = np.abs(z[:, None] - z[None, :])
    np.fill_diagonal(d, np.inf)
    i, j = np.unravel_index(np.argmin(d), d.shape)
    return (z[i] + z[j]) / 2, float(d[i, j])


def check_self_orthogonal(params: ModelParams, k: float):
    """Biorthonormalize the coalescing pair at k.  Returns the SelfOrthogonal
    error if it is signalled, otherwise None."""
    zm, _ = coalescing_pair(params, k)
    psi = analytic_right_eigenvector(params, k, zm)
    phi = left_eigenvector(params, k, zm)
    try:
        biorthonormalize(psi[:, None], phi[None, :])
    except SelfOrthogonal as exc:
        return exc
    return None


@dataclass
class BlochEigenpair:
    band_index: int
    value: complex
    right: np.ndarray
    left: np.ndarray


@dataclass
class BandSet:
    """Tracked bands on a periodic grid.

    Arrays are indexed [j, ...] over the grid; right[j] holds eigenvectors as
    columns, left[j] as rows, both biorthonormalized where possible.
    `closure` maps band labels at the last point onto labels at the first
    point after one loop.
    """
    params: ModelParams
    k: np.ndarray
    values: np.ndarray
    right: np.ndarray
    left: np.ndarray
    flagged: np.ndarray
    margin: np.ndarray
    closure: np.ndarray
    self_orthogonal: np.ndarray = field(default=None)
    n_uniform: int = 0

    @property
    def n_k(self):
        return len(self.k)

    def pairs(self, j: int):
        return [BlochEigenpair(n + 1, self.values[j, n], self.right[j, :, n], self.left[j, n, :])
                for n in range(4)]


# ---------------------------------------------------------------- k grids

def _h_roots(params: ModelParams) -> np.ndarray:
    """Roots of the cubic that carries the winding in the d-site gauge.

    In this gauge det(psi_1..psi_4)^2 is, up to a real factor of fixed sign
    outside the semi-metal window, 1/h(q)^2 with q = e^{ik} and
    h(q) = -w2^2 q^3 + (w1^2 - 2w2^2 - u^2) q^2 + (2w1^2 - w2^2 - 2u^2) q + w1^2.
    Roots close to the unit circle make the phase turn within a width of
    about their distance to the circle, which a uniform grid can miss.
    """
    w1s, w2s, u2 = params.w1 ** 2, params.w2 ** 2, params.u ** 2
    return np.roots([-w2s, w1s - 2 * w2s - u2, 2 * w1s - w2s - 2 * u2, w1s])


def zak_grid(params: ModelParams, n_k: int) -> np.ndarray:
    """Uniform grid on [-pi, pi) plus geometric clusters around the arguments
    of near-circle roots of h, so that sharp phase turns are resolved."""
    step = 2 * np.pi / n_k
    ks = [-np.pi + step * np.arange(n_k)]
    for r in _h_roots(params):
        dist = abs(abs(r) - 1.0)
        if dist >= 4 * step or dist == 0:
            continue
        a = float(np.angle(r))
        n_off = int(np.ceil(np.log(40 * step / dist) / np.log(1.25))) + 1
        off = np.geomspace(0.05 * dist, 2 * step, n_off)
        ks.append(np.concatenate([a + off, a - off, [a]]))
    k = np.concatenate(ks)
    k = (k + np.pi) % (2 * np.pi) - np.pi
    return np.unique(k)


# ---------------------------------------------------------------- tracking

def _canonical(V):
    """Divide eigenvector columns by their d-site component (batched)."""
    d = V[..., 3:4, :]
    tiny = np.abs(d) < 1e-14
    d = np.where(tiny, 1.0, d)
    return V / d


def _eig_batch(params, ks):
    vals, vecs = np.linalg.eig(bloch_hamiltonian(params, ks))
    return vals, _canonical(vecs)


def _match_values(za, zb):
    C = np.abs(za[:, None] - zb[None, :])
    _, c = linear_sum_assignment(C)
    return c


def _unit_overlap(L, R):
    Ln = L / np.linalg.norm(L, axis=1, keepdims=True)
    Rn = R / np.linalg.norm(R, axis=0, keepdims=True)
    return np.abs(Ln @ Rn)


def _assign(L, R):
    """Best matching of rows of L onto columns of R and its margin."""
    O = _unit_overlap(L, R)
    r, c = linear_sum_assignment(-O)
    best = O[r, c]
    rest = O.copy()
    rest[r, c] = -np.inf
    second = rest.max(axis=1)
    return c, float(np.min(best - second))


def track_bands(params: ModelParams, n_k: int = 512, refine: bool = True) -> BandSet:
    """Eigenpairs on a periodic k grid with band labels continued by overlap.

    Left vectors come from H(-k) (phi(k) = psi(-k)^T) matched by eigenvalue.
    Points where biorthonormalization fails or the assignment margin is
    below 1e-3 are flagged as EP neighbourhoods rather than treated as errors.
    """
    if n_k < 64:
        raise ValueError("n_k >= 64 required")
    ks = zak_grid(params, n_k) if refine else -np.pi + 2 * np.pi * np.arange(n_k) / n_k
    vals, R = _eig_batch(params, ks)
    vals_m, Rm = _eig_batch(params, -ks)
    nk = len(ks)
    L = np.empty_like(R)
    flagged = np.zeros(nk, bool)
    selforth = np.zeros(nk, bool)
    for j in range(nk):
        c = _match_values(vals[j], vals_m[j])
        Lj = Rm[j][:, c].T
        try:
            R[j], L[j] = biorthonormalize(R[j], Lj)
        except SelfOrthogonal:
            L[j] = Lj
            flagged[j] = selforth[j] = True
        except ValueError:
            # eigenvalue matching is ambiguous here: build the dual basis instead
            L[j] = np.linalg.inv(R[j]) if np.linalg.cond(R[j]) < 1e12 else Lj
            flagged[j] = True

    # continue labels from k_j to k_{j+1}
    margin = np.full(nk, np.inf)
    for j in range(nk - 1):
        c, m = _assign(L[j], R[j + 1])
        margin[j] = m
        if m < MARGIN_TOL:
            flagged[j] = flagged[j + 1] = True
        vals[j + 1] = vals[j + 1][c]
        R[j + 1] = R[j + 1][:, c]
        L[j + 1] = L[j + 1][c, :]
    closure, m = _assign(L[-1], R[0])
    margin[-1] = m
    if m < MARGIN_TOL:
        flagged[-1] = flagged[0] = True
    return BandSet(params, ks, vals, R, L, flagged, margin, closure, selforth, n_k)


# ---------------------------------------------------------------- Zak phase

@dataclass
class ZakResult:
    omega: float
    winding: float
    integer_class: int
    gapless_flag: bool
    band_indices: tuple
    deviation: float = 0.0
    u_used: float = None
    tie_break: bool = False


def occupied_labels(bands: BandSet, k_ref: float = np.pi / 2):
    """Two labels with negative real part at the grid point nearest k_ref.

    Ties (Re z == 0, e.g. the purely imaginary bands above u2c at theta=pi/2)
    are broken by the most negative imaginary part.  Returns (labels, tie).
    """
    j = int(np.argmin(np.abs(bands.k - k_ref)))
    z = bands.values[j]
    tol = 1e-9
    order = sorted(range(4), key=lambda n: (round(z[n].real / tol) if abs(z[n].real) > tol else 0, z[n].imag))
    tie = bool(np.any(np.abs(z.real) <= tol))
    return tuple(sorted(order[:2])), tie


def _gauge_fixed(bands: BandSet):
    R = _canonical(bands.right)
    Lt = _canonical(np.swapaxes(bands.left, 1, 2))
    return np.swapaxes(Lt, 1, 2), R


def _loop_omega(L, R, closure, subset):
    """Wilson loop -sum_j arg det(phi_S(k_j) psi_S(k_{j+1})).

    Each step uses arg(det^2)/2, so a sign flip of a single vector between
    neighbours (or an odd relabelling inside the subset) cannot leak a
    spurious pi into the sum.  Requires steps well below pi/2, which the
    grid refinement provides.
    """
    S = list(subset)
    nk = len(R)
    total = 0.0
    for j in range(nk):
        if j + 1 < nk:
            Rn = R[j + 1][:, S]
        else:
            Rn = R[0][:, [closure[s] for s in S]]
        Ln = L[j][S, :]
        # normalise the right vectors at j+1 against their own duals
        Lnext = L[j + 1][S, :] if j + 1 < nk else L[0][[closure[s] for s in S], :]
        Snext = Lnext @ Rn
        d = np.linalg.det(Ln @ Rn) / np.linalg.det(Snext)
        total += np.angle(d * d) / 2
    return -total


def zak_phase(bands: BandSet, subset="all") -> ZakResult:
    """Biorthogonal Zak phase Omega of the selected bands.

    subset: "all" (default), "occupied", or an iterable of 0-based labels.

    The vectors are first put in the d-site gauge, so the result does not
    depend on how `bands` was scaled.  Only the all-band sum is quantized in
    every insulating region; the occupied pair alone gives Omega = pi in the
    low-u non-trivial phase and non-quantized values above u2c.

    The d-site gauge is singular at u = 0, k = pi, and for u below 1e-5 the
    near-circle structure is narrower than double precision resolves.  In
    that case the loop is evaluated at u = 1e-5, which is in the same
    insulating phase (the u -> 0+ limit); `u_used` records this.
    """
    tie = False
    if isinstance(subset, str):
        if subset == "all":
            labels = (0, 1, 2, 3)
        elif subset == "occupied":
            labels, tie = occupied_labels(bands)
        else:
            raise ValueError(f"unknown subset {subset!r}")
    else:
        labels = tuple(int(s) for s in subset)
        if not labels or any(not 0 <= s < 4 for s in labels):
            raise ValueError("subset must be nonempty labels in 0..3")

    u_used = bands.params.u
    if u_used < U_GAUGE_FLOOR:
        u_used = U_GAUGE_FLOOR
        bands = track_bands(bands.params.replace(u=u_used), bands.n_uniform or bands.n_k)
        if subset == "occupied":
            labels, tie = occupied_labels(bands)

    L_, R_ = _gauge_fixed(bands)
    omega = _loop_omega(L_, R_, bands.closure, labels)
    winding = omega / (2 * np.pi)
    ic = int(np.rint(winding))
    gapless = bool(bands.flagged.any())
    return ZakResult(omega, winding, ic, gapless, labels, abs(winding - ic), u_used, tie)


def wilson_phase_mod_2pi(bands: BandSet, subset=(0, 1, 2, 3)) -> float:
    """Phase of the closed Wilson product using the stored vectors as they are.

    This needs no gauge fixing and is invariant under any per-k rescaling,
    but only modulo 2 pi.
    """
    S = list(subset)
    prod = 1.0 + 0j
    nk = bands.n_k
    for j in range(nk):
        if j + 1 < nk:
            Rn = bands.right[j + 1][:, S]
        else:
            Rn = bands.right[0][:, [bands.closure[s] for s in S]]
        M = bands.left[j][S, :] @ Rn
        prod *= np.linalg.det(M) / abs(np.linalg.det(M))
    return float(-np.angle(prod))


def winding_number(params: ModelParams, n_k: int = 256) -> tuple[float, float]:
    """All-band winding without band tracking (used by the phase diagram).

    Same quantity as zak_phase(track_bands(...)).winding: the loop of
    det(psi)^2 in the d-site gauge, which is insensitive to band order.
    Returns (winding, u_used).
    """
    u_used = max(params.u, U_GAUGE_FLOOR)
    p = params if u_used == params.u else params.replace(u=u_used)
    ks = zak_grid(p, n_k)
    _, R = _eig_batch(p, ks)
    D = np.linalg.det(R) ** 2
    D = np.append(D, D[0])
    return float(-np.sum(np.angle(D[1:] / D[:-1])) / (4 * np.pi)), u_used


# ---------------------------------------------------------------- phases

@dataclass
class PhaseInfo:
    label: str
    winding: float
    integer_class: int
    min_gap: float
    in_window: bool
    numeric_gapless: bool


def classify_phase(params: ModelParams, n_k: int = 256, gap_tol: float = 1e-3) -> PhaseInfo:
    """TR / NTR / GL label for one parameter point.

    GL comes from the numeric determinant test (lattice.numeric_gapless);
    the closed-form window u1c <= u <= u2c is recorded beside it so the two
    can be compared.  Gapped points are labelled by the nearest integer of
    the all-band winding, which is also returned (raw) for GL points.
    """
    if n_k < 256:
        raise ValueError("n_k >= 256 required")
    window = in_gapless_window(params)
    gap = spectral_gap(params, n_k)
    w, _ = winding_number(params, n_k)
    ic = int(np.rint(w))
    if numeric_gapless(params, n_k, gap_tol):
        # the winding is not quantized here; it is reported as computed
        return PhaseInfo("GL", w, ic, gap, window, True)
    if abs(w - ic) > 0.25 or ic not in (0, 1):
        raise Unresolved(f"winding {w:.4f} at {params} is not near 0 or 1")
    return PhaseInfo("NTR" if ic == 1 else "TR", w, ic, gap, window, False)
