"""Bloch-space model for the staggered Hermitian / non-Hermitian SSH chain.

Unit cell sites are ordered (a, b, c, d).  Sites a and b carry the balanced
gain/loss +iu and -iu, sites c and d are Hermitian.  Bonds alternate
w1 (a-b, c-d) and w2 (b-c, d-a of the next cell), with

    w1 = w (1 - delta cos theta),   w2 = w (1 + delta cos theta).

Everything in here is closed form or a 4x4 dense solve, so all functions are
pure and cheap.
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

# arccos arguments within this distance of +-1 are clamped onto the interval
ARCCOS_CLAMP = 1e-12


class EigensolverError(RuntimeError):
    """Raised when LAPACK fails to converge (should not happen for 4x4)."""


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters (w, delta, theta, u).  Validated on construction."""

    w: float = 1.0
    delta: float = 0.3
    theta: float = math.pi / 4
    u: float = 0.5

    def __post_init__(self):
        for name in ("w", "delta", "theta", "u"):
            val = getattr(self, name)
            if not np.isfinite(val):
                raise ValueError(f"{name} must be finite, got {val!r}")
        if not self.w > 0:
            raise ValueError(f"w > 0 required, got w={self.w}")
        if not 0 < self.delta < 1:
            raise ValueError(f"0 < delta < 1 required, got delta={self.delta}")
        # allow a hair of slack so that theta=pi computed as 1.0*np.pi passes
        if abs(self.theta) > math.pi * (1 + 1e-15):
            raise ValueError(f"-pi <= theta <= pi required, got theta={self.theta}")
        if self.u < 0:
            raise ValueError(f"u >= 0 required, got u={self.u}")

    @property
    def w1(self) -> float:
        return self.w * (1 - self.delta * math.cos(self.theta))

    @property
    def w2(self) -> float:
        return self.w * (1 + self.delta * math.cos(self.theta))

    def replace(self, **kw) -> "ModelParams":
        d = dict(w=self.w, delta=self.delta, theta=self.theta, u=self.u)
        d.update(kw)
        return ModelParams(**d)


@dataclass(frozen=True)
class CriticalPoints:
    u1c: float
    um: float
    u2c: float


@dataclass(frozen=True)
class SymmetryResiduals:
    trs: float
    phs: float
    cs: float

    def max(self) -> float:
        return max(self.trs, self.phs, self.cs)


def hopping_amplitudes(params: ModelParams) -> tuple[float, float]:
    return params.w1, params.w2


def bloch_hamiltonian(params: ModelParams, k) -> np.ndarray:
    """4x4 Bloch matrix H(k).  `k` may also be a 1d array, giving shape (nk, 4, 4)."""
    w1, w2 = params.w1, params.w2
    u = params.u
    k = np.asarray(k, dtype=float)
    H = np.zeros(k.shape + (4, 4), dtype=complex)
    H[..., 0, 0] = 1j * u
    H[..., 1, 1] = -1j * u
    H[..., 0, 1] = H[..., 1, 0] = w1
    H[..., 1, 2] = H[..., 2, 1] = w2
    H[..., 2, 3] = H[..., 3, 2] = w1
    H[..., 0, 3] = w2 * np.exp(-1j * k)
    H[..., 3, 0] = w2 * np.exp(1j * k)
    return H


def xy_coefficients(params: ModelParams, k):
    """X and Y of the characteristic polynomial z^4 - X z^2 + Y (real for real k)."""
    w1s, w2s, u2 = params.w1 ** 2, params.w2 ** 2, params.u ** 2
    X = 2 * (w1s + w2s) - u2
    Y = w1s ** 2 + w2s ** 2 - w1s * u2 - 2 * w1s * w2s * np.cos(k)
    return X, Y


def discriminant(params: ModelParams, k):
    """X^2 - 4Y written without cancellation:
    16 w1^2 w2^2 cos^2(k/2) + u^2 (u^2 - 4 w2^2)."""
    w1s, w2s, u2 = params.w1 ** 2, params.w2 ** 2, params.u ** 2
    c = np.cos(np.asarray(k) / 2)
    return 16 * w1s * w2s * c * c + u2 * (u2 - 4 * w2s)


def analytic_eigenvalues(params: ModelParams, k) -> np.ndarray:
    """Closed-form spectrum [z1, z2, -z1, -z2] (principal branch square roots).

    The two roots of r^2 - X r + Y are taken in the stable order (larger one
    from the formula, smaller one as Y / r1).  The +- labels are not band
    labels: they swap discontinuously at EPs.
    """
    X, Y = xy_coefficients(params, k)
    X = np.asarray(X, dtype=complex) + np.zeros_like(np.asarray(Y), dtype=complex)
    s = np.sqrt(np.asarray(discriminant(params, k), dtype=complex))
    s = np.where((X.conj() * s).real >= 0, s, -s)
    r1 = (X + s) / 2
    with np.errstate(divide="ignore", invalid="ignore"):
        r2 = np.where(r1 != 0, Y / np.where(r1 != 0, r1, 1), 0)
    z1 = np.sqrt(r1)
    z2 = np.sqrt(r2 + 0j)
    return np.stack([z1, z2, -z1, -z2], axis=-1)


def numeric_eigenvalues(m: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.eigvals(m)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - 4x4 never fails in practice
        raise EigensolverError(str(exc)) from exc


def multiset_distance(a, b) -> float:
    """Largest pointwise gap of the optimal one-to-one matching between two spectra."""
    from scipy.optimize import linear_sum_assignment

    a = np.asarray(a).ravel()
    b = np.asarray(b).ravel()
    if a.size != b.size:
        raise ValueError("spectra differ in size")
    if a.size == 0:
        return 0.0
    C = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(C)
    return float(C[r, c].max())


def _arccos_or_none(arg: float):
    if arg > 1 + ARCCOS_CLAMP or arg < -1 - ARCCOS_CLAMP:
        return None
    k = math.acos(min(1.0, max(-1.0, arg)))
    return (k, -k)


def ep1_argument(params: ModelParams) -> float:
    w1s, w2s, u = params.w1 ** 2, params.w2 ** 2, params.u
    return (4 * u * u * w2s - u ** 4 - 8 * w1s * w2s) / (8 * w1s * w2s)


def ep2_argument(params: ModelParams) -> float:
    w1s, w2s, u = params.w1 ** 2, params.w2 ** 2, params.u
    return (w1s * w1s + w2s * w2s - w1s * u * u) / (2 * w1s * w2s)


def ep1_locus(params: ModelParams):
    """(+k, -k) of the EP1 pair, or None.

    At u = 0 the matrix is Hermitian and the coalescence at k = pi is an
    ordinary (diagonalizable) degeneracy, so None is returned there.
    """
    if params.u == 0:
        return None
    return _arccos_or_none(ep1_argument(params))


def ep2_locus(params: ModelParams):
    """(+k, -k) of the EP2 pair (the z = 0 coalescence), or None.  None at u = 0."""
    if params.u == 0:
        return None
    return _arccos_or_none(ep2_argument(params))


def critical_points(params: ModelParams) -> CriticalPoints:
    w1s, w2s = params.w1 ** 2, params.w2 ** 2
    return CriticalPoints(
        u1c=abs(w1s - w2s) / params.w1,
        um=math.sqrt(2 * (w1s + w2s)),
        u2c=(w1s + w2s) / params.w1,
    )


def in_gapless_window(params: ModelParams, tol: float = 0.0) -> bool:
    """Closed-form semi-metal window u1c <= u <= u2c.

    Outside this window Y(k) keeps one sign over the whole zone, so no
    eigenvalue reaches zero.  Inside it Y vanishes somewhere (the EP2 locus).
    """
    cp = critical_points(params)
    return cp.u1c - tol <= params.u <= cp.u2c + tol


def spectral_gap(params: ModelParams, n_k: int = 512) -> float:
    """min over a k-grid and bands of |z|.

    With the chiral +-z pairing the gap around z = 0 closes exactly when some
    eigenvalue vanishes.  Above u2c two bands are purely imaginary, so a
    gap in Re z alone would read zero there even though the bands are
    separated; |z| is used instead.
    """
    ks = np.linspace(-np.pi, np.pi, n_k, endpoint=False)
    return float(np.abs(analytic_eigenvalues(params, ks)).min())


def numeric_gapless(params: ModelParams, n_k: int = 256, gap_tol: float = 1e-3) -> bool:
    """Gap test from dense determinants, independent of the closed forms.

    det H(k) is real for real k and equals the product z1^2 z2^2, so a zero
    eigenvalue somewhere in the zone shows up as a sign change (or a zero)
    of det H over the grid.  The grid always contains k = 0 and k = -pi,
    where det H takes its extreme values.  A sampled min|z| below `gap_tol`
    also counts.
    """
    if n_k % 2:
        raise ValueError("n_k must be even so that k = 0 is on the grid")
    ks = np.linspace(-np.pi, np.pi, n_k, endpoint=False)
    H = bloch_hamiltonian(params, ks)
    d = np.linalg.det(H).real
    scale = max(1.0, float(np.abs(d).max()))
    if d.min() <= 1e-12 * scale <= d.max() or np.abs(d).min() <= 1e-12 * scale:
        return True
    return bool(np.abs(np.linalg.eigvals(H)).min() < gap_tol)


# sublattice operator Gamma = tau_z (x) sigma_0 in the (a,c | b,d) grading
GAMMA = np.diag([1.0, -1.0, 1.0, -1.0]).astype(complex)
T_MINUS = GAMMA  # time reversal partner, acts together with complex conjugation
C_PLUS = np.eye(4, dtype=complex)


def symmetry_residuals(params: ModelParams, k: float, H: np.ndarray | None = None) -> SymmetryResiduals:
    """Frobenius residuals of the three symmetry relations.

    trs: T H(k)* T^-1 + H(-k);  phs: H(k)^T - H(-k);  cs: G H(k)^dag G^-1 + H(k).
    Pass `H` to test a modified matrix in place of H(k); H(-k) is always exact.
    """
    Hk = bloch_hamiltonian(params, k) if H is None else np.asarray(H, dtype=complex)
    Hm = bloch_hamiltonian(params, -k)
    Ti = np.linalg.inv(T_MINUS)
    Gi = np.linalg.inv(GAMMA)
    trs = np.linalg.norm(T_MINUS @ Hk.conj() @ Ti + Hm)
    phs = np.linalg.norm(C_PLUS @ Hk.T @ np.linalg.inv(C_PLUS) - Hm)
    cs = np.linalg.norm(GAMMA @ Hk.conj().T @ Gi + Hk)
    return SymmetryResiduals(float(trs), float(phs), float(cs))
