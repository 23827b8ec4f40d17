"""Finite chains: OBC/PBC matrices, spectra, IPR, edge modes and disorder.

Sites are numbered cell by cell as (a, b, c, d), so site 4n is `a` of cell n.

A note on "zero" modes.  The chiral relation G H^dag G = -H holds for the
finite chain as well, which makes the spectrum symmetric under z -> -conj(z)
(mirror about the imaginary axis).  An unpaired edge state is therefore
pinned to Re z = 0, but its imaginary part is set by how much weight it
carries on the gain/loss sites and is generally not small (about +0.37i and
-0.15i at theta=pi/4, u=0.5).  Zero modes are accordingly identified by
|Re z| < zero_tol.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

from .lattice import ModelParams, bloch_hamiltonian, multiset_distance

MAX_SITES = 2048


class DimensionCapExceeded(ValueError):
    pass


class MissingSide(RuntimeError):
    code = "MISSING_SIDE"


@dataclass(frozen=True)
class ChainSpec:
    params: ModelParams
    n_cells: int = 50
    boundary: str = "open"

    def __post_init__(self):
        if int(self.n_cells) != self.n_cells or self.n_cells < 2:
            raise ValueError(f"n_cells >= 2 required, got {self.n_cells}")
        if self.boundary not in ("open", "periodic"):
            raise ValueError(f"boundary must be 'open' or 'periodic', got {self.boundary!r}")

    @property
    def n_sites(self):
        return 4 * self.n_cells


@dataclass(frozen=True)
class DisorderSpec:
    sigma: float = 0.2
    seed: int = 20240611
    trials: int = 20

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma >= 0 required")
        if self.trials < 1:
            raise ValueError("trials >= 1 required")


@dataclass
class ModeReport:
    eigenvalue: complex
    ipr: float
    edge_side: str
    is_zero_mode: bool
    left_weight: float = 0.0
    right_weight: float = 0.0


def _bond_values(p: ModelParams, n_sites: int):
    # bond i joins sites i and i+1: a-b w1, b-c w2, c-d w1, d-a' w2
    return np.where(np.arange(n_sites - 1) % 2 == 0, p.w1, p.w2)


def _onsite(p: ModelParams, n_sites: int):
    return np.tile([1j * p.u, -1j * p.u, 0, 0], n_sites // 4)


def build_chain(spec: ChainSpec, bond_scale=None, onsite_scale=None) -> np.ndarray:
    """Dense 4N x 4N chain matrix.

    `bond_scale` (length 4N-1, or 4N with the wrap bond last) and
    `onsite_scale` (length 4N) multiply bonds and diagonal entries; they are
    how disorder enters.
    """
    n = spec.n_sites
    p = spec.params
    bonds = _bond_values(p, n).astype(complex)
    diag = _onsite(p, n)
    wrap = p.w2
    if bond_scale is not None:
        bond_scale = np.asarray(bond_scale, dtype=float)
        bonds = bonds * bond_scale[: n - 1]
        if len(bond_scale) > n - 1:
            wrap = wrap * bond_scale[n - 1]
    if onsite_scale is not None:
        diag = diag * np.asarray(onsite_scale, dtype=float)
    M = np.diag(diag) + np.diag(bonds, 1) + np.diag(bonds, -1)
    if spec.boundary == "periodic":
        M[0, n - 1] = M[n - 1, 0] = wrap
    return M


def bloch_union(params: ModelParams, n_cells: int) -> np.ndarray:
    """Bloch spectra at k = 2 pi m / N, m = 0..N-1, concatenated."""
    ks = 2 * np.pi * np.arange(n_cells) / n_cells
    ks = (ks + np.pi) % (2 * np.pi) - np.pi
    return np.linalg.eigvals(bloch_hamiltonian(params, ks)).ravel()


def full_spectrum(m: np.ndarray, max_sites: int = MAX_SITES):
    """All eigenpairs, right vectors unit 2-norm, sorted by (Re z, Im z)."""
    n = m.shape[0]
    if n > max_sites:
        raise DimensionCapExceeded(f"{n} sites exceeds the cap of {max_sites}")
    vals, vecs = np.linalg.eig(m)
    vecs = vecs / np.linalg.norm(vecs, axis=0, keepdims=True)
    order = np.lexsort((vals.imag, vals.real))
    return vals[order], vecs[:, order]


def ipr(state) -> float:
    p = np.abs(np.asarray(state)) ** 2
    s = p.sum()
    if s == 0:
        raise ValueError("zero vector has no IPR")
    return float((p * p).sum() / s ** 2)


def detect_edge_modes(spectrum, zero_tol: float = 1e-3, edge_fraction: float = 0.1,
                      ipr_floor: float = 0.05, zero_measure: str = "re") -> list[ModeReport]:
    """Annotate every eigenpair with IPR, edge side and zero-mode flag.

    edge_side is left (right) if at least 60% of |psi|^2 sits in the first
    (last) ceil(edge_fraction * 4N) sites and ipr >= ipr_floor.
    zero_measure "re" flags |Re z| < zero_tol (see the module note); "abs"
    flags |z| < zero_tol, which finds no edge state in this model.
    """
    if zero_measure not in ("re", "abs"):
        raise ValueError(f"zero_measure must be 're' or 'abs', got {zero_measure!r}")
    vals, vecs = spectrum
    n = vecs.shape[0]
    m = math.ceil(edge_fraction * n)
    P = np.abs(vecs) ** 2
    P = P / P.sum(axis=0, keepdims=True)
    lw = P[:m].sum(axis=0)
    rw = P[-m:].sum(axis=0)
    iprs = (P * P).sum(axis=0)
    out = []
    for i, z in enumerate(vals):
        side = "bulk"
        if iprs[i] >= ipr_floor:
            if lw[i] >= 0.6:
                side = "left"
            elif rw[i] >= 0.6:
                side = "right"
        zval = abs(z.real) if zero_measure == "re" else abs(z)
        out.append(ModeReport(complex(z), float(iprs[i]), side, bool(zval < zero_tol),
                              float(lw[i]), float(rw[i])))
    return out


def edge_classes(reports) -> dict:
    """Group edge modes into left-zero, right-zero, left-nonzero, right-nonzero."""
    cls = {"left-zero": [], "right-zero": [], "left-nonzero": [], "right-nonzero": []}
    for r in reports:
        if r.edge_side == "bulk":
            continue
        cls[f"{r.edge_side}-{'zero' if r.is_zero_mode else 'nonzero'}"].append(r)
    return cls


@dataclass
class SkinResult:
    ratio: float | None
    left_ipr: float | None
    right_ipr: float | None
    missing: str | None = None


def skin_asymmetry(reports, zero_only: bool = False) -> SkinResult:
    """max IPR of left edge modes / max IPR of right edge modes.

    With zero_only, only Re z = 0 edge modes count (the left/right zero-mode
    comparison).  When one side has no edge mode the ratio is None, `missing`
    names the empty side and the other side's IPR is still reported.
    """
    use = [r for r in reports if r.is_zero_mode or not zero_only]
    left = [r.ipr for r in use if r.edge_side == "left"]
    right = [r.ipr for r in use if r.edge_side == "right"]
    lmax = max(left) if left else None
    rmax = max(right) if right else None
    if lmax is None or rmax is None:
        miss = "both" if lmax is None and rmax is None else ("left" if lmax is None else "right")
        return SkinResult(None, lmax, rmax, missing=miss)
    return SkinResult(lmax / rmax, lmax, rmax)


def require_both_sides(res: SkinResult) -> float:
    if res.missing:
        raise MissingSide(f"no {res.missing} edge mode (left ipr={res.left_ipr}, right ipr={res.right_ipr})")
    return res.ratio


def disorder_coefficients(spec: ChainSpec, d: DisorderSpec, trial_index: int):
    """Gaussian(1, sigma) factors for one trial: one per bond, one per gain/loss site.

    The stream is keyed by (seed, trial_index) so trials can run in any order.
    """
    rng = np.random.default_rng([int(d.seed), int(trial_index)])
    n = spec.n_sites
    n_bonds = n - 1 if spec.boundary == "open" else n
    eps_w = rng.normal(1.0, d.sigma, n_bonds)
    eps_u = np.ones(n)
    nh = np.flatnonzero(np.arange(n) % 4 < 2)
    eps_u[nh] = rng.normal(1.0, d.sigma, nh.size)
    return eps_w, eps_u


def apply_disorder(spec: ChainSpec, d: DisorderSpec, trial_index: int) -> np.ndarray:
    if spec.boundary != "open":
        raise ValueError("disorder is applied to the open chain")
    if d.sigma == 0:
        return build_chain(spec)
    eps_w, eps_u = disorder_coefficients(spec, d, trial_index)
    return build_chain(spec, eps_w, eps_u)


@dataclass
class RobustnessResult:
    survival: dict
    reference: dict
    per_trial: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)
    zero_tol: float = 0.1
    ipr_fraction: float = 0.5


def _surviving(reports, ref_ipr, side, zero, zero_tol, frac):
    for r in reports:
        if r.edge_side != side:
            continue
        if (abs(r.eigenvalue.real) < zero_tol) != zero:
            continue
        if r.ipr >= frac * ref_ipr:
            return True
    return False


def robustness_trial(spec: ChainSpec, d: DisorderSpec, match_zero_tol: float = 0.1,
                     ipr_fraction: float = 0.5, classes=None, workers: int = 1,
                     **detect_kw) -> RobustnessResult:
    """Re-diagonalize `d.trials` perturbed chains and count which edge-mode
    classes of the clean chain survive.

    A class survives a trial if some mode on the same side, with the same
    zero / non-zero character under the relaxed `match_zero_tol`, keeps at
    least `ipr_fraction` of the clean IPR.  `detect_kw` go to
    detect_edge_modes for the clean chain and every trial.  Solver errors
    are recorded per trial.
    """
    clean = detect_edge_modes(full_spectrum(build_chain(spec)), **detect_kw)
    ref = {name: max(r.ipr for r in modes) for name, modes in edge_classes(clean).items() if modes}
    if classes is not None:
        ref = {k: v for k, v in ref.items() if k in classes}

    def one(t):
        m = apply_disorder(spec, d, t)
        rep = detect_edge_modes(full_spectrum(m), **detect_kw)
        out = {}
        for name, ref_ipr in ref.items():
            side, kind = name.split("-")
            out[name] = _surviving(rep, ref_ipr, side, kind == "zero", match_zero_tol, ipr_fraction)
        return out

    per_trial, errors = {}, {}
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(workers) as ex:
            futs = {t: ex.submit(one, t) for t in range(d.trials)}
        for t, f in futs.items():
            try:
                per_trial[t] = f.result()
            except np.linalg.LinAlgError as exc:
                errors[t] = str(exc)
    else:
        for t in range(d.trials):
            try:
                per_trial[t] = one(t)
            except np.linalg.LinAlgError as exc:
                errors[t] = str(exc)
    survival = {}
    for name in ref:
        hits = [per_trial[t][name] for t in sorted(per_trial)]
        survival[name] = float(np.mean(hits)) if hits else float("nan")
    return RobustnessResult(survival, ref, per_trial, errors, match_zero_tol, ipr_fraction)


def mirror_distance(vals, mode: str = "chiral") -> float:
    """Distance between a spectrum and its image under z -> -conj(z) ("chiral")
    or z -> -z ("negation")."""
    vals = np.asarray(vals)
    img = -vals.conj() if mode == "chiral" else -vals
    return multiset_distance(vals, img)


def cloud_distance(a, b) -> float:
    """Symmetric Hausdorff-style distance between two eigenvalue clouds:
    the larger of the two mean nearest-neighbour distances."""
    a = np.asarray(a).ravel()
    b = np.asarray(b).ravel()
    d = np.abs(a[:, None] - b[None, :])
    return float(max(d.min(axis=1).mean(), d.min(axis=0).mean()))
