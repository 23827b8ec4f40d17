"""Parameter scans: phase diagram, EP trajectories, OBC spectra and IPR curves.

Every scan is a map over independent parameter points.  Results are keyed
by grid index and assembled afterwards, so the order in which workers finish
does not matter.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import dataclass
import math

import numpy as np

from .lattice import ModelParams, critical_points, ep1_locus, ep2_locus, in_gapless_window
from .realspace import (
    ChainSpec,
    build_chain,
    cloud_distance,
    detect_edge_modes,
    edge_classes,
    full_spectrum,
)
from .topology import Unresolved, classify_phase


@dataclass
class PhaseGrid:
    theta_axis: np.ndarray
    u_axis: np.ndarray
    label: np.ndarray          # (n_theta, n_u) of "TR" / "NTR" / "GL" / "UNRESOLVED"
    min_real_gap: np.ndarray   # min over k of |z|, see lattice.spectral_gap
    winding: np.ndarray
    gapless_flag: np.ndarray   # numeric determinant test, decides GL
    in_window: np.ndarray      # closed-form u1c <= u <= u2c

    def records(self):
        for i, th in enumerate(self.theta_axis):
            for j, u in enumerate(self.u_axis):
                yield dict(theta=float(th), u=float(u), label=str(self.label[i, j]),
                           min_gap=float(self.min_real_gap[i, j]), winding=_none_if_nan(self.winding[i, j]),
                           gapless_flag=bool(self.gapless_flag[i, j]), in_window=bool(self.in_window[i, j]))


def _none_if_nan(x):
    return None if np.isnan(x) else float(x)


def _phase_row(args):
    i, theta, u_axis, n_k, w, delta = args
    row = []
    for u in u_axis:
        p = ModelParams(w=w, delta=delta, theta=float(theta), u=float(u))
        try:
            info = classify_phase(p, n_k)
            row.append((info.label, info.min_gap, info.winding, info.numeric_gapless, info.in_window))
        except Unresolved:
            row.append(("UNRESOLVED", float("nan"), float("nan"), False, in_gapless_window(p)))
    return i, row


def phase_diagram(theta_axis, u_axis, n_k: int = 256, w: float = 1.0, delta: float = 0.3,
                  workers: int = 1) -> PhaseGrid:
    theta_axis = np.asarray(theta_axis, dtype=float)
    u_axis = np.asarray(u_axis, dtype=float)
    if theta_axis.size == 0 or u_axis.size == 0:
        raise ValueError("axes must be nonempty")
    if np.any(np.diff(theta_axis) < 0) or np.any(np.diff(u_axis) < 0):
        raise ValueError("axes must be sorted")
    jobs = [(i, th, u_axis, n_k, w, delta) for i, th in enumerate(theta_axis)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            rows = dict(ex.map(_phase_row, jobs))
    else:
        rows = dict(map(_phase_row, jobs))
    shape = (theta_axis.size, u_axis.size)
    label = np.empty(shape, dtype=object)
    gap = np.empty(shape)
    wind = np.empty(shape)
    flag = np.zeros(shape, bool)
    win = np.zeros(shape, bool)
    for i, row in rows.items():
        for j, (lab, g, wn, fl, iw) in enumerate(row):
            label[i, j], gap[i, j], wind[i, j], flag[i, j], win[i, j] = lab, g, wn, fl, iw
    return PhaseGrid(theta_axis, u_axis, label, gap, wind, flag, win)


@dataclass
class EPTrajectory:
    theta: float
    u_axis: np.ndarray
    ep1_k: np.ndarray    # +k of the EP1 pair, nan where absent
    ep2_k: np.ndarray
    um: float
    u2c: float

    def closest_approach(self):
        """(u, |k1 - k2|) where the two loci come closest, or None if they
        never coexist on the axis."""
        d = np.abs(self.ep1_k - self.ep2_k)
        if np.all(np.isnan(d)):
            return None
        j = int(np.nanargmin(d))
        return float(self.u_axis[j]), float(d[j])


def ep_trajectories(theta: float, u_axis, w: float = 1.0, delta: float = 0.3) -> EPTrajectory:
    u_axis = np.asarray(u_axis, dtype=float)
    if np.any(np.diff(u_axis) < 0):
        raise ValueError("u_axis must be sorted")
    e1 = np.full(u_axis.size, np.nan)
    e2 = np.full(u_axis.size, np.nan)
    for j, u in enumerate(u_axis):
        p = ModelParams(w=w, delta=delta, theta=theta, u=float(u))
        a = ep1_locus(p)
        b = ep2_locus(p)
        if a is not None:
            e1[j] = a[0]
        if b is not None:
            e2[j] = b[0]
    cp = critical_points(ModelParams(w=w, delta=delta, theta=theta, u=0.0))
    return EPTrajectory(theta, u_axis, e1, e2, cp.um, cp.u2c)


def _obc_point(args):
    theta, u, n_cells, w, delta, detect_kw = args
    p = ModelParams(w=w, delta=delta, theta=theta, u=float(u))
    spec = full_spectrum(build_chain(ChainSpec(p, n_cells)))
    return float(u), spec[0], detect_edge_modes(spec, **detect_kw)


def _map_threads(fn, jobs, workers):
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            return list(ex.map(fn, jobs))
    return [fn(j) for j in jobs]


def obc_spectrum_sweep(theta: float, u_axis, n_cells: int = 50, w: float = 1.0, delta: float = 0.3,
                       workers: int = 1, **detect_kw):
    """Per u: (u, eigenvalues, ModeReports) of the open chain."""
    u_axis = np.asarray(u_axis, dtype=float)
    if np.any(np.diff(u_axis) < 0):
        raise ValueError("u_axis must be sorted")
    jobs = [(theta, u, n_cells, w, delta, detect_kw) for u in u_axis]
    return _map_threads(_obc_point, jobs, workers)


IPR_CLASSES = ("left-zero", "right-zero", "left-nonzero", "right-nonzero")


def ipr_sweep(theta: float, u_axis, n_cells: int = 50, w: float = 1.0, delta: float = 0.3,
              workers: int = 1, **detect_kw):
    """Per u: the largest IPR in each edge-mode class, None where the class is absent."""
    out = []
    for u, _, reports in obc_spectrum_sweep(theta, u_axis, n_cells, w, delta, workers, **detect_kw):
        cls = edge_classes(reports)
        out.append(dict(u=u, **{c: (max(r.ipr for r in cls[c]) if cls[c] else None) for c in IPR_CLASSES}))
    return out


def pbc_obc_comparison(params: ModelParams, n_cells: int = 50):
    """OBC and PBC spectra of the same chain and their cloud distance."""
    obc = full_spectrum(build_chain(ChainSpec(params, n_cells, "open")))[0]
    pbc = full_spectrum(build_chain(ChainSpec(params, n_cells, "periodic")))[0]
    return obc, pbc, cloud_distance(obc, pbc)


def default_theta_axis(n: int = 101):
    return np.linspace(-math.pi, math.pi, n)


def default_u_axis(n: int = 101, u_max: float = 4.0):
    return np.linspace(0.0, u_max, n)
