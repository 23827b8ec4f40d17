import math

import numpy as np
import pytest

from frozen import OBC_EDGE
from nhssh.lattice import ModelParams, multiset_distance
from nhssh.realspace import (
    ChainSpec,
    DimensionCapExceeded,
    DisorderSpec,
    MissingSide,
    apply_disorder,
    bloch_union,
    build_chain,
    cloud_distance,
    detect_edge_modes,
    disorder_coefficients,
    edge_classes,
    full_spectrum,
    ipr,
    mirror_distance,
    require_both_sides,
    robustness_trial,
    skin_asymmetry,
)

PI = math.pi


def chain(theta, u, n=50, boundary="open"):
    return ChainSpec(ModelParams(theta=theta, u=u), n, boundary)


def reports(theta, u, n=50, **kw):
    return detect_edge_modes(full_spectrum(build_chain(chain(theta, u, n))), **kw)


class TestBuild:
    def test_shape_and_entries(self):
        p = ModelParams(theta=PI / 4, u=0.5)
        M = build_chain(ChainSpec(p, 3))
        assert M.shape == (12, 12)
        assert M[0, 0] == 0.5j and M[1, 1] == -0.5j and M[2, 2] == 0 and M[4, 4] == 0.5j
        assert M[0, 1] == p.w1 and M[1, 2] == p.w2 and M[2, 3] == p.w1 and M[3, 4] == p.w2
        assert M[0, 11] == 0
        assert np.array_equal(M, M.T)

    def test_periodic_wrap(self):
        p = ModelParams(theta=PI / 4, u=0.5)
        M = build_chain(ChainSpec(p, 3, "periodic"))
        assert M[0, 11] == M[11, 0] == p.w2

    def test_validation(self):
        p = ModelParams()
        with pytest.raises(ValueError):
            ChainSpec(p, 1)
        with pytest.raises(ValueError):
            ChainSpec(p, 10, "twisted")
        with pytest.raises(ValueError):
            DisorderSpec(sigma=-0.1)

    def test_dimension_cap(self):
        m = build_chain(chain(PI / 4, 0.5, 20))
        with pytest.raises(DimensionCapExceeded):
            full_spectrum(m, max_sites=40)

    def test_pbc_matches_bloch(self):
        for n in (4, 7, 16):
            for th, u in ((PI / 4, 0.5), (0.3, 2.7), (3 * PI / 4, 1.3)):
                p = ModelParams(theta=th, u=u)
                vals = full_spectrum(build_chain(ChainSpec(p, n, "periodic")))[0]
                assert multiset_distance(vals, bloch_union(p, n)) < 1e-8


class TestIPR:
    def test_limits(self):
        assert ipr(np.eye(8)[3]) == 1.0
        assert ipr(np.ones(8)) == pytest.approx(1 / 8)
        assert ipr(3 * np.ones(8)) == pytest.approx(1 / 8)
        with pytest.raises(ValueError):
            ipr(np.zeros(4))

    def test_spectrum_normalized(self):
        vals, vecs = full_spectrum(build_chain(chain(PI / 4, 0.5, 10)))
        assert np.allclose(np.linalg.norm(vecs, axis=0), 1)
        assert np.all(np.diff(vals.real) >= 0)


class TestEdgeModes:
    def test_pi4_low_u(self):
        cls = edge_classes(reports(PI / 4, 0.5))
        assert len(cls["left-zero"]) == 1 and len(cls["right-zero"]) == 1
        assert cls["left-zero"][0].ipr > cls["right-zero"][0].ipr
        assert cls["left-zero"][0].eigenvalue.imag > 0 > cls["right-zero"][0].eigenvalue.imag

    def test_abs_measure_finds_nothing(self):
        # the edge states sit on the imaginary axis well away from z = 0
        rep = reports(PI / 4, 0.5, zero_measure="abs")
        assert not any(r.is_zero_mode for r in rep)
        with pytest.raises(ValueError):
            reports(PI / 4, 0.5, zero_measure="imag")

    def test_trivial_side(self):
        rep = reports(3 * PI / 4, 0.5)
        assert all(r.edge_side == "bulk" for r in rep)
        assert OBC_EDGE[("3pi/4", 0.5)] == []

    def test_high_u(self):
        cls = edge_classes(reports(PI / 4, 3.5))
        assert len(cls["left-zero"]) == 1
        ref = OBC_EDGE[("pi/4", 3.5)]
        assert abs(cls["left-zero"][0].eigenvalue - ref[0]) < 1e-6
        pair = sorted((r.eigenvalue for r in cls["right-nonzero"]), key=lambda z: z.real)
        assert len(pair) == 2
        assert multiset_distance(np.array(pair), np.array(ref[1:])) < 1e-6
        # a mirror pair about the imaginary axis, z and -conj(z)
        assert abs(pair[0] + pair[1].conjugate()) < 1e-10

    @pytest.mark.parametrize("n,tol", [(10, 1e-10), (20, 1e-6), (50, 1e-6), (80, 1e-6)])
    def test_edge_values_against_oracle(self, n, tol):
        # the oracle is a 10-cell chain; longer chains differ by an
        # exponentially small finite-size shift (about 6e-8)
        cls = edge_classes(reports(PI / 4, 0.5, n))
        got = [cls["left-zero"][0].eigenvalue, cls["right-zero"][0].eigenvalue]
        assert multiset_distance(np.array(got), np.array(OBC_EDGE[("pi/4", 0.5)])) < tol


class TestSymmetry:
    @pytest.mark.parametrize("theta,u", [(PI / 4, 0.5), (PI / 4, 3.5), (3 * PI / 4, 0.5), (0.2, 1.3)])
    def test_chiral_mirror(self, theta, u):
        vals = full_spectrum(build_chain(chain(theta, u)))[0]
        assert mirror_distance(vals, "chiral") < 1e-8

    def test_negation_is_broken(self):
        vals = full_spectrum(build_chain(chain(PI / 4, 0.5)))[0]
        assert mirror_distance(vals, "negation") > 0.1

    def test_hermitian_limit_is_negation_symmetric(self):
        vals = full_spectrum(build_chain(chain(PI / 4, 0.0)))[0]
        assert mirror_distance(vals, "negation") < 1e-8


class TestSkin:
    def test_ratio(self):
        res = skin_asymmetry(reports(PI / 4, 0.5))
        assert res.ratio == pytest.approx(1.3456, abs=1e-3)
        assert require_both_sides(res) == res.ratio

    def test_hermitian_symmetric(self):
        res = skin_asymmetry(reports(PI / 4, 0.0))
        assert res.ratio == pytest.approx(1.0, abs=1e-6)

    def test_missing_side(self):
        res = skin_asymmetry(reports(PI / 4, 2.0), zero_only=True)
        assert res.ratio is None and res.missing == "right" and res.left_ipr > 0
        with pytest.raises(MissingSide) as info:
            require_both_sides(res)
        assert info.value.code == "MISSING_SIDE"

    def test_nothing(self):
        res = skin_asymmetry(reports(3 * PI / 4, 0.5))
        assert res.missing == "both"


class TestDisorder:
    def test_coefficients_reproducible(self):
        s = chain(PI / 4, 0.5, 10)
        d = DisorderSpec(0.2, 7, 3)
        a = disorder_coefficients(s, d, 2)
        b = disorder_coefficients(s, d, 2)
        c = disorder_coefficients(s, d, 1)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
        assert not np.array_equal(a[0], c[0])
        assert a[0].size == 39
        assert np.all(a[1][2::4] == 1) and np.all(a[1][3::4] == 1)

    def test_zero_sigma_is_clean(self):
        s = chain(PI / 4, 0.5, 10)
        assert np.array_equal(apply_disorder(s, DisorderSpec(0.0), 0), build_chain(s))

    def test_open_only(self):
        with pytest.raises(ValueError):
            apply_disorder(chain(PI / 4, 0.5, 10, "periodic"), DisorderSpec(), 0)

    def test_zero_sigma_survival(self):
        res = robustness_trial(chain(PI / 4, 0.5, 20), DisorderSpec(0.0, 1, 3))
        assert set(res.survival) == {"left-zero", "right-zero"}
        assert all(v == 1.0 for v in res.survival.values())

    def test_order_independent(self):
        s = chain(PI / 4, 3.5, 20)
        d = DisorderSpec(0.2, 11, 6)
        a = robustness_trial(s, d)
        b = robustness_trial(s, d, workers=3)
        assert a.per_trial == b.per_trial and a.survival == b.survival

    def test_high_u_default_seed(self):
        res = robustness_trial(chain(PI / 4, 3.5), DisorderSpec(),
                               classes=("left-zero", "right-nonzero"))
        assert res.survival == {"left-zero": 1.0, "right-nonzero": 1.0}
        assert res.errors == {}


class TestCloud:
    def test_identity_and_order(self):
        a = np.array([0, 1j, 2])
        assert cloud_distance(a, a[::-1]) == 0
        assert cloud_distance(a, a + 0.1) == pytest.approx(0.1)
