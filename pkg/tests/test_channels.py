import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from risrelay.channels import (
    ArrayLayout,
    ChannelSet,
    FadingParams,
    SystemGeometry,
    generate_scenario,
    los_component,
    pathloss,
    ula,
    upa,
)
from risrelay.exceptions import DomainError


class TestPathloss:
    def test_los_300m(self):
        # C = 10**(-3.095), 300**2.2 evaluated independently
        c = 10.0 ** (-3.095)
        assert c == pytest.approx(8.035e-4, rel=1e-3)
        assert pathloss(300.0, True) == pytest.approx(c / np.exp(2.2 * np.log(300.0)), rel=1e-12)
        assert pathloss(300.0, True) == pytest.approx(2.853e-9, rel=1e-3)

    def test_unit_distance_is_the_constant(self):
        assert pathloss(1.0, True) == 10.0 ** (-3.095)

    def test_nlos_35m(self):
        assert pathloss(35.0, False) == pytest.approx(2.743e-9, rel=1e-3)
        assert pathloss(35.0, False) == pytest.approx(10.0 ** (-2.895) / 35.0 ** 3.67, rel=1e-12)

    @pytest.mark.parametrize("d", [0.0, -1.0, np.nan, np.inf])
    def test_bad_distance(self, d):
        with pytest.raises(DomainError):
            pathloss(d, True)

    @given(
        st.floats(0.1, 1e4),
        st.floats(1.001, 10.0),
        st.booleans(),
    )
    def test_strictly_decreasing(self, d, factor, los):
        assert pathloss(d * factor, los) < pathloss(d, los)

    def test_gains_enter_the_constant(self):
        p = FadingParams(gt_dbi=10.0, gr_dbi=3.0)
        assert pathloss(1.0, False, p) == pytest.approx(10.0 ** ((13.0 - 33.95) / 10.0))


class TestArrays:
    def test_upa_factorization(self):
        for L in (1, 2, 7, 20, 50, 180):
            arr = upa(L)
            assert arr.rows * arr.cols == L
            assert arr.size == L

    def test_steering_broadside_is_flat(self):
        a = ula(4).steering((1.0, 0.0, 0.0))
        np.testing.assert_allclose(a, np.ones(4))

    def test_steering_endfire_progression(self):
        # half-wavelength spacing along the array axis: phase step pi
        a = ula(3).steering((0.0, 1.0, 0.0), spacing=0.5)
        np.testing.assert_allclose(np.abs(a), 1.0)
        np.testing.assert_allclose(a[1:] / a[:-1], -1.0, atol=1e-12)


class TestLosComponent:
    def test_single_elements(self):
        G = los_component((0, 0, 0), ula(1), (5, 1, 2), ula(1))
        assert G.shape == (1, 1)
        assert abs(G[0, 0]) == pytest.approx(1.0)

    @settings(max_examples=50)
    @given(
        st.tuples(*[st.floats(-100, 100)] * 3),
        st.tuples(*[st.floats(-100, 100)] * 3),
        st.integers(1, 6),
        st.integers(1, 12),
    )
    def test_unit_modulus(self, p, q, n_tx, n_rx):
        if np.linalg.norm(np.subtract(p, q)) < 1e-3:
            return
        G = los_component(p, ula(n_tx), q, upa(n_rx))
        assert G.shape == (n_rx, n_tx)
        np.testing.assert_allclose(np.abs(G), 1.0, atol=1e-12)

    def test_broadside_all_ones(self):
        # both ULAs run along y; the nodes are separated along x only
        G = los_component((0, 0, 10), ula(5), (300, 0, 10), ula(4))
        np.testing.assert_allclose(G, np.ones((4, 5)), atol=1e-12)

    def test_coincident(self):
        with pytest.raises(DomainError):
            los_component((1, 2, 3), ula(2), (1, 2, 3), ula(2))


class TestGeometry:
    def test_defaults(self):
        g = SystemGeometry()
        assert (g.M, g.N, g.K, g.L) == (5, 5, 4, 50)
        assert g.user_circle_radius == 35.0

    @pytest.mark.parametrize(
        "kw",
        [dict(K=6, N=5), dict(M=0), dict(L=-1), dict(user_circle_radius=0.0), dict(relay_position=(0.0, 0.0, 10.0))],
    )
    def test_invalid(self, kw):
        with pytest.raises(DomainError):
            SystemGeometry(**kw)

    def test_presets(self):
        mid = SystemGeometry.preset("midpoint")
        assert mid.relay_position[0] == 150.0
        assert mid.user_circle_center[0] == 300.0
        with pytest.raises(DomainError):
            SystemGeometry.preset("elsewhere")


class TestScenario:
    def test_shapes_and_reciprocity(self):
        ch = generate_scenario(SystemGeometry(M=3, N=4, K=2, L=6), seed=1)
        assert ch.H_TR.shape == (4, 3)
        assert ch.H_TI.shape == (6, 3)
        assert ch.H_IR.shape == (4, 6)
        assert ch.h_T.shape == (2, 3) and ch.h_R.shape == (2, 4) and ch.h_I.shape == (2, 6)
        np.testing.assert_array_equal(ch.H_RI, ch.H_IR.conj().T)
        for name in ("H_TR", "H_TI", "H_IR", "h_T", "h_R", "h_I"):
            assert np.all(np.isfinite(getattr(ch, name)))

    def test_deterministic(self):
        g = SystemGeometry()
        a = generate_scenario(g, seed=42)
        b = generate_scenario(g, seed=42)
        c = generate_scenario(g, seed=43)
        assert a.equals(b)
        assert not a.equals(c)
        np.testing.assert_array_equal(a.user_positions, b.user_positions)

    def test_immutable(self):
        ch = generate_scenario(SystemGeometry(L=4), seed=0)
        with pytest.raises(ValueError):
            ch.H_TR[0, 0] = 0

    def test_users_in_disk(self):
        g = SystemGeometry(K=4)
        for seed in range(50):
            pos = generate_scenario(g, seed=seed).user_positions
            r = np.linalg.norm(pos[:, :2] - np.asarray(g.user_circle_center)[:2], axis=1)
            assert np.all(r <= g.user_circle_radius)

    def test_pure_los_limit(self):
        g = SystemGeometry(L=4)
        p = FadingParams(rician_k=1e12)
        ch = generate_scenario(g, p, seed=3)
        beta = pathloss(np.linalg.norm(np.subtract(g.relay_position, g.bs_position)), True, p)
        los = los_component(g.bs_position, g.bs_array, g.relay_position, g.relay_array, g.spacing)
        np.testing.assert_allclose(ch.H_TR, np.sqrt(beta) * los, rtol=1e-5)

    def test_second_moments(self):
        # 10^4 draws; every link's mean |entry|^2 divided by its pathloss -> 1
        g = SystemGeometry(M=2, N=2, K=1, L=2)
        p = FadingParams()
        pos = {"bs": g.bs_position, "relay": g.relay_position, "ris": g.ris_position}
        beta_tr = pathloss(np.linalg.norm(np.subtract(pos["relay"], pos["bs"])), True, p)
        beta_ti = pathloss(np.linalg.norm(np.subtract(pos["ris"], pos["bs"])), True, p)
        beta_ir = pathloss(np.linalg.norm(np.subtract(pos["relay"], pos["ris"])), True, p)
        acc = np.zeros(6)
        n = 10_000
        for seed in range(n):
            ch = generate_scenario(g, p, seed)
            u = ch.user_positions[0]
            acc += [
                np.mean(np.abs(ch.H_TR) ** 2) / beta_tr,
                np.mean(np.abs(ch.H_TI) ** 2) / beta_ti,
                np.mean(np.abs(ch.H_IR) ** 2) / beta_ir,
                np.mean(np.abs(ch.h_T) ** 2) / pathloss(np.linalg.norm(u - pos["bs"]), False, p),
                np.mean(np.abs(ch.h_R) ** 2) / pathloss(np.linalg.norm(u - pos["relay"]), False, p),
                np.mean(np.abs(ch.h_I) ** 2) / pathloss(np.linalg.norm(u - pos["ris"]), False, p),
            ]
        np.testing.assert_allclose(acc / n, 1.0, rtol=0.05)

    def test_zero_ris(self):
        ch = generate_scenario(SystemGeometry(L=0), seed=0)
        assert ch.L == 0

    def test_without_ris(self):
        ch = generate_scenario(SystemGeometry(L=4), seed=0)
        dead = ch.without_ris()
        assert not np.any(dead.H_TI) and not np.any(dead.H_IR) and not np.any(dead.h_I)
        np.testing.assert_array_equal(dead.H_TR, ch.H_TR)


def test_channelset_shape_check():
    z = np.zeros
    with pytest.raises(DomainError):
        ChannelSet(z((2, 2)), z((3, 2)), z((2, 4)), z((1, 2)), z((1, 2)), z((1, 3)), 1.0)
    with pytest.raises(DomainError):
        ChannelSet(z((2, 2)), z((3, 2)), z((2, 3)), z((1, 2)), z((1, 2)), z((1, 3)), 0.0)


def test_array_layout_validation():
    with pytest.raises(DomainError):
        ArrayLayout(-1, 3)
