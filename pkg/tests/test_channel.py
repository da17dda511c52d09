"""Channel-model tests.

Expected values were computed independently (hand/calculator arithmetic on
the closed-form expressions) and frozen here as literals.
"""

import math

import numpy as np
import pytest

from arusim.channel import (
    ChannelParams,
    LinkGeometry,
    draw_channel,
    elevation_angle,
    link_rate,
    los_probability,
    mimo_downlink,
    mimo_uplink,
    path_loss_db,
    path_loss_db_np,
    sinr,
    spectral_rate,
)

PARAMS = ChannelParams()


class TestElevationAngle:
    def test_equal_legs(self):
        assert elevation_angle(100.0, 100.0) == pytest.approx(math.pi / 4, abs=1e-12)

    def test_overhead_limit(self):
        assert elevation_angle(100.0, 0.0) == math.pi / 2

    def test_thirty_degrees(self):
        # atan(150 / 259.81) = 0.5235948... rad (about 30 deg)
        assert elevation_angle(150.0, 259.81) == pytest.approx(0.5235948108510782, abs=1e-9)

    @pytest.mark.parametrize("h,l", [(-1.0, 10.0), (0.0, 10.0), (10.0, -1.0),
                                     (math.nan, 1.0), (1.0, math.inf)])
    def test_domain_errors(self, h, l):
        with pytest.raises(ValueError):
            elevation_angle(h, l)


class TestLosProbability:
    # Independent evaluations of 1 / (1 + mu exp(-psi (theta_deg - mu)))
    # with mu = 9.6, psi = 0.15.
    @pytest.mark.parametrize(
        "theta_deg,expected",
        [
            (90.0, 0.9999444536332709),
            (9.6, 1.0 / 10.6),
            (45.0, 0.9547063474618231),
        ],
    )
    def test_reference_values(self, theta_deg, expected):
        assert los_probability(math.radians(theta_deg), PARAMS) == pytest.approx(
            expected, abs=1e-12
        )

    def test_low_angle_limit(self):
        # theta -> 0+: limit 1 / (1 + mu e^(psi mu)) = 0.0240855...
        assert los_probability(1e-9, PARAMS) == pytest.approx(
            0.024085544236411432, abs=1e-9
        )

    def test_strictly_increasing(self):
        angles = np.linspace(1e-6, math.pi / 2, 200)
        values = [los_probability(a, PARAMS) for a in angles]
        assert all(b > a for a, b in zip(values, values[1:]))
        assert 0.0 < values[0] and values[-1] < 1.0

    @pytest.mark.parametrize("bad", [0.0, -0.1, math.pi / 2 + 0.01, math.nan])
    def test_domain_errors(self, bad):
        with pytest.raises(ValueError):
            los_probability(bad, PARAMS)


class TestPathLoss:
    def test_reference_link(self):
        # h = 100, l = 100: d = 141.42 m, theta = 45 deg -> 92.8757 dB
        geom = LinkGeometry.from_altitude_horizontal(100.0, 100.0)
        assert path_loss_db(geom, PARAMS) == pytest.approx(92.87567654858671, abs=1e-9)
        assert path_loss_db(geom, PARAMS) == pytest.approx(92.86, abs=0.1)

    def test_pure_free_space(self):
        params = ChannelParams(eta_los=0.0, eta_nlos=0.0)
        geom = LinkGeometry.from_altitude_horizontal(100.0, 0.0)
        expected = 20.0 * math.log10(4.0 * math.pi * 6.0e9 * 100.0 / 3.0e8)
        assert path_loss_db(geom, params) == pytest.approx(expected, abs=1e-12)
        # d = 100 m at 6 GHz -> 88.005 dB
        assert path_loss_db(geom, params) == pytest.approx(88.00479719372154, abs=1e-9)

    def test_doubling_distance_adds_6db(self):
        params = ChannelParams(eta_los=0.0, eta_nlos=0.0)
        for d in (50.0, 100.0, 373.0):
            g1 = LinkGeometry.from_altitude_horizontal(d, 0.0)
            g2 = LinkGeometry.from_altitude_horizontal(2 * d, 0.0)
            delta = path_loss_db(g2, params) - path_loss_db(g1, params)
            assert delta == pytest.approx(6.0206, abs=1e-3)

    def test_increasing_in_distance_at_fixed_angle(self):
        # fixed 45-degree elevation, growing distance
        values = []
        for d in (50.0, 100.0, 200.0, 400.0):
            leg = d / math.sqrt(2.0)
            values.append(path_loss_db(LinkGeometry.from_altitude_horizontal(leg, leg), PARAMS))
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_zero_distance_rejected(self):
        geom = LinkGeometry(altitude_m=1.0, horizontal_m=0.0, distance_m=0.0,
                            elevation_rad=math.pi / 2)
        with pytest.raises(ValueError):
            path_loss_db(geom, PARAMS)

    def test_vectorized_matches_scalar(self):
        rng = np.random.default_rng(11)
        alts = rng.uniform(50.0, 300.0, 64)
        horizs = rng.uniform(0.0, 500.0, 64)
        vec = path_loss_db_np(alts, horizs, PARAMS)
        for a, l, v in zip(alts, horizs, vec):
            geom = LinkGeometry.from_altitude_horizontal(a, l)
            assert v == pytest.approx(path_loss_db(geom, PARAMS), rel=1e-12)


class TestSinrAndRate:
    @pytest.mark.parametrize(
        "p,n,i,expected",
        [
            (1.0, 1.0, (), 1.0),
            (3.0, 1.0, (1.0, 1.0), 1.0),
            (2e-9, 1e-9, (1e-9,), 1.0),
        ],
    )
    def test_sinr_values(self, p, n, i, expected):
        assert sinr(p, n, i) == pytest.approx(expected, rel=1e-12)

    def test_sinr_errors(self):
        with pytest.raises(ValueError):
            sinr(-1.0, 1.0)
        with pytest.raises(ValueError):
            sinr(1.0, 0.0)
        with pytest.raises(ValueError):
            sinr(1.0, 1.0, (-0.5,))

    @pytest.mark.parametrize("s,expected", [(1.0, 1.0), (3.0, 2.0), (0.0, 0.0)])
    def test_spectral_rate(self, s, expected):
        assert spectral_rate(s) == pytest.approx(expected, abs=1e-12)

    def test_spectral_rate_error(self):
        with pytest.raises(ValueError):
            spectral_rate(-0.1)

    def test_rate_of_sinr_identity(self):
        rng = np.random.default_rng(5)
        for p in rng.uniform(0.0, 10.0, 100):
            assert spectral_rate(sinr(p, 2.5)) == pytest.approx(
                math.log2(1.0 + p / 2.5), rel=1e-12
            )


class TestLinkRate:
    def test_unit_sinr_gives_one_bit(self):
        geom = LinkGeometry.from_altitude_horizontal(100.0, 100.0)
        pl = path_loss_db(geom, PARAMS)
        tx = PARAMS.noise_power * 10.0 ** (pl / 10.0)  # received power == noise
        assert link_rate(geom, PARAMS, tx) == pytest.approx(1.0, rel=1e-9)

    def test_monotone_in_distance(self):
        g1 = LinkGeometry.from_altitude_horizontal(100.0, 100.0)
        g2 = LinkGeometry.from_altitude_horizontal(200.0, 200.0)
        assert link_rate(g2, PARAMS, 1.0) < link_rate(g1, PARAMS, 1.0)

    def test_reference_chain(self):
        # chained oracle: PL = 92.8757 dB, tx = 1 W, noise = 1e-12 W
        geom = LinkGeometry.from_altitude_horizontal(100.0, 100.0)
        received = 10.0 ** (-92.87567654858671 / 10.0)
        expected = math.log2(1.0 + received / 1e-12)
        assert link_rate(geom, PARAMS, 1.0) == pytest.approx(expected, rel=1e-9)


class TestDrawChannel:
    def test_seeded_determinism(self):
        a = draw_channel(2, 2, np.random.default_rng(42))
        b = draw_channel(2, 2, np.random.default_rng(42))
        assert np.array_equal(a, b)

    def test_shape_contract(self):
        h = draw_channel(2, 100, np.random.default_rng(0))
        assert h.shape == (2, 100)

    def test_unit_second_moment(self):
        h = draw_channel(100, 1000, np.random.default_rng(7))
        assert np.mean(np.abs(h) ** 2) == pytest.approx(1.0, abs=0.05)

    def test_zero_dims_rejected(self):
        with pytest.raises(ValueError):
            draw_channel(0, 2, np.random.default_rng(0))


class TestMimoChain:
    def test_uplink_linear_when_beta_zero(self):
        rng = np.random.default_rng(3)
        x = draw_channel(1, 4, rng)
        h = draw_channel(4, 6, rng)
        assert np.allclose(mimo_uplink(x, h, 0.0), x @ h, rtol=1e-15)

    def test_uplink_scalar_example(self):
        # 1x1: 1 * 2 + 1.5 * 0.1 * |1|^2 = 2.15
        y = mimo_uplink([[1.0 + 0j]], [[2.0 + 0j]], 0.1)
        assert y[0, 0] == pytest.approx(2.15, abs=1e-15)

    def test_uplink_zero_input(self):
        h = draw_channel(2, 2, np.random.default_rng(1))
        y = mimo_uplink(np.zeros((1, 2)), h, 0.3)
        assert np.all(y == 0)

    def test_uplink_shape_errors(self):
        with pytest.raises(ValueError):
            mimo_uplink(np.ones((1, 3)), np.ones((2, 2)), 0.0)
        with pytest.raises(ValueError):
            # nonlinear term only conforms for square channels
            mimo_uplink(np.ones((1, 2)), np.ones((2, 3)), 0.1)

    def test_downlink_exact_when_noiseless(self):
        rng = np.random.default_rng(9)
        y_ul = draw_channel(1, 3, rng)
        h_dl = draw_channel(3, 5, rng)
        out = mimo_downlink(y_ul, h_dl, 0.0, rng)
        assert np.array_equal(out, y_ul @ h_dl)

    def test_downlink_identity_channel(self):
        rng = np.random.default_rng(10)
        y_ul = draw_channel(1, 4, rng)
        out = mimo_downlink(y_ul, np.eye(4), 0.0, rng)
        assert np.allclose(out, y_ul, rtol=1e-15)

    def test_downlink_noise_variance(self):
        rng = np.random.default_rng(21)
        sigma = 0.7
        out = mimo_downlink(np.zeros((100, 1000)), np.ones((1000, 1000)) * 0, sigma, rng)
        var = np.mean(np.abs(out) ** 2)
        assert var == pytest.approx(sigma**2, rel=0.05)

    def test_downlink_shape_error(self):
        with pytest.raises(ValueError):
            mimo_downlink(np.ones((1, 3)), np.ones((2, 2)), 0.0, np.random.default_rng(0))

    def test_two_hop_associativity(self):
        rng = np.random.default_rng(17)
        x = draw_channel(1, 2, rng)
        h_ul = draw_channel(2, 2, rng)
        h_dl = draw_channel(2, 100, rng)
        y = mimo_downlink(mimo_uplink(x, h_ul, 0.0), h_dl, 0.0, rng)
        direct = x @ h_ul @ h_dl
        assert np.allclose(y, direct, rtol=1e-12)


class TestChannelParams:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"mu": 0.0},
            {"psi": -0.1},
            {"carrier_hz": 0.0},
            {"eta_los": 5.0, "eta_nlos": 1.0},
            {"eta_los": -1.0},
            {"noise_power": 0.0},
            {"noise_sigma": -1.0},
            {"beta": -0.01},
        ],
    )
    def test_invalid_params(self, kwargs):
        with pytest.raises(ValueError):
            ChannelParams(**kwargs)
