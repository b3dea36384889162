import math

import numpy as np
import pytest

from spinfactor import decay, geometry
from conftest import random_edges

EXP_PROFILE = decay.DecayProfile(decay.PowerLawWeight(2.0),
                                 decay.ExponentialEnvelope(1.0))


class TestValidateProfile:
    def test_pure_exponential_passes(self):
        report = decay.validate_profile(EXP_PROFILE, 20)
        assert report.ok
        assert report.failed_condition is None

    def test_exponential_superadditivity_is_equality(self):
        env = decay.ExponentialEnvelope(0.7)
        for a in range(8):
            for b in range(8):
                assert env(a + b) == pytest.approx(env(a) * env(b), rel=1e-14)

    def test_stretched_exponential_passes_on_wide_grid(self):
        # the decay probe needs the grid to reach past the peak of r^4 xi(r)
        profile = decay.DecayProfile(decay.PowerLawWeight(2.0),
                                     decay.StretchedExponentialEnvelope(1.0, 0.5))
        assert decay.validate_profile(profile, 128).ok

    def test_reciprocal_envelope_fails_decay_probe(self):
        # 1/(1+r) is log-superadditive ((1+a)(1+b) >= 1+a+b) but decays too
        # slowly; the verdict must name the decay probe.
        profile = decay.DecayProfile(decay.PowerLawWeight(2.0), lambda r: 1.0 / (1.0 + r))
        report = decay.validate_profile(profile, 20)
        assert not report.ok
        assert report.failed_condition == "superpolynomial_decay"

    def test_increasing_envelope_fails_monotonicity_first(self):
        profile = decay.DecayProfile(decay.PowerLawWeight(2.0), lambda r: 1.0 + r)
        report = decay.validate_profile(profile, 10)
        assert not report.ok
        assert report.failed_condition == "envelope_monotone"
        assert report.violations[0] == (0, 1)

    def test_gaussian_envelope_fails_superadditivity(self):
        # exp(-r^2) decays too fast: xi(2) = e^-4 < xi(1)^2 = e^-2
        profile = decay.DecayProfile(decay.PowerLawWeight(2.0),
                                     lambda r: math.exp(-r * r))
        report = decay.validate_profile(profile, 10)
        assert not report.ok
        assert report.failed_condition == "log_superadditivity"
        assert (1, 1) in report.violations

    def test_rejects_tiny_grid(self):
        with pytest.raises(ValueError, match="r_max"):
            decay.validate_profile(EXP_PROFILE, 1)


class TestTailSum:
    def test_exponential_closed_form_radius_zero(self):
        # geometric series: sum_{r>=1} e^-r = e^-1 / (1 - e^-1)
        expected = math.exp(-1) / (1 - math.exp(-1))
        result = decay.tail_sum(EXP_PROFILE, 0)
        assert result.exact_tail
        assert result.truncation_bound == 0.0
        assert result.value == pytest.approx(expected, abs=1e-12)

    def test_exponential_closed_form_radius_one(self):
        expected = math.exp(-2) / (1 - math.exp(-1))
        assert decay.tail_sum(EXP_PROFILE, 1).value == pytest.approx(expected, abs=1e-12)

    def test_strictly_decreasing(self):
        values = [decay.tail_sum(EXP_PROFILE, r).value for r in range(12)]
        assert all(b < a for a, b in zip(values, values[1:]))

    def test_superpolynomial_probe(self):
        assert (decay.tail_sum(EXP_PROFILE, 20).value * 20**3
                < decay.tail_sum(EXP_PROFILE, 10).value * 10**3)

    def test_stretched_reports_truncation(self):
        profile = decay.DecayProfile(decay.PowerLawWeight(2.0),
                                     decay.StretchedExponentialEnvelope(1.0, 0.5))
        result = decay.tail_sum(profile, 2, cutoff=2000)
        assert not result.exact_tail
        assert result.truncation_bound == pytest.approx(
            profile.envelope(2000.0) * 2000, rel=1e-12)
        # brute partial sum oracle
        oracle = sum(profile.envelope(float(r)) for r in range(3, 2001))
        assert result.value == pytest.approx(oracle, rel=1e-13)

    def test_rejects_bad_cutoff(self):
        with pytest.raises(ValueError, match="cutoff"):
            decay.tail_sum(EXP_PROFILE, 5, cutoff=5)


def constants_oracle(profile, lattice):
    """Direct triple-loop recomputation of all four constants."""
    n = lattice.vertex_count
    weight_norm = damped_norm = 0.0
    for x in range(n):
        weight_norm = max(weight_norm,
                          sum(profile.weight_at(lattice.distance(x, y)) for y in range(n)))
        damped_norm = max(damped_norm,
                          sum(profile.damped_at(lattice.distance(x, y)) for y in range(n)))
    weight_conv = damped_conv = 0.0
    for x in range(n):
        for z in range(n):
            num_w = sum(profile.weight_at(lattice.distance(x, y))
                        * profile.weight_at(lattice.distance(y, z)) for y in range(n))
            num_d = sum(profile.damped_at(lattice.distance(x, y))
                        * profile.damped_at(lattice.distance(y, z)) for y in range(n))
            fw = profile.weight_at(lattice.distance(x, z))
            fd = profile.damped_at(lattice.distance(x, z))
            if fw > 0:
                weight_conv = max(weight_conv, num_w / fw)
            if fd > 0:
                damped_conv = max(damped_conv, num_d / fd)
    return weight_norm, weight_conv, damped_norm, damped_conv


class TestLatticeConstants:
    def test_p3_weight_norm(self):
        lat = geometry.path(3)
        constants = decay.lattice_constants(EXP_PROFILE, lat)
        assert constants.weight_norm == pytest.approx(1.5, abs=1e-12)

    def test_single_vertex(self):
        lat = geometry.Lattice(1, [])
        constants = decay.lattice_constants(EXP_PROFILE, lat)
        assert constants.weight_norm == pytest.approx(1.0, abs=1e-14)
        assert constants.weight_conv == pytest.approx(1.0, abs=1e-14)

    def test_matches_direct_summation_oracle(self, rng):
        for _ in range(30):
            n = int(rng.integers(2, 9))
            lat = geometry.Lattice(n, random_edges(rng, n))
            constants = decay.lattice_constants(EXP_PROFILE, lat)
            wn, wc, dn, dc = constants_oracle(EXP_PROFILE, lat)
            assert constants.weight_norm == pytest.approx(wn, rel=1e-12)
            assert constants.weight_conv == pytest.approx(wc, rel=1e-12)
            assert constants.damped_norm == pytest.approx(dn, rel=1e-12)
            assert constants.damped_conv == pytest.approx(dc, rel=1e-12)

    def test_damped_conv_below_bare_conv_on_random_graphs(self, rng):
        for _ in range(100):
            n = int(rng.integers(2, 9))
            lat = geometry.Lattice(n, random_edges(rng, n))
            constants = decay.lattice_constants(EXP_PROFILE, lat)
            assert constants.damped_conv <= constants.weight_conv * (1 + 1e-12)

    def test_damped_norm_below_weight_norm(self, rng):
        # holds because the envelope starts at 1 and never increases
        for _ in range(30):
            n = int(rng.integers(2, 9))
            lat = geometry.Lattice(n, random_edges(rng, n))
            constants = decay.lattice_constants(EXP_PROFILE, lat)
            assert constants.damped_norm <= constants.weight_norm * (1 + 1e-12)

    def test_envelope_triple_quotient_below_one(self, rng):
        env = decay.ExponentialEnvelope(1.0)
        for _ in range(20):
            n = int(rng.integers(2, 9))
            lat = geometry.Lattice(n, random_edges(rng, n, p=0.7))
            for x in range(n):
                for y in range(n):
                    for z in range(n):
                        dxy, dyz, dxz = (lat.distance(x, y), lat.distance(y, z),
                                         lat.distance(x, z))
                        if max(dxy, dyz, dxz) >= geometry.UNREACHABLE:
                            continue
                        quotient = env(dxy) * env(dyz) / env(dxz)
                        assert quotient <= 1.0 + 1e-12

    def test_provenance_and_overrides(self):
        lat = geometry.path(4)
        constants = decay.lattice_constants(EXP_PROFILE, lat)
        assert constants.provenance["weight_norm"] == decay.LATTICE_COMPUTED
        updated = constants.with_growth(2.0, 1).with_overrides(weight_norm=9.0)
        assert updated.weight_norm == 9.0
        assert updated.provenance["weight_norm"] == decay.USER_SUPPLIED
        assert updated.provenance["damped_norm"] == decay.LATTICE_COMPUTED
        assert updated.growth == 2.0 and updated.dimension == 1
        with pytest.raises(ValueError, match="unknown constant"):
            constants.with_overrides(nonsense=1.0)

    def test_sentinel_distances_contribute_nothing(self):
        lat = geometry.Lattice(4, [(0, 1), (2, 3)])
        constants = decay.lattice_constants(EXP_PROFILE, lat)
        half = geometry.Lattice(2, [(0, 1)])
        assert constants.weight_norm == pytest.approx(
            decay.lattice_constants(EXP_PROFILE, half).weight_norm, rel=1e-14)
