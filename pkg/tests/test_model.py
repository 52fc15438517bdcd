import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tanchain import (
    ChainConfig,
    InvalidConfigError,
    PotentialKind,
    SingularityError,
    analytic_energy,
    analytic_strong_field_energy,
    build_hamiltonian,
    derive_b0,
    derive_lambda,
    potential_at,
    reflect,
)
from tanchain.model import analytic_constant, default_n_half


def test_derive_b0_matches_reported_field():
    b0 = derive_b0(1.0, 500.0, 1.0)
    assert b0 == pytest.approx(2 * math.pi**2 / 500**2, rel=1e-15)
    assert f"{b0:.4e}" == "7.8957e-05"
    assert float(f"{b0:.1e}") == 7.9e-5


def test_derive_b0_vanishes_with_lambda():
    assert derive_b0(0.0, 500.0) == 0.0
    assert derive_b0(1e-300, 500.0) == pytest.approx(0.0, abs=1e-300)


def test_strong_field_lambda_by_inversion():
    lam = derive_lambda(6.33, 500.0)
    # bisection on derive_b0 as an independent inversion
    lo, hi = 1.0, 1e7
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if derive_b0(mid, 500.0) < 6.33 else (lo, mid)
    assert lam == pytest.approx(lo, rel=1e-12)
    assert f"{lam:.4g}" == "8.017e+04"


@pytest.mark.parametrize("args", [(-1.0, 500.0, 1.0), (1.0, 0.0, 1.0), (1.0, 500.0, 0.0)])
def test_derive_b0_rejects_bad_input(args):
    with pytest.raises(InvalidConfigError):
        derive_b0(*args)


class TestChainConfig:
    def test_default_half_length(self):
        assert ChainConfig(l_eff=500, lam=1).n_half == 249
        assert ChainConfig(l_eff=501, lam=1).n_half == 250
        assert default_n_half(100) == 49

    def test_derives_missing_field_parameter(self):
        c = ChainConfig(l_eff=500, b0=6.33)
        assert c.lam == pytest.approx(derive_lambda(6.33, 500))
        assert c.b0 == 6.33

    def test_consistent_pair_accepted(self):
        lam = 1.3
        c = ChainConfig(l_eff=500, lam=lam, b0=derive_b0(lam, 500) * (1 + 1e-13))
        assert c.lam == lam

    def test_inconsistent_pair_rejected(self):
        with pytest.raises(InvalidConfigError, match="disagrees"):
            ChainConfig(l_eff=500, lam=1.0, b0=1e-4)

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(l_eff=500),
            dict(l_eff=500, lam=-1),
            dict(l_eff=500, b0=0.0),
            dict(l_eff=2, lam=1),
            dict(l_eff=500, lam=1, n_half=250),
            dict(l_eff=500, lam=1, n_half=0),
            dict(l_eff=500, lam=1, j_coupling=0),
            dict(l_eff=500, lam=1, potential="cubic"),
            dict(l_eff=500, lam=1, hopping_ratio=-1),
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(InvalidConfigError):
            ChainConfig(**kwargs)

    def test_zero_field_needs_no_field_parameter(self):
        c = ChainConfig(l_eff=500, potential="zero")
        assert c.b0 == 0.0 and c.potential is PotentialKind.ZERO
        assert math.isinf(c.revival_time)

    def test_replace_keeps_lambda_when_length_changes(self):
        c = ChainConfig(l_eff=500, lam=1.0).replace(l_eff=750)
        assert c.lam == 1.0
        assert c.b0 == pytest.approx(derive_b0(1.0, 750))
        assert c.n_half == 374

    def test_replace_switches_field_parameter(self):
        c = ChainConfig(l_eff=500, lam=1.0).replace(b0=6.33)
        assert c.b0 == 6.33 and c.lam == pytest.approx(derive_lambda(6.33, 500))


class TestPotential:
    def test_zero_at_center(self, lam1_config):
        assert potential_at(lam1_config, 0) == 0.0

    def test_quarter_length_gives_b0(self):
        c = ChainConfig(l_eff=8, lam=1.0)
        assert potential_at(c, 2) == pytest.approx(c.b0, rel=1e-15)

    def test_value_at_site_100(self, lam1_config):
        # independent scalar evaluation of B0 tan^2(0.2 pi)
        expected = (2 * math.pi**2 / 500**2) * math.tan(0.2 * math.pi) ** 2
        assert potential_at(lam1_config, 100) == pytest.approx(expected, rel=1e-14)
        assert potential_at(lam1_config, 100) == pytest.approx(4.168e-5, rel=1e-3)

    def test_parabolic_and_zero(self, lam1_config):
        para = lam1_config.replace(potential="parabolic")
        assert potential_at(para, 100) == pytest.approx(para.b0 * (0.2 * math.pi) ** 2)
        assert potential_at(lam1_config.replace(potential="zero"), 100) == 0.0

    def test_off_chain_rejected(self, lam1_config):
        with pytest.raises(ValueError):
            potential_at(lam1_config, 250)

    def test_singularity_guard(self):
        # n_half = 1 keeps the config valid; the guard itself is exercised directly
        c = ChainConfig(l_eff=3, lam=1.0)
        object.__setattr__(c, "n_half", 2)
        with pytest.raises(SingularityError):
            potential_at(c, 2)

    @given(st.integers(min_value=0, max_value=249), st.sampled_from(list(PotentialKind)))
    def test_even(self, i, kind):
        c = ChainConfig(l_eff=500, lam=1.0, potential=kind)
        assert potential_at(c, i) == potential_at(c, -i)

    @given(st.floats(min_value=3.0, max_value=2000.0), st.floats(min_value=1e-3, max_value=1e3))
    def test_parabolic_below_tangent(self, l_eff, lam):
        tan = ChainConfig(l_eff=l_eff, lam=lam)
        para = tan.replace(potential="parabolic")
        assert np.all(build_hamiltonian(tan).diagonal >= build_hamiltonian(para).diagonal)


class TestHamiltonian:
    def test_three_site_zero_field(self):
        h = build_hamiltonian(ChainConfig(l_eff=8, n_half=1, potential="zero", hopping_ratio=0.5))
        np.testing.assert_array_equal(h.diagonal, [0, 0, 0])
        np.testing.assert_array_equal(h.off_diagonal, [-0.5, -0.5])

    def test_default_hopping_is_j(self):
        h = build_hamiltonian(ChainConfig(l_eff=8, lam=1.0, j_coupling=2.0))
        np.testing.assert_array_equal(h.off_diagonal, np.full(h.size - 1, -2.0))

    def test_three_site_tangent(self):
        c = ChainConfig(l_eff=8, lam=1.0, n_half=1)
        b0 = 2 * math.pi**2 / 64
        side = b0 * math.tan(math.pi / 8) ** 2
        h = build_hamiltonian(c)
        np.testing.assert_allclose(h.diagonal, [side, 0.0, side], rtol=1e-15)
        assert c.b0 == pytest.approx(b0, rel=1e-15)

    @given(
        st.floats(min_value=3.0, max_value=600.0),
        st.floats(min_value=1e-2, max_value=1e6),
        st.sampled_from(list(PotentialKind)),
        st.sampled_from([0.5, 1.0]),
    )
    @settings(max_examples=50)
    def test_commutes_with_reflection_exactly(self, l_eff, lam, kind, ratio):
        h = build_hamiltonian(ChainConfig(l_eff=l_eff, lam=lam, potential=kind, hopping_ratio=ratio))
        p = h.reflected()
        assert np.array_equal(p.diagonal, h.diagonal)
        assert np.array_equal(p.off_diagonal, h.off_diagonal)
        assert np.all(h.diagonal >= 0)

    def test_deterministic(self, lam1_config):
        a, b = build_hamiltonian(lam1_config), build_hamiltonian(ChainConfig(l_eff=500, lam=1.0))
        assert a.diagonal.tobytes() == b.diagonal.tobytes()
        assert a.off_diagonal.tobytes() == b.off_diagonal.tobytes()

    def test_matvec_matches_dense(self, rng):
        h = build_hamiltonian(ChainConfig(l_eff=40, lam=2.0))
        x = rng.normal(size=h.size) + 1j * rng.normal(size=h.size)
        np.testing.assert_allclose(h.matvec(x), h.to_dense() @ x, atol=1e-14)
        X = rng.normal(size=(h.size, 3))
        np.testing.assert_allclose(h.matvec(X), h.to_dense() @ X, atol=1e-14)

    def test_gershgorin_contains_spectrum(self):
        h = build_hamiltonian(ChainConfig(l_eff=60, lam=3.0))
        lo, hi = h.gershgorin_bounds()
        w = np.linalg.eigvalsh(h.to_dense())
        assert lo <= w.min() and w.max() <= hi


class TestAnalytic:
    def test_mu_at_lambda_one(self, lam1_config):
        # n^2 + 4 mu n with mu = 1/2
        scale = math.pi**2 / 500**2
        assert analytic_energy(lam1_config, 3) == pytest.approx(scale * (9 + 6))

    def test_lambda_one_reduces_to_quadratic(self, lam1_config):
        b0 = lam1_config.b0
        for n in range(6):
            assert analytic_energy(lam1_config, n) == pytest.approx(0.5 * n * (n + 2) * b0, rel=1e-13)
        assert analytic_energy(lam1_config, 1) - analytic_energy(lam1_config, 0) == pytest.approx(1.5 * b0)
        assert analytic_energy(lam1_config, 0) == 0.0

    def test_constant_reported_separately(self, lam1_config):
        assert analytic_constant(lam1_config) == pytest.approx(2 * math.pi**2 / 500**2)

    def test_rejects_negative_level_and_other_kinds(self, lam1_config):
        with pytest.raises(ValueError):
            analytic_energy(lam1_config, -1)
        with pytest.raises(InvalidConfigError):
            analytic_energy(lam1_config.replace(potential="parabolic"), 1)

    def test_strong_field_spacing(self, strong_config):
        assert analytic_strong_field_energy(strong_config, 0) == 0.0
        e1 = analytic_strong_field_energy(strong_config, 1)
        assert e1 == pytest.approx(0.0316, abs=5e-5)
        assert round(e1, 3) == 0.032
        n = np.arange(10)
        assert np.allclose(np.diff(analytic_strong_field_energy(strong_config, n)), e1)


class TestReflect:
    def test_delta_moves_to_mirror(self):
        v = np.zeros(7)
        v[-1] = 1.0
        np.testing.assert_array_equal(reflect(v), np.eye(7)[0])

    def test_even_vector_fixed(self):
        v = np.array([1.0, 2.0, 3.0, 2.0, 1.0])
        np.testing.assert_array_equal(reflect(v), v)

    def test_rejects_even_length(self):
        with pytest.raises(ValueError):
            reflect(np.ones(4))

    @given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=31).filter(lambda x: len(x) % 2 == 1))
    def test_involution_and_norm(self, xs):
        v = np.array(xs)
        assert np.array_equal(reflect(reflect(v)), v)
        assert np.linalg.norm(reflect(v)) == pytest.approx(np.linalg.norm(v), rel=1e-15)

    def test_quadratic_form_invariant(self, rng):
        h = build_hamiltonian(ChainConfig(l_eff=100, lam=1.0))
        v = rng.normal(size=h.size)
        p = np.eye(h.size)[::-1]
        lhs = reflect(v) @ h.matvec(reflect(v))
        assert lhs == pytest.approx(v @ h.matvec(v), rel=1e-13)
        assert lhs == pytest.approx(v @ (p @ h.to_dense() @ p) @ v, rel=1e-13)
