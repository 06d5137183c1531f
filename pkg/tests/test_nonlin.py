import math

import numpy as np
import pytest

from resnet_mft.errors import DomainError
from resnet_mft.nonlin import DEFAULT_EPS, Activation, activate, activate_deriv

ALL = [Activation.tanh(), Activation.alpha_relu(0.6), Activation.alpha_relu(1.0),
       Activation.alpha_relu(2.5), Activation.tempered_alpha_relu(0.7, 1e-3)]


class TestConstruction:
    def test_alpha_lower_limit(self):
        with pytest.raises(DomainError):
            Activation.alpha_relu(-0.5)
        Activation.alpha_relu(-0.49)

    def test_tempered_needs_positive_eps(self):
        with pytest.raises(DomainError):
            Activation.tempered_alpha_relu(0.7, 0.0)
        assert Activation.tempered_alpha_relu(0.7).eps == DEFAULT_EPS == 1e-4

    def test_tanh_takes_no_parameters(self):
        with pytest.raises(DomainError):
            Activation("tanh", alpha=1.0)

    def test_unknown_kind(self):
        with pytest.raises(DomainError):
            Activation("gelu")

    @pytest.mark.parametrize("a", ALL, ids=lambda a: a.label())
    def test_dict_round_trip(self, a):
        assert Activation.from_dict(a.to_dict()) == a

    def test_from_dict_rejects_unknown_keys(self):
        with pytest.raises(DomainError):
            Activation.from_dict({"kind": "alpha_relu", "alpha": 0.7, "beta": 1})


class TestValues:
    def test_examples(self):
        assert activate(Activation.tanh(), 0.0) == 0.0
        assert activate(Activation.alpha_relu(0.5), 4.0) == 2.0
        assert activate(Activation.alpha_relu(0.7), -1.0) == 0.0
        assert activate_deriv(Activation.tanh(), 0.0) == 1.0
        assert activate_deriv(Activation.alpha_relu(1.0), 3.7) == 1.0
        assert activate_deriv(Activation.alpha_relu(0.5), 4.0) == 0.25

    def test_kink_derivative_is_zero(self):
        assert activate_deriv(Activation.alpha_relu(0.7), 0.0) == 0.0

    @pytest.mark.parametrize("x", [math.nan, math.inf, -math.inf])
    def test_non_finite_input(self, x):
        with pytest.raises(DomainError):
            activate(Activation.tanh(), x)
        with pytest.raises(DomainError):
            activate_deriv(Activation.alpha_relu(0.7), x)

    @pytest.mark.parametrize("a", ALL, ids=lambda a: a.label())
    def test_derivative_matches_finite_difference(self, a):
        h = 1e-6
        for x in np.linspace(-5, 5, 101):
            if abs(x) < 1e-3:
                continue
            fd = (activate(a, x + h) - activate(a, x - h)) / (2 * h)
            d = activate_deriv(a, x)
            assert abs(fd - d) <= 1e-6 * max(abs(d), 1e-3), (x, fd, d)

    def test_tanh_antisymmetric_exactly(self):
        a = Activation.tanh()
        for x in np.linspace(-30, 30, 241):
            assert activate(a, -x) == -activate(a, x)

    @pytest.mark.parametrize("alpha", [0.5, 0.7, 1.0])
    def test_tempered_close_to_plain(self, alpha):
        eps = 1e-4
        plain, temp = Activation.alpha_relu(alpha), Activation.tempered_alpha_relu(alpha, eps)
        for x in np.linspace(0, 10, 51):
            assert abs(activate(plain, x) - activate(temp, x)) <= 2 * eps ** alpha
        # the shift (x + eps)^alpha itself stays within 1e-3 of x^alpha away from 0
        for x in np.linspace(0.1, 10, 51):
            assert abs(activate(plain, x) - (activate(temp, x) + eps ** alpha)) <= 1e-3
        assert activate(temp, -0.3) == 0.0

    @pytest.mark.parametrize("a", ALL, ids=lambda a: a.label())
    def test_vectorized_matches_scalar(self, a):
        x = np.linspace(-4, 4, 33)
        np.testing.assert_allclose(a.apply(x), [activate(a, t) for t in x], rtol=1e-15, atol=0)
        np.testing.assert_allclose(a.deriv(x), [activate_deriv(a, t) for t in x], rtol=1e-14, atol=0)

    def test_sech2_no_overflow(self):
        d = Activation.tanh().deriv(np.array([-800.0, 800.0]))
        assert np.all(d == 0.0)
