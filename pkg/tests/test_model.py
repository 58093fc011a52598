import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from g2kit.errors import DomainError
from g2kit.model import MomentState, SystemParams, transfer_coeffs, transfer_matrix, validate_params

from conftest import stable_params

# 30-digit evaluation of the a± exponentials for (mu=1, beta=0.2, tau=1)
A_PLUS_1 = 0.618701762236563690385836936358
A_MINUS_1 = 0.122116458445154175681036842960


def test_validate_accepts_standard():
    p = SystemParams(1.0, 0.2, 0.1, 0.5)
    assert validate_params(p) is p


def test_validate_rejects_unstable():
    with pytest.raises(DomainError, match="unstable") as info:
        validate_params(SystemParams(1.0, 0.6, 0.0, 0.5))
    assert "lambda_minus" in str(info.value)


def test_validate_rejects_noise():
    with pytest.raises(DomainError, match="noise"):
        validate_params(SystemParams(1.0, 0.2, 0.5, 0.1))


def test_validate_rejects_negative_c():
    with pytest.raises(DomainError, match="noise"):
        validate_params(SystemParams(1.0, 0.2, 0.0, -0.1))


def test_transfer_identity_at_zero(standard):
    tc = transfer_coeffs(standard, 0.0)
    assert tc.a_plus == 1.0 and tc.a_minus == 0.0


def test_transfer_beta_zero():
    tc = transfer_coeffs(SystemParams(1.0, 0.0, 0.0, 0.5), 2.0)
    assert tc.a_plus == pytest.approx(math.exp(-1.0), abs=1e-15)
    assert tc.a_minus == pytest.approx(0.0, abs=1e-15)


def test_transfer_frozen_values(standard):
    tc = transfer_coeffs(standard, 1.0)
    assert tc.a_plus == pytest.approx(A_PLUS_1, abs=1e-14)
    assert tc.a_minus == pytest.approx(A_MINUS_1, abs=1e-14)
    assert tc.lambda_minus == pytest.approx(0.6) and tc.lambda_plus == pytest.approx(1.4)


def test_transfer_negative_tau(standard):
    with pytest.raises(DomainError):
        transfer_coeffs(standard, -0.1)


@settings(max_examples=200, deadline=None)
@given(stable_params(), st.floats(0.0, 50.0))
def test_transfer_product_identity(p, tau):
    tc = transfer_coeffs(p, tau)
    assert tc.a_plus**2 - tc.a_minus**2 == pytest.approx(math.exp(-p.mu * tau), abs=1e-12)
    assert 0.0 <= tc.a_minus <= tc.a_plus <= 1.0


@settings(max_examples=100, deadline=None)
@given(stable_params(), st.floats(0.0, 10.0), st.floats(0.0, 10.0))
def test_transfer_semigroup(p, t1, t2):
    lhs = transfer_matrix(p, t1 + t2)
    rhs = transfer_matrix(p, t2) @ transfer_matrix(p, t1)
    np.testing.assert_allclose(lhs, rhs, atol=1e-13)


def test_transfer_decays(standard):
    tc = transfer_coeffs(standard, 200.0)
    assert abs(tc.a_plus) < 1e-20 and abs(tc.a_minus) < 1e-20


def test_params_json_round_trip():
    p = SystemParams(1.5, 0.3, 0.1 - 0.05j, 0.7)
    d = json.loads(p.to_json())
    assert set(d) == {"mu", "beta", "B_re", "B_im", "C"}
    assert SystemParams.from_json(p.to_json()) == p


def test_moment_state_checks():
    MomentState.coherent(1 + 2j).check()
    MomentState.thermal(0.5).check()
    with pytest.raises(DomainError):
        MomentState(1.0, 1.0, 0.5).check()  # n < |mean|²
    with pytest.raises(DomainError):
        MomentState(0.0, 0.9, 0.5).check()  # |m2| > n
