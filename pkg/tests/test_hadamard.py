"""Transform and table/coefficient conversion tests."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lutnn.hadamard import MAX_ARITY, LutTable, WalshCoeffs, fwht, lut_to_theta, theta_to_lut
from lutnn.oracle import dense_transform


@pytest.mark.parametrize("n", range(1, 9))
def test_fwht_matches_dense_transform(n, rng):
    v = rng.normal(size=1 << n)
    np.testing.assert_allclose(fwht(v), dense_transform(n) @ v, rtol=0, atol=1e-9)


def test_fwht_involution_up_to_length(rng):
    for n in range(1, 7):
        v = rng.normal(size=1 << n)
        np.testing.assert_allclose(fwht(fwht(v)), (1 << n) * v, rtol=0, atol=1e-9)


def test_fwht_batched_axes(rng):
    v = rng.normal(size=(3, 5, 8))
    batched = fwht(v)
    for i in range(3):
        for j in range(5):
            np.testing.assert_array_equal(batched[i, j], fwht(v[i, j]))


def test_fwht_rejects_non_power_of_two():
    with pytest.raises(ValueError, match="power of two"):
        fwht(np.zeros(6))
    with pytest.raises(ValueError, match="power of two"):
        fwht(np.zeros((2, 0)))


def test_fwht_does_not_mutate_input():
    v = np.ones(4)
    fwht(v)
    np.testing.assert_array_equal(v, np.ones(4))


# analysis of the three canonical tables, exact dyadic coefficients
@pytest.mark.parametrize(
    "bits, theta",
    [
        ((0, 1, 1, 0), (0.0, 0.0, 0.0, -1.0)),  # xor
        ((0, 0, 0, 1), (-0.5, -0.5, -0.5, 0.5)),  # and
        ((0, 0, 0, 0), (-1.0, 0.0, 0.0, 0.0)),  # const 0
    ],
)
def test_lut_to_theta_known_values(bits, theta):
    got = lut_to_theta(LutTable(2, bits))
    assert got.values == theta


def test_theta_to_lut_zero_ties_decode_to_zero():
    # all-zero coefficients synthesize exact zeros at every corner
    assert theta_to_lut(WalshCoeffs(2, (0.0,) * 4)).bits == (0, 0, 0, 0)


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=1, max_value=6), st.data())
def test_roundtrip_is_identity(n, data):
    value = data.draw(st.integers(min_value=0, max_value=(1 << (1 << n)) - 1))
    table = LutTable.from_int(n, value)
    assert theta_to_lut(lut_to_theta(table)) == table


@settings(max_examples=100, deadline=None)
@given(
    st.integers(min_value=1, max_value=5),
    st.floats(min_value=0.01, max_value=100.0),
    st.data(),
)
def test_positive_scaling_preserves_decoded_table(n, scale, data):
    value = data.draw(st.integers(min_value=0, max_value=(1 << (1 << n)) - 1))
    theta = lut_to_theta(LutTable.from_int(n, value))
    scaled = WalshCoeffs(n, tuple(scale * v for v in theta.values))
    assert theta_to_lut(scaled) == theta_to_lut(theta)


def test_from_int_to_int_roundtrip():
    for value in range(256):
        assert LutTable.from_int(3, value).to_int() == value


def test_lut_table_validation():
    with pytest.raises(ValueError, match="arity"):
        LutTable(0, ())
    with pytest.raises(ValueError, match="arity"):
        LutTable(MAX_ARITY + 1, (0,) * (1 << (MAX_ARITY + 1)))
    with pytest.raises(ValueError, match="output bits"):
        LutTable(2, (0, 1))
    with pytest.raises(ValueError, match="0 or 1"):
        LutTable(1, (0, 2))
    with pytest.raises(ValueError, match="out of range"):
        LutTable.from_int(1, 16)


def test_walsh_coeffs_validation():
    with pytest.raises(ValueError, match="coefficients"):
        WalshCoeffs(2, (0.0, 0.0))
    with pytest.raises(ValueError, match="finite"):
        WalshCoeffs(1, (np.nan, 0.0))
