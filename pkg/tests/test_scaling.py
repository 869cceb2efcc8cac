import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from tsquant import AffineScaler, ConfigurationError, InputDataError

EPS = np.finfo(np.float64).eps


def test_mean_scaling_example():
    s = AffineScaler("mean").fit([1.0, 2.0, 3.0])
    assert s.a_ == 0.5
    assert s.b_ == 0.0
    assert not s.degenerate_


def test_minmax_scaling_example():
    s = AffineScaler("minmax").fit([0.0, 10.0])
    assert s.a_ == 0.1
    assert s.b_ == 0.0
    scaled = s.transform([0.0, 10.0, 5.0])
    assert scaled[0] == 0.0
    assert scaled[1] == 1.0


def test_normal_scaling_uses_population_std():
    x = np.array([1.0, 2.0, 3.0, 4.0])
    s = AffineScaler("normal").fit(x)
    sigma = np.sqrt(np.mean((x - x.mean()) ** 2))  # divide by C, not C-1
    assert s.a_ == pytest.approx(1.0 / sigma, rel=1e-15)
    scaled = s.transform(x)
    assert abs(scaled.mean()) < 1e-12
    assert abs(np.sqrt(np.mean(scaled**2)) - 1.0) < 1e-12


def test_degenerate_contexts():
    s = AffineScaler("mean").fit([0.0, 0.0, 0.0])
    assert s.degenerate_ and s.a_ == 1.0 and s.b_ == 0.0
    s = AffineScaler("minmax").fit([5.0, 5.0])
    assert s.degenerate_ and s.a_ == 1.0 and s.b_ == -5.0
    s = AffineScaler("normal").fit([-2.0, -2.0, -2.0])
    assert s.degenerate_ and s.a_ == 1.0 and s.b_ == 2.0
    # degenerate transform still round-trips
    x = np.array([-2.0, 0.0, 7.0])
    assert np.allclose(s.inverse_transform(s.transform(x)), x)


def test_rejects_bad_inputs():
    with pytest.raises(ConfigurationError):
        AffineScaler("median").fit([1.0, 2.0])
    with pytest.raises(ConfigurationError):
        AffineScaler("mean").fit([1.0])
    with pytest.raises(InputDataError):
        AffineScaler("mean").fit([1.0, np.inf])
    with pytest.raises(NotFittedError):
        AffineScaler("mean").transform([1.0])


def test_estimator_api():
    s = AffineScaler(scheme="minmax")
    assert s.get_params() == {"scheme": "minmax"}
    s2 = clone(s).set_params(scheme="normal")
    assert s2.get_params()["scheme"] == "normal"
    out = AffineScaler("mean").fit_transform([2.0, 2.0, 8.0])
    assert np.mean(np.abs(out)) == pytest.approx(1.0, abs=1e-15)


def test_serialization_round_trip():
    s = AffineScaler("normal").fit([0.3, -1.2, 4.5, 0.0])
    d = s.to_dict()
    assert set(d) == {"scheme", "a", "b", "degenerate"}
    s2 = AffineScaler.from_dict(d)
    x = np.linspace(-3, 3, 7)
    assert np.array_equal(s.transform(x), s2.transform(x))
    with pytest.raises(ConfigurationError):
        AffineScaler.from_dict({"scheme": "mean", "a": -1.0, "b": 0.0})
    with pytest.raises(ConfigurationError):
        AffineScaler.from_dict({"scheme": "mean", "a": np.nan, "b": 0.0})


@st.composite
def contexts(draw):
    length = draw(st.integers(min_value=2, max_value=40))
    center = draw(st.floats(min_value=-100.0, max_value=100.0))
    spread = draw(st.floats(min_value=1e-3, max_value=1.0))
    offsets = draw(st.lists(st.floats(min_value=-4.0, max_value=4.0),
                            min_size=length, max_size=length))
    return np.asarray([center + spread * o for o in offsets])


@settings(max_examples=200, deadline=None)
@given(contexts(), st.sampled_from(["mean", "minmax", "normal"]))
def test_round_trip_identity_property(context, scheme):
    s = AffineScaler(scheme).fit(context)
    assert s.a_ > 0
    back = s.inverse_transform(s.transform(context))
    bound = 8 * EPS * np.maximum(1.0, np.abs(context))
    assert np.all(np.abs(back - context) <= bound)


@settings(max_examples=200, deadline=None)
@given(contexts())
def test_scheme_contracts_property(context):
    ns = AffineScaler("normal").fit(context)
    scaled = ns.transform(context)
    if np.ptp(context) > 0:
        # a * x + b cancels two huge terms when sigma << |mu|, so the
        # achievable accuracy carries that condition number.
        kappa = max(1.0, ns.a_ * (np.max(np.abs(context)) + abs(np.mean(context))))
        assert abs(scaled.mean()) < 32 * EPS * kappa
        assert abs(np.sqrt(np.mean((scaled - scaled.mean()) ** 2)) - 1.0) \
            < 32 * EPS * kappa

        mm_scaler = AffineScaler("minmax").fit(context)
        mm = mm_scaler.transform(context)
        # Endpoint attainment degrades with |a * x|, the magnitude the
        # products are rounded at.
        tol = 4 * EPS * max(1.0, mm_scaler.a_ * np.max(np.abs(context)))
        assert mm.min() == 0.0
        assert abs(mm.max() - 1.0) <= tol
        assert np.all(mm >= 0.0) and np.all(mm <= 1.0 + tol)

    if np.mean(np.abs(context)) > 0:
        mean_scaled = AffineScaler("mean").fit(context).transform(context)
        assert abs(np.mean(np.abs(mean_scaled)) - 1.0) < 1e-9


@settings(max_examples=100, deadline=None)
@given(contexts())
def test_transform_is_monotone(context):
    # a > 0 makes the map strictly increasing mathematically; in floats
    # inputs closer than the scaled resolution may collapse, so the
    # observable guarantee is weak monotonicity.
    s = AffineScaler("normal").fit(context)
    assert s.a_ > 0
    xs = np.sort(np.unique(context))
    if xs.size >= 2:
        assert np.all(np.diff(s.transform(xs)) >= 0)
