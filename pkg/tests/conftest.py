import numpy as np
import pytest
from hypothesis import settings, strategies as st

from hupstab.polygauss import PolyGaussFn

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

# rounding keeps amplitudes away from the underflow range
coeff = st.floats(-1.0, 1.0, allow_nan=False, allow_infinity=False).map(lambda c: round(c, 6))
rate = st.floats(0.3, 3.0, allow_nan=False, allow_infinity=False)


@st.composite
def polygauss(draw, max_terms=3, max_coeffs=4):
    """Random exact-class profiles in the same range as the verification corpus."""
    n = draw(st.integers(1, max_terms))
    terms = []
    for _ in range(n):
        cs = draw(st.lists(coeff, min_size=1, max_size=max_coeffs))
        terms.append((cs, draw(rate)))
    f = PolyGaussFn.from_terms(terms)
    if f.is_zero or max(abs(c) for t in f.terms for c in t.coeffs) < 1e-3:
        f = PolyGaussFn.gaussian(1.0, 1.0)
    return f


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
