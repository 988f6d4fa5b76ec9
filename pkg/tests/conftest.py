"""Shared fixtures: the certified recurrence data at the standard
parameters, reused across modules (disk-cached, so only the first-ever
session pays for the full certification)."""

from fractions import Fraction

import pytest

from freudcaps.freud import coeffs_from_enclosure
from freudcaps.ivlmath import PrecisionContext
from freudcaps.painleve import PainleveParams, certify

KAPPA = Fraction(4)
C_MINUS = Fraction(987, 1000)
C_PLUS = Fraction(1025, 1000)
N1 = 9_000_000


@pytest.fixture(scope="session")
def std_params():
    return PainleveParams(KAPPA, C_MINUS, C_PLUS, 2)


@pytest.fixture(scope="session")
def enclosure(std_params):
    return certify(std_params, N1)


@pytest.fixture(scope="session")
def ctx512():
    return PrecisionContext(512)


@pytest.fixture(scope="session")
def coeffs_300(enclosure, ctx512):
    """Coefficient table long enough for all structural window tests."""
    return coeffs_from_enclosure(enclosure, 300, ctx512)


@pytest.fixture(scope="session")
def coeffs_2400(enclosure, ctx512):
    """Coefficient table long enough for the split-index constants."""
    return coeffs_from_enclosure(enclosure, 2400, ctx512)
