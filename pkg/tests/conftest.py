import pytest

from gwtail.model import build_two_poly_family
from gwtail.phi import phi_table, phi_table_two_poly
from gwtail.qmatrix import q_matrix

BENCH_PS = (0.2, 0.4, 0.6)


@pytest.fixture(scope="session", params=BENCH_PS, ids=lambda p: f"p={p}")
def bench_p(request):
    return request.param


@pytest.fixture(scope="session")
def env02():
    return build_two_poly_family(0.2)


@pytest.fixture(scope="session")
def table02(env02):
    return phi_table(q_matrix(env02, 400), 12, 400)


@pytest.fixture(scope="session")
def big_tables():
    """Specialised tables large enough for amplitudes at M = 3000."""
    return {p: phi_table_two_poly(p, 12, 3000) for p in BENCH_PS}
