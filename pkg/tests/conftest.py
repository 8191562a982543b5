from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from upgrade_assignment import Customer, Instance, Supplier

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# Small denominators and a narrow range keep ties frequent.
rationals = st.builds(Fraction, st.integers(0, 12), st.sampled_from([1, 1, 2, 3]))


@st.composite
def supplier_costs(draw):
    c = draw(rationals)
    b = draw(st.one_of(st.just(c), st.builds(lambda f: c * f, st.sampled_from(
        [Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)]))))
    return b, c


@st.composite
def instances(draw, max_suppliers=6, min_suppliers=1):
    n = draw(st.integers(min_suppliers, max_suppliers))
    m = draw(st.integers(1, n))
    costs = draw(st.lists(supplier_costs(), min_size=n, max_size=n))
    demands = draw(st.lists(st.one_of(rationals, st.just(Fraction(0))), min_size=m, max_size=m))
    k = draw(st.integers(0, n))
    return Instance(
        tuple(Supplier(f"s{i}", c, b) for i, (b, c) in enumerate(costs, 1)),
        tuple(Customer(f"c{j}", d) for j, d in enumerate(demands, 1)),
        k,
    )


_acceptance_lines: list[str] = []


@pytest.fixture
def acceptance_log():
    return _acceptance_lines


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
