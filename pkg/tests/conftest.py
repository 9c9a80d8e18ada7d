import pytest

from filippov2d.poly import Poly2, PolyField
from filippov2d.scenarios import load_scenario
from filippov2d.system import LinearSpec, from_linear

# coefficients of the center-center example (switching on x = 0)
CC_A_PLUS = ((-0.5, -1.0), (1.0, 0.5))
CC_B_PLUS = (-1.0, 2.0)
CC_A_MINUS = ((1.0, 1.0), (-2.0, -1.0))
CC_B_MINUS = (1.0, -2.0)

ACCEPTANCE = {}


def cc_spec(normal=-1, K=(-5.0, 2.0, -3.0, 3.0)):
    return LinearSpec(CC_A_PLUS, CC_B_PLUS, CC_A_MINUS, CC_B_MINUS, K, normal)


@pytest.fixture(scope="session")
def cc():
    return load_scenario("linear-center-center").system


@pytest.fixture(scope="session")
def cc_literal():
    """Same fields with X on x >= 0."""
    return from_linear(cc_spec(1, (-5.0, 3.0, -5.0, 5.0)))


@pytest.fixture(scope="session")
def tz():
    return load_scenario("three-zone").system


@pytest.fixture(scope="session")
def relay():
    return load_scenario("relay-template").system


@pytest.fixture(scope="session")
def folds():
    return load_scenario("fold-fold-connection").system


@pytest.fixture(scope="session")
def cc_lambda(cc):
    from filippov2d.chaos import construct_lambda
    return construct_lambda(cc, -1.0)


def affine(A, b):
    return PolyField.affine(A, b)


def xy():
    return Poly2.x(), Poly2.y()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
