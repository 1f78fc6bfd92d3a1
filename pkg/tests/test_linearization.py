import numpy as np
import pytest

from holokit.domains import Polydisc, unit_disc
from holokit.errors import NotAGroupError, NotARetractionError, PreconditionError
from holokit.expr import parse_map
from holokit.linearization import (
    cartan_chart,
    cartan_uniqueness_residual,
    circled_linear_part,
    finite_group_average_chart,
    iterate_average_chart,
)

SWAP = parse_map("z1, z0", 2)
IDENT = parse_map("z0, z1", 2)


def test_cartan_chart_on_graph_retraction():
    rho = parse_map("z0, z0^2", 2)
    chart = cartan_chart(rho, [0, 0], probe_radius=0.1)
    assert np.allclose(chart.P, [[1, 0], [0, 0]])
    assert chart.conjugacy_defect < 1e-8
    assert np.allclose(chart.jacobian_at_base, np.eye(2))
    w = chart.forward([0.05, 0.02])
    assert np.allclose(chart.inverse(w), [0.05, 0.02], atol=1e-10)
    assert chart.verified_radius > 0


def test_cartan_chart_off_origin():
    # retraction onto the fixed point set {y = x^2} through (0.2, 0.04)
    rho = parse_map("z0, z0^2", 2)
    chart = cartan_chart(rho, [0.2, 0.04], probe_radius=0.05)
    assert chart.conjugacy_defect < 1e-8


def test_cartan_chart_refuses_non_retraction():
    with pytest.raises(NotARetractionError):
        cartan_chart(parse_map("0.5*z0, 0.5*z1", 2), [0, 0])
    with pytest.raises(PreconditionError):
        cartan_chart(parse_map("z0, z0^2", 2), [0.1, 0.5])


def test_group_average():
    chart = finite_group_average_chart([IDENT, SWAP], [0, 0])
    assert chart.conjugacy_defect < 1e-12
    assert np.allclose(chart.jacobian_at_base, np.eye(2))
    with pytest.raises(NotAGroupError):
        finite_group_average_chart([SWAP], [0, 0])


def test_group_average_nonlinear():
    # conjugate the swap by z -> z + (0, 0.3 z0^2) and average back
    phi = parse_map("z0, z1 + 0.3*z0^2", 2)
    phi_inv = parse_map("z0, z1 - 0.3*z0^2", 2)
    g = phi_inv.compose(SWAP.compose(phi))
    chart = finite_group_average_chart([IDENT, g], [0, 0])
    assert chart.conjugacy_defect < 1e-10
    assert np.allclose(chart.jacobian_at_base, np.eye(2))


def test_iterate_average_involution_is_exact():
    assert iterate_average_chart(SWAP, [0, 0], 8).conjugacy_defect < 1e-14


def test_circled_linear_part():
    res = circled_linear_part(SWAP, Polydisc((1, 1)))
    assert np.allclose(res.matrix, [[0, 1], [1, 0]], atol=1e-14)
    f = parse_map("0.5*z0 + 0.2*z0^2 - 0.1*z0^5", 1)
    lin = circled_linear_part(f, unit_disc(), nodes=8)
    assert lin.matrix[0, 0] == pytest.approx(0.5, abs=1e-14)
    with pytest.raises(PreconditionError):
        circled_linear_part(parse_map("z0 + 0.1", 1))


def test_uniqueness_residual():
    ok = cartan_uniqueness_residual(parse_map("z", 1), unit_disc(), [0])
    assert ok.residual == 0 and ok.self_map_ok
    bad = cartan_uniqueness_residual(parse_map("z+0.1*z^2", 1), unit_disc(), [0])
    assert bad.residual > 0.05 and not bad.self_map_ok
