import numpy as np
import pytest

from bpdg.errors import ConfigError
from bpdg.mesh import PhaseMesh, build_uniform, cell_volume, cell_volumes
from bpdg.quadrature import GAUSS, LOBATTO, quad_rule


def test_uniform_edges():
    m = build_uniform(1.0, 1.0, 2, 4, 2)
    assert np.allclose(m.x_edges, [0.0, 0.5, 1.0])
    assert np.allclose(m.dp, 0.25)
    assert np.allclose(m.mu_edges, [-1.0, 0.0, 1.0])


def test_bad_mesh_config():
    with pytest.raises(ConfigError):
        build_uniform(1.0, 1.0, 0, 4, 2)
    with pytest.raises(ConfigError):
        build_uniform(-1.0, 1.0, 2, 4, 2)
    with pytest.raises(ConfigError):
        PhaseMesh(np.array([0.0, 1.0]), np.array([0.1, 1.0]), np.array([-1.0, 1.0]))
    with pytest.raises(ConfigError):
        PhaseMesh(np.array([0.0, 0.5, 0.4, 1.0]), np.array([0.0, 1.0]), np.array([-1.0, 1.0]))


def test_cell_volume_values():
    m = build_uniform(1.0, 1.0, 1, 1, 1)
    assert cell_volume(m, 0, 0, 0) == pytest.approx(2.0 / 3.0, rel=1e-15)

    m2 = PhaseMesh(np.array([0.0, 1.0]), np.array([0.0, 1.0, 2.0]), np.array([-1.0, 1.0]))
    assert cell_volume(m2, 0, 1, 0) == pytest.approx(14.0 / 3.0, rel=1e-15)

    m3 = build_uniform(0.5, 1.0, 1, 1, 1)  # dx halved
    assert cell_volume(m3, 0, 0, 0) == pytest.approx(1.0 / 3.0, rel=1e-15)
    with pytest.raises(IndexError):
        cell_volume(m, 1, 0, 0)


def test_volume_telescoping_and_total():
    m = build_uniform(2.0, 1.7, 5, 9, 4)
    pe = m.p_edges
    assert np.sum(pe[1:] ** 3 - pe[:-1] ** 3) / 3.0 == pytest.approx(m.p_max ** 3 / 3.0, rel=1e-15)
    total = cell_volumes(m).sum()
    assert total == pytest.approx(m.length * 2.0 * m.p_max ** 3 / 3.0, rel=1e-12)


def test_quad_rule_tables():
    lob2 = quad_rule(LOBATTO, 2)
    assert np.allclose(lob2.nodes, [0.0, 1.0])
    assert np.allclose(lob2.weights, [0.5, 0.5])

    lob3 = quad_rule(LOBATTO, 3)
    assert np.allclose(lob3.nodes, [0.0, 0.5, 1.0])
    assert np.allclose(lob3.weights, [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0])

    g2 = quad_rule(GAUSS, 2)
    assert np.allclose(g2.nodes, [(1.0 - 1.0 / np.sqrt(3.0)) / 2.0,
                                  (1.0 + 1.0 / np.sqrt(3.0)) / 2.0])
    assert np.allclose(g2.weights, [0.5, 0.5])


@pytest.mark.parametrize("kind,order", [(GAUSS, n) for n in range(1, 6)]
                         + [(LOBATTO, n) for n in range(2, 6)])
def test_quad_rule_invariants(kind, order):
    rule = quad_rule(kind, order)
    assert np.all(rule.weights > 0.0)
    assert abs(rule.weights.sum() - 1.0) <= 1e-14
    if kind == LOBATTO:
        assert rule.nodes[0] == 0.0 and rule.nodes[-1] == 1.0
    for d in range(rule.exactness_degree + 1):
        approx = np.dot(rule.weights, rule.nodes ** d)
        assert abs(approx - 1.0 / (d + 1)) <= 1e-13, (kind, order, d)


def test_quad_rule_errors():
    with pytest.raises(ConfigError):
        quad_rule(GAUSS, 6)
    with pytest.raises(ConfigError):
        quad_rule(LOBATTO, 1)
    with pytest.raises(ConfigError):
        quad_rule("radau", 3)
