import numpy as np
import pytest

import mindiag

SWAP = np.array([[0.0, 1.0], [1.0, 0.0]])


def test_swap_matrix_is_already_minimal():
    r = mindiag.minimize(SWAP)
    assert r.verdict == "minimal"
    assert r.phi_star == pytest.approx(1.0, abs=1e-12)
    c = mindiag.certify(SWAP)
    assert c.verdict == "minimal"
    assert np.trace(c.u).real + np.trace(c.v).real == pytest.approx(1.0, abs=1e-9)


def test_diagonal_input_goes_to_zero():
    r = mindiag.minimize(np.diag([3.0, 1.0]))
    assert r.phi_star <= 1e-12
    assert r.method == "zero_offdiagonal"


def test_certify_reports_descent_direction():
    a = np.diag([1.0, -1.0])
    c = mindiag.certify(a + SWAP * 0.1, np.zeros(2))
    assert c.verdict in ("minimal", "not_minimal")
    c = mindiag.certify(np.diag([1.0, 0.0]) + 0.1 * SWAP)
    assert c.verdict == "not_minimal"
    w = np.asarray(c.descent_direction)
    base = mindiag.spectral_norm(np.diag([1.0, 0.0]) + 0.1 * SWAP)
    assert mindiag.spectral_norm(np.diag([1.0, 0.0]) + 0.1 * SWAP + np.diag(1e-3 * w)) < base


def test_generic_complex_matrix_against_grid():
    rng = np.random.default_rng(3)
    m = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    a = (m + m.conj().T) / 2
    r = mindiag.minimize(a, starts=2, seed=5)
    assert r.verdict == "minimal"
    x = np.asarray(r.x_star)
    for _ in range(200):
        d = rng.normal(scale=1e-2, size=3)
        assert mindiag.spectral_norm(a + np.diag(x + d)) >= r.phi_star - 1e-9
    again = mindiag.minimize(a, starts=2, seed=5)
    assert np.array_equal(np.asarray(again.x_star), x)


def test_rank_one_closed_form():
    h = np.array([2.0, 1.0]) / np.sqrt(5.0)
    s = mindiag.minimizing_diagonal(h)
    assert s.case == "big_coordinate"
    assert s.minimal_norm == pytest.approx(0.4, abs=1e-12)
    r = mindiag.minimize(np.outer(h, h))
    assert r.phi_star == pytest.approx(0.4, abs=1e-9)


def test_polygon_and_partner():
    lengths = np.array([0.3, 0.3, 0.2, 0.2])
    theta = np.asarray(mindiag.closed_polygon_angles(lengths))
    assert abs(np.sum(lengths * np.exp(1j * theta))) <= 1e-12
    h = np.sqrt(lengths).astype(complex)
    k = np.asarray(mindiag.orthogonal_partner(h))
    assert abs(np.vdot(h, k)) <= 1e-12
    assert np.allclose(np.abs(k), np.abs(h))


def test_sdpa_export_shape():
    text = mindiag.export_sdpa(SWAP, ["swap"])
    lines = text.splitlines()
    assert lines[0] == '" swap'
    assert lines[1].split()[0] == "3"
    assert lines[3].split() == ["4", "4"]


def test_bad_input_raises():
    with pytest.raises(ValueError):
        mindiag.minimize(np.array([[0.0, 1.0], [2.0, 0.0]]))
    with pytest.raises(ValueError):
        mindiag.minimizing_diagonal(np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        mindiag.minimize(SWAP, step_rule="nope")
    with pytest.raises(ValueError):
        mindiag.certify(np.zeros((2, 2)), np.zeros(3))
