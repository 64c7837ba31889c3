import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from xygme import circuits, states
from xygme.circuits import Excite, Filter, ISwap, Rotation, XYEvolve
from xygme.qstate import PureState, StateError, fidelity, local_phase_match

from conftest import random_state

seeds = st.integers(0, 2**31 - 1)


def raw_filtered(filters, s):
    v = s.amplitudes
    for f in filters:
        v = circuits.apply_local(f.matrix, v, f.target)
    return v


def test_iswap_example():
    out, p = circuits.apply(ISwap(0, 1), PureState.basis("01"))
    assert np.allclose(out.amplitudes, [0, 0, -1j, 0], atol=1e-12) and p == 1.0


def test_rotation_convention():
    out, _ = circuits.apply(Rotation("z", 0.8, 0), PureState.basis("0"))
    assert np.allclose(out.amplitudes, [np.exp(-0.4j), 0])
    out, _ = circuits.apply(Rotation("x", np.pi, 0), PureState.basis("0"))
    assert np.allclose(out.amplitudes, [0, -1j])
    with pytest.raises(StateError):
        circuits.rotation_matrix("w", 1.0)


def test_excite_and_targets():
    out, _ = circuits.apply(Excite(2), PureState.basis("000"))
    assert out.amplitudes[1] == 1
    with pytest.raises(StateError):
        circuits.apply(Excite(3), PureState.basis("000"))
    with pytest.raises(StateError):
        circuits.apply(ISwap(0, 0), PureState.basis("00"))
    with pytest.raises(StateError):
        Filter(np.zeros((2, 2)), 0)


def test_filter_to_zero():
    proj = Filter(np.diag([1.0, 1e-7]), 0)
    with pytest.raises(circuits.FilteredToZero, match="filtered to zero"):
        circuits.apply(proj, PureState.basis("1"))


def test_chi4_filter_on_ghz():
    f = Filter(circuits.chi4_filter(), 0)
    out, p = circuits.apply(f, states.ghz(3))
    assert np.allclose(out.amplitudes, states.psi_abc().amplitudes, atol=1e-10)
    raw = raw_filtered([f], states.ghz(3))
    # probability is the filtered weight relative to the filter's largest singular value
    assert abs(p - np.vdot(raw, raw).real / np.sqrt(2)) < 1e-12
    assert 0 < p <= 1


@pytest.mark.parametrize("sign", [+1, -1])
def test_g3_filter_laws(sign):
    filters = circuits.g3_filters(sign)
    raw = raw_filtered(filters, states.g_state(3, sign))
    ghz = states.ghz(3).amplitudes
    # f_- as written carries an overall sign
    phase = raw[0] / abs(raw[0])
    assert np.allclose(raw / phase, ghz / 3, atol=1e-10)
    if sign == +1:
        assert np.allclose(raw, ghz / 3, atol=1e-10)
    out, p = circuits.run(filters, states.g_state(3, sign))
    assert abs(p - 1 / 9) < 1e-10
    assert abs(fidelity(out, states.ghz(3)) - 1) < 1e-10
    assert all(abs(np.linalg.norm(f.matrix, 2) - 1) < 1e-12 for f in filters)


def test_filter_nonsingular_on_zero():
    f = circuits.g3_filters(+1)[0]
    assert np.linalg.norm(circuits.apply_local(f.matrix, PureState.basis("0"), 0)) > 0.1


@given(seeds, st.sampled_from("xyz"), st.floats(-7, 7), st.integers(0, 3))
def test_unitary_ops_preserve_norm(seed, axis, angle, q):
    s = PureState(random_state(np.random.default_rng(seed), 4))
    for op in (Rotation(axis, angle, q), ISwap(q, (q + 1) % 4), Excite(q), XYEvolve(((0, q), (1, 2)) if q else ((1, 2),), angle)):
        out, p = circuits.apply(op, s)
        assert p == 1.0
        assert abs(np.linalg.norm(out.amplitudes) - 1) < 1e-10


@given(seeds, st.lists(st.tuples(st.floats(0.2, 3), st.floats(-1, 1), st.integers(0, 2)), min_size=1, max_size=4))
def test_probability_is_product(seed, specs):
    s = PureState(random_state(np.random.default_rng(seed), 3))
    ops = [Filter(np.array([[a, b], [0, 1]]), q) for a, b, q in specs]
    expect = 1.0
    cur = s
    for op in ops:
        cur, p = circuits.apply(op, cur)
        expect *= p
    _, total = circuits.run(ops, s)
    assert abs(total - expect) < 1e-12


@pytest.mark.parametrize("name", ["ghz3", "ghz4", "w3", "w3_second_peak", "w4", "chi4"])
def test_recipes_hit_targets(name):
    res = circuits.recipe(name)
    target = states.named(circuits.RECIPE_TARGETS[name])
    assert local_phase_match(target, res.final)[0] >= 1 - 1e-9


@pytest.mark.parametrize("name", ["w3", "w4", "chi4", "ghz3", "ghz4"])
def test_recipes_exact_fidelity(name):
    res = circuits.recipe(name)
    assert fidelity(states.named(circuits.RECIPE_TARGETS[name]), res.final) >= 1 - 1e-9


def test_unfiltered_recipes_probability_one():
    for name in ("ghz3", "w3", "w4", "singlet4", "g3_attempt"):
        assert circuits.recipe(name).success_probability == 1.0


def test_chi4_intermediate_and_probability():
    res = circuits.recipe("chi4")
    labels = [lab for lab, _ in res.log]
    after_excite = res.log[labels.index("excite q3")][1]
    expect = np.kron(states.psi_abc().amplitudes, [0, 1])
    assert np.allclose(after_excite.amplitudes, expect, atol=1e-9)
    assert abs(after_excite.amplitudes[0b0001] - np.sqrt(2 / 3)) < 1e-9
    assert abs(after_excite.amplitudes[0b1111] - np.sqrt(1 / 3)) < 1e-9
    _, p = circuits.apply(Filter(circuits.chi4_filter(), 0), states.ghz(3))
    assert abs(res.success_probability - p) < 1e-12


def test_w3_second_peak_uses_stated_correction():
    res = circuits.recipe("w3_second_peak")
    assert res.info["gt"] == pytest.approx(4 * np.pi / 9)
    assert any(lab.startswith(f"Rz({8 * np.pi / 3:.6f})") for lab, _ in res.log)


def test_g3_attempt_obstruction():
    res = circuits.recipe("g3_attempt")
    assert res.info["fidelity_g3"] < 1 - 1e-3
    # brute force over per-qubit z phases on a grid
    s = res.final.amplitudes
    bits = np.array([[i >> 2 & 1, i >> 1 & 1, i & 1] for i in range(8)])
    grid = np.linspace(0, 2 * np.pi, 72, endpoint=False)
    a, b, c = np.meshgrid(grid, grid, grid, indexing="ij")
    ph = np.stack([a.ravel(), b.ravel(), c.ravel()], axis=1) @ bits.T
    w = states.g_state(3, +1).amplitudes.conj() * s
    best = float((np.abs(np.exp(1j * ph) @ w) ** 2).max())
    assert abs(res.info["fidelity_g3"] - best) < 1e-2
    assert res.info["fidelity_g3"] <= best + 1e-6
    assert np.isfinite(res.info["phi1"]) and np.isfinite(res.info["phi2"])


def test_singlet4_recipe_phase_matched():
    res = circuits.recipe("singlet4")
    value, _ = local_phase_match(states.singlet4(), res.final)
    assert 0.85 < value < 1


def test_unknown_recipe():
    with pytest.raises(StateError):
        circuits.recipe("bogus")
