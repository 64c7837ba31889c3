"""Gate layer and state-preparation recipes for XY-coupled qubits.

Rotations follow R_a(theta) = exp(-i theta sigma_a / 2).  Local filters are
non-unitary single-qubit operators; applying one succeeds with probability
``||f' s||^2`` where ``f'`` is the filter rescaled to unit operator norm, so
the reported probability is always a physical value in (0, 1].
"""
from dataclasses import dataclass, field

import numpy as np

from . import dynamics, states
from .numerics import PAULI, expm_unitary
from .qstate import PureState, StateError, apply_z_phases, local_phase_match

FILTER_ZERO_TOL = 1e-12
HADAMARD = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)


class FilteredToZero(StateError):
    pass


@dataclass(frozen=True)
class Rotation:
    axis: str
    angle: float
    target: int


@dataclass(frozen=True)
class ISwap:
    i: int
    j: int


@dataclass(frozen=True)
class XYEvolve:
    pairs: tuple
    gt: float


@dataclass(frozen=True, eq=False)
class Filter:
    matrix: np.ndarray
    target: int

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.shape != (2, 2) or abs(np.linalg.det(m)) < 1e-12 * max(1.0, np.abs(m).max() ** 2):
            raise StateError("a local filter must be an invertible 2x2 matrix")
        object.__setattr__(self, "matrix", m)


@dataclass(frozen=True)
class Excite:
    target: int


@dataclass
class RecipeResult:
    final: PureState
    success_probability: float
    log: list = field(default_factory=list)  # (label, state) snapshots
    info: dict = field(default_factory=dict)


def rotation_matrix(axis, angle):
    if axis not in ("x", "y", "z"):
        raise StateError(f"unknown rotation axis {axis!r}")
    return expm_unitary(PAULI[axis], angle / 2)


def apply_local(m, s, target):
    """Apply a 2x2 matrix to one qubit of a state or raw amplitude vector.

    The result is a plain vector and is not renormalized.
    """
    psi = np.asarray(s.amplitudes if isinstance(s, PureState) else s, dtype=np.complex128)
    n = int(psi.size).bit_length() - 1
    if not 0 <= target < n:
        raise StateError(f"target qubit {target} out of range for {n} qubits")
    psi = psi.reshape((2,) * n)
    psi = np.moveaxis(np.tensordot(m, psi, axes=([1], [target])), 0, target)
    return psi.reshape(-1)


def _check_pair(i, j, n):
    if i == j or not (0 <= i < n and 0 <= j < n):
        raise StateError(f"invalid qubit pair ({i}, {j}) for {n} qubits")


def apply(op, s):
    """Apply one gate; returns ``(state, probability)``."""
    if isinstance(op, Rotation):
        return PureState(apply_local(rotation_matrix(op.axis, op.angle), s, op.target)), 1.0
    if isinstance(op, Excite):
        return PureState(apply_local(PAULI["x"], s, op.target)), 1.0
    if isinstance(op, ISwap):
        _check_pair(op.i, op.j, s.n)
        return dynamics.evolve(dynamics.pairwise(s.n, op.i, op.j), s, np.pi / 2), 1.0
    if isinstance(op, XYEvolve):
        for i, j in op.pairs:
            _check_pair(i, j, s.n)
        return dynamics.evolve(dynamics.XYHamiltonian(s.n, tuple(op.pairs)), s, op.gt), 1.0
    if isinstance(op, Filter):
        out = apply_local(op.matrix, s, op.target)
        weight = np.vdot(out, out).real
        if weight < FILTER_ZERO_TOL:
            raise FilteredToZero("filtered to zero")
        top = np.linalg.norm(op.matrix, 2)
        return PureState(out / np.sqrt(weight)), float(weight / top**2)
    raise StateError(f"unknown gate {op!r}")


def label(op):
    if isinstance(op, Rotation):
        return f"R{op.axis}({op.angle:.6f}) q{op.target}"
    if isinstance(op, ISwap):
        return f"iSWAP q{op.i} q{op.j}"
    if isinstance(op, XYEvolve):
        return f"XY gt={op.gt:.6f} pairs={len(op.pairs)}"
    if isinstance(op, Filter):
        return f"filter q{op.target}"
    if isinstance(op, Excite):
        return f"excite q{op.target}"
    return repr(op)


def run(ops, s, log=None):
    prob = 1.0
    for op in ops:
        s, p = apply(op, s)
        prob *= p
        if log is not None:
            log.append((label(op), s))
    return s, prob


def g3_filters(sign=+1):
    """The local filter f_+ or f_- that maps G_3^{+/-} to GHZ_3 (times 1/3)."""
    a, b = 1 / np.sqrt(3) + 1j, 1 / np.sqrt(3) - 1j
    if sign in (+1, "+"):
        inner = 0.5 * (a * PAULI["i"] + b * PAULI["z"])
    else:
        inner = 0.5 * (a * PAULI["x"] + 1j * b * PAULI["y"])
    f = HADAMARD @ inner @ HADAMARD
    return tuple(Filter(f, q) for q in range(3))


def chi4_filter():
    a = 2**0.25
    return np.diag([a, 1 / a]).astype(np.complex128)


# --- recipes ---------------------------------------------------------------


def _ghz_ops(n):
    # |+>^n, an iSWAP chain, then x rotations on all but the last qubit
    ops = [Rotation("y", np.pi / 2, q) for q in range(n)]
    ops += [ISwap(q, q + 1) for q in range(n - 1)]
    ops += [Rotation("x", -np.pi / 2, q) for q in range(n - 1)]
    return ops


def _z_layer(phases):
    return [Rotation("z", float(g), q) for q, g in enumerate(phases) if abs(g) > 0]


def _all_pairs(n):
    return tuple((i, j) for i in range(n) for j in range(i + 1, n))


# z angles that remove the relative phases left by the evolution
W3_CORRECTIONS = (0.0, -2 * np.pi / 3, 0.0)
W3_SECOND_PEAK_CORRECTIONS = (0.0, 8 * np.pi / 3, 0.0)
W4_CORRECTIONS = (0.0, 0.0, 0.0, np.pi)
CHI4_CORRECTIONS = ((0.0, 0.0, 0.0, np.pi), (-5 * np.pi / 4,) * 4)  # two layers
SINGLET_GT = 0.6


def recipe_ghz(n):
    log = []
    s, p = run(_ghz_ops(n), PureState.basis("0" * n), log)
    return RecipeResult(s, p, log)


def recipe_w3(second_peak=False):
    log = []
    gt, corr = (4 * np.pi / 9, W3_SECOND_PEAK_CORRECTIONS) if second_peak else (2 * np.pi / 9, W3_CORRECTIONS)
    ops = [Excite(1), XYEvolve(_all_pairs(3), gt)] + _z_layer(corr)
    s, p = run(ops, PureState.basis("000"), log)
    return RecipeResult(s, p, log, {"gt": gt})


def recipe_w4():
    log = []
    ops = [Excite(3), XYEvolve(_all_pairs(4), np.pi / 4)] + _z_layer(W4_CORRECTIONS)
    s, p = run(ops, PureState.basis("0000"), log)
    return RecipeResult(s, p, log, {"gt": np.pi / 4})


def recipe_chi4():
    log = []
    ops = _ghz_ops(3)
    ops += [Filter(chi4_filter(), 0), Excite(3), XYEvolve(_all_pairs(4), np.pi / 4)]
    for layer in CHI4_CORRECTIONS:
        ops += _z_layer(layer)
    s, p = run(ops, PureState.basis("0000"), log)
    return RecipeResult(s, p, log, {"gt": np.pi / 4})


def recipe_g3_attempt():
    """Both excitation sets populated; the relative phases cannot all be fixed."""
    s0 = states.from_kets({"001": 1, "011": 1})
    gt = 2 * np.pi / 9
    s = dynamics.evolve(dynamics.complete_graph(3), s0, gt)
    target = states.g_state(3, +1)
    value, phases = local_phase_match(target, s)
    best = apply_z_phases(s, phases)
    phi1 = float(np.angle(np.vdot(states.w(3).amplitudes, best.amplitudes)))
    phi2 = float(np.angle(np.vdot(states.w_tilde(3).amplitudes, best.amplitudes)))
    info = {"gt": gt, "phi1": phi1, "phi2": phi2, "fidelity_g3": value, "phases": phases}
    return RecipeResult(s, 1.0, [("initial", s0), ("evolved", s)], info)


def recipe_singlet4():
    log = []
    ops = [XYEvolve(_all_pairs(4), SINGLET_GT)]
    s, p = run(ops, PureState.basis("0011"), log)
    return RecipeResult(s, p, log, {"gt": SINGLET_GT})


RECIPES = {
    "ghz3": lambda: recipe_ghz(3),
    "ghz4": lambda: recipe_ghz(4),
    "w3": recipe_w3,
    "w3_second_peak": lambda: recipe_w3(second_peak=True),
    "w4": recipe_w4,
    "chi4": recipe_chi4,
    "g3_attempt": recipe_g3_attempt,
    "singlet4": recipe_singlet4,
}

RECIPE_TARGETS = {
    "ghz3": "ghz3",
    "ghz4": "ghz4",
    "w3": "w3",
    "w3_second_peak": "w3",
    "w4": "w4",
    "chi4": "chi4",
    "g3_attempt": "g3p",
    "singlet4": "singlet4",
}


def recipe(name):
    try:
        return RECIPES[name]()
    except KeyError:
        raise StateError(f"unknown recipe {name!r}; known: {', '.join(RECIPES)}") from None
