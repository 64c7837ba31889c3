"""Single-qubit von Neumann measurements and 3-qubit class labels.

A measurement direction is V = t I + i (y1 X + y2 Y + y3 Z) with
t^2 + |y|^2 = 1; outcome k projects the measured qubit onto V|k>.
"""
import functools
from dataclasses import dataclass

import numpy as np
import scipy.optimize

from . import states
from .numerics import PAULI
from .qstate import DensityMatrix, PureState, StateError, bit_table, partial_trace

PARAM_TOL = 1e-9
IMPOSSIBLE_TOL = 1e-12
TANGLE_TOL = 1e-8
PURITY_TOL = 1e-9
SPAN_TOL = 1e-6
MIN_PROBABILITY = 1e-6

PRODUCT, BISEPARABLE, W_CLASS, GHZ_CLASS = "product", "biseparable", "W-class", "GHZ-class"
FAMILIES = ("ghz", "w_wt", "w_ghzt")


class OutcomeImpossible(StateError):
    pass


@dataclass(frozen=True)
class ProjectiveMeasurement:
    qubit: int
    v_params: tuple = (1.0, 0.0, 0.0, 0.0)
    outcome: int = 0

    def __post_init__(self):
        p = tuple(float(x) for x in self.v_params)
        if len(p) != 4 or abs(sum(x * x for x in p) - 1) > PARAM_TOL:
            raise StateError(f"v_params must be a unit 4-vector, got {p}")
        if self.outcome not in (0, 1):
            raise StateError(f"outcome must be 0 or 1, got {self.outcome}")
        object.__setattr__(self, "v_params", p)

    @property
    def V(self):
        t, y1, y2, y3 = self.v_params
        return t * PAULI["i"] + 1j * (y1 * PAULI["x"] + y2 * PAULI["y"] + y3 * PAULI["z"])

    @property
    def vector(self):
        return self.V[:, self.outcome]

    @property
    def projector(self):
        v = self.vector
        return np.outer(v, v.conj())


@dataclass
class MappingResult:
    input_name: str
    measurement: ProjectiveMeasurement
    output: PureState
    probability: float
    coefficients: dict
    class_label: str


def project(s, m):
    """Measure one qubit of a pure state; returns ``(state, probability)``."""
    n = s.n
    if n < 2:
        raise StateError("projection needs at least two qubits")
    if not 0 <= m.qubit < n:
        raise StateError(f"qubit {m.qubit} out of range for {n} qubits")
    psi = np.moveaxis(s.amplitudes.reshape((2,) * n), m.qubit, 0).reshape(2, -1)
    out = m.vector.conj() @ psi
    prob = float(np.vdot(out, out).real)
    if prob < IMPOSSIBLE_TOL:
        raise OutcomeImpossible("outcome impossible")
    return PureState(out / np.sqrt(prob)), prob


def project_density(rho, m):
    """Mixed-state form: Tr_q[M rho M] / N with M the rank-1 projector."""
    rho = rho if isinstance(rho, DensityMatrix) else DensityMatrix(rho)
    n = rho.n
    if not 0 <= m.qubit < n:
        raise StateError(f"qubit {m.qubit} out of range for {n} qubits")
    ops = [PAULI["i"]] * n
    ops[m.qubit] = m.projector
    big = ops[0]
    for o in ops[1:]:
        big = np.kron(big, o)
    post = big @ rho.matrix @ big
    prob = float(np.trace(post).real)
    if prob < IMPOSSIBLE_TOL:
        raise OutcomeImpossible("outcome impossible")
    keep = ((1 << n) - 1) & ~(1 << m.qubit)
    return partial_trace(post / prob, keep), prob


def three_tangle(s):
    """4 |Cayley hyperdeterminant| of the amplitude tensor."""
    if s.n != 3:
        raise StateError("the 3-tangle is defined for three qubits")
    a = s.amplitudes.reshape(2, 2, 2)
    d1 = (
        a[0, 0, 0] ** 2 * a[1, 1, 1] ** 2
        + a[0, 0, 1] ** 2 * a[1, 1, 0] ** 2
        + a[0, 1, 0] ** 2 * a[1, 0, 1] ** 2
        + a[1, 0, 0] ** 2 * a[0, 1, 1] ** 2
    )
    d2 = (
        a[0, 0, 0] * a[1, 1, 1] * a[0, 1, 1] * a[1, 0, 0]
        + a[0, 0, 0] * a[1, 1, 1] * a[1, 0, 1] * a[0, 1, 0]
        + a[0, 0, 0] * a[1, 1, 1] * a[1, 1, 0] * a[0, 0, 1]
        + a[0, 1, 1] * a[1, 0, 0] * a[1, 0, 1] * a[0, 1, 0]
        + a[0, 1, 1] * a[1, 0, 0] * a[1, 1, 0] * a[0, 0, 1]
        + a[1, 0, 1] * a[0, 1, 0] * a[1, 1, 0] * a[0, 0, 1]
    )
    d3 = a[0, 0, 0] * a[1, 1, 0] * a[1, 0, 1] * a[0, 1, 1] + a[1, 1, 1] * a[0, 0, 1] * a[0, 1, 0] * a[1, 0, 0]
    return float(4 * abs(d1 - 2 * d2 + 4 * d3))


def classify3(s):
    if s.n != 3:
        raise StateError("classify3 needs a 3-qubit state")
    psi = s.amplitudes.reshape(2, 2, 2)
    # for a pure state, the split {q}|rest carries no entanglement iff the
    # marginal of q is pure
    mixed = 0
    for q in range(3):
        a = np.moveaxis(psi, q, 0).reshape(2, 4)
        r = a @ a.conj().T
        mixed += np.vdot(r, r).real < 1 - PURITY_TOL
    if mixed == 0:
        return PRODUCT
    if mixed < 3:
        return BISEPARABLE
    return GHZ_CLASS if three_tangle(s) > TANGLE_TOL else W_CLASS


def v_from_angles(a, b, c):
    return (
        np.cos(a),
        np.sin(a) * np.cos(b),
        np.sin(a) * np.sin(b) * np.cos(c),
        np.sin(a) * np.sin(b) * np.sin(c),
    )


def angle_grid(size=20):
    """Deterministic hyperspherical grid over SU(2), ordered by index."""
    a = np.linspace(0, np.pi, size)
    b = np.linspace(0, np.pi, size)
    c = np.linspace(0, 2 * np.pi, size, endpoint=False)
    return [(x, y, z) for x in a for y in b for z in c]


def ghz_basis():
    """The eight states (|x> +- |~x>)/sqrt(2), keyed by label."""
    out = {}
    for x in range(4):
        for sign, tag in ((1, "+"), (-1, "-")):
            v = np.zeros(8, dtype=np.complex128)
            v[x] = 1 / np.sqrt(2)
            v[7 - x] = sign / np.sqrt(2)
            out[f"{x:03b}{tag}"] = v
    return out


@functools.lru_cache(maxsize=None)
def _family_vectors():
    return states.w(3).amplitudes, states.w_tilde(3).amplitudes, states.ghz_tilde3().amplitudes


def family_overlap(target, s):
    """(weight of s inside the family span, coefficient record)."""
    amps = s.amplitudes
    if target == "ghz":
        coeffs = {k: complex(np.vdot(v, amps)) for k, v in _GHZ_BASIS.items()}
        return float(sum(abs(c) ** 2 for c in coeffs.values())), coeffs
    if target == "w_wt":
        pop = bit_table(3).sum(axis=1)
        alpha = float(np.linalg.norm(amps[pop == 1]))
        beta = float(np.linalg.norm(amps[pop == 2]))
        coeffs = {
            "alpha": alpha,
            "beta": beta,
            "overlap_w3": complex(np.vdot(_family_vectors()[0], amps)),
            "overlap_wt3": complex(np.vdot(_family_vectors()[1], amps)),
        }
        return alpha**2 + beta**2, coeffs
    if target == "w_ghzt":
        alpha = complex(np.vdot(_family_vectors()[0], amps))
        beta = complex(np.vdot(_family_vectors()[2], amps))
        return abs(alpha) ** 2 + abs(beta) ** 2, {"alpha": alpha, "beta": beta}
    raise StateError(f"unknown target family {target!r}; known: {', '.join(FAMILIES)}")


_GHZ_BASIS = ghz_basis()


def _weight_at(s4, qubit, outcome, target, angles):
    m = ProjectiveMeasurement(qubit, v_from_angles(*angles), outcome)
    try:
        out, _ = project(s4, m)
    except OutcomeImpossible:
        return 0.0
    return family_overlap(target, out)[0]


def search_mapping(s4, qubit, target, grid=20, refine=True, input_name=""):
    """Measurement directions (and outcomes) that map ``s4`` into the family.

    Every grid point whose output lies in the family span within SPAN_TOL is
    returned; near misses are refined by a local search from the grid point.
    """
    if s4.n != 4:
        raise StateError("search_mapping expects a 4-qubit state")
    if target not in FAMILIES:
        raise StateError(f"unknown target family {target!r}; known: {', '.join(FAMILIES)}")
    results = []
    for angles in angle_grid(grid):
        for outcome in (0, 1):
            m = ProjectiveMeasurement(qubit, v_from_angles(*angles), outcome)
            try:
                out, prob = project(s4, m)
            except OutcomeImpossible:
                continue
            if prob < MIN_PROBABILITY:
                continue
            weight, coeffs = family_overlap(target, out)
            if weight < 1 - SPAN_TOL and refine and weight > 0.99:
                res = scipy.optimize.minimize(
                    lambda x: -_weight_at(s4, qubit, outcome, target, x),
                    np.array(angles),
                    method="Nelder-Mead",
                    options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 2000},
                )
                m = ProjectiveMeasurement(qubit, v_from_angles(*res.x), outcome)
                try:
                    out, prob = project(s4, m)
                except OutcomeImpossible:
                    continue
                weight, coeffs = family_overlap(target, out)
            if weight >= 1 - SPAN_TOL and prob >= MIN_PROBABILITY:
                results.append(MappingResult(input_name, m, out, prob, coeffs, classify3(out)))
    return results
