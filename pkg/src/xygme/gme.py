"""Genuine multipartite negativity from the PPT-mixture relaxation.

For an n-qubit state the value is ``E = max(0, -min Re tr(W rho))`` over
witnesses ``W`` that split, for every bipartition M, as
``W = P_M + Q_M^{T_M}`` with ``0 <= P_M <= I`` and ``0 <= Q_M <= I``.
"""
from dataclasses import dataclass

import itertools

import numpy as np

from . import sdpsolve
from .numerics import herm_eig, trace_norm
from .qstate import (
    Bipartition,
    DensityMatrix,
    PureState,
    bit_table,
    bipartitions,
    density_of,
    partial_transpose,
)

PPT_TOL = 1e-9


class GmeSolverError(RuntimeError):
    def __init__(self, status, solution):
        super().__init__(f"genuine negativity SDP ended with status {status!r}")
        self.status = status
        self.solution = solution


@dataclass
class GmeResult:
    value: float
    witness: np.ndarray
    decompositions: dict  # Bipartition -> (P_M, Q_M)
    solver_stats: dict


def _density(rho):
    if isinstance(rho, PureState):
        return density_of(rho)
    if isinstance(rho, DensityMatrix):
        return rho
    return DensityMatrix(rho)


REAL_TOL = 1e-12


def real_gauge(s):
    """Per-qubit z phases that make the amplitudes of ``s`` real (up to a
    global phase), or None when no such phases exist."""
    amps = s.amplitudes
    nz = np.flatnonzero(np.abs(amps) > 1e-12)
    rows = np.hstack([np.ones((nz.size, 1)), bit_table(s.n)[nz]])
    theta = np.angle(amps[nz])
    picked = []
    for i in range(nz.size):
        if np.linalg.matrix_rank(rows[picked + [i]]) > len(picked):
            picked.append(i)
    # each equation only holds modulo pi
    for shifts in itertools.product((0.0, np.pi), repeat=len(picked)):
        g = np.linalg.lstsq(rows[picked], -theta[picked] + np.array(shifts), rcond=None)[0]
        out = amps * np.exp(1j * (g[0] + bit_table(s.n) @ g[1:]))
        if np.abs(out.imag).max() < REAL_TOL:
            return g[1:]
    return None


def _diag_gauge(n, phases):
    # diagonal of the product unitary with |x> -> exp(i sum_q x_q phase_q) |x>
    return np.exp(1j * (bit_table(n) @ np.asarray(phases)))


def gme_problem(rho, real=None):
    """The PPT-mixture witness program for ``rho`` as an :class:`SdpProblem`.

    With ``real`` (default: whether ``rho`` is real) all variables are real
    symmetric, which loses nothing since conjugating a solution gives another.
    """
    rho = _density(rho)
    d = 2**rho.n
    if real is None:
        real = bool(np.abs(rho.matrix.imag).max() < REAL_TOL)
    variables = [sdpsolve.Variable("W", d, real=real)]
    equalities = []
    for part in bipartitions(rho.n):
        p, q = f"P{part.subset}", f"Q{part.subset}"
        variables += [
            sdpsolve.Variable(p, d, lower=True, upper=True, real=real),
            sdpsolve.Variable(q, d, lower=True, upper=True, real=real),
        ]
        # W - P_M - Q_M^{T_M} = 0
        terms = [sdpsolve.Term("W", 1.0), sdpsolve.Term(p, -1.0), sdpsolve.Term(q, -1.0, part.subset)]
        equalities.append(sdpsolve.MatrixEquality(terms))
    # Re tr(W rho) = Re tr(C^dag W) with C = rho (Hermitian)
    c = rho.matrix.real.astype(np.complex128) if real else rho.matrix.copy()
    return sdpsolve.SdpProblem(variables, {"W": c}, equalities)


def genuine_negativity(rho, tol=1e-7, max_iter=500):
    """E(rho) with the optimal witness and its per-bipartition split.

    Pure states whose amplitudes can be made real by local z rotations are
    solved in that gauge (the value is invariant) over real variables; the
    returned witness and decomposition refer to the original state.
    """
    phases = None
    if isinstance(rho, PureState):
        if rho.n < 2:
            raise ValueError("genuine negativity needs at least two qubits")
        phases = real_gauge(rho)
        if phases is not None:
            rho = PureState(rho.amplitudes * _diag_gauge(rho.n, phases))
    rho = _density(rho)
    if rho.n < 2:
        raise ValueError("genuine negativity needs at least two qubits")
    sol = sdpsolve.solve(gme_problem(rho), tol=tol, max_iter=max_iter)
    if sol.status != sdpsolve.OPTIMAL:
        raise GmeSolverError(sol.status, sol)
    vals = dict(sol.variable_values)
    if phases is not None:
        u = _diag_gauge(rho.n, phases)
        back = np.outer(u, u.conj())  # rho = U^dag rho' U elementwise
        for name in list(vals):
            if name.startswith("Q"):
                mask = int(name[1:])
                vals[name] = partial_transpose(partial_transpose(vals[name], mask) * back.conj(), mask)
            else:
                vals[name] = vals[name] * back.conj()
    decomp = {part: (vals[f"P{part.subset}"], vals[f"Q{part.subset}"]) for part in bipartitions(rho.n)}
    stats = dict(sol.gap, iterations=sol.iterations, status=sol.status, objective=sol.objective_value)
    stats["real_gauge"] = phases is not None
    return GmeResult(max(0.0, -sol.objective_value), vals["W"], decomp, stats)


def bipartite_negativity(rho, m):
    rho = _density(rho)
    return (trace_norm(partial_transpose(rho, m)) - 1) / 2


def is_ppt(rho, m):
    rho = _density(rho)
    return bool(herm_eig(partial_transpose(rho, m), tol=1e-9)[0][0] >= -PPT_TOL)


def _haar_state(rng, dim):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_biseparable(n, seed, terms=None):
    """Random mixture of pure states, each a product across some bipartition."""
    if n not in (3, 4):
        raise ValueError(f"random biseparable states are generated for 3 or 4 qubits, not {n}")
    rng = np.random.default_rng(seed)
    parts = bipartitions(n)
    terms = terms if terms is not None else 2 * len(parts)
    weights = rng.dirichlet(np.ones(terms))
    rho = np.zeros((2**n, 2**n), dtype=np.complex128)
    for w in weights:
        part = parts[rng.integers(len(parts))]
        side_a = part.qubits
        side_b = part.complement.qubits
        a = _haar_state(rng, 2 ** len(side_a))
        b = _haar_state(rng, 2 ** len(side_b))
        # place the two factors on their qubits
        psi = np.tensordot(a.reshape((2,) * len(side_a)), b.reshape((2,) * len(side_b)), axes=0)
        order = np.argsort(side_a + side_b)
        psi = psi.transpose(order).reshape(-1)
        rho += w * np.outer(psi, psi.conj())
    rho = (rho + rho.conj().T) / 2
    return DensityMatrix(rho / np.trace(rho).real)


def all_bipartitions(n):
    return bipartitions(n)


__all__ = [
    "Bipartition",
    "GmeResult",
    "GmeSolverError",
    "all_bipartitions",
    "bipartite_negativity",
    "genuine_negativity",
    "gme_problem",
    "is_ppt",
    "random_biseparable",
]
