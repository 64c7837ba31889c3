"""XY-coupled qubit Hamiltonians and their exact time evolution.

Times are dimensionless ``gt`` throughout (hbar = 1).  Evolution is done per
excitation-number block, which the XY coupling never mixes.
"""
import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .numerics import PAULI, expm_unitary, herm_eig, kron
from .qstate import PureState, StateError, excitation_sets


@dataclass(frozen=True)
class XYHamiltonian:
    n: int
    pairs: tuple
    g: float = 1.0

    def __post_init__(self):
        pairs = tuple(tuple(sorted(p)) for p in self.pairs)
        for i, j in pairs:
            if i == j:
                raise StateError(f"pair ({i}, {j}) couples a qubit to itself")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise StateError(f"pair ({i}, {j}) out of range for {self.n} qubits")
        if len(set(pairs)) != len(pairs):
            raise StateError("duplicate coupling pairs")
        if self.g <= 0:
            raise StateError("coupling strength must be positive")
        object.__setattr__(self, "pairs", pairs)

    def matrix(self):
        """sum over pairs of (g/2)(X_i X_j + Y_i Y_j) as a dense 2^n matrix."""
        return _matrix(self)

    def block(self, k):
        idx = excitation_sets(self.n)[k]
        return self.matrix()[np.ix_(idx, idx)]


@lru_cache(maxsize=64)
def _matrix(h):
    d = 2**h.n
    ret = np.zeros((d, d), dtype=np.complex128)
    for i, j in h.pairs:
        for p in ("x", "y"):
            factors = [PAULI["i"]] * h.n
            factors[i] = factors[j] = PAULI[p]
            ret += (h.g / 2) * kron(*factors) if h.n > 1 else factors[0]
    ret.setflags(write=False)
    return ret


@lru_cache(maxsize=256)
def _block_eig(h, k):
    return herm_eig(h.block(k))


def pairwise(n, i, j, g=1.0):
    return XYHamiltonian(n, ((i, j),), g)


def complete_graph(n, g=1.0):
    if not 2 <= n <= 5:
        raise StateError(f"complete graph coupling supported for 2..5 qubits, not {n}")
    return XYHamiltonian(n, tuple(itertools.combinations(range(n), 2)), g)


def evolve(h, s, gt):
    """exp(-i H t) s with t = gt / g, computed blockwise by excitation number."""
    if s.n != h.n:
        raise StateError(f"state has {s.n} qubits, Hamiltonian {h.n}")
    t = gt / h.g
    amp = s.amplitudes
    out = np.zeros_like(amp)
    for k, idx in excitation_sets(h.n).items():
        sub = amp[idx]
        if not np.any(sub):
            continue
        evl, evc = _block_eig(h, k)
        out[idx] = evc @ (np.exp(-1j * evl * t) * (evc.conj().T @ sub))
    # renormalize away rounding only
    return PureState(out / np.linalg.norm(out))


def evolve_dense(h, s, gt):
    """Same as :func:`evolve` via the full 2^n matrix exponential."""
    return PureState(expm_unitary(h.matrix(), gt / h.g) @ s.amplitudes)


@dataclass
class SweepRecord:
    gt: float
    state: PureState
    gme_value: float = None


def grid(start=0.0, stop=3.2, step=0.01):
    """Inclusive, evenly spaced gt values."""
    if step <= 0:
        raise ValueError("grid step must be positive")
    if stop < start:
        raise ValueError("grid stop precedes start")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(count), 12)


def sweep(h, s0, gt_grid, gme=None):
    """Evolve ``s0`` to every grid point; ``gme`` (a callable) fills in E."""
    gt_grid = np.asarray(gt_grid, dtype=float)
    if np.any(np.diff(gt_grid) <= 0):
        raise ValueError("sweep grid must be strictly ascending")
    records = []
    for gt in gt_grid:
        s = evolve(h, s0, float(gt))
        records.append(SweepRecord(float(gt), s, None if gme is None else float(gme(s))))
    return records


def sweep_csv(records):
    lines = ["gt,E"]
    for r in records:
        lines.append(f"{r.gt:.6f},{r.gme_value:.6f}")
    return "\n".join(lines) + "\n"
