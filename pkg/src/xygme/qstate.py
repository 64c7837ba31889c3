"""Multi-qubit pure states, density matrices and the structural maps on them.

Basis convention: the ket |q0 q1 ... q_{n-1}> is stored at integer index
q0*2^(n-1) + ... + q_{n-1}, so qubit 0 (leftmost label) is the most
significant bit.  Qubit subsets are passed as bitmasks with bit ``1 << q``
standing for qubit ``q``.
"""
import itertools
from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .numerics import herm_eig

NORM_TOL = 1e-9
MAX_QUBITS = 5


class StateError(ValueError):
    pass


def _qubit_count(dim):
    n = int(dim).bit_length() - 1
    if n < 1 or 2**n != dim:
        raise StateError(f"dimension {dim} is not a power of two")
    if n > MAX_QUBITS:
        raise StateError(f"{n} qubits exceeds the supported maximum of {MAX_QUBITS}")
    return n


def _frozen(x):
    x = np.array(x, dtype=np.complex128)
    x.setflags(write=False)
    return x


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = _frozen(self.amplitudes)
        if amp.ndim != 1:
            raise StateError("amplitudes must be a 1-d array")
        _qubit_count(amp.size)
        if not np.all(np.isfinite(amp)):
            raise StateError("amplitudes must be finite")
        norm = np.vdot(amp, amp).real
        if abs(norm - 1) > NORM_TOL:
            raise StateError(f"state is not normalized: squared norm {norm:.12g}")
        object.__setattr__(self, "amplitudes", amp)

    @property
    def n(self):
        return self.amplitudes.size.bit_length() - 1

    @classmethod
    def normalized(cls, amplitudes):
        amp = np.asarray(amplitudes, dtype=np.complex128)
        norm = np.linalg.norm(amp)
        if norm < 1e-300:
            raise StateError("cannot normalize the zero vector")
        return cls(amp / norm)

    @classmethod
    def basis(cls, bits):
        """Computational basis state from a label such as ``"0101"``."""
        amp = np.zeros(2 ** len(bits), dtype=np.complex128)
        amp[int(bits, 2)] = 1
        return cls(amp)

    def __len__(self):
        return self.amplitudes.size


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        rho = _frozen(self.matrix)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise StateError(f"density matrix must be square, got shape {rho.shape}")
        _qubit_count(rho.shape[0])
        if not np.all(np.isfinite(rho)):
            raise StateError("density matrix must be finite")
        if np.abs(rho - rho.conj().T).max() > NORM_TOL:
            raise StateError("density matrix is not Hermitian")
        tr = np.trace(rho).real
        if abs(tr - 1) > NORM_TOL:
            raise StateError(f"density matrix has trace {tr:.12g}")
        lo = herm_eig(rho, tol=NORM_TOL)[0][0]
        if lo < -NORM_TOL:
            raise StateError(f"density matrix has negative eigenvalue {lo:.3g}")
        object.__setattr__(self, "matrix", rho)

    @property
    def n(self):
        return self.matrix.shape[0].bit_length() - 1


@dataclass(frozen=True)
class Bipartition:
    """Split of ``n`` qubits into side A (``subset``) and its complement."""

    n: int
    subset: int

    def __post_init__(self):
        full = (1 << self.n) - 1
        if self.n < 2 or not (0 < self.subset < full):
            raise StateError(f"subset {self.subset:#b} is not a proper nonempty subset of {self.n} qubits")

    @property
    def complement(self):
        return Bipartition(self.n, ((1 << self.n) - 1) ^ self.subset)

    def canonical(self):
        return self if self.subset & 1 else self.complement

    @property
    def qubits(self):
        return tuple(q for q in range(self.n) if self.subset >> q & 1)

    def label(self):
        names = "ABCDE"
        a = "".join(names[q] for q in range(self.n) if self.subset >> q & 1)
        b = "".join(names[q] for q in range(self.n) if not self.subset >> q & 1)
        return f"{a}|{b}"


def mask_of(qubits):
    ret = 0
    for q in qubits:
        ret |= 1 << q
    return ret


def bipartitions(n):
    """All 2^(n-1) - 1 canonical bipartitions (qubit 0 always on side A)."""
    return [Bipartition(n, mask) for mask in range(1, 1 << n, 2) if mask != (1 << n) - 1]


def density_of(s):
    amp = s.amplitudes
    return DensityMatrix(np.outer(amp, amp.conj()))


def _as_density_array(rho):
    if isinstance(rho, DensityMatrix):
        return rho.matrix, rho.n
    if isinstance(rho, PureState):
        return density_of(rho).matrix, rho.n
    rho = np.asarray(rho, dtype=np.complex128)
    return rho, _qubit_count(rho.shape[0])


def partial_trace(rho, keep):
    """Reduced density matrix on the qubits in bitmask ``keep``."""
    mat, n = _as_density_array(rho)
    keep_q = [q for q in range(n) if keep >> q & 1]
    if not keep_q or keep >> n:
        raise StateError(f"keep mask {keep:#b} must select at least one of {n} qubits")
    drop_q = [q for q in range(n) if q not in keep_q]
    tensor = mat.reshape((2,) * (2 * n))
    # contract row and column index of each dropped qubit
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = list(letters[:n])
    col = list(letters[n : 2 * n])
    for q in drop_q:
        col[q] = row[q]
    out = "".join(row[q] for q in keep_q) + "".join(col[q] for q in keep_q)
    red = np.einsum("".join(row) + "".join(col) + "->" + out, tensor)
    dk = 2 ** len(keep_q)
    return DensityMatrix(red.reshape(dk, dk))


def partial_transpose(rho, part):
    """Transpose the indices of the qubits on side A of ``part``.

    ``part`` is a :class:`Bipartition` or a raw qubit bitmask.
    """
    mat, n = _as_density_array(rho)
    mask = part.subset if isinstance(part, Bipartition) else int(part)
    tensor = mat.reshape((2,) * (2 * n))
    axes = list(range(2 * n))
    for q in range(n):
        if mask >> q & 1:
            axes[q], axes[n + q] = n + q, q
    return tensor.transpose(axes).reshape(mat.shape)


def fidelity(a, b):
    if a.n != b.n:
        raise StateError(f"qubit counts differ: {a.n} vs {b.n}")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def bit_table(n):
    """(2^n, n) array; entry [i, q] is the value of qubit q in basis state i."""
    idx = np.arange(2**n)
    return (idx[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1


def apply_z_phases(s, phases):
    """Apply Rz(phase_q) = exp(-i phase_q Z/2) to every qubit q."""
    phases = np.asarray(phases, dtype=np.float64)
    bits = bit_table(s.n)
    return PureState(s.amplitudes * np.exp(1j * (bits - 0.5) @ phases))


def _phase_objective(weights, bits, phases):
    return abs(np.sum(weights * np.exp(1j * bits @ phases))) ** 2


def local_phase_match(a, b, grid=16):
    """max over per-qubit z phases of fidelity(a, Rz(phases) b).

    Returns ``(value, phases)``.  A coarse grid over every angle is followed
    by a quasi-Newton refinement from the best grid point.
    """
    if a.n != b.n:
        raise StateError(f"qubit counts differ: {a.n} vs {b.n}")
    n = a.n
    weights = a.amplitudes.conj() * b.amplitudes
    angles = 2 * np.pi * np.arange(grid) / grid
    # multilinear transform: out[k_0..k_{n-1}] = sum_i w_i prod_q exp(i angle_{k_q} bit_q(i))
    tensor = weights.reshape((2,) * n)
    phase = np.exp(1j * np.outer(angles, [0, 1]))
    for _ in range(n):
        # contract the leading bit axis and append the grid axis at the back
        tensor = np.tensordot(tensor, phase, axes=([0], [1]))
    val = np.abs(tensor) ** 2
    best = np.unravel_index(np.argmax(val), val.shape)
    x0 = angles[list(best)]
    bits = bit_table(n).astype(np.float64)
    res = scipy.optimize.minimize(lambda x: -_phase_objective(weights, bits, x), x0, method="BFGS", options={"gtol": 1e-12})
    x = res.x if -res.fun >= val[best] else x0
    value = min(1.0, _phase_objective(weights, bits, x))
    return value, np.mod(x + np.pi, 2 * np.pi) - np.pi


def excitation_sets(n):
    """Basis indices grouped by excitation number (popcount)."""
    if n < 1:
        raise StateError("need at least one qubit")
    ret = {k: [] for k in range(n + 1)}
    for i in range(2**n):
        ret[bin(i).count("1")].append(i)
    return ret


def popcounts(n):
    return np.array([bin(i).count("1") for i in range(2**n)])


def all_bit_labels(n):
    return ["".join(x) for x in itertools.product("01", repeat=n)]
