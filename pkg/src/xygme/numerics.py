"""Dense complex matrix kernel.

Matrices are plain ``numpy`` arrays (complex128).  Everything here is a pure
function; inputs are never modified.
"""
import numpy as np

HERMITIAN_TOL = 1e-10

SIGMA_I = np.eye(2, dtype=np.complex128)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
PAULI = {"i": SIGMA_I, "x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}


class NotHermitianError(ValueError):
    pass


def as_matrix(m):
    ret = np.asarray(m, dtype=np.complex128)
    if ret.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {ret.shape}")
    if not np.all(np.isfinite(ret)):
        raise ValueError("matrix has non-finite entries")
    return ret


def kron(a, b, *rest):
    ret = np.kron(as_matrix(a), as_matrix(b))
    for x in rest:
        ret = np.kron(ret, as_matrix(x))
    return ret


def is_hermitian(h, tol=HERMITIAN_TOL):
    h = np.asarray(h)
    return h.ndim == 2 and h.shape[0] == h.shape[1] and np.abs(h - h.conj().T).max(initial=0) <= tol


def herm_eig(h, tol=HERMITIAN_TOL):
    """Eigendecomposition of a Hermitian matrix.

    Returns ``(eigenvalues, eigenvectors)`` with ascending real eigenvalues and
    the eigenvectors as the columns of a unitary matrix.
    """
    h = as_matrix(h)
    if not is_hermitian(h, tol):
        raise NotHermitianError("matrix is not Hermitian within %g" % tol)
    # symmetrize so that LAPACK sees exactly Hermitian data
    evl, evc = np.linalg.eigh((h + h.conj().T) / 2)
    return evl, evc


def expm_unitary(h, t):
    """exp(-i h t) for Hermitian ``h``."""
    evl, evc = herm_eig(h)
    return (evc * np.exp(-1j * evl * t)) @ evc.conj().T


def trace_norm(m):
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"trace norm needs a square matrix, got {m.shape}")
    if is_hermitian(m):
        return float(np.abs(herm_eig(m)[0]).sum())
    return float(np.linalg.svd(m, compute_uv=False).sum())
