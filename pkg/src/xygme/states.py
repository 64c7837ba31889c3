"""Catalog of the named states used as fixtures and recipe targets."""
import numpy as np

from .qstate import PureState, StateError


def from_kets(terms):
    """Build a normalized state from ``{"0101": amplitude, ...}``."""
    labels = list(terms)
    n = len(labels[0])
    if any(len(k) != n for k in labels):
        raise StateError("ket labels have different lengths")
    amp = np.zeros(2**n, dtype=np.complex128)
    for k, a in terms.items():
        amp[int(k, 2)] += a
    return PureState.normalized(amp)


def _check_n(n, lo=2, hi=5):
    if not lo <= n <= hi:
        raise StateError(f"n = {n} outside the supported range {lo}..{hi}")


def ghz(n):
    _check_n(n)
    return from_kets({"0" * n: 1, "1" * n: 1})


def _excitation_kets(n, k):
    return [format(i, f"0{n}b") for i in range(2**n) if bin(i).count("1") == k]


def w(n):
    _check_n(n)
    return from_kets({k: 1 for k in _excitation_kets(n, 1)})


def w_tilde(n):
    _check_n(n)
    return from_kets({k: 1 for k in _excitation_kets(n, n - 1)})


def g_state(n, sign=+1):
    _check_n(n, 3, 4)
    sign = 1 if sign in (+1, "+") else -1
    return PureState.normalized(w(n).amplitudes + sign * w_tilde(n).amplitudes)


def chi4():
    return from_kets({"1111": np.sqrt(2), "0001": 1, "0010": 1, "0100": 1, "1000": 1})


def chi3():
    return from_kets({"001": 1, "010": 1, "100": 1, "111": -1})


def psi_g():
    return from_kets({"0001": 1, "0010": 1, "0100": 1, "1000": 1, "0111": 1, "1011": -1, "1101": -1, "1110": 1})


def singlet4():
    return from_kets({"0011": 1, "1100": 1, "0101": -0.5, "0110": -0.5, "1001": -0.5, "1010": -0.5})


def cluster4():
    return from_kets({"0000": 1, "0011": 1, "1100": 1, "1111": -1})


def ghz_tilde3():
    return from_kets({"000": np.sqrt(1 / 3), "111": np.sqrt(2 / 3)})


def psi_abc():
    return from_kets({"000": np.sqrt(2 / 3), "111": np.sqrt(1 / 3)})


CATALOG = {
    "ghz3": lambda: ghz(3),
    "ghz4": lambda: ghz(4),
    "w3": lambda: w(3),
    "w4": lambda: w(4),
    "wt3": lambda: w_tilde(3),
    "wt4": lambda: w_tilde(4),
    "g3p": lambda: g_state(3, +1),
    "g3m": lambda: g_state(3, -1),
    "g4p": lambda: g_state(4, +1),
    "psi_g": psi_g,
    "chi3": chi3,
    "chi4": chi4,
    "singlet4": singlet4,
    "cluster4": cluster4,
    "ghz_tilde3": ghz_tilde3,
    "psi_abc": psi_abc,
}


def named(name):
    try:
        return CATALOG[name]()
    except KeyError:
        raise StateError(f"unknown catalog state {name!r}; known: {', '.join(CATALOG)}") from None
