"""Small dense semidefinite programs over Hermitian matrix variables.

A problem is stated in terms of named Hermitian (or real symmetric) matrix
variables ``X_v``::

    minimize    sum_v Re tr(C_v X_v)
    subject to  0 <= X_v            (optional, per variable)
                X_v <= I            (optional, per variable)
                sum_v Re tr(A_kv X_v) = b_k
                sum_t sign_t * PT_t(X_{v_t}) = B_k     (matrix valued)

where ``PT_t`` is a partial transpose over a fixed qubit subset (the empty
subset is the identity).  The solver is a primal-dual interior point method
with Nesterov-Todd scaling and a Mehrotra predictor-corrector step.  Before
iterating, matrix equalities that pin down a variable are used to eliminate
it, so the interior point method usually runs without equality constraints.
"""
import logging
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg

logger = logging.getLogger(__name__)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
MAX_ITERATIONS = "max-iterations"

STALL_LEVEL = 1e-5
STALL_ITERATIONS = 50
STEP_FRACTION = 0.99
DENSE_LIMIT = 4096
SHORT_STEP = 0.1
GAP_STALL_ITERATIONS = 6
GAP_STALL_FACTOR = 10.0
DIVERGENCE_LEVEL = 1e12


class SdpError(ValueError):
    pass


@dataclass(frozen=True)
class Variable:
    name: str
    dim: int
    lower: bool = False  # X >= 0
    upper: bool = False  # X <= I
    real: bool = False


@dataclass(frozen=True)
class Term:
    """``sign * PT_mask(X_var)``; ``mask`` selects qubits (bit q = qubit q)."""

    var: str
    sign: float = 1.0
    mask: int = 0


@dataclass
class TraceEquality:
    coeffs: dict
    rhs: float


@dataclass
class MatrixEquality:
    terms: list
    rhs: np.ndarray = None


@dataclass
class SdpProblem:
    variables: list
    objective: dict
    equalities: list = field(default_factory=list)

    def variable(self, name):
        for v in self.variables:
            if v.name == name:
                return v
        raise SdpError(f"unknown variable {name!r}")


@dataclass
class SdpSolution:
    status: str
    objective_value: float
    variable_values: dict
    gap: dict
    iterations: int
    history: list = field(default_factory=list)


class HermitianBasis:
    """Orthonormal real coordinates for d x d Hermitian matrices.

    Coordinate order: the d diagonal entries, then for each i < j the pair
    sqrt(2) Re M_ij, sqrt(2) Im M_ij.  With these coordinates the Euclidean
    dot product equals Re tr(A B).
    """

    def __init__(self, d):
        self.d = d
        self.size = d * d
        iu, ju = np.triu_indices(d, 1)
        self.row = np.concatenate([np.arange(d), np.repeat(iu, 2)])
        self.col = np.concatenate([np.arange(d), np.repeat(ju, 2)])
        self.kind = np.concatenate([np.zeros(d, int), np.tile([1, 2], iu.size)])
        self.real_index = np.flatnonzero(self.kind != 2)
        # sparse vec-basis: column k has coefficient c1 at p1 and c2 at p2
        s = 1 / np.sqrt(2)
        self.p1 = self.row * d + self.col
        self.p2 = self.col * d + self.row
        self.c1 = np.select([self.kind == 0, self.kind == 1], [1.0, s], 1j * s).astype(np.complex128)
        self.c2 = np.select([self.kind == 0, self.kind == 1], [0.0, s], -1j * s).astype(np.complex128)

    def vec(self, m):
        m = np.asarray(m)
        v = m[self.row, self.col]
        return np.select([self.kind == 0, self.kind == 1], [v.real, np.sqrt(2) * v.real], np.sqrt(2) * v.imag)

    def mat(self, x):
        m = np.zeros(self.size, dtype=np.complex128)
        np.add.at(m, self.p1, self.c1 * x)
        np.add.at(m, self.p2, self.c2 * x)
        return m.reshape(self.d, self.d)

    def transpose_perm(self, mask):
        """(perm, sign) with vec(PT(M))[perm] = sign * vec(M)."""
        n = self.d.bit_length() - 1
        bits = 0
        for q in range(n):
            if mask >> q & 1:
                bits |= 1 << (n - 1 - q)
        sw = (self.row ^ self.col) & bits
        r2, c2 = self.row ^ sw, self.col ^ sw
        flip = r2 > c2
        r2, c2 = np.where(flip, c2, r2), np.where(flip, r2, c2)
        lookup = {(int(r), int(c), int(k)): i for i, (r, c, k) in enumerate(zip(self.row, self.col, self.kind))}
        perm = np.array([lookup[(int(r), int(c), int(k))] for r, c, k in zip(r2, c2, self.kind)])
        sign = np.where(flip & (self.kind == 2), -1.0, 1.0)
        return perm, sign

    def congruence(self, t):
        """Matrix of M -> t M t in these coordinates (t Hermitian)."""
        # <E_k, t E_l t> with E_k = c1 e_r e_c^T + c2 e_c e_r^T
        r, c = self.row, self.col
        t_rr, t_cc = t[np.ix_(r, r)], t[np.ix_(c, c)]
        t_rc, t_cr = t[np.ix_(r, c)], t[np.ix_(c, r)]
        a1, a2 = self.c1.conj()[:, None], self.c2.conj()[:, None]
        b1, b2 = self.c1[None, :], self.c2[None, :]
        # entry (p, q) of kron(t, t.T) for p = (i, j), q = (k, l) is t[i, k] t[l, j]
        ret = a1 * b1 * t_rr * t_cc.T + a1 * b2 * t_rc * t_rc.T + a2 * b1 * t_cr * t_cr.T + a2 * b2 * t_cc * t_rr.T
        return ret.real


@lru_cache(maxsize=None)
def hermitian_basis(d):
    return HermitianBasis(d)


@lru_cache(maxsize=None)
def _transpose_perm(d, mask):
    return hermitian_basis(d).transpose_perm(mask)


def partial_transpose_mask(m, mask):
    """Partial transpose of a 2^n x 2^n matrix over the qubits in ``mask``."""
    m = np.asarray(m)
    n = m.shape[0].bit_length() - 1
    tensor = m.reshape((2,) * (2 * n))
    axes = list(range(2 * n))
    for q in range(n):
        if mask >> q & 1:
            axes[q], axes[n + q] = n + q, q
    return tensor.transpose(axes).reshape(m.shape)


def _apply_term(term, x):
    out = x if term.mask == 0 else partial_transpose_mask(x, term.mask)
    return term.sign * out


# --- problem compilation ---------------------------------------------------


@dataclass
class _Cone:
    d: int
    const: np.ndarray
    terms: list  # (var_index, sign, mask)


@dataclass
class _Elimination:
    var: str
    sign: float
    rhs: np.ndarray
    terms: list  # remaining Term objects of the equality


def _validate(p):
    names = [v.name for v in p.variables]
    if len(set(names)) != len(names):
        raise SdpError("duplicate variable names")
    dims = {v.name: v.dim for v in p.variables}
    for v in p.variables:
        if v.dim < 1:
            raise SdpError(f"variable {v.name} has dimension {v.dim}")
    for name, c in p.objective.items():
        c = np.asarray(c)
        if name not in dims or c.shape != (dims[name],) * 2:
            raise SdpError(f"objective coefficient for {name!r} has inconsistent shape {c.shape}")
        if np.abs(c - c.conj().T).max(initial=0) > 1e-10:
            raise SdpError(f"objective coefficient for {name!r} is not Hermitian")
    for eq in p.equalities:
        if isinstance(eq, TraceEquality):
            for name, a in eq.coeffs.items():
                a = np.asarray(a)
                if name not in dims or a.shape != (dims[name],) * 2:
                    raise SdpError(f"equality coefficient for {name!r} has inconsistent shape")
                if np.abs(a - a.conj().T).max(initial=0) > 1e-10:
                    raise SdpError(f"equality coefficient for {name!r} is not Hermitian")
        elif isinstance(eq, MatrixEquality):
            ds = {dims.get(t.var) for t in eq.terms}
            if None in ds or len(ds) != 1:
                raise SdpError("matrix equality mixes unknown variables or dimensions")
            d = ds.pop()
            if eq.rhs is not None and np.shape(eq.rhs) != (d, d):
                raise SdpError("matrix equality right-hand side has wrong shape")
            if any(t.mask and (d & (d - 1)) for t in eq.terms):
                raise SdpError("partial transpose needs a power-of-two dimension")
        else:
            raise SdpError(f"unknown constraint type {type(eq).__name__}")


def _presolve(p):
    """Eliminate variables pinned by a matrix equality.

    Returns (kept variables, cones as term lists on kept variables, objective
    terms, scalar equality rows, eliminations in order).
    """
    byname = {v.name: v for v in p.variables}
    # cones over arbitrary affine expressions: list of (d, const, [Term])
    cones = []
    for v in p.variables:
        if v.lower:
            cones.append((v.dim, np.zeros((v.dim, v.dim), complex), [Term(v.name, 1.0, 0)]))
        if v.upper:
            cones.append((v.dim, np.eye(v.dim, dtype=complex), [Term(v.name, -1.0, 0)]))
    objective = {k: np.asarray(c, dtype=complex) for k, c in p.objective.items()}
    obj_const = 0.0
    traces = [(dict((k, np.asarray(a, dtype=complex)) for k, a in eq.coeffs.items()), float(eq.rhs)) for eq in p.equalities if isinstance(eq, TraceEquality)]
    matrix_eqs = [eq for eq in p.equalities if isinstance(eq, MatrixEquality)]
    count = {}
    for eq in matrix_eqs:
        for t in eq.terms:
            count[t.var] = count.get(t.var, 0) + 1
    eliminated = []
    remaining = []
    gone = set()
    for eq in matrix_eqs:
        d = byname[eq.terms[0].var].dim
        rhs = np.zeros((d, d), complex) if eq.rhs is None else np.asarray(eq.rhs, dtype=complex)
        all_real = all(byname[t.var].real for t in eq.terms) and np.isrealobj(eq.rhs if eq.rhs is not None else 0.0)
        pick = None
        for t in eq.terms:
            v = byname[t.var]
            if t.mask == 0 and count[t.var] == 1 and t.var not in gone and (all_real or not v.real):
                if sum(1 for s in eq.terms if s.var == t.var) == 1:
                    pick = t
                    break
        if pick is None:
            remaining.append(eq)
            continue
        others = [t for t in eq.terms if t is not pick]
        gone.add(pick.var)
        # X_u = s_u * rhs - sum_t s_u * t(X)
        su = pick.sign
        subst_const = su * rhs
        subst_terms = [Term(t.var, -su * t.sign, t.mask) for t in others]
        eliminated.append(_Elimination(pick.var, su, rhs, others))

        def substitute_linear(coeffs, const):
            c = coeffs.pop(pick.var, None)
            if c is None:
                return const
            const += float(np.real(np.trace(c @ subst_const)))
            for t in subst_terms:
                add = t.sign * (partial_transpose_mask(c, t.mask) if t.mask else c)
                coeffs[t.var] = coeffs.get(t.var, 0) + add
            return const

        obj_const = substitute_linear(objective, obj_const)
        traces = [(co, rhs_k - substitute_linear(co, 0.0)) for co, rhs_k in traces]
        new_cones = []
        for dd, const, terms in cones:
            hit = [t for t in terms if t.var == pick.var]
            if not hit:
                new_cones.append((dd, const, terms))
                continue
            terms = [t for t in terms if t.var != pick.var]
            for h in hit:
                const = const + h.sign * (partial_transpose_mask(subst_const, h.mask) if h.mask else subst_const)
                terms = terms + [Term(t.var, h.sign * t.sign, h.mask ^ t.mask) for t in subst_terms]
            new_cones.append((dd, const, terms))
        cones = new_cones
    kept = [v for v in p.variables if v.name not in gone]
    return kept, cones, objective, obj_const, traces, remaining, eliminated


class _Compiled:
    def __init__(self, p):
        _validate(p)
        kept, cones, objective, obj_const, traces, mat_eqs, eliminated = _presolve(p)
        self.problem = p
        self.kept = kept
        self.eliminated = eliminated
        self.obj_const = obj_const
        self.slices = {}
        off = 0
        for v in kept:
            size = v.dim * (v.dim + 1) // 2 if v.real else v.dim**2
            self.slices[v.name] = slice(off, off + size)
            off += size
        self.n = off
        self.byname = {v.name: v for v in p.variables}
        # objective vector
        self.c = np.zeros(self.n)
        for name, cm in objective.items():
            self.c[self.slices[name]] = self._coords(name, cm)
        # scalar equalities: trace rows then matrix-equality coordinate rows
        rows, rhs = [], []
        for coeffs, b in traces:
            r = np.zeros(self.n)
            for name, a in coeffs.items():
                r[self.slices[name]] += self._coords(name, a)
            rows.append(r)
            rhs.append(b)
        for eq in mat_eqs:
            d = self.byname[eq.terms[0].var].dim
            basis = hermitian_basis(d)
            real = all(self.byname[t.var].real for t in eq.terms) and (eq.rhs is None or np.isrealobj(eq.rhs))
            idx = basis.real_index if real else np.arange(basis.size)
            block = np.zeros((basis.size, self.n))
            for t in eq.terms:
                target, sign = self._term_map(t)
                cols = np.arange(self.slices[t.var].start, self.slices[t.var].stop)
                block[target, cols] += sign
            b = np.zeros(basis.size) if eq.rhs is None else basis.vec(eq.rhs)
            rows.extend(block[idx])
            rhs.extend(b[idx])
        self.A = np.array(rows).reshape(len(rows), self.n)
        self.b = np.array(rhs, dtype=float)
        self.cones = []
        for d, const, terms in cones:
            basis = hermitian_basis(d)
            compiled = []
            for t in terms:
                target, sign = self._term_map(t)
                compiled.append((self.slices[t.var], target, sign))
            self.cones.append(_Cone(d, const, compiled))
        self.cone_order = sum(cn.d for cn in self.cones)

    def _coords(self, name, m):
        v = self.byname[name]
        x = hermitian_basis(v.dim).vec(m)
        return x[hermitian_basis(v.dim).real_index] if v.real else x

    def _term_map(self, t):
        """Cone coordinates hit by the variable coordinates of term t."""
        v = self.byname[t.var]
        basis = hermitian_basis(v.dim)
        base = basis.real_index if v.real else np.arange(basis.size)
        perm, sign = _transpose_perm(v.dim, t.mask) if t.mask else (np.arange(basis.size), np.ones(basis.size))
        return perm[base], t.sign * sign[base]

    def cone_value(self, k, x):
        cn = self.cones[k]
        basis = hermitian_basis(cn.d)
        v = np.zeros(basis.size)
        for sl, target, sign in cn.terms:
            v[target] += sign * x[sl]
        return basis.mat(v) + cn.const

    def cone_linear(self, k, x):
        cn = self.cones[k]
        basis = hermitian_basis(cn.d)
        v = np.zeros(basis.size)
        for sl, target, sign in cn.terms:
            v[target] += sign * x[sl]
        return basis.mat(v)

    def cone_adjoint(self, k, m, out):
        cn = self.cones[k]
        v = hermitian_basis(cn.d).vec(m)
        for sl, target, sign in cn.terms:
            out[sl] += sign * v[target]

    def recover(self, x):
        vals = {}
        for v in self.kept:
            basis = hermitian_basis(v.dim)
            coords = np.zeros(basis.size)
            if v.real:
                coords[basis.real_index] = x[self.slices[v.name]]
            else:
                coords = x[self.slices[v.name]]
            m = basis.mat(coords)
            vals[v.name] = m.real.astype(complex) if v.real else m
        for e in reversed(self.eliminated):
            acc = e.rhs.copy()
            for t in e.terms:
                acc = acc - _apply_term(t, vals[t.var])
            vals[e.var] = e.sign * acc
        return vals


# --- interior point method -------------------------------------------------


def _nt_scaling(s, z):
    ls = np.linalg.cholesky(s)
    lz = np.linalg.cholesky(z)
    u, lam, vh = np.linalg.svd(lz.conj().T @ ls)
    r = ls @ vh.conj().T / np.sqrt(lam)
    rinv = np.sqrt(lam)[:, None] * (vh @ scipy.linalg.solve_triangular(ls, np.eye(s.shape[0]), lower=True))
    return r, rinv, lam


def _max_step(lam, dtilde):
    # largest a with diag(lam) + a * dtilde >= 0
    isq = 1 / np.sqrt(lam)
    m = np.linalg.eigvalsh(isq[:, None] * dtilde * isq[None, :])[0]
    return np.inf if m >= 0 else -1 / m


class _NormalSolver:
    """Solves [H A^T; A 0] [dx; -dy] = [r; e] for the search direction.

    Without equality rows a moderate H is factored by dense Cholesky.  Larger
    ones use the block sparsity: an independent set of variable blocks is
    eliminated first and the Schur complement on the rest is factored densely.
    """

    def __init__(self, blocks, slices, A):
        self.slices = slices
        self.n = sum(sl.stop - sl.start for sl in slices)
        self.m = A.shape[0]
        start = {sl.start: i for i, sl in enumerate(slices)}
        self.blocks = {(start[a], start[b]): h for (a, b), h in blocks.items()}
        if self.m:
            self._dense(A)
            return
        if self.n <= DENSE_LIMIT:
            try:
                self._cholesky()
                return
            except np.linalg.LinAlgError:
                self._dense(A, ridge=1e-13)
                return
        nb = len(slices)
        nbr = [set() for _ in range(nb)]
        for i, j in self.blocks:
            if i != j:
                nbr[i].add(j)
        self.leaves = []
        for i in sorted(range(nb), key=lambda i: len(nbr[i])):
            if not nbr[i] & set(self.leaves):
                self.leaves.append(i)
        self.rest = [i for i in range(nb) if i not in self.leaves]
        try:
            self._schur()
        except np.linalg.LinAlgError:
            self._dense(A, ridge=1e-13)

    def _dense_h(self):
        H = np.zeros((self.n, self.n))
        for (i, j), h in self.blocks.items():
            H[self.slices[i], self.slices[j]] += h
        return H

    def _dense(self, A, ridge=0.0):
        H = self._dense_h() + ridge * np.eye(self.n)
        K = np.block([[H, A.T], [A, np.zeros((self.m, self.m))]])
        self.mode = "dense"
        self.lu = scipy.linalg.lu_factor(K, check_finite=False)

    def _cholesky(self):
        # natural ordering keeps the free (coupling) block first, which is far
        # better conditioned than eliminating the bounded blocks first
        self.H = self._dense_h()
        self.mode = "cholesky"
        self.dscale = 1 / np.sqrt(np.maximum(np.diag(self.H), 1e-300))
        self.cho = scipy.linalg.cho_factor(self.dscale[:, None] * self.H * self.dscale[None, :], check_finite=False)

    def _block(self, i, j):
        sl_i, sl_j = self.slices[i], self.slices[j]
        h = self.blocks.get((i, j))
        return h if h is not None else np.zeros((sl_i.stop - sl_i.start, sl_j.stop - sl_j.start))

    def _schur(self):
        self.mode = "schur"
        self.leaf_fac = {}
        self.coupling = {}
        rsizes = [self.slices[r].stop - self.slices[r].start for r in self.rest]
        self.roff = np.concatenate([[0], np.cumsum(rsizes)]).astype(int)
        nr = int(self.roff[-1])
        S = np.zeros((nr, nr))
        for a, r1 in enumerate(self.rest):
            for b, r2 in enumerate(self.rest):
                if (r1, r2) in self.blocks:
                    S[self.roff[a] : self.roff[a + 1], self.roff[b] : self.roff[b + 1]] = self.blocks[(r1, r2)]
        for leaf in self.leaves:
            f = scipy.linalg.cho_factor(self._block(leaf, leaf), check_finite=False)
            self.leaf_fac[leaf] = f
            cols = [b for b, r in enumerate(self.rest) if (leaf, r) in self.blocks]
            if not cols:
                continue
            B = np.hstack([self._block(leaf, self.rest[b]) for b in cols])
            idx = np.concatenate([np.arange(self.roff[b], self.roff[b + 1]) for b in cols])
            self.coupling[leaf] = (idx, B)
            S[np.ix_(idx, idx)] -= B.T @ scipy.linalg.cho_solve(f, B, check_finite=False)
        self.schur = None
        if nr:
            try:
                self.schur = ("cho", scipy.linalg.cho_factor(S, check_finite=False))
            except np.linalg.LinAlgError:
                # near the optimum the complement can lose definiteness to rounding
                self.schur = ("lu", scipy.linalg.lu_factor(S, check_finite=False))

    def matvec(self, x):
        if self.mode == "cholesky":
            return self.H @ x
        out = np.zeros(self.n)
        for (i, j), h in self.blocks.items():
            out[self.slices[i]] += h @ x[self.slices[j]]
        return out

    def solve(self, r, e, refine=2):
        dx, dy = self._solve(r, e)
        if self.mode in ("schur", "cholesky"):
            # the normal matrix is badly conditioned near the optimum
            for _ in range(refine):
                ddx, _ = self._solve(r - self.matvec(dx), e)
                dx = dx + ddx
        return dx, dy

    def _solve(self, r, e):
        if self.mode == "cholesky":
            return self.dscale * scipy.linalg.cho_solve(self.cho, self.dscale * r, check_finite=False), np.zeros(0)
        if self.mode == "dense":
            sol = scipy.linalg.lu_solve(self.lu, np.concatenate([r, e]), check_finite=False)
            return sol[: self.n], -sol[self.n :]
        out = np.zeros(self.n)
        rr = np.concatenate([r[self.slices[i]] for i in self.rest]) if self.rest else np.zeros(0)
        for leaf, (idx, B) in self.coupling.items():
            rr[idx] -= B.T @ scipy.linalg.cho_solve(self.leaf_fac[leaf], r[self.slices[leaf]], check_finite=False)
        if self.schur is None:
            xr = rr
        elif self.schur[0] == "cho":
            xr = scipy.linalg.cho_solve(self.schur[1], rr, check_finite=False)
        else:
            xr = scipy.linalg.lu_solve(self.schur[1], rr, check_finite=False)
        for a, i in enumerate(self.rest):
            out[self.slices[i]] = xr[self.roff[a] : self.roff[a + 1]]
        for leaf in self.leaves:
            rhs = r[self.slices[leaf]].copy()
            if leaf in self.coupling:
                idx, B = self.coupling[leaf]
                rhs -= B @ xr[idx]
            out[self.slices[leaf]] = scipy.linalg.cho_solve(self.leaf_fac[leaf], rhs, check_finite=False)
        return out, np.zeros(0)


def _herm(m):
    return (m + m.conj().T) / 2


def solve(p, tol=1e-7, max_iter=500):
    """Solve ``p``; see the module docstring for the problem form."""
    cp = _Compiled(p)
    if not cp.cones and cp.n:
        raise SdpError("problem has no semidefinite bounds; it is unbounded or trivial")
    n, m = cp.n, cp.A.shape[0]
    x = np.zeros(n)
    y = np.zeros(m)
    S = [np.eye(cn.d, dtype=complex) for cn in cp.cones]
    Z = [np.eye(cn.d, dtype=complex) for cn in cp.cones]
    # scale the starting point with the data so both sides start comparable
    scale = max(1.0, max((np.abs(cn.const).max(initial=0) for cn in cp.cones), default=1.0))
    S = [scale * s for s in S]
    Z = [max(1.0, np.abs(cp.c).max(initial=0)) * z for z in Z]
    cnorm = 1 + np.linalg.norm(cp.c)
    hnorm = 1 + np.sqrt(sum(np.linalg.norm(cn.const) ** 2 for cn in cp.cones) + np.linalg.norm(cp.b) ** 2)
    history = []
    status = MAX_ITERATIONS
    best_res, best_it = np.inf, 0
    best_gap, gap_it = np.inf, 0
    reduced = False
    it = 0
    for it in range(1, max_iter + 1):
        rp = [cp.cone_value(k, x) - S[k] for k in range(len(S))]
        rd = cp.c - cp.A.T @ y
        for k in range(len(Z)):
            cp.cone_adjoint(k, -Z[k], rd)
        re = cp.A @ x - cp.b
        gap = sum(np.trace(S[k] @ Z[k]).real for k in range(len(S)))
        mu = gap / cp.cone_order
        pobj = cp.c @ x + cp.obj_const
        dobj = cp.b @ y - sum(np.trace(Z[k] @ cn.const).real for k, cn in enumerate(cp.cones)) + cp.obj_const
        pres = np.sqrt(sum(np.linalg.norm(r) ** 2 for r in rp) + re @ re) / hnorm
        dres = np.linalg.norm(rd) / cnorm
        relgap = gap / (1 + min(abs(pobj), abs(dobj)))
        if not np.isfinite(gap) or max(abs(pobj), abs(dobj), gap) > DIVERGENCE_LEVEL:
            # iterates run off along an unbounded ray: no feasible optimum
            status = INFEASIBLE
            break
        history.append({"iteration": it, "primal": pobj, "dual": dobj, "gap": gap, "pres": pres, "dres": dres})
        logger.debug("it %3d pobj % .10f dobj % .10f gap %.2e pres %.2e dres %.2e", it, pobj, dobj, gap, pres, dres)
        if pres < tol and dres < tol and relgap < tol:
            status = OPTIMAL
            break
        if relgap < 0.9 * best_gap:
            best_gap, gap_it = relgap, it
        elif it - gap_it >= GAP_STALL_ITERATIONS and pres < tol and dres < tol and relgap < GAP_STALL_FACTOR * tol:
            # degenerate problems can stall just short of tol; the achieved
            # gap is reported and flagged rather than iterating on rounding noise
            status = OPTIMAL
            reduced = True
            break
        res = max(pres, dres)
        if res < 0.99 * best_res:
            best_res, best_it = res, it
        elif it - best_it >= STALL_ITERATIONS and best_res > STALL_LEVEL:
            status = INFEASIBLE
            break
        # scaling and normal matrix
        scal = []
        blocks = {}
        try:
            for k, cn in enumerate(cp.cones):
                r, rinv, lam = _nt_scaling(S[k], Z[k])
                t = rinv.conj().T @ rinv
                scal.append((r, rinv, lam, t))
                cong = hermitian_basis(cn.d).congruence(t)
                for sl1, tg1, sg1 in cn.terms:
                    for sl2, tg2, sg2 in cn.terms:
                        key = (sl1.start, sl2.start)
                        add = sg1[:, None] * sg2[None, :] * cong[np.ix_(tg1, tg2)]
                        blocks[key] = blocks[key] + add if key in blocks else add
        except np.linalg.LinAlgError:
            # iterates lost definiteness: numerical breakdown
            status = INFEASIBLE if best_res > STALL_LEVEL else MAX_ITERATIONS
            break
        fac = _NormalSolver(blocks, list(cp.slices.values()), cp.A)

        def direction(ycs):
            # ycs[k]: solution of lam o (ds~ + dz~) = rhs, in scaled space
            rhs = -rd.copy()
            for k in range(len(cp.cones)):
                r, rinv, lam, t = scal[k]
                cp.cone_adjoint(k, rinv.conj().T @ ycs[k] @ rinv - t @ rp[k] @ t, rhs)
            dx, dy = fac.solve(rhs, -re)
            dS, dZ, dst, dzt = [], [], [], []
            for k in range(len(cp.cones)):
                r, rinv, lam, t = scal[k]
                ds = _herm(cp.cone_linear(k, dx) + rp[k])
                dz = _herm(rinv.conj().T @ ycs[k] @ rinv - t @ ds @ t)
                dS.append(ds)
                dZ.append(dz)
                dst.append(_herm(rinv @ ds @ rinv.conj().T))
                dzt.append(_herm(r.conj().T @ dz @ r))
            return dx, dy, dS, dZ, dst, dzt

        def step(dst, dzt):
            a = np.inf
            for k in range(len(cp.cones)):
                lam = scal[k][2]
                a = min(a, _max_step(lam, dst[k]), _max_step(lam, dzt[k]))
            return a

        lams = [sc[2] for sc in scal]
        aff = direction([-np.diag(lam).astype(complex) for lam in lams])
        a_aff = min(1.0, step(aff[4], aff[5]))
        gap_aff = sum(np.trace((S[k] + a_aff * aff[2][k]) @ (Z[k] + a_aff * aff[3][k])).real for k in range(len(S)))
        sigma = min(1.0, max(0.0, gap_aff / gap)) ** 3
        def centred(sigma, second_order):
            ycs = []
            for k, lam in enumerate(lams):
                rhs_c = sigma * mu * np.eye(lam.size) - np.diag(lam**2)
                if second_order:
                    rhs_c = rhs_c - _herm(aff[4][k] @ aff[5][k])
                ycs.append(2 * rhs_c / (lam[:, None] + lam[None, :]))
            return direction(ycs)

        dx, dy, dS, dZ, dst, dzt = centred(sigma, True)
        a = min(1.0, STEP_FRACTION * step(dst, dzt))
        if a < SHORT_STEP:
            # the second-order term spoiled centrality; fall back to a damped
            # first-order step with stronger centering
            alt = centred(max(sigma, 0.5), False)
            a_alt = min(1.0, STEP_FRACTION * step(alt[4], alt[5]))
            if a_alt > a:
                (dx, dy, dS, dZ, dst, dzt), a = alt, a_alt
        logger.debug("  a_aff %.3e sigma %.3e a %.3e", a_aff, sigma, a)
        x = x + a * dx
        y = y + a * dy
        S = [_herm(S[k] + a * dS[k]) for k in range(len(S))]
        Z = [_herm(Z[k] + a * dZ[k]) for k in range(len(Z))]
    values = cp.recover(x)
    value = float(sum(np.real(np.trace(np.asarray(c) @ values[name])) for name, c in p.objective.items()))
    last = history[-1] if history else {"gap": 0.0, "pres": 0.0, "dres": 0.0, "dual": value}
    gap = {
        "duality_gap": last["gap"],
        "primal_residual": last["pres"],
        "dual_residual": last["dres"],
        "dual_objective": last["dual"],
        "reduced_accuracy": reduced,
    }
    gap.update(certify(p, values))
    return SdpSolution(status, value, values, gap, it, history)


def certify(p, values):
    """Independent constraint check: worst bound and equality violations."""
    bound = 0.0
    for v in p.variables:
        x = values[v.name]
        if v.lower or v.upper:
            evl = np.linalg.eigvalsh(_herm(x))
            if v.lower:
                bound = max(bound, -evl[0])
            if v.upper:
                bound = max(bound, evl[-1] - 1)
    eq = 0.0
    for e in p.equalities:
        if isinstance(e, TraceEquality):
            lhs = sum(np.real(np.trace(np.asarray(a) @ values[k])) for k, a in e.coeffs.items())
            eq = max(eq, abs(lhs - e.rhs))
        else:
            acc = sum(_apply_term(t, values[t.var]) for t in e.terms)
            if e.rhs is not None:
                acc = acc - e.rhs
            eq = max(eq, np.abs(acc).max())
    return {"bound_violation": max(bound, 0.0), "equality_residual": eq}


def real_embedding(m):
    """[[Re M, -Im M], [Im M, Re M]]."""
    m = np.asarray(m)
    return np.block([[m.real, -m.imag], [m.imag, m.real]])
