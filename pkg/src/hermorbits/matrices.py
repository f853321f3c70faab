"""Finite matrix realizations of gl(n), so(n), sp(2n) and numerical certificates.

Conventions
-----------
* Inner product ``<A, B> = Tr(A* B)``; every algebra basis is orthonormal for it.
* A_{n-1}: gl(n), Cartan = diagonal matrices E_jj, roots e_i - e_j in Z^n.
* C_r: sp(2r) = {a : a^T J0 + J0 a = 0}, J0 = [[0, I], [-I, 0]];
  Cartan H_j = E_jj - E_{r+j, r+j}.
* B_r, D_r: so(N) = {a : a^T + a = 0}, N = 2r+1 or 2r, coordinates laid out
  as [x_1..x_r | y_1..y_r (| z)]. T_j rotates the (x_j, y_j) plane
  (x_j -> y_j) and H_j = -i T_j, so sum(T_j) = [[0, -I], [I, 0]] is the
  distinguished complex structure.

Root coordinates of a weight vector v are (alpha(H_1), ..., alpha(H_r)) and
land exactly in the lattice used by ``hermorbits.roots``.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    DegenerateCartan,
    DegenerateSpec,
    EmbeddingMismatch,
    IncompatibleSize,
    NoConvergence,
    SpectrumNotThreePoint,
)
from .roots import LEX, MIN_ENUM_RANK, RootSystem, classical_roots, neg

VERIFICATION_SCHEMA = "hermorbits.verification"
VERIFICATION_VERSION = 1


@dataclass(frozen=True)
class Tolerances:
    residual: float = 1e-9
    rank: float = 1e-8
    weight: float = 1e-6

    @classmethod
    def from_env(cls) -> "Tolerances":
        t = cls()
        return cls(
            residual=float(os.environ.get("HERMORBITS_TOL", t.residual)),
            rank=float(os.environ.get("HERMORBITS_RANK_TOL", t.rank)),
            weight=float(os.environ.get("HERMORBITS_WEIGHT_TOL", t.weight)),
        )


TOL = Tolerances()


def bracket(x, y):
    return x @ y - y @ x


def star(x):
    return np.conj(np.swapaxes(x, -1, -2))


def hs_inner(a, b) -> complex:
    return complex(np.vdot(a, b))


def j0(r: int) -> np.ndarray:
    eye = np.eye(r)
    zero = np.zeros((r, r))
    return np.block([[zero, eye], [-eye, zero]])


# -- verification reports -----------------------------------------------------

@dataclass
class Check:
    name: str
    passed: bool
    max_residual: float
    tolerance: float

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "pass": bool(self.passed),
            "max_residual": float(self.max_residual),
            "tolerance": float(self.tolerance),
        }


@dataclass
class VerificationReport:
    algebra: dict
    checks: list = field(default_factory=list)
    values: dict = field(default_factory=dict)

    def add(self, name: str, residual: float, tolerance: float) -> Check:
        residual = float(residual)
        check = Check(name, bool(residual < tolerance), residual, tolerance)
        self.checks.append(check)
        return check

    def add_flag(self, name: str, ok: bool) -> Check:
        check = Check(name, bool(ok), 0.0 if ok else 1.0, 0.5)
        self.checks.append(check)
        return check

    def extend(self, other: "VerificationReport", prefix: str = "") -> None:
        for c in other.checks:
            self.checks.append(Check(prefix + c.name, c.passed, c.max_residual, c.tolerance))
        for k, v in other.values.items():
            self.values[prefix + k] = v

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list:
        return [c.name for c in self.checks if not c.passed]

    def to_json(self) -> dict:
        return {
            "schema": VERIFICATION_SCHEMA,
            "version": VERIFICATION_VERSION,
            "algebra": dict(self.algebra),
            "checks": [c.to_json() for c in self.checks],
            "values": dict(self.values),
            "passed": self.passed,
        }


# -- algebras -----------------------------------------------------------------

def matrix_size(family: str, rank: int) -> int:
    return {"A": rank + 1, "B": 2 * rank + 1, "C": 2 * rank, "D": 2 * rank}[family]


def algebra_dim(family: str, rank: int) -> int:
    n = matrix_size(family, rank)
    return {"A": n * n, "B": n * (n - 1) // 2, "C": rank * (2 * rank + 1),
            "D": n * (n - 1) // 2}[family]


@dataclass(eq=False)
class MatrixAlgebra:
    family: str
    rank: int
    n: int
    basis: np.ndarray   # (d, n, n), orthonormal for Tr(A* B)
    cartan: np.ndarray  # (r, n, n), Hermitian; defines the root coordinates

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def name(self) -> str:
        return {"A": "gl", "B": "so", "C": "sp", "D": "so"}[self.family] + f"({self.n})"

    def info(self) -> dict:
        return {"family": self.family, "rank": self.rank, "n": self.n}

    @cached_property
    def flat(self) -> np.ndarray:
        return self.basis.reshape(self.dim, -1)

    def coords(self, x) -> np.ndarray:
        """Coordinates of one matrix (n, n) or a stack (m, n, n)."""
        x = np.asarray(x)
        if x.ndim == 2:
            return self.flat.conj() @ x.reshape(-1)
        return x.reshape(x.shape[0], -1) @ self.flat.conj().T

    def from_coords(self, c) -> np.ndarray:
        """Matrix for a coordinate vector (d,) or a stack of columns (d, m)."""
        c = np.asarray(c)
        if c.ndim == 1:
            return np.tensordot(c, self.basis, axes=1)
        return np.tensordot(c.T, self.basis, axes=1)

    def span_residual(self, x) -> float:
        x = np.asarray(x)
        return float(np.linalg.norm(x - self.from_coords(self.coords(x))))

    def membership_residual(self, x) -> np.ndarray:
        """Size of the defining-equation violation, per matrix."""
        x = np.asarray(x, dtype=complex)
        single = x.ndim == 2
        if single:
            x = x[None]
        xt = np.swapaxes(x, -1, -2)
        if self.family == "A":
            res = np.zeros(x.shape[0])
        elif self.family == "C":
            J = j0(self.rank)
            res = np.linalg.norm((xt @ J + J @ x).reshape(x.shape[0], -1), axis=1)
        else:
            res = np.linalg.norm((xt + x).reshape(x.shape[0], -1), axis=1)
        return float(res[0]) if single else res

    def ad(self, x) -> np.ndarray:
        """Matrix of ad(x) in the orthonormal basis; column k = [x, b_k]."""
        x = np.asarray(x)
        images = x @ self.basis - self.basis @ x
        return (images.reshape(self.dim, -1) @ self.flat.conj().T).T

    @cached_property
    def cartan_onb(self) -> np.ndarray:
        """Orthonormal coordinates (d, r) spanning the Cartan subalgebra."""
        q, _ = np.linalg.qr(self.coords(self.cartan).T)
        return q


def _elementary(n, i, j):
    e = np.zeros((n, n), dtype=complex)
    e[i, j] = 1
    return e


def _gl_basis(n):
    return [_elementary(n, i, j) for i in range(n) for j in range(n)]


def _so_basis(n):
    s = 1 / np.sqrt(2)
    return [s * (_elementary(n, i, j) - _elementary(n, j, i))
            for i in range(n) for j in range(i + 1, n)]


def _sp_basis(r):
    n, s = 2 * r, 1 / np.sqrt(2)
    out = []
    for i in range(r):
        for j in range(r):
            out.append(s * (_elementary(n, i, j) - _elementary(n, r + j, r + i)))
    for i in range(r):
        for j in range(i, r):
            if i == j:
                out.append(_elementary(n, i, r + i))
                out.append(_elementary(n, r + i, i))
            else:
                out.append(s * (_elementary(n, i, r + j) + _elementary(n, j, r + i)))
                out.append(s * (_elementary(n, r + i, j) + _elementary(n, r + j, i)))
    return out


def torus_generator(n: int, r: int, j: int) -> np.ndarray:
    """Real rotation generator of the (x_j, y_j) plane in so(n), x_j -> y_j."""
    t = np.zeros((n, n), dtype=complex)
    t[r + j, j] = 1
    t[j, r + j] = -1
    return t


def _cartan(family, rank, n):
    if family == "A":
        return [_elementary(n, j, j) for j in range(n)]
    if family == "C":
        return [_elementary(n, j, j) - _elementary(n, rank + j, rank + j) for j in range(rank)]
    return [-1j * torus_generator(n, rank, j) for j in range(rank)]


def realize(family: str, rank: int | None = None, *, n: int | None = None,
            tol: Tolerances = TOL) -> MatrixAlgebra:
    """Defining-representation realization of the complexified compact algebra.

    Give either ``rank`` or the matrix size ``n``. Structural invariants are
    checked before returning.
    """
    if family not in ("A", "B", "C", "D"):
        raise IncompatibleSize(f"unknown family {family!r}")
    if rank is None and n is None:
        raise IncompatibleSize("give a rank or a matrix size")
    if rank is None:
        rank = {"A": n - 1, "B": (n - 1) // 2, "C": n // 2, "D": n // 2}[family]
    if rank < MIN_ENUM_RANK[family]:
        raise IncompatibleSize(f"{family}{rank} is not realizable")
    size = matrix_size(family, rank)
    if n is not None and n != size:
        raise IncompatibleSize(f"matrix size {n} does not fit type {family}")
    basis = {"A": lambda: _gl_basis(size), "C": lambda: _sp_basis(rank)}.get(
        family, lambda: _so_basis(size))()
    alg = MatrixAlgebra(family, rank, size, np.array(basis),
                        np.array(_cartan(family, rank, size)))
    report = structure_check(alg, tol)
    if not report.passed:
        raise RuntimeError(f"realization of {alg.name} failed {report.failures()}")
    return alg


def structure_check(alg: MatrixAlgebra, tol: Tolerances = TOL) -> VerificationReport:
    """Orthonormality, dimension, bracket closure, *-stability, Cartan sanity."""
    rep = VerificationReport(alg.info())
    gram = alg.flat.conj() @ alg.flat.T
    rep.add("basis_orthonormal", np.abs(gram - np.eye(alg.dim)).max(), tol.residual)
    rep.add_flag("dimension", alg.dim == algebra_dim(alg.family, alg.rank))
    rep.add("basis_membership", alg.membership_residual(alg.basis).max(), tol.residual)
    worst = 0.0
    for b in alg.basis:
        worst = max(worst, alg.membership_residual(b @ alg.basis - alg.basis @ b).max())
    rep.add("bracket_closure", worst, tol.residual)
    rep.add("star_stable", alg.membership_residual(star(alg.basis)).max(), tol.residual)
    H = alg.cartan
    comm = max((np.linalg.norm(bracket(a, b)) for a in H for b in H), default=0.0)
    rep.add("cartan_abelian", comm, tol.residual)
    cart_star = star(H)
    cc = alg.cartan_onb
    resid = [np.linalg.norm(c - cc @ (cc.conj().T @ c)) for c in alg.coords(cart_star)]
    rep.add("cartan_star_stable", max(resid), tol.residual)
    rep.add("cartan_membership", alg.membership_residual(H).max(), tol.residual)
    return rep


def random_element(alg: MatrixAlgebra, rng: np.random.Generator) -> np.ndarray:
    c = rng.standard_normal(alg.dim) + 1j * rng.standard_normal(alg.dim)
    return alg.from_coords(c)


def lstar_check(alg: MatrixAlgebra, n_triples: int = 200, seed: int = 0,
                tol: Tolerances = TOL) -> VerificationReport:
    """<[x,y],z> = <y,[x*,z]> on random triples, relative to |x||y||z|."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_triples):
        x, y, z = (random_element(alg, rng) for _ in range(3))
        lhs = hs_inner(bracket(x, y), z)
        rhs = hs_inner(y, bracket(star(x), z))
        scale = np.linalg.norm(x) * np.linalg.norm(y) * np.linalg.norm(z)
        worst = max(worst, abs(lhs - rhs) / scale)
    rep = VerificationReport(alg.info())
    rep.add("lstar_axiom_random", worst, tol.residual)
    rep.values["lstar_triples"] = n_triples
    return rep


def lstar_basis_check(alg: MatrixAlgebra, tol: Tolerances = TOL) -> VerificationReport:
    """The same identity on every triple of basis elements (cost ~ d^3 n^2)."""
    F = alg.flat
    worst = 0.0
    for x in alg.basis:
        left = (x @ alg.basis - alg.basis @ x).reshape(alg.dim, -1).conj() @ F.T
        xs = star(x)
        w = (xs @ alg.basis - alg.basis @ xs).reshape(alg.dim, -1)
        right = F.conj() @ w.T
        worst = max(worst, np.abs(left - right).max())
    rep = VerificationReport(alg.info())
    rep.add("lstar_axiom_basis", worst, tol.residual)
    return rep


# -- root decomposition -------------------------------------------------------

@dataclass(eq=False)
class RootVector:
    root: tuple
    matrix: np.ndarray


def _cluster(values: np.ndarray, grain: float) -> list:
    """Group indices of sorted values whose consecutive gaps are below grain."""
    order = np.argsort(values)
    groups, cur = [], [order[0]]
    for a, b in zip(order, order[1:]):
        if values[b] - values[a] < grain:
            cur.append(b)
        else:
            groups.append(cur)
            cur = [b]
    groups.append(cur)
    return groups


def _fix_phase(m: np.ndarray) -> np.ndarray:
    flat = m.reshape(-1)
    big = np.abs(flat)
    k = int(np.argmax(big > 1e-6 * big.max()))
    return m * (np.conj(flat[k]) / big[k])


def weight_spaces(alg: MatrixAlgebra, tol: Tolerances = TOL) -> dict:
    """Joint eigenspaces of ad(cartan), keyed by integer weight vectors.

    The ad(H_j) are commuting Hermitian matrices; the space is refined one
    generator at a time, grouping eigenvalues at ``tol.weight`` granularity.
    """
    buckets = [((), np.eye(alg.dim, dtype=complex))]
    for h in alg.cartan:
        A = alg.ad(h)
        refined = []
        for key, Q in buckets:
            M = Q.conj().T @ A @ Q
            w, V = np.linalg.eigh((M + M.conj().T) / 2)
            for idx in _cluster(w, tol.weight):
                val = float(np.mean(w[idx]))
                refined.append((key + (val,), Q @ V[:, idx]))
        buckets = refined
    out = {}
    for key, Q in buckets:
        weight = tuple(int(round(v)) for v in key)
        if max(abs(v - round(v)) for v in key) > tol.weight:
            raise DegenerateCartan(f"non-integral weight {key}")
        out[weight] = Q
    return out


def root_decomposition(alg: MatrixAlgebra, tol: Tolerances = TOL) -> list:
    """Unit root vectors e_alpha, with e_{-alpha} = e_alpha^* for positive alpha.

    Positive roots (lexicographic) get their phase fixed so that the first
    nonzero entry, row-major, is real positive.
    """
    spaces = weight_spaces(alg, tol)
    zero = (0,) * len(alg.cartan)
    Z = spaces.pop(zero, np.zeros((alg.dim, 0)))
    if Z.shape[1] != len(alg.cartan):
        raise DegenerateCartan(
            f"zero weight space has dimension {Z.shape[1]}, Cartan has {len(alg.cartan)}")
    out = []
    for root, Q in spaces.items():
        if Q.shape[1] != 1:
            raise DegenerateCartan(f"root {root} has multiplicity {Q.shape[1]}")
        if neg(root) not in spaces:
            raise DegenerateCartan(f"root {root} has no negative")
        if LEX.is_positive(root):
            e = _fix_phase(alg.from_coords(Q[:, 0]))
            e = e / np.linalg.norm(e)
            out.append(RootVector(root, e))
            out.append(RootVector(neg(root), star(e)))
    return sorted(out, key=lambda rv: rv.root, reverse=True)


def root_index(rvs: list) -> dict:
    return {rv.root: rv for rv in rvs}


def h_alpha(ev: RootVector) -> np.ndarray:
    return bracket(ev.matrix, star(ev.matrix))


def cartan_decomposition_check(alg: MatrixAlgebra, rvs: list, tol: Tolerances = TOL,
                               seed: int = 0) -> VerificationReport:
    rep = VerificationReport(alg.info())
    expected = classical_roots(alg.family, alg.rank)
    found = {rv.root for rv in rvs}
    rep.add_flag("root_set_matches", found == expected and len(rvs) == len(expected))
    rep.values["root_count"] = len(rvs)
    rep.values["expected_root_count"] = len(expected)

    # multiplicities from the spectrum of a generic element of ad(h), an
    # independent route from the refinement used to find the root vectors
    rng = np.random.default_rng(seed)
    t = rng.uniform(1.0, 2.0, len(alg.cartan))
    M = sum(ti * alg.ad(h) for ti, h in zip(t, alg.cartan))
    ev = np.linalg.eigvalsh((M + M.conj().T) / 2)
    levels = [np.dot(t, r) for r in expected]
    counts = [int(np.sum(np.abs(ev - lv) < tol.weight)) for lv in levels]
    zero_count = int(np.sum(np.abs(ev) < tol.weight))
    rep.add_flag("multiplicity_one", all(c == 1 for c in counts)
                 and zero_count == len(alg.cartan))
    gaps = [np.min(np.abs(np.delete(ev, np.argmin(np.abs(ev - lv))) - lv)) for lv in levels]
    rep.values["min_weight_gap"] = float(min(gaps)) if gaps else None

    Q = np.hstack([alg.cartan_onb] + [alg.coords(rv.matrix)[:, None] for rv in rvs])
    rep.add("orthonormal_decomposition", np.abs(Q.conj().T @ Q - np.eye(Q.shape[1])).max(),
            tol.residual)
    resid = np.eye(alg.dim) - Q @ Q.conj().T
    rep.add("completeness", np.linalg.norm(resid, 2), tol.residual)
    worst = 0.0
    for rv in rvs:
        for h, a in zip(alg.cartan, rv.root):
            worst = max(worst, np.linalg.norm(bracket(h, rv.matrix) - a * rv.matrix))
    rep.add("root_vector_eigen", worst, tol.residual)
    rep.add("root_vector_unit_norm",
            max(abs(np.linalg.norm(rv.matrix) - 1) for rv in rvs), tol.residual)
    return rep


def commutation_check(alg: MatrixAlgebra, rvs: list, tol: Tolerances = TOL) -> VerificationReport:
    """[V_a, V_b] inside V_{a+b} (Cartan when a+b = 0, zero when a+b is no root)."""
    idx = root_index(rvs)
    cc = alg.cartan_onb
    E = np.array([rv.matrix for rv in rvs])
    worst = {"root": 0.0, "cartan": 0.0, "zero": 0.0}
    for a in rvs:
        brs = a.matrix @ E - E @ a.matrix
        for b, v in zip(rvs, brs):
            s = tuple(x + y for x, y in zip(a.root, b.root))
            if not any(s):
                c = alg.coords(v)
                r, kind = np.linalg.norm(c - cc @ (cc.conj().T @ c)), "cartan"
            elif s in idx:
                e = idx[s].matrix
                r, kind = np.linalg.norm(v - hs_inner(e, v) * e), "root"
            else:
                r, kind = np.linalg.norm(v), "zero"
            worst[kind] = max(worst[kind], r)
    rep = VerificationReport(alg.info())
    rep.add("bracket_in_root_space", worst["root"], tol.residual)
    rep.add("bracket_opposite_in_cartan", worst["cartan"], tol.residual)
    rep.add("bracket_non_root_vanishes", worst["zero"], tol.residual)
    return rep


def h_alpha_check(alg: MatrixAlgebra, rvs: list, tol: Tolerances = TOL) -> VerificationReport:
    idx = root_index(rvs)
    cc = alg.cartan_onb
    in_cartan = antisym = pairing = 0.0
    for rv in rvs:
        h = h_alpha(rv)
        c = alg.coords(h)
        in_cartan = max(in_cartan, np.linalg.norm(c - cc @ (cc.conj().T @ c)))
        antisym = max(antisym, np.linalg.norm(h + h_alpha(idx[neg(rv.root)])))
        for H, a in zip(alg.cartan, rv.root):
            pairing = max(pairing, abs(hs_inner(h, H) - a * np.linalg.norm(rv.matrix) ** 2))
    rep = VerificationReport(alg.info())
    rep.add("h_alpha_in_cartan", in_cartan, tol.residual)
    rep.add("h_alpha_antisymmetric", antisym, tol.residual)
    rep.add("h_alpha_pairing", pairing, tol.residual)
    return rep


# -- derivations --------------------------------------------------------------

DERIVATION_KINDS = ("grassmann", "polarized", "lagrangian", "complex_structure", "oriented_plane")


@dataclass(frozen=True)
class DerivationSpec:
    """Block-diagonal skew-Hermitian operator D.

    grassmann(p)       i k on the first p coordinates, -i l on the rest (gl)
    polarized          grassmann with p = n/2 (gl)
    lagrangian         i k on H+, -i l on H- inside sp(2r)
    complex_structure  k I0 on so(2r), I0 = [[0, -I], [I, 0]]
    oriented_plane     k T_1, the rotation of one real 2-plane, on so(n)
    """

    kind: str
    k: float = 1.0
    l: float = 1.0
    p: int | None = None

    def __post_init__(self):
        if self.kind not in DERIVATION_KINDS:
            raise DegenerateSpec(f"unknown derivation kind {self.kind!r}")
        if self.kind == "grassmann" and (self.p is None or self.p < 1):
            raise DegenerateSpec("grassmann derivation needs p >= 1")
        if self.kind in ("grassmann", "polarized", "lagrangian"):
            if self.k == -self.l:
                raise DegenerateSpec(f"k = -l = {self.k} gives a degenerate derivation")
        elif self.k == 0:
            raise DegenerateSpec("k = 0 gives the zero derivation")

    @property
    def families(self) -> tuple:
        return {"grassmann": ("A",), "polarized": ("A",), "lagrangian": ("C",),
                "complex_structure": ("D",), "oriented_plane": ("B", "D")}[self.kind]

    def phi_index(self, family: str, rank: int) -> int:
        """Dynkin node of the simple root this derivation singles out."""
        if self.kind == "grassmann":
            return self.p
        if self.kind == "polarized":
            return (rank + 1) // 2
        if self.kind == "oriented_plane":
            return 1
        return rank

    def expected_c(self) -> float:
        if self.kind == "complex_structure":
            return 2 * abs(self.k)
        if self.kind == "oriented_plane":
            return abs(self.k)
        return abs(self.k + self.l)


def build_derivation(spec: DerivationSpec, n: int) -> np.ndarray:
    if spec.kind in ("grassmann", "polarized"):
        p = spec.p if spec.kind == "grassmann" else n // 2
        if spec.kind == "polarized" and n % 2:
            raise IncompatibleSize("polarized derivation needs an even size")
        if not 0 < p < n:
            raise IncompatibleSize(f"block size p={p} must satisfy 0 < p < n={n}")
        d = np.concatenate([np.full(p, 1j * spec.k), np.full(n - p, -1j * spec.l)])
        return np.diag(d)
    if spec.kind == "lagrangian":
        if n % 2:
            raise IncompatibleSize("lagrangian derivation needs an even size")
        r = n // 2
        return np.diag(np.concatenate([np.full(r, 1j * spec.k), np.full(r, -1j * spec.l)]))
    if spec.kind == "complex_structure":
        if n % 2:
            raise IncompatibleSize("complex structure needs an even size")
        r = n // 2
        return spec.k * sum(torus_generator(n, r, j) for j in range(r))
    if n < 2:
        raise IncompatibleSize("oriented plane needs n >= 2")
    return spec.k * torus_generator(n, n // 2, 0)


@dataclass(eq=False)
class DerivationAnalysis:
    c: float
    c_alpha: dict
    k_basis: np.ndarray   # matrices (dk, n, n)
    m_basis: np.ndarray
    m_plus: np.ndarray
    m_minus: np.ndarray
    set_a: frozenset
    set_b_plus: frozenset   # roots with c_alpha > 0
    set_b_minus: frozenset
    report: VerificationReport


def ad_d_analysis(alg: MatrixAlgebra, rvs: list, D, tol: Tolerances = TOL) -> DerivationAnalysis:
    D = np.asarray(D, dtype=complex)
    rep = VerificationReport(alg.info())
    rep.add("D_skew_hermitian", np.linalg.norm(D + star(D)), tol.residual)
    rep.add("cartan_in_kernel", max(np.linalg.norm(bracket(D, h)) for h in alg.cartan),
            tol.residual)
    images = D @ alg.basis - alg.basis @ D
    rep.add("derivation_preserves_algebra", alg.membership_residual(images).max(), tol.residual)

    c_alpha, eig_res, real_res = {}, 0.0, 0.0
    for rv in rvs:
        v = bracket(D, rv.matrix)
        z = hs_inner(rv.matrix, v)
        c_alpha[rv.root] = z.imag
        eig_res = max(eig_res, np.linalg.norm(v - z * rv.matrix))
        real_res = max(real_res, abs(z.real))
    rep.add("root_vector_eigen", eig_res, tol.residual)
    rep.add("c_alpha_real", real_res, tol.residual)
    rep.add("c_alpha_antisymmetric",
            max(abs(c + c_alpha[neg(r)]) for r, c in c_alpha.items()), tol.residual)

    nonzero = [abs(c) for c in c_alpha.values() if abs(c) > tol.rank]
    if not nonzero:
        raise SpectrumNotThreePoint("ad(D) vanishes on every root space")
    c = max(nonzero)
    if c - min(nonzero) > tol.residual:
        raise SpectrumNotThreePoint(
            f"ad(D) has several nonzero eigenvalue moduli {sorted(set(np.round(nonzero, 9)))}")
    rep.values["c"] = float(c)

    # independent route: the full spectrum of ad(D) on g^C
    M = alg.ad(D)
    spectrum = np.linalg.eigvalsh((-1j * M + (-1j * M).conj().T) / 2)
    targets = np.array([-c, 0.0, c])
    dist = np.abs(spectrum[:, None] - targets[None, :]).min(axis=1)
    hit = [np.any(np.abs(spectrum - t) < tol.residual) for t in targets]
    rep.add("ad_spectrum_three_point", dist.max() if all(hit) else np.inf, tol.residual)

    # each root space lies wholly in ker ad(D) or in its orthogonal
    _, s, vh = np.linalg.svd(M)
    null = vh[s < tol.rank * max(1.0, s.max())].conj().T
    cross = 0.0
    for rv in rvs:
        x = alg.coords(rv.matrix)
        proj = null @ (null.conj().T @ x)
        cross = max(cross, min(np.linalg.norm(proj), np.linalg.norm(x - proj)))
    rep.add("root_space_in_k_or_m", cross, tol.residual)

    idx = root_index(rvs)
    set_a = frozenset(r for r, v in c_alpha.items() if abs(v) <= tol.rank)
    bp = frozenset(r for r, v in c_alpha.items() if v > tol.rank)
    bm = frozenset(r for r, v in c_alpha.items() if v < -tol.rank)
    cartan_mats = alg.from_coords(alg.cartan_onb)
    k_basis = np.concatenate([cartan_mats, _mats(idx, set_a, alg.n)])
    rep.add_flag("dim_k_matches_kernel", null.shape[1] == len(k_basis))
    rep.add_flag("dim_m_twice_B_plus", len(bp) + len(bm) == 2 * len(bp))
    return DerivationAnalysis(
        c=float(c),
        c_alpha=c_alpha,
        k_basis=k_basis,
        m_basis=np.concatenate([_mats(idx, bp, alg.n), _mats(idx, bm, alg.n)]),
        m_plus=_mats(idx, bp, alg.n),
        m_minus=_mats(idx, bm, alg.n),
        set_a=set_a,
        set_b_plus=bp,
        set_b_minus=bm,
        report=rep,
    )


def _mats(idx, roots, n):
    roots = sorted(roots, reverse=True)
    if not roots:
        return np.zeros((0, n, n), dtype=complex)
    return np.array([idx[r].matrix for r in roots])


# -- subspaces ----------------------------------------------------------------

def _onb(cols: np.ndarray, cutoff: float) -> np.ndarray:
    if cols.shape[1] == 0:
        return cols
    u, s, _ = np.linalg.svd(cols, full_matrices=False)
    return u[:, s > cutoff * max(1.0, s[0])]


def subspace_distance(alg: MatrixAlgebra, U, V, tol: Tolerances = TOL) -> float:
    """Spectral norm of the difference of orthogonal projectors."""
    qu = _onb(alg.coords(np.asarray(U)).T, tol.rank) if len(U) else np.zeros((alg.dim, 0))
    qv = _onb(alg.coords(np.asarray(V)).T, tol.rank) if len(V) else np.zeros((alg.dim, 0))
    P = qu @ qu.conj().T - qv @ qv.conj().T
    return float(np.linalg.norm(P, 2))


def symmetric_pair_check(alg: MatrixAlgebra, k_basis, m_basis,
                         tol: Tolerances = TOL) -> VerificationReport:
    """Exhaustive [k,k] in k, [k,m] in m, [m,m] in k on basis pairs."""
    rep = VerificationReport(alg.info())
    K = _onb(alg.coords(np.asarray(k_basis)).T, tol.rank)
    Mq = _onb(alg.coords(np.asarray(m_basis)).T, tol.rank)
    rep.add("k_orthogonal_m", np.abs(K.conj().T @ Mq).max() if K.size and Mq.size else 0.0,
            tol.residual)
    rep.add("k_plus_m_is_g",
            np.linalg.norm(np.eye(alg.dim) - K @ K.conj().T - Mq @ Mq.conj().T, 2),
            tol.residual)
    km, mm = alg.from_coords(K), alg.from_coords(Mq)
    if km.ndim == 2:
        km = km[None]
    if mm.ndim == 2:
        mm = mm[None]

    def leak(xs, ys, away):
        worst = 0.0
        for x in xs:
            if len(ys) == 0:
                break
            c = alg.coords(x @ ys - ys @ x)
            worst = max(worst, np.abs(c @ away.conj()).max() if away.size else 0.0)
        return worst

    rep.add("bracket_kk_in_k", leak(km, km, Mq), tol.residual)
    rep.add("bracket_km_in_m", leak(km, mm, K), tol.residual)
    rep.add("bracket_mm_in_k", leak(mm, mm, Mq), tol.residual)
    return rep


def generate_module(alg: MatrixAlgebra, k_basis, seed, tol: Tolerances = TOL) -> np.ndarray:
    """Orthonormal basis of the smallest ad(k)-stable subspace containing seed."""
    s = alg.coords(np.asarray(seed, dtype=complex))
    if np.linalg.norm(s) < tol.rank:
        return np.zeros((0, alg.n, alg.n), dtype=complex)
    ads = [alg.ad(x) for x in k_basis]
    Q = (s / np.linalg.norm(s))[:, None]
    for _ in range(alg.dim):
        cand = np.hstack([Q] + [A @ Q for A in ads])
        Qn = _onb(cand, tol.rank)
        if Qn.shape[1] == Q.shape[1]:
            return np.asarray(alg.from_coords(Qn)).reshape(-1, alg.n, alg.n)
        Q = Qn
    raise NoConvergence("module generation did not stabilise")


# -- full battery ---------------------------------------------------------------

def check_derivation_family(spec: DerivationSpec, family: str) -> None:
    if family not in spec.families:
        raise IncompatibleSize(f"{spec.kind} derivation does not act on type {family}")


def verify_algebra(alg: MatrixAlgebra, spec: DerivationSpec, seed: int = 0,
                   n_triples: int = 200, tol: Tolerances = TOL) -> VerificationReport:
    """Every certificate for one algebra and one derivation."""
    from .classify import symmetric_pair  # classify does not import this module

    check_derivation_family(spec, alg.family)
    D = build_derivation(spec, alg.n)
    rep = VerificationReport(alg.info())
    rep.values["derivation"] = {"kind": spec.kind, "k": spec.k, "l": spec.l, "p": spec.p}
    rep.extend(structure_check(alg, tol), "structure.")
    rep.extend(lstar_check(alg, n_triples, seed, tol), "lstar.")
    rvs = root_decomposition(alg, tol)
    rep.extend(commutation_check(alg, rvs, tol), "commutation.")
    rep.extend(cartan_decomposition_check(alg, rvs, tol, seed), "decomposition.")
    rep.extend(h_alpha_check(alg, rvs, tol), "coroots.")
    an = ad_d_analysis(alg, rvs, D, tol)
    rep.extend(an.report, "derivation.")
    rep.add("derivation.c_expected", abs(an.c - spec.expected_c()), tol.residual)
    rep.values["c"] = an.c

    rs = RootSystem(classical_roots(alg.family, alg.rank))
    phi_idx = spec.phi_index(alg.family, alg.rank)
    desc = symmetric_pair(rs, rs.simple[phi_idx - 1])
    phi_sign = 1 if an.c_alpha[desc.phi] > 0 else -1
    plus = an.set_b_plus if phi_sign > 0 else an.set_b_minus
    rep.add_flag("split.A_matches_phi_coefficient_zero", an.set_a == desc.set_a)
    rep.add_flag("split.B_plus_matches", plus == desc.set_b_plus)
    rep.add_flag("split.dim_k", len(an.k_basis) == len(alg.cartan) + len(desc.set_a))
    rep.add_flag("split.dim_m", len(an.m_basis) == 2 * len(desc.set_b_plus))
    rep.values["phi_index"] = phi_idx
    rep.values["k_type"] = desc.k_type

    e_phi = root_index(rvs)[desc.phi].matrix
    target = an.m_plus if phi_sign > 0 else an.m_minus
    gen = generate_module(alg, an.k_basis, e_phi, tol)
    rep.add("module.generated_by_e_phi", subspace_distance(alg, gen, target, tol), tol.rank)
    rep.extend(symmetric_pair_check(alg, an.k_basis, an.m_basis, tol), "pair.")
    return rep


# -- towers of matrix algebras ------------------------------------------------

def derivation_for_pair(desc, k: float = 1.0, l: float = 1.0) -> DerivationSpec:
    """The block derivation realizing a root-level symmetric pair."""
    ct = desc.system.ctype
    family, rank, idx = ct.family, ct.rank, desc.phi_index
    if family == "A":
        return DerivationSpec("grassmann", k, l, p=idx)
    if family in ("B", "D") and idx == 1:
        return DerivationSpec("oriented_plane", k, l)
    if family == "C" and idx == rank:
        return DerivationSpec("lagrangian", k, l)
    if family == "D" and idx == rank:
        return DerivationSpec("complex_structure", k, l)
    raise DegenerateSpec(f"no block derivation for node {idx} of {family}{rank}")


def inclusion_matrix(family: str, rank: int, rank_next: int, embedding: tuple) -> np.ndarray:
    """Isometry C^N -> C^N' induced by a coordinate embedding of root lattices."""
    n, n2 = matrix_size(family, rank), matrix_size(family, rank_next)
    if family == "A":
        rows = list(embedding)
    else:
        rows = list(embedding) + [rank_next + e for e in embedding]
        if family == "B":
            rows.append(2 * rank_next)
    P = np.zeros((n2, n))
    for col, row in enumerate(rows):
        P[row, col] = 1.0
    return P


@dataclass(eq=False)
class _Level:
    alg: MatrixAlgebra
    analysis: DerivationAnalysis


def embed_and_check_tower(tower, sizes=None, k: float = 1.0, l: float = 1.0,
                          tol: Tolerances = TOL) -> VerificationReport:
    """Realize every level of a root tower and certify the corner embeddings."""
    from .classify import level_checks

    natural = [matrix_size(lv.family, lv.rank) for lv in tower.levels]
    if sizes is not None and list(sizes) != natural:
        raise EmbeddingMismatch(f"sizes {list(sizes)} do not match the tower levels {natural}")
    rep = VerificationReport({"pattern": str(tower.pattern) if tower.pattern else None,
                              "sizes": natural})
    levels = []
    for j, lv in enumerate(tower.levels):
        desc = lv.pair
        spec = derivation_for_pair(desc, k, l)
        alg = realize(lv.family, lv.rank, tol=tol)
        rvs = root_decomposition(alg, tol)
        an = ad_d_analysis(alg, rvs, build_derivation(spec, alg.n), tol)
        pre = f"level{j}."
        rep.extend(an.report, pre)
        phi_sign = 1 if an.c_alpha[desc.phi] > 0 else -1
        plus = an.set_b_plus if phi_sign > 0 else an.set_b_minus
        rep.add_flag(pre + "split_matches_roots", an.set_a == desc.set_a and plus == desc.set_b_plus)
        rep.extend(symmetric_pair_check(alg, an.k_basis, an.m_basis, tol), pre)
        levels.append(_Level(alg, an))

    root_checks = level_checks(tower)
    for j in range(len(levels) - 1):
        small, big = levels[j], levels[j + 1]
        emb = tower.levels[j].embedding
        pre = f"embed{j}."
        rep.add_flag(pre + "root_level_nested", bool(root_checks[j].get("nested")))
        if emb is None:
            raise EmbeddingMismatch(f"level {j} has no embedding", rep)
        P = inclusion_matrix(small.alg.family, small.alg.rank, big.alg.rank, emb)

        def inc(xs):
            return P @ np.asarray(xs) @ P.T

        g_img = big.alg.coords(inc(small.alg.basis)).T
        rep.add(pre + "g_in_next", max(big.alg.span_residual(x) for x in inc(small.alg.basis)),
                tol.residual)
        Kb = _onb(big.alg.coords(big.analysis.k_basis).T, tol.rank)
        Mb = _onb(big.alg.coords(big.analysis.m_basis).T, tol.rank)
        k_img = big.alg.coords(inc(small.analysis.k_basis)).T
        m_img = big.alg.coords(inc(small.analysis.m_basis)).T
        rep.add(pre + "k_in_next_k", np.linalg.norm(k_img - Kb @ (Kb.conj().T @ k_img), 2),
                tol.residual)
        rep.add(pre + "m_in_next_m", np.linalg.norm(m_img - Mb @ (Mb.conj().T @ m_img), 2),
                tol.residual)
        # k_n against k_{n+1} intersected with the image of g_n
        Qg = _onb(g_img, tol.rank)
        off = Qg - Kb @ (Kb.conj().T @ Qg)
        _, s, vh = np.linalg.svd(off)
        s = np.concatenate([s, np.zeros(Qg.shape[1] - len(s))])
        inter = Qg @ vh[s < tol.rank].conj().T
        Qk = _onb(k_img, tol.rank)
        dist = np.linalg.norm(inter @ inter.conj().T - Qk @ Qk.conj().T, 2)
        rep.add(pre + "k_equals_intersection", dist, tol.rank)
        if not all(rep[pre + name].passed for name in ("g_in_next", "k_in_next_k", "m_in_next_m")):
            raise EmbeddingMismatch(f"level {j} does not embed into level {j + 1}", rep)
    return rep


# -- plain-text matrices --------------------------------------------------------

def _entry(z: complex) -> str:
    im = repr(float(z.imag))
    return f"{float(z.real)!r}{im if im[0] == '-' else '+' + im}i"


def format_matrix(m) -> str:
    """Rows of whitespace-separated ``re+imi`` entries; floats round-trip exactly."""
    rows = [" ".join(_entry(z) for z in row) for row in np.asarray(m, dtype=complex)]
    return "\n".join(rows) + "\n"


def parse_matrix(text: str) -> np.ndarray:
    rows = []
    for line in text.strip().splitlines():
        row = []
        for tok in line.split():
            if not tok.endswith("i") or "j" in tok:
                raise ValueError(f"bad complex entry {tok!r}")
            try:
                row.append(complex(tok[:-1] + "j"))
            except ValueError:
                raise ValueError(f"bad complex entry {tok!r}") from None
        rows.append(row)
    if len({len(r) for r in rows}) > 1:
        raise ValueError("ragged matrix")
    return np.array(rows, dtype=complex)
