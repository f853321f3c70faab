"""Non-compact simple roots, symmetric pairs, towers and orbit families."""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from itertools import product

from .errors import BadPattern, NotNonCompact, UnrecognizedPattern
from .roots import (
    CartanType,
    Ordering,
    Root,
    RootSystem,
    add,
    build_root_system,
    dot,
    fundamental_coweight,
    highest_root,
    is_indecomposable,
    is_root_system,
)

REPORT_SCHEMA = "hermorbits.classification"
REPORT_VERSION = 1


def phi_coefficients(rs: RootSystem, phi: Root) -> dict:
    i = rs.simple.index(tuple(phi))
    return {r: c[i] for r, c in rs.coefficients.items()}


def noncompact_simple_roots_by_definition(rs: RootSystem) -> list:
    """Simple roots whose coefficient in every root is -1, 0 or +1."""
    coeffs = rs.coefficients.values()
    return [phi for i, phi in enumerate(rs.simple)
            if all(abs(c[i]) <= 1 for c in coeffs)]


def noncompact_simple_roots_by_highest(rs: RootSystem) -> list:
    """Simple roots appearing with coefficient exactly 1 in the highest root."""
    top = rs.coefficients[highest_root(rs)]
    return [phi for phi, c in zip(rs.simple, top) if c == 1]


def noncompact_indices(rs: RootSystem, method: str = "definition") -> list:
    finder = {
        "definition": noncompact_simple_roots_by_definition,
        "highest": noncompact_simple_roots_by_highest,
    }[method]
    return [rs.index_of(phi) for phi in finder(rs)]


def dynkin_components(simple: list) -> list:
    """Cartan types of the connected components of a set of simple roots."""
    simple = [tuple(s) for s in simple]
    seen, out = set(), []
    for start in simple:
        if start in seen:
            continue
        comp, stack = [], [start]
        seen.add(start)
        while stack:
            s = stack.pop()
            comp.append(s)
            for t in simple:
                if t not in seen and dot(s, t) != 0:
                    seen.add(t)
                    stack.append(t)
        out.append(_component_type(comp))
    return out


def _component_type(comp: list) -> str:
    m = len(comp)
    if m == 1:
        return "A1"
    degree = {s: sum(1 for t in comp if t != s and dot(s, t) != 0) for s in comp}
    if max(degree.values()) >= 3:
        return f"D{m}"
    lengths = [dot(s, s) for s in comp]
    if len(set(lengths)) == 1:
        return f"A{m}"
    short = min(lengths)
    n_short = lengths.count(short)
    if m == 2 or n_short == 1:
        return f"B{m}"
    if n_short == m - 1:
        return f"C{m}"
    raise ValueError(f"not a classical Dynkin diagram: {comp}")


@dataclass(frozen=True)
class SymmetricPairDescriptor:
    system: RootSystem
    phi: Root
    set_a: frozenset
    set_b: frozenset
    set_b_plus: frozenset
    set_b_minus: frozenset
    k_semisimple: tuple
    center_dim: int = 1

    @property
    def phi_index(self) -> int:
        return self.system.index_of(self.phi)

    @property
    def k_type(self) -> str:
        return " x ".join(list(self.k_semisimple) + ["u(1)"] * self.center_dim)

    @cached_property
    def closure_checks(self) -> dict:
        roots = self.system.roots
        a, b = self.set_a, self.set_b

        def closed(xs, ys, target):
            for x, y in product(xs, ys):
                s = add(x, y)
                if s in roots and s not in target:
                    return False
            return True

        return {
            "partition": (a | b) == roots and not (a & b),
            "phi_coefficients_bounded": all(
                abs(c) <= 1 for c in phi_coefficients(self.system, self.phi).values()),
            "closure_AA": closed(a, a, a),
            "closure_AB": closed(a, b, b),
            "closure_BB": closed(b, b, a),
        }

    @property
    def valid(self) -> bool:
        return all(self.closure_checks.values())


def symmetric_pair(rs: RootSystem, phi: Root) -> SymmetricPairDescriptor:
    """Split the roots by their phi-coefficient (Dynkin node removal)."""
    phi = tuple(phi)
    if phi not in rs.simple:
        raise NotNonCompact(phi, "not a simple root of the system")
    coeff = phi_coefficients(rs, phi)
    bad = [r for r, c in coeff.items() if abs(c) > 1]
    if bad:
        worst = max(bad, key=lambda r: abs(coeff[r]))
        raise NotNonCompact(phi, f"root {worst} has coefficient {coeff[worst]}")
    rest = [s for s in rs.simple if s != phi]
    desc = SymmetricPairDescriptor(
        system=rs,
        phi=phi,
        set_a=frozenset(r for r, c in coeff.items() if c == 0),
        set_b=frozenset(r for r, c in coeff.items() if c != 0),
        set_b_plus=frozenset(r for r, c in coeff.items() if c == 1),
        set_b_minus=frozenset(r for r, c in coeff.items() if c == -1),
        k_semisimple=tuple(dynkin_components(rest)),
    )
    if not desc.valid:
        failed = [k for k, v in desc.closure_checks.items() if not v]
        raise NotNonCompact(phi, f"failed {failed}")
    return desc


def unique_phi_check(desc: SymmetricPairDescriptor, orderings: list) -> bool:
    """True iff each ordering has exactly one simple root inside B.

    Only orderings whose positive cone contains all of B+ (or all of B-)
    can pass; an ordering that mixes signs on B may pick two simple roots
    from B.
    """
    for ordering in orderings:
        simple = desc.system.with_ordering(ordering).simple
        if sum(1 for s in simple if s in desc.set_b) != 1:
            return False
    return True


def grading_weight(desc: SymmetricPairDescriptor) -> tuple:
    """Integer vector pairing positively with phi and to zero with the other simple roots."""
    return fundamental_coweight(desc.system.simple, desc.phi_index - 1)


# -- towers -------------------------------------------------------------------

PATTERN_KINDS = ("A_left", "A_middle", "BD_left", "C_right", "D_right")
_PATTERN_RE = re.compile(r"^(A[-_]left|A[-_]middle|BD[-_]left|C[-_]right|D[-_]right)(?::(\w+))?$")


@dataclass(frozen=True)
class Pattern:
    kind: str
    p: int | None = None
    bd_family: str = "B"

    def __post_init__(self):
        if self.kind not in PATTERN_KINDS:
            raise BadPattern(f"unknown pattern {self.kind!r}")
        if self.kind == "A_left":
            if not isinstance(self.p, int) or self.p < 1:
                raise BadPattern("A_left needs a block size p >= 1")
        elif self.p is not None:
            raise BadPattern(f"{self.kind} takes no block size")
        if self.bd_family not in ("B", "D"):
            raise BadPattern("BD_left family must be B or D")

    @classmethod
    def parse(cls, text: str) -> "Pattern":
        m = _PATTERN_RE.match(text.strip())
        if not m:
            raise BadPattern(f"cannot parse pattern {text!r}")
        kind = m.group(1).replace("-", "_")
        arg = m.group(2)
        if kind == "A_left":
            if arg is None or not arg.isdigit():
                raise BadPattern("A-left needs a block size, e.g. A-left:2")
            return cls(kind, int(arg))
        if kind == "BD_left":
            return cls(kind, bd_family=(arg or "B").upper())
        if arg is not None:
            raise BadPattern(f"{kind} takes no argument")
        return cls(kind)

    def __str__(self):
        name = self.kind.replace("_", "-")
        if self.kind == "A_left":
            return f"{name}:{self.p}"
        if self.kind == "BD_left" and self.bd_family == "D":
            return f"{name}:D"
        return name

    def level(self, j: int) -> tuple:
        """(family, rank, phi index, embedding into level j+1) for level j."""
        if self.kind == "A_left":
            rank = self.p + 1 + j
            return "A", rank, self.p, tuple(range(rank + 1))
        if self.kind == "A_middle":
            rank = 2 * j + 3
            return "A", rank, j + 2, tuple(i + 1 for i in range(rank + 1))
        if self.kind == "BD_left":
            rank = (2 if self.bd_family == "B" else 4) + j
            return self.bd_family, rank, 1, tuple(range(rank))
        rank = (3 if self.kind == "C_right" else 4) + j
        family = self.kind[0]
        return family, rank, rank, tuple(i + 1 for i in range(rank))


@dataclass(frozen=True)
class TowerLevel:
    pair: SymmetricPairDescriptor
    # coordinate map into the next level's lattice; None on the last level
    embedding: tuple | None = None

    @property
    def family(self):
        ct = self.pair.system.ctype
        return ct.family if ct else None

    @property
    def rank(self):
        return self.pair.system.rank


@dataclass(frozen=True)
class TowerSpec:
    levels: tuple
    pattern: Pattern | None = None


def embed_root(root: Root, embedding: tuple, dim: int) -> Root:
    v = [0] * dim
    for i, x in enumerate(root):
        v[embedding[i]] = x
    return tuple(v)


def build_tower(pattern: Pattern | str, depth: int) -> TowerSpec:
    if isinstance(pattern, str):
        pattern = Pattern.parse(pattern)
    if not isinstance(depth, int) or depth < 1:
        raise BadPattern("depth must be >= 1")
    levels = []
    for j in range(depth):
        family, rank, phi_index, embedding = pattern.level(j)
        rs = build_root_system(CartanType(family, rank))
        desc = symmetric_pair(rs, rs.simple[phi_index - 1])
        levels.append(TowerLevel(desc, embedding if j < depth - 1 else None))
    return TowerSpec(tuple(levels), pattern)


def level_checks(tower: TowerSpec) -> list:
    """Per-level boolean checks, including nesting into the next level."""
    out = []
    for j, level in enumerate(tower.levels):
        desc = level.pair
        rs = desc.system
        checks = {
            "indecomposable": is_indecomposable(rs.roots),
            "root_system": is_root_system(rs.roots, rs),
            "phi_noncompact_definition": desc.phi in noncompact_simple_roots_by_definition(rs),
            "phi_noncompact_highest": desc.phi in noncompact_simple_roots_by_highest(rs),
            "unique_phi": unique_phi_check(desc, [rs.ordering, Ordering("reversed")]),
        }
        checks.update(desc.closure_checks)
        if j + 1 < len(tower.levels):
            nxt = tower.levels[j + 1].pair
            if level.embedding is None:
                checks["nested"] = False
                checks["phi_preserved"] = False
            else:
                image = {embed_root(r, level.embedding, nxt.system.dim) for r in rs.roots}
                checks["nested"] = (
                    len(image) == len(rs.roots)
                    and image <= nxt.system.roots
                    and is_root_system(image, nxt.system)
                )
                checks["phi_preserved"] = (
                    embed_root(desc.phi, level.embedding, nxt.system.dim) == nxt.phi
                    and nxt.phi in noncompact_simple_roots_by_definition(nxt.system)
                )
                checks["k_nested"] = {
                    embed_root(r, level.embedding, nxt.system.dim) for r in desc.set_a
                } <= nxt.set_a
        out.append(checks)
    return out


# -- orbit families -----------------------------------------------------------

_FAMILY_TABLE = {
    "GrP": (
        "Gr^(p) = U₂(H)/(U₂(H_p)×U₂(H_p^⊥))",
        "U₂(H_p) × U₂(H_p^⊥)",
        "finite-rank Grassmannian",
    ),
    "GrRes0": (
        "Gr_res^0 = U₂(H)/(U₂(H₊)×U₂(H₋))",
        "U₂(H₊) × U₂(H₋)",
        "restricted Grassmannian, identity component",
    ),
    "GrOr2": (
        "Gr_or^(2) = O₂⁺(H_R)/(SO((H₂)_R)×O₂⁺((H₂)_R^⊥))",
        "SO((H₂)_R) × O₂⁺((H₂)_R^⊥)",
        "oriented 2-plane Grassmannian",
    ),
    "ZH": (
        "Z(H) = O₂⁺(H^R)/U₂(H)",
        "U₂(H)",
        "orthogonal complex structures",
    ),
    "LH": (
        "L(H) = Sp₂(H)/U₂(H₊)",
        "U₂(H₊)",
        "Lagrangian Grassmannian",
    ),
}


@dataclass(frozen=True)
class OrbitFamily:
    tag: str
    p: int | None = None

    def __post_init__(self):
        if self.tag not in _FAMILY_TABLE:
            raise UnrecognizedPattern(f"unknown orbit family {self.tag!r}")
        if (self.tag == "GrP") != (self.p is not None):
            raise UnrecognizedPattern("only GrP carries a block size")

    @property
    def label(self) -> str:
        return f"GrP({self.p})" if self.tag == "GrP" else self.tag

    @property
    def description(self) -> str:
        return _FAMILY_TABLE[self.tag][0]

    @property
    def isotropy(self) -> str:
        return _FAMILY_TABLE[self.tag][1]

    @property
    def name(self) -> str:
        return _FAMILY_TABLE[self.tag][2]


_PATTERN_TO_FAMILY = {
    "A_middle": "GrRes0",
    "BD_left": "GrOr2",
    "D_right": "ZH",
    "C_right": "LH",
}


def infer_family(tower: TowerSpec) -> OrbitFamily | None:
    """Read the orbit family off the levels alone; None when ambiguous."""
    fams = {lv.family for lv in tower.levels}
    if len(fams) != 1 or None in fams:
        return None
    fam = fams.pop()
    sizes = [(lv.pair.phi_index, lv.rank + 1 - lv.pair.phi_index) for lv in tower.levels]
    last = tower.levels[-1]
    if fam == "A":
        if len(sizes) < 2:
            return None
        left = {s[0] for s in sizes}
        right = {s[1] for s in sizes}
        if len(left) == 1 and len(right) > 1:
            return OrbitFamily("GrP", sizes[0][0])
        if len(right) == 1 and len(left) > 1:
            return OrbitFamily("GrP", sizes[0][1])
        if len(left) > 1 and len(right) > 1:
            return OrbitFamily("GrRes0")
        return None
    idx = last.pair.phi_index
    if fam in ("B", "D") and idx == 1:
        return OrbitFamily("GrOr2")
    if fam == "D" and idx >= last.rank - 1:
        return OrbitFamily("ZH")
    if fam == "C" and idx == last.rank:
        return OrbitFamily("LH")
    return None


def classify_orbit(tower: TowerSpec) -> OrbitFamily:
    """Orbit family for a tower, keyed on its declared pattern."""
    if tower.pattern is None:
        fam = infer_family(tower)
        if fam is None:
            raise UnrecognizedPattern("tower has no pattern and its levels are ambiguous")
        return fam
    pat = tower.pattern
    if pat.kind == "A_left":
        declared = OrbitFamily("GrP", pat.p)
    elif pat.kind in _PATTERN_TO_FAMILY:
        declared = OrbitFamily(_PATTERN_TO_FAMILY[pat.kind])
    else:
        raise UnrecognizedPattern(str(pat))
    inferred = infer_family(tower)
    if inferred is not None and inferred != declared:
        raise UnrecognizedPattern(
            f"pattern {pat} declares {declared.label} but levels look like {inferred.label}")
    return declared


def tower_report(tower: TowerSpec) -> dict:
    orbit = classify_orbit(tower)
    levels = []
    for level, checks in zip(tower.levels, level_checks(tower)):
        levels.append({
            "family": level.family,
            "rank": level.rank,
            "phi_index": level.pair.phi_index,
            "k_type": level.pair.k_type,
            "dim_B_plus": len(level.pair.set_b_plus),
            "checks": checks,
        })
    return {
        "schema": REPORT_SCHEMA,
        "version": REPORT_VERSION,
        "pattern": str(tower.pattern) if tower.pattern else None,
        "levels": levels,
        "orbit": orbit.label,
        "description": orbit.description,
        "isotropy": orbit.isotropy,
        "passed": all(all(c.values()) for c in (lv["checks"] for lv in levels)),
    }
