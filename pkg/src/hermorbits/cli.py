"""Command-line front end.

Every command prints one JSON document (sorted keys) to stdout, or a short
text rendering with ``--human``. Exit codes: 0 when every check passes,
1 when a mathematical check fails, 2 on invalid input.
"""
import argparse
import json
import re
import sys
from pathlib import Path

from . import __version__
from .classify import build_tower, noncompact_indices, tower_report
from .errors import HermOrbitsError
from .matrices import (
    DerivationSpec,
    build_derivation,
    embed_and_check_tower,
    format_matrix,
    matrix_size,
    realize,
    root_decomposition,
    verify_algebra,
)
from .roots import FAMILIES, MIN_RANK, CartanType, build_root_system

MAX_N = 32
MAX_RANK = 12
DEFAULT_TOP_RANK = 8

EXIT_OK, EXIT_FAILED, EXIT_INVALID = 0, 1, 2


class UsageError(Exception):
    pass


def _parse_ranks(text, family):
    if text is None:
        return list(range(MIN_RANK[family], DEFAULT_TOP_RANK + 1))
    m = re.fullmatch(r"(\d+)(?:\.\.(\d+))?", text.strip())
    if not m:
        raise UsageError(f"bad rank range {text!r}; expected 'a..b' or 'a'")
    lo = int(m.group(1))
    hi = int(m.group(2) or lo)
    if lo > hi:
        raise UsageError(f"empty rank range {text!r}")
    if hi > MAX_RANK:
        raise UsageError(f"rank {hi} exceeds the cap of {MAX_RANK}")
    return list(range(lo, hi + 1))


def _parse_derivation(text, k, l):
    kind, _, arg = text.partition(":")
    if kind == "grassmann":
        if not arg.isdigit():
            raise UsageError("grassmann derivation needs a block size, e.g. grassmann:1")
        return DerivationSpec("grassmann", k, l, p=int(arg))
    if arg:
        raise UsageError(f"derivation {kind!r} takes no argument")
    return DerivationSpec(kind, k, l)


def _dump(doc):
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False)


# -- commands -------------------------------------------------------------------

def cmd_table(args):
    families = args.family or list(FAMILIES)
    rows = []
    for fam in families:
        for rank in _parse_ranks(args.ranks, fam):
            rs = build_root_system(CartanType(fam, rank))
            by_def = noncompact_indices(rs, "definition")
            by_high = noncompact_indices(rs, "highest")
            rows.append({
                "family": fam,
                "rank": rank,
                "definition": by_def,
                "highest_root": by_high,
                "agree": by_def == by_high,
            })
    doc = {
        "schema": "hermorbits.table",
        "version": 1,
        "rows": rows,
        "passed": all(r["agree"] for r in rows),
    }
    if args.human:
        lines = [f"{'type':<6} noncompact simple roots"]
        for r in rows:
            flag = "" if r["agree"] else "  DISAGREE " + str(r["highest_root"])
            lines.append(f"{r['family'] + str(r['rank']):<6} {r['definition']}{flag}")
        return doc, "\n".join(lines)
    return doc, None


def _tower_human(rep):
    lines = [f"pattern {rep['pattern']}: {rep['orbit']}  {rep['description']}",
             f"isotropy {rep['isotropy']}"]
    for lv in rep["levels"]:
        bad = [k for k, v in lv["checks"].items() if not v]
        status = "ok" if not bad else "FAIL " + ",".join(bad)
        lines.append(f"  {lv['family']}{lv['rank']}  phi={lv['phi_index']}  "
                     f"k={lv['k_type']}  |B+|={lv['dim_B_plus']}  {status}")
    return lines


def cmd_classify(args):
    tower = build_tower(args.pattern, args.depth)
    _check_tower_caps(tower, matrices=False)
    rep = tower_report(tower)
    return rep, "\n".join(_tower_human(rep)) if args.human else None


def _check_tower_caps(tower, matrices):
    for lv in tower.levels:
        if lv.rank > MAX_RANK:
            raise UsageError(f"tower reaches rank {lv.rank}, above the cap of {MAX_RANK}")
        if matrices and matrix_size(lv.family, lv.rank) > MAX_N:
            raise UsageError(f"tower reaches matrix size above the cap of {MAX_N}")


def _checks_human(rep):
    lines = []
    for c in rep["checks"]:
        mark = "PASS" if c["pass"] else "FAIL"
        lines.append(f"{mark}  {c['name']:<45} {c['max_residual']:.3e} < {c['tolerance']:.0e}")
    return lines


def cmd_tower(args):
    tower = build_tower(args.pattern, args.depth)
    _check_tower_caps(tower, matrices=args.with_matrices)
    rep = tower_report(tower)
    passed = rep["passed"]
    if args.with_matrices:
        mrep = embed_and_check_tower(tower, k=args.k, l=args.l).to_json()
        rep["matrices"] = mrep
        passed = passed and mrep["passed"]
    rep["passed"] = passed
    if args.human:
        lines = _tower_human(rep)
        if args.with_matrices:
            lines += _checks_human(rep["matrices"])
        return rep, "\n".join(lines)
    return rep, None


def cmd_verify(args):
    family = args.family
    if args.n is None and args.rank is None:
        raise UsageError("give --n or --rank")
    if args.rank is not None and args.rank > MAX_RANK:
        raise UsageError(f"rank {args.rank} exceeds the cap of {MAX_RANK}")
    if args.n is not None and args.n > MAX_N:
        raise UsageError(f"matrix size {args.n} exceeds the cap of {MAX_N}")
    spec = _parse_derivation(args.derivation, args.k, args.l)
    alg = realize(family, args.rank, n=args.n)
    if alg.n > MAX_N:
        raise UsageError(f"matrix size {alg.n} exceeds the cap of {MAX_N}")
    rep = verify_algebra(alg, spec, seed=args.seed, n_triples=args.triples).to_json()
    if args.export:
        _export(alg, spec, args.export)
    if args.human:
        head = f"{alg.name}  {spec.kind}  c = {rep['values']['c']:.12g}"
        return rep, "\n".join([head] + _checks_human(rep))
    return rep, None


def _export(alg, spec, directory):
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    (out / "derivation.txt").write_text(format_matrix(build_derivation(spec, alg.n)))
    for rv in root_decomposition(alg):
        name = "root_" + "_".join(str(x) for x in rv.root) + ".txt"
        (out / name).write_text(format_matrix(rv.matrix))


# -- parser -------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="hermorbits", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("table", help="non-compact simple roots per type and rank")
    t.add_argument("--family", action="append", choices=FAMILIES)
    t.add_argument("--ranks", help="rank range a..b (default: smallest allowed to 8)")
    t.set_defaults(func=cmd_table)

    for name, func, help_ in (("classify", cmd_classify, "classify the orbit of a tower pattern"),
                              ("tower", cmd_tower, "build a tower and check nesting")):
        c = sub.add_parser(name, help=help_)
        c.add_argument("--pattern", required=True,
                       help="A-left:p, A-middle, BD-left[:B|:D], C-right or D-right")
        c.add_argument("--depth", type=int, default=3)
        if name == "tower":
            c.add_argument("--with-matrices", action="store_true")
            c.add_argument("--k", type=float, default=1.0)
            c.add_argument("--l", type=float, default=1.0)
        c.set_defaults(func=func)

    v = sub.add_parser("verify", help="run the matrix check battery")
    v.add_argument("--family", required=True, choices=FAMILIES)
    v.add_argument("--n", type=int, help="matrix size")
    v.add_argument("--rank", type=int)
    v.add_argument("--derivation", required=True,
                   help="grassmann:p, polarized, lagrangian, complex_structure or oriented_plane")
    v.add_argument("--k", type=float, default=1.0)
    v.add_argument("--l", type=float, default=1.0)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--triples", type=int, default=200)
    v.add_argument("--export", metavar="DIR", help="write D and root vectors as text matrices")
    v.set_defaults(func=cmd_verify)

    for sp in (t, v) + tuple(sub.choices[n] for n in ("classify", "tower")):
        sp.add_argument("--human", action="store_true", help="text output instead of JSON")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        doc, text = args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except HermOrbitsError as exc:
        print(f"check failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILED
    print(text if text is not None else _dump(doc))
    if not doc.get("passed", False):
        failed = [c["name"] for c in doc.get("checks", []) if not c["pass"]]
        if failed:
            print("failed checks: " + ", ".join(failed), file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
