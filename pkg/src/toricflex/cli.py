"""Command-line front end.

    toricflex toric info|roots|act|solve|verify|flex|ml ...
    toricflex susp build|act|solve|verify|flex ...
    toricflex catalog [NAME]

Varieties are JSON files, inline JSON or ``catalog:NAME``. Every command
prints canonical JSON (sorted keys) to stdout or to ``--out``.
"""

import argparse
import sys

from . import serialize as io
from .demazure import enumerate_roots
from .errors import ToricflexError
from .suspension import (
    Letter,
    SuspensionVariety,
    SuspensionWord,
    build_suspension,
    check_lnd,
    field_for,
    flexibility_matrix,
    replay_residual,
    standard_tuple as susp_standard,
    suspension_solve,
)
from .toric import ToricVariety, flexibility_certificate, ml_trivial_certificate
from .transitivity import AutomorphismWord, RATIONAL_NOTE, solve, standard_tuple


class UsageError(ToricflexError):
    pass


def _emit(obj, out):
    text = io.dumps(obj)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _toric(ref):
    X = io.variety_from_json(io.load_json_source(ref))
    if not isinstance(X, ToricVariety):
        raise UsageError(f"{ref} is not a toric variety")
    return X


def _susp(ref):
    X = io.variety_from_json(io.load_json_source(ref))
    if not isinstance(X, SuspensionVariety):
        raise UsageError(f"{ref} is not a suspension")
    return X


def _letters(args):
    if args.word:
        return io.load_json_source(args.word)
    if args.letter:
        return [io.load_json_source(args.letter)]
    raise UsageError("give --letter or --word")


# toric


def toric_info(args):
    X = _toric(args.variety)
    faces = []
    for fd in X.faces:
        faces.append({
            "index": fd.index,
            "dim": fd.dim,
            "dual_rays": sorted(fd.face.rays),
            "sigma_rays": list(fd.xi),
            "smooth": fd.smooth,
        })
    roots = enumerate_roots(X, args.bound)
    ml = ml_trivial_certificate(X)
    return {
        "name": X.name,
        "rank": X.n,
        "rays": [list(r) for r in X.rays],
        "dual_rays": [list(r) for r in X.dual.rays],
        "hilbert_basis": [list(h) for h in X.hilb],
        "faces": faces,
        "ray_basis": list(X.ray_basis),
        "kappa": X.kappa,
        "roots": {"bound": args.bound, "count": len(roots)},
        "ml_trivial": ml.check(X),
    }


def toric_roots(args):
    X = _toric(args.variety)
    return {"bound": args.bound, "roots": [r.to_json() for r in enumerate_roots(X, args.bound)]}


def toric_act(args):
    X = _toric(args.variety)
    raw = io.points_list(io.load_json_source(args.points))
    pts = [io.toric_point_from_json(X, p) for p in raw]
    word = AutomorphismWord.from_json(_letters(args), X)
    images = word.replay(X, pts)
    out = [io.toric_point_to_json(X, q, io.point_form(r)) for q, r in zip(images, raw)]
    return out


def _toric_inputs(args, X):
    raw = io.points_list(io.load_json_source(args.points))
    pts = [io.toric_point_from_json(X, p) for p in raw]
    traw, tg = None, None
    if args.targets:
        traw = io.points_list(io.load_json_source(args.targets))
        tg = [io.toric_point_from_json(X, p) for p in traw]
    return raw, pts, traw, tg


def toric_solve(args):
    X = _toric(args.variety)
    raw, pts, traw, tg = _toric_inputs(args, X)
    sol = solve(X, pts, tg)
    return io.certificate(
        "toric-solve",
        X.to_json(),
        raw,
        traw,
        sol.word.to_json(),
        {"counts": sol.word.stage_counts(), "basis": list(sol.basis), "kappa": sol.kappa},
        True,
        extra={"note": RATIONAL_NOTE},
    )


def _check_hashes(cert):
    inputs = cert.get("inputs", {})
    bad = [k for k, v in inputs.items() if io.digest(v) != cert.get("hashes", {}).get(k)]
    return bad


def toric_verify(args):
    cert = io.load_json_source(args.certificate)
    if cert.get("kind") != "toric-solve":
        raise UsageError("not a toric certificate")
    report = {"hash_mismatch": _check_hashes(cert)}
    inputs = cert["inputs"]
    X = io.variety_from_json(inputs["variety"])
    pts = [io.toric_point_from_json(X, p) for p in inputs["points"]]
    if inputs.get("targets") is not None:
        tg = [io.toric_point_from_json(X, p) for p in inputs["targets"]]
    else:
        tg = standard_tuple(X, len(pts))
    word = AutomorphismWord.from_json(cert["word"], X)
    images = word.replay(X, pts)
    report["letters"] = len(word)
    report["reached"] = images == list(tg)
    report["verdict"] = report["reached"] and not report["hash_mismatch"]
    return report


def toric_flex(args):
    X = _toric(args.variety)
    p = io.toric_point_from_json(X, io.load_json_source(args.point)) if args.point else None
    cert = flexibility_certificate(X, p)
    return {
        "point": io.toric_point_to_json(X, cert.point),
        "roots": [r.to_json() for r in cert.roots],
        "matrix": [[io.scalar_to_json(x) for x in row] for row in cert.matrix],
        "rank": cert.rank,
        "verdict": cert.check(X),
    }


def toric_ml(args):
    X = _toric(args.variety)
    cert = ml_trivial_certificate(X)
    return {
        "facets": list(cert.facets),
        "kernel_ranks": list(cert.kernel_ranks),
        "intersection": [list(v) for v in cert.intersection],
        "common_face": cert.common_face,
        "verdict": cert.check(X),
    }


# suspensions


def susp_build(args):
    if args.variety:
        X = _susp(args.variety)
    else:
        if not args.f or args.k is None:
            raise UsageError("give a variety or --k with one or more --f")
        X = SuspensionVariety(args.k, [])
        for f in args.f:
            X = build_suspension(X, f)
    out = X.to_json()
    out.update({
        "level": X.level,
        "dim": X.dim,
        "coordinates": [str(g) for g in X.gens],
        "relations": [str(r).replace("**", "^") for r in X.relations],
    })
    return out


def _susp_points(X, ref, mode, tol):
    return [io.susp_point_from_json(X, p, mode, tol) for p in io.points_list(io.load_json_source(ref))]


def susp_act(args):
    X = _susp(args.variety)
    F = field_for(args.mode, args.tol)
    pts = _susp_points(X, args.points, args.mode, args.tol)
    word = SuspensionWord.from_json(_letters(args), X, F)
    return [io.susp_point_to_json(p) for p in word.replay(X, pts)]


def susp_solve(args):
    X = _susp(args.variety)
    raw = io.points_list(io.load_json_source(args.points))
    traw = io.points_list(io.load_json_source(args.targets)) if args.targets else None
    pts = [io.susp_point_from_json(X, p, args.mode, args.tol) for p in raw]
    tg = [io.susp_point_from_json(X, p, args.mode, args.tol) for p in traw] if traw is not None else None
    sol = suspension_solve(X, pts, tg, args.mode, args.tol)
    stages = {"counts": sol.word.step_counts(), "postconditions": sol.postconditions}
    return io.certificate(
        "suspension-solve",
        X.to_json(),
        raw,
        traw,
        sol.word.to_json(),
        stages,
        True,
        mode=args.mode,
        extra={"tolerance": args.tol, "residual": sol.residual},
    )


def susp_verify(args):
    cert = io.load_json_source(args.certificate)
    if cert.get("kind") != "suspension-solve":
        raise UsageError("not a suspension certificate")
    mode = cert.get("mode", "exact")
    tol = float(cert.get("tolerance", args.tol))
    F = field_for(mode, tol)
    report = {"hash_mismatch": _check_hashes(cert)}
    inputs = cert["inputs"]
    X = io.variety_from_json(inputs["variety"])
    pts = [io.susp_point_from_json(X, p, mode, tol) for p in inputs["points"]]
    if inputs.get("targets") is not None:
        tg = [io.susp_point_from_json(X, p, mode, tol) for p in inputs["targets"]]
    else:
        tg = [tuple(F.convert(x) for x in S) for S in susp_standard(X, len(pts))]
    word = SuspensionWord.from_json(cert["word"], X, F)
    for D in {g.derivation for g in word.letters}:
        check_lnd(D, X)
    residual = replay_residual(X, word, pts, tg)
    report["letters"] = len(word)
    report["residual"] = residual
    report["reached"] = residual == 0 if F.exact else residual <= tol
    report["verdict"] = report["reached"] and not report["hash_mismatch"]
    return report


def susp_flex(args):
    X = _susp(args.variety)
    F = field_for(args.mode, args.tol)
    p = io.susp_point_from_json(X, io.load_json_source(args.point), args.mode, args.tol)
    cert = flexibility_matrix(X, p, F)
    return {
        "point": io.susp_point_to_json(cert.point),
        "derivations": [Letter(D, F.convert(1)).to_json() for D in cert.derivations],
        "matrix": [[io.scalar_to_json(x) for x in row] for row in cert.matrix],
        "rank": cert.rank,
        "verdict": cert.check(X, F),
    }


def catalog(args):
    if args.name:
        return io.catalog_entry(args.name)
    return {"catalog": io.catalog_names()}


# parser


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--bound", type=int, default=3, help="sup-norm bound for root enumeration")
    common.add_argument("--mode", choices=["exact", "numeric"], default="exact")
    common.add_argument("--tol", type=float, default=1e-9)
    common.add_argument("--seed", type=int, default=0, help="reserved; no effect on results")
    common.add_argument("--out", help="write the JSON result here instead of stdout")

    parser = argparse.ArgumentParser(prog="toricflex", description=__doc__.splitlines()[0])
    top = parser.add_subparsers(dest="group", required=True)

    toric = top.add_parser("toric", help="affine toric varieties").add_subparsers(dest="cmd", required=True)
    for name, fn in (("info", toric_info), ("roots", toric_roots), ("flex", toric_flex), ("ml", toric_ml)):
        p = toric.add_parser(name, parents=[common])
        p.add_argument("variety")
        if name == "flex":
            p.add_argument("--point")
        p.set_defaults(fn=fn)
    p = toric.add_parser("act", parents=[common])
    p.add_argument("variety")
    p.add_argument("--points", required=True)
    p.add_argument("--letter")
    p.add_argument("--word")
    p.set_defaults(fn=toric_act)
    p = toric.add_parser("solve", parents=[common])
    p.add_argument("variety")
    p.add_argument("--points", required=True)
    p.add_argument("--targets")
    p.set_defaults(fn=toric_solve)
    p = toric.add_parser("verify", parents=[common])
    p.add_argument("certificate")
    p.set_defaults(fn=toric_verify, verify=True)

    susp = top.add_parser("susp", help="suspensions uv = f").add_subparsers(dest="cmd", required=True)
    p = susp.add_parser("build", parents=[common])
    p.add_argument("variety", nargs="?")
    p.add_argument("--k", type=int)
    p.add_argument("--f", action="append")
    p.set_defaults(fn=susp_build)
    p = susp.add_parser("act", parents=[common])
    p.add_argument("variety")
    p.add_argument("--points", required=True)
    p.add_argument("--letter")
    p.add_argument("--word")
    p.set_defaults(fn=susp_act)
    p = susp.add_parser("solve", parents=[common])
    p.add_argument("variety")
    p.add_argument("--points", required=True)
    p.add_argument("--targets")
    p.set_defaults(fn=susp_solve)
    p = susp.add_parser("verify", parents=[common])
    p.add_argument("certificate")
    p.set_defaults(fn=susp_verify, verify=True)
    p = susp.add_parser("flex", parents=[common])
    p.add_argument("variety")
    p.add_argument("--point", required=True)
    p.set_defaults(fn=susp_flex)

    p = top.add_parser("catalog", parents=[common], help="list or print bundled varieties")
    p.add_argument("name", nargs="?")
    p.set_defaults(fn=catalog)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        result = args.fn(args)
    except (ToricflexError, ValueError, KeyError, TypeError) as exc:
        tag = getattr(exc, "step", None)
        kind = type(exc).__name__
        print(f"toricflex: {kind}: {exc}" if tag is None or f"[{tag}]" in str(exc) else f"toricflex: {kind}: [{tag}] {exc}", file=sys.stderr)
        return 2
    _emit(result, args.out)
    if getattr(args, "verify", False) or isinstance(result, dict) and result.get("verdict") is False:
        return 0 if result.get("verdict") else 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
