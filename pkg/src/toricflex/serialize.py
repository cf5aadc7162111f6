"""JSON I/O: scalars, points, words, certificates and the bundled catalog."""

import hashlib
import json
from fractions import Fraction
from importlib import resources

from . import __version__
from .errors import DomainError, FieldExtensionError
from .suspension import SuspensionVariety, SuspensionWord, field_for
from .toric import ToricVariety, point_from_torus
from .transitivity import AutomorphismWord, torus_coordinates


def scalar_to_json(x):
    if isinstance(x, complex):
        return [x.real, x.imag]
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def scalar_from_json(obj, exact=True):
    if isinstance(obj, (list, tuple)):
        if exact:
            raise DomainError("complex value in exact mode")
        if len(obj) != 2:
            raise DomainError("complex scalars are [re, im]")
        return complex(float(obj[0]), float(obj[1]))
    if isinstance(obj, float):
        if exact:
            raise DomainError(f"float {obj} in exact mode; write rationals as \"p/q\"")
        return complex(obj)
    try:
        val = Fraction(obj)
    except (ValueError, TypeError, ZeroDivisionError):
        raise DomainError(f"cannot read scalar {obj!r}") from None
    return val if exact else complex(val)


def dumps(obj):
    """Canonical JSON text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def digest(obj):
    return hashlib.sha256(json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


# varieties


def catalog_names():
    files = resources.files("toricflex") / "catalog"
    return sorted(p.name[:-5] for p in files.iterdir() if p.name.endswith(".json"))


def catalog_entry(name):
    path = resources.files("toricflex") / "catalog" / f"{name}.json"
    if not path.is_file():
        raise DomainError(f"no catalog entry {name!r}; known: {', '.join(catalog_names())}")
    return json.loads(path.read_text())


def read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise DomainError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    except OSError as exc:
        raise DomainError(f"{path}: {exc.strerror}") from None


def load_json_source(ref):
    """A 'catalog:NAME' reference, a path, or inline JSON text."""
    if ref.startswith("catalog:"):
        return catalog_entry(ref[len("catalog:"):])
    if ref.lstrip().startswith(("{", "[")):
        try:
            return json.loads(ref)
        except json.JSONDecodeError as exc:
            raise DomainError(f"inline JSON:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return read_json(ref)


def variety_from_json(obj):
    if isinstance(obj, dict) and "fs" in obj:
        return SuspensionVariety.from_json(obj)
    if isinstance(obj, dict) and "rays" in obj:
        return ToricVariety.from_json(obj)
    raise DomainError("variety JSON needs 'rays' (toric) or 'fs' (suspension)")


# toric points


def toric_point_from_json(X, obj):
    if not isinstance(obj, dict):
        raise DomainError("toric point must be an object")
    if "torus" in obj:
        return point_from_torus(X, X.ray_basis, [scalar_from_json(x) for x in obj["torus"]])
    if "values" in obj:
        vals = [scalar_from_json(x) for x in obj["values"]]
        if len(vals) != len(X.hilb):
            raise DomainError(f"need {len(X.hilb)} Hilbert basis values")
        p = X.from_values(vals)
        if X.hilbert_values(p) != tuple(vals):
            raise DomainError("values do not define a point of the variety")
        return p
    if "face" in obj:
        face = int(obj["face"])
        if not 0 <= face < len(X.faces):
            raise DomainError(f"face index {face} out of range")
        return X.point(face, [scalar_from_json(x) for x in obj["char"]])
    raise DomainError("toric point needs 'torus', 'values' or 'face'/'char'")


def toric_point_to_json(X, p, form="face"):
    if form == "torus":
        try:
            return {"torus": [scalar_to_json(x) for x in torus_coordinates(X, p, X.ray_basis)]}
        except (DomainError, FieldExtensionError):
            pass
    if form == "values":
        return {"values": [scalar_to_json(x) for x in X.hilbert_values(p)]}
    return {"face": p.face, "char": [scalar_to_json(x) for x in p.char]}


def point_form(obj):
    for form in ("torus", "values", "face"):
        if isinstance(obj, dict) and form in obj:
            return form
    return "face"


# suspension points


def susp_point_from_json(X, obj, mode="exact", tol=1e-9):
    F = field_for(mode, tol)
    if not isinstance(obj, list):
        raise DomainError("suspension point must be a coordinate list")
    return X.check_point([scalar_from_json(x, F.exact) for x in obj], F)


def susp_point_to_json(p):
    return [scalar_to_json(x) for x in p]


def points_list(obj):
    if isinstance(obj, dict) and "points" in obj:
        obj = obj["points"]
    if not isinstance(obj, list):
        raise DomainError("points file must hold a list (or an object with 'points')")
    return obj


# words


def word_from_json(X, obj, mode="exact"):
    if isinstance(X, ToricVariety):
        return AutomorphismWord.from_json(obj, X)
    return SuspensionWord.from_json(obj, X, field_for(mode))


# certificates


def certificate(kind, variety, points, targets, word, stages, verdict, mode="exact", extra=None):
    inputs = {"variety": variety, "points": points, "targets": targets}
    out = {
        "kind": kind,
        "engine": {"name": "toricflex", "version": __version__},
        "mode": mode,
        "inputs": inputs,
        "hashes": {k: digest(v) for k, v in inputs.items()},
        "word": word,
        "stages": stages,
        "verdict": verdict,
    }
    if extra:
        out.update(extra)
    return out
