"""JSON family files and certificate files.

A family file (``"schema": 1``) holds one family::

    {"schema": 1, "name": "...", "field": {"type": "prime", "p": 7},
     "mode_dims": [2, 2, 2],
     "tensors": [[[1, 0], [1, 0], [1, 0]], {"factors": [...], "coeff": "1/2"}]}

or, for symmetric families, a ``"symmetric"`` block with ``m``,
``base_vectors`` and ``coeffs`` in place of ``mode_dims``/``tensors``.
Rational scalars are written as strings ``"p/q"``; integers may be bare.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple, Union

from .criteria import Certificate
from .errors import FamilyFormatError, ParameterError
from .field import Field, format_scalar
from .tensor import ProductFamily, ProductTensor, SymmetricFamily

__all__ = [
    "SCHEMA_VERSION",
    "Family",
    "parse_family",
    "load_family",
    "family_to_json",
    "dump_family",
    "save_family",
    "certificate_document",
    "load_certificate",
    "sha256_text",
    "atomic_write",
    "json_default",
]

SCHEMA_VERSION = 1

Family = Union[ProductFamily, SymmetricFamily]
Path = Tuple[Union[str, int], ...]


# ---------------------------------------------------------------- locating values


def _locate(text: str) -> Dict[Path, int]:
    """Map each JSON path to the line on which its value starts."""
    dec = json.JSONDecoder()
    out: Dict[Path, int] = {}
    n = len(text)

    def skip(i: int) -> int:
        while i < n and text[i] in " \t\r\n":
            i += 1
        return i

    def line(i: int) -> int:
        return text.count("\n", 0, i) + 1

    def value(i: int, path: Path) -> int:
        i = skip(i)
        out[path] = line(i)
        if i < n and text[i] == "[":
            i = skip(i + 1)
            k = 0
            if i < n and text[i] == "]":
                return i + 1
            while True:
                i = skip(value(i, path + (k,)))
                k += 1
                if text[i] == ",":
                    i += 1
                    continue
                return i + 1
        if i < n and text[i] == "{":
            i = skip(i + 1)
            if i < n and text[i] == "}":
                return i + 1
            while True:
                key, i = dec.raw_decode(text, skip(i))
                i = skip(i) + 1  # colon
                i = skip(value(i, path + (key,)))
                if text[i] == ",":
                    i += 1
                    continue
                return i + 1
        _, end = dec.raw_decode(text, i)
        return end

    value(0, ())
    return out


class _Reader:
    def __init__(self, text: str, source: Optional[str]):
        self.source = source
        try:
            self.doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FamilyFormatError(f"invalid JSON: {exc.msg}", source, exc.lineno) from None
        self.lines = _locate(text)

    def fail(self, path: Path, message: str):
        probe = path
        while probe and probe not in self.lines:
            probe = probe[:-1]
        field = "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in path).lstrip(".") or "<root>"
        raise FamilyFormatError(f"{field}: {message}", self.source, self.lines.get(probe))

    def get(self, path: Path, required: bool = True):
        node = self.doc
        for p in path:
            if isinstance(p, int):
                if not isinstance(node, list) or p >= len(node):
                    return self.fail(path, "missing")
                node = node[p]
            else:
                if not isinstance(node, dict) or p not in node:
                    if required:
                        return self.fail(path, "missing required field")
                    return None
                node = node[p]
        return node

    def scalar(self, path: Path, field: Field):
        raw = self.get(path)
        if isinstance(raw, bool) or not isinstance(raw, (int, str)):
            self.fail(path, f"expected an integer or a rational string, got {raw!r}")
        try:
            return field(raw)
        except (ValueError, ZeroDivisionError) as exc:
            self.fail(path, str(exc))

    def vector(self, path: Path, field: Field, dim: Optional[int] = None) -> Tuple:
        raw = self.get(path)
        if not isinstance(raw, list) or not raw:
            self.fail(path, "expected a nonempty array of scalars")
        if dim is not None and len(raw) != dim:
            self.fail(path, f"expected length {dim}, got {len(raw)}")
        v = tuple(self.scalar(path + (i,), field) for i in range(len(raw)))
        if not any(v):
            self.fail(path, "zero vector not allowed")
        return v


def _parse_field(r: _Reader) -> Field:
    raw = r.get(("field",))
    if not isinstance(raw, dict) or raw.get("type") not in ("rational", "prime"):
        r.fail(("field",), 'expected {"type": "rational"} or {"type": "prime", "p": ...}')
    if raw["type"] == "rational":
        return Field()
    p = r.get(("field", "p"))
    if not isinstance(p, int) or isinstance(p, bool):
        r.fail(("field", "p"), "expected an integer prime")
    try:
        return Field(p)
    except (ValueError, TypeError) as exc:
        r.fail(("field", "p"), str(exc))
    raise AssertionError


def parse_family(text: str, source: Optional[str] = None) -> Family:
    """Parse and validate a family file; errors name the field and line."""
    r = _Reader(text, source)
    if not isinstance(r.doc, dict):
        r.fail((), "expected a JSON object")
    schema = r.get(("schema",))
    if schema != SCHEMA_VERSION:
        r.fail(("schema",), f"unsupported schema {schema!r}; expected {SCHEMA_VERSION}")
    field = _parse_field(r)
    name = r.doc.get("name")
    if "symmetric" in r.doc:
        m = r.get(("symmetric", "m"))
        if not isinstance(m, int) or isinstance(m, bool) or m < 2:
            r.fail(("symmetric", "m"), "expected an integer >= 2")
        base = r.get(("symmetric", "base_vectors"))
        if not isinstance(base, list) or not base:
            r.fail(("symmetric", "base_vectors"), "expected a nonempty array")
        dim = len(base[0]) if isinstance(base[0], list) else None
        vecs = tuple(r.vector(("symmetric", "base_vectors", a), field, dim) for a in range(len(base)))
        coeffs_raw = r.get(("symmetric", "coeffs"), required=False)
        if coeffs_raw is None:
            coeffs = (field.one,) * len(vecs)
        else:
            if not isinstance(coeffs_raw, list) or len(coeffs_raw) != len(vecs):
                r.fail(("symmetric", "coeffs"), f"expected {len(vecs)} coefficients")
            coeffs = tuple(r.scalar(("symmetric", "coeffs", a), field) for a in range(len(vecs)))
            for a, c in enumerate(coeffs):
                if c == 0:
                    r.fail(("symmetric", "coeffs", a), "coefficient must be nonzero")
        try:
            return SymmetricFamily(field, vecs, coeffs, m, name)
        except ParameterError as exc:
            r.fail(("symmetric",), str(exc))
    dims = r.get(("mode_dims",))
    if not isinstance(dims, list) or len(dims) < 2 or not all(
        isinstance(d, int) and not isinstance(d, bool) and d >= 1 for d in dims
    ):
        r.fail(("mode_dims",), "expected an array of at least two positive integers")
    tensors_raw = r.get(("tensors",))
    if not isinstance(tensors_raw, list) or not tensors_raw:
        r.fail(("tensors",), "expected a nonempty array")
    tensors = []
    for a, t in enumerate(tensors_raw):
        if isinstance(t, dict):
            fpath: Path = ("tensors", a, "factors")
            facs = r.get(fpath)
            coeff = r.scalar(("tensors", a, "coeff"), field) if "coeff" in t else field.one
            if coeff == 0:
                r.fail(("tensors", a, "coeff"), "coefficient must be nonzero")
        else:
            fpath = ("tensors", a)
            facs, coeff = t, field.one
        if not isinstance(facs, list) or len(facs) != len(dims):
            r.fail(fpath, f"expected {len(dims)} factor arrays")
        factors = tuple(r.vector(fpath + (j,), field, dims[j]) for j in range(len(dims)))
        tensors.append(ProductTensor(factors, coeff))
    return ProductFamily(field, tuple(dims), tuple(tensors), name)


def load_family(path: str) -> Family:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise FamilyFormatError(f"cannot read file: {exc.strerror}", path) from None
    return parse_family(text, path)


# ---------------------------------------------------------------- writing


def _vec(v) -> List:
    return [format_scalar(x) for x in v]


def family_to_json(F: Family, name: Optional[str] = None, extra: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    doc: Dict[str, Any] = {"schema": SCHEMA_VERSION}
    label = name or F.name
    if label:
        doc["name"] = label
    doc["field"] = F.field.to_json()
    if isinstance(F, SymmetricFamily):
        doc["symmetric"] = {
            "m": F.m,
            "base_vectors": [_vec(v) for v in F.base_vectors],
            "coeffs": _vec(F.coeffs),
        }
    else:
        doc["mode_dims"] = list(F.mode_dims)
        tensors = []
        for t in F.tensors:
            facs = [_vec(f) for f in t.factors]
            tensors.append(facs if t.coeff == 1 else {"factors": facs, "coeff": format_scalar(t.coeff)})
        doc["tensors"] = tensors
    if extra:
        doc.update(extra)
    return doc


def dump_family(F: Family, name: Optional[str] = None, extra: Optional[Dict[str, Any]] = None) -> str:
    """Serialize with one tensor (or base vector) per line."""
    doc = family_to_json(F, name, extra)
    parts = []
    for key, val in doc.items():
        if key == "tensors":
            body = ",\n".join("    " + json.dumps(t) for t in val)
            parts.append(f'  "tensors": [\n{body}\n  ]')
        elif key == "symmetric":
            vecs = ",\n".join("      " + json.dumps(v) for v in val["base_vectors"])
            parts.append(
                f'  "symmetric": {{\n    "m": {val["m"]},\n    "base_vectors": [\n{vecs}\n    ],\n'
                f'    "coeffs": {json.dumps(val["coeffs"])}\n  }}'
            )
        else:
            parts.append(f"  {json.dumps(key)}: {json.dumps(val, default=json_default)}")
    return "{\n" + ",\n".join(parts) + "\n}\n"


def save_family(F: Family, path: str, name: Optional[str] = None, extra: Optional[Dict[str, Any]] = None) -> None:
    atomic_write(path, dump_family(F, name, extra))


def atomic_write(path: str, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".json")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------- certificates


def json_default(obj):
    if isinstance(obj, Fraction):
        return format_scalar(obj)
    if isinstance(obj, (set, frozenset, tuple)):
        return list(obj)
    if hasattr(obj, "to_json"):
        return obj.to_json()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def certificate_document(cert: Certificate, family_text: Optional[str] = None, source: Optional[str] = None,
                         params: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    from . import __version__

    doc = {"schema": SCHEMA_VERSION, "tool": "kruskal-cert", "version": __version__}
    doc.update(cert.to_json())
    doc["input"] = {"path": source, "sha256": sha256_text(family_text) if family_text is not None else None}
    doc["params"] = params or {}
    # normalize through JSON so a loaded certificate compares equal
    return json.loads(json.dumps(doc, default=json_default))


def load_certificate(text: str, source: Optional[str] = None) -> Tuple[Certificate, Dict[str, Any]]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FamilyFormatError(f"invalid JSON: {exc.msg}", source, exc.lineno) from None
    for key in ("criterion", "status", "witness"):
        if key not in doc:
            raise FamilyFormatError(f"{key}: missing required field", source)
    try:
        cert = Certificate.from_json(doc)
    except ValueError as exc:
        raise FamilyFormatError(f"status: {exc}", source) from None
    return cert, doc


