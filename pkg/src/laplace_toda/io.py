"""JSON operator and field files.

Rationals are written as "p/q" strings, complex Fourier coefficients as
[re, im] pairs (modes -M..M).  ``dumps(loads(text)) == text`` for files
written by ``dumps``.
"""
from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, Dict, Optional

from .coeffring.fourier import PeriodicFunction
from .disc import COEFFS, DiscreteOperator, PeriodMatrix
from .errors import LaplaceTodaError, ParseError
from .semidisc import SemiDiscreteOperator
from .toda import DiscreteField, SemiDiscreteField

__all__ = ["load", "loads", "dump", "dumps", "Document"]

SEMI, DISC = "semi-discrete", "discrete"
SEMI_FIELD, DISC_FIELD = "semi-discrete-field", "discrete-field"


class Document:
    """Parsed file: ``obj`` is an operator or field, ``metadata`` a dict."""

    def __init__(self, obj, metadata: Optional[Dict[str, Any]] = None):
        self.obj = obj
        self.metadata = dict(metadata or {})

    @property
    def kind(self) -> str:
        return _kind(self.obj)


def _kind(obj) -> str:
    if isinstance(obj, SemiDiscreteOperator):
        return SEMI
    if isinstance(obj, DiscreteOperator):
        return DISC
    if isinstance(obj, SemiDiscreteField):
        return SEMI_FIELD
    if isinstance(obj, DiscreteField):
        return DISC_FIELD
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# encoding -------------------------------------------------------------

def _rat(x) -> str:
    return str(Fraction(x))


def _pf_out(f: PeriodicFunction):
    return [[float(c.real), float(c.imag)] for c in f.coeffs]


def _encode(obj) -> Dict[str, Any]:
    kind = _kind(obj)
    if kind == SEMI:
        out = {"kind": kind, "N": obj.N, "period": obj.period,
               "coefficients": {k: [_pf_out(f) for f in getattr(obj, k)] for k in COEFFS}}
        out["twist"] = None if obj.twist is None else _pf_out(obj.twist)
        return out
    if kind == DISC:
        return {"kind": kind, "periods": [list(r) for r in obj.periods.rows()],
                "coefficients": {k: [[_rat(v) for v in row] for row in getattr(obj, k)]
                                 for k in COEFFS}}
    if kind == SEMI_FIELD:
        return {"kind": kind, "N": obj.N, "period": obj.period, "k0": obj.k0,
                "layers": [[_pf_out(f) for f in layer] for layer in obj.layers]}
    return {"kind": kind, "periods": [list(r) for r in obj.periods.rows()],
            "layers": {str(k): [[_rat(v) for v in row] for row in obj.layers[k]]
                       for k in sorted(obj.layers)}}


def _format(value, depth: int = 0) -> str:
    """JSON with flat lists kept on one line."""
    pad, inner = " " * depth, " " * (depth + 1)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {_format(v, depth + 1)}" for k, v in value.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(value, list) and any(isinstance(v, (list, dict)) for v in value):
        items = [inner + _format(v, depth + 1) for v in value]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    return json.dumps(value)


def dumps(obj, metadata: Optional[Dict[str, Any]] = None) -> str:
    if isinstance(obj, Document):
        obj, metadata = obj.obj, obj.metadata
    data = _encode(obj)
    data["metadata"] = dict(metadata or {})
    return _format(data) + "\n"


def dump(obj, path, metadata: Optional[Dict[str, Any]] = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj, metadata))


# decoding -------------------------------------------------------------

def _need(data, key, typ=None):
    if key not in data:
        raise ParseError(f"missing field {key!r}")
    value = data[key]
    if typ is not None and not isinstance(value, typ):
        raise ParseError(f"field {key!r} must be {typ.__name__}")
    return value


def _pf_in(raw, period) -> PeriodicFunction:
    try:
        coeffs = [complex(float(re), float(im)) for re, im in raw]
        return PeriodicFunction(coeffs, period)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"bad Fourier coefficient list: {exc}") from exc


def _rat_in(raw) -> Fraction:
    if not isinstance(raw, (str, int)) or isinstance(raw, bool):
        raise ParseError(f"rational must be a 'p/q' string, got {raw!r}")
    try:
        return Fraction(raw)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad rational {raw!r}") from exc


def _periods_in(raw) -> PeriodMatrix:
    try:
        (p, r), (s, t) = raw
        if not all(isinstance(v, int) for v in (p, r, s, t)):
            raise TypeError
        return PeriodMatrix(p, r, s, t)
    except (TypeError, ValueError) as exc:
        raise ParseError("periods must be [[P, R], [S, T]] integers") from exc


def _decode(data):
    kind = _need(data, "kind", str)
    if kind in (SEMI, SEMI_FIELD):
        period = float(_need(data, "period", (int, float)))
        N = _need(data, "N", int)
    if kind == SEMI:
        coef = _need(data, "coefficients", dict)
        seqs = []
        for k in COEFFS:
            raw = _need(coef, k, list)
            if len(raw) != N:
                raise ParseError(f"coefficient {k!r} must have N = {N} entries")
            seqs.append([_pf_in(x, period) for x in raw])
        twist = data.get("twist")
        twist = None if twist is None else _pf_in(twist, period)
        return SemiDiscreteOperator(*seqs, twist=twist, period=period)
    if kind == DISC:
        periods = _periods_in(_need(data, "periods", list))
        coef = _need(data, "coefficients", dict)
        arrays = {k: [[_rat_in(v) for v in row] for row in _need(coef, k, list)] for k in COEFFS}
        return DiscreteOperator(periods, **arrays)
    if kind == SEMI_FIELD:
        layers = _need(data, "layers", list)
        out = []
        for layer in layers:
            if len(layer) != N:
                raise ParseError(f"every layer must have N = {N} functions")
            out.append(tuple(_pf_in(x, period) for x in layer))
        if len(out) < 1:
            raise ParseError("field needs at least one layer")
        return SemiDiscreteField(tuple(out), int(data.get("k0", 0)))
    if kind == DISC_FIELD:
        periods = _periods_in(_need(data, "periods", list))
        layers = _need(data, "layers", dict)
        try:
            parsed = {int(k): [[_rat_in(v) for v in row] for row in arr]
                      for k, arr in layers.items()}
        except ValueError as exc:
            raise ParseError("layer keys must be integers") from exc
        field = DiscreteField(periods, parsed)
        shape = (field.nf.dt, field.nf.delta)
        for k, arr in field.layers.items():
            if len(arr) != shape[0] or any(len(r) != shape[1] for r in arr):
                raise ParseError(f"layer {k} must have shape {shape}")
        return field
    raise ParseError(f"unknown kind {kind!r}")


def loads(text: str) -> Document:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ParseError("top level must be an object")
    try:
        obj = _decode(data)
    except ParseError:
        raise
    except LaplaceTodaError:
        raise
    except (TypeError, ValueError, KeyError) as exc:
        raise ParseError(str(exc)) from exc
    meta = data.get("metadata", {})
    if not isinstance(meta, dict):
        raise ParseError("metadata must be an object")
    return Document(obj, meta)


def load(path) -> Document:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    return loads(text)
