"""JSON interchange format for Hopf algebra presentations.

The document is::

    {"dim": d, "labels": [...], "unit": 0,
     "mult":     [[i, j, k, "p/q"], ...],
     "comult":   [[i, j, k, "p/q"], ...],
     "counit":   ["p/q", ... d entries ...],
     "antipode": [[i, j, "p/q"], ...]}

Scalars are exact fraction strings; sparse triples are sorted so that a
round trip is byte identical.  Loading validates every Hopf axiom and fails
with the full validation report when one is broken.
"""

import json
from fractions import Fraction

from .hopf import HopfPresentation, validate_hopf


class ParseError(Exception):
    pass


class ValidationFailed(Exception):
    def __init__(self, report):
        super().__init__("algebra file fails Hopf validation")
        self.report = report


def _frac(s):
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad fraction string {s!r}") from exc


def dumps(H):
    doc = {
        "dim": H.dim,
        "labels": list(H.basis_labels),
        "unit": 0,
        "mult": [
            [i, j, k, str(v)]
            for i in range(H.dim)
            for j in range(H.dim)
            for k, v in sorted(H.mult[i][j].items())
        ],
        "comult": [
            [i, j, k, str(v)]
            for i in range(H.dim)
            for (j, k), v in sorted(H.comult[i].items())
        ],
        "counit": [str(c) for c in H.counit],
        "antipode": [
            [i, j, str(v)] for i in range(H.dim) for j, v in sorted(H.antipode[i].items())
        ],
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def loads(text, validate=True):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON: {exc}") from exc
    try:
        d = int(doc["dim"])
        labels = list(doc["labels"])
        if doc.get("unit", 0) != 0:
            raise ParseError("unit index must be 0")
        if len(labels) != d:
            raise ParseError("label count does not match dim")
        mult = [[{} for _ in range(d)] for _ in range(d)]
        for i, j, k, v in doc["mult"]:
            mult[i][j][k] = mult[i][j].get(k, 0) + _frac(v)
        comult = [{} for _ in range(d)]
        for i, j, k, v in doc["comult"]:
            comult[i][(j, k)] = comult[i].get((j, k), 0) + _frac(v)
        counit = [_frac(v) for v in doc["counit"]]
        if len(counit) != d:
            raise ParseError("counit vector has wrong length")
        antipode = [{} for _ in range(d)]
        for i, j, v in doc["antipode"]:
            antipode[i][j] = antipode[i].get(j, 0) + _frac(v)
    except (KeyError, TypeError, IndexError) as exc:
        raise ParseError(f"malformed algebra document: {exc}") from exc
    H = HopfPresentation(d, labels, mult, comult, counit, antipode)
    if validate:
        report = validate_hopf(H)
        if not report.all_passed:
            raise ValidationFailed(report)
    return H


def load_path(path, validate=True):
    with open(path, "r", encoding="utf-8") as fh:
        return loads(fh.read(), validate=validate)
