"""Model file schema: JSON load, validation, canonical dump.

Document layout (explicit form)::

    {
      "name": "...",
      "sites": 3,
      "local_dim": 2,
      "statistics": "spin" | "fermion" | "hardcore_boson" | "truncated_boson",
      "superselection": false,
      "hamiltonian": {
        "two_site": [{"i": 0, "j": 1, "matrix": [[re, im], ...]}],
        "one_site": [{"i": 0, "matrix": [[re, im], ...]}]
      },
      "lindblads": [{"site": 0, "label": "loss", "matrix": [...], "rate": 2.0}]
    }

Matrices are flat row-major lists of [re, im] pairs. Site indices are
0-based. A built-in reference form replaces the matrices entirely::

    {"name": "...", "sites": 3, "hamiltonian": {"example": 1, "params": {...}}}

Validation failures raise ModelFormatError carrying the offending field
path; the CLI maps those to exit code 2.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import InvalidParams, ModelFormatError
from .lattice import build_model
from .models import ExampleSpec, build_example
from .spaces import (
    FERMION, HARDCORE_BOSON, SPIN, TRUNCATED_BOSON, LocalSpace,
)

__all__ = ["load_model", "parse_model", "model_to_dict", "dump_canonical"]

_FERMION_DIAGS = {2: (0, 1), 3: (0, 1, 1), 4: (0, 1, 1, 2)}


def _expect(doc, field, types, path):
    if field not in doc:
        raise ModelFormatError(f"{path}.{field}", "missing required field")
    value = doc[field]
    if not isinstance(value, types):
        raise ModelFormatError(f"{path}.{field}",
                               f"expected {types}, got {type(value).__name__}")
    return value


def _parse_matrix(entries, dim, path):
    if not isinstance(entries, list):
        raise ModelFormatError(path, "matrix must be a list of [re, im] pairs")
    if len(entries) != dim * dim:
        raise ModelFormatError(
            path, f"matrix has {len(entries)} entries, expected {dim * dim}")
    flat = np.empty(dim * dim, dtype=complex)
    for k, pair in enumerate(entries):
        if (not isinstance(pair, list) or len(pair) != 2
                or not all(isinstance(x, (int, float)) for x in pair)):
            raise ModelFormatError(f"{path}[{k}]", "expected a [re, im] pair")
        flat[k] = pair[0] + 1j * pair[1]
    return flat.reshape(dim, dim)


def _space_from_fields(statistics, local_dim, superselection, path):
    if statistics == SPIN:
        if superselection:
            raise ModelFormatError(f"{path}.superselection",
                                   "spin spaces carry no number operator")
        return LocalSpace(local_dim, SPIN)
    if statistics == FERMION:
        diag = _FERMION_DIAGS.get(local_dim)
        if diag is None:
            raise ModelFormatError(f"{path}.local_dim",
                                   "fermion spaces support local_dim 2, 3 or 4")
        return LocalSpace(local_dim, FERMION, superselection=True, number_diag=diag)
    if statistics == HARDCORE_BOSON:
        if local_dim != 2:
            raise ModelFormatError(f"{path}.local_dim", "hard-core bosons have local_dim 2")
        return LocalSpace(2, HARDCORE_BOSON, superselection=bool(superselection),
                          number_diag=(0, 1))
    if statistics == TRUNCATED_BOSON:
        return LocalSpace(local_dim, TRUNCATED_BOSON, superselection=True,
                          number_diag=tuple(range(local_dim)))
    raise ModelFormatError(f"{path}.statistics", f"unknown statistics {statistics!r}")


def parse_model(doc, path="model"):
    """Validate a parsed JSON document and build the lattice model."""
    if not isinstance(doc, dict):
        raise ModelFormatError(path, "document must be a JSON object")
    n = _expect(doc, "sites", int, path)
    if n < 1:
        raise ModelFormatError(f"{path}.sites", "need at least one site")
    ham = _expect(doc, "hamiltonian", dict, path)

    if "example" in ham:
        allowed = {"name", "sites", "hamiltonian"}
        extra = set(doc) - allowed
        if extra:
            raise ModelFormatError(
                f"{path}.{sorted(extra)[0]}",
                "built-in reference models define everything except name/sites")
        params = ham.get("params", {})
        if not isinstance(params, dict):
            raise ModelFormatError(f"{path}.hamiltonian.params", "must be an object")
        pairs = ham.get("pairs")
        if pairs is not None:
            pairs = tuple((int(i), int(j)) for (i, j) in pairs)
        try:
            spec = ExampleSpec(id=int(ham["example"]), n=n,
                               params={k: float(v) for k, v in params.items()},
                               pairs=pairs)
            return build_example(spec)
        except (InvalidParams, ValueError, TypeError) as exc:
            raise ModelFormatError(f"{path}.hamiltonian.example", str(exc)) from exc

    local_dim = _expect(doc, "local_dim", int, path)
    statistics = _expect(doc, "statistics", str, path)
    superselection = bool(doc.get("superselection", False))
    space = _space_from_fields(statistics, local_dim, superselection, path)

    pair_terms = []
    for k, item in enumerate(ham.get("two_site", [])):
        p = f"{path}.hamiltonian.two_site[{k}]"
        i = _expect(item, "i", int, p)
        j = _expect(item, "j", int, p)
        m = _parse_matrix(_expect(item, "matrix", list, p), local_dim * local_dim,
                          f"{p}.matrix")
        pair_terms.append((i, j, m))
    site_terms = []
    for k, item in enumerate(ham.get("one_site", [])):
        p = f"{path}.hamiltonian.one_site[{k}]"
        i = _expect(item, "i", int, p)
        m = _parse_matrix(_expect(item, "matrix", list, p), local_dim, f"{p}.matrix")
        site_terms.append((i, m))
    lindblads = []
    for k, item in enumerate(doc.get("lindblads", [])):
        p = f"{path}.lindblads[{k}]"
        site = _expect(item, "site", int, p)
        label = _expect(item, "label", str, p)
        m = _parse_matrix(_expect(item, "matrix", list, p), local_dim, f"{p}.matrix")
        rate = _expect(item, "rate", (int, float), p)
        lindblads.append((site, label, m, float(rate)))

    try:
        return build_model(n, space, pair_terms, site_terms, lindblads,
                           name=str(doc.get("name", "")))
    except InvalidParams as exc:
        raise ModelFormatError(path, str(exc)) from exc


def load_model(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ModelFormatError(str(path), f"cannot read file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}:{exc.lineno}", f"invalid JSON: {exc.msg}") from exc
    return parse_model(doc)


def _matrix_entries(m):
    flat = np.asarray(m, dtype=complex).reshape(-1)
    return [[float(z.real), float(z.imag)] for z in flat]


def model_to_dict(model):
    """Canonical explicit-form document for a model (fixed key order)."""
    space = model.space
    return {
        "name": model.name,
        "sites": model.n,
        "local_dim": space.dim,
        "statistics": space.statistics,
        "superselection": space.superselection,
        "hamiltonian": {
            "two_site": [{"i": i, "j": j, "matrix": _matrix_entries(m)}
                         for (i, j, m) in model.pair_terms],
            "one_site": [{"i": i, "matrix": _matrix_entries(m)}
                         for (i, m) in model.site_terms],
        },
        "lindblads": [{"site": i, "label": label, "matrix": _matrix_entries(m),
                       "rate": rate}
                      for (i, label, m, rate) in model.lindblads],
    }


def dump_canonical(model, path):
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh, indent=2)
        fh.write("\n")
