"""JSON state-specification documents.

One JSON object per state. Complex numbers are ``[re, im]`` pairs (plain
numbers are accepted as real). Cutoffs are always explicit.

    {"constructor": "ghz", "cutoff": [2, 2, 2]}
    {"constructor": "cat", "cutoff": [16, 16, 16],
     "amplitudes": [[0.8, 0], [0.8, 0], [0.8, 0]], "sign": -1}
    {"constructor": "mixture", "components": [{"weight": 0.5, "spec": {...}}, ...]}
    {"constructor": "product", "factors": [{...}, {...}]}
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from fockwit.fock import CutoffSpec, Ensemble, PureState
from fockwit import states


class SpecError(ValueError):
    """Base class for state-spec problems."""


class SpecParseError(SpecError):
    def __init__(self, msg: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {msg}")
        self.line, self.column = line, column


class SpecSchemaError(SpecError):
    pass


class SpecValidationError(SpecError):
    def __init__(self, field_name: str, constraint: str):
        super().__init__(f"field {field_name!r}: {constraint}")
        self.field = field_name


RANDOM_TAGS = ("random_pure", "random_product", "random_separable_mixture")
CONSTRUCTORS = ("fock", "ghz", "paper_psi", "coherent", "cat", "product", "mixture") + RANDOM_TAGS

_ALLOWED = {
    "fock": {"cutoff", "occupations"},
    "ghz": {"cutoff", "p0"},
    "paper_psi": {"cutoff"},
    "coherent": {"cutoff", "amplitudes"},
    "cat": {"cutoff", "amplitudes", "sign"},
    "product": {"factors"},
    "mixture": {"components"},
    "random_pure": {"cutoff", "seed"},
    "random_product": {"cutoff", "seed", "partition"},
    "random_separable_mixture": {"cutoff", "seed", "k", "partition"},
}


@dataclass
class StateSpec:
    constructor: str
    params: dict
    cutoff: Optional[CutoffSpec] = None
    seed: Optional[int] = None
    children: list = field(default_factory=list)  # (weight or None, StateSpec)

    def build(self, seed: Optional[int] = None):
        """Construct the state. ``seed`` fills in for random constructors without one."""
        tag = self.constructor
        p = self.params
        if tag == "fock":
            return states.make_fock(self.cutoff, p["occupations"])
        if tag == "ghz":
            return states.make_weighted_ghz(self.cutoff, p.get("p0", 0.5))
        if tag == "paper_psi":
            return states.make_four_term_psi(self.cutoff)
        if tag == "coherent":
            return states.make_coherent(self.cutoff, states.CoherentParams(p["amplitudes"]))
        if tag == "cat":
            return states.make_cat(self.cutoff, states.CatParams(p["amplitudes"], p.get("sign", -1)))
        if tag == "product":
            return states.make_product([c.build(seed) for _, c in self.children])
        if tag == "mixture":
            return Ensemble(tuple((w, c.build(seed)) for w, c in self.children))
        s = self.seed if self.seed is not None else seed
        if s is None:
            raise SpecValidationError("seed", f"{tag} needs a seed (in the document or via --seed)")
        if tag == "random_pure":
            return states.random_pure(self.cutoff, s)
        if tag == "random_product":
            return states.random_product(self.cutoff, s, p.get("partition"))
        return states.random_separable_mixture(self.cutoff, p.get("k", 4), p.get("partition"), s)


def _int_list(doc: dict, key: str, path: str) -> list:
    val = doc.get(key)
    if not isinstance(val, list) or not val or not all(
        isinstance(x, int) and not isinstance(x, bool) for x in val
    ):
        raise SpecValidationError(f"{path}{key}", "must be a nonempty list of integers")
    return val


def _complex(x, name: str) -> complex:
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(x)
    if (isinstance(x, list) and len(x) == 2
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x)):
        return complex(x[0], x[1])
    raise SpecValidationError(name, "complex numbers are [re, im] pairs")


def _cutoff(doc: dict, path: str) -> CutoffSpec:
    if "cutoff" not in doc:
        raise SpecValidationError(f"{path}cutoff", "is required")
    dims = _int_list(doc, "cutoff", path)
    if any(d < 1 for d in dims):
        raise SpecValidationError(f"{path}cutoff", "every cutoff must be >= 1")
    return CutoffSpec(tuple(dims))


def _partition(doc: dict, n: int, path: str):
    if "partition" not in doc:
        return None
    part = doc["partition"]
    try:
        return states.validate_partition(part, n)
    except (TypeError, ValueError) as exc:
        raise SpecValidationError(f"{path}partition", str(exc)) from None


def _validate(doc: Any, path: str = "") -> StateSpec:
    if not isinstance(doc, dict):
        raise SpecSchemaError(f"{path or 'document'} must be a JSON object")
    tag = doc.get("constructor")
    if tag not in CONSTRUCTORS:
        raise SpecSchemaError(
            f"{path}constructor: unknown constructor {tag!r}; expected one of {', '.join(CONSTRUCTORS)}"
        )
    extra = set(doc) - _ALLOWED[tag] - {"constructor"}
    if extra:
        raise SpecSchemaError(f"{path}{tag}: unexpected fields {sorted(extra)}")

    if tag == "product":
        factors = doc.get("factors")
        if not isinstance(factors, list) or len(factors) < 2:
            raise SpecValidationError(f"{path}factors", "needs a list of at least two state specs")
        kids = [(None, _validate(f, f"{path}factors[{i}].")) for i, f in enumerate(factors)]
        for i, (_, k) in enumerate(kids):
            if k.constructor in ("mixture", "random_separable_mixture"):
                raise SpecValidationError(f"{path}factors[{i}]", "product factors must be pure")
        return StateSpec(tag, {}, children=kids)

    if tag == "mixture":
        comps = doc.get("components")
        if not isinstance(comps, list) or not comps:
            raise SpecValidationError(f"{path}components", "needs a nonempty list")
        kids = []
        for i, c in enumerate(comps):
            where = f"{path}components[{i}]"
            if not isinstance(c, dict) or set(c) != {"weight", "spec"}:
                raise SpecValidationError(where, "each component is {\"weight\": w, \"spec\": {...}}")
            w = c["weight"]
            if not isinstance(w, (int, float)) or isinstance(w, bool) or not 0.0 < w <= 1.0:
                raise SpecValidationError(f"{where}.weight", "must lie in (0, 1]")
            kids.append((float(w), _validate(c["spec"], f"{where}.spec.")))
        if abs(sum(w for w, _ in kids) - 1.0) > 1e-12:
            raise SpecValidationError(f"{path}components", "weights must sum to 1")
        return StateSpec(tag, {}, children=kids)

    cutoff = _cutoff(doc, path)
    n = cutoff.n_modes
    params: dict = {}
    seed = None

    if tag == "fock":
        occ = _int_list(doc, "occupations", path)
        if len(occ) != n:
            raise SpecValidationError(f"{path}occupations", f"needs {n} entries, one per mode")
        for i, (k, d) in enumerate(zip(occ, cutoff.dims)):
            if not 0 <= k < d:
                raise SpecValidationError(f"{path}occupations", f"entry {i} = {k} must satisfy 0 <= n < cutoff {d}")
        params["occupations"] = occ
    elif tag in ("ghz", "paper_psi"):
        if tag == "ghz" and n < 2:
            raise SpecValidationError(f"{path}cutoff", "GHZ needs at least two modes")
        if tag == "paper_psi" and n != 3:
            raise SpecValidationError(f"{path}cutoff", "paper_psi is a three-mode state")
        if any(d < 2 for d in cutoff.dims):
            raise SpecValidationError(f"{path}cutoff", "every mode needs cutoff >= 2")
        if "p0" in doc:
            p0 = doc["p0"]
            if not isinstance(p0, (int, float)) or isinstance(p0, bool) or not 0.0 <= p0 <= 1.0:
                raise SpecValidationError(f"{path}p0", "must lie in [0, 1]")
            params["p0"] = float(p0)
    elif tag in ("coherent", "cat"):
        amps = doc.get("amplitudes")
        if not isinstance(amps, list) or len(amps) != n:
            raise SpecValidationError(f"{path}amplitudes", f"needs {n} complex entries, one per mode")
        params["amplitudes"] = [_complex(a, f"{path}amplitudes[{i}]") for i, a in enumerate(amps)]
        if tag == "cat":
            sign = doc.get("sign", -1)
            if sign not in (1, -1) or isinstance(sign, bool):
                raise SpecValidationError(f"{path}sign", "must be +1 or -1")
            if sign == -1 and all(a == 0 for a in params["amplitudes"]):
                raise SpecValidationError(f"{path}amplitudes", "odd cat state needs a nonzero amplitude")
            params["sign"] = sign
    else:  # random constructors
        if "seed" in doc:
            seed = doc["seed"]
            if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
                raise SpecValidationError(f"{path}seed", "must be a non-negative integer")
        if tag != "random_pure":
            part = _partition(doc, n, path)
            if part is not None:
                params["partition"] = part
        if tag == "random_separable_mixture":
            k = doc.get("k", 4)
            if not isinstance(k, int) or isinstance(k, bool) or k < 1:
                raise SpecValidationError(f"{path}k", "must be an integer >= 1")
            params["k"] = k
    return StateSpec(tag, params, cutoff, seed)


def parse_state_spec(text: str) -> StateSpec:
    """Parse and validate a state-spec document.

    Raises :class:`SpecParseError` (with line and column) on malformed JSON,
    :class:`SpecSchemaError` on an unknown constructor or stray fields, and
    :class:`SpecValidationError` naming the offending field otherwise.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecParseError(exc.msg, exc.lineno, exc.colno) from None
    return _validate(doc)


def state_summary(state) -> dict:
    s = state.to_density() if isinstance(state, Ensemble) else state
    deficit = getattr(s, "truncation_deficit", 0.0)
    return {
        "n_modes": s.cutoff.n_modes,
        "dims": list(s.cutoff.dims),
        "pure": isinstance(s, PureState),
        "truncation_deficit": float(deficit) if math.isfinite(deficit) else None,
        "norm_or_trace": float(
            np.vdot(s.amplitudes, s.amplitudes).real if isinstance(s, PureState)
            else np.trace(s.matrix).real
        ),
    }
