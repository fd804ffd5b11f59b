"""
Declarative problem input for the command-line tool.

A problem document is JSON. Complex numbers are ``[re, im]`` pairs (a bare
real number is accepted on input). Every default is written back out by
``ProblemSpec.to_dict`` so that a resolved document replays exactly.
"""
from __future__ import annotations

import copy
import json
import math
import re
from dataclasses import dataclass, field

import numpy as np

from .core import HilbertDims, LocalObservable, OperatorMatrix, StateVector, pauli, projector
from .scenarios import hardy_tsv, spin_hardy_tsv
from .tomography import BOOTSTRAP_RESAMPLES, CONDITIONING_FLOOR
from .twostate import ORTHOGONALITY_THRESHOLD, TwoStateVector

TSV_PRESETS = {"hardy": hardy_tsv, "spin-hardy": spin_hardy_tsv}
METER_KINDS = ("qubit", "multi", "spin", "osaka")
OSAKA_MODES = ("partial", "full", "split")

_ROOT_KEYS = {"dims", "tsv_preset", "pre", "post", "observables", "k", "strengths", "meter",
              "pointer", "k_sweep", "shots", "seed", "scenario", "tolerances"}


class ProblemSpecError(ValueError):
    """Invalid problem document; ``location`` names the offending field."""

    def __init__(self, location: str, message: str):
        self.location = location
        super().__init__(f"{location}: {message}")


def _complex(value, where: str) -> complex:
    if isinstance(value, bool):
        raise ProblemSpecError(where, "expected a number or [re, im]")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        return complex(value[0], value[1])
    raise ProblemSpecError(where, "expected a number or [re, im]")


def _cx(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _float(value, where: str, positive=False, nonneg=False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ProblemSpecError(where, "expected a finite number")
    if positive and value <= 0:
        raise ProblemSpecError(where, "must be positive")
    if nonneg and value < 0:
        raise ProblemSpecError(where, "must be nonnegative")
    return float(value)


def _int(value, where: str, minimum=None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ProblemSpecError(where, "expected an integer")
    if minimum is not None and value < minimum:
        raise ProblemSpecError(where, f"must be >= {minimum}")
    return int(value)


def _amplitudes(value, where: str) -> list[complex]:
    if not isinstance(value, list) or not value:
        raise ProblemSpecError(where, "expected a nonempty list of amplitudes")
    return [_complex(v, f"{where}[{i}]") for i, v in enumerate(value)]


_PROJECTOR_RE = re.compile(r"^projector\((\d+)\)$")


def _preset_matrix(preset: str, dim: int, where: str) -> np.ndarray:
    if preset in ("pauli_x", "pauli_y", "pauli_z"):
        if dim != 2:
            raise ProblemSpecError(where, f"{preset} needs a two-level system, got dimension {dim}")
        return pauli(preset[-1]).entries
    if preset == "identity":
        return np.eye(dim, dtype=complex)
    m = _PROJECTOR_RE.match(preset)
    if m:
        i = int(m.group(1))
        if i >= dim:
            raise ProblemSpecError(where, f"projector index {i} out of range for dimension {dim}")
        return projector(i, dim).entries
    raise ProblemSpecError(where, f"unknown preset {preset!r}")


@dataclass
class Observable:
    name: str
    site: int | None
    preset: str | None = None
    matrix: list | None = None

    def to_dict(self) -> dict:
        d = {"name": self.name, "site": self.site}
        if self.preset is not None:
            d["preset"] = self.preset
        else:
            d["matrix"] = [[_cx(complex(z)) for z in row] for row in self.matrix]
        return d


def _default_meter() -> dict:
    s = 1 / math.sqrt(2)
    return {"kind": "qubit", "alpha": [s, 0.0], "beta": [s, 0.0], "omega": None,
            "theta": math.pi / 2, "phi": 0.0}


def _default_pointer() -> dict:
    return {"delta": 1.0, "n": 1024, "q_min": None, "q_max": None}


def _default_scenario() -> dict:
    return {"beta": [0.05, 0.0], "modes": list(OSAKA_MODES)}


def _default_tolerances() -> dict:
    return {"orthogonality": ORTHOGONALITY_THRESHOLD, "conditioning_floor": CONDITIONING_FLOOR,
            "bootstrap_resamples": BOOTSTRAP_RESAMPLES, "oracle_fidelity": 1e-10}


@dataclass
class ProblemSpec:
    dims: list[int] | None = None
    tsv_preset: str | None = None
    pre: list[complex] | None = None
    post: list[complex] | None = None
    observables: list[Observable] = field(default_factory=list)
    k: float = 1.0
    strengths: list[float] | None = None
    meter: dict = field(default_factory=_default_meter)
    pointer: dict = field(default_factory=_default_pointer)
    k_sweep: list[float] = field(default_factory=lambda: [0.2, 0.1, 0.05, 0.025])
    shots: int = 100_000
    seed: int = 0
    scenario: dict = field(default_factory=_default_scenario)
    tolerances: dict = field(default_factory=_default_tolerances)

    # -- parsing ---------------------------------------------------------

    @classmethod
    def from_json(cls, text: str) -> "ProblemSpec":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ProblemSpecError(f"line {exc.lineno} column {exc.colno}", exc.msg) from None
        return cls.from_dict(doc)

    @classmethod
    def from_dict(cls, doc) -> "ProblemSpec":
        if not isinstance(doc, dict):
            raise ProblemSpecError("$", "problem document must be a JSON object")
        unknown = set(doc) - _ROOT_KEYS
        if unknown:
            raise ProblemSpecError(sorted(unknown)[0], "unknown field")
        spec = cls()
        if doc.get("tsv_preset") is not None:
            preset = doc["tsv_preset"]
            if preset not in TSV_PRESETS:
                raise ProblemSpecError("tsv_preset", f"expected one of {sorted(TSV_PRESETS)}")
            spec.tsv_preset = preset
            if doc.get("pre") is not None or doc.get("post") is not None:
                raise ProblemSpecError("tsv_preset", "give either a preset or pre/post, not both")
            spec.dims = [2, 2]
        if doc.get("dims") is not None:
            dims = doc["dims"]
            if not isinstance(dims, list) or not dims:
                raise ProblemSpecError("dims", "expected a nonempty list of integers")
            spec.dims = [_int(d, f"dims[{i}]", 2) for i, d in enumerate(dims)]
            if spec.tsv_preset and spec.dims != [2, 2]:
                raise ProblemSpecError("dims", "presets are two-qubit systems")
        if doc.get("pre") is not None or doc.get("post") is not None:
            for key in ("pre", "post"):
                if doc.get(key) is None:
                    raise ProblemSpecError(key, "pre and post must be given together")
            spec.pre = _amplitudes(doc["pre"], "pre")
            spec.post = _amplitudes(doc["post"], "post")
            if spec.dims is None:
                spec.dims = [len(spec.pre)]
            total = int(np.prod(spec.dims))
            for key in ("pre", "post"):
                amps = getattr(spec, key)
                if len(amps) != total:
                    raise ProblemSpecError(key, f"expected {total} amplitudes, got {len(amps)}")
                if not any(abs(a) > 0 for a in amps):
                    raise ProblemSpecError(key, "state has zero norm")

        obs = doc.get("observables", [])
        if not isinstance(obs, list):
            raise ProblemSpecError("observables", "expected a list")
        spec.observables = [spec._parse_observable(o, f"observables[{i}]") for i, o in enumerate(obs)]
        names = [o.name for o in spec.observables]
        if len(set(names)) != len(names):
            raise ProblemSpecError("observables", "observable names must be unique")

        if "k" in doc:
            spec.k = _float(doc["k"], "k")
        if doc.get("strengths") is not None:
            st = doc["strengths"]
            if not isinstance(st, list) or len(st) != len(spec.observables):
                raise ProblemSpecError("strengths", "need one strength per observable")
            spec.strengths = [_float(v, f"strengths[{i}]") for i, v in enumerate(st)]
        if "meter" in doc:
            spec.meter = spec._parse_meter(doc["meter"])
        if "pointer" in doc:
            spec.pointer = spec._parse_pointer(doc["pointer"])
        if "k_sweep" in doc:
            ks = doc["k_sweep"]
            if not isinstance(ks, list) or not ks:
                raise ProblemSpecError("k_sweep", "expected a nonempty list")
            spec.k_sweep = [_float(v, f"k_sweep[{i}]", positive=True) for i, v in enumerate(ks)]
        if "shots" in doc:
            spec.shots = _int(doc["shots"], "shots", 1)
        if "seed" in doc:
            spec.seed = _int(doc["seed"], "seed", 0)
            if spec.seed >= 2 ** 64:
                raise ProblemSpecError("seed", "must fit in 64 bits")
        if "scenario" in doc:
            spec.scenario = spec._parse_scenario(doc["scenario"])
        if "tolerances" in doc:
            spec.tolerances = spec._parse_tolerances(doc["tolerances"])
        return spec

    def _parse_observable(self, o, where) -> Observable:
        if not isinstance(o, dict):
            raise ProblemSpecError(where, "expected an object")
        unknown = set(o) - {"name", "site", "preset", "matrix"}
        if unknown:
            raise ProblemSpecError(f"{where}.{sorted(unknown)[0]}", "unknown field")
        if self.dims is None:
            raise ProblemSpecError(where, "observables need dims (or a tsv preset) to be known")
        name = o.get("name", f"O{where.split('[')[1].rstrip(']')}")
        if not isinstance(name, str) or not name:
            raise ProblemSpecError(f"{where}.name", "expected a nonempty string")
        site = o.get("site")
        if site is not None:
            site = _int(site, f"{where}.site", 0)
            if site >= len(self.dims):
                raise ProblemSpecError(f"{where}.site", f"out of range for {len(self.dims)} subsystems")
            dim = self.dims[site]
        else:
            dim = int(np.prod(self.dims))
        if ("preset" in o) == ("matrix" in o):
            raise ProblemSpecError(where, "give exactly one of preset or matrix")
        if "preset" in o:
            if not isinstance(o["preset"], str):
                raise ProblemSpecError(f"{where}.preset", "expected a string")
            _preset_matrix(o["preset"], dim, f"{where}.preset")
            return Observable(name, site, preset=o["preset"])
        rows = o["matrix"]
        if not isinstance(rows, list) or len(rows) != dim or any(
                not isinstance(r, list) or len(r) != dim for r in rows):
            raise ProblemSpecError(f"{where}.matrix", f"expected a {dim}x{dim} matrix")
        mat = [[_complex(z, f"{where}.matrix[{i}][{j}]") for j, z in enumerate(r)] for i, r in enumerate(rows)]
        if not OperatorMatrix.from_matrix(np.array(mat)).is_hermitian():
            raise ProblemSpecError(f"{where}.matrix", "observable must be Hermitian")
        return Observable(name, site, matrix=mat)

    def _parse_meter(self, m) -> dict:
        if not isinstance(m, dict):
            raise ProblemSpecError("meter", "expected an object")
        out = _default_meter()
        unknown = set(m) - set(out)
        if unknown:
            raise ProblemSpecError(f"meter.{sorted(unknown)[0]}", "unknown field")
        if "kind" in m:
            if m["kind"] not in METER_KINDS:
                raise ProblemSpecError("meter.kind", f"expected one of {METER_KINDS}")
            out["kind"] = m["kind"]
        for key in ("alpha", "beta"):
            if key in m:
                out[key] = _cx(_complex(m[key], f"meter.{key}"))
        if m.get("omega") is not None:
            om = m["omega"]
            if not isinstance(om, list):
                raise ProblemSpecError("meter.omega", "expected a list of meter-qubit indices")
            out["omega"] = sorted({_int(v, f"meter.omega[{i}]", 0) for i, v in enumerate(om)})
        for key in ("theta", "phi"):
            if key in m:
                out[key] = _float(m[key], f"meter.{key}")
        return out

    def _parse_pointer(self, p) -> dict:
        if not isinstance(p, dict):
            raise ProblemSpecError("pointer", "expected an object")
        out = _default_pointer()
        unknown = set(p) - set(out)
        if unknown:
            raise ProblemSpecError(f"pointer.{sorted(unknown)[0]}", "unknown field")
        if "delta" in p:
            out["delta"] = _float(p["delta"], "pointer.delta", positive=True)
        if "n" in p:
            n = _int(p["n"], "pointer.n", 64)
            if n & (n - 1):
                raise ProblemSpecError("pointer.n", "must be a power of two")
            out["n"] = n
        for key in ("q_min", "q_max"):
            if p.get(key) is not None:
                out[key] = _float(p[key], f"pointer.{key}")
        if (out["q_min"] is None) != (out["q_max"] is None):
            raise ProblemSpecError("pointer", "give both q_min and q_max or neither")
        if out["q_min"] is not None and out["q_max"] <= out["q_min"]:
            raise ProblemSpecError("pointer.q_max", "must exceed q_min")
        return out

    def _parse_scenario(self, s) -> dict:
        if not isinstance(s, dict):
            raise ProblemSpecError("scenario", "expected an object")
        out = _default_scenario()
        unknown = set(s) - set(out)
        if unknown:
            raise ProblemSpecError(f"scenario.{sorted(unknown)[0]}", "unknown field")
        if "beta" in s:
            out["beta"] = _cx(_complex(s["beta"], "scenario.beta"))
        if "modes" in s:
            modes = s["modes"]
            if not isinstance(modes, list) or not modes or any(x not in OSAKA_MODES for x in modes):
                raise ProblemSpecError("scenario.modes", f"expected a nonempty subset of {OSAKA_MODES}")
            out["modes"] = [x for x in OSAKA_MODES if x in modes]
        return out

    def _parse_tolerances(self, t) -> dict:
        if not isinstance(t, dict):
            raise ProblemSpecError("tolerances", "expected an object")
        out = _default_tolerances()
        unknown = set(t) - set(out)
        if unknown:
            raise ProblemSpecError(f"tolerances.{sorted(unknown)[0]}", "unknown field")
        if "orthogonality" in t and t["orthogonality"] != ORTHOGONALITY_THRESHOLD:
            raise ProblemSpecError("tolerances.orthogonality",
                                   f"fixed at {ORTHOGONALITY_THRESHOLD}; echoed for reference only")
        if "conditioning_floor" in t:
            out["conditioning_floor"] = _float(t["conditioning_floor"], "tolerances.conditioning_floor",
                                               positive=True)
        if "bootstrap_resamples" in t:
            out["bootstrap_resamples"] = _int(t["bootstrap_resamples"], "tolerances.bootstrap_resamples", 0)
        if "oracle_fidelity" in t:
            out["oracle_fidelity"] = _float(t["oracle_fidelity"], "tolerances.oracle_fidelity", positive=True)
        return out

    # -- resolution --------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "dims": None if self.dims is None else list(self.dims),
            "tsv_preset": self.tsv_preset,
            "pre": None if self.pre is None else [_cx(z) for z in self.pre],
            "post": None if self.post is None else [_cx(z) for z in self.post],
            "observables": [o.to_dict() for o in self.observables],
            "k": self.k,
            "strengths": None if self.strengths is None else list(self.strengths),
            "meter": copy.deepcopy(self.meter),
            "pointer": copy.deepcopy(self.pointer),
            "k_sweep": list(self.k_sweep),
            "shots": self.shots,
            "seed": self.seed,
            "scenario": copy.deepcopy(self.scenario),
            "tolerances": copy.deepcopy(self.tolerances),
        }

    @property
    def space(self) -> HilbertDims:
        if self.dims is None:
            raise ProblemSpecError("dims", "no system specified")
        return HilbertDims(tuple(self.dims))

    def tsv(self) -> TwoStateVector:
        if self.tsv_preset is not None:
            return TSV_PRESETS[self.tsv_preset]()
        if self.pre is None:
            raise ProblemSpecError("pre", "no two-state vector given (pre/post or tsv_preset)")
        return TwoStateVector(StateVector(self.space, self.pre), StateVector(self.space, self.post))

    def operator(self, obs: Observable):
        """``LocalObservable`` for site-tagged entries, else a global ``OperatorMatrix``."""
        if obs.site is not None:
            dim = self.dims[obs.site]
            m = _preset_matrix(obs.preset, dim, obs.name) if obs.preset else np.array(obs.matrix)
            return LocalObservable(obs.site, OperatorMatrix.from_matrix(m))
        space = self.space
        m = _preset_matrix(obs.preset, space.total, obs.name) if obs.preset else np.array(obs.matrix)
        return OperatorMatrix(space, m)

    def locals(self, where: str = "observables") -> list[LocalObservable]:
        ops = [self.operator(o) for o in self.observables]
        if not all(isinstance(o, LocalObservable) for o in ops):
            raise ProblemSpecError(where, "this command needs site-tagged (local) observables")
        return ops

    def require_observables(self, n: int, where: str = "observables"):
        if len(self.observables) < n:
            raise ProblemSpecError(where, f"need at least {n} observable(s)")

    @property
    def alpha(self) -> complex:
        return complex(*self.meter["alpha"])

    @property
    def beta(self) -> complex:
        return complex(*self.meter["beta"])
