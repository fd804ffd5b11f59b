import json
import math

import numpy as np
import pytest

from modval.core import LocalObservable, OperatorMatrix
from modval.problem import ProblemSpec, ProblemSpecError
from modval.twostate import ORTHOGONALITY_THRESHOLD, weak_value

QUBIT = {"dims": [2], "pre": [1, 0], "post": [[0.6, 0], [0.8, 0]],
         "observables": [{"name": "sx", "site": 0, "preset": "pauli_x"}]}


def parse(doc):
    return ProblemSpec.from_dict(doc)


class TestParsing:
    def test_defaults_resolved(self):
        spec = parse({})
        d = spec.to_dict()
        assert d["pointer"] == {"delta": 1.0, "n": 1024, "q_min": None, "q_max": None}
        assert d["tolerances"]["orthogonality"] == ORTHOGONALITY_THRESHOLD
        assert d["tolerances"]["bootstrap_resamples"] == 100
        assert d["tolerances"]["conditioning_floor"] == 0.05
        assert d["k_sweep"] == [0.2, 0.1, 0.05, 0.025]

    def test_complex_pairs(self):
        spec = parse({"dims": [2], "pre": [[0, 1], 1], "post": [1, 0]})
        assert spec.pre == [1j, 1]

    def test_preset_tsv(self):
        spec = parse({"tsv_preset": "hardy",
                      "observables": [{"name": "P_A", "site": 0, "preset": "projector(0)"}]})
        assert spec.dims == [2, 2]
        assert weak_value(spec.tsv(), spec.operator(spec.observables[0])).value == pytest.approx(1)

    def test_matrix_observable(self):
        spec = parse({"dims": [2], "pre": [1, 0], "post": [1, 1],
                      "observables": [{"name": "h", "matrix": [[1, [0, -1]], [[0, 1], -1]]}]})
        op = spec.operator(spec.observables[0])
        assert isinstance(op, OperatorMatrix)
        np.testing.assert_allclose(op.entries, [[1, -1j], [1j, -1]])

    def test_local_observable(self):
        op = parse(QUBIT).operator(parse(QUBIT).observables[0])
        assert isinstance(op, LocalObservable) and op.site == 0

    def test_meter_and_pointer(self):
        spec = parse({"meter": {"kind": "multi", "omega": [1, 0, 1], "beta": [0, 0.5]},
                      "pointer": {"delta": 2.0, "n": 512, "q_min": -40, "q_max": 40}})
        assert spec.meter["omega"] == [0, 1]
        assert spec.beta == 0.5j
        assert spec.pointer["n"] == 512

    def test_round_trip(self):
        spec = parse({**QUBIT, "k": 0.3, "meter": {"kind": "spin", "theta": 1.0}, "seed": 99,
                      "scenario": {"beta": 0.2, "modes": ["split", "full"]}})
        again = ProblemSpec.from_dict(json.loads(json.dumps(spec.to_dict())))
        assert again.to_dict() == spec.to_dict()
        assert again.scenario["modes"] == ["full", "split"]


class TestErrors:
    @pytest.mark.parametrize("doc, location", [
        ({"bogus": 1}, "bogus"),
        ({"dims": [2], "pre": [1, 0]}, "post"),
        ({"dims": [2, 2], "pre": [1, 0], "post": [1, 0]}, "pre"),
        ({"dims": [2], "pre": [0, 0], "post": [1, 0]}, "pre"),
        ({"dims": [2], "pre": [1, 0], "post": [1, "x"]}, "post[1]"),
        ({"k": "fast"}, "k"),
        ({"k": True}, "k"),
        ({"shots": 0}, "shots"),
        ({"seed": -1}, "seed"),
        ({"seed": 2 ** 64}, "seed"),
        ({"tsv_preset": "nope"}, "tsv_preset"),
        ({"meter": {"kind": "laser"}}, "meter.kind"),
        ({"meter": {"alpha": "a"}}, "meter.alpha"),
        ({"pointer": {"n": 1000}}, "pointer.n"),
        ({"pointer": {"q_min": -1}}, "pointer"),
        ({"pointer": {"delta": 0}}, "pointer.delta"),
        ({"k_sweep": [0.1, -0.1]}, "k_sweep[1]"),
        ({"scenario": {"modes": ["dream"]}}, "scenario.modes"),
        ({"tolerances": {"orthogonality": 1e-6}}, "tolerances.orthogonality"),
        ({"observables": [{"name": "x", "preset": "pauli_x"}]}, "observables[0]"),
        ({"dims": [3], "observables": [{"name": "x", "site": 0, "preset": "pauli_x"}]}, "observables[0].preset"),
        ({"dims": [2], "observables": [{"name": "x", "site": 3, "preset": "pauli_x"}]}, "observables[0].site"),
        ({"dims": [2], "observables": [{"name": "x", "matrix": [[0, 1], [0, 0]]}]}, "observables[0].matrix"),
        ({"dims": [2], "observables": [{"name": "x", "preset": "projector(5)"}]}, "observables[0].preset"),
        ({"dims": [2], "observables": [{"name": "a", "site": 0, "preset": "pauli_x"},
                                       {"name": "a", "site": 0, "preset": "pauli_z"}]}, "observables"),
        ({**QUBIT, "strengths": [1, 2]}, "strengths"),
    ])
    def test_located(self, doc, location):
        with pytest.raises(ProblemSpecError) as info:
            parse(doc)
        assert info.value.location == location

    def test_json_syntax_error_has_line_and_column(self):
        with pytest.raises(ProblemSpecError) as info:
            ProblemSpec.from_json('{\n  "k": 1,\n  oops\n}')
        assert info.value.location == "line 3 column 3"

    def test_is_value_error(self):
        assert issubclass(ProblemSpecError, ValueError)

    def test_missing_tsv(self):
        with pytest.raises(ProblemSpecError):
            parse({"dims": [2]}).tsv()

    def test_locals_required(self):
        spec = parse({"dims": [2], "observables": [{"name": "g", "preset": "identity"}]})
        with pytest.raises(ProblemSpecError):
            spec.locals()
        with pytest.raises(ProblemSpecError):
            spec.require_observables(2)

    def test_alpha_beta_complex(self):
        spec = parse({"meter": {"alpha": [0, 1], "beta": 0.5}})
        assert spec.alpha == 1j and spec.beta == 0.5
        assert math.isclose(spec.meter["theta"], math.pi / 2)
