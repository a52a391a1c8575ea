import json

import numpy as np

from rokhlin.crossed import FormalElement, sample_subalgebra_element
from rokhlin.subshift import ClopenSet, Window


class TestClopenSetJson:
    def test_round_trip(self, fib, fib_y):
        for C in (fib_y, fib.full_set(), fib.empty_set(),
                  fib_y & fib.cylinder(Window(2, 2), "1")):
            data = C.to_json()
            again = ClopenSet.from_json(fib, data)
            assert again == C
            assert json.loads(json.dumps(data)) == data

    def test_schema_fields(self, pd_y):
        data = pd_y.to_json()
        assert set(data) == {"window", "words"}
        assert data["window"] == [0, 0]
        assert data["words"] == ["0"]


class TestFormalElementJson:
    def test_schema_fields(self, pd):
        from rokhlin.crossed import CylinderFunction
        a = FormalElement.single(
            1, CylinderFunction.indicator(pd.cylinder(Window(0, 0), "1")))
        data = a.to_json()
        assert list(data) == ["terms"]
        (term,) = data["terms"]
        assert term["n"] == 1
        assert term["window"] == [0, 0]
        assert term["values"] == {"0": [0.0, 0.0], "1": [1.0, 0.0]}

    def test_round_trip_random(self, pd, pd_y):
        rng = np.random.default_rng(40)
        for _ in range(10):
            a = sample_subalgebra_element(pd, pd_y, rng, 2)
            text = json.dumps(a.to_json())
            again = FormalElement.from_json(pd, json.loads(text))
            assert again.support == a.support
            for n in a.support:
                assert (again.coefficient(n) - a.coefficient(n)).sup_norm() == 0.0


class TestReportJson:
    def test_rokhlin_system_schema(self, pd_full):
        data = pd_full.to_json()
        assert data["heights"] == [1, 2]
        assert data["m"] == 1
        assert data["bases"][1] == {"window": [0, 2], "words": ["000", "010"]}
        assert data["boundaries"][1]["words"] == ["000"]

    def test_rc_report_json(self, pd_full):
        from rokhlin.cuntz import rc_upper_bound
        data = rc_upper_bound(pd_full, Window(0, 0), 2).to_json()
        assert data["per_level"] == [1.5, 1.25]
        assert data["bound"] == 1.5
        assert data["separation_verified"] is True
