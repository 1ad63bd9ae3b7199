import json

import numpy as np
import pytest

from rymap.discrepancy import RECORD_BUILDERS, discrepancy_records, relative_gap


def test_relative_gap():
    assert relative_gap(0.0, 0.0) == 0.0
    assert relative_gap(1.0, 2.0) == pytest.approx(0.5)
    assert relative_gap([3.0, 0.0], [0.0, 4.0]) == pytest.approx(1.25)
    assert relative_gap(2.0, -2.0) == pytest.approx(2.0)


def test_records_are_complete_and_serializable():
    records = discrepancy_records()
    assert len(records) == len(RECORD_BUILDERS)
    ids = [r.equation_id for r in records]
    assert len(set(ids)) == len(ids)
    for r in records:
        assert r.description and r.configuration
        assert len(r.printed_value) == len(r.engine_value) > 0
        assert r.relative_gap == pytest.approx(relative_gap(r.printed_value, r.engine_value))
        json.dumps(r.to_dict())


def test_records_are_deterministic():
    a = [r.to_dict() for r in discrepancy_records()]
    b = [r.to_dict() for r in discrepancy_records()]
    assert a == b


def test_known_gaps():
    by_id = {r.equation_id: r for r in discrepancy_records()}
    # trace of the RY map is twice the printed volume rate
    r = by_id["eq2.5"]
    assert r.engine_value[0] == pytest.approx(2 * r.printed_value[0], rel=1e-8)
    # the printed polar form drops a first-order term, so the two sides cannot agree
    assert by_id["eq3.5"].relative_gap > 0.1
    # the warped-flow printed coefficient has the opposite sign to the derived one
    g = by_id["eq1.21"]
    assert np.sign(g.printed_value[0]) != np.sign(g.engine_value[0])
