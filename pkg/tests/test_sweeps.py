import json
import math
from fractions import Fraction

import pytest

from lcdk.report import Tally, VerificationReport, combine_reports
from lcdk.sequences import IntegerInterval
from lcdk.sweeps import SWEEPS, geom_grid, sweep_four_functions, sweep_functional_dilation


def test_tally_worst_and_tie_break():
    a, b = Tally("x"), Tally("x")
    for t, inst in ((0.5, {"i": 2}), (-1.0, {"i": 9}), (-1.0, {"i": 1})):
        a.add(t, inst)
    for t, inst in ((-1.0, {"i": 1}), (-1.0, {"i": 9}), (0.5, {"i": 2})):
        b.add(t, inst)
    assert a.witness == b.witness == {"i": 1}
    rep = a.report()
    assert rep.instances_checked == 3 and rep.passes == 1 and not rep.ok


def test_report_json_and_csv():
    t = Tally("y")
    t.add(0.25, {"f": [Fraction(1, 3)]})
    rep = t.report(config={"seed": 1})
    data = json.loads(json.dumps(rep.to_json()))
    assert data["witness"] == {"f": ["1/3"]} and data["ok"]
    assert rep.to_csv().splitlines()[0].startswith("name")
    with pytest.raises(ValueError):
        VerificationReport("z", 1, 2, 0.0, None, True)


def test_combine_reports():
    t1, t2 = Tally("a"), Tally("b")
    t1.add(0.1, 1)
    t2.add(-0.2, 2)
    rep = combine_reports("ab", [t1.report(), t2.report()])
    assert rep.instances_checked == 2 and rep.worst_slack == -0.2 and not rep.ok
    assert rep.witness == {"check": "b", "instance": 2}
    assert set(rep.extra["parts"]) == {"a", "b"}


def test_geom_grid_size():
    assert len(geom_grid()) == 24 * 2 * 201
    assert len(geom_grid(ps=(0.5,), ks=(0,), max_len=3)) == 4


def test_four_functions_sweep():
    rep = sweep_four_functions()
    assert rep.ok and rep.extra["log_affine_failures"] == 0
    assert rep.passes == rep.instances_checked == 16 * 9 * 500


def test_functional_dilation_sweep():
    rep = sweep_functional_dilation()
    assert rep.ok and rep.worst_slack >= -1e-12
    cross = rep.extra["parts"]["functional-vs-geometric"]
    assert cross["instances_checked"] > 200


def test_every_sweep_is_registered():
    assert set(SWEEPS) == {"four-functions", "convolution", "prekopa-leindler", "dilation",
                           "functional-dilation", "deviations", "mean-deviation", "reverse-jensen"}


def test_small_sweeps_are_deterministic():
    a = SWEEPS["dilation"](K=IntegerInterval(0, 6), subsets=50, random_count=10, seed=3)
    b = SWEEPS["dilation"](K=IntegerInterval(0, 6), subsets=50, random_count=10, seed=3)
    assert a.to_json() == b.to_json()
    assert math.isfinite(a.worst_slack)
