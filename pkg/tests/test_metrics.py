import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_spec
from iotdefense.harm import GroupedPathSet, PathSet
from iotdefense.metrics import (
    DegenerateDeploymentWarning,
    Evaluator,
    analysis_metrics,
    costs,
    dnf,
    evaluate,
    nip,
    rcf,
    read_metric_csv,
    write_metric_csv,
)
from iotdefense.network import build_network, decoy_types, patch_types, random_deployment
from iotdefense.scenarios import PACS_DEPLOYMENTS

CASE_STUDY_POINTS = {
    "P1": (0.483, 0.450),
    "P2": (0.388, 0.892),
    "P3": (0.414, 0.886),
    "P4": (0.431, 0.874),
    "P5": (0.482, 0.802),
}


@pytest.mark.parametrize("name", sorted(CASE_STUDY_POINTS))
@pytest.mark.parametrize("method", ["counting", "explicit"])
def test_case_study_points(pacs, name, method):
    f = evaluate(pacs, PACS_DEPLOYMENTS[name], method=method)
    assert f.dnf == pytest.approx(CASE_STUDY_POINTS[name][0], abs=5e-4)
    assert f.nip == pytest.approx(CASE_STUDY_POINTS[name][1], abs=5e-4)


def test_hand_checked_points(pacs):
    a = evaluate(pacs, PACS_DEPLOYMENTS["A*"], method="explicit")
    assert a.dnf == pytest.approx(11 / 16, abs=1e-15)
    d1 = evaluate(pacs, PACS_DEPLOYMENTS["dv1"])
    assert d1.dnf == pytest.approx(0.47917, abs=1e-5)
    assert d1.nip == pytest.approx(0.84375, abs=1e-12)
    d = evaluate(pacs, PACS_DEPLOYMENTS["D*"])
    assert d.rcf == pytest.approx((36_900 - 20_400) / 36_900)
    assert evaluate(pacs, PACS_DEPLOYMENTS["C*"]).nip == 0.9


def test_cost_breakdown(pacs):
    cb = costs(pacs, PACS_DEPLOYMENTS["P4"])
    assert (cb.ic, cb.dc, cb.pmc, cb.tc) == (20_000, 1_900, 3_000, 36_900)
    assert cb.dcdm == 24_900
    assert rcf(cb) == pytest.approx(12_000 / 36_900)
    only_patch = costs(pacs, (0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1))
    assert only_patch.dcdm == 14_000  # no decoy, so no intelligence-center cost


def test_analysis_metrics(pacs):
    m = analysis_metrics(pacs, PACS_DEPLOYMENTS["P1"])
    assert (m.naprt, m.napdt, m.dcdm) == (64, 40, 24_400)
    assert m.pd == 5 / 16 and m.ppd == 2 / 16


def test_empty_path_set_warns():
    empty = PathSet((), ())
    with pytest.warns(DegenerateDeploymentWarning):
        assert dnf(empty) == 0.0
    with pytest.warns(DegenerateDeploymentWarning):
        assert nip(GroupedPathSet(3, ())) == 0.0


def test_batch_is_order_independent(pacs):
    ev = Evaluator(pacs)
    dvs = np.array(list(PACS_DEPLOYMENTS.values()), dtype=np.int8)
    F = ev.objectives(dvs)
    perm = np.random.default_rng(0).permutation(len(dvs))
    assert np.array_equal(ev.objectives(dvs[perm]), F[perm])
    threaded = Evaluator(pacs, jobs=3).objectives(dvs)
    assert np.array_equal(threaded, F)
    singles = np.array([ev.objectives(d[None])[0] for d in dvs])
    assert np.array_equal(singles, F)


def test_metric_csv_round_trip(pacs, tmp_path):
    ev = Evaluator(pacs)
    rows = ev.rows(np.array(list(PACS_DEPLOYMENTS.values()), dtype=np.int8))
    path = tmp_path / "m.csv"
    text = write_metric_csv(rows, path)
    assert text.splitlines()[0] == "dv_bits,dnf,nip,rcf,pd,ppd,naprt,napdt,dcdm"
    assert read_metric_csv(path) == rows


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_counting_matches_explicit(seed):
    rng = np.random.default_rng(seed)
    net = build_network(random_spec(rng))
    dv = random_deployment(decoy_types(net), patch_types(net), rng)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateDeploymentWarning)
        fast = evaluate(net, dv)
        slow = evaluate(net, dv, method="explicit")
    assert math.isclose(fast.dnf, slow.dnf, rel_tol=0, abs_tol=1e-12)
    assert math.isclose(fast.nip, slow.nip, rel_tol=0, abs_tol=1e-12)
    assert fast.rcf == slow.rcf


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_rcf_decreases_with_spending(seed):
    rng = np.random.default_rng(seed)
    net = build_network(random_spec(rng))
    Y_d, Y_p = decoy_types(net), patch_types(net)
    dv = list(random_deployment(Y_d, Y_p, rng).values)
    base = rcf(costs(net, dv))
    slots = [i for i, t in enumerate(Y_d) if dv[i] < t.max_level]
    slots += [len(Y_d) + j for j in range(len(Y_p)) if dv[len(Y_d) + j] == 0]
    for i in slots:
        more = list(dv)
        more[i] += 1
        assert rcf(costs(net, more)) <= base
