import numpy as np
import pytest

from passlab import (MountainPassInstance, catalog_field, check_conclusions,
                     check_mpt_geometry, default_box, optimize_c1, optimize_c2,
                     ps_probe, trace_proof_argument)
from passlab.errors import InvalidInstance

OPT_KW = dict(ensemble_size=4, M=16, max_iters=150, seed=0)


def _instance(name, e=(1.0, 0.0), r=None):
    f = catalog_field(name)
    return MountainPassInstance(f, default_box(name), np.array([0.0, 0.0]),
                                np.asarray(e, float), radius=r)


@pytest.fixture(scope="module")
def w2s_results(w2s_instance):
    return (optimize_c1(w2s_instance, **OPT_KW),
            optimize_c2(w2s_instance, **OPT_KW))


def test_c2_estimates():
    assert optimize_c2(_instance("paraboloid"), **OPT_KW).value \
        == pytest.approx(1.0, abs=0.01)
    assert optimize_c2(_instance("affine"), **OPT_KW).value \
        == pytest.approx(1.0, abs=0.01)


def test_c1_estimates():
    assert optimize_c1(_instance("paraboloid"), **OPT_KW).value \
        == pytest.approx(0.0, abs=0.01)
    assert optimize_c1(_instance("affine"), **OPT_KW).value \
        == pytest.approx(0.0, abs=0.01)


def test_w2s_minimax_values(w2s_results):
    r1, r2 = w2s_results
    assert r1.value == pytest.approx(0.0, abs=0.01)
    assert r2.value == pytest.approx(1.0, abs=0.03)
    assert np.linalg.norm(r1.witness_point - [0.0, 0.0]) <= 0.05
    assert np.linalg.norm(r2.witness_point - [1.0, 0.0]) <= 0.05


def test_history_monotone(w2s_results):
    r1, r2 = w2s_results
    assert all(b >= a for a, b in zip(r1.history, r1.history[1:]))
    assert all(b <= a for a, b in zip(r2.history, r2.history[1:]))


def test_bounds_vs_pins(w2s_instance, w2s_results):
    r1, r2 = w2s_results
    f = w2s_instance.field
    vals = [float(f.evaluate(w2s_instance.pin_zero)),
            float(f.evaluate(w2s_instance.pin_e))]
    assert r1.value <= min(vals) + 1e-12
    assert r2.value >= max(vals) - 1e-12


def test_witness_is_extremal_node(w2s_results, w2s_instance):
    r1, r2 = w2s_results
    f = w2s_instance.field
    assert float(f.evaluate(r1.witness_point)) == r1.value
    assert float(f.evaluate(r2.witness_point)) == r2.value
    assert np.array_equal(r1.witness_path.nodes[r1.witness_index],
                          r1.witness_point)


def test_optimizer_deterministic(w2s_instance):
    a = optimize_c2(w2s_instance, **OPT_KW)
    b = optimize_c2(w2s_instance, **OPT_KW)
    assert a.to_dict() == b.to_dict()


def test_conclusions_w2s(w2s_instance, w2s_results):
    r1, r2 = w2s_results
    out = check_conclusions(w2s_instance, r1, r2, eps=0.05)
    assert all(out[k]["holds"] for k in ("I", "II", "III", "IV"))
    assert out["II"]["grad_norm"] <= 0.1
    assert out["IV"]["grad_norm"] <= 0.1


def test_conclusions_paraboloid_eps_dependence():
    inst = _instance("paraboloid")
    r1 = optimize_c1(inst, **OPT_KW)
    r2 = optimize_c2(inst, **OPT_KW)
    small = check_conclusions(inst, r1, r2, eps=0.05)
    assert not small["IV"]["holds"]
    assert small["IV"]["grad_norm"] == pytest.approx(2.0, abs=0.05)
    large = check_conclusions(inst, r1, r2, eps=1.1)
    assert large["IV"]["holds"]


def test_proof_trace_arithmetic(w2s_instance):
    trace = trace_proof_argument(w2s_instance, 0.0, 1.0, 0.3)
    assert trace.eps1 == 0.25
    steps = {s["name"]: s for s in trace.steps}
    assert steps["eps1_formula"]["verdict"] == "holds"
    assert steps["level_separation"]["verdict"] == "holds"
    assert steps["pin_zero_fixed"]["verdict"] == "holds"
    assert steps["pin_e_fixed"]["verdict"] == "holds"


def test_proof_trace_eps1_capped(w2s_instance):
    trace = trace_proof_argument(w2s_instance, 0.0, 1.0, 0.1)
    assert trace.eps1 == 0.1


def test_proof_trace_requires_distinct_levels(w2s_instance):
    with pytest.raises(InvalidInstance):
        trace_proof_argument(w2s_instance, 0.5, 0.5, 0.3)


def test_proof_trace_records_deformed_bound(w2s_instance):
    trace = trace_proof_argument(w2s_instance, 0.0, 1.0, 0.3)
    names = [s["name"] for s in trace.steps]
    assert any(n.endswith("_band_path") for n in names)
    assert any(n.endswith("_deformed_bound") for n in names)
    for s in trace.steps:
        assert s["verdict"] in ("holds", "fails", "vacuous")


def test_ps_probe_vacuous():
    f = catalog_field("paraboloid")
    rep = ps_probe(f, default_box("paraboloid"), 1.0, 0.1, samples=48, seed=0)
    assert rep.verdict == "Vacuous"
    assert 1.85 <= rep.band_min_grad <= 1.95


def test_ps_probe_consistent():
    f = catalog_field("well_to_saddle")
    rep = ps_probe(f, default_box("well_to_saddle"), 1.0, 0.05,
                   samples=48, seed=0)
    assert rep.verdict == "Consistent"
    dists = [np.linalg.norm(np.asarray(p) - [1.0, 0.0])
             for p in rep.accumulation_points]
    assert min(dists) <= 0.05


def test_ps_probe_escaping():
    f = catalog_field("exp_decay")
    rep = ps_probe(f, default_box("exp_decay"), 0.0, 0.05, samples=48, seed=0)
    assert rep.verdict == "EscapingTrend"
    seq = np.asarray(rep.sample_sequence)
    assert len(seq) >= 2
    gns = np.asarray(f.grad_norm(seq))
    assert np.all(np.diff(gns) <= 1e-15)
    assert seq[-1][0] > seq[0][0]  # marches along increasing x


def test_geometry_w2s_holds():
    inst = _instance("well_to_saddle", e=(2.0, 0.0), r=1.0)
    res = check_mpt_geometry(inst, sphere_samples=2048, seed=0)
    assert res.verdict
    assert res.b == pytest.approx(1.0, abs=0.01)


def test_geometry_paraboloid_fails():
    inst = _instance("paraboloid", e=(1.0, 0.0), r=0.5)
    res = check_mpt_geometry(inst, sphere_samples=512, seed=0)
    assert not res.verdict
    assert res.phi_at_e > res.phi_at_zero


def test_geometry_affine_fails():
    inst = _instance("affine", e=(1.0, 0.0), r=0.5)
    res = check_mpt_geometry(inst, sphere_samples=512, seed=0)
    assert not res.verdict
    assert res.b == pytest.approx(-0.5, abs=0.01)
