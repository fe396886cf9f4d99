import json

import numpy as np
import pytest

import dosmlab as dl


def dense_trace(op, lat, f, block):
    lam, vec = np.linalg.eigh(op.dense())
    sites = lat.block_sites(block)
    w = (vec[sites, :] ** 2).sum(axis=0)
    return float(np.sum(w * f(lam)))


def test_measure_basics():
    nu = dl.quantize("bernoulli", {"p": 0.25, "low": 0.0, "high": 2.0})
    atoms = nu.atoms()
    assert sum(w for _, w in atoms) == pytest.approx(1.0)
    assert dl.moment(nu, 1) == pytest.approx(0.25 * 2.0)
    assert nu.min_location == 0.0 and nu.max_location == 2.0
    assert dl.bl_distance(nu, nu) == pytest.approx(0.0, abs=1e-12)


def test_bl_distance_matches_oracle():
    a = dl.Measure([(0.0, 0.5), (1.0, 0.5)])
    b = dl.Measure([(0.2, 0.3), (0.9, 0.7)])
    assert dl.bl_distance(a, b) == pytest.approx(dl.bl_distance_oracle(a, b, 400), abs=1e-6)


def test_test_function_vectorized():
    f = dl.TestFunction.bump(2.0, center=0.5)
    xs = np.linspace(-3, 4, 15)
    ys = f(xs)
    assert ys.shape == xs.shape
    assert np.all(ys[(xs < -1.5) | (xs > 2.5)] == 0.0)
    assert f(0.5) == pytest.approx(f.derivative(0, 0.5))
    assert f.lower == pytest.approx(-1.5) and f.upper == pytest.approx(2.5)
    # central difference as the derivative oracle
    h = 1e-5
    x = 0.9
    assert f.derivative(1, x) == pytest.approx((f(x + h) - f(x - h)) / (2 * h), rel=1e-6)


def test_misaligned_box_raises():
    with pytest.raises(dl.MisalignedBox, match="K=2"):
        dl.Lattice(dl.Box(d=1, half_side=5, K=2))
    with pytest.raises(dl.InvalidInput):
        dl.Lattice(dl.Box(d=1, half_side=5, K=2))


def test_traces_against_numpy():
    lat = dl.Lattice(dl.Box(d=1, half_side=20))
    nu = dl.quantize("bernoulli", {"p": 0.5, "low": 0.0, "high": 1.0})
    op = dl.Operator(lat, dl.sample_disorder(nu, lat, seed=3))
    f = dl.TestFunction.bump(2.5, center=0.5)
    block = lat.origin_block
    exact = dense_trace(op, lat, f, block)
    assert dl.eig_trace(op, f, block) == pytest.approx(exact, abs=1e-10)
    hs = dl.hs_trace(op, f, block, dl.Quadrature())
    assert hs["value"] == pytest.approx(exact, abs=1e-6)


def test_dirac_dosm_is_deterministic():
    lat = dl.Lattice(dl.Box(d=2, half_side=4, K=2))
    nu = dl.Measure.dirac(0.5)
    f = dl.TestFunction.bump(3.0)
    est = dl.dosm_estimate(nu, lat, f, samples=4, seed=1)
    op = dl.Operator(lat, [0.5] * lat.blocks)
    assert est["stderr"] == 0.0
    assert est["value"] == pytest.approx(dense_trace(op, lat, f, lat.origin_block) / lat.rank, abs=1e-10)


def test_ids_curve_monotone():
    lat = dl.Lattice(dl.Box(d=1, half_side=30))
    nu = dl.quantize("uniform", {"a": 0.0, "b": 1.0}, n_atoms=16)
    curve = dl.ids_curve(nu, lat, [-2.0, 0.0, 1.0, 3.5], samples=8, seed=5)
    values = [c["value"] for c in curve]
    assert values == sorted(values)
    assert values[0] == pytest.approx(0.0, abs=1e-12)
    assert values[-1] == pytest.approx(1.0, abs=1e-12)


def test_registry_and_run():
    names = {e["name"] for e in dl.experiments()}
    assert {"ct-decay", "metric", "dosm", "finite-range"} <= names
    report = dl.run(dl.minimal_config("metric"), seed=7)
    assert report["kind"] == "metric"
    assert report["seed"] == 7
    assert dl.EXIT_CODES[report["verdict"]] == 0


def test_run_deterministic_across_threads():
    cfg = dl.minimal_config("dosm")
    a = dl.run(cfg, seed=11, threads=1)
    b = dl.run(json.dumps(cfg), seed=11, threads=3)
    a.pop("timestamp")
    b.pop("timestamp")
    assert a == b


def test_run_writes_files(tmp_path):
    report = dl.run(dl.minimal_config("ids"), seed=2, out_dir=str(tmp_path), write_files=True)
    files = report["files"]
    assert files["json"].endswith(".json") and files["csv"].endswith(".csv")
    assert len(list(tmp_path.iterdir())) == 2


def test_bad_config_reports_path():
    cfg = dl.minimal_config("dosm")
    cfg["box"]["dimension_typo"] = 2
    with pytest.raises(dl.InvalidInput, match="box"):
        dl.run(cfg)
