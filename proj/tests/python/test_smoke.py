import json

import numpy as np
import pytest

import lobhawkes as lh

EXP = {
    "flavor": "linear",
    "mu": [1.0],
    "kernels": [[{"type": "exponential", "alpha": 0.5, "beta": 10.0}]],
}


def test_simulate_is_deterministic():
    a = lh.simulate(EXP, horizon=500.0, seed=9)
    b = lh.simulate(json.dumps(EXP), horizon=500.0, seed=9)
    assert a.stream.sessions[0].times == b.stream.sessions[0].times
    assert a.model_hash == b.model_hash
    assert a.metadata()["seed"] == 9


def test_estimate_pipeline():
    res = lh.simulate(EXP, horizon=2e4, seed=3)
    grid = lh.build_linlog_grid()
    claw = lh.estimate_conditional_law(res.stream, grid, threads=2)
    est = lh.solve_wiener_hopf(claw, lh.build_quadrature())
    assert est.norms.shape == (1, 1)
    assert abs(est.norms[0, 0] - 0.5) < 0.1
    assert est.diagnostics.residual < 1e-8
    phi = est.kernel(0, 0)
    assert isinstance(phi, np.ndarray)
    assert len(phi) == est.quad.size() == 161


def test_mean_intensity():
    assert lh.mean_intensity(EXP)[0] == pytest.approx(2.0)


def test_errors_map_to_python():
    unstable = dict(EXP, kernels=[[{"type": "exponential", "alpha": 1.5, "beta": 10.0}]])
    with pytest.raises(ValueError):
        lh.simulate(unstable, horizon=10.0)
    params = lh.LinLogParams()
    params.h_max = 0.0
    with pytest.raises(lh.InvalidArgument):
        lh.build_linlog_grid(params)


def test_estimate_files_round_trip(tmp_path):
    res = lh.simulate(EXP, horizon=2000.0, seed=1)
    est = lh.solve_wiener_hopf(lh.estimate_conditional_law(res.stream, lh.build_linlog_grid()), lh.build_quadrature())
    lh.write_kernel_estimate(est, tmp_path, ["x"])
    back = lh.read_kernel_estimate(tmp_path)
    assert np.array_equal(back.norms, est.norms)
    assert np.array_equal(back.kernel(0, 0), est.kernel(0, 0))


def test_acceptance_closure():
    report = json.loads(lh.run_acceptance([8]))
    assert report["passed"]
