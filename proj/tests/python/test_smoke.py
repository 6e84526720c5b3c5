import json
import math

import pytest

import wsperc


def test_ball_capacity_constants():
    assert wsperc.ball_capacity(4) == pytest.approx(2 * math.pi**2, rel=1e-12)
    assert wsperc.ball_capacity(5) == pytest.approx(4 * math.pi**2, rel=1e-12)


def test_ball_hitting_within_three_sigma():
    est = wsperc.cap_ball_hitting(4, 1.0, n_walks=20000, seed=3)
    assert abs(est["value"] - 2 * math.pi**2) < 3 * est["std_error"]
    assert est["method"] == "hitting"


def test_sausage_caps_dominate_the_ball():
    caps = wsperc.sausage_caps(5, 1.0, 1.0, 4, n_walks=2000, seed=2)
    assert len(caps) == 4
    assert all(c > 0 for c in caps)


def test_bottleneck_two_routes():
    # LEFT = 2, RIGHT = 3; routes through node 0 (max 5) and node 1 (max 4).
    edges = [(0, 2, 1.0), (0, 3, 5.0), (1, 2, 4.0), (1, 3, 2.0)]
    assert wsperc.bottleneck(2, edges) == 4.0
    assert wsperc.bottleneck(2, edges[:1]) is None


def test_crossing_time_is_deterministic():
    a = wsperc.crossing_time(4, 0.5, 1.0, 0.3, 3.0, seed=5)
    b = wsperc.crossing_time(4, 0.5, 1.0, 0.3, 3.0, seed=5)
    assert a == b


def test_contours_agree():
    for n in range(4, 8):
        assert wsperc.count_star_contours(n) == wsperc.count_star_contours_bruteforce(n)
    assert wsperc.count_star_contours(4) == 1
    with pytest.raises(wsperc.ConfigError):
        wsperc.count_star_contours(3)


def test_gw_and_series():
    assert wsperc.simulate_gw([[0.0]], runs=3) == [1, 1, 1]
    res = wsperc.series_check([[0.5]], 0, 60)
    assert res["verdict"] == "CONVERGENT"
    assert res["partial_sums"][-1] == pytest.approx(2.0)
    with pytest.raises(wsperc.ExplosionError):
        wsperc.simulate_gw([[1e10]], max_gen=5)


def test_fit_scaling_exact_power_law():
    r = [0.05, 0.1, 0.2]
    fit = wsperc.fit_scaling(r, [x**-0.5 for x in r], "power_law")
    assert fit["exponent"] == pytest.approx(-0.5, abs=1e-12)


def test_run_experiment_in_memory():
    cfg = "d = 4\nr = 0.3\nL = 4\nn_trials = 2\nsafety = 1\nbootstrap = 50\n"
    csv, summary = wsperc.run_experiment(cfg)
    lines = csv.strip().splitlines()
    assert lines[0] == "r,trial,tau_star,L,d,lambda,seed"
    assert len(lines) == 3
    assert json.loads(summary)["schema_version"] == 1
    assert wsperc.run_experiment(cfg, 2)[0] == csv
    with pytest.raises(wsperc.ConfigError):
        wsperc.run_experiment("d = 4\nr = 0.3\nbogus = 1\n")
