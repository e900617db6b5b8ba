from fractions import Fraction

import pytest

import axelrod_lab as ax


def test_params_validation():
    with pytest.raises(ValueError, match="q >= 2"):
        ax.ModelParams(F=2, q=1, L=10)
    with pytest.raises(ValueError):
        ax.ModelParams(F=2, q=3, L=2, topology="ring")
    p = ax.ModelParams(F=3, q=4, L=10, topology="ring")
    assert p.edges == 10


def test_run_replay_and_save(tmp_path):
    p = ax.ModelParams(F=2, q=3, L=40)
    eta = ax.sample_pi0(p, 7)
    assert eta == ax.sample_pi0(p, 7)
    for engine in ("harris", "gillespie"):
        t = ax.run(eta, engine=engine, seed=3)
        assert t.absorbed and t.final.is_absorbed()
        assert t.replay() == t.final
        path = tmp_path / f"{engine}.log"
        t.save(path)
        assert ax.load_trajectory(path) == t
    assert ax.run(eta, seed=3) == ax.run(eta, seed=3)


def test_particles_and_tracking():
    p = ax.ModelParams(F=2, q=3, L=4)
    c = ax.Configuration(p, [[1, 1], [1, 2], [2, 3], [2, 3]])
    assert c.zeta() == [1, 2, 0]
    assert c.blockades() == 1
    assert c.overlap(0, 1) == Fraction(1, 2)
    assert ax.jump_rate(1, 2) == Fraction(1, 2)
    t = ax.run(ax.sample_pi0(ax.ModelParams(F=2, q=2, L=60), 1), seed=2)
    stats = ax.track(t)
    assert stats["coalescences"] == 0
    assert stats["collisions"] == stats["annihilations"]


def test_genealogy():
    t = ax.run(ax.sample_pi0(ax.ModelParams(F=2, q=3, L=30), 4), engine="harris", seed=4, horizon=5.0)
    anc = ax.ancestry(t, 0, 5.0)
    assert anc == sorted(anc)
    assert sum(ax.descendant_count(t, y, 0, 5.0) for y in range(30)) == 30
    assert ax.ancestor(t, 10, 0, 0.0) == 10


def test_theory():
    assert ax.omega(3, 2) == 0
    assert ax.omega(4, 2) == Fraction(3, 4)
    assert abs(ax.critical_slope() - 0.5671432904097838) < 1e-12
    assert ax.exact_tail_fraction(3, 2, 1) == Fraction(7, 9)
    est, se = ax.mc_tail(3, 2, 1, 20000, seed=5)
    assert abs(est - 7 / 9) < 4 * se
    assert ax.refined_margin(3)["margin"] == Fraction(4, 243)
    rows = ax.phase_grid(5, 4)
    assert len(rows) == 4 * 3
    assert (3, 2, Fraction(0), 0) in rows


def test_experiments():
    r = ax.fixation(ax.ModelParams(F=2, q=3, L=30), 8, seed=2, threads=2)
    assert r["replicas"] == 8
    assert r["aggregates"]["absorbed_fraction"][0] == 1.0
    race = ax.race(3, 3000, seed=1)
    value, se = race["aggregates"]["inner_first"]
    assert abs(value - 1 / 3) < 4 * se
    m = ax.martingale(ax.ModelParams(F=2, q=3, L=41), 2.0, 20, 200)
    assert abs(m["aggregates"]["mean_0"][0] - 1.0) < 5 * m["aggregates"]["mean_0"][1] + 1e-12
    c = ax.collisions(ax.ModelParams(F=2, q=2, L=50), 300)
    assert c["aggregates"]["annihilation_fraction"][0] == 1.0


def test_verify_suite():
    assert "refined" in ax.suite_names()
    assert all(passed for _, passed, _ in ax.verify("refined"))
    with pytest.raises(ValueError):
        ax.verify("nope")
