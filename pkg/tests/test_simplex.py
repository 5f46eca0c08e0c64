import numpy as np
import pytest

from countdp.simplex import LinearProgram, Relation, Status, solve_simplex


def _lp(c, rows):
    lp = LinearProgram(objective=np.asarray(c, dtype=float))
    for a, rel, b in rows:
        lp.add(a, rel, b)
    return lp


@pytest.mark.parametrize("exact", [False, True])
class TestToyPrograms:
    def test_textbook_max(self, exact):
        # max 3x + 5y st x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        lp = _lp([-3, -5], [([1, 0], "<=", 4), ([0, 2], "<=", 12), ([3, 2], "<=", 18)])
        sol = solve_simplex(lp, exact=exact)
        assert sol.status is Status.OPTIMAL
        assert sol.optimum == pytest.approx(-36)
        np.testing.assert_allclose(sol.assignment, [2, 6], atol=1e-12)

    def test_equality_and_ge(self, exact):
        # min x + 2y st x + y = 3, x >= 1, y >= 0.5
        lp = _lp([1, 2], [([1, 0], ">=", 1), ([0, 1], ">=", 0.5)])
        lp.add_equality([1, 1], 3)
        sol = solve_simplex(lp, exact=exact)
        assert sol.status is Status.OPTIMAL
        np.testing.assert_allclose(sol.assignment, [2.5, 0.5], atol=1e-12)
        assert lp.violation(sol.assignment) < 1e-12

    def test_infeasible(self, exact):
        lp = _lp([1, 1], [([1, 1], "<=", 1), ([1, 1], ">=", 2)])
        assert solve_simplex(lp, exact=exact).status is Status.INFEASIBLE

    def test_unbounded(self, exact):
        lp = _lp([-1, 0], [([1, -1], "<=", 1)])
        assert solve_simplex(lp, exact=exact).status is Status.UNBOUNDED

    def test_negative_rhs(self, exact):
        # -x <= -2  <=>  x >= 2
        lp = _lp([1], [([-1], "<=", -2)])
        sol = solve_simplex(lp, exact=exact)
        assert sol.optimum == pytest.approx(2)

    def test_degenerate_cycling_example(self, exact):
        # Beale's example cycles under the largest-coefficient rule; Bland's rule terminates
        lp = _lp(
            [-0.75, 150, -0.02, 6],
            [
                ([0.25, -60, -0.04, 9], "<=", 0),
                ([0.5, -90, -0.02, 3], "<=", 0),
                ([0, 0, 1, 0], "<=", 1),
            ],
        )
        sol = solve_simplex(lp, exact=exact)
        assert sol.status is Status.OPTIMAL
        assert sol.optimum == pytest.approx(-0.05)


def test_random_lps_match_between_modes():
    rng = np.random.default_rng(0)
    for _ in range(30):
        m, n = rng.integers(2, 6), rng.integers(2, 6)
        A = rng.uniform(0, 1, (m, n))
        lp = _lp(-rng.uniform(0, 1, n), [(a, "<=", 1.0) for a in A])
        f = solve_simplex(lp)
        q = solve_simplex(lp, exact=True)
        assert f.status is q.status is Status.OPTIMAL
        assert f.optimum == pytest.approx(q.optimum, abs=1e-12)


def test_shape_checks():
    lp = LinearProgram(objective=np.ones(2))
    with pytest.raises(ValueError):
        lp.add([1, 2, 3], Relation.LE, 1)
    with pytest.raises(ValueError):
        LinearProgram(objective=np.ones(2), names=("a",))


def test_named_values_and_json():
    lp = LinearProgram(objective=np.array([1.0, 1.0]), names=("a", "b"))
    lp.add([1, 0], ">=", 2)
    sol = solve_simplex(lp)
    assert sol.value("a") == pytest.approx(2)
    assert sol.to_json_dict()["status"] == "OPTIMAL"
    assert "a" in lp.to_text()
