"""Smoke test for the `hhcr` extension module.

Build and install first, e.g. `maturin develop -m crates/py/Cargo.toml`.
"""

import hhcr


def toy():
    return hhcr.Instance(
        (0.0, 0.0),
        [(3.0, 0.0, 10.0), (3.0, 4.0, 10.0)],
        [(0.0, 4.0, 8.0), (6.0, 0.0, 5.0)],
        rejection_cost=2.0,
    )


def main():
    inst = toy()
    assert len(inst) == 5 and inst.n_existing == 2 and inst.n_new == 2

    sc = hhcr.Scenario(inst, mu=1.0, lambda_=0.5)
    assert sc.baseline_route == [0, 1, 2, 0]
    assert sc.baseline_length == 12.0 and sc.t_max == 18.0
    assert abs(sc.disruption_cap - 2.26056) < 1e-5

    late = sc.evaluate([0, 1, 4, 2, 3, 0])
    assert late.objective == 33.0
    assert sc.violation(late)[1] == 10.0 and not sc.is_feasible(late)

    for lam, expected in [(1.0, 33.0), (0.5, 26.0)]:
        cfg = hhcr.Config(lambda_=lam, generations=3)
        report = hhcr.solve(inst, cfg, seed=7)
        assert report.best_obj == expected, report
        exact = hhcr.solve_exact(inst, cfg)
        assert exact.objective == expected
        back = hhcr.Solution.parse_line(inst, report.best.to_line())
        assert back.route == report.best.route

    original, resched = hhcr.export_lp(inst)
    assert "End" in original and "End" in resched
    assert hhcr.gap(100.0, 95.0) == 5.0

    try:
        hhcr.Config(rho=7)
    except ValueError:
        pass
    else:
        raise AssertionError("rho=7 should be rejected")

    print("hhcr", hhcr.__version__, "smoke test ok")


if __name__ == "__main__":
    main()
