"""Optimal parameter tests: closed forms against the enumeration oracle."""

import math

import numpy as np
import pytest

from torus_consensus import optimal
from torus_consensus.enums import Method
from torus_consensus.errors import InvalidSpecError, OutOfRangeError, UnsupportedParityError
from torus_consensus.optimal import (
    closed_form_gamma,
    closed_form_h,
    convergence_time,
    dirichlet_kernel,
    gamma_for_h,
    optimal_for_eigenvalues,
    optimal_params,
    oracle_optimal,
    parity_of,
)
from torus_consensus.spectra import (
    check_extremal_hypothesis,
    claimed_extremal_indices,
    laplacian_eigenvalue,
    laplacian_spectrum,
)
from torus_consensus.topology import TopologySpec

EVEN_DIMS = (16, 18, 20, 22, 24, 26)
ODD_DIMS = (15, 17, 19, 21, 23, 25, 27)


def _agrees_with_oracle(spec):
    oracle = oracle_optimal(spec)
    return abs(closed_form_h(spec) - oracle.h) <= 1e-9 and abs(
        closed_form_gamma(spec) - oracle.gamma
    ) <= 1e-9


def _counterexamples(specs):
    """Specs whose claimed extremal indices are wrong.

    On every other spec the closed forms must agree with the oracle, and on
    these they must not.
    """
    found = []
    for spec in specs:
        holds = check_extremal_hypothesis(spec).holds
        assert _agrees_with_oracle(spec) == holds, spec.describe()
        if not holds:
            found.append(spec)
    return found


def _claimed_optimum(spec):
    """h and gamma from the cosine sums at the indices the closed forms assume."""
    second, smallest = claimed_extremal_indices(spec)
    return optimal_for_eigenvalues(
        laplacian_eigenvalue(spec, second), laplacian_eigenvalue(spec, smallest)
    )


class TestExactCases:
    def test_four_cycle(self):
        spec = TopologySpec.of(4, 1)

        for params in (optimal_params(spec, Method.ORACLE), optimal_params(spec, Method.CLOSED_FORM)):
            assert params.h == pytest.approx(1 / 3, abs=1e-12)
            assert params.gamma == pytest.approx(1 / 3, abs=1e-12)
            assert params.T == pytest.approx(1 / math.log(3), abs=1e-12)

    def test_complete_graph(self):
        spec = TopologySpec.of(5, 2)

        for params in (optimal_params(spec, Method.ORACLE), optimal_params(spec, Method.CLOSED_FORM)):
            assert params.h == pytest.approx(0.2, abs=1e-12)
            assert params.gamma == 0.0
            assert params.T == 0.0

    def test_four_by_four_torus(self):
        spec = TopologySpec.of((4, 4), 1)

        for params in (optimal_params(spec, Method.ORACLE), optimal_params(spec, Method.CLOSED_FORM)):
            assert params.h == pytest.approx(0.2, abs=1e-12)
            assert params.gamma == pytest.approx(0.6, abs=1e-12)

    def test_method_is_recorded(self):
        spec = TopologySpec.of(10, 1)

        assert optimal_params(spec).method == Method.ORACLE
        assert optimal_params(spec, Method.CLOSED_FORM).method == Method.CLOSED_FORM


class TestLimits:
    def test_cycle_approaches_one_half(self):
        spec = TopologySpec.of(400, 1)

        assert closed_form_h(spec) == pytest.approx(0.5, abs=1e-3)
        assert oracle_optimal(spec).h == pytest.approx(0.5, abs=1e-3)

    def test_torus_approaches_one_quarter(self):
        spec = TopologySpec.of((1000, 1000), 1)

        assert closed_form_h(spec) == pytest.approx(0.25, abs=1e-3)
        assert oracle_optimal(spec).h == pytest.approx(0.25, abs=1e-3)


class TestDirichletKernel:
    def test_matches_cosine_sum(self):
        rng = np.random.default_rng(7)
        checked = 0
        while checked < 1000:
            r = int(rng.integers(1, 51))
            x = float(rng.uniform(0.0, 2.0 * math.pi))
            if x < 1e-6 or x > 2.0 * math.pi - 1e-6:
                continue
            expected = 1.0 + 2.0 * float(np.cos(np.arange(1, r + 1) * x).sum())

            assert abs(dirichlet_kernel(r, x) - expected) <= 1e-12, (r, x)
            checked += 1

    @pytest.mark.parametrize("x", [0.0, 2.0 * math.pi, -2.0 * math.pi, 4.0 * math.pi])
    def test_limit_at_multiples_of_two_pi(self, x):
        assert dirichlet_kernel(3, x) == 7.0

    def test_value_at_pi(self):
        for r in range(1, 10):
            assert dirichlet_kernel(r, math.pi) == pytest.approx((-1) ** r, abs=1e-12)


class TestConvergenceTime:
    def test_zero_gamma(self):
        assert convergence_time(0.0) == 0.0

    def test_natural_log(self):
        assert convergence_time(math.exp(-1.0)) == pytest.approx(1.0)
        assert convergence_time(0.5) == pytest.approx(1 / math.log(2))

    @pytest.mark.parametrize("gamma", [1.0, 1.5, -0.1, math.nan])
    def test_out_of_range(self, gamma):
        with pytest.raises(OutOfRangeError):
            convergence_time(gamma)


class TestEqualization:
    def test_extreme_modes_have_equal_magnitude(self):
        h, gamma = optimal_for_eigenvalues(0.3, 7.5)

        assert abs(1 - h * 0.3) == pytest.approx(abs(1 - h * 7.5))
        assert gamma == pytest.approx((7.5 - 0.3) / (7.5 + 0.3))

    @pytest.mark.parametrize(
        "spec",
        [
            TopologySpec.of(31, 4),
            TopologySpec.of((8, 10), 2),
            TopologySpec.of((6, 7), 2, "l1"),
            TopologySpec.of((5, 6, 7), 1, "linf"),
        ],
    )
    def test_gamma_is_spectral_radius_on_mean_zero_subspace(self, spec):
        params = oracle_optimal(spec)
        values = laplacian_spectrum(spec).ravel()[1:]

        assert np.abs(1.0 - params.h * values).max() == pytest.approx(params.gamma, abs=1e-12)

    def test_gamma_for_h(self):
        spec = TopologySpec.of(100, 1)
        params = oracle_optimal(spec)

        assert gamma_for_h(spec, params.h) == pytest.approx(params.gamma, abs=1e-12)
        assert gamma_for_h(spec, 0.9) == pytest.approx(2.6, abs=1e-12)
        assert gamma_for_h(spec, 0.1) > params.gamma


class TestClosedFormAgreement:
    """Nearest-neighbor grids have no counterexamples. Once r >= 2 and the
    axes are long enough, the Dirichlet side lobe moves the largest
    eigenvalue off the claimed index and every spec in these grids is one."""

    def test_nearest_neighbor_cycles(self):
        specs = [TopologySpec.of(n, 1) for n in range(6, 401)]

        assert _counterexamples(specs) == []

    @pytest.mark.parametrize("r", [2, 3, 5, 8, 13, 20])
    def test_wider_cycles(self, r):
        specs = [TopologySpec.of(n, r) for n in range(2 * (2 * r + 1), 401, 3)]

        assert _counterexamples(specs) == specs

    @pytest.mark.parametrize("r", [1, 2, 3])
    @pytest.mark.parametrize("parity", [0, 1])
    def test_two_dimensional_tori(self, r, parity):
        sizes = [k for k in range(2 * (2 * r + 1), 41) if k % 2 == parity]
        specs = [
            TopologySpec.of((k1, k2), r) for i, k1 in enumerate(sizes) for k2 in sizes[i:]
        ]

        assert _counterexamples(specs) == (specs if r > 1 else [])

    @pytest.mark.parametrize("r", [1, 2, 3, 4, 5])
    @pytest.mark.parametrize("m", [3, 4, 5, 6])
    @pytest.mark.parametrize("pool", [EVEN_DIMS, ODD_DIMS])
    def test_m_dimensional_tori(self, r, m, pool):
        specs = [TopologySpec.of(dims, r) for dims in (pool[:m], pool[-m:])]

        assert _counterexamples(specs) == (specs if r > 1 else [])

    @pytest.mark.parametrize(
        "dims, r",
        [
            ((5,), 2),
            ((7,), 3),
            ((8,), 3),
            ((12,), 3),
            ((11,), 5),
            ((12,), 5),
            ((5, 5), 2),
            ((7, 7), 3),
            ((8, 8), 3),
            ((8, 12), 3),
            ((12, 12), 3),
            ((11, 11), 5),
            ((5, 5, 5), 2),
            ((8, 8, 8), 3),
            ((7, 7, 7, 7), 3),
        ],
    )
    def test_wider_radius_where_claimed_indices_hold(self, dims, r):
        spec = TopologySpec.of(dims, r)

        assert check_extremal_hypothesis(spec).holds
        assert _counterexamples([spec]) == []
        oracle = oracle_optimal(spec)
        assert closed_form_h(spec) == pytest.approx(oracle.h, abs=1e-9)
        assert closed_form_gamma(spec) == pytest.approx(oracle.gamma, abs=1e-9)

    def test_axis_order_does_not_matter(self):
        a = TopologySpec.of((21, 15, 17), 1)
        b = TopologySpec.of((15, 17, 21), 1)

        assert closed_form_h(a) == pytest.approx(closed_form_h(b), abs=1e-14)
        assert closed_form_gamma(a) == pytest.approx(closed_form_gamma(b), abs=1e-14)


class TestClosedFormsMatchCosineSums:
    """Each closed form equals the optimum built from the cosine sums at its
    assumed indices, whether or not those indices are truly extremal."""

    @pytest.mark.parametrize(
        "dims",
        [
            (8,),
            (9,),
            (40,),
            (41,),
            (12, 16),
            (13, 17),
            (16, 18, 20),
            (15, 17, 19),
            (15, 17, 19, 21, 23),
            (16, 18, 20, 22, 24, 26),
        ],
    )
    @pytest.mark.parametrize("r", [1, 2, 3])
    def test_matches(self, dims, r):
        spec = TopologySpec.of(dims, r)
        h, gamma = _claimed_optimum(spec)

        assert closed_form_h(spec) == pytest.approx(h, abs=1e-12)
        assert closed_form_gamma(spec) == pytest.approx(gamma, abs=1e-12)

    def test_m_dimensional_forms_reduce_to_lower_dimensions(self):
        for r in (1, 2, 4):
            for dims in [(12,), (20,), (12, 16)]:
                assert optimal._mtorus_even(dims, r) == pytest.approx(
                    optimal._CLOSED_FORMS[(len(dims), "even")](dims, r), abs=1e-12
                )
            for dims in [(13,), (21,), (13, 17)]:
                assert optimal._mtorus_odd(dims, r) == pytest.approx(
                    optimal._CLOSED_FORMS[(len(dims), "odd")](dims, r), abs=1e-12
                )


class TestClosedFormErrors:
    def test_side_lobe_counterexample_is_not_optimal(self):
        spec = TopologySpec.of(8, 2)

        assert closed_form_h(spec) == pytest.approx(2 / (8 - math.sqrt(2)), abs=1e-12)
        assert oracle_optimal(spec).h == pytest.approx(2 / (10 - math.sqrt(2)), abs=1e-12)

    def test_mixed_parity(self):
        spec = TopologySpec.of((16, 19), 1)

        assert parity_of(spec) == "mixed"
        with pytest.raises(UnsupportedParityError):
            closed_form_h(spec)
        with pytest.raises(UnsupportedParityError):
            optimal_params(spec, Method.CLOSED_FORM)
        assert oracle_optimal(spec).h > 0

    def test_ball_neighborhoods_have_no_closed_form(self):
        with pytest.raises(InvalidSpecError):
            closed_form_gamma(TopologySpec.of((8, 8), 1, "l1"))

    def test_cycle_closed_form_ignores_norm(self):
        assert closed_form_h(TopologySpec.of(10, 2, "linf")) == closed_form_h(
            TopologySpec.of(10, 2)
        )


class TestTrends:
    def test_time_increases_with_cycle_size(self):
        times = [oracle_optimal(TopologySpec.of(n, 1)).T for n in range(6, 401, 2)]

        assert all(b > a for a, b in zip(times, times[1:]))

    def test_time_decreases_with_radius(self):
        times = [oracle_optimal(TopologySpec.of(400, r)).T for r in range(1, 21)]

        assert all(b < a for a, b in zip(times, times[1:]))

    @pytest.mark.parametrize("r", [1, 2, 3, 4, 5])
    def test_time_increases_with_dimension(self, r):
        times = [oracle_optimal(TopologySpec.of(EVEN_DIMS[:m], r)).T for m in range(1, 7)]

        assert all(b > a for a, b in zip(times, times[1:]))
