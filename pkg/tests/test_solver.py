# Copyright 2025 Frank Sommers
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""
Tests for the integrating-factor stepper, Duhamel integral and Picard iteration.
"""
import numpy as np
import pytest


@pytest.fixture
def soliton_setup(kdv_params):
    """KdV solitary wave with kappa = 1/2 on an 80-wide box."""
    from grid_fourier import SpatialGrid
    from solver import soliton
    grid = SpatialGrid(256, 80.0)
    return grid, soliton(grid, 0.5, kdv_params)


class TestSolverConfig:
    """Test stepper configuration."""

    @pytest.mark.unit
    @pytest.mark.solver
    @pytest.mark.parametrize("dt,t_final,stride", [(0.0, 1.0, 1), (0.1, -1.0, 1), (2.0, 1.0, 1), (0.1, 1.0, 0)])
    def test_invalid(self, small_grid, dt, t_final, stride):
        """Non-positive steps, dt > t_final and zero stride are rejected."""
        from solver import SolverConfig
        from errors import ValidationError

        with pytest.raises(ValidationError):
            SolverConfig(small_grid, dt, t_final, snapshot_stride=stride)

    @pytest.mark.unit
    @pytest.mark.solver
    def test_step_divides_t_final(self, small_grid):
        """n_steps rounds up; the step actually taken lands exactly on t_final."""
        from solver import SolverConfig

        cfg = SolverConfig(small_grid, 0.3, 1.0)
        assert cfg.n_steps == 4
        assert cfg.step * cfg.n_steps == pytest.approx(1.0)


class TestPropagator:
    """Test the linear propagator and the nonlinear flux."""

    @pytest.mark.unit
    @pytest.mark.solver
    def test_unit_modulus(self, small_grid, benjamin_params):
        """exp(i dt p) has modulus one for every mode."""
        from solver import linear_propagator

        factors = linear_propagator(benjamin_params, 0.37, small_grid)
        np.testing.assert_allclose(np.abs(factors), 1.0, atol=1e-15)

    @pytest.mark.unit
    @pytest.mark.solver
    def test_propagator_composes(self, small_grid, benjamin_params):
        """W(t) W(s) = W(t + s) mode by mode."""
        from solver import linear_propagator

        first = linear_propagator(benjamin_params, 0.37, small_grid)
        second = linear_propagator(benjamin_params, 0.21, small_grid)
        product = first * second
        np.testing.assert_allclose(product, linear_propagator(benjamin_params, 0.58, small_grid), atol=1e-9)

    @pytest.mark.unit
    @pytest.mark.solver
    def test_flux_of_cosine(self, small_grid):
        """-(cos^2 x)_x = sin 2x."""
        from grid_fourier import forward, inverse, RealField
        from solver import rhs_nonlinear

        u = RealField(small_grid, np.cos(small_grid.points))
        flux = inverse(rhs_nonlinear(forward(u)))
        np.testing.assert_allclose(flux.values, np.sin(2 * small_grid.points), atol=1e-12)

    @pytest.mark.unit
    @pytest.mark.solver
    def test_linear_step_is_exact(self, small_grid, benjamin_params):
        """Small data moves by the exact propagator to leading order."""
        from grid_fourier import forward, RealField
        from solver import SolverConfig, linear_propagator, step_ifrk4

        eps = 1e-8
        u = RealField(small_grid, eps * np.cos(3 * small_grid.points))
        cfg = SolverConfig(small_grid, 0.1, 0.1)
        out = step_ifrk4(u, cfg, benjamin_params)
        expected = linear_propagator(benjamin_params, 0.1, small_grid) * forward(u).coefficients
        np.testing.assert_allclose(forward(out).coefficients, expected, atol=1e-14)


class TestSolve:
    """Test full integrations."""

    @pytest.mark.integration
    @pytest.mark.solver
    def test_soliton_is_reproduced(self, soliton_setup, kdv_params):
        """The sech^2 wave arrives where the exact solution says."""
        from solver import SolverConfig, soliton, solve

        grid, u0 = soliton_setup
        traj = solve(u0, SolverConfig(grid, 0.01, 1.0), kdv_params)
        exact = soliton(grid, 0.5, kdv_params, t=1.0)
        assert traj.times[-1] == pytest.approx(1.0)
        assert np.max(np.abs(traj.fields[-1].values - exact.values)) < 1e-3

    @pytest.mark.integration
    @pytest.mark.solver
    def test_conserved_quantities(self, soliton_setup, kdv_params):
        """Mass is exact; L^2 and the Hamiltonian drift very little."""
        from solver import SolverConfig, solve

        grid, u0 = soliton_setup
        traj = solve(u0, SolverConfig(grid, 0.01, 1.0, snapshot_stride=10), kdv_params)
        assert traj.max_drift("mass") < 1e-12
        assert traj.max_drift("l2") < 1e-5
        assert traj.max_drift("hamiltonian") < 1e-4

    @pytest.mark.integration
    @pytest.mark.solver
    def test_benjamin_gaussian_conserves(self, benjamin_params):
        """With the Hilbert term active, L^2 and the Hamiltonian still hold."""
        from grid_fourier import SpatialGrid, RealField
        from solver import SolverConfig, solve

        grid = SpatialGrid(256, 60.0)
        u0 = RealField(grid, 0.5 * np.exp(-grid.points ** 2 / 4))
        traj = solve(u0, SolverConfig(grid, 0.005, 1.0, snapshot_stride=20), benjamin_params)
        assert traj.max_drift("l2") < 1e-5
        assert traj.max_drift("hamiltonian") < 1e-4

    @pytest.mark.unit
    @pytest.mark.solver
    def test_snapshot_stride(self, small_grid, kdv_params):
        """Every stride-th step is kept, plus t = 0 and the final step."""
        from grid_fourier import RealField
        from solver import SolverConfig, solve

        u0 = RealField(small_grid, 0.01 * np.cos(small_grid.points))
        traj = solve(u0, SolverConfig(small_grid, 0.1, 1.0, snapshot_stride=3), kdv_params)
        np.testing.assert_allclose(traj.times, [0.0, 0.3, 0.6, 0.9, 1.0])
        assert len(traj.fields) == len(traj.conservation) == 5

    @pytest.mark.unit
    @pytest.mark.solver
    def test_rejects_bad_initial_data(self, small_grid, kdv_params):
        """Non-finite data and foreign grids are refused."""
        from grid_fourier import SpatialGrid, RealField
        from solver import SolverConfig, solve
        from errors import ValidationError

        cfg = SolverConfig(small_grid, 0.1, 1.0)
        bad = np.zeros(64)
        bad[3] = np.nan
        with pytest.raises(ValidationError, match="non-finite"):
            solve(RealField(small_grid, bad), cfg, kdv_params)
        with pytest.raises(ValidationError, match="differ"):
            solve(RealField(SpatialGrid(32, 2 * np.pi), np.zeros(32)), cfg, kdv_params)

    @pytest.mark.unit
    @pytest.mark.solver
    def test_blow_up_detected(self, kdv_params):
        """Huge data with a huge step trips the blow-up guard."""
        from grid_fourier import SpatialGrid, RealField
        from solver import SolverConfig, solve
        from errors import BlowUpError, NumericalFailure

        grid = SpatialGrid(64, 20.0)
        u0 = RealField(grid, 1e3 * np.exp(-grid.points ** 2))
        with pytest.raises(BlowUpError) as excinfo:
            solve(u0, SolverConfig(grid, 0.5, 50.0), kdv_params)
        assert isinstance(excinfo.value, NumericalFailure)
        assert excinfo.value.time > 0

    @pytest.mark.unit
    @pytest.mark.solver
    def test_soliton_needs_kdv(self, small_grid, benjamin_params):
        """The sech^2 profile is only offered without the Hilbert term."""
        from solver import soliton
        from errors import ValidationError

        with pytest.raises(ValidationError, match="alpha"):
            soliton(small_grid, 0.5, benjamin_params)

    @pytest.mark.unit
    @pytest.mark.solver
    def test_trajectory_times_increase(self, small_grid):
        """Snapshots must be appended in time order."""
        from grid_fourier import RealField
        from solver import ConservationReport, Trajectory
        from errors import ValidationError

        traj = Trajectory()
        u = RealField(small_grid, np.zeros(64))
        traj.append(0.5, u, ConservationReport(0.0, 0.0))
        with pytest.raises(ValidationError):
            traj.append(0.5, u, ConservationReport(0.0, 0.0))


class TestSolitonBenchmark:
    """KdV solitary wave with kappa = 1/2 on n = 512, L = 40."""

    @pytest.fixture
    def benchmark(self, kdv_params):
        from grid_fourier import SpatialGrid
        from solver import soliton
        grid = SpatialGrid(512, 40.0)
        return grid, soliton(grid, 0.5, kdv_params)

    @pytest.mark.slow
    @pytest.mark.integration
    @pytest.mark.solver
    def test_benchmark_accuracy(self, benchmark, kdv_params):
        """dt = 1e-3 to t = 1: relative L-infinity error <= 1e-6 and tight conservation."""
        from solver import SolverConfig, soliton, solve

        grid, u0 = benchmark
        traj = solve(u0, SolverConfig(grid, 1e-3, 1.0, snapshot_stride=100), kdv_params)
        exact = soliton(grid, 0.5, kdv_params, t=1.0)
        error = np.max(np.abs(traj.fields[-1].values - exact.values)) / np.max(np.abs(exact.values))
        assert error <= 1e-6
        assert traj.max_drift("mass") <= 1e-12
        assert traj.max_drift("l2") <= 1e-8

    @pytest.mark.slow
    @pytest.mark.integration
    @pytest.mark.solver
    def test_fourth_order(self, benchmark, kdv_params):
        """Halving dt shrinks the step-to-step difference about 16 times."""
        from solver import SolverConfig, solve

        grid, u0 = benchmark
        finals = [solve(u0, SolverConfig(grid, dt, 1.0, snapshot_stride=1000), kdv_params,
                        with_hamiltonian=False).fields[-1].values
                  for dt in (0.01, 0.005, 0.0025)]
        coarse = np.max(np.abs(finals[0] - finals[1]))
        fine = np.max(np.abs(finals[1] - finals[2]))
        assert 12.0 <= coarse / fine <= 20.0


class TestDuhamel:
    """Test the Duhamel integral."""

    @pytest.mark.unit
    @pytest.mark.solver
    def test_free_source(self, benjamin_params):
        """A free-wave source W(t)g integrates to t W(t) g."""
        from bourgain import SpaceTimeGrid, linear_evolution
        from grid_fourier import SpatialGrid, RealField
        from solver import duhamel

        grid = SpatialGrid(64, 20.0)
        g = RealField(grid, np.exp(-grid.points ** 2))
        st = SpaceTimeGrid(grid, 64, 1.0)
        free = linear_evolution(g, st, benjamin_params)
        out = duhamel(free, benjamin_params)
        expected = st.times[:, None] * free.values
        np.testing.assert_allclose(out.values, expected, atol=1e-10)


class TestPicard:
    """Test the cut-off Picard iteration."""

    @pytest.mark.unit
    @pytest.mark.solver
    def test_config_validation(self, small_grid):
        """delta in (0,1), a window covering 2 delta and a resolved cutoff are required."""
        from bourgain import SpaceTimeGrid
        from solver import PicardConfig
        from errors import ValidationError

        st = SpaceTimeGrid(small_grid, 128, 0.5)
        with pytest.raises(ValidationError):
            PicardConfig(1.5, 4, st)
        with pytest.raises(ValidationError, match="cover"):
            PicardConfig(0.4, 4, st)
        with pytest.raises(ValidationError, match="samples"):
            PicardConfig(0.1, 4, SpaceTimeGrid(small_grid, 16, 0.5))
        with pytest.raises(ValidationError):
            PicardConfig(0.25, 0, st)

    @pytest.mark.integration
    @pytest.mark.solver
    def test_agrees_with_time_stepper(self, kdv_params):
        """Small Gaussian data: each of the first five steps contracts by 2 or more, and the
        converged iterate matches solve() on [0, delta/2]."""
        from bourgain import SpaceTimeGrid
        from grid_fourier import SpatialGrid, RealField
        from solver import PicardConfig, SolverConfig, picard_iterate, solve

        grid = SpatialGrid(64, 20.0)
        u0 = RealField(grid, 0.1 * np.exp(-grid.points ** 2))
        st = SpaceTimeGrid(grid, 128, 0.5)
        result = picard_iterate(u0, PicardConfig(0.25, 8, st), 0.0, 0.55, kdv_params)
        assert not result.diverged
        factors = result.contraction_factors()[:5]
        assert len(factors) == 5
        assert all(f >= 2 for f in factors)

        traj = solve(u0, SolverConfig(grid, 1.0 / 128, 0.125), kdv_params)
        picard_slice = result.iterates[-1].slice_at(0.125)
        assert np.max(np.abs(picard_slice.values - traj.fields[-1].values)) < 1e-4

    @pytest.mark.unit
    @pytest.mark.solver
    def test_contraction_factors(self):
        """Ratios of consecutive distances."""
        from solver import PicardResult

        result = PicardResult(iterates=[], distances=[1.0, 0.5, 0.0])
        assert result.contraction_factors() == [2.0, float("inf")]


class TestLinearEstimates:
    """Test the linear-estimate probe."""

    @pytest.mark.unit
    @pytest.mark.solver
    def test_b_range_checked(self, small_grid, kdv_params):
        """b must lie in (1/2, 1]."""
        from grid_fourier import RealField
        from solver import linear_estimate_probe
        from errors import ValidationError

        u0 = RealField(small_grid, np.cos(small_grid.points))
        with pytest.raises(ValidationError, match="b must"):
            linear_estimate_probe(u0, [0.5], 0.0, 0.4, kdv_params)

    @pytest.mark.slow
    @pytest.mark.integration
    @pytest.mark.solver
    def test_free_exponent(self, kdv_params):
        """The fitted delta exponent of the free estimate is (1 - 2b)/2 within 0.1."""
        from bourgain import SpaceTimeGrid
        from grid_fourier import SpatialGrid, RealField
        from solver import linear_estimate_probe

        grid = SpatialGrid(128, 40.0)
        u0 = RealField(grid, np.exp(-grid.points ** 2))
        report = linear_estimate_probe(u0, [0.5, 0.25, 0.125], 0.0, 0.55, kdv_params,
                                       st_grid=SpaceTimeGrid(grid, 1024, 2.0))
        assert report.free_exponent == pytest.approx(report.expected_free_exponent, abs=0.1)
        assert len(report.rows) == 3
        assert all(row.duhamel_constant > 0 for row in report.rows)
