import numpy as np
import pytest

from nanosynapse.crossbar import (
    DifferentialCrossbar,
    ParamGrid,
    ProjectionMode,
    init_projection,
    init_readout,
    load_crossbar,
    save_crossbar,
)
from nanosynapse.device import DeviceParams
from nanosynapse.energy import EnergyLedger


def one_by_one(pos_step, neg_step, params=None):
    params = params or DeviceParams()
    grid = ParamGrid.uniform((1, 1), params)
    return DifferentialCrossbar(np.array([[pos_step]], np.int32),
                                np.array([[neg_step]], np.int32),
                                grid, ParamGrid.uniform((1, 1), params))


class TestForward:
    def test_zero_input_zero_output(self):
        xbar = init_projection(8, 5, ProjectionMode.BINARY_PERFECT,
                               np.random.default_rng(0))
        np.testing.assert_array_equal(xbar.forward(np.zeros(8)), np.zeros(5))

    def test_single_pair_full_range_current(self):
        # pos at g_max, neg at g_min, 1 V input: 67.4 uA out.
        xbar = one_by_one(128, 0)
        assert xbar.forward(np.array([1.0]))[0] == pytest.approx(67.4e-6)

    def test_equal_pair_cancels(self):
        xbar = one_by_one(64, 64)
        assert xbar.forward(np.array([1.0]))[0] == 0.0

    def test_linearity(self):
        rng = np.random.default_rng(1)
        xbar = init_projection(10, 6, ProjectionMode.GAUSSIAN_IMPERFECT, rng,
                               sigma_fraction=0.1)
        a = rng.normal(size=10)
        b = rng.normal(size=10)
        combined = xbar.forward(2.0 * a + 3.0 * b)
        separate = 2.0 * xbar.forward(a) + 3.0 * xbar.forward(b)
        np.testing.assert_allclose(combined, separate, rtol=0, atol=1e-9)

    def test_forward_batch_matches_forward(self):
        rng = np.random.default_rng(2)
        xbar = init_projection(7, 4, ProjectionMode.BINARY_PERFECT, rng)
        batch = rng.normal(size=(5, 7))
        stacked = np.stack([xbar.forward(v) for v in batch])
        # batched and single-vector BLAS paths may round differently
        np.testing.assert_allclose(xbar.forward_batch(batch), stacked,
                                   rtol=1e-12, atol=0)

    def test_shape_validation(self):
        xbar = one_by_one(0, 0)
        with pytest.raises(ValueError):
            xbar.forward(np.zeros(3))


class TestInitProjection:
    def test_binary_perfect_is_binomial(self):
        rng = np.random.default_rng(3)
        xbar = init_projection(100, 100, ProjectionMode.BINARY_PERFECT, rng)
        frac_high = np.mean(xbar.pos_steps == 128)
        assert 0.49 <= frac_high <= 0.51
        assert np.isin(xbar.pos_steps, (0, 128)).all()

    def test_binary_perfect_weight_values(self):
        rng = np.random.default_rng(4)
        xbar = init_projection(30, 30, ProjectionMode.BINARY_PERFECT, rng)
        w = np.round(xbar.weights() * 1e6, 9)  # microsiemens
        assert set(np.unique(w)) <= {-67.4, 0.0, 67.4}

    def test_gaussian_sigma_zero_equals_binary_same_seed(self):
        a = init_projection(20, 20, ProjectionMode.BINARY_PERFECT,
                            np.random.default_rng(5))
        b = init_projection(20, 20, ProjectionMode.GAUSSIAN_IMPERFECT,
                            np.random.default_rng(5), sigma_fraction=0.0)
        np.testing.assert_array_equal(a.pos_steps, b.pos_steps)
        np.testing.assert_array_equal(a.weights(), b.weights())

    def test_binary_perfect_rejects_dispersion(self):
        with pytest.raises(ValueError):
            init_projection(2, 2, ProjectionMode.BINARY_PERFECT,
                            np.random.default_rng(0), sigma_fraction=0.1)

    def test_dispersed_devices_sit_at_their_own_extrema(self):
        xbar = init_projection(40, 40, ProjectionMode.GAUSSIAN_IMPERFECT,
                               np.random.default_rng(6), sigma_fraction=0.1)
        g = xbar.pos_params.conductance(xbar.pos_steps)
        at_min = xbar.pos_steps == 0
        np.testing.assert_array_equal(g[at_min], xbar.pos_params.g_min[at_min])
        np.testing.assert_allclose(g[~at_min], xbar.pos_params.g_max[~at_min])


class TestInitReadout:
    def test_midpoint_start_zero_weights(self):
        xbar = init_readout(10, 4, np.random.default_rng(0))
        assert (xbar.pos_steps == 64).all()
        np.testing.assert_array_equal(xbar.weights(), np.zeros((10, 4)))

    def test_g_min_start(self):
        xbar = init_readout(10, 4, np.random.default_rng(0), start="g_min")
        assert (xbar.pos_steps == 0).all()
        np.testing.assert_array_equal(xbar.weights(), np.zeros((10, 4)))

    def test_dispersed_readout_starts_nonzero(self):
        xbar = init_readout(50, 4, np.random.default_rng(1), sigma_fraction=0.1)
        assert np.abs(xbar.weights()).max() > 0


class TestProgramColumn:
    def test_all_zero_directions_bitwise_noop(self):
        xbar = init_readout(6, 3, np.random.default_rng(0))
        before = xbar.pos_steps.copy()
        ledger = EnergyLedger()
        xbar.program_column(1, np.zeros(6, dtype=int), ledger)
        np.testing.assert_array_equal(xbar.pos_steps, before)
        assert ledger.total_pulses == 0

    def test_plus_one_on_fresh_pair_moves_one_step(self):
        # From g_min: pos gets a set (+1 step), neg gets a reset (clipped at
        # the rail), so the weight rises by exactly one step = 0.5266 uS.
        xbar = init_readout(1, 1, np.random.default_rng(0), start="g_min")
        ledger = EnergyLedger()
        xbar.program_column(0, np.array([1]), ledger)
        step = DeviceParams().step_size
        assert xbar.weights()[0, 0] == pytest.approx(step)
        assert step == pytest.approx(0.5265625e-6)
        assert ledger.set_pulses == 1 and ledger.reset_pulses == 1

    def test_up_then_down_returns_to_start(self):
        xbar = init_readout(4, 2, np.random.default_rng(0))
        before = xbar.weights().copy()
        ledger = EnergyLedger()
        d = np.array([1, -1, 1, 0])
        xbar.program_column(0, d, ledger)
        xbar.program_column(0, -d, ledger)
        np.testing.assert_array_equal(xbar.weights(), before)

    def test_saturation_clips_but_ledger_still_counts(self):
        xbar = init_readout(1, 1, np.random.default_rng(0), start="g_min")
        ledger = EnergyLedger()
        n_states = xbar.pos_params.n_states
        for _ in range(n_states + 10):
            xbar.program_column(0, np.array([1]), ledger)
        assert xbar.pos_steps[0, 0] == n_states
        assert xbar.neg_steps[0, 0] == 0
        # every event fires one set and one reset, saturated or not
        assert ledger.set_pulses == n_states + 10
        assert ledger.reset_pulses == n_states + 10

    def test_column_isolation(self):
        xbar = init_readout(5, 3, np.random.default_rng(0))
        before_pos = xbar.pos_steps.copy()
        before_neg = xbar.neg_steps.copy()
        xbar.program_column(1, np.ones(5, dtype=int), EnergyLedger())
        other = [0, 2]
        np.testing.assert_array_equal(xbar.pos_steps[:, other], before_pos[:, other])
        np.testing.assert_array_equal(xbar.neg_steps[:, other], before_neg[:, other])
        assert (xbar.pos_steps[:, 1] != before_pos[:, 1]).all()

    def test_bad_column_or_shape(self):
        xbar = init_readout(4, 2, np.random.default_rng(0))
        with pytest.raises(IndexError):
            xbar.program_column(2, np.ones(4, dtype=int), EnergyLedger())
        with pytest.raises(ValueError):
            xbar.program_column(0, np.ones(3, dtype=int), EnergyLedger())

    def test_dispersed_high_vth2_ignores_reset(self):
        # A device whose own v_th2 exceeds the reset drive amplitude simply
        # does not respond; the pulse is still counted.
        params = DeviceParams(v_th2=6.5)
        grid = ParamGrid.uniform((1, 1), params)
        xbar = DifferentialCrossbar(np.array([[64]], np.int32),
                                    np.array([[64]], np.int32),
                                    grid, ParamGrid.uniform((1, 1), params))
        ledger = EnergyLedger()
        xbar.program_column(0, np.array([1]), ledger)
        assert xbar.pos_steps[0, 0] == 65   # set landed
        assert xbar.neg_steps[0, 0] == 64   # reset was a silent no-op
        assert ledger.total_pulses == 2


class TestSnapshots:
    def test_round_trip_bit_exact(self, tmp_path):
        xbar = init_projection(6, 5, ProjectionMode.GAUSSIAN_IMPERFECT,
                               np.random.default_rng(7), sigma_fraction=0.15)
        path = tmp_path / "xbar.csv"
        save_crossbar(xbar, path)
        loaded = load_crossbar(path)
        np.testing.assert_array_equal(loaded.pos_steps, xbar.pos_steps)
        np.testing.assert_array_equal(loaded.neg_steps, xbar.neg_steps)
        for name in ("g_min", "g_max", "v_th1", "v_th2"):
            np.testing.assert_array_equal(getattr(loaded.pos_params, name),
                                          getattr(xbar.pos_params, name))
            np.testing.assert_array_equal(getattr(loaded.neg_params, name),
                                          getattr(xbar.neg_params, name))
        np.testing.assert_array_equal(loaded.weights(), xbar.weights())

    def test_rejects_non_snapshot(self, tmp_path):
        path = tmp_path / "junk.csv"
        path.write_text("row,col\n0,0\n")
        with pytest.raises(ValueError):
            load_crossbar(path)
