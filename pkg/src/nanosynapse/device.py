"""Single analog nanosynapse under a constant-pulse programming scheme.

Conductance lives on a quantized grid between g_min and g_max and is stored
as an integer step index, so repeated programming never accumulates
floating-point drift. A pulse moves the device one step up, one step down,
or not at all, depending on how its amplitude compares with the device's
own two voltage thresholds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

# Nominal device constants (TBFe polymeric nanosynapse).
DEFAULT_G_MIN = 2.1e-6       # siemens
DEFAULT_G_MAX = 69.5e-6      # siemens
DEFAULT_V_TH1 = 3.1          # volts, set threshold
DEFAULT_V_TH2 = 5.5          # volts, reset threshold
DEFAULT_N_STATES = 128       # addressable states (7 bits)

# Programming drive amplitudes. Both carry the same ~6.5% relative
# overdrive above their nominal threshold (set: 3.3 V over v_th1 = 3.1 V;
# reset: 5.86 V over v_th2 = 5.5 V) so that devices whose thresholds are
# dispersed upward still respond to the intended pulse.
SET_AMPLITUDE = 3.3          # volts
RESET_AMPLITUDE = 5.86       # volts
PULSE_DURATION = 100e-6      # seconds

MAX_REJECTION_ATTEMPTS = 1000


class PulseKind(Enum):
    SET = "set"
    RESET = "reset"


@dataclass(frozen=True)
class DeviceParams:
    """Bounds, thresholds and quantization of one nanosynapse."""

    g_min: float = DEFAULT_G_MIN
    g_max: float = DEFAULT_G_MAX
    v_th1: float = DEFAULT_V_TH1
    v_th2: float = DEFAULT_V_TH2
    n_states: int = DEFAULT_N_STATES

    def __post_init__(self):
        if not (self.g_max > self.g_min > 0):
            raise ValueError(f"require g_max > g_min > 0, got {self.g_min}, {self.g_max}")
        if not (self.v_th2 > self.v_th1 > 0):
            raise ValueError(f"require v_th2 > v_th1 > 0, got {self.v_th1}, {self.v_th2}")
        if self.n_states < 2:
            raise ValueError(f"need at least 2 states, got {self.n_states}")

    @property
    def write_range(self) -> float:
        return self.g_max - self.g_min

    @property
    def step_size(self) -> float:
        """Conductance change of one programming pulse."""
        return self.write_range / self.n_states


@dataclass(frozen=True)
class PulseSpec:
    kind: PulseKind
    amplitude: float
    duration: float = PULSE_DURATION

    @classmethod
    def set_pulse(cls, amplitude: float = SET_AMPLITUDE) -> "PulseSpec":
        return cls(PulseKind.SET, amplitude)

    @classmethod
    def reset_pulse(cls, amplitude: float = RESET_AMPLITUDE) -> "PulseSpec":
        return cls(PulseKind.RESET, amplitude)


@dataclass(frozen=True)
class DeviceState:
    """A device's parameters plus its current grid position."""

    params: DeviceParams = field(default_factory=DeviceParams)
    step_index: int = 0

    def __post_init__(self):
        if not 0 <= self.step_index <= self.params.n_states:
            raise ValueError(f"step index {self.step_index} outside grid")

    @property
    def conductance(self) -> float:
        return self.params.g_min + self.step_index * self.params.step_size

    @classmethod
    def at_g_min(cls, params: DeviceParams | None = None) -> "DeviceState":
        return cls(params or DeviceParams(), 0)

    @classmethod
    def at_g_max(cls, params: DeviceParams | None = None) -> "DeviceState":
        p = params or DeviceParams()
        return cls(p, p.n_states)


def pulse_direction(amplitude, v_th1, v_th2, kind: PulseKind = PulseKind.SET):
    """Step direction (+1, -1 or 0) of a pulse against a device's thresholds.

    Set and reset pulses use opposite waveform polarities, and only the
    set polarity can grow the conductive filament. A set pulse therefore
    potentiates when its amplitude lies strictly between the device's own
    thresholds, but ruptures the filament (depresses) when it reaches
    v_th2 — a dispersed device with a low v_th2 responds to a nominal set
    with a reset. A reset pulse depresses at or above v_th2 (the nominal
    reset amplitude equals the nominal v_th2, so the boundary is inclusive)
    and otherwise does nothing: with reset polarity no filament growth is
    possible, so an under-threshold reset fails silently instead of
    potentiating. Anything at or below v_th1 is always a no-op. Works
    elementwise on arrays.
    """
    a = np.abs(amplitude)
    if kind is PulseKind.SET:
        return np.where(a >= v_th2, -1, np.where(a > v_th1, 1, 0))
    return np.where(a >= v_th2, -1, 0)


def apply_pulse(state: DeviceState, pulse: PulseSpec) -> tuple[DeviceState, bool]:
    """Apply one programming pulse; returns (new state, saturated flag).

    The pulse is classified against the device's own thresholds, so an
    imperfect device may respond differently than the pulse kind intends.
    Clipping at the grid ends is silent; the flag reports it for
    energy / diagnostic accounting.
    """
    direction = int(pulse_direction(pulse.amplitude, state.params.v_th1,
                                    state.params.v_th2, pulse.kind))
    if direction == 0:
        return state, False
    raw = state.step_index + direction
    clipped = min(max(raw, 0), state.params.n_states)
    return DeviceState(state.params, clipped), clipped != raw


def sample_imperfect(means: DeviceParams, sigma_fraction: float,
                     rng: np.random.Generator) -> DeviceParams:
    """Draw dispersed device parameters around the given means.

    Each of g_min, g_max, v_th1, v_th2 is drawn from a normal distribution
    with standard deviation sigma_fraction times its mean. Draws violating
    the ordering/positivity invariants are rejected and retried, which
    preserves the distribution shape near the means.
    """
    if not 0 <= sigma_fraction < 1:
        raise ValueError(f"sigma_fraction must be in [0, 1), got {sigma_fraction}")
    if sigma_fraction == 0:
        return means
    for _ in range(MAX_REJECTION_ATTEMPTS):
        g_min = rng.normal(means.g_min, sigma_fraction * means.g_min)
        g_max = rng.normal(means.g_max, sigma_fraction * means.g_max)
        v_th1 = rng.normal(means.v_th1, sigma_fraction * means.v_th1)
        v_th2 = rng.normal(means.v_th2, sigma_fraction * means.v_th2)
        if g_max > g_min > 0 and v_th2 > v_th1 > 0:
            return DeviceParams(g_min, g_max, v_th1, v_th2, means.n_states)
    raise RuntimeError(
        f"could not draw valid device parameters after {MAX_REJECTION_ATTEMPTS} "
        f"attempts; sigma_fraction={sigma_fraction} is too large"
    )


def sample_imperfect_array(means: DeviceParams, sigma_fraction: float, shape,
                           rng: np.random.Generator):
    """Vectorized sample_imperfect: four arrays of the given shape.

    Invalid draws are redrawn elementwise until every device satisfies the
    ordering/positivity invariants. Returns (g_min, g_max, v_th1, v_th2).
    """
    if not 0 <= sigma_fraction < 1:
        raise ValueError(f"sigma_fraction must be in [0, 1), got {sigma_fraction}")
    g_min = np.full(shape, float(means.g_min))
    g_max = np.full(shape, float(means.g_max))
    v_th1 = np.full(shape, float(means.v_th1))
    v_th2 = np.full(shape, float(means.v_th2))
    if sigma_fraction == 0:
        return g_min, g_max, v_th1, v_th2
    pending = np.ones(shape, dtype=bool)
    for _ in range(MAX_REJECTION_ATTEMPTS):
        n = int(pending.sum())
        if n == 0:
            return g_min, g_max, v_th1, v_th2
        draw_gmin = rng.normal(means.g_min, sigma_fraction * means.g_min, n)
        draw_gmax = rng.normal(means.g_max, sigma_fraction * means.g_max, n)
        draw_vth1 = rng.normal(means.v_th1, sigma_fraction * means.v_th1, n)
        draw_vth2 = rng.normal(means.v_th2, sigma_fraction * means.v_th2, n)
        ok = (draw_gmax > draw_gmin) & (draw_gmin > 0) & (draw_vth2 > draw_vth1) & (draw_vth1 > 0)
        idx = np.nonzero(pending)
        sel = tuple(ax[ok] for ax in idx)
        g_min[sel] = draw_gmin[ok]
        g_max[sel] = draw_gmax[ok]
        v_th1[sel] = draw_vth1[ok]
        v_th2[sel] = draw_vth2[ok]
        still = np.zeros(n, dtype=bool)
        still[~ok] = True
        pending[idx] = still
    raise RuntimeError(
        f"could not draw valid device parameters after {MAX_REJECTION_ATTEMPTS} "
        f"rounds; sigma_fraction={sigma_fraction} is too large"
    )
