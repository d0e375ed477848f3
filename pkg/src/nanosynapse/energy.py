"""Programming-pulse bookkeeping and per-technology energy conversion."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class TechnologySpec:
    """Per-write energy cost of one nanosynapse technology.

    Voltage and programming time are metadata; the per-write energy is the
    device-specific constant actually used for totals.
    """

    name: str
    energy_per_write: float  # joules
    programming_voltage: float = 0.0
    programming_time: float = 0.0

    def __post_init__(self):
        if self.energy_per_write <= 0:
            raise ValueError("energy_per_write must be positive")


TBFE = TechnologySpec("TBFe", energy_per_write=0.077e-6,
                      programming_voltage=4.4, programming_time=100e-6)
ENODE = TechnologySpec("ENODe", energy_per_write=0.325e-9,
                       programming_voltage=0.5e-3, programming_time=2.0)
DEFAULT_TECHNOLOGIES = (TBFE, ENODE)


@dataclass
class EnergyLedger:
    """Counts every programming pulse fired during a run.

    Pulses aimed at saturated devices still count: the hardware fires them
    regardless of whether the conductance moves.
    """

    set_pulses: int = 0
    reset_pulses: int = 0

    @property
    def total_pulses(self) -> int:
        return self.set_pulses + self.reset_pulses

    def energy(self, tech: TechnologySpec) -> float:
        return self.total_pulses * tech.energy_per_write

    def merge(self, other: "EnergyLedger") -> "EnergyLedger":
        """Aggregate ledgers from independent runs."""
        return EnergyLedger(self.set_pulses + other.set_pulses,
                            self.reset_pulses + other.reset_pulses)


@dataclass
class EnergyReportRow:
    technology: str
    full_energy: float
    energy_within_10pct: float | None
    energy_within_20pct: float | None


def energy_report(ledger: EnergyLedger, checkpoints,
                  technologies=DEFAULT_TECHNOLOGIES) -> list[EnergyReportRow]:
    """Energy at full training and at early near-converged checkpoints.

    ``checkpoints`` is a sequence of (samples_seen, test_accuracy,
    cumulative_pulses) records from a training run. For each technology the
    report gives the total programming energy plus the energy spent up to
    the earliest checkpoint whose accuracy is within 10% and 20% of the
    final accuracy (None if the trace is empty). "Within 10%" is relative:
    accuracy at least 0.9 times the final accuracy.
    """
    checkpoints = list(checkpoints)
    rows = []
    pulses_10 = pulses_20 = None
    if checkpoints:
        final_acc = checkpoints[-1][1]
        for samples, acc, pulses in checkpoints:
            if pulses_10 is None and acc >= 0.90 * final_acc:
                pulses_10 = pulses
            if pulses_20 is None and acc >= 0.80 * final_acc:
                pulses_20 = pulses
    for tech in technologies:
        rows.append(EnergyReportRow(
            technology=tech.name,
            full_energy=ledger.energy(tech),
            energy_within_10pct=None if pulses_10 is None else pulses_10 * tech.energy_per_write,
            energy_within_20pct=None if pulses_20 is None else pulses_20 * tech.energy_per_write,
        ))
    return rows
