"""Total prediction-error energy and per-step energy bookkeeping.

The scalar being minimized is the batch mean of per-sample energies:
half the squared prediction error summed over generative layers, plus
half the squared supervised error when labels are clamped.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import List

from . import kernels
from .errors import PcnError
from .model import ErrorBundle

PHASE_INFER = "infer"
PHASE_LEARN = "learn"


class TraceOrderError(PcnError, ValueError):
    """Record violates the per-batch step/phase ordering contract."""


def total_energy(bundle: ErrorBundle) -> float:
    """Batch-averaged total energy of one snapshot.

    (1/B) sum_b [ 0.5 * sum_l ||err_b(l)||^2 + 0.5 * ||sup_err_b||^2 ],
    the supervised term present only when the snapshot carries labels.
    The top-layer error signal is not part of the energy.
    """
    s = 0.0
    for err in bundle.errors:
        s += kernels.half_sumsq(err)
    if bundle.supervised:
        s += kernels.half_sumsq(bundle.sup_err)
    return s / bundle.batch_size


@dataclass(frozen=True)
class EnergyRecord:
    epoch: int
    batch_index: int
    step_index: int
    phase: str
    energy: float


@dataclass
class EnergyTrace:
    """Ordered energy records for one training run.

    Within one (epoch, batch) the step index must strictly increase, the
    phase may switch from infer to learn at most once, and never back.
    """

    records: List[EnergyRecord] = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def add(self, rec: EnergyRecord) -> None:
        if rec.phase not in (PHASE_INFER, PHASE_LEARN):
            raise TraceOrderError(f"unknown phase {rec.phase!r}")
        if not rec.energy >= 0.0:
            raise TraceOrderError(f"energy must be >= 0, got {rec.energy}")
        if self.records:
            last = self.records[-1]
            if (last.epoch, last.batch_index) == (rec.epoch, rec.batch_index):
                if rec.step_index <= last.step_index:
                    raise TraceOrderError(
                        f"step {rec.step_index} after step {last.step_index} "
                        f"in epoch {rec.epoch} batch {rec.batch_index}")
                if last.phase == PHASE_LEARN and rec.phase == PHASE_INFER:
                    raise TraceOrderError(
                        "phase may not return to infer within one batch")
        self.records.append(rec)

    def write_csv(self, path) -> None:
        """One row per record; energies printed to 9 significant digits."""
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["epoch", "batch", "step", "phase", "energy"])
            for r in self.records:
                out.writerow([r.epoch, r.batch_index, r.step_index, r.phase,
                              f"{r.energy:.9g}"])


def record(trace: EnergyTrace, epoch: int, batch_index: int, step_index: int,
           phase: str, energy: float) -> None:
    """Append one record, enforcing the ordering contract."""
    trace.add(EnergyRecord(epoch, batch_index, step_index, phase, energy))
