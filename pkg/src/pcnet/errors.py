"""Exception types shared across the engine."""


class PcnError(Exception):
    """Base class for engine errors."""


class ShapeError(PcnError, ValueError):
    """Matrix dimensions incompatible with the operation."""

    @classmethod
    def mismatch(cls, what, got, expected):
        return cls(f"{what}: got shape {tuple(got)}, expected {tuple(expected)}")


class ConfigError(PcnError, ValueError):
    """Invalid model or training configuration."""


class ModeError(PcnError, ValueError):
    """Supervised-only quantity requested from an unsupervised snapshot."""


class DivergenceError(PcnError, ArithmeticError):
    """Non-finite values produced by an update.

    The raising site fills in what it knows (`layer`); surrounding loops
    annotate `step`, `phase`, `epoch` and `batch` as the error propagates.
    """

    def __init__(self, layer, phase=None, step=None, epoch=None, batch=None):
        self.layer = layer
        self.phase = phase
        self.step = step
        self.epoch = epoch
        self.batch = batch
        super().__init__(layer)

    def __str__(self):
        parts = []
        if self.epoch is not None:
            parts.append(f"epoch={self.epoch}")
        if self.batch is not None:
            parts.append(f"batch={self.batch}")
        if self.phase is not None:
            parts.append(f"phase={self.phase}")
        if self.step is not None:
            parts.append(f"step={self.step}")
        parts.append(f"layer={self.layer}")
        return "non-finite values during update (" + " ".join(parts) + ")"
