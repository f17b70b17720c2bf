"""Typed errors raised across the toolkit.

Every failure that callers may want to branch on gets its own class; all
inherit from FairauditError so pipeline code can isolate per-strategy
failures with one except clause.
"""


class FairauditError(Exception):
    pass


class SchemaError(FairauditError):
    """Input schema does not match the declared column specs."""


class RowError(FairauditError):
    """A specific data row is unusable (missing / unparseable cell)."""

    def __init__(self, row: int, message: str):
        super().__init__(f"row {row}: {message}")
        self.row = row


class StratificationError(FairauditError):
    """A (group, label) cell is too small to split."""


class DegenerateTargetError(FairauditError):
    """Target column holds a single class; nothing to learn."""


class NumericError(FairauditError):
    """Non-finite values where finite numbers are required."""


class UndefinedMetricError(FairauditError):
    """A rate in the metric's definition has an empty denominator."""


class InfeasibleError(FairauditError):
    """A mitigation transform cannot reach its target on this data."""


class TrainingDivergedError(FairauditError):
    def __init__(self, epoch: int, message: str = "loss became non-finite"):
        super().__init__(f"{message} at epoch {epoch}")
        self.epoch = epoch


class GraphError(FairauditError):
    """Causal graph is cyclic or references unknown columns."""


class ComparabilityError(FairauditError):
    """Model entries measured on different splits cannot be compared."""


class ConfigError(FairauditError):
    """Pipeline / CLI configuration is invalid."""
