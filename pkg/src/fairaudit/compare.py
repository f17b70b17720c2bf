"""Model selection across mitigation strategies: the F-beta-style trade-off
score, constrained performance, and ranked reporting for the dashboard."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ComparabilityError, ConfigError

FAIRNESS_FIELDS = ("dp", "eo", "eopp", "pp", "cdp")
PERFORMANCE_FIELDS = ("accuracy", "precision", "recall", "f1", "auroc")


@dataclass(frozen=True)
class ModelEntry:
    strategy_id: str
    family: str  # no-mitigation | pre | in | post | causal
    fairness: dict  # field -> signed value (cdp stored as its weighted |.| mean)
    performance: dict  # field -> value in [0,1] (auroc may be None)
    fingerprint: str = ""  # dataset/split identity for comparability checks

    def phi(self, metric: str) -> float:
        if metric not in self.fairness or self.fairness[metric] is None:
            raise ConfigError(f"entry {self.strategy_id!r} has no fairness value {metric!r}")
        return float(self.fairness[metric])

    def pi(self, metric: str) -> float | None:
        if metric not in self.performance:
            raise ConfigError(f"entry {self.strategy_id!r} has no performance value {metric!r}")
        v = self.performance[metric]
        return None if v is None else float(v)


@dataclass(frozen=True)
class SelectorConfig:
    phi_metric: str = "dp"
    pi_metric: str = "f1"
    beta: float = 1.0
    Phi: float = 0.05  # constraint bound on |phi|
    mode: str = "tradeoff"  # tradeoff | constrained

    def validate(self) -> "SelectorConfig":
        if self.mode not in ("tradeoff", "constrained"):
            raise ConfigError(f"unknown selector mode {self.mode!r}")
        if self.beta <= 0:
            raise ConfigError("beta must be positive")
        if self.Phi < 0:
            raise ConfigError("Phi must be non-negative")
        if self.phi_metric not in FAIRNESS_FIELDS:
            raise ConfigError(f"unknown fairness metric {self.phi_metric!r}")
        if self.pi_metric not in PERFORMANCE_FIELDS:
            raise ConfigError(f"unknown performance metric {self.pi_metric!r}")
        return self


def tradeoff_score(phi: float, pi: float, beta: float = 1.0) -> float:
    """(1+b^2) * (1-|phi|)*pi / (b^2*(1-|phi|) + pi); 0 when the denominator
    vanishes (|phi|=1 with pi=0)."""
    fair = 1.0 - abs(phi)
    denom = beta * beta * fair + pi
    if denom == 0.0:
        return 0.0
    return (1.0 + beta * beta) * (fair * pi) / denom


def _check_comparable(entries: list[ModelEntry]) -> None:
    prints = {e.fingerprint for e in entries if e.fingerprint}
    if len(prints) > 1:
        raise ComparabilityError(
            f"entries were measured on different splits: {sorted(prints)}"
        )


@dataclass(frozen=True)
class Selection:
    winner: ModelEntry | None
    feasible: tuple[str, ...]  # strategy ids, |phi| <= Phi
    suggestion: ModelEntry | None = None  # nearest-to-feasible when none qualify


def constrained_best(entries: list[ModelEntry], config: SelectorConfig) -> Selection:
    """Highest performance subject to |phi| <= Phi; ties prefer lower |phi|,
    then lexicographic strategy id. Entries without the performance value
    (e.g. no AUROC for randomized classifiers) cannot win."""
    if not entries:
        raise ConfigError("no entries to select from")
    config.validate()
    _check_comparable(entries)
    feasible = [e for e in entries if abs(e.phi(config.phi_metric)) <= config.Phi]
    if not feasible:
        nearest = min(entries, key=lambda e: (abs(e.phi(config.phi_metric)), e.strategy_id))
        return Selection(winner=None, feasible=(), suggestion=nearest)
    scored = [e for e in feasible if e.pi(config.pi_metric) is not None]
    if not scored:
        nearest = min(feasible, key=lambda e: (abs(e.phi(config.phi_metric)), e.strategy_id))
        return Selection(winner=None, feasible=tuple(e.strategy_id for e in feasible),
                         suggestion=nearest)
    winner = min(
        scored,
        key=lambda e: (-e.pi(config.pi_metric), abs(e.phi(config.phi_metric)), e.strategy_id),
    )
    return Selection(winner=winner, feasible=tuple(e.strategy_id for e in feasible))


@dataclass(frozen=True)
class RankedEntry:
    strategy_id: str
    family: str
    phi_abs: float
    pi: float | None
    score: float | None  # tradeoff score (tradeoff mode)
    feasible: bool

    def plane_point(self) -> tuple[float, float | None]:
        return (self.phi_abs, self.pi)


def rank(entries: list[ModelEntry], config: SelectorConfig) -> list[RankedEntry]:
    """Ordered list: tradeoff mode sorts by descending score; constrained mode
    puts the feasible set first (by performance), then the rest by |phi|."""
    config.validate()
    _check_comparable(entries)
    ranked = []
    for e in entries:
        phi_abs = abs(e.phi(config.phi_metric))
        pi = e.pi(config.pi_metric)
        score = None
        if config.mode == "tradeoff" and pi is not None:
            score = tradeoff_score(e.phi(config.phi_metric), pi, config.beta)
        ranked.append(
            RankedEntry(
                strategy_id=e.strategy_id,
                family=e.family,
                phi_abs=phi_abs,
                pi=pi,
                score=score,
                feasible=phi_abs <= config.Phi,
            )
        )
    if config.mode == "tradeoff":
        ranked.sort(
            key=lambda r: (
                -(r.score if r.score is not None else -1.0),
                r.phi_abs,
                r.strategy_id,
            )
        )
        return ranked
    feasible = [r for r in ranked if r.feasible]
    feasible.sort(
        key=lambda r: (-(r.pi if r.pi is not None else -1.0), r.phi_abs, r.strategy_id)
    )
    rest = [r for r in ranked if not r.feasible]
    rest.sort(key=lambda r: (r.phi_abs, r.strategy_id))
    return feasible + rest
