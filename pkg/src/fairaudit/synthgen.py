"""Seeded synthetic credit-lending generator with tunable bias injection.

Columns: citizenship (protected; "domestic" privileged), age, income,
credit_risk (3-level stratum: 0 low / 1 medium / 2 high), amount, duration,
repaid (target; "yes" positive). The structural equations are linear with
additive gaussian noise except the two discretized nodes (credit_risk and
the repayment label); the ground-truth DAG ships alongside the table for
the causal module.

Bias knobs: `proxy_strength` shifts privileged income (an indirect pathway),
`direct_effect` enters the repayment latent directly, and `label_bias`
flips that share of deprived-group positive labels to negative.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .causal import CausalGraph
from .dataset import ColumnSpec, DataTable, from_records
from .errors import ConfigError
from .metrics import demographic_parity, disparate_impact

# frozen after a one-time calibration run (see tests/test_synthgen.py):
# labels pass the four-fifths rule while unmitigated models amplify the gap
DEFAULT_DIRECT_EFFECT = 0.3
DEFAULT_PROXY_STRENGTH = 4.5
DEFAULT_LABEL_NOISE = 1.5

RISK_CUTS = (-0.55, 0.55)
INCOME_BASE = 30.0
AMOUNT_SLOPE = 0.4


@dataclass(frozen=True)
class GenConfig:
    n: int = 20000
    seed: int = 0
    p_protected: float = 0.35  # unprivileged-group fraction
    direct_effect: float = DEFAULT_DIRECT_EFFECT
    proxy_strength: float = DEFAULT_PROXY_STRENGTH
    label_bias: float = 0.0
    income_noise: float = 8.0
    risk_noise: float = 0.7
    amount_noise: float = 3.0
    duration_noise: float = 12.0
    label_noise: float = DEFAULT_LABEL_NOISE

    def validate(self) -> "GenConfig":
        if self.n < 100:
            raise ConfigError("generator needs n >= 100")
        if not 0.0 < self.p_protected < 1.0:
            raise ConfigError("p_protected must be in (0,1)")
        if not 0.0 <= self.label_bias < 1.0:
            raise ConfigError("label_bias must be in [0,1)")
        noises = (
            self.income_noise,
            self.risk_noise,
            self.amount_noise,
            self.duration_noise,
            self.label_noise,
        )
        if all(s == 0.0 for s in noises):
            raise ConfigError("at least one noise scale must be positive")
        return self

    def to_dict(self) -> dict:
        return asdict(self)


def schema() -> list[ColumnSpec]:
    return [
        ColumnSpec("citizenship", "binary", "protected", positive="domestic", negative="foreign"),
        ColumnSpec("age", "numeric", "feature"),
        ColumnSpec("income", "numeric", "feature"),
        ColumnSpec("credit_risk", "numeric", "stratum"),
        ColumnSpec("amount", "numeric", "feature"),
        ColumnSpec("duration", "numeric", "feature"),
        ColumnSpec("repaid", "binary", "target", positive="yes", negative="no"),
    ]


def ground_truth_graph() -> CausalGraph:
    return CausalGraph(
        nodes=("citizenship", "age", "income", "credit_risk", "amount", "duration", "repaid"),
        edges=(
            ("citizenship", "income"),
            ("income", "credit_risk"),
            ("age", "credit_risk"),
            ("income", "amount"),
            ("credit_risk", "repaid"),
            ("amount", "repaid"),
            ("duration", "repaid"),
            ("citizenship", "repaid"),
        ),
    )


def linear_pathways(config: GenConfig) -> list[tuple[str, str, float]]:
    """(node, parent, coefficient) for the exactly-linear structural equations."""
    return [
        ("income", "citizenship", config.proxy_strength),
        ("amount", "income", AMOUNT_SLOPE),
    ]


def generate(config: GenConfig) -> tuple[DataTable, CausalGraph]:
    config.validate()
    rng = np.random.default_rng(config.seed)
    n = config.n

    priv = (rng.random(n) >= config.p_protected).astype(float)
    age = 42.0 + 12.0 * rng.standard_normal(n)
    income = (
        INCOME_BASE + config.proxy_strength * priv + config.income_noise * rng.standard_normal(n)
    )
    risk_latent = (
        -0.10 * (income - 34.0)
        - 0.02 * (age - 42.0)
        + config.risk_noise * rng.standard_normal(n)
    )
    credit_risk = np.digitize(risk_latent, RISK_CUTS).astype(float)
    amount = 10.0 + AMOUNT_SLOPE * income + config.amount_noise * rng.standard_normal(n)
    duration = 36.0 + config.duration_noise * rng.standard_normal(n)

    repay_latent = (
        1.55
        - 0.80 * credit_risk
        - 0.02 * amount
        - 0.01 * (duration - 36.0)
        + config.direct_effect * priv
        + config.label_noise * rng.standard_normal(n)
    )
    repaid = (repay_latent > 0.0).astype(float)
    if config.label_bias > 0.0:
        flip = (priv == 0.0) & (repaid == 1.0) & (rng.random(n) < config.label_bias)
        repaid[flip] = 0.0

    records = []
    for i in range(n):
        records.append(
            {
                "citizenship": "domestic" if priv[i] == 1.0 else "foreign",
                "age": float(age[i]),
                "income": float(income[i]),
                "credit_risk": float(credit_risk[i]),
                "amount": float(amount[i]),
                "duration": float(duration[i]),
                "repaid": "yes" if repaid[i] == 1.0 else "no",
            }
        )
    table = from_records(schema(), records)
    return table, ground_truth_graph()


@dataclass(frozen=True)
class BiasProfile:
    label_dp: float
    di_ratio: float
    di_passes: bool
    stratum_rates: dict  # stratum -> (privileged rate, unprivileged rate)

    def to_dict(self) -> dict:
        return {
            "label_dp": self.label_dp,
            "di_ratio": self.di_ratio,
            "di_passes": self.di_passes,
            "stratum_rates": {
                str(k): {"privileged": v[0], "unprivileged": v[1]}
                for k, v in self.stratum_rates.items()
            },
        }


def bias_profile(table: DataTable) -> BiasProfile:
    """Label-level bias summary: DP, the four-fifths ratio, per-stratum rates."""
    y = table.y()
    groups = table.groups()
    dp = demographic_parity(y, groups)
    if y[groups == 1.0].mean() == 0.0:
        di_ratio, di_passes = 0.0, False  # degenerate: nobody privileged repaid
    else:
        di = disparate_impact(y, groups)
        di_ratio, di_passes = di.ratio, di.passes
    rates: dict = {}
    if table.stratum_name is not None:
        strata = table.strata()
        for s in sorted(set(strata.tolist())):
            mask = strata == s
            pr = y[mask & (groups == 1.0)]
            ur = y[mask & (groups == 0.0)]
            rates[s] = (
                float(pr.mean()) if pr.size else float("nan"),
                float(ur.mean()) if ur.size else float("nan"),
            )
    return BiasProfile(label_dp=dp, di_ratio=di_ratio, di_passes=di_passes, stratum_rates=rates)
