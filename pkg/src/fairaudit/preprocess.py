"""Pre-processing mitigations applied to the training table before a
standard learner is fit: protected-attribute removal (FTU), correlated-
feature suppression, label massaging, and independence resampling.

Every transform returns (table', plan); replaying the plan against the
original table reproduces table' exactly, so plans double as audit trails.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import DataTable, correlation_with
from .errors import InfeasibleError, SchemaError
from .learners import Classifier, LearnerConfig, fit, predict_scores
from .metrics import demographic_parity

SUPPRESS_THRESHOLD = 0.15


@dataclass
class PreprocessPlan:
    method: str  # ftu | suppression | massaging | sampling
    removed_columns: list[str] = field(default_factory=list)
    removed_correlations: dict[str, float] = field(default_factory=dict)
    relabeled_rows: list[tuple[int, float, float]] = field(default_factory=list)
    resampling_counts: dict[str, int] = field(default_factory=dict)
    selected_rows: list[int] | None = None
    aux_model: Classifier | None = None

    def apply(self, table: DataTable) -> DataTable:
        """Replay the recorded transform against the original table."""
        if self.method in ("ftu", "suppression"):
            return table.drop_sources(self.removed_columns)
        if self.method == "massaging":
            y = table.y().copy()
            for row, _old, new in self.relabeled_rows:
                y[row] = new
            return table.replace_column(table.target_name, y)
        if self.method == "sampling":
            return table.subset(np.asarray(self.selected_rows, dtype=int))
        raise SchemaError(f"unknown preprocessing method {self.method!r}")

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "removed_columns": self.removed_columns,
            "removed_correlations": self.removed_correlations,
            "relabeled_rows": [[int(r), o, n] for r, o, n in self.relabeled_rows],
            "resampling_counts": self.resampling_counts,
            "selected_rows": self.selected_rows,
            "aux_model": None
            if self.aux_model is None
            else {"kind": self.aux_model.kind, "config": self.aux_model.config.to_dict()},
        }


def ftu(table: DataTable) -> tuple[DataTable, PreprocessPlan]:
    """Drop the protected column(s); everything else is untouched."""
    protected = [c.name for c in table.schema if c.role == "protected"]
    if not protected:
        raise SchemaError("no protected column present (already removed?)")
    plan = PreprocessPlan(method="ftu", removed_columns=protected)
    return plan.apply(table), plan


def suppress(
    table: DataTable, threshold: float = SUPPRESS_THRESHOLD
) -> tuple[DataTable, PreprocessPlan]:
    """Drop the protected column plus every feature correlated beyond the
    threshold (strictly) with it."""
    if not 0.0 < threshold <= 1.0:
        raise InfeasibleError(f"threshold must be in (0,1], got {threshold}")
    protected = table.protected_name
    corr = correlation_with(table, protected)
    removed = {protected: 1.0}
    for feature, r in corr.by_feature.items():
        if abs(r) > threshold:
            removed[feature] = r
    table2 = table.drop_sources(list(removed))
    if not table2.model_input_names():
        raise InfeasibleError(
            f"suppression at threshold {threshold} removed every feature"
        )
    plan = PreprocessPlan(
        method="suppression",
        removed_columns=list(removed),
        removed_correlations={k: float(v) for k, v in removed.items()},
    )
    return table2, plan


def _flip_counts(p_dep, n_dep, p_fav, n_fav, n, cap_up, cap_down):
    """Fewest (promotions, demotions) putting the group label rates within 1/n.

    Paired flips move the gap in steps of 1/n_dep + 1/n_fav (at least 4/n),
    which can jump over the +-1/n window, so the larger group absorbs a
    minimal asymmetric remainder (its single-flip step is at most 2/n).
    """
    gap0 = p_fav / n_fav - p_dep / n_dep
    step = 1.0 / n_dep + 1.0 / n_fav
    m_star = gap0 / step
    smaller = min(n_dep, n_fav)
    k_max = int(np.ceil(n / (2.0 * smaller))) + 1
    best = None
    for m in {int(np.floor(m_star)), int(np.ceil(m_star)), 0}:
        if m < 0:
            continue
        for k in range(-k_max, k_max + 1):
            if n_fav >= n_dep:
                mu, md = m, m + k
            else:
                mu, md = m + k, m
            if mu < 0 or md < 0 or mu > cap_up or md > cap_down:
                continue
            gap = (p_fav - md) / n_fav - (p_dep + mu) / n_dep
            if abs(gap) <= 1.0 / n + 1e-12:
                key = (mu + md, abs(mu - md), mu)
                if best is None or key < best[0]:
                    best = (key, mu, md)
    if best is None:
        raise InfeasibleError("not enough candidate rows to equalize label rates")
    return best[1], best[2]


def massage(
    table: DataTable,
    aux_kind: str = "forest",
    config: LearnerConfig | None = None,
) -> tuple[DataTable, PreprocessPlan]:
    """Relabel the minimal number of rows so group label rates agree within 1/n.

    An auxiliary classifier ranks candidates: the deprived group's highest
    scored negatives are promoted and the favored group's lowest scored
    positives are demoted. Ties in the auxiliary score break by row id.
    """
    config = config or LearnerConfig()
    groups = table.groups()
    y = table.y()
    n = table.n
    for g in (0.0, 1.0):
        for label in (0.0, 1.0):
            if not ((groups == g) & (y == label)).any():
                raise InfeasibleError(
                    f"massaging needs both labels in both groups; "
                    f"(group={int(g)}, label={int(label)}) is empty"
                )
    rate = {g: float(y[groups == g].mean()) for g in (0.0, 1.0)}
    if rate[0.0] <= rate[1.0]:
        deprived, favored = 0.0, 1.0
    else:
        deprived, favored = 1.0, 0.0

    aux = fit(aux_kind, table, config=config)
    scores = predict_scores(aux, table)

    promote = np.flatnonzero((groups == deprived) & (y == 0.0))
    promote = promote[np.lexsort((promote, -scores[promote]))]
    demote = np.flatnonzero((groups == favored) & (y == 1.0))
    demote = demote[np.lexsort((demote, scores[demote]))]

    n_dep = int((groups == deprived).sum())
    n_fav = int((groups == favored).sum())
    p_dep = float(y[groups == deprived].sum())
    p_fav = float(y[groups == favored].sum())

    m_up, m_down = _flip_counts(
        p_dep, n_dep, p_fav, n_fav, n, cap_up=len(promote), cap_down=len(demote)
    )

    relabeled = []
    y2 = y.copy()
    for row in promote[:m_up]:
        relabeled.append((int(row), 0.0, 1.0))
        y2[row] = 1.0
    for row in demote[:m_down]:
        relabeled.append((int(row), 1.0, 0.0))
        y2[row] = 0.0
    plan = PreprocessPlan(method="massaging", relabeled_rows=relabeled, aux_model=aux)
    if not relabeled:
        return table, plan
    return table.replace_column(table.target_name, y2), plan


def resample(table: DataTable, seed: int = 0) -> tuple[DataTable, PreprocessPlan]:
    """Re-draw rows so (group, label) counts match independence targets.

    Target for cell (g, y) is round(n_g * n_y / n); small cells duplicate
    rows (seeded uniform draws), large cells subsample without replacement.
    """
    groups = table.groups()
    y = table.y()
    n = table.n
    n_g = {g: int((groups == g).sum()) for g in (0.0, 1.0)}
    n_y = {label: int((y == label).sum()) for label in (0.0, 1.0)}
    rng = np.random.default_rng(seed)
    selected: list[np.ndarray] = []
    counts: dict[str, int] = {}
    for g in (0.0, 1.0):
        for label in (0.0, 1.0):
            cell = np.flatnonzero((groups == g) & (y == label))
            if cell.size == 0:
                raise InfeasibleError(
                    f"(group={int(g)}, label={int(label)}) cell is empty; cannot resample"
                )
            target = int(np.floor(n_g[g] * n_y[label] / n + 0.5))
            counts[f"g{int(g)}_y{int(label)}"] = target
            if target <= cell.size:
                take = np.sort(rng.choice(cell, size=target, replace=False))
            else:
                extra = rng.choice(cell, size=target - cell.size, replace=True)
                take = np.concatenate([cell, np.sort(extra)])
            selected.append(take)
    rows = np.concatenate(selected)
    plan = PreprocessPlan(
        method="sampling",
        resampling_counts=counts,
        selected_rows=[int(r) for r in rows],
    )
    return table.subset(rows), plan


def label_dp(table: DataTable) -> float:
    """DP of the target labels themselves (used by construction checks)."""
    return demographic_parity(table.y(), table.groups())
