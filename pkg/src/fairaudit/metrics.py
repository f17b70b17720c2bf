"""Group fairness and predictive performance metrics.

All group metrics are signed as privileged minus unprivileged (groups array
holds 1 for the privileged group). Predictions may be hard {0,1} labels or
positive-decision probabilities in [0,1]; rates are means either way, which
gives expectation semantics for randomized classifiers with the same code
path. Undefined rates raise UndefinedMetricError instead of faking zeros.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import UndefinedMetricError

DI_RULE_THRESHOLD = 0.8  # four-fifths rule on the group rate ratio


def _as_arrays(*arrays):
    out = [np.asarray(a, dtype=float) for a in arrays]
    n = out[0].shape[0]
    for a in out[1:]:
        if a.shape[0] != n:
            raise ValueError("input arrays must have equal length")
    return out


def _group_rates(preds: np.ndarray, groups: np.ndarray) -> tuple[float, float]:
    priv = groups == 1.0
    unpriv = groups == 0.0
    if not priv.any() or not unpriv.any():
        raise UndefinedMetricError("both protected groups must be present")
    return float(preds[priv].mean()), float(preds[unpriv].mean())


def demographic_parity(preds, groups) -> float:
    """Positive-prediction rate difference, privileged minus unprivileged."""
    preds, groups = _as_arrays(preds, groups)
    r_priv, r_unpriv = _group_rates(preds, groups)
    return r_priv - r_unpriv


@dataclass(frozen=True)
class DisparateImpact:
    ratio: float
    passes: bool  # four-fifths rule


def disparate_impact(preds, groups) -> DisparateImpact:
    preds, groups = _as_arrays(preds, groups)
    r_priv, r_unpriv = _group_rates(preds, groups)
    if r_priv == 0.0:
        raise UndefinedMetricError("privileged positive rate is 0; ratio undefined")
    ratio = r_unpriv / r_priv
    return DisparateImpact(ratio=ratio, passes=ratio >= DI_RULE_THRESHOLD)


@dataclass(frozen=True)
class EqualizedOdds:
    tpr_diff: float
    fpr_diff: float

    @property
    def scalar(self) -> float:
        """The larger-magnitude component, keeping its sign (ties: tpr)."""
        if abs(self.tpr_diff) >= abs(self.fpr_diff):
            return self.tpr_diff
        return self.fpr_diff


@dataclass(frozen=True)
class ConfusionFairness:
    eopp: float  # TPR difference
    eo: EqualizedOdds
    pp: float  # PPV difference


def _rate_on(preds, mask, what: str) -> float:
    if not mask.any():
        raise UndefinedMetricError(what)
    return float(preds[mask].mean())


def confusion_fairness(preds, groups, y) -> ConfusionFairness:
    preds, groups, y = _as_arrays(preds, groups, y)
    rates = {}
    for g, tag in ((1.0, "privileged"), (0.0, "unprivileged")):
        in_g = groups == g
        if not in_g.any():
            raise UndefinedMetricError(f"{tag} group absent")
        rates[g, "tpr"] = _rate_on(preds, in_g & (y == 1.0), f"{tag} group has no actual positives")
        rates[g, "fpr"] = _rate_on(preds, in_g & (y == 0.0), f"{tag} group has no actual negatives")
        pred_pos = preds[in_g].sum()
        if pred_pos == 0.0:
            raise UndefinedMetricError(f"{tag} group has no predicted positives; PPV undefined")
        rates[g, "ppv"] = float((preds[in_g] * y[in_g]).sum() / pred_pos)
    eo = EqualizedOdds(
        tpr_diff=rates[1.0, "tpr"] - rates[0.0, "tpr"],
        fpr_diff=rates[1.0, "fpr"] - rates[0.0, "fpr"],
    )
    return ConfusionFairness(
        eopp=eo.tpr_diff,
        eo=eo,
        pp=rates[1.0, "ppv"] - rates[0.0, "ppv"],
    )


@dataclass(frozen=True)
class ConditionalDP:
    by_stratum: dict  # stratum label -> signed DP
    weighted_mean_abs: float  # stratum-size-weighted mean of |DP|
    max_abs: float
    skipped: tuple  # strata excluded because a group cell was empty


def conditional_dp(preds, groups, strata) -> ConditionalDP:
    """Demographic parity within each stratum plus two aggregates."""
    preds, groups, strata = _as_arrays(preds, groups, strata)
    by_stratum: dict = {}
    skipped: list = []
    sizes: dict = {}
    for s in sorted(set(strata.tolist())):
        mask = strata == s
        sizes[s] = int(mask.sum())
        try:
            by_stratum[s] = demographic_parity(preds[mask], groups[mask])
        except UndefinedMetricError:
            skipped.append(s)
    if not by_stratum:
        raise UndefinedMetricError("no stratum has both groups present")
    total = sum(sizes[s] for s in by_stratum)
    weighted = sum(sizes[s] * abs(v) for s, v in by_stratum.items()) / total
    return ConditionalDP(
        by_stratum=by_stratum,
        weighted_mean_abs=float(weighted),
        max_abs=float(max(abs(v) for v in by_stratum.values())),
        skipped=tuple(skipped),
    )


# -- performance ---------------------------------------------------------------


@dataclass(frozen=True)
class PerformanceReport:
    accuracy: float
    precision: float | None  # None when nothing was predicted positive
    recall: float
    f1: float | None
    auroc: float | None  # None for hard-label-only (randomized) classifiers


def auroc_score(scores, y) -> float:
    """Probability a random positive outranks a random negative, ties as 1/2.

    Midrank formulation; exactly equal to the pairwise comparison count.
    """
    scores, y = _as_arrays(scores, y)
    pos = y == 1.0
    n_pos = int(pos.sum())
    n_neg = int((~pos).sum())
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("auroc needs both classes present")
    order = np.argsort(scores, kind="mergesort")
    s = scores[order]
    ranks = np.empty(len(s))
    i = 0
    while i < len(s):
        j = i
        while j + 1 < len(s) and s[j + 1] == s[i]:
            j += 1
        ranks[i : j + 1] = (i + j) / 2.0 + 1.0  # midrank, 1-based
        i = j + 1
    rank_sum = float(ranks[pos[order]].sum())
    u = rank_sum - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


def performance(y, scores=None, labels=None) -> PerformanceReport:
    """Confusion metrics at threshold 0.5 (ties to positive) plus AUROC.

    Pass `scores` for probabilistic output (AUROC included), `labels` for
    hard decisions (AUROC omitted), or both. Labels may be expected-positive
    probabilities, in which case the confusion counts are expectations.
    """
    if scores is None and labels is None:
        raise ValueError("need scores or labels")
    (y,) = _as_arrays(y)
    if labels is None:
        (scores,) = _as_arrays(scores)
        labels = (scores >= 0.5).astype(float)
    else:
        (labels,) = _as_arrays(labels)

    n_pos = float((y == 1.0).sum())
    if n_pos == 0.0:
        raise UndefinedMetricError("no actual positives; recall undefined")
    tp = float((labels * y).sum())
    fp = float((labels * (1.0 - y)).sum())
    fn = float(((1.0 - labels) * y).sum())
    tn = float(((1.0 - labels) * (1.0 - y)).sum())

    accuracy = (tp + tn) / len(y)
    recall = tp / (tp + fn)
    pred_pos = tp + fp
    if pred_pos == 0.0:
        precision = None
        f1 = None
    else:
        precision = tp / pred_pos
        f1 = 0.0 if precision + recall == 0.0 else 2 * precision * recall / (precision + recall)

    auroc = auroc_score(scores, y) if scores is not None else None
    return PerformanceReport(
        accuracy=accuracy, precision=precision, recall=recall, f1=f1, auroc=auroc
    )


# -- combined report -------------------------------------------------------------


@dataclass(frozen=True)
class FairnessReport:
    dp: float
    eopp: float
    eo: EqualizedOdds
    pp: float
    di_ratio: float
    di_passes: bool
    cdp: ConditionalDP | None = None
    meta: dict = field(default_factory=lambda: {"eo_scalar": "larger-magnitude component"})

    def to_dict(self) -> dict:
        d = {
            "dp": self.dp,
            "eo": self.eo.scalar,
            "eo_tpr_diff": self.eo.tpr_diff,
            "eo_fpr_diff": self.eo.fpr_diff,
            "eopp": self.eopp,
            "pp": self.pp,
            "di_ratio": self.di_ratio,
            "di_passes": self.di_passes,
        }
        if self.cdp is not None:
            d["cdp"] = {
                "by_stratum": {str(k): v for k, v in self.cdp.by_stratum.items()},
                "weighted_mean_abs": self.cdp.weighted_mean_abs,
                "max_abs": self.cdp.max_abs,
            }
        return d


def fairness_report(preds, groups, y, strata=None) -> FairnessReport:
    preds, groups, y = _as_arrays(preds, groups, y)
    dp = demographic_parity(preds, groups)
    di = disparate_impact(preds, groups)
    cf = confusion_fairness(preds, groups, y)
    cdp = None
    if strata is not None:
        cdp = conditional_dp(preds, groups, strata)
    return FairnessReport(
        dp=dp,
        eopp=cf.eopp,
        eo=cf.eo,
        pp=cf.pp,
        di_ratio=di.ratio,
        di_passes=di.passes,
        cdp=cdp,
    )
