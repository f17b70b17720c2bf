"""Post-processing: mitigated decisions as a function of (score, group).

Policies are fit on held-out scores and expressed per group (or per
group x stratum) as a mixture over score thresholds. A single component is
a deterministic threshold; two components interpolate between adjacent
achievable operating points (needed whenever tied scores make the exact
target rate unreachable deterministically); equalized odds may need a third
component because the optimal operating point can sit strictly inside one
group's achievable region (Caratheodory: any interior point of the ROC hull
is a mixture of at most three threshold classifiers).

All reported guarantees use expectation semantics: the expected decision
rate of a mixture is computed exactly, never sampled.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SchemaError, UndefinedMetricError

_EPS = 1e-9


@dataclass(frozen=True)
class GroupRule:
    components: tuple[tuple[float, float], ...]  # (threshold, probability)

    def __post_init__(self):
        total = sum(p for _, p in self.components)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"component probabilities sum to {total}, not 1")

    @property
    def deterministic(self) -> bool:
        return len(self.components) == 1

    def positive_probability(self, scores: np.ndarray) -> np.ndarray:
        out = np.zeros(scores.shape[0])
        for t, p in self.components:
            out += p * (scores >= t)
        return out


@dataclass
class ThresholdPolicy:
    objective: str  # dp | eopp | eo | cdp
    rules: dict  # group -> GroupRule, or (group, stratum) -> GroupRule
    conditional: bool = False
    utility: float = 0.0  # expected accuracy on the fitting data
    infeasible: bool = False
    warnings: list[str] = field(default_factory=list)
    fit_on: str = "validation"

    def to_dict(self) -> dict:
        def key_str(k):
            if isinstance(k, tuple):
                return f"g{int(k[0])}|s{k[1]}"
            return f"g{int(k)}"

        return {
            "objective": self.objective,
            "conditional": self.conditional,
            "utility": self.utility,
            "infeasible": self.infeasible,
            "warnings": self.warnings,
            "fit_on": self.fit_on,
            "rules": {
                key_str(k): {"components": [[t, p] for t, p in r.components]}
                for k, r in self.rules.items()
            },
        }


# -- achievable operating points -------------------------------------------------


class _GroupCurve:
    """Achievable (threshold, rate) pairs for one group, rate ascending.

    `rate` is the positive-decision rate over `base` rows (all rows for DP,
    actual positives for TPR targets). Thresholds apply to all rows.
    """

    def __init__(self, scores: np.ndarray, base_mask: np.ndarray):
        base = np.sort(scores[base_mask])
        if base.size == 0:
            raise UndefinedMetricError("no rows to target in this group")
        self.m = base.size
        thresholds = np.unique(scores)
        rates = []
        for t in thresholds:
            ge = self.m - np.searchsorted(base, t, side="left")
            rates.append(ge / self.m)
        pairs = sorted(zip(rates, -thresholds))  # rate asc, threshold desc on ties
        if pairs[0][0] > 0.0 and scores.max() < 1.0:
            pairs.insert(0, (0.0, -1.0))  # "predict none" is reachable
        dedup: list[tuple[float, float]] = []
        for r, negt in pairs:
            if dedup and dedup[-1][0] == r:
                continue
            dedup.append((r, -negt))
        self.rates = np.array([r for r, _ in dedup])
        self.thresholds = np.array([t for _, t in dedup])

    def rule_for_rate(self, target: float) -> tuple[GroupRule, float]:
        """Mixture achieving `target` exactly when inside the achievable span,
        else the nearest endpoint. Returns (rule, expected rate)."""
        rates, thr = self.rates, self.thresholds
        if target <= rates[0] + _EPS:
            return GroupRule(((float(thr[0]), 1.0),)), float(rates[0])
        if target >= rates[-1] - _EPS:
            return GroupRule(((float(thr[-1]), 1.0),)), float(rates[-1])
        i = int(np.searchsorted(rates, target, side="left"))
        if abs(rates[i] - target) <= 1e-12:
            return GroupRule(((float(thr[i]), 1.0),)), float(rates[i])
        lo, hi = i - 1, i
        p_hi = (target - rates[lo]) / (rates[hi] - rates[lo])
        rule = GroupRule(((float(thr[hi]), float(p_hi)), (float(thr[lo]), float(1.0 - p_hi))))
        return rule, float(target)


def _expected_accuracy(rules: dict, scores, groups, y, strata=None) -> float:
    p = positive_probability_arrays(rules, scores, groups, strata)
    return float((y * p + (1.0 - y) * (1.0 - p)).mean())


def positive_probability_arrays(rules: dict, scores, groups, strata=None) -> np.ndarray:
    scores = np.asarray(scores, dtype=float)
    groups = np.asarray(groups, dtype=float)
    out = np.empty(scores.shape[0])
    out.fill(np.nan)
    if strata is None:
        for g, rule in rules.items():
            mask = groups == g
            out[mask] = rule.positive_probability(scores[mask])
    else:
        strata = np.asarray(strata, dtype=float)
        for (g, s), rule in rules.items():
            mask = (groups == g) & (strata == s)
            out[mask] = rule.positive_probability(scores[mask])
    if np.isnan(out).any():
        raise SchemaError("rows with a group/stratum the policy does not cover")
    return out


# -- demographic parity / equal opportunity sweeps -------------------------------


def _sweep_common_rate(scores, groups, y, base_masks) -> tuple[dict, float, list[str]]:
    scores = np.asarray(scores, dtype=float)
    groups = np.asarray(groups, dtype=float)
    y = np.asarray(y, dtype=float)
    gvals = (0.0, 1.0)
    for g in gvals:
        if not (groups == g).any():
            raise UndefinedMetricError("both groups must be present")
    curves = {}
    warnings = []
    for g in gvals:
        mask = groups == g
        curves[g] = _GroupCurve(scores[mask], base_masks[g][mask])
        if set(curves[g].rates.tolist()) <= {0.0, 1.0}:
            warnings.append(
                f"group {int(g)} has a degenerate score distribution; "
                f"only rates {curves[g].rates.tolist()} are achievable"
            )
    # sweep only rates both groups can hit exactly (in expectation); the
    # common span is never empty because rate 1 is achievable at threshold 0
    lo = max(curves[g].rates[0] for g in gvals)
    hi = min(curves[g].rates[-1] for g in gvals)
    union = np.unique(np.concatenate([curves[g].rates for g in gvals]))
    candidates = np.unique(
        np.concatenate([union[(union >= lo) & (union <= hi)], [lo, hi]])
    )
    best = None
    for r in candidates:
        rules = {}
        for g in gvals:
            rule, _ = curves[g].rule_for_rate(float(r))
            rules[g] = rule
        acc = _expected_accuracy(rules, scores, groups, y)
        key = (-acc, r)
        if best is None or key < best[0]:
            best = (key, rules, acc)
    return best[1], best[2], warnings


def fit_threshold_dp(scores, groups, y) -> ThresholdPolicy:
    """Common positive-decision rate across groups, accuracy-maximizing."""
    groups = np.asarray(groups, dtype=float)
    base_masks = {g: np.ones(len(groups), dtype=bool) for g in (0.0, 1.0)}
    rules, acc, warnings = _sweep_common_rate(scores, groups, y, base_masks)
    return ThresholdPolicy(
        objective="dp", rules=rules, utility=acc, warnings=warnings
    )


def fit_threshold_eopp(scores, groups, y) -> ThresholdPolicy:
    """Common true-positive rate across groups, accuracy-maximizing."""
    groups = np.asarray(groups, dtype=float)
    y = np.asarray(y, dtype=float)
    for g in (0.0, 1.0):
        if not ((groups == g) & (y == 1.0)).any():
            raise UndefinedMetricError(f"group {int(g)} has no actual positives")
    base_masks = {g: y == 1.0 for g in (0.0, 1.0)}
    rules, acc, warnings = _sweep_common_rate(scores, groups, y, base_masks)
    return ThresholdPolicy(
        objective="eopp", rules=rules, utility=acc, warnings=warnings
    )


def fit_threshold_cdp(scores, groups, strata, y) -> ThresholdPolicy:
    """Independent DP sweep within each stratum."""
    scores = np.asarray(scores, dtype=float)
    groups = np.asarray(groups, dtype=float)
    strata = np.asarray(strata, dtype=float)
    y = np.asarray(y, dtype=float)
    rules: dict = {}
    warnings: list[str] = []
    utilities = []
    for s in sorted(set(strata.tolist())):
        mask = strata == s
        if not ((groups == 1.0) & mask).any() or not ((groups == 0.0) & mask).any():
            warnings.append(f"stratum {s} lacks a group; skipped")
            continue
        sub = fit_threshold_dp(scores[mask], groups[mask], y[mask])
        for g, rule in sub.rules.items():
            rules[(g, s)] = rule
        utilities.append((int(mask.sum()), sub.utility))
        warnings.extend(f"stratum {s}: {w}" for w in sub.warnings)
    if not rules:
        raise UndefinedMetricError("no stratum has both groups present")
    total = sum(nrows for nrows, _ in utilities)
    utility = sum(nrows * u for nrows, u in utilities) / total
    return ThresholdPolicy(
        objective="cdp", rules=rules, conditional=True, utility=utility, warnings=warnings
    )


# -- equalized odds ---------------------------------------------------------------


class _RocHull:
    """Upper concave hull of a group's achievable (FPR, TPR) points."""

    def __init__(self, scores: np.ndarray, y: np.ndarray):
        pos = np.sort(scores[y == 1.0])
        neg = np.sort(scores[y == 0.0])
        if pos.size == 0 or neg.size == 0:
            raise UndefinedMetricError("equalized odds needs both labels per group")
        thresholds = np.unique(scores).tolist()
        if scores.max() < 1.0:
            thresholds.append(1.0)  # "predict none"
        pts = []
        for t in thresholds:
            tpr = (pos.size - np.searchsorted(pos, t, side="left")) / pos.size
            fpr = (neg.size - np.searchsorted(neg, t, side="left")) / neg.size
            pts.append((float(fpr), float(tpr), float(t)))
        pts.append((1.0, 1.0, 0.0))  # "predict all"
        self.vertices, lower = _hull_chains(pts)
        # every hull edge, for the interior-point fan solve: both chains plus
        # the vertical edges closing the polygon at each end
        self.edges = list(zip(self.vertices, self.vertices[1:])) + list(
            zip(lower, lower[1:])
        )
        for a, b in ((lower[0], self.vertices[0]), (self.vertices[-1], lower[-1])):
            if a[:2] != b[:2]:
                self.edges.append((a, b))

    @property
    def x_min(self) -> float:
        return self.vertices[0][0]

    def height(self, x: float) -> float:
        vs = self.vertices
        if x <= vs[0][0]:
            return vs[0][1]
        for (x1, y1, _), (x2, y2, _) in zip(vs, vs[1:]):
            if x1 <= x <= x2:
                if x2 == x1:
                    return max(y1, y2)
                w = (x - x1) / (x2 - x1)
                return y1 + w * (y2 - y1)
        return vs[-1][1]

    def rule_at(self, x: float, target_y: float) -> GroupRule:
        """Mixture of threshold classifiers hitting (x, target_y) exactly.

        On the boundary this is one vertex or an edge pair; strictly inside,
        mix an edge point with the all-positive corner (1, 1).
        """
        vs = self.vertices
        bx, by = x, self.height(x)
        if abs(by - target_y) <= _EPS:
            if x <= vs[0][0] + 1e-15:
                return GroupRule(((vs[0][2], 1.0),))
            for (x1, y1, t1), (x2, y2, t2) in zip(vs, vs[1:]):
                if x1 - 1e-15 <= x <= x2 + 1e-15:
                    if abs(x - x1) <= 1e-15:
                        return GroupRule(((t1, 1.0),))
                    if abs(x - x2) <= 1e-15:
                        return GroupRule(((t2, 1.0),))
                    w = (x - x1) / (x2 - x1)
                    return GroupRule(((t1, float(1.0 - w)), (t2, float(w))))
        # interior: fan from the all-positive corner e = (1, 1)
        ax, ay = x - 1.0, target_y - 1.0
        if abs(ax) <= 1e-15 and abs(ay) <= 1e-15:
            return GroupRule(((0.0, 1.0),))
        for (x1, y1, t1), (x2, y2, t2) in self.edges:
            dvx, dvy = x1 - x2, y1 - y2
            denom = ay * dvx - ax * dvy
            if abs(denom) < 1e-15:
                continue
            s = (ax * (y2 - 1.0) - ay * (x2 - 1.0)) / denom
            if not -1e-9 <= s <= 1.0 + 1e-9:
                continue
            cx1 = s * x1 + (1.0 - s) * x2 - 1.0
            cy1 = s * y1 + (1.0 - s) * y2 - 1.0
            if max(abs(cx1), abs(cy1)) < 1e-15:
                continue  # boundary point coincides with the corner
            q = ax / cx1 if abs(cx1) > abs(cy1) else ay / cy1
            if not -1e-9 <= q <= 1.0 + 1e-9:
                continue
            s = min(max(s, 0.0), 1.0)
            q = min(max(q, 0.0), 1.0)
            comps = [(t1, q * s), (t2, q * (1.0 - s)), (0.0, 1.0 - q)]
            comps = [(t, p) for t, p in comps if p > 1e-15]
            total = sum(p for _, p in comps)
            comps = [(t, p / total) for t, p in comps]
            return GroupRule(tuple(comps))
        raise UndefinedMetricError("no mixture reaches the target operating point")


def _chain(pts: list[tuple[float, float, float]], keep_upper: bool):
    hull: list[tuple[float, float, float]] = []
    sign = 1.0 if keep_upper else -1.0
    for p in pts:
        while len(hull) >= 2:
            (x1, y1, _), (x2, y2, _) = hull[-2], hull[-1]
            cross = (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1)
            if sign * cross >= 0.0:
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def _hull_chains(points: list[tuple[float, float, float]]):
    """(upper, lower) monotone-chain hulls over (x, y, threshold) triples."""
    pts = sorted(set(points), key=lambda p: (p[0], p[1]))
    top: dict[float, tuple[float, float, float]] = {}
    bot: dict[float, tuple[float, float, float]] = {}
    for p in pts:
        if p[0] not in top or p[1] > top[p[0]][1]:
            top[p[0]] = p
        if p[0] not in bot or p[1] < bot[p[0]][1]:
            bot[p[0]] = p
    upper = _chain([top[x] for x in sorted(top)], keep_upper=True)
    lower = _chain([bot[x] for x in sorted(bot)], keep_upper=False)
    return upper, lower


def fit_threshold_eo(scores, groups, y) -> ThresholdPolicy:
    """Common (FPR, TPR) point across groups via randomized thresholds.

    The target is the accuracy-optimal point of the intersection of the
    groups' achievable regions; each group expresses it as a mixture of at
    most three threshold classifiers.
    """
    scores = np.asarray(scores, dtype=float)
    groups = np.asarray(groups, dtype=float)
    y = np.asarray(y, dtype=float)
    hulls = {}
    for g in (0.0, 1.0):
        mask = groups == g
        if not mask.any():
            raise UndefinedMetricError("both groups must be present")
        hulls[g] = _RocHull(scores[mask], y[mask])

    p_pos = float((y == 1.0).mean())
    x_lo = max(h.x_min for h in hulls.values())
    xs = {x_lo, 1.0}
    for h in hulls.values():
        xs.update(v[0] for v in h.vertices if v[0] >= x_lo - 1e-15)
    xs.update(_boundary_crossings(hulls[0.0], hulls[1.0], x_lo))
    best = None
    for x in sorted(xs):
        yx = min(h.height(x) for h in hulls.values())
        acc = p_pos * yx + (1.0 - p_pos) * (1.0 - x)
        key = (-acc, x)
        if best is None or key < best[0]:
            best = (key, float(x), float(yx))
    _, x_star, y_star = best

    rules = {}
    infeasible = False
    warnings: list[str] = []
    for g in (0.0, 1.0):
        try:
            rules[g] = hulls[g].rule_at(x_star, y_star)
        except UndefinedMetricError as exc:
            # nearest-point fallback: stay on this group's own boundary
            warnings.append(f"group {int(g)}: {exc}; using nearest boundary point")
            rules[g] = hulls[g].rule_at(x_star, hulls[g].height(x_star))
            infeasible = True
    acc = _expected_accuracy(rules, scores, groups, y)
    return ThresholdPolicy(
        objective="eo", rules=rules, utility=acc, infeasible=infeasible, warnings=warnings
    )


def _boundary_crossings(h0: _RocHull, h1: _RocHull, x_lo: float) -> list[float]:
    """x positions where the two upper boundaries cross."""
    xs = sorted({v[0] for v in h0.vertices} | {v[0] for v in h1.vertices} | {x_lo, 1.0})
    xs = [x for x in xs if x >= x_lo - 1e-15]
    out = []
    for a, b in zip(xs, xs[1:]):
        fa = h0.height(a) - h1.height(a)
        fb = h0.height(b) - h1.height(b)
        if fa == 0.0:
            out.append(a)
        if fa * fb < 0.0:
            # linear on [a, b] for both hulls, so the crossing is exact
            out.append(a + (b - a) * fa / (fa - fb))
    return out


# -- application -------------------------------------------------------------------


def expected_positive_probability(
    policy: ThresholdPolicy, scores, groups, strata=None
) -> np.ndarray:
    """Per-row probability of a positive decision, computed exactly."""
    if policy.conditional and strata is None:
        raise SchemaError("conditional policy needs strata at apply time")
    return positive_probability_arrays(
        policy.rules, scores, groups, strata if policy.conditional else None
    )


def apply_policy(
    policy: ThresholdPolicy, scores, groups, strata=None, seed: int | None = None
) -> np.ndarray:
    """Hard decisions; randomized components drawn with the given seed."""
    scores = np.asarray(scores, dtype=float)
    groups = np.asarray(groups, dtype=float)
    if policy.conditional and strata is None:
        raise SchemaError("conditional policy needs strata at apply time")
    strata_arr = np.asarray(strata, dtype=float) if policy.conditional else None
    keys = (
        list(zip(groups, strata_arr)) if policy.conditional else [(g,) for g in groups]
    )
    rng = np.random.default_rng(seed)
    u = rng.random(scores.shape[0])
    labels = np.empty(scores.shape[0])
    labels.fill(np.nan)
    rule_of = policy.rules
    for i, key in enumerate(keys):
        k = key if policy.conditional else key[0]
        if k not in rule_of:
            raise SchemaError(f"policy has no rule for {k!r}")
        rule = rule_of[k]
        acc = 0.0
        chosen = rule.components[-1][0]
        for t, p in rule.components:
            acc += p
            if u[i] < acc:
                chosen = t
                break
        labels[i] = 1.0 if scores[i] >= chosen else 0.0
    return labels
