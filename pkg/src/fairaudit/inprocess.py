"""In-processing mitigation: adversarial debiasing and the reductions
approach (exponentiated gradient and grid search over signed duals).

Adversarial debiasing trains the network predictor against a logistic
adversary that tries to recover the protected attribute from the predictor
logit (plus the true label for the equalized-odds variant). The predictor
update removes the component of its gradient aligned with the adversary's
gradient and additionally subtracts alpha times that gradient. The
conditional variant trains one predictor/adversary pair per stratum and
routes rows by stratum at prediction time.

Reductions reformulate fair classification as cost-sensitive problems: the
per-row cost of deciding positive combines classification error with the
current dual prices on the demographic-parity constraint; signed costs
translate to weighted binary labels for the base learner.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import compare
from .dataset import DataTable, stratified_split
from .errors import ConfigError, TrainingDivergedError
from .learners import Classifier, LearnerConfig, fit, predict_scores
from .learners.base import sigmoid, training_arrays, weighted_standardizer
from .learners.mlp import MLPModel, Workspace, init_params, train_loop
from .metrics import demographic_parity


# -- adversarial debiasing --------------------------------------------------------


@dataclass(frozen=True)
class AdversarialConfig:
    constraint: str = "dp"  # dp | eo | cdp
    alpha: float = 1.0
    epochs: int = 600
    lr_predictor: float = 0.01
    lr_adversary: float = 0.1
    hidden: int = 32
    l2: float = 1e-4
    seed: int = 0

    def validate(self) -> "AdversarialConfig":
        if self.constraint not in ("dp", "eo", "cdp"):
            raise ConfigError(f"unknown adversarial constraint {self.constraint!r}")
        if self.alpha < 0:
            raise ConfigError("alpha must be non-negative")
        return self

    def to_dict(self) -> dict:
        return {
            "constraint": self.constraint,
            "alpha": self.alpha,
            "epochs": self.epochs,
            "lr_predictor": self.lr_predictor,
            "lr_adversary": self.lr_adversary,
            "hidden": self.hidden,
            "l2": self.l2,
            "seed": self.seed,
        }


def _adversary_inputs(z: np.ndarray, y: np.ndarray, constraint: str) -> np.ndarray:
    if constraint == "eo":
        return np.column_stack([z, y])
    return z[:, None]


def _adversarial_train(
    Xs: np.ndarray,
    y: np.ndarray,
    a: np.ndarray,
    w: np.ndarray,
    config: AdversarialConfig,
    rng: np.random.Generator,
) -> np.ndarray:
    """One predictor/adversary pair; returns the predictor parameter vector."""
    params = init_params(Xs.shape[1], config.hidden, rng)
    work = Workspace(Xs, config.hidden)
    wsum = w.sum()
    n_adv = 2 if config.constraint == "eo" else 1
    v = np.zeros(n_adv)  # adversary weights on its inputs
    v0 = 0.0
    for epoch in range(config.epochs):
        z, p = work.forward(params)
        loss = work.loss(y, w, params, config.l2)
        if not np.isfinite(loss):
            raise TrainingDivergedError(epoch)

        u = _adversary_inputs(z, y, config.constraint)
        a_hat = sigmoid(u @ v + v0)
        resid = w * (a_hat - a) / wsum
        adv_loss = float((w * (np.logaddexp(0.0, u @ v + v0) - a * (u @ v + v0))).sum() / wsum)
        if not np.isfinite(adv_loss):
            raise TrainingDivergedError(epoch, "adversary loss became non-finite")

        # predictor gradient on its own objective
        dz_pred = w * (p - y) / wsum
        g_pred = work.grad_from_dz(params, dz_pred, config.l2)
        # adversary gradient routed through the predictor logit
        dz_adv = resid * v[0]
        g_adv = work.grad_from_dz(params, dz_adv, 0.0)

        norm = float(np.linalg.norm(g_adv))
        if norm > 1e-12:
            unit = g_adv / norm
            update = g_pred - (g_pred @ unit) * unit - config.alpha * g_adv
        else:
            update = g_pred
        params = params - config.lr_predictor * update

        # adversary step on its own parameters
        gv = u.T @ resid
        gv0 = resid.sum()
        v = v - config.lr_adversary * gv
        v0 = v0 - config.lr_adversary * gv0
    return params


class StratifiedClassifier(Classifier):
    """Routes each row to a per-stratum predictor by the stratum column."""

    kind = "mlp_per_stratum"

    def __init__(self, feature_names, config, submodels: dict, stratum_index: int):
        super().__init__(feature_names, config)
        self.submodels = submodels
        self.stratum_index = stratum_index

    def score_matrix(self, X: np.ndarray) -> np.ndarray:
        out = np.empty(X.shape[0])
        out.fill(np.nan)
        strata = X[:, self.stratum_index]
        for s, model in self.submodels.items():
            mask = strata == s
            if mask.any():
                out[mask] = model.score_matrix(X[mask])
        if np.isnan(out).any():
            unseen = sorted(set(strata[np.isnan(out)].tolist()))
            raise ConfigError(f"rows with strata {unseen} were not seen at fit time")
        return out

    def params_dict(self) -> dict:
        return {
            "stratum_index": self.stratum_index,
            "submodels": {str(s): m.params_dict() for s, m in self.submodels.items()},
        }


def adversarial_fit(table: DataTable, config: AdversarialConfig) -> Classifier:
    """Adversarially debiased network predictor.

    With alpha = 0 the adversary term vanishes and this is exactly the plain
    network fit (same seed gives identical parameters).
    """
    config.validate()
    X, y, w, names = training_arrays(table, None)
    a = table.groups()
    learner_cfg = LearnerConfig(
        seed=config.seed,
        lr=config.lr_predictor,
        epochs=config.epochs,
        l2=config.l2,
        hidden=config.hidden,
    )
    mu, sigma = weighted_standardizer(X, w)
    Xs = (X - mu) / sigma

    if config.constraint == "cdp":
        strata = table.strata()
        stratum_index = names.index(
            table.encoded[table.source_indices(table.stratum_name)[0]].name
        )
        seeds = np.random.SeedSequence(config.seed).spawn(len(set(strata.tolist())))
        submodels = {}
        for s, seq in zip(sorted(set(strata.tolist())), seeds):
            mask = strata == s
            sub_cfg = replace(config, constraint="dp")
            rng = np.random.default_rng(seq)
            if config.alpha == 0.0:
                params = train_loop(
                    Xs[mask], y[mask], w[mask], config.hidden, config.l2,
                    config.lr_predictor, config.epochs, 1e-12, rng,
                )
            else:
                params = _adversarial_train(Xs[mask], y[mask], a[mask], w[mask], sub_cfg, rng)
            submodels[float(s)] = MLPModel(names, learner_cfg, params, mu, sigma, config.hidden)
        return StratifiedClassifier(names, learner_cfg, submodels, stratum_index)

    rng = np.random.default_rng(config.seed)
    if config.alpha == 0.0:
        params = train_loop(
            Xs, y, w, config.hidden, config.l2, config.lr_predictor, config.epochs,
            1e-12, rng,
        )
    else:
        params = _adversarial_train(Xs, y, a, w, config, rng)
    return MLPModel(names, learner_cfg, params, mu, sigma, config.hidden)


# -- reductions -------------------------------------------------------------------


@dataclass(frozen=True)
class ReductionsConfig:
    mode: str = "exponentiated_gradient"  # or grid_search
    eps: float = 0.01
    grid_size: int = 50
    grid_span: float = 2.0
    base_kind: str = "logistic"
    max_iter: int = 50
    eta: float = 1.0
    dual_cap: float = 2.0
    gap_tol: float = 1e-3
    seed: int = 0
    base_config: LearnerConfig = field(
        default_factory=lambda: LearnerConfig(lr=0.5, epochs=1500, tol=1e-9)
    )

    def validate(self) -> "ReductionsConfig":
        if self.mode not in ("exponentiated_gradient", "grid_search"):
            raise ConfigError(f"unknown reductions mode {self.mode!r}")
        if self.eps <= 0:
            raise ConfigError("eps must be positive")
        if self.grid_size < 1:
            raise ConfigError("grid_size must be at least 1")
        if self.max_iter < 1:
            raise ConfigError("max_iter must be at least 1")
        return self

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "eps": self.eps,
            "grid_size": self.grid_size,
            "grid_span": self.grid_span,
            "base_kind": self.base_kind,
            "max_iter": self.max_iter,
            "eta": self.eta,
            "dual_cap": self.dual_cap,
            "gap_tol": self.gap_tol,
            "seed": self.seed,
        }


class ConstantModel(Classifier):
    kind = "constant"

    def __init__(self, feature_names, value: float):
        super().__init__(feature_names, LearnerConfig())
        self.value = float(value)

    def score_matrix(self, X: np.ndarray) -> np.ndarray:
        return np.full(X.shape[0], self.value)

    def params_dict(self) -> dict:
        return {"value": self.value}


@dataclass
class RandomizedClassifier:
    """Distribution over classifiers; metrics use expectation semantics."""

    components: list[tuple[Classifier, float]]
    infeasible: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        total = sum(p for _, p in self.components)
        if abs(total - 1.0) > 1e-9:
            raise ConfigError(f"component probabilities sum to {total}")

    def expected_scores(self, table: DataTable) -> np.ndarray:
        out = np.zeros(table.n)
        for clf, p in self.components:
            out += p * predict_scores(clf, table)
        return out

    def positive_probability(self, table: DataTable, threshold: float = 0.5) -> np.ndarray:
        """Per-row probability of a positive decision at the given threshold."""
        out = np.zeros(table.n)
        for clf, p in self.components:
            out += p * (predict_scores(clf, table) >= threshold)
        return out

    def sample_labels(self, table: DataTable, threshold: float = 0.5, seed: int = 0):
        rng = np.random.default_rng(seed)
        u = rng.random(table.n)
        cum = 0.0
        labels = np.zeros(table.n)
        chosen = np.full(table.n, -1)
        for k, (clf, p) in enumerate(self.components):
            take = (u >= cum) & (u < cum + p) & (chosen < 0)
            chosen[take] = k
            cum += p
        chosen[chosen < 0] = len(self.components) - 1
        for k, (clf, _) in enumerate(self.components):
            mask = chosen == k
            if mask.any():
                labels[mask] = (
                    predict_scores(clf, table.subset(np.flatnonzero(mask))) >= threshold
                )
        return labels


def _dp_cost_vector(y, a, n, n_priv, n_unpriv, mu):
    """Per-row cost of deciding positive: error term plus dual prices.

    mu is the net dual on (rate_g - rate_overall) per group, packed as
    (mu_unpriv, mu_priv).
    """
    cost = (1.0 - 2.0 * y) / n
    cost = cost + mu[1] * ((a == 1.0) / n_priv - 1.0 / n)
    cost = cost + mu[0] * ((a == 0.0) / n_unpriv - 1.0 / n)
    return cost


def _best_response(table, cost, base_kind, base_config) -> Classifier:
    labels = (cost < 0.0).astype(float)
    weights = np.abs(cost) * table.n
    if labels.min() == labels.max():
        return ConstantModel(table.model_input_names(), labels[0])
    relabeled = table.replace_column(table.target_name, labels)
    return fit(base_kind, relabeled, weights=weights, config=base_config)


def _violations(rates: np.ndarray, overall: float, eps: float) -> np.ndarray:
    """Constraint slack order: (unpriv+, unpriv-, priv+, priv-)."""
    g = np.array([rates[0] - overall, rates[1] - overall])
    return np.array([g[0] - eps, -g[0] - eps, g[1] - eps, -g[1] - eps])


def reductions_eg(table: DataTable, config: ReductionsConfig) -> RandomizedClassifier:
    """Exponentiated-gradient saddle-point loop for the DP constraint.

    Multiplicative-weights updates on the four dual variables (both signs,
    both groups); each iteration fits the base learner on dual-priced costs;
    the averaged play over iterations is returned as a distribution.
    """
    config.validate()
    y = table.y()
    a = table.groups()
    n = table.n
    n_priv = float((a == 1.0).sum())
    n_unpriv = float((a == 0.0).sum())
    B = config.dual_cap

    theta = np.zeros(4)
    plays: list[Classifier] = []
    play_rates: list[np.ndarray] = []  # per-play (unpriv rate, priv rate)
    play_errs: list[float] = []
    lambda_sum = np.zeros(4)
    lambda_lo, lambda_hi = np.inf, -np.inf

    def group_rates(labels: np.ndarray) -> np.ndarray:
        return np.array(
            [float(labels[a == 0.0].mean()), float(labels[a == 1.0].mean())]
        )

    infeasible = False
    for it in range(1, config.max_iter + 1):
        expo = np.exp(theta - theta.max())
        lam = B * expo / (np.exp(-theta.max()) + expo.sum())
        lambda_sum += lam
        lambda_lo = min(lambda_lo, float(lam.min()))
        lambda_hi = max(lambda_hi, float(lam.max()))
        mu = (lam[0] - lam[1], lam[2] - lam[3])  # net dual per group
        cost = _dp_cost_vector(y, a, n, n_priv, n_unpriv, mu)
        h = _best_response(table, cost, config.base_kind, config.base_config)
        labels = (predict_scores(h, table) >= 0.5).astype(float)
        plays.append(h)
        play_rates.append(group_rates(labels))
        play_errs.append(float((labels != y).mean()))

        # averaged play
        q_rates = np.mean(play_rates, axis=0)
        q_overall = (q_rates[0] * n_unpriv + q_rates[1] * n_priv) / n
        q_viol = _violations(q_rates, q_overall, config.eps)
        q_err = float(np.mean(play_errs))

        if it == 1 and q_viol.max() <= 0.0:
            # plain fit already satisfies the constraint: zero duals certify it
            return RandomizedClassifier(
                components=[(h, 1.0)], meta={"iterations": 1, "gap": 0.0}
            )

        # duality gap: max over lambda of L(Q, lambda) minus best response at
        # the averaged duals
        lam_bar = lambda_sum / it
        mu_bar = (lam_bar[0] - lam_bar[1], lam_bar[2] - lam_bar[3])
        cost_bar = _dp_cost_vector(y, a, n, n_priv, n_unpriv, mu_bar)
        h_star = _best_response(table, cost_bar, config.base_kind, config.base_config)
        labels_star = (predict_scores(h_star, table) >= 0.5).astype(float)
        rates_star = group_rates(labels_star)
        overall_star = (rates_star[0] * n_unpriv + rates_star[1] * n_priv) / n
        viol_star = _violations(rates_star, overall_star, config.eps)
        err_star = float((labels_star != y).mean())
        L_max = q_err + B * max(0.0, float(q_viol.max()))
        L_q_bar = q_err + float(lam_bar @ q_viol)
        L_min = err_star + float(lam_bar @ viol_star)
        gap = max(L_max - L_q_bar, L_q_bar - L_min)
        if gap <= config.gap_tol:
            break

        eta_t = config.eta / np.sqrt(it)
        viol_t = _violations(play_rates[-1], (play_rates[-1][0] * n_unpriv
                                              + play_rates[-1][1] * n_priv) / n, config.eps)
        theta = theta + eta_t * viol_t
    else:
        infeasible = bool(q_viol.max() > 0.0)

    weight = 1.0 / len(plays)
    return RandomizedClassifier(
        components=[(h, weight) for h in plays],
        infeasible=infeasible,
        meta={
            "iterations": len(plays),
            "gap": float(gap),
            "dual_cap": B,
            "lambda_min": lambda_lo,
            "lambda_max": lambda_hi,
        },
    )


@dataclass
class GridResult:
    model: Classifier
    models_trained: int
    duals: list[float]
    chosen_dual: float
    entries: list[compare.ModelEntry]
    models: list[Classifier] = field(default_factory=list)


def reductions_grid(
    table: DataTable,
    config: ReductionsConfig,
    selector: compare.SelectorConfig | None = None,
    val_fraction: float = 0.25,
    val_seed: int = 101,
) -> GridResult:
    """Sweep signed duals, fit one cost-reweighted model per grid point, and
    return the model the comparison selector picks on a validation split."""
    config.validate()
    selector = selector or compare.SelectorConfig(
        phi_metric="dp", pi_metric="accuracy", beta=1.0, mode="tradeoff"
    )
    if config.grid_size == 1:
        duals = [0.0]
    else:
        duals = np.linspace(-config.grid_span, config.grid_span, config.grid_size).tolist()

    split = stratified_split(table, 1.0 - val_fraction, seed=val_seed)
    sub, val = split.train, split.test
    y = sub.y()
    a = sub.groups()
    n = sub.n
    n_priv = float((a == 1.0).sum())
    n_unpriv = float((a == 0.0).sum())

    models: list[Classifier] = []
    entries: list[compare.ModelEntry] = []
    val_groups = val.groups()
    val_y = val.y()
    for k, lam in enumerate(duals):
        # net duals (-lam, +lam) price the single signed constraint
        # rate(priv) - rate(unpriv); positive lam raises the unprivileged rate
        cost = _dp_cost_vector(y, a, n, n_priv, n_unpriv, (-lam, lam))
        model = _best_response(sub, cost, config.base_kind, config.base_config)
        models.append(model)
        labels = (predict_scores(model, val) >= 0.5).astype(float)
        dp = demographic_parity(labels, val_groups)
        acc = float((labels == val_y).mean())
        entries.append(
            compare.ModelEntry(
                strategy_id=f"grid_{k:03d}",
                family="in",
                fairness={"dp": dp},
                performance={"accuracy": acc},
                fingerprint="grid",
            )
        )
    ranked = compare.rank(entries, selector)
    if selector.mode == "constrained":
        sel = compare.constrained_best(entries, selector)
        best_id = (sel.winner or sel.suggestion).strategy_id
    else:
        best_id = ranked[0].strategy_id
    idx = int(best_id.split("_")[1])
    return GridResult(
        model=models[idx],
        models_trained=len(models),
        duals=duals,
        chosen_dual=duals[idx],
        entries=entries,
        models=models,
    )
