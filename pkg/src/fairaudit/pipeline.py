"""Experiment runner and persistence.

A pipeline run loads or generates a dataset, splits it (test held out, a
validation slice carved from the training side for threshold policies and
grid selection), trains the three unmitigated baselines plus every
configured mitigation strategy, evaluates all of them on the same test
split, and persists the result as one versioned JSON document.

Strategy failures are isolated: a diverging run is recorded on the
experiment without voiding the other entries.
"""

from __future__ import annotations

import datetime
import hashlib
import json
import os
from dataclasses import dataclass, field

from . import __version__
from .causal import CausalGraph, fit_cff
from .compare import ModelEntry, SelectorConfig
from .dataset import ColumnSpec, DataTable, load_table, stratified_split
from .errors import ConfigError, FairauditError
from .inprocess import (
    AdversarialConfig,
    ReductionsConfig,
    adversarial_fit,
    reductions_eg,
    reductions_grid,
)
from .errors import UndefinedMetricError
from .jsonio import atomic_write, canonical_json, round_floats
from .learners import LearnerConfig, fit, predict_scores
from .metrics import fairness_report, performance
from .postprocess import (
    expected_positive_probability,
    fit_threshold_cdp,
    fit_threshold_dp,
    fit_threshold_eo,
    fit_threshold_eopp,
)
from .preprocess import ftu, massage, resample, suppress
from .synthgen import GenConfig, bias_profile, generate

BASELINES = (("logistic", "logistic"), ("random_forest", "forest"), ("neural_net", "mlp"))

DEFAULT_STRATEGIES = (
    {"family": "pre", "method": "ftu"},
    {"family": "pre", "method": "suppression"},
    {"family": "pre", "method": "massaging"},
    {"family": "pre", "method": "sampling"},
    {"family": "causal", "method": "cff"},
    {"family": "in", "method": "adv_dp"},
    {"family": "in", "method": "adv_eo"},
    {"family": "in", "method": "adv_cdp"},
    {"family": "in", "method": "reductions_gs"},
    {"family": "in", "method": "reductions_eg"},
    {"family": "post", "method": "thresh_dp"},
    {"family": "post", "method": "thresh_eo"},
    {"family": "post", "method": "thresh_eopp"},
    {"family": "post", "method": "thresh_cdp"},
)

_KNOWN_METHODS = {
    "pre": {"ftu", "suppression", "massaging", "sampling"},
    "in": {"adv_dp", "adv_eo", "adv_cdp", "reductions_gs", "reductions_eg"},
    "post": {"thresh_dp", "thresh_eo", "thresh_eopp", "thresh_cdp"},
    "causal": {"cff"},
}


@dataclass(frozen=True)
class StrategySpec:
    family: str
    method: str
    params: dict = field(default_factory=dict)

    def validate(self) -> "StrategySpec":
        if self.family not in _KNOWN_METHODS:
            raise ConfigError(f"unknown strategy family {self.family!r}")
        if self.method not in _KNOWN_METHODS[self.family]:
            raise ConfigError(
                f"unknown method {self.method!r} for family {self.family!r}"
            )
        return self

    def to_dict(self) -> dict:
        return {"family": self.family, "method": self.method, "params": self.params}


@dataclass
class PipelineConfig:
    dataset: dict
    split_fraction: float = 0.8
    split_seed: int = 7
    val_fraction: float = 0.25
    val_seed: int = 11
    strategies: list[StrategySpec] = field(default_factory=list)
    selector: SelectorConfig = field(default_factory=SelectorConfig)
    learner_defaults: dict = field(default_factory=dict)
    graph: dict | None = None

    @staticmethod
    def from_dict(doc: dict) -> "PipelineConfig":
        if not isinstance(doc, dict):
            raise ConfigError("pipeline config must be a mapping")
        if "dataset" not in doc:
            raise ConfigError("pipeline config needs a 'dataset' section")
        dataset = doc["dataset"]
        if not isinstance(dataset, dict) or not ({"generator", "file"} & dataset.keys()):
            raise ConfigError("dataset section needs 'generator' or 'file'")
        split = doc.get("split", {})
        val = doc.get("validation", {})
        raw = doc.get("strategies")
        if raw is None:
            raw = [dict(s) for s in DEFAULT_STRATEGIES]
        strategies = [
            StrategySpec(
                family=s.get("family", ""),
                method=s.get("method", ""),
                params=s.get("params", {}) or {},
            ).validate()
            for s in raw
        ]
        sel = doc.get("selector", {})
        selector = SelectorConfig(
            phi_metric=sel.get("phi", "dp"),
            pi_metric=sel.get("pi", "f1"),
            beta=float(sel.get("beta", 1.0)),
            Phi=float(sel.get("Phi", 0.05)),
            mode=sel.get("mode", "tradeoff"),
        ).validate()
        config = PipelineConfig(
            dataset=dataset,
            split_fraction=float(split.get("fraction", 0.8)),
            split_seed=int(split.get("seed", 7)),
            val_fraction=float(val.get("fraction", 0.25)),
            val_seed=int(val.get("seed", 11)),
            strategies=strategies,
            selector=selector,
            learner_defaults=doc.get("learner", {}) or {},
            graph=doc.get("graph"),
        )
        if not 0.0 < config.split_fraction < 1.0:
            raise ConfigError("split fraction must be in (0,1)")
        if not 0.0 < config.val_fraction < 1.0:
            raise ConfigError("validation fraction must be in (0,1)")
        return config

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "split": {"fraction": self.split_fraction, "seed": self.split_seed},
            "validation": {"fraction": self.val_fraction, "seed": self.val_seed},
            "strategies": [s.to_dict() for s in self.strategies],
            "selector": {
                "phi": self.selector.phi_metric,
                "pi": self.selector.pi_metric,
                "beta": self.selector.beta,
                "Phi": self.selector.Phi,
                "mode": self.selector.mode,
            },
            "learner": self.learner_defaults,
            "graph": self.graph,
        }


def _load_dataset(config: PipelineConfig) -> tuple[DataTable, CausalGraph | None]:
    ds = config.dataset
    if "generator" in ds:
        gen = GenConfig(**ds["generator"]) if ds["generator"] else GenConfig()
        table, graph = generate(gen)
    else:
        schema_doc = ds.get("schema")
        if not schema_doc:
            raise ConfigError("file datasets need a 'schema' list")
        schema = [
            ColumnSpec(
                name=c["name"],
                kind=c["kind"],
                role=c.get("role", "feature"),
                positive=c.get("positive"),
                negative=c.get("negative"),
            )
            for c in schema_doc
        ]
        table = load_table(ds["file"], schema, delimiter=ds.get("delimiter", ","))
        graph = None
    if config.graph is not None:
        graph = CausalGraph.from_dict(config.graph)
    return table, graph


@dataclass
class Experiment:
    id: str
    fingerprint: str
    config: dict
    bias: dict
    entries: list[ModelEntry]
    failures: list[dict]
    created_at: str
    version: str = __version__

    def to_dict(self) -> dict:
        doc = {
            "id": self.id,
            "fingerprint": self.fingerprint,
            "config": self.config,
            "bias": self.bias,
            "entries": [
                {
                    "strategy_id": e.strategy_id,
                    "family": e.family,
                    "fairness": e.fairness,
                    "performance": e.performance,
                }
                for e in self.entries
            ],
            "failures": self.failures,
            "created_at": self.created_at,
            "version": self.version,
        }
        return round_floats(doc)

    @staticmethod
    def from_dict(doc: dict) -> "Experiment":
        entries = [
            ModelEntry(
                strategy_id=e["strategy_id"],
                family=e["family"],
                fairness=e["fairness"],
                performance=e["performance"],
                fingerprint=doc["fingerprint"],
            )
            for e in doc["entries"]
        ]
        return Experiment(
            id=doc["id"],
            fingerprint=doc["fingerprint"],
            config=doc["config"],
            bias=doc.get("bias", {}),
            entries=entries,
            failures=doc.get("failures", []),
            created_at=doc.get("created_at", ""),
            version=doc.get("version", ""),
        )


def _evaluate_deterministic(model, test: DataTable, fingerprint, sid, family) -> ModelEntry:
    scores = predict_scores(model, test)
    labels = (scores >= 0.5).astype(float)
    return _entry_from_predictions(test, labels, scores, fingerprint, sid, family)


def _evaluate_probabilistic(probs, test: DataTable, fingerprint, sid, family) -> ModelEntry:
    return _entry_from_predictions(test, probs, None, fingerprint, sid, family)


def _entry_from_predictions(test, preds, scores, fingerprint, sid, family) -> ModelEntry:
    strata = test.strata() if test.stratum_name else None
    fair = fairness_report(preds, test.groups(), test.y(), strata=strata)
    try:
        perf = performance(test.y(), scores=scores, labels=None if scores is not None else preds)
    except UndefinedMetricError:
        perf = None
    fairness = {
        "dp": fair.dp,
        "eo": fair.eo.scalar,
        "eo_tpr_diff": fair.eo.tpr_diff,
        "eo_fpr_diff": fair.eo.fpr_diff,
        "eopp": fair.eopp,
        "pp": fair.pp,
        "di_ratio": fair.di_ratio,
        "cdp": fair.cdp.weighted_mean_abs if fair.cdp else None,
        "cdp_max": fair.cdp.max_abs if fair.cdp else None,
    }
    performance_doc = {
        "accuracy": perf.accuracy if perf else None,
        "precision": perf.precision if perf else None,
        "recall": perf.recall if perf else None,
        "f1": perf.f1 if perf else None,
        "auroc": perf.auroc if perf else None,
    }
    return ModelEntry(
        strategy_id=sid,
        family=family,
        fairness=fairness,
        performance=performance_doc,
        fingerprint=fingerprint,
    )


def run_pipeline(config: PipelineConfig, store: "ExperimentStore | None" = None) -> Experiment:
    table, graph = _load_dataset(config)
    fingerprint = table.fingerprint()
    split = stratified_split(table, config.split_fraction, config.split_seed)
    inner = stratified_split(split.train, 1.0 - config.val_fraction, config.val_seed)
    fit_train, val, test = inner.train, inner.test, split.test

    learner_cfg = LearnerConfig(**config.learner_defaults) if config.learner_defaults else LearnerConfig()
    eval_print = f"{fingerprint[:16]}:{config.split_seed}:{config.split_fraction}"

    entries: list[ModelEntry] = []
    failures: list[dict] = []
    baselines = {}
    for sid, kind in BASELINES:
        model = fit(kind, fit_train, config=learner_cfg)
        baselines[sid] = model
        entries.append(
            _evaluate_deterministic(model, test, eval_print, sid, "no-mitigation")
        )

    val_scores = predict_scores(baselines["random_forest"], val)
    val_groups, val_y = val.groups(), val.y()
    val_strata = val.strata() if val.stratum_name else None
    test_scores_rf = predict_scores(baselines["random_forest"], test)

    for spec in config.strategies:
        sid = spec.method
        try:
            entry = _run_strategy(
                spec, sid, fit_train, val, test, graph, learner_cfg, eval_print,
                val_scores, val_groups, val_y, val_strata, test_scores_rf,
            )
            entries.append(entry)
        except FairauditError as exc:
            failures.append({"strategy_id": sid, "error": f"{type(exc).__name__}: {exc}"})

    bias = bias_profile(table).to_dict()
    config_doc = config.to_dict()
    exp_id = hashlib.sha256(
        (canonical_json(config_doc) + fingerprint).encode()
    ).hexdigest()[:16]
    experiment = Experiment(
        id=exp_id,
        fingerprint=fingerprint,
        config=config_doc,
        bias=bias,
        entries=entries,
        failures=failures,
        created_at=datetime.datetime.now(datetime.timezone.utc).isoformat(),
    )
    if store is not None:
        store.save(experiment)
    return experiment


def _run_strategy(
    spec, sid, fit_train, val, test, graph, learner_cfg, eval_print,
    val_scores, val_groups, val_y, val_strata, test_scores_rf,
):
    params = dict(spec.params)
    if spec.family == "pre":
        seed = int(params.pop("seed", 0))
        if spec.method == "ftu":
            table2, _ = ftu(fit_train)
        elif spec.method == "suppression":
            table2, _ = suppress(fit_train, threshold=float(params.pop("threshold", 0.15)))
        elif spec.method == "massaging":
            table2, _ = massage(fit_train, config=learner_cfg)
        else:
            table2, _ = resample(fit_train, seed=seed)
        downstream = fit(params.pop("downstream", "forest"), table2, config=learner_cfg)
        return _evaluate_deterministic(downstream, test, eval_print, sid, "pre")

    if spec.family == "causal":
        if graph is None:
            raise ConfigError("cff needs a causal graph (generator default or config)")
        cff = fit_cff(fit_train, graph, kind=params.pop("kind", "forest"), config=learner_cfg)
        scores = cff.predict_scores(test)
        labels = (scores >= 0.5).astype(float)
        return _entry_from_predictions(test, labels, scores, eval_print, sid, "causal")

    if spec.family == "in":
        if spec.method.startswith("adv_"):
            constraint = spec.method.split("_", 1)[1]
            cfg = AdversarialConfig(constraint=constraint, **params)
            model = adversarial_fit(fit_train, cfg)
            return _evaluate_deterministic(model, test, eval_print, sid, "in")
        if spec.method == "reductions_eg":
            cfg = ReductionsConfig(mode="exponentiated_gradient", **params)
            rc = reductions_eg(fit_train, cfg)
            probs = rc.positive_probability(test)
            return _evaluate_probabilistic(probs, test, eval_print, sid, "in")
        cfg = ReductionsConfig(mode="grid_search", **params)
        result = reductions_grid(fit_train, cfg)
        return _evaluate_deterministic(result.model, test, eval_print, sid, "in")

    # post-processing over the unmitigated random-forest scorer
    if spec.method == "thresh_dp":
        policy = fit_threshold_dp(val_scores, val_groups, val_y)
    elif spec.method == "thresh_eopp":
        policy = fit_threshold_eopp(val_scores, val_groups, val_y)
    elif spec.method == "thresh_eo":
        policy = fit_threshold_eo(val_scores, val_groups, val_y)
    else:
        if val_strata is None:
            raise ConfigError("thresh_cdp needs a stratum column")
        policy = fit_threshold_cdp(val_scores, val_groups, val_strata, val_y)
    strata = test.strata() if policy.conditional else None
    probs = expected_positive_probability(policy, test_scores_rf, test.groups(), strata)
    return _evaluate_probabilistic(probs, test, eval_print, sid, "post")


class ExperimentStore:
    """Directory of experiment JSON documents, written atomically."""

    def __init__(self, root):
        self.root = os.fspath(root)
        os.makedirs(self.root, exist_ok=True)

    def _path(self, exp_id: str) -> str:
        if not exp_id.replace("-", "").replace("_", "").isalnum():
            raise ConfigError(f"invalid experiment id {exp_id!r}")
        return os.path.join(self.root, f"{exp_id}.json")

    def save(self, experiment: Experiment) -> str:
        path = self._path(experiment.id)
        atomic_write(path, json.dumps(experiment.to_dict(), sort_keys=True, indent=1))
        return path

    def save_doc(self, doc: dict) -> str:
        path = self._path(doc["id"])
        atomic_write(path, json.dumps(round_floats(doc), sort_keys=True, indent=1))
        return path

    def exists(self, exp_id: str) -> bool:
        return os.path.exists(self._path(exp_id))

    def load_doc(self, exp_id: str) -> dict:
        path = self._path(exp_id)
        if not os.path.exists(path):
            raise KeyError(exp_id)
        with open(path) as f:
            return json.load(f)

    def load(self, exp_id: str) -> Experiment:
        return Experiment.from_dict(self.load_doc(exp_id))

    def list(self) -> list[dict]:
        out = []
        for name in sorted(os.listdir(self.root)):
            if not name.endswith(".json"):
                continue
            with open(os.path.join(self.root, name)) as f:
                doc = json.load(f)
            out.append(
                {
                    "id": doc["id"],
                    "created_at": doc.get("created_at"),
                    "n_entries": len(doc.get("entries", [])),
                    "n_failures": len(doc.get("failures", [])),
                    "fingerprint": doc.get("fingerprint", ""),
                }
            )
        return out


def reference_experiment() -> Experiment:
    """The bundled 17-strategy benchmark as a ready-made experiment."""
    from .benchmark import FINGERPRINT, reference_entries

    entries = reference_entries()
    return Experiment(
        id="reference",
        fingerprint=FINGERPRINT,
        config={"dataset": {"reference": True}},
        bias={},
        entries=entries,
        failures=[],
        created_at="1970-01-01T00:00:00+00:00",
    )
