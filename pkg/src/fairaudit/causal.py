"""Causal DAG over table columns, additive-error SEM, counterfactuals, CFF.

Each graph node names a declared table column and maps to that column's
encoded block. Node models are linear in the encoded parent columns;
residuals are stored per training row so counterfactual propagation is
deterministic: intervene on the protected column, then recompute each
descendant in topological order as fitted(parents) + stored residual.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import DataTable
from .errors import FairauditError, GraphError, SchemaError
from .learners import LearnerConfig
from .learners.base import Classifier
from .learners.logistic import fit_logistic
from .learners.mlp import fit_mlp
from .learners.trees import fit_forest, fit_tree

_MATRIX_FITTERS = {
    "logistic": fit_logistic,
    "tree": fit_tree,
    "forest": fit_forest,
    "mlp": fit_mlp,
}


@dataclass(frozen=True)
class CausalGraph:
    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]

    def to_dict(self) -> dict:
        adj: dict[str, list[str]] = {n: [] for n in self.nodes}
        for a, b in self.edges:
            adj[a].append(b)
        return {"nodes": list(self.nodes), "children": adj}

    @staticmethod
    def from_dict(doc: dict) -> "CausalGraph":
        nodes = tuple(doc["nodes"])
        edges = []
        for a, kids in doc.get("children", {}).items():
            for b in kids:
                edges.append((a, b))
        return CausalGraph(nodes=nodes, edges=tuple(edges))


@dataclass(frozen=True)
class GraphInfo:
    order: tuple[str, ...]
    parents: dict[str, tuple[str, ...]]
    children: dict[str, tuple[str, ...]]

    def descendants(self, node: str) -> set[str]:
        seen: set[str] = set()
        stack = list(self.children.get(node, ()))
        while stack:
            cur = stack.pop()
            if cur in seen:
                continue
            seen.add(cur)
            stack.extend(self.children.get(cur, ()))
        return seen


def _find_cycle(nodes, children) -> list[str]:
    state = {n: 0 for n in nodes}  # 0 unseen, 1 on stack, 2 done
    path: list[str] = []

    def dfs(n) -> list[str] | None:
        state[n] = 1
        path.append(n)
        for m in children.get(n, ()):
            if state[m] == 1:
                return path[path.index(m) :] + [m]
            if state[m] == 0:
                found = dfs(m)
                if found:
                    return found
        path.pop()
        state[n] = 2
        return None

    for n in nodes:
        if state[n] == 0:
            found = dfs(n)
            if found:
                return found
    return []


def validate_graph(graph: CausalGraph, protected: str | None = None) -> GraphInfo:
    """Topological order plus parent/child maps; errors on cycles."""
    known = set(graph.nodes)
    if len(known) != len(graph.nodes):
        raise GraphError("duplicate node names")
    for a, b in graph.edges:
        for end in (a, b):
            if end not in known:
                raise SchemaError(f"edge endpoint {end!r} is not a declared node")
    parents: dict[str, list[str]] = {n: [] for n in graph.nodes}
    children: dict[str, list[str]] = {n: [] for n in graph.nodes}
    for a, b in graph.edges:
        parents[b].append(a)
        children[a].append(b)
    indeg = {n: len(parents[n]) for n in graph.nodes}
    ready = [n for n in graph.nodes if indeg[n] == 0]
    order: list[str] = []
    while ready:
        n = ready.pop(0)
        order.append(n)
        for m in children[n]:
            indeg[m] -= 1
            if indeg[m] == 0:
                ready.append(m)
    if len(order) != len(graph.nodes):
        cycle = _find_cycle(graph.nodes, children)
        raise GraphError("graph has a cycle: " + " -> ".join(cycle))
    if protected is not None:
        if protected not in known:
            raise SchemaError(f"protected column {protected!r} is not a graph node")
        if parents[protected]:
            raise GraphError(
                f"protected node {protected!r} must be exogenous but has parents "
                f"{parents[protected]}"
            )
    return GraphInfo(
        order=tuple(order),
        parents={n: tuple(v) for n, v in parents.items()},
        children={n: tuple(v) for n, v in children.items()},
    )


# -- SEM -----------------------------------------------------------------------


@dataclass
class NodeModel:
    node: str
    parents: tuple[str, ...]
    out_cols: tuple[str, ...]  # encoded columns of this node
    coef: np.ndarray  # (1 + n_parent_cols, n_out) with intercept first
    stderr: np.ndarray | None  # same shape, None for ridge fallback
    ridge: bool = False


@dataclass
class FittedSEM:
    graph: CausalGraph
    info: GraphInfo
    protected: str
    models: dict[str, NodeModel]
    residuals: dict[str, np.ndarray]  # node -> (n, n_out) training residuals
    # second-order rounding corrections making fitted + residual reproduce the
    # observed values bit-exactly: c = x - fl(f + e) (exact by Sterbenz)
    corrections: dict[str, np.ndarray]
    train_fingerprint: str

    def reconstruct(self, table: DataTable) -> np.ndarray:
        """fitted(parents) + residual for every node; bit-equal to the data."""
        res = _residuals_for(self, table, None)
        corr = (
            self.corrections
            if table.fingerprint() == self.train_fingerprint
            else {n: 0.0 for n in self.models}
        )
        source_idx = {n: table.source_indices(n) for n in self.graph.nodes}
        data = np.empty_like(table.data)
        for node in self.info.order:
            m = self.models[node]
            X = _parent_matrix(table.data, source_idx[node], m.parents, source_idx)
            data[:, source_idx[node]] = (X @ m.coef + res[node]) + corr[node]
        return data

    def to_dict(self, include_residuals: bool = True) -> dict:
        doc = {
            "version": 1,
            "graph": self.graph.to_dict(),
            "protected": self.protected,
            "nodes": {
                n: {
                    "parents": list(m.parents),
                    "out_cols": list(m.out_cols),
                    "coef": m.coef.tolist(),
                    "ridge": m.ridge,
                }
                for n, m in self.models.items()
            },
        }
        if include_residuals:
            doc["residuals"] = {n: r.tolist() for n, r in self.residuals.items()}
        return doc


def _parent_matrix(table_data, col_idx, parents, source_idx) -> np.ndarray:
    cols = [table_data[:, j] for p in parents for j in source_idx[p]]
    n = table_data.shape[0]
    return np.column_stack([np.ones(n)] + cols)


def fit_sem(table: DataTable, graph: CausalGraph) -> FittedSEM:
    """Per-node linear regression on encoded parents, residuals stored.

    Collinear parent designs fall back to a tiny ridge penalty (flagged on
    the node model).
    """
    protected = table.protected_name
    info = validate_graph(graph, protected)
    source_idx = {n: table.source_indices(n) for n in graph.nodes}
    models: dict[str, NodeModel] = {}
    residuals: dict[str, np.ndarray] = {}
    corrections: dict[str, np.ndarray] = {}
    for node in info.order:
        out_idx = source_idx[node]
        Y = table.data[:, out_idx]
        X = _parent_matrix(table.data, out_idx, info.parents[node], source_idx)
        coef, stderr, ridge = _linear_fit(X, Y)
        fitted = X @ coef
        res = Y - fitted
        out_cols = tuple(table.encoded[j].name for j in out_idx)
        models[node] = NodeModel(node, info.parents[node], out_cols, coef, stderr, ridge)
        residuals[node] = res
        corrections[node] = Y - (fitted + res)
    return FittedSEM(
        graph=graph,
        info=info,
        protected=protected,
        models=models,
        residuals=residuals,
        corrections=corrections,
        train_fingerprint=table.fingerprint(),
    )


def _linear_fit(X: np.ndarray, Y: np.ndarray):
    n, p = X.shape
    coef, _, rank, _ = np.linalg.lstsq(X, Y, rcond=None)
    if rank < p:
        xtx = X.T @ X + 1e-8 * np.eye(p)
        coef = np.linalg.solve(xtx, X.T @ Y)
        return coef, None, True
    resid = Y - X @ coef
    stderr = None
    if n > p:
        xtx_inv = np.linalg.pinv(X.T @ X)
        diag = np.sqrt(np.clip(np.diag(xtx_inv), 0.0, None))
        sigma2 = (resid**2).sum(axis=0) / (n - p)
        stderr = np.sqrt(sigma2)[None, :] * diag[:, None]
    return coef, stderr, False


def node_residuals(sem: FittedSEM, table: DataTable) -> dict[str, np.ndarray]:
    """Residuals for rows not seen at fit time (same identity, recomputed)."""
    source_idx = {n: table.source_indices(n) for n in sem.graph.nodes}
    out: dict[str, np.ndarray] = {}
    for node in sem.info.order:
        m = sem.models[node]
        Y = table.data[:, source_idx[node]]
        X = _parent_matrix(table.data, source_idx[node], m.parents, source_idx)
        out[node] = Y - X @ m.coef
    return out


def _residuals_for(sem: FittedSEM, table: DataTable, residuals) -> dict[str, np.ndarray]:
    if residuals is not None:
        return residuals
    if table.fingerprint() == sem.train_fingerprint:
        return sem.residuals
    return node_residuals(sem, table)


def counterfactual_table(
    sem: FittedSEM,
    table: DataTable,
    intervention,
    residuals: dict[str, np.ndarray] | None = None,
) -> DataTable:
    """Set the protected column and propagate through every descendant.

    `intervention` is a scalar or a per-row array of {0,1} values. Rows whose
    protected value is unchanged are returned bit-identical. Rows unseen at
    fit time get residuals recomputed on the fly unless supplied.
    """
    res = _residuals_for(sem, table, residuals)
    protected_idx = table.source_indices(sem.protected)
    if len(protected_idx) != 1:
        raise SchemaError("protected column must encode to a single column")
    pj = protected_idx[0]
    old = table.data[:, pj]
    new_vals = np.broadcast_to(np.asarray(intervention, dtype=float), old.shape).copy()
    changed = new_vals != old

    data = table.data.copy()
    data[:, pj] = new_vals
    source_idx = {n: table.source_indices(n) for n in sem.graph.nodes}
    desc = sem.info.descendants(sem.protected)
    for node in sem.info.order:
        if node not in desc:
            continue
        m = sem.models[node]
        X = _parent_matrix(data, source_idx[node], m.parents, source_idx)
        data[:, source_idx[node]] = X @ m.coef + res[node]
    # unchanged rows stay bit-identical to the input
    data[~changed] = table.data[~changed]
    out = DataTable(
        schema=table.schema,
        encoded=table.encoded,
        data=data,
        value_maps=table.value_maps,
        categories=table.categories,
    )
    return out


def counterfactual_row(
    sem: FittedSEM, table: DataTable, row: int, intervention: float
) -> np.ndarray:
    """Single counterfactual row (encoded values)."""
    vals = np.full(table.n, np.nan)
    vals[:] = table.data[:, table.source_indices(sem.protected)[0]]
    vals[row] = intervention
    cf = counterfactual_table(sem, table, vals)
    return cf.data[row]


# -- counterfactually fair model -------------------------------------------------


@dataclass
class CFFModel:
    sem: FittedSEM
    classifier: Classifier
    base_features: tuple[str, ...]  # encoded non-descendant model inputs
    residual_nodes: tuple[str, ...]  # descendant nodes whose residuals are inputs

    def _assemble(self, table: DataTable, residuals) -> np.ndarray:
        res = _residuals_for(self.sem, table, residuals)
        parts = []
        if self.base_features:
            parts.append(table.matrix(list(self.base_features)))
        for node in self.residual_nodes:
            parts.append(res[node])
        return np.hstack(parts)

    def predict_scores(self, table: DataTable, residuals=None) -> np.ndarray:
        return self.classifier.score_matrix(self._assemble(table, residuals))

    def predict_labels(self, table: DataTable, threshold: float = 0.5, residuals=None):
        return (self.predict_scores(table, residuals) >= threshold).astype(float)


def fit_cff(
    table: DataTable,
    graph: CausalGraph,
    kind: str = "forest",
    config: LearnerConfig | None = None,
) -> CFFModel:
    """Train a classifier on non-descendants of the protected column plus the
    residuals of its descendants; predictions are invariant under protected
    interventions by construction."""
    config = config or LearnerConfig()
    sem = fit_sem(table, graph)
    protected = sem.protected
    desc = sem.info.descendants(protected)
    target = table.target_name

    base_features = tuple(
        c.name
        for c in table.encoded
        if c.role in ("feature", "stratum") and c.source not in desc and c.source != protected
    )
    residual_nodes = tuple(
        n for n in sem.info.order if n in desc and n != target and n in {
            c.source for c in table.encoded if c.role in ("feature", "stratum")
        }
    )
    if not base_features and not residual_nodes:
        raise FairauditError("CFF has no usable inputs: no non-descendants and no residuals")

    X = CFFModel(sem, None, base_features, residual_nodes)._assemble(table, None)
    names = list(base_features) + [
        f"resid:{n}:{c}" for n in residual_nodes for c in sem.models[n].out_cols
    ]
    y = table.y()
    clf = _MATRIX_FITTERS[kind](X, y, np.ones(table.n), names, config)
    return CFFModel(sem, clf, base_features, residual_nodes)
