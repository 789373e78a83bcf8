"""Linear additive-noise structural model over the schema's features.

Each node i carries an equation  x_i := intercept_i + sum_j w_ij * x_pa(j)
+ u_i  in the scaled (ordinal) feature space.  Abduction recovers u from an
observed vector; a hard intervention do(x_i := v) severs node i's equation
and re-evaluates its non-intervened descendants in topological order.  The
forward map is affine, so the Jacobian of the intervened push with respect
to the intervention values is exact and cheap — the causal engines chain
model gradients through it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ScmConfigError


@dataclass(frozen=True)
class ScmNode:
    name: str
    parents: tuple[str, ...] = ()
    weights: tuple[float, ...] = ()
    intercept: float = 0.0
    noise_scale: float = 1.0

    def __post_init__(self):
        if len(self.parents) != len(self.weights):
            raise ScmConfigError(
                f"node {self.name!r}: {len(self.parents)} parents vs {len(self.weights)} weights"
            )


@dataclass
class Scm:
    nodes: tuple[ScmNode, ...]
    _order: list[int] = field(init=False, repr=False)
    _parent_idx: list[np.ndarray] = field(init=False, repr=False)
    _weights: list[np.ndarray] = field(init=False, repr=False)

    def __post_init__(self):
        names = [n.name for n in self.nodes]
        if len(set(names)) != len(names):
            raise ScmConfigError("duplicate node names")
        index = {n: i for i, n in enumerate(names)}
        for node in self.nodes:
            for p in node.parents:
                if p not in index:
                    raise ScmConfigError(f"node {node.name!r}: unknown parent {p!r}")
                if p == node.name:
                    raise ScmConfigError(f"node {node.name!r}: self-loop")
        self._parent_idx = [np.array([index[p] for p in n.parents], dtype=int) for n in self.nodes]
        self._weights = [np.asarray(n.weights, dtype=float) for n in self.nodes]
        self._order = self._toposort()

    def _toposort(self) -> list[int]:
        n = len(self.nodes)
        indeg = [len(p) for p in self._parent_idx]
        children: list[list[int]] = [[] for _ in range(n)]
        for i, parents in enumerate(self._parent_idx):
            for p in parents:
                children[p].append(i)
        ready = sorted(i for i in range(n) if indeg[i] == 0)
        order = []
        while ready:
            i = ready.pop(0)
            order.append(i)
            for c in children[i]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(c)
            ready.sort()
        if len(order) != n:
            raise ScmConfigError("cycle detected in structural graph")
        return order

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def names(self) -> list[str]:
        return [n.name for n in self.nodes]

    def node_index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ScmConfigError(f"unknown node {name!r}") from None

    @property
    def is_independent(self) -> bool:
        return all(len(p) == 0 for p in self._parent_idx)

    def _mean_part(self, i: int, x: np.ndarray) -> float:
        pa = self._parent_idx[i]
        return self.nodes[i].intercept + (float(x[pa] @ self._weights[i]) if pa.size else 0.0)

    # -- abduction / prediction ------------------------------------------------

    def abduct(self, x: np.ndarray) -> np.ndarray:
        """Recover exogenous values u with u_i = x_i - g_i(parents)."""
        x = np.asarray(x, dtype=float)
        if x.shape != (len(self.nodes),):
            raise ScmConfigError(f"vector width {x.shape} != node count ({len(self.nodes)},)")
        u = np.empty_like(x)
        for i in range(len(self.nodes)):
            u[i] = x[i] - self._mean_part(i, x)
        return u

    def push(self, u: np.ndarray, interventions: dict[int, float] | None = None) -> np.ndarray:
        """Evaluate equations in topological order given exogenous u.

        Intervened nodes are pinned to their do() value; everything else is
        g_i(parents) + u_i.
        """
        u = np.asarray(u, dtype=float)
        interventions = interventions or {}
        x = np.empty_like(u)
        for i in self._order:
            if i in interventions:
                x[i] = interventions[i]
            else:
                x[i] = self._mean_part(i, x) + u[i]
        return x

    def process_semifactual(self, x: np.ndarray, interventions: dict[int, float]) -> np.ndarray:
        """Abduct u from x, apply the hard interventions, push forward."""
        for i in interventions:
            if not (0 <= i < len(self.nodes)):
                raise ScmConfigError(f"intervention on unknown node index {i}")
        return self.push(self.abduct(x), interventions)

    def jacobian(self, intervened: list[int]) -> np.ndarray:
        """d(pushed vector)/d(intervention values), shape (n_nodes, len(intervened)).

        Forward accumulation along topological order: an intervened node
        responds only to its own do() value; a non-intervened node inherits
        its parents' sensitivities through the edge weights.
        """
        col = {node: k for k, node in enumerate(intervened)}
        J = np.zeros((len(self.nodes), len(intervened)))
        for i in self._order:
            if i in col:
                J[i, col[i]] = 1.0
                continue
            pa = self._parent_idx[i]
            if pa.size:
                J[i] = self._weights[i] @ J[pa]
        return J

    def input_jacobian(self, intervened: list[int]) -> np.ndarray:
        """d(pushed vector)/d(observed input x) under fixed interventions.

        A perturbation of the observed individual re-enters through the
        abducted noise; intervened nodes absorb it entirely (their rows are
        zero), everything else propagates along the remaining edges.  With
        no interventions this is the identity.
        """
        n = len(self.nodes)
        J = np.zeros((n, n))
        pinned = set(intervened)
        for i in self._order:
            if i in pinned:
                continue
            row = np.zeros(n)
            row[i] = 1.0
            pa = self._parent_idx[i]
            if pa.size:
                # du_i/dx = e_i - sum_j w_ij e_j; dSF_i = du_i + sum_j w_ij dSF_j
                row -= self._weights[i] @ np.eye(n)[pa]
                row += self._weights[i] @ J[pa]
            J[i] = row
        return J

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Draw observational samples (exogenous noise is standard normal
        scaled by each node's noise_scale; used only to synthesize data)."""
        U = rng.normal(size=(n, len(self.nodes))) * np.array([nd.noise_scale for nd in self.nodes])
        X = np.empty_like(U)
        for i in self._order:
            pa = self._parent_idx[i]
            mean = self.nodes[i].intercept + (X[:, pa] @ self._weights[i] if pa.size else 0.0)
            X[:, i] = mean + U[:, i]
        return X

    # -- config ------------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "nodes": [
                {
                    "name": n.name,
                    "parents": list(n.parents),
                    "weights": list(n.weights),
                    "intercept": n.intercept,
                    **({"noise_scale": n.noise_scale} if n.noise_scale != 1.0 else {}),
                }
                for n in self.nodes
            ]
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Scm":
        if not isinstance(doc, dict) or "nodes" not in doc:
            raise ScmConfigError("SCM config must be an object with a 'nodes' list")
        nodes = []
        for raw in doc["nodes"]:
            try:
                nodes.append(
                    ScmNode(
                        name=raw["name"],
                        parents=tuple(raw.get("parents", [])),
                        weights=tuple(float(w) for w in raw.get("weights", [])),
                        intercept=float(raw.get("intercept", 0.0)),
                        noise_scale=float(raw.get("noise_scale", 1.0)),
                    )
                )
            except KeyError as exc:
                raise ScmConfigError(f"node entry missing field {exc}") from None
        return cls(tuple(nodes))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")


def load_scm(path) -> Scm:
    with open(path, encoding="utf-8") as fh:
        return Scm.from_dict(json.load(fh))


def independent_scm(names: list[str]) -> Scm:
    """No edges: do() reduces to plain substitution."""
    return Scm(tuple(ScmNode(name=n) for n in names))


def align_with_schema(scm: Scm, feature_names: list[str]) -> None:
    """The causal engines require node order to match the schema layout."""
    if scm.names != list(feature_names):
        raise ScmConfigError(
            "SCM nodes must match the schema's feature names in order; "
            f"got {scm.names} vs {list(feature_names)}"
        )
