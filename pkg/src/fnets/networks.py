"""Weighted network containers shared by the estimation stages."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Network:
    """A weighted graph on the panel's series.

    weights: (p, p) array; entry (i, j) is the weight of edge i -> j for
    a directed network and of the unordered pair {i, j} otherwise.
    Absent edges carry weight 0.
    """

    weights: np.ndarray
    directed: bool
    labels: tuple[str, ...]
    threshold: float = 0.0

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "labels", tuple(self.labels))
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError("weight matrix must be square")
        if len(self.labels) != w.shape[0]:
            raise ValueError("label count does not match node count")
        if not self.directed and not np.array_equal(w, w.T):
            raise ValueError("undirected network has asymmetric weights")

    @property
    def p(self) -> int:
        return self.weights.shape[0]

    def edges(self):
        """Yield (i, j, weight) triples; unordered pairs once, i < j."""
        w = self.weights
        for i in range(self.p):
            start = 0 if self.directed else i + 1
            for j in range(start, self.p):
                if w[i, j] != 0.0:
                    yield i, j, w[i, j]

    def edge_count(self) -> int:
        return sum(1 for _ in self.edges())

    def support(self) -> np.ndarray:
        """Boolean matrix of present edges (diagonal included if directed)."""
        s = self.weights != 0.0
        if not self.directed:
            np.fill_diagonal(s, False)
        return s


@dataclass(frozen=True)
class NetworkSet:
    """The three dependence networks produced by one estimation run."""

    granger: Network
    contemporaneous: Network
    longrun: Network
    thresholds: dict = field(default_factory=dict)

    def __post_init__(self):
        ps = {self.granger.p, self.contemporaneous.p, self.longrun.p}
        if len(ps) != 1:
            raise ValueError("networks disagree on node count")
        if self.granger.directed is False:
            raise ValueError("granger network must be directed")
        if self.contemporaneous.directed or self.longrun.directed:
            raise ValueError("partial-correlation networks must be undirected")
