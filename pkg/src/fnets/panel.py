"""Panel ingestion, run configuration and output serialization.

CSV inputs are time-major (rows are time points, first column a time
index, remaining columns one series each). Internally panels are stored
series-major, one contiguous row per series.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np
import pandas as pd

from .networks import Network, NetworkSet

# Significant digits used for every float we serialize. 17 digits make
# text round-trips bit-faithful for IEEE doubles.
FLOAT_DIGITS = 17


def format_float(x: float) -> str:
    return f"{float(x):.{FLOAT_DIGITS - 1}e}"


@dataclass(frozen=True)
class TimeSeriesPanel:
    """Observed panel X with p series of length n.

    values: (p, n) array, series as rows.
    labels: p series names.
    centered: whether rows have had their sample means removed.
    """

    values: np.ndarray
    labels: tuple[str, ...]
    centered: bool = False

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "labels", tuple(self.labels))
        if vals.ndim != 2:
            raise ValueError("panel values must be a 2-d array")
        p, n = vals.shape
        if p < 2 or n < 2:
            raise ValueError(f"panel needs p >= 2 and n >= 2, got p={p}, n={n}")
        if len(self.labels) != p:
            raise ValueError("label count does not match series count")
        if not np.all(np.isfinite(vals)):
            i, t = np.argwhere(~np.isfinite(vals))[0]
            raise ValueError(
                f"non-finite value at (t={t}, series={self.labels[i]})"
            )
        if self.centered:
            scale = np.maximum(np.abs(vals).max(axis=1), 1.0)
            if np.any(np.abs(vals.sum(axis=1)) > 1e-9 * n * scale):
                raise ValueError("centered panel has rows with nonzero mean")

    @property
    def p(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]


def load_panel(path, demean: bool = True) -> TimeSeriesPanel:
    """Read a time-major CSV into a TimeSeriesPanel.

    First row is the header (series names), first column the time index.
    Every remaining cell must be numeric; missing or non-numeric cells
    raise with the offending (time, series) location.
    """
    try:
        frame = pd.read_csv(path, index_col=0)
    except pd.errors.ParserError as exc:
        raise ValueError(f"malformed CSV {path}: {exc}") from None
    labels = [str(c) for c in frame.columns]
    numeric = frame.apply(pd.to_numeric, errors="coerce")
    bad = numeric.isna() | ~np.isfinite(numeric.to_numpy(dtype=float, na_value=np.nan))
    if bad.to_numpy().any():
        t_pos, s_pos = np.argwhere(bad.to_numpy())[0]
        raise ValueError(
            f"non-numeric at (t={frame.index[t_pos]}, series={labels[s_pos]})"
        )
    values = numeric.to_numpy(dtype=float).T
    if values.shape[0] < 2 or values.shape[1] < 2:
        raise ValueError(
            f"panel too small: p={values.shape[0]}, n={values.shape[1]}"
        )
    if demean:
        values = values - values.mean(axis=1, keepdims=True)
    return TimeSeriesPanel(values=values, labels=tuple(labels), centered=demean)


def write_panel(panel: TimeSeriesPanel, path) -> None:
    """Write a panel back to the time-major CSV layout read by load_panel."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write("t," + ",".join(panel.labels) + "\n")
        for t in range(panel.n):
            cells = ",".join(format_float(v) for v in panel.values[:, t])
            fh.write(f"{t},{cells}\n")


def write_network_edgelist(net: NetworkSet, outdir) -> None:
    """Write granger.csv, contemporaneous.csv and longrun.csv edge lists.

    Columns are source,target,weight. The directed file lists every
    nonzero ordered pair, the undirected files each unordered pair once
    (source index < target index).
    """
    outdir = Path(outdir)
    for name, network in (
        ("granger", net.granger),
        ("contemporaneous", net.contemporaneous),
        ("longrun", net.longrun),
    ):
        target = outdir / f"{name}.csv"
        try:
            with target.open("w", newline="") as fh:
                fh.write("source,target,weight\n")
                for i, j, w in network.edges():
                    fh.write(
                        f"{network.labels[i]},{network.labels[j]},{format_float(w)}\n"
                    )
        except OSError as exc:
            raise OSError(f"cannot write {target}: {exc}") from None


def read_edgelist(path) -> list[tuple[str, str, float]]:
    frame = pd.read_csv(path)
    return [
        (str(r.source), str(r.target), float(r.weight))
        for r in frame.itertuples(index=False)
    ]


@dataclass
class RunConfig:
    """Every tunable of the estimation pipeline; None means resolve from data."""

    q: int | None = None
    r: int | None = None
    d: int | None = None
    m: int | None = None
    lam: float | None = None
    eta: float | None = None
    solver: str = "lasso"
    threshold_beta: float | None = None
    threshold_delta: float | None = None
    threshold_omega: float | None = None
    forecast_horizon: int = 1
    cv_folds: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.solver not in ("lasso", "dantzig"):
            raise ValueError(f"unknown solver {self.solver!r}")
        if self.cv_folds < 1:
            raise ValueError("cv_folds must be positive")
        if self.forecast_horizon < 0:
            raise ValueError("forecast_horizon must be nonnegative")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        for name in ("q", "r", "d", "m"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.d is not None and self.d < 1:
            raise ValueError("d must be positive when set")
        if self.m is not None and self.m < 1:
            raise ValueError("m must be positive when set")
        for name in ("lam", "eta", "threshold_beta", "threshold_delta",
                     "threshold_omega"):
            v = getattr(self, name)
            if v is not None and (not math.isfinite(v) or v < 0):
                raise ValueError(f"{name} must be a finite nonnegative real")

    def validate_against(self, panel: TimeSeriesPanel) -> None:
        if self.m is not None and self.m >= panel.n:
            raise ValueError(f"bandwidth m={self.m} must be < n={panel.n}")
        if self.d is not None and self.d * panel.p > 10 * panel.n:
            raise ValueError(
                f"d*p = {self.d * panel.p} exceeds 10*n = {10 * panel.n}; "
                "the VAR is too large for this sample"
            )

    @classmethod
    def from_json(cls, path) -> "RunConfig":
        with open(path) as fh:
            raw = json.load(fh)
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**raw)


def write_manifest(manifest: dict, path) -> None:
    """Serialize the resolved-parameter manifest as stable JSON."""
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
