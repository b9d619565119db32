"""Result containers shared by the Euclidean and spherical maximal operators."""

from __future__ import annotations

import io
import json
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class MaximalResult:
    """Values of a maximal operator with per-node maximizer and detachment mask.

    arg1/arg2 hold the maximizing parameter: (t, nan) for flows, (rho, nan)
    for the centered operator, (center, rho) for uncentered ones.  A node is
    detached when the supremum exceeds the datum by more than the tolerance;
    at undetached nodes the maximizer is the zero-parameter limit.
    """

    variant: str
    nodes: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    arg1: np.ndarray = field(repr=False)
    arg2: np.ndarray = field(repr=False)
    detached: np.ndarray = field(repr=False)
    meta: dict = field(default_factory=dict)

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        buf.write("node,value,arg1,arg2,detached\n")
        for x, v, a1, a2, m in zip(self.nodes, self.values, self.arg1, self.arg2, self.detached):
            buf.write(f"{x!r},{v!r},{a1!r},{a2!r},{int(m)}\n")
        return buf.getvalue()

    def to_json_dict(self) -> dict:
        return {
            "variant": self.variant,
            "meta": self.meta,
            "node": list(map(float, self.nodes)),
            "value": list(map(float, self.values)),
            "arg1": list(map(float, self.arg1)),
            "arg2": list(map(float, self.arg2)),
            "detached": list(map(bool, self.detached)),
        }


@dataclass(frozen=True)
class DetachmentComponent:
    """A maximal run of detached nodes with its interior valley index.

    first/last are inclusive node indices; tau indexes the minimum of the
    maximal function on the run (the turning point of the valley).
    """

    first: int
    last: int
    tau: int

    def slice(self) -> slice:
        return slice(self.first, self.last + 1)


def detachment_components(result: MaximalResult) -> list[DetachmentComponent]:
    """Maximal runs of detached nodes, ordered and pairwise disjoint."""
    mask = np.asarray(result.detached, dtype=bool)
    comps: list[DetachmentComponent] = []
    i = 0
    n = len(mask)
    while i < n:
        if mask[i]:
            j = i
            while j + 1 < n and mask[j + 1]:
                j += 1
            tau = i + int(np.argmin(result.values[i:j + 1]))
            comps.append(DetachmentComponent(i, j, tau))
            i = j + 1
        else:
            i += 1
    return comps


def valley_violation(result: MaximalResult, comp: DetachmentComponent) -> float:
    """Worst monotonicity defect of the non-increasing/non-decreasing valley shape.

    Zero means the values fall until tau and rise after it; positive numbers
    measure the largest wrong-direction step.
    """
    v = result.values[comp.slice()]
    k = comp.tau - comp.first
    down = v[:k + 1]
    up = v[k:]
    viol = 0.0
    if len(down) > 1:
        viol = max(viol, float(np.max(np.diff(down), initial=0.0)))
    if len(up) > 1:
        viol = max(viol, float(np.max(-np.diff(up), initial=0.0)))
    return viol


def atomic_write_text(path, text: str) -> None:
    """Write via a temp file + rename so readers never observe partial output."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="ascii") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_result(result: MaximalResult, csv_path=None, json_path=None) -> None:
    if csv_path is not None:
        atomic_write_text(csv_path, result.to_csv_text())
    if json_path is not None:
        atomic_write_text(json_path, json.dumps(result.to_json_dict()) + "\n")
