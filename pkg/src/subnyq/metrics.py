"""Detection matching and localisation error."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class MatchReport:
    hits: int
    misses: int
    false_alarms: int
    rmsle: float
    pairs: list[tuple[int, int]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"hits": self.hits, "misses": self.misses,
                "false_alarms": self.false_alarms, "rmsle": self.rmsle,
                "pairs": [list(p) for p in self.pairs]}


def rmsle(d_true, d_est) -> float:
    """sqrt(mean((d - d_hat)^2)); 0 for no pairs."""
    d_true = np.asarray(d_true, float)
    d_est = np.asarray(d_est, float)
    if d_true.size == 0:
        return 0.0
    return float(np.sqrt(np.mean((d_true - d_est) ** 2)))


def match_detections(result, truth, bins=(1, 1), range_cell: float = 1.0) -> MatchReport:
    """Greedy one-to-one matching of detections to true cells.

    ``result`` is a RecoveryResult or a list of index tuples; ``truth`` is a
    list of index tuples of the same length as ``bins``.  A detection may
    match a target when every coordinate differs by at most the matching
    entry of ``bins``; closer pairs are matched first.  The RMSLE uses the
    first coordinate (range bin) times ``range_cell``.
    """
    det = [tuple(s) for s in getattr(result, "support", result)]
    tru = [tuple(t) for t in truth]
    tol = np.asarray(bins, dtype=float)
    if np.any(tol <= 0):
        raise ValueError("matching bins must be positive")
    cand = []
    for i, d in enumerate(det):
        for j, t in enumerate(tru):
            diff = np.abs(np.subtract(d, t, dtype=float))
            if np.all(diff <= tol):
                cand.append((float(np.sum((diff / tol) ** 2)), j, i))
    cand.sort()
    used_d, used_t, pairs = set(), set(), []
    for _, j, i in cand:
        if i in used_d or j in used_t:
            continue
        used_d.add(i)
        used_t.add(j)
        pairs.append((j, i))
    pairs.sort()
    err = rmsle([tru[j][0] * range_cell for j, _ in pairs],
                [det[i][0] * range_cell for _, i in pairs])
    return MatchReport(len(pairs), len(tru) - len(pairs), len(det) - len(pairs), err, pairs)
