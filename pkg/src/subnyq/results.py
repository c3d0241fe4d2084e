"""Recovery results and their JSON form."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


def _cplx(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


@dataclass
class RecoveryResult:
    """Greedy recovery output.

    ``support`` holds grid index tuples: (delay, Doppler) for the temporal
    pipelines and (delay, azimuth, Doppler) for MIMO.  Physical estimates
    are filled in by the pipeline that produced the result.
    """

    support: list[tuple[int, ...]] = field(default_factory=list)
    amplitudes: np.ndarray = field(default_factory=lambda: np.zeros(0, complex))
    residual_norms: list[float] = field(default_factory=list)
    statistics: list[float] = field(default_factory=list)
    delays: np.ndarray | None = None
    dopplers: np.ndarray | None = None
    azimuths: np.ndarray | None = None
    stop_reason: str = ""

    def __post_init__(self):
        self.support = [tuple(int(i) for i in s) for s in self.support]
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)

    @property
    def L(self) -> int:
        return len(self.support)

    def support_set(self) -> set[tuple[int, ...]]:
        return set(self.support)

    def to_dict(self) -> dict:
        d = {
            "support": [list(s) for s in self.support],
            "amplitudes": [_cplx(a) for a in self.amplitudes],
            "residual_norms": [float(r) for r in self.residual_norms],
            "statistics": [float(s) for s in self.statistics],
            "stop_reason": self.stop_reason,
        }
        for name in ("delays", "dopplers", "azimuths"):
            v = getattr(self, name)
            if v is not None:
                d[name] = [float(x) for x in v]
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "RecoveryResult":
        opt = {k: np.asarray(d[k], float) for k in ("delays", "dopplers", "azimuths") if k in d}
        return cls(support=[tuple(s) for s in d["support"]],
                   amplitudes=np.array([complex(*a) for a in d["amplitudes"]], dtype=complex),
                   residual_norms=list(d.get("residual_norms", [])),
                   statistics=list(d.get("statistics", [])),
                   stop_reason=d.get("stop_reason", ""), **opt)

    @classmethod
    def from_json(cls, s: str) -> "RecoveryResult":
        return cls.from_dict(json.loads(s))
