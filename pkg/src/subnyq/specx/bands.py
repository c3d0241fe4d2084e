"""Band bookkeeping, cognitive-radar band selection and transmit shaping."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

ROLES = ("F", "F_C", "F_R")
Y_INV_CAP = 1e12


def merge_bands(bands) -> list[tuple[float, float]]:
    out: list[list[float]] = []
    for lo, hi in sorted((float(a), float(b)) for a, b in bands):
        if out and lo <= out[-1][1]:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return [(a, b) for a, b in out]


def intervals_overlap(a, b) -> bool:
    """True when two band lists share a set of positive measure."""
    for lo1, hi1 in a:
        for lo2, hi2 in b:
            if max(lo1, lo2) < min(hi1, hi2):
                return True
    return False


@dataclass(frozen=True)
class SpectralMap:
    bands: tuple[tuple[float, float], ...] = ()
    role: str = "F"

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"unknown role {self.role!r}")
        for lo, hi in self.bands:
            if not hi > lo:
                raise ValueError(f"empty band ({lo}, {hi})")
        object.__setattr__(self, "bands", tuple(merge_bands(self.bands)))

    @property
    def measure(self) -> float:
        return float(sum(hi - lo for lo, hi in self.bands))

    def overlaps(self, other: "SpectralMap") -> bool:
        return intervals_overlap(self.bands, other.bands)

    def to_list(self) -> list[list[float]]:
        return [[lo, hi] for lo, hi in self.bands]


@dataclass
class REM:
    """Typical interference energy per band over the shared span ``extent``."""

    y: np.ndarray
    extent: tuple[float, float]
    band_width_by: float = field(init=False)

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float)
        if np.any(self.y < 0):
            raise ValueError("interference levels must be nonnegative")
        self.band_width_by = (self.extent[1] - self.extent[0]) / len(self.y)

    @property
    def q(self) -> int:
        return len(self.y)

    def band_edges(self, i: int) -> tuple[float, float]:
        lo = self.extent[0] + i * self.band_width_by
        return lo, lo + self.band_width_by

    def masked(self, FC: SpectralMap) -> np.ndarray:
        """y with +inf on every band that meets F_C."""
        y = self.y.copy()
        for i in range(self.q):
            if intervals_overlap([self.band_edges(i)], FC.bands):
                y[i] = np.inf
        return y


def mapping_matrix(q: int, p: int) -> np.ndarray:
    """D[i, j] = 1 when discretised frequency j lies in REM band i."""
    if p % q:
        raise ValueError("p must be a multiple of q")
    return np.kron(np.eye(q), np.ones((1, p // q)))


def block_count(F) -> int:
    F = sorted(F)
    if not F:
        return 0
    return 1 + int(np.sum(np.diff(F) > 1))


def coding_complexity(F, p: int) -> float:
    """c(F) = g log p + |F|."""
    return block_count(F) * np.log(p) + len(F)


def _y_inv(y: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        inv = np.where(y > 0, 1.0 / np.where(y > 0, y, 1.0), Y_INV_CAP)
    inv[np.isinf(y)] = 0.0
    return inv


def _ls(D, F, y_inv):
    w = np.zeros(D.shape[1])
    if F:
        w[F] = np.linalg.pinv(D[:, F]) @ y_inv
    return w


def band_select(rem: REM, FC: SpectralMap, Nb: int, p: int, D: np.ndarray | None = None,
                budget_cells: int | None = None):
    """Structured greedy selection of at most Nb low-interference blocks.

    Returns (w, F_R, F) with F the selected frequency cells.  Cells that
    meet F_C are never eligible.  ``budget_cells`` caps |F| (total radar
    bandwidth); without it the greedy stops only on the block count or when
    no cell improves the fit.
    """
    q = rem.q
    if p < Nb:
        raise ValueError("need p >= Nb")
    D = mapping_matrix(q, p) if D is None else np.asarray(D, dtype=float)
    y_inv = _y_inv(rem.masked(FC))
    lo0, hi0 = rem.extent
    bw = (hi0 - lo0) / p
    cells = [(lo0 + j * bw, lo0 + (j + 1) * bw) for j in range(p)]
    eligible = np.array([not intervals_overlap([c], FC.bands) for c in cells])
    if not eligible.any():
        raise ValueError("all bands are blocked by F_C")

    col_sq = np.sum(D**2, axis=0)
    F: list[int] = []
    w = np.zeros(p)
    while budget_cells is None or len(F) < budget_cells:
        r = D @ w - y_inv
        num = np.where(col_sq > 0, (D.T @ r) ** 2 / np.where(col_sq > 0, col_sq, 1), 0.0)
        c0 = coding_complexity(F, p)
        phi = np.full(p, -np.inf)
        for i in np.flatnonzero(eligible):
            if i in F:
                continue
            inc = coding_complexity(F + [int(i)], p) - c0
            if inc > 0:
                phi[i] = num[i] / inc
            else:
                phi[i] = np.inf if num[i] > 0 else 0.0
        best = int(np.argmax(phi))
        if not phi[best] > 0:
            break
        F_new = sorted(F + [best])
        if block_count(F_new) > Nb:
            break
        F = F_new
        w = _ls(D, F, y_inv)
    FR = SpectralMap(tuple(cells[j] for j in F), "F_R")
    return w, FR, F


def selection_objective(F, D, y_inv, p: int, lam: float) -> float:
    w = _ls(D, list(F), y_inv)
    return float(np.sum((y_inv - D @ w) ** 2) + lam * coding_complexity(list(F), p))


def exhaustive_band_select(rem: REM, FC: SpectralMap, Nb: int, p: int, lam: float,
                           n_cells: int | None = None, D: np.ndarray | None = None):
    """Minimise ||y_inv - D w||^2 + lam c(F) over supports with <= Nb blocks.

    ``n_cells`` restricts the search to supports of exactly that size.
    Returns (F, objective).
    """
    D = mapping_matrix(rem.q, p) if D is None else D
    y_inv = _y_inv(rem.masked(FC))
    lo0, hi0 = rem.extent
    bw = (hi0 - lo0) / p
    ok = [j for j in range(p)
          if not intervals_overlap([(lo0 + j * bw, lo0 + (j + 1) * bw)], FC.bands)]
    sizes = [n_cells] if n_cells is not None else range(1, len(ok) + 1)
    best, best_obj = None, np.inf
    for s in sizes:
        for F in itertools.combinations(ok, s):
            if block_count(F) > Nb:
                continue
            obj = selection_objective(F, D, y_inv, p, lam)
            if obj < best_obj - 1e-12:
                best, best_obj = list(F), obj
    return best, best_obj


def shape_transmit_spectrum(H_nyq: np.ndarray, freqs: np.ndarray, FR: SpectralMap,
                            PT: float, df: float | None = None):
    """Uniform-gain restriction of H to F_R keeping the total power P_T.

    ``freqs`` are the bin centres of ``H_nyq`` and ``df`` the bin width.
    Returns (H_R, beta).
    """
    H = np.asarray(H_nyq, dtype=complex)
    freqs = np.asarray(freqs, dtype=float)
    if df is None:
        df = float(np.median(np.diff(np.sort(freqs))))
    if not FR.bands:
        raise ValueError("F_R is empty")
    inside = np.zeros(len(H), dtype=bool)
    for lo, hi in FR.bands:
        inside |= (freqs >= lo) & (freqs < hi)
    e_in = float(np.sum(np.abs(H[inside]) ** 2) * df)
    if e_in <= 0:
        raise ValueError("no transmit energy inside F_R")
    beta = np.sqrt(PT / e_in)
    return np.where(inside, beta * H, 0.0), float(beta)
