"""Probability weighting functions.

Covers the built-in parametric families, the fixed point separating the
loss and gain probability domains, smooth partitions of unity over [0, 1],
and reference-point neighbourhood membership tests for a utility function.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import _fd
from .errors import (
    ConfigError,
    CoverageError,
    DegenerateInputError,
    DomainError,
    NotFoundError,
    NumericError,
)

__all__ = [
    "Family",
    "WeightingFunctionSpec",
    "ProbabilityPartition",
    "ReferencePointReport",
    "eval_pwf",
    "fixed_point",
    "build_partition",
    "mtk_membership",
    "load_tabulated_csv",
]

FIXED_POINT_EPS = 1e-9
FIXED_POINT_TOL = 1e-12


class Family(str, enum.Enum):
    IDENTITY = "identity"
    PRELEC = "prelec"
    TK1992 = "tk"
    TABULATED = "tabulated"


@dataclass(frozen=True)
class WeightingFunctionSpec:
    """A named, parameterised probability weighting function w: [0,1] -> [0,1].

    Use the classmethod constructors rather than building the dataclass by hand::

        >>> w = WeightingFunctionSpec.prelec(gamma=0.65, beta=1.0)
        >>> round(float(w(math.exp(-1))), 6)
        0.367879
    """

    family: Family
    params: Mapping[str, float] = field(default_factory=dict)
    table: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        p = dict(self.params)
        if self.family is Family.PRELEC:
            g, b = p.get("gamma"), p.get("beta", 1.0)
            if g is None or not g > 0 or not b > 0:
                raise ConfigError(f"Prelec needs gamma > 0 and beta > 0, got gamma={g}, beta={b}")
            p["beta"] = float(b)
        elif self.family is Family.TK1992:
            g = p.get("gamma")
            if g is None or not (0 < g <= 1):
                raise ConfigError(f"TK-1992 needs gamma in (0, 1], got {g}")
        elif self.family is Family.TABULATED:
            self._check_table()
        object.__setattr__(self, "params", {k: float(v) for k, v in p.items()})
        if self.family is Family.TABULATED:
            pts = np.asarray(self.table, dtype=float)
            object.__setattr__(self, "_interp", PchipInterpolator(pts[:, 0], pts[:, 1], extrapolate=False))

    def _check_table(self):
        if not self.table or len(self.table) < 2:
            raise ConfigError("tabulated PWF needs at least two (p, w) rows")
        pts = np.asarray(self.table, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ConfigError("tabulated PWF rows must be (p, w) pairs")
        p, w = pts[:, 0], pts[:, 1]
        if not np.all(np.diff(p) > 0):
            raise ConfigError("tabulated p column must be strictly increasing")
        if p[0] != 0.0 or p[-1] != 1.0:
            raise ConfigError("tabulated p column must start at 0 and end at 1")
        if w[0] != 0.0 or w[-1] != 1.0:
            raise ConfigError("tabulated w column must satisfy w(0)=0 and w(1)=1")
        if np.any(w < 0) or np.any(w > 1):
            raise ConfigError("tabulated w values must lie in [0, 1]")
        object.__setattr__(self, "table", tuple((float(a), float(b)) for a, b in pts))

    # -- constructors -----------------------------------------------------

    @classmethod
    def identity(cls) -> "WeightingFunctionSpec":
        return cls(Family.IDENTITY)

    @classmethod
    def prelec(cls, gamma: float, beta: float = 1.0) -> "WeightingFunctionSpec":
        return cls(Family.PRELEC, {"gamma": gamma, "beta": beta})

    @classmethod
    def tk(cls, gamma: float) -> "WeightingFunctionSpec":
        return cls(Family.TK1992, {"gamma": gamma})

    @classmethod
    def tabulated(cls, p: Sequence[float], w: Sequence[float]) -> "WeightingFunctionSpec":
        return cls(Family.TABULATED, {}, tuple(zip(map(float, p), map(float, w))))

    # -- evaluation -------------------------------------------------------

    def raw(self, p):
        """Evaluate without the domain check. ``p`` must already lie in [0, 1]."""
        p = np.asarray(p, dtype=float)
        fam = self.family
        if fam is Family.IDENTITY:
            return p.copy() if p.ndim else p
        if fam is Family.PRELEC:
            g, b = self.params["gamma"], self.params["beta"]
            with np.errstate(divide="ignore"):
                nl = -np.log(p)
            return np.exp(-b * nl**g)
        if fam is Family.TK1992:
            g = self.params["gamma"]
            a = p**g
            return a / (a + (1.0 - p) ** g) ** (1.0 / g)
        return np.clip(self._interp(p), 0.0, 1.0)

    def __call__(self, p):
        arr = np.asarray(p, dtype=float)
        if np.any(~np.isfinite(arr)) or np.any(arr < 0) or np.any(arr > 1):
            raise DomainError(f"probability outside [0, 1]: {p!r}")
        out = self.raw(arr)
        return float(out) if out.ndim == 0 else out

    def describe(self) -> dict:
        d = {"family": self.family.value, "params": dict(self.params)}
        if self.table is not None:
            d["table_rows"] = len(self.table)
        return d


def eval_pwf(spec: WeightingFunctionSpec, p):
    return spec(p)


def load_tabulated_csv(path: str | Path) -> WeightingFunctionSpec:
    """Read a two-column (p, w) CSV.  Lines starting with '#' and a non-numeric header are skipped."""
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.reader(fh):
            if not rec or rec[0].lstrip().startswith("#"):
                continue
            try:
                rows.append((float(rec[0]), float(rec[1])))
            except (ValueError, IndexError):
                if rows:
                    raise ConfigError(f"malformed row in {path}: {rec}") from None
    if not rows:
        raise ConfigError(f"no (p, w) rows found in {path}")
    p, w = zip(*rows)
    return WeightingFunctionSpec.tabulated(p, w)


def fixed_point(spec: WeightingFunctionSpec, eps: float = FIXED_POINT_EPS) -> float:
    """Interior fixed point p* of w by bisection on [eps, 1 - eps].

    Bisection is run to floating-point exhaustion so that the bracket
    [lo, hi] always straddles the sign change.
    """
    if spec.family is Family.IDENTITY:
        raise DegenerateInputError("identity PWF: every probability is a fixed point")
    gap = lambda q: float(spec.raw(q)) - q  # noqa: E731
    lo, hi = eps, 1.0 - eps
    glo, ghi = gap(lo), gap(hi)
    if glo == 0.0:
        return lo
    if ghi == 0.0:
        return hi
    if (glo > 0) == (ghi > 0):
        raise NotFoundError(f"w(p) - p does not change sign on [{eps}, {1 - eps}]")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        gm = gap(mid)
        if gm == 0.0:
            return mid
        if (gm > 0) == (glo > 0):
            lo, glo = mid, gm
        else:
            hi = mid
    best = lo if abs(glo) <= abs(gap(hi)) else hi
    if abs(gap(best)) >= FIXED_POINT_TOL:
        raise NumericError(f"bisection stalled with |w(p)-p| = {abs(gap(best)):.3e}")
    return best


# -- partitions of unity ---------------------------------------------------


def _bump(s: np.ndarray) -> np.ndarray:
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out


@dataclass(frozen=True)
class ProbabilityPartition:
    centers: tuple[float, ...]
    half_widths: tuple[float, ...]
    grid: np.ndarray
    weights: np.ndarray  # (n_bumps, grid_n)
    covered: np.ndarray  # bool mask over grid
    max_deviation: float

    def evaluate(self, p) -> np.ndarray:
        """Normalised weights at arbitrary probabilities, shape (n_bumps, len(p))."""
        p = np.atleast_1d(np.asarray(p, dtype=float))
        raw = np.stack([_bump((p - c) / h) for c, h in zip(self.centers, self.half_widths)])
        total = raw.sum(axis=0)
        if np.any(total == 0):
            raise CoverageError("probability outside every support")
        return raw / total

    @property
    def strictly_fractional(self) -> bool:
        """True when every weight lies strictly inside (0, 1) on the interior of its own support."""
        for i, (c, h) in enumerate(zip(self.centers, self.half_widths)):
            on = self.covered & (np.abs(self.grid - c) < h)
            wi = self.weights[i, on]
            if np.any(wi >= 1.0) or np.any(wi <= 0.0):
                return False
        return True


def build_partition(centers: Sequence[float], half_widths: Sequence[float], grid_n: int = 1001) -> ProbabilityPartition:
    centers = tuple(float(c) for c in centers)
    half_widths = tuple(float(h) for h in half_widths)
    if len(centers) == 0 or len(centers) != len(half_widths):
        raise ConfigError("centers and half_widths must be non-empty and the same length")
    if any(not h > 0 for h in half_widths):
        raise ConfigError("half widths must be positive")
    if grid_n < 2:
        raise ConfigError("grid_n must be at least 2")
    grid = np.linspace(0.0, 1.0, int(grid_n))
    raw = np.stack([_bump((grid - c) / h) for c, h in zip(centers, half_widths)])
    total = raw.sum(axis=0)
    covered = total > 0
    interior = (grid > 0) & (grid < 1)
    gaps = grid[interior & ~covered]
    if gaps.size:
        raise CoverageError(f"supports leave {gaps.size} grid points uncovered, first gap near p={gaps[0]:.6g}")
    weights = np.zeros_like(raw)
    weights[:, covered] = raw[:, covered] / total[covered]
    dev = float(np.max(np.abs(weights[:, covered].sum(axis=0) - 1.0)))
    return ProbabilityPartition(centers, half_widths, grid, weights, covered, dev)


# -- reference point neighbourhoods ---------------------------------------


@dataclass(frozen=True)
class ReferencePointReport:
    x: float
    in_M: bool
    in_TK: bool
    in_MTK: bool
    u_gain: float
    u_loss: float
    d2_gain: float
    d2_loss: float

    def diagnostics(self) -> dict:
        return {"u(x)": self.u_gain, "u(-x)": self.u_loss, "u''(x)": self.d2_gain, "u''(-x)": self.d2_loss}


def _second(u, x: float) -> float:
    deriv = getattr(u, "derivative", None)
    if deriv is not None:
        return float(deriv(x, 2))
    return float(_fd.d2(u, x))


def mtk_membership(u: Callable[[float], float], x: float) -> ReferencePointReport:
    """Test whether the outcome pair (x, -x) lies in the M, TK and MTK neighbourhoods.

    ``u`` is any scalar callable; if it exposes ``derivative(x, order)`` that
    is used for u'', otherwise a central finite difference is taken.  The
    positive member of {x, -x} is treated as the gain.
    """
    if x == 0 or not math.isfinite(x):
        raise DomainError("membership is undefined at the reference point x = 0")
    g = abs(float(x))
    ug, ul = float(u(g)), float(u(-g))
    d2g, d2l = _second(u, g), _second(u, -g)
    in_m = ug > abs(ul)
    in_tk = d2g < 0 and d2l > 0
    return ReferencePointReport(float(x), in_m, in_tk, in_m and in_tk, ug, ul, d2g, d2l)
