"""Risk operators on utility functions and the algebra of infinitesimal vectors.

Scalar operators (logarithmic differential, Arrow-Pratt, prudence, risk
torsion) act on a :class:`UtilitySampler`.  The vector part builds
structure constants from a pair of tangent vectors, bounds the loss
aversion index, and provides matrix Lie brackets and group commutators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from itertools import product
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from . import _fd
from .errors import (
    ConfigError,
    DimensionError,
    DomainError,
    InfeasibleError,
    InversionError,
    NumericError,
    StructureIndexError,
    UndefinedOperatorError,
)

__all__ = [
    "UtilitySampler",
    "InfinitesimalPair",
    "StructureTensor",
    "RiskTorsion",
    "LambdaEstimate",
    "log_diff",
    "arrow_pratt",
    "prudence",
    "risk_torsion",
    "infinitesimal_vector",
    "structure_constants",
    "lie_bracket",
    "group_commutator",
    "estimate_lambda",
    "lambda_bound",
    "gauge_rhs",
    "hardy_threshold",
    "classify_regime",
    "antiderivative",
    "so3_generators",
]

ZERO_DERIV = 1e-12
KINK_TOL = 1e-9
REGIME_TOL = 1e-12


@dataclass(frozen=True)
class UtilitySampler:
    """Scalar utility with derivatives up to order 3.

    Built-in families carry closed-form derivatives.  Custom callables fall
    back to 5-point central differences (steps 1e-6, 1e-5, 1e-3 for orders
    1, 2, 3) for any order not supplied.
    """

    func: Callable[[float], float]
    derivs: tuple[Callable[[float], float], ...] = ()
    family: str = "custom"
    params: Mapping[str, float] = field(default_factory=dict)
    finite_difference: bool = False
    domain: Callable[[float], None] | None = None

    def _check(self, x: float):
        if not math.isfinite(x):
            raise DomainError(f"non-finite argument {x}")
        if self.domain is not None:
            self.domain(x)

    def __call__(self, x: float) -> float:
        self._check(x)
        return float(self.func(x))

    def derivative(self, x: float, order: int) -> float:
        self._check(x)
        if order == 0:
            return float(self.func(x))
        if order > 3:
            raise ConfigError("derivatives above order 3 are not supported")
        if not self.finite_difference and order <= len(self.derivs):
            return float(self.derivs[order - 1](x))
        return float(_fd.derivative(self.func, x, order))

    def derivative_sampler(self) -> "UtilitySampler":
        """Sampler for u'.  Its k-th derivative is u's (k+1)-th, taken directly, never nested."""
        parent = self
        ders = tuple((lambda k: (lambda x: parent.derivative(x, k)))(k) for k in (2, 3))
        return UtilitySampler(lambda x: parent.derivative(x, 1), ders, f"d({self.family})", dict(self.params), False, self.domain)

    def with_finite_differences(self) -> "UtilitySampler":
        return replace(self, finite_difference=True)

    # -- families -------------------------------------------------------

    @classmethod
    def cara(cls, a: float) -> "UtilitySampler":
        """-exp(-a x)/a."""
        if not a > 0:
            raise ConfigError(f"CARA needs a > 0, got {a}")
        e = lambda x: math.exp(-a * x)  # noqa: E731
        return cls(lambda x: -e(x) / a, (e, lambda x: -a * e(x), lambda x: a * a * e(x)), "cara", {"a": a})

    @classmethod
    def crra(cls, rho: float) -> "UtilitySampler":
        """x**(1-rho)/(1-rho) on x > 0; rho = 1 (log utility) is excluded."""
        if not rho > 0 or rho == 1:
            raise ConfigError(f"CRRA needs rho > 0 and rho != 1, got {rho}")

        def dom(x):
            if x <= 0:
                raise DomainError(f"CRRA utility is defined for x > 0, got {x}")

        return cls(
            lambda x: x ** (1 - rho) / (1 - rho),
            (lambda x: x**-rho, lambda x: -rho * x ** (-rho - 1), lambda x: rho * (rho + 1) * x ** (-rho - 2)),
            "crra",
            {"rho": rho},
            domain=dom,
        )

    @classmethod
    def linear(cls) -> "UtilitySampler":
        return cls(lambda x: x, (lambda x: 1.0, lambda x: 0.0, lambda x: 0.0), "linear", {})

    @classmethod
    def tk_value(cls, alpha_g: float = 0.88, beta_l: float = 0.88, lam: float = 2.25) -> "UtilitySampler":
        """x**alpha_g for gains, -lam * (-x)**beta_l for losses; undefined at the kink x = 0."""
        if not (0 < alpha_g <= 1 and 0 < beta_l <= 1):
            raise ConfigError("TK value exponents must lie in (0, 1]")
        if not lam > 0:
            raise ConfigError("loss aversion lambda must be positive")
        a, b = alpha_g, beta_l

        def dom(x):
            if abs(x) < KINK_TOL:
                raise DomainError("TK value function is not differentiable at the reference point")

        def f(x):
            return x**a if x > 0 else -lam * (-x) ** b if x < 0 else 0.0

        def f1(x):
            return a * x ** (a - 1) if x > 0 else lam * b * (-x) ** (b - 1)

        def f2(x):
            return a * (a - 1) * x ** (a - 2) if x > 0 else -lam * b * (b - 1) * (-x) ** (b - 2)

        def f3(x):
            return a * (a - 1) * (a - 2) * x ** (a - 3) if x > 0 else lam * b * (b - 1) * (b - 2) * (-x) ** (b - 3)

        return cls(f, (f1, f2, f3), "tkvalue", {"alpha_g": a, "beta_l": b, "lambda": lam}, domain=dom)

    @classmethod
    def custom(cls, func: Callable[[float], float], derivs: Sequence[Callable[[float], float]] = ()) -> "UtilitySampler":
        return cls(func, tuple(derivs), "custom", {})

    @classmethod
    def tabulated(cls, x: Sequence[float], u: Sequence[float]) -> "UtilitySampler":
        cs = CubicSpline(np.asarray(x, dtype=float), np.asarray(u, dtype=float))
        lo, hi = float(x[0]), float(x[-1])

        def dom(v):
            if not lo <= v <= hi:
                raise DomainError(f"{v} outside tabulated range [{lo}, {hi}]")

        ders = tuple((lambda k: (lambda v: float(cs(v, k))))(k) for k in (1, 2, 3))
        return cls(lambda v: float(cs(v)), ders, "tabulated", {}, domain=dom)


# -- scalar operators -------------------------------------------------------


def log_diff(u: UtilitySampler, x: float) -> float:
    """sgn(u'(x)) * ln|u'(x)|."""
    d = u.derivative(x, 1)
    if abs(d) <= ZERO_DERIV:
        raise UndefinedOperatorError(f"ln D u is undefined where u'(x) = 0 (x={x})")
    return math.copysign(math.log(abs(d)), d)


def arrow_pratt(u: UtilitySampler, x: float) -> float:
    """-u''(x) / u'(x)."""
    d1 = u.derivative(x, 1)
    if abs(d1) <= ZERO_DERIV:
        raise UndefinedOperatorError(f"Arrow-Pratt operator undefined where u'(x) = 0 (x={x})")
    return -u.derivative(x, 2) / d1


def prudence(u: UtilitySampler, x: float) -> float:
    """-u'''(x) / u''(x)."""
    d2 = u.derivative(x, 2)
    if abs(d2) <= ZERO_DERIV:
        raise UndefinedOperatorError(f"prudence undefined where u''(x) = 0 (x={x})")
    return -u.derivative(x, 3) / d2


@dataclass(frozen=True)
class RiskTorsion:
    ra: float
    rs: float
    torsion: float


def risk_torsion(u: UtilitySampler, x: float) -> RiskTorsion:
    # skew relation: the risk-seeking operation is the negated risk-averse one
    ra = arrow_pratt(u, x)
    rs = -ra
    return RiskTorsion(ra, rs, ra - rs)


def antiderivative(u: Callable[[float], float], x0: float, x: float, n: int = 1024) -> float:
    """Composite Simpson integral of ``u`` from x0 to x."""
    if n % 2:
        n += 1
    s = np.linspace(x0, x, n + 1)
    y = np.array([float(u(v)) for v in s])
    if not np.all(np.isfinite(y)):
        raise NumericError("non-finite integrand sample")
    h = (x - x0) / n
    return float(h / 3 * (y[0] + y[-1] + 4 * y[1:-1:2].sum() + 2 * y[2:-1:2].sum()))


# -- infinitesimal vectors and structure constants ------------------------


def infinitesimal_vector(curve) -> np.ndarray:
    """Tangent x'(0) of a curve (anything with ``derivative(t, order)`` or a plain callable)."""
    deriv = getattr(curve, "derivative", None)
    if deriv is not None:
        v = np.asarray(deriv(0.0, 1), dtype=float)
    else:
        v = np.asarray(_fd.d1(lambda t: np.asarray(curve(t), dtype=float), 0.0), dtype=float)
    if not np.all(np.isfinite(v)):
        raise NumericError("non-finite tangent vector")
    return np.atleast_1d(v)


@dataclass(frozen=True)
class InfinitesimalPair:
    alpha: np.ndarray
    beta: np.ndarray
    r: float = 0.5

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.alpha, dtype=float))
        b = np.atleast_1d(np.asarray(self.beta, dtype=float))
        if a.shape != b.shape or a.ndim != 1:
            raise DimensionError(f"alpha and beta must be vectors of equal length, got {a.shape} and {b.shape}")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ConfigError("infinitesimal vectors must be finite")
        if not self.r > 0:
            raise ConfigError("radius r must be positive")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)
        object.__setattr__(self, "r", float(self.r))

    @property
    def n(self) -> int:
        return self.alpha.size

    def circle_residual(self, i: int, j: int) -> float:
        return abs(self.alpha[i] ** 2 + self.beta[j] ** 2 - self.r**2)

    def on_circle(self, pairs: Sequence[tuple[int, int]], tol: float = 1e-9) -> bool:
        return all(self.circle_residual(i, j) < tol for i, j in pairs)

    def products(self) -> np.ndarray:
        return np.outer(self.alpha, self.beta)


@dataclass(frozen=True)
class StructureTensor:
    """theta[i, j]; a, a_hat, c indexed [k, i, j]."""

    theta: np.ndarray
    a: np.ndarray
    a_hat: np.ndarray
    c: np.ndarray

    def to_dict(self) -> dict:
        return {"theta": self.theta.tolist(), "a": self.a.tolist(), "a_hat": self.a_hat.tolist(), "c": self.c.tolist()}


def structure_constants(pair: InfinitesimalPair) -> StructureTensor:
    al, be = pair.alpha, pair.beta
    n = pair.n
    prod_ = np.outer(al, be)
    for i, j in product(range(n), range(n)):
        if prod_[i, j] == 0:
            raise StructureIndexError(f"alpha[{i}] * beta[{j}] = 0; theta[{i},{j}] undefined", (i, j))
    sums = al + be
    for k in range(n):
        if sums[k] == 0:
            raise StructureIndexError(f"alpha[{k}] + beta[{k}] = 0; a_hat[{k},.,.] undefined", (k,))
    theta = (al[:, None] ** 2 + be[None, :] ** 2) / prod_
    a = np.broadcast_to(2.0 + theta, (n, n, n)).copy()
    a_hat = (2.0 / sums)[:, None, None] * a
    c = -(a_hat + a_hat.transpose(0, 2, 1))
    return StructureTensor(theta, a, a_hat, c)


# -- loss aversion ------------------------------------------------------------


@dataclass(frozen=True)
class LambdaEstimate:
    upper_bound: float
    inf_product: float
    argmin: tuple[int, int]
    factor: float = 1.0

    def to_dict(self) -> dict:
        return {"upper_bound": self.upper_bound, "inf_product": self.inf_product, "argmin": list(self.argmin), "factor": self.factor}


def lambda_bound(r: float, inf_product: float, factor: float = 1.0) -> float:
    """r**2 / (factor * inf_product) - 1, with the domain and feasibility checks."""
    if not 0 < r < 1:
        raise DomainError(f"radius must lie in (0, 1), got {r}")
    if not inf_product > 0:
        raise DomainError(f"infimum of alpha_i*beta_j must be positive, got {inf_product}")
    bound = r * r / (factor * inf_product) - 1.0
    if bound <= 0:
        raise InfeasibleError(f"bound {bound:.6g} leaves no room for lambda > 0")
    return bound


def estimate_lambda(pair: InfinitesimalPair, pairs: Sequence[tuple[int, int]] | None = None, hardy_factor: bool = False) -> LambdaEstimate:
    """Upper bound on the loss aversion index from the smallest tangent product.

    ``pairs`` restricts the infimum to declared (i, j) index pairs.  With
    ``hardy_factor`` the factor-2 threshold r**2/(2 inf) - 1 is returned instead.
    """
    P = pair.products()
    idx = list(pairs) if pairs is not None else list(product(range(pair.n), range(pair.n)))
    if not idx:
        raise ConfigError("no (i, j) pairs declared")
    i, j = min(idx, key=lambda ij: P[ij])
    m = float(P[i, j])
    factor = 2.0 if hardy_factor else 1.0
    return LambdaEstimate(lambda_bound(pair.r, m, factor), m, (int(i), int(j)), factor)


def gauge_rhs(alpha_i: float, beta_j: float, r: float, lam: float) -> float:
    """(2 alpha_i beta_j (1 + lam) - r**2) / lam: the value alpha_j**2 + beta_i**2 must take."""
    if lam == 0:
        raise DomainError("gauge relation requires lambda != 0")
    return (2 * alpha_i * beta_j * (1 + lam) - r * r) / lam


def hardy_threshold(r: float, prod_ij: float) -> float:
    """lambda at which the gauge right side changes sign."""
    return r * r / (2 * prod_ij) - 1.0


def classify_regime(alpha_i: float, beta_j: float, r: float, tol: float = REGIME_TOL) -> str:
    """'annulus' if 4 a b - r^2 > tol, 'complex' if < -tol, else 'boundary'."""
    if not r > 0:
        raise ConfigError("radius must be positive")
    return _regime(4 * alpha_i * beta_j - r * r, tol)


def classify_product(prod_ij: float, r: float, tol: float = REGIME_TOL) -> str:
    if not r > 0:
        raise ConfigError("radius must be positive")
    return _regime(4 * prod_ij - r * r, tol)


def _regime(v: float, tol: float) -> str:
    if v > tol:
        return "annulus"
    if v < -tol:
        return "complex"
    return "boundary"


# -- matrix Lie algebra -------------------------------------------------------


def _square(A, name: str) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {A.shape}")
    return A


def lie_bracket(A, B) -> np.ndarray:
    A, B = _square(A, "A"), _square(B, "B")
    if A.shape != B.shape:
        raise DimensionError(f"shape mismatch {A.shape} vs {B.shape}")
    return A @ B - B @ A


def group_commutator(X, Y) -> np.ndarray:
    """X^-1 Y^-1 X Y."""
    X, Y = _square(X, "X"), _square(Y, "Y")
    if X.shape != Y.shape:
        raise DimensionError(f"shape mismatch {X.shape} vs {Y.shape}")
    for name, M in (("X", X), ("Y", Y)):
        if not np.isfinite(np.linalg.cond(M)) or np.linalg.cond(M) >= 1e12:
            raise InversionError(f"{name} is singular or ill-conditioned")
    return np.linalg.inv(X) @ np.linalg.inv(Y) @ X @ Y


def so3_generators() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """L_x, L_y, L_z with [L_x, L_y] = L_z."""
    Lx = np.array([[0.0, 0, 0], [0, 0, -1], [0, 1, 0]])
    Ly = np.array([[0.0, 0, 1], [0, 0, 0], [-1, 0, 0]])
    Lz = np.array([[0.0, -1, 0], [1, 0, 0], [0, 0, 0]])
    return Lx, Ly, Lz
