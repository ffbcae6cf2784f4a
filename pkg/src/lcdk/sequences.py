"""Finite nonnegative sequences on integer intervals, reference measures and
the log-concavity / log-affinity / unimodality predicates.

Two scalar backends coexist: exact rationals (``fractions.Fraction`` or
``int`` values) and IEEE doubles.  A sequence is *rational* when every value
is an ``int`` or ``Fraction``; any float makes it a float sequence.  Exact
sequences are compared exactly.  Float sequences are compared in the log
domain with absolute tolerance ``FLOAT_TOL`` (a relative tolerance on the
cross-multiplied products).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence as Seq

import numpy as np

FLOAT_TOL = 1e-9
# float values below this are flushed to zero when materializing from log space
FLUSH = 1e-300


class PreconditionError(ValueError):
    """An operation was called outside its stated domain."""


def is_exact(x) -> bool:
    return isinstance(x, (int, Rational)) and not isinstance(x, bool)


def as_fraction(x, max_den: int = 10**6) -> Fraction:
    """Exact value of ``x``; floats are snapped to the nearest rational with a
    bounded denominator so that 0.1 means 1/10."""
    if is_exact(x):
        return Fraction(x)
    return Fraction(x).limit_denominator(max_den)


@dataclass(frozen=True)
class IntegerInterval:
    lo: int
    hi: int

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    def __len__(self) -> int:
        return self.hi - self.lo + 1

    def __iter__(self):
        return iter(range(self.lo, self.hi + 1))

    def __contains__(self, n) -> bool:
        return self.lo <= n <= self.hi

    def contains_interval(self, other: "IntegerInterval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def points(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1)

    @classmethod
    def parse(cls, text: str) -> "IntegerInterval":
        lo, hi = text.split(":")
        return cls(int(lo), int(hi))


@dataclass(frozen=True)
class Sequence:
    """Values ``values[i]`` at integer ``interval.lo + i``; zero outside."""

    interval: IntegerInterval
    values: tuple

    def __post_init__(self):
        vals = tuple(self.values)
        object.__setattr__(self, "values", vals)
        if len(vals) != len(self.interval):
            raise ValueError("values length does not match interval")
        if any(v < 0 for v in vals):
            raise ValueError("sequence values must be nonnegative")

    @classmethod
    def from_values(cls, values: Iterable, lo: int = 0):
        vals = tuple(values)
        return cls(IntegerInterval(lo, lo + len(vals) - 1), vals)

    @property
    def lo(self) -> int:
        return self.interval.lo

    @property
    def hi(self) -> int:
        return self.interval.hi

    @property
    def backend(self) -> str:
        return "rational" if all(is_exact(v) for v in self.values) else "float"

    def __len__(self):
        return len(self.values)

    def __getitem__(self, n: int):
        if self.lo <= n <= self.hi:
            return self.values[n - self.lo]
        return 0

    def items(self):
        return zip(range(self.lo, self.hi + 1), self.values)

    def array(self) -> np.ndarray:
        return np.array([float(v) for v in self.values])

    def total(self):
        if self.backend == "rational":
            return sum(self.values, Fraction(0))
        return math.fsum(float(v) for v in self.values)

    def support(self) -> list[int]:
        return [n for n, v in self.items() if v > 0]

    def restrict(self, interval: IntegerInterval) -> "Sequence":
        return Sequence(interval, tuple(self[n] for n in interval))

    def trim(self) -> "Sequence":
        """Shrink the interval to the hull of the positive entries."""
        supp = self.support()
        if not supp:
            return Sequence(IntegerInterval(self.lo, self.lo), (self.values[0] * 0,))
        return self.restrict(IntegerInterval(supp[0], supp[-1]))


class ProbSequence(Sequence):
    """A sequence summing to one (exactly for the rational backend)."""

    def __post_init__(self):
        super().__post_init__()
        total = self.total()
        if self.backend == "rational":
            if total != 1:
                raise ValueError(f"probability sequence sums to {total}")
        elif abs(total - 1.0) > FLOAT_TOL:
            raise ValueError(f"probability sequence sums to {total}")


def _hull(f: Sequence, g: Sequence) -> IntegerInterval:
    return IntegerInterval(min(f.lo, g.lo), max(f.hi, g.hi))


# ---------------------------------------------------------------------------
# reference measures


@dataclass(frozen=True)
class ReferenceMeasure:
    """A positive mass function ``q`` with contiguous support.

    ``kind`` is one of counting, poisson, binomial, qgauss, custom.  Masses
    are unnormalized: Poisson uses ``lam**n / n!``, Binomial(m) uses
    ``C(m, n)`` and the q-Gaussian uses ``q**(-n**2/2)``.  ``support`` is the
    finite window the caller works in; ``None`` means all of Z (counting
    only).
    """

    kind: str
    params: tuple = ()
    support: IntegerInterval | None = None
    _custom: Sequence | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in ("counting", "poisson", "binomial", "qgauss", "custom"):
            raise ValueError(f"unknown reference kind {self.kind!r}")
        if self.kind == "custom":
            seq = self._custom
            if seq is None or any(v <= 0 for v in seq.values):
                raise ValueError("custom reference needs strictly positive masses")
            object.__setattr__(self, "support", seq.interval)
            object.__setattr__(self, "params", tuple(seq.values))
        if self.kind == "binomial":
            m = self.params[0]
            win = self.support or IntegerInterval(0, m)
            if not IntegerInterval(0, m).contains_interval(win):
                raise ValueError("binomial window must lie in [0, m]")
            object.__setattr__(self, "support", win)
        if self.kind == "poisson" and (self.support is None or self.support.lo < 0):
            raise ValueError("poisson reference needs a finite window inside N")
        if self.kind in ("poisson", "qgauss") and self.params[0] <= 0:
            raise ValueError("parameter must be positive")

    # constructors ---------------------------------------------------------
    @classmethod
    def counting(cls, support: IntegerInterval | None = None):
        return cls("counting", (), support)

    @classmethod
    def poisson(cls, lam, support: IntegerInterval):
        return cls("poisson", (lam,), support)

    @classmethod
    def binomial(cls, m: int, support: IntegerInterval | None = None):
        return cls("binomial", (int(m),), support)

    @classmethod
    def qgauss(cls, q, support: IntegerInterval | None = None):
        return cls("qgauss", (q,), support)

    @classmethod
    def custom(cls, masses: Sequence):
        return cls("custom", (), masses.interval, masses)

    # masses ---------------------------------------------------------------
    def covers(self, interval: IntegerInterval) -> bool:
        return self.support is None or self.support.contains_interval(interval)

    @property
    def exact(self) -> bool:
        """Whether masses are rational (so exact materialization is possible)."""
        if self.kind in ("counting", "binomial"):
            return True
        if self.kind == "poisson":
            return is_exact(self.params[0])
        if self.kind == "custom":
            return all(is_exact(v) for v in self.params)
        return False

    def mass(self, n: int):
        if self.support is not None and n not in self.support:
            return 0
        if self.kind == "counting":
            return 1
        if self.kind == "poisson":
            lam = self.params[0]
            if is_exact(lam):
                return Fraction(lam) ** n / math.factorial(n)
            return math.exp(self.log_mass(n))
        if self.kind == "binomial":
            return math.comb(self.params[0], n)
        if self.kind == "qgauss":
            return math.exp(self.log_mass(n))
        return self._custom[n]

    def log_mass(self, n: int) -> float:
        if self.kind == "counting":
            return 0.0
        if self.kind == "poisson":
            return n * math.log(self.params[0]) - math.lgamma(n + 1)
        if self.kind == "binomial":
            m = self.params[0]
            return math.lgamma(m + 1) - math.lgamma(n + 1) - math.lgamma(m - n + 1)
        if self.kind == "qgauss":
            return -0.5 * n * n * math.log(self.params[0])
        return math.log(self._custom[n])

    def log_masses(self, interval: IntegerInterval) -> np.ndarray:
        return np.array([self.log_mass(n) for n in interval])

    def curvature(self, n: int):
        """``q(n)^2 / (q(n-1) q(n+1))``; exact whenever it is rational."""
        if self.kind == "counting":
            return 1
        if self.kind == "poisson":
            return Fraction(n + 1, n)
        if self.kind == "binomial":
            m = self.params[0]
            return Fraction((n + 1) * (m - n + 1), n * (m - n))
        if self.kind == "qgauss":
            return self.params[0]
        q = self._custom
        a, b, c = q[n - 1], q[n], q[n + 1]
        if all(is_exact(v) for v in (a, b, c)):
            return Fraction(b) ** 2 / (Fraction(a) * c)
        return float(b) ** 2 / (float(a) * float(c))

    def log_curvature(self, n: int) -> float:
        c = self.curvature(n)
        return math.log(c) if is_exact(c) else math.log(float(c))


COUNTING = ReferenceMeasure.counting()


# ---------------------------------------------------------------------------
# predicates


def _check_reference(f: Sequence, gamma: ReferenceMeasure) -> None:
    supp = f.support()
    if supp and not gamma.covers(IntegerInterval(supp[0], supp[-1])):
        raise PreconditionError("support of f is not inside the reference support")


def _contiguous(f: Sequence) -> bool:
    supp = f.support()
    return not supp or supp[-1] - supp[0] + 1 == len(supp)


def _three_point_slacks(f: Sequence, gamma: ReferenceMeasure):
    """Yield ``(exact, lhs, rhs)`` for every n where f(n-1), f(n), f(n+1) > 0.

    Exact form: ``f(n)^2`` vs ``kappa(n) f(n-1) f(n+1)``.
    Float form: ``2 log f(n)`` vs ``log kappa(n) + log f(n-1) + log f(n+1)``.
    Positions with a zero neighbour hold trivially once support is contiguous.
    """
    exact = f.backend == "rational"
    for n in range(f.lo + 1, f.hi):
        a, b, c = f[n - 1], f[n], f[n + 1]
        if a == 0 or b == 0 or c == 0:
            continue
        kappa = gamma.curvature(n)
        if exact and is_exact(kappa):
            yield True, Fraction(b) ** 2, kappa * Fraction(a) * c
        else:
            yield False, 2 * math.log(b), gamma.log_curvature(n) + math.log(a) + math.log(c)


def is_log_concave(f: Sequence, gamma: ReferenceMeasure = COUNTING, tol: float = FLOAT_TOL) -> bool:
    _check_reference(f, gamma)
    if not _contiguous(f):
        return False
    for exact, lhs, rhs in _three_point_slacks(f, gamma):
        if exact:
            if lhs < rhs:
                return False
        elif lhs - rhs < -tol:
            return False
    return True


def is_log_affine(f: Sequence, gamma: ReferenceMeasure = COUNTING, tol: float = FLOAT_TOL) -> bool:
    """Equality in the three-point relation strictly inside the support.

    A truncated ``C p^n q(n)`` is log-affine even though the relation fails at
    the support edges (the right-hand side picks up a zero there).
    """
    _check_reference(f, gamma)
    if not _contiguous(f):
        return False
    for exact, lhs, rhs in _three_point_slacks(f, gamma):
        if exact:
            if lhs != rhs:
                return False
        elif abs(lhs - rhs) > tol:
            return False
    return True


def is_log_concave_gap_form(f: Sequence) -> bool:
    """``f(k+m) f(k+p) >= f(k) f(k+m+p)`` for all k, m, p >= 0 (counting)."""
    v = f.values
    n = len(v)
    exact = f.backend == "rational"
    for k in range(n):
        for m in range(1, n - k):
            for p in range(1, n - k - m):
                lhs = v[k + m] * v[k + p]
                rhs = v[k] * v[k + m + p]
                if exact:
                    if lhs < rhs:
                        return False
                elif rhs > 0 and (lhs == 0 or math.log(lhs) - math.log(rhs) < -FLOAT_TOL):
                    return False
    return True


def is_unimodal(f: Sequence) -> bool:
    v = f.values
    i = 0
    while i + 1 < len(v) and v[i + 1] >= v[i]:
        i += 1
    while i + 1 < len(v) and v[i + 1] <= v[i]:
        i += 1
    return i == len(v) - 1


# ---------------------------------------------------------------------------
# operations


def pointwise_min(f: Sequence, g: Sequence) -> Sequence:
    iv = _hull(f, g)
    return Sequence(iv, tuple(min(f[n], g[n]) for n in iv))


def positive_part_diff(f: Sequence, g: Sequence) -> Sequence:
    iv = _hull(f, g)
    return Sequence(iv, tuple(max(f[n] - g[n], 0) for n in iv))


def convolve(f: Sequence, g: Sequence) -> Sequence:
    iv = IntegerInterval(f.lo + g.lo, f.hi + g.hi)
    if f.backend == "rational" and g.backend == "rational":
        out = [Fraction(0)] * len(iv)
        for i, a in enumerate(f.values):
            if a == 0:
                continue
            for j, b in enumerate(g.values):
                out[i + j] += a * b
        return Sequence(iv, tuple(out))
    return Sequence(iv, tuple(np.convolve(f.array(), g.array()).tolist()))


def normalize(f: Sequence) -> ProbSequence:
    total = f.total()
    if total <= 0:
        raise ValueError("cannot normalize a sequence with zero mass")
    if f.backend == "rational":
        return ProbSequence(f.interval, tuple(Fraction(v) / total for v in f.values))
    return ProbSequence(f.interval, tuple(float(v) / total for v in f.values))


def mean(mu: ProbSequence):
    if mu.backend == "rational":
        return sum((n * Fraction(v) for n, v in mu.items()), Fraction(0))
    return math.fsum(n * v for n, v in mu.items())


def moment(mu: ProbSequence, r):
    """``E[X^r]``; non-integer ``r`` needs support in N."""
    integer_r = float(r).is_integer()
    if not integer_r and any(n < 0 and v > 0 for n, v in mu.items()):
        raise PreconditionError("non-integer moment needs nonnegative support")
    if integer_r and mu.backend == "rational":
        r = int(r)
        return sum((Fraction(n) ** r * v for n, v in mu.items()), Fraction(0))
    return math.fsum(float(n) ** r * float(v) for n, v in mu.items() if v > 0)


def tail(mu: ProbSequence, t):
    """``P(X > t)``."""
    zero = Fraction(0) if mu.backend == "rational" else 0.0
    return sum((v for n, v in mu.items() if n > t), zero)


def median_range(mu: ProbSequence) -> tuple[int, int]:
    """Smallest and largest integer m with P(X >= m) >= 1/2 and P(X <= m) >= 1/2.

    Float masses are converted to Fractions exactly, so the comparison is
    against the stored total with no rounding slop.
    """
    masses = [(n, Fraction(v)) for n, v in mu.items()]
    total = sum((v for _, v in masses), Fraction(0))
    cdf = Fraction(0)
    lower = upper = None
    for n, v in masses:
        at_or_above = total - cdf
        cdf += v
        if 2 * cdf >= total and 2 * at_or_above >= total:
            if lower is None:
                lower = n
            upper = n
    assert lower is not None
    return lower, upper


def median(mu: ProbSequence) -> int:
    return median_range(mu)[0]


# ---------------------------------------------------------------------------
# log-affine specs


@dataclass(frozen=True)
class LogAffineSpec:
    """``f(n) = C p^n q(n)`` on ``[k, l]``, stored as ``log C`` and ``log p``.

    Log storage keeps ``p`` in ``[e^-40, e^40]`` representable on long
    supports.  ``exact_p`` optionally carries a rational ratio for exact
    materialization.
    """

    log_C: float
    log_p: float
    k: int
    l: int
    reference: ReferenceMeasure = COUNTING
    exact_p: Fraction | None = None

    def __post_init__(self):
        if self.k > self.l:
            raise ValueError("k must not exceed l")

    @property
    def C(self) -> float:
        return math.exp(self.log_C)

    @property
    def p(self) -> float:
        return math.exp(self.log_p)

    @property
    def interval(self) -> IntegerInterval:
        return IntegerInterval(self.k, self.l)

    @classmethod
    def normalized(cls, log_p: float, k: int, l: int, reference: ReferenceMeasure = COUNTING):
        iv = IntegerInterval(k, l)
        w = iv.points() * log_p + reference.log_masses(iv)
        top = w.max()
        log_z = top + math.log(np.exp(w - top).sum())
        return cls(-log_z, log_p, k, l, reference)

    @classmethod
    def exact(cls, p, k: int, l: int, reference: ReferenceMeasure = COUNTING):
        """Normalized spec with a rational ratio ``p``."""
        p = Fraction(p)
        total = sum(p**n * reference.mass(n) for n in range(k, l + 1))
        return cls(-math.log(total), math.log(p), k, l, reference, p)

    def sort_key(self):
        return (self.k, self.l, self.log_p)

    def materialize(self, backend: str = "float") -> Sequence:
        iv = self.interval
        if backend == "rational":
            if self.exact_p is None or not self.reference.exact:
                raise PreconditionError("exact materialization needs rational p and masses")
            w = [self.exact_p**n * self.reference.mass(n) for n in iv]
            total = sum(w, Fraction(0))
            return ProbSequence(iv, tuple(x / total for x in w))
        logw = self.log_C + iv.points() * self.log_p + self.reference.log_masses(iv)
        vals = np.exp(logw)
        vals[vals < FLUSH] = 0.0
        return Sequence(iv, tuple(vals.tolist()))


# ---------------------------------------------------------------------------
# samplers


def _log_weight_rows(rng: np.random.Generator, n_points: int, size: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Random concave log-weights with random contiguous sub-support.

    Returns ``(a, b, logw)`` with ``logw[i, j] = -inf`` outside ``[a_i, b_i]``
    (offsets relative to the window start).
    """
    ends = rng.integers(0, n_points, size=(size, 2))
    a = ends.min(axis=1)
    b = ends.max(axis=1)
    slope0 = rng.uniform(-3.0, 3.0, size=(size, 1))
    scale = np.exp(rng.uniform(math.log(1e-3), math.log(3.0), size=(size, 1)))
    dec = rng.exponential(1.0, size=(size, n_points)) * scale
    slopes = slope0 - np.cumsum(dec, axis=1)
    logw = np.zeros((size, n_points))
    logw[:, 1:] = np.cumsum(slopes[:, :-1], axis=1)
    idx = np.arange(n_points)
    # anchor at the sub-support start so the concave profile begins there
    logw = logw - logw[np.arange(size), a][:, None]
    logw = np.where((idx >= a[:, None]) & (idx <= b[:, None]), logw, -np.inf)
    return a, b, logw


def sample_log_concave(rng: np.random.Generator, interval: IntegerInterval,
                       reference: ReferenceMeasure = COUNTING, size: int = 1) -> np.ndarray:
    """Batch float sampler: rows are reference-log-concave pmfs on ``interval``."""
    if not reference.covers(interval):
        raise PreconditionError("sampling window outside the reference support")
    _, _, logw = _log_weight_rows(rng, len(interval), size)
    logw = logw + reference.log_masses(interval)[None, :]
    logw -= logw.max(axis=1, keepdims=True)
    w = np.exp(logw)
    w[w < FLUSH] = 0.0
    return w / w.sum(axis=1, keepdims=True)


def _rational_log_concave(rng: np.random.Generator, interval: IntegerInterval,
                          reference: ReferenceMeasure) -> ProbSequence:
    n_points = len(interval)
    a, b = sorted(int(x) for x in rng.integers(0, n_points, size=2))
    ratio = Fraction(int(rng.integers(1, 10)), int(rng.integers(1, 10)))
    vals = [Fraction(0)] * n_points
    cur = Fraction(1)
    for j in range(a, b + 1):
        vals[j] = cur * reference.mass(interval.lo + j)
        cur *= ratio
        # nonincreasing ratios: multiply by a factor in (0, 1]
        if rng.random() < 0.5:
            ratio *= Fraction(int(rng.integers(1, 5)), 4)
    return normalize(Sequence(interval, tuple(vals)))


def random_log_concave(seed, interval: IntegerInterval, reference: ReferenceMeasure = COUNTING,
                       backend: str = "float") -> ProbSequence:
    """One random reference-log-concave law; deterministic given ``seed``."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if backend == "rational":
        if not reference.exact:
            raise PreconditionError("rational sampling needs rational reference masses")
        return _rational_log_concave(rng, interval, reference)
    row = sample_log_concave(rng, interval, reference, 1)[0]
    return ProbSequence(interval, tuple(row.tolist()))


# ---------------------------------------------------------------------------
# JSON


def _encode_value(v):
    if isinstance(v, bool):
        raise TypeError("booleans are not sequence values")
    if is_exact(v):
        v = Fraction(v)
        return f"{v.numerator}/{v.denominator}"
    return float(v)


def _decode_value(v, backend: str):
    if isinstance(v, str):
        if backend == "float":
            return float(Fraction(v))
        return Fraction(v)
    if isinstance(v, int) and not isinstance(v, bool):
        return Fraction(v) if backend == "rational" else float(v)
    if isinstance(v, float):
        if backend == "rational":
            raise ValueError("float value in a rational sequence")
        return v
    raise ValueError(f"bad sequence value {v!r}")


def sequence_to_json(f: Sequence) -> dict:
    return {"lo": f.lo, "hi": f.hi, "values": [_encode_value(v) for v in f.values],
            "backend": f.backend}


def sequence_from_json(obj: dict) -> Sequence:
    try:
        lo, hi, raw = int(obj["lo"]), int(obj["hi"]), obj["values"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed sequence object: {exc}") from None
    backend = obj.get("backend", "rational" if all(isinstance(v, (str, int)) for v in raw) else "float")
    if backend not in ("rational", "float"):
        raise ValueError(f"unknown backend {backend!r}")
    return Sequence(IntegerInterval(lo, hi), tuple(_decode_value(v, backend) for v in raw))


def reference_to_json(gamma: ReferenceMeasure) -> dict:
    out: dict = {"kind": gamma.kind, "params": {}}
    if gamma.kind == "poisson":
        out["params"] = {"lambda": _encode_value(gamma.params[0])}
    elif gamma.kind == "binomial":
        out["params"] = {"m": gamma.params[0]}
    elif gamma.kind == "qgauss":
        out["params"] = {"q": _encode_value(gamma.params[0])}
    elif gamma.kind == "custom":
        out["params"] = {"masses": [_encode_value(v) for v in gamma.params]}
    if gamma.support is not None:
        out["lo"], out["hi"] = gamma.support.lo, gamma.support.hi
    return out


def _param(v):
    return Fraction(v) if isinstance(v, (str, int)) and not isinstance(v, bool) else float(v)


def reference_from_json(obj: dict) -> ReferenceMeasure:
    kind = obj.get("kind")
    params = obj.get("params", {}) or {}
    support = IntegerInterval(int(obj["lo"]), int(obj["hi"])) if "lo" in obj else None
    if kind == "counting":
        return ReferenceMeasure.counting(support)
    if kind == "poisson":
        return ReferenceMeasure.poisson(_param(params["lambda"]), support)
    if kind == "binomial":
        return ReferenceMeasure.binomial(int(params["m"]), support)
    if kind == "qgauss":
        return ReferenceMeasure.qgauss(_param(params["q"]), support)
    if kind == "custom":
        masses = [_param(v) for v in params["masses"]]
        return ReferenceMeasure.custom(Sequence(IntegerInterval(support.lo, support.hi), tuple(masses)))
    raise ValueError(f"unknown reference kind {kind!r}")


def as_sequence(values: Seq, lo: int = 0) -> Sequence:
    return Sequence.from_values(values, lo)
