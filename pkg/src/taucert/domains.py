"""Scalar domains for dense forms and condition matrices.

Three domains are supported:

* ``rational`` -- exact arithmetic on Python ints / ``fractions.Fraction``
  stored in object arrays.
* ``prime`` -- the prime field F_p.  Elements are stored reduced to
  ``[0, p)``.  When ``(p - 1)**2`` fits in a signed 64-bit integer the
  arrays are ``int64`` and every product is reduced immediately; larger
  primes fall back to object arrays (exact but slower).
* ``float`` -- binary64, used only by the uniqueness lab.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

#: Default certification prime (2^31 - 1).  Small enough for int64 elimination.
DEFAULT_PRIME = 2147483647
#: Backup prime used when a trial over the default prime is inconclusive.
SECOND_PRIME = 2147483629

_INT64_SAFE_PRIME = 3037000499  # (p-1)^2 < 2^63

PRIME_ENV = "TAUCERT_PRIME"


def default_prime() -> int:
    """Return the default prime, honouring the ``TAUCERT_PRIME`` variable."""
    value = os.environ.get(PRIME_ENV)
    return int(value) if value else DEFAULT_PRIME


class DomainError(ValueError):
    """Raised on incompatible or malformed scalar domains."""


@dataclass(frozen=True)
class Domain:
    kind: str
    p: int | None = None

    def __post_init__(self):
        if self.kind not in ("rational", "prime", "float"):
            raise DomainError(f"unknown domain kind {self.kind!r}")
        if self.kind == "prime":
            if self.p is None or self.p < 2:
                raise DomainError("prime domain needs p >= 2")
            if self.p >= 2**63:
                raise DomainError("primes must be below 2^63")
        elif self.p is not None:
            raise DomainError(f"{self.kind} domain takes no modulus")

    # ------------------------------------------------------------------
    @property
    def is_prime(self) -> bool:
        return self.kind == "prime"

    @property
    def exact(self) -> bool:
        return self.kind != "float"

    @property
    def dtype(self):
        if self.kind == "float":
            return np.float64
        if self.kind == "prime" and self.p < _INT64_SAFE_PRIME:
            return np.int64
        return object

    @property
    def tag(self) -> str:
        return f"F_{self.p}" if self.is_prime else self.kind

    def __str__(self) -> str:
        return self.tag

    # ------------------------------------------------------------------
    def scalar(self, x):
        """Coerce one scalar into the domain."""
        if self.kind == "float":
            return float(x)
        if self.kind == "prime":
            if isinstance(x, Fraction):
                return int(x.numerator) * pow(int(x.denominator), -1, self.p) % self.p
            return int(x) % self.p
        if isinstance(x, (float, np.floating)):
            return Fraction(x)
        if isinstance(x, Fraction):
            return x if x.denominator != 1 else int(x.numerator)
        return int(x)

    def asarray(self, values) -> np.ndarray:
        """Coerce a sequence (or array) of scalars into a domain array."""
        if self.kind == "float":
            return np.asarray(values, dtype=np.float64)
        arr = np.asarray(values, dtype=object)
        out = np.empty(arr.shape, dtype=object)
        for idx, x in np.ndenumerate(arr):
            out[idx] = self.scalar(x)
        return out.astype(self.dtype) if self.dtype is not object else out

    def reduce(self, arr: np.ndarray) -> np.ndarray:
        """Bring the result of ring operations back into canonical form."""
        if self.kind == "prime":
            return arr % self.p
        return arr

    def zeros(self, shape) -> np.ndarray:
        if self.dtype is object:
            out = np.empty(shape, dtype=object)
            out.fill(0)
            return out
        return np.zeros(shape, dtype=self.dtype)

    def inv(self, x):
        if self.kind == "prime":
            return pow(int(x), -1, self.p)
        if self.kind == "rational":
            return Fraction(1) / x
        return 1.0 / x

    def is_zero(self, x) -> bool:
        if self.kind == "prime":
            return int(x) % self.p == 0
        return x == 0

    def random_vector(self, rng: np.random.Generator, n: int, low: int = -9, high: int = 9) -> np.ndarray:
        """Uniform F_p elements, small integers in [low, high], or N(0,1) floats."""
        if self.kind == "prime":
            vals = rng.integers(0, self.p, size=n, dtype=np.int64)
            return vals if self.dtype is np.int64 else np.array([int(v) for v in vals], dtype=object)
        if self.kind == "rational":
            return np.array([int(v) for v in rng.integers(low, high + 1, size=n)], dtype=object)
        return rng.standard_normal(n)

    def to_json_scalar(self, x):
        if self.kind == "rational" and isinstance(x, Fraction) and x.denominator != 1:
            return f"{x.numerator}/{x.denominator}"
        if self.kind == "float":
            return float(x)
        return int(x)


RATIONAL = Domain("rational")
FLOAT = Domain("float")


def prime_field(p: int | None = None) -> Domain:
    return Domain("prime", default_prime() if p is None else int(p))


def parse_domain(tag: str) -> Domain:
    """Inverse of :attr:`Domain.tag` (``"rational"``, ``"float"``, ``"F_<p>"``)."""
    if tag in ("rational", "float"):
        return Domain(tag)
    if tag.startswith("F_"):
        return prime_field(int(tag[2:]))
    raise DomainError(f"cannot parse domain tag {tag!r}")
