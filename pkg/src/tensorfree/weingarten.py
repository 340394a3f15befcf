"""Exact unitary Weingarten functions over a symbolic N, together with the
two exact value types used throughout: Laurent polynomials in N with
big-rational coefficients, and rational functions of N with integer
coefficients.

No floating point enters this module: every identity it claims (most
importantly the Gram identity sum_tau W(sigma tau^{-1}) N^{#(tau rho^{-1})}
= delta_{sigma rho}) holds coefficient-by-coefficient.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Union

from . import errors
from .invariants import PermTuple
from .perms import IntegerPartition, Perm, moebius_nc

Scalar = Union[int, Fraction]

WEINGARTEN_CAP_N = 8


# -- dense polynomial helpers (coefficients low degree first) ----------------


def _trim(c: tuple) -> tuple:
    i = len(c)
    while i > 0 and c[i - 1] == 0:
        i -= 1
    return tuple(c[:i])


def _padd(a: tuple, b: tuple) -> tuple:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, x in enumerate(b):
        out[i] += x
    return _trim(tuple(out))


def _pmul(a: tuple, b: tuple) -> tuple:
    if not a or not b:
        return ()
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _trim(tuple(out))


def _pdivmod(a: tuple, b: tuple) -> tuple[tuple, tuple]:
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = list(a)
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 0)
    lead = Fraction(b[-1])
    for i in range(len(a) - len(b), -1, -1):
        coeff = Fraction(a[i + len(b) - 1]) / lead
        if coeff:
            q[i] = coeff
            for j, y in enumerate(b):
                a[i + j] -= coeff * y
    return _trim(tuple(q)), _trim(tuple(a))


def _pgcd(a: tuple, b: tuple) -> tuple:
    while b:
        a, b = b, _pdivmod(a, b)[1]
    if a:
        lead = Fraction(a[-1])
        a = tuple(Fraction(x) / lead for x in a)
    return a


def _peval(a: tuple, x: Fraction) -> Fraction:
    out = Fraction(0)
    for c in reversed(a):
        out = out * x + c
    return out


class LaurentPoly:
    """Exact map from integer exponents of N to big-rational coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: dict[int, Scalar] | None = None):
        clean = {}
        for e, c in (coeffs or {}).items():
            c = Fraction(c)
            if c:
                clean[int(e)] = c
        object.__setattr__(self, "coeffs", clean)

    def __setattr__(self, name, value):  # pragma: no cover - guard
        raise AttributeError("LaurentPoly is immutable")

    @classmethod
    def zero(cls) -> "LaurentPoly":
        return cls({})

    @classmethod
    def monomial(cls, exponent: int, coeff: Scalar = 1) -> "LaurentPoly":
        return cls({exponent: Fraction(coeff)})

    @classmethod
    def constant(cls, value: Scalar) -> "LaurentPoly":
        return cls({0: Fraction(value)})

    def is_zero(self) -> bool:
        return not self.coeffs

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = LaurentPoly.constant(other)
        if isinstance(other, RationalFunctionInN):
            return other + self
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = out.get(e, Fraction(0)) + c
        return LaurentPoly(out)

    __radd__ = __add__

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly({e: -c for e, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return LaurentPoly({e: c * other for e, c in self.coeffs.items()})
        if isinstance(other, RationalFunctionInN):
            return other * self
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        out: dict[int, Fraction] = {}
        for e1, c1 in self.coeffs.items():
            for e2, c2 in other.coeffs.items():
                e = e1 + e2
                out[e] = out.get(e, Fraction(0)) + c1 * c2
        return LaurentPoly(out)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = LaurentPoly.constant(other)
        if isinstance(other, RationalFunctionInN):
            return as_ratfun(self) == other
        return isinstance(other, LaurentPoly) and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(tuple(sorted(self.coeffs.items())))

    def leading(self) -> tuple[int, Fraction]:
        """(exponent, coefficient) of the highest power of N."""
        if not self.coeffs:
            raise ValueError("zero polynomial has no leading term")
        e = max(self.coeffs)
        return e, self.coeffs[e]

    def coefficient(self, exponent: int) -> Fraction:
        return self.coeffs.get(exponent, Fraction(0))

    def __call__(self, N: Scalar) -> Fraction:
        N = Fraction(N)
        return sum((c * N**e for e, c in self.coeffs.items()), Fraction(0))

    def items_desc(self) -> list[tuple[int, Fraction]]:
        return sorted(self.coeffs.items(), reverse=True)

    def to_json(self) -> list:
        return [[e, f"{c.numerator}/{c.denominator}"] for e, c in self.items_desc()]

    @classmethod
    def from_json(cls, data: Iterable) -> "LaurentPoly":
        return cls({int(e): Fraction(c) for e, c in data})

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for e, c in self.items_desc():
            mag = f"{abs(c)}" if abs(c) != 1 or e == 0 else ""
            if e == 0:
                term = f"{abs(c)}"
            elif e == 1:
                term = f"{mag}N" if mag else "N"
            else:
                term = f"{mag}N^{e}" if mag else f"N^{e}"
            parts.append(("- " if c < 0 else "+ ") + term)
        out = " ".join(parts)
        return out[2:] if out.startswith("+ ") else "-" + out[2:]

    def __repr__(self) -> str:
        return f"LaurentPoly({self.coeffs!r})"


class RationalFunctionInN:
    """num/den with integer coefficients, gcd removed, joint content 1, and
    a positive leading denominator coefficient."""

    __slots__ = ("num", "den")

    def __init__(self, num: Iterable[Scalar], den: Iterable[Scalar] = (1,)):
        num = _trim(tuple(Fraction(x) for x in num))
        den = _trim(tuple(Fraction(x) for x in den))
        if not den:
            raise ZeroDivisionError("denominator is zero")
        if not num:
            object.__setattr__(self, "num", (0,))
            object.__setattr__(self, "den", (1,))
            return
        g = _pgcd(num, den)
        if len(g) > 1:
            num = _pdivmod(num, g)[0]
            den = _pdivmod(den, g)[0]
        scale = Fraction(
            math.lcm(*(x.denominator for x in num + den)),
            math.gcd(*(x.numerator for x in num + den)),
        )
        num = tuple(x * scale for x in num)
        den = tuple(x * scale for x in den)
        if den[-1] < 0:
            num, den = tuple(-x for x in num), tuple(-x for x in den)
        object.__setattr__(self, "num", tuple(int(x) for x in num))
        object.__setattr__(self, "den", tuple(int(x) for x in den))

    def __setattr__(self, name, value):  # pragma: no cover - guard
        raise AttributeError("RationalFunctionInN is immutable")

    @classmethod
    def from_fraction(cls, x: Scalar) -> "RationalFunctionInN":
        x = Fraction(x)
        return cls((x.numerator,), (x.denominator,))

    @classmethod
    def monomial(cls, exponent: int, coeff: Scalar = 1) -> "RationalFunctionInN":
        coeff = Fraction(coeff)
        if exponent >= 0:
            num = (0,) * exponent + (coeff,)
            return cls(num, (1,))
        den = (0,) * (-exponent) + (1,)
        return cls((coeff,), den)

    def is_zero(self) -> bool:
        return self.num == (0,)

    def __add__(self, other):
        other = as_ratfun(other)
        if other is NotImplemented:
            return NotImplemented
        num = _padd(_pmul(self.num, other.den), _pmul(other.num, self.den))
        return RationalFunctionInN(num, _pmul(self.den, other.den))

    __radd__ = __add__

    def __neg__(self) -> "RationalFunctionInN":
        return RationalFunctionInN(tuple(-x for x in self.num), self.den)

    def __sub__(self, other):
        other = as_ratfun(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = as_ratfun(other)
        if other is NotImplemented:
            return NotImplemented
        return RationalFunctionInN(
            _pmul(self.num, other.num), _pmul(self.den, other.den)
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = as_ratfun(other)
        if other is NotImplemented:
            return NotImplemented
        if other.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return RationalFunctionInN(
            _pmul(self.num, other.den), _pmul(self.den, other.num)
        )

    def __eq__(self, other) -> bool:
        other = as_ratfun(other)
        if other is NotImplemented:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self) -> int:
        return hash((self.num, self.den))

    def __call__(self, N: Scalar) -> Fraction:
        N = Fraction(N)
        den = _peval(tuple(Fraction(x) for x in self.den), N)
        if den == 0:
            raise ZeroDivisionError(f"denominator vanishes at N={N}")
        return _peval(tuple(Fraction(x) for x in self.num), N) / den

    def as_laurent(self) -> LaurentPoly:
        """Exact conversion when the denominator is c * N^k; raises otherwise."""
        k = 0
        den = self.den
        while den and den[0] == 0:
            k += 1
            den = den[1:]
        if len(den) != 1:
            raise ValueError(f"not a Laurent polynomial: denominator {self.den}")
        scale = den[0]
        return LaurentPoly(
            {i - k: Fraction(c, scale) for i, c in enumerate(self.num) if c}
        )

    def serialize(self) -> str:
        """"num_coeffs/den_coeffs" as integer lists, lowest degree first."""
        return (
            "[" + ",".join(map(str, self.num)) + "]/["
            + ",".join(map(str, self.den)) + "]"
        )

    @classmethod
    def deserialize(cls, text: str) -> "RationalFunctionInN":
        numpart, denpart = text.split("/")
        num = [int(t) for t in numpart.strip("[] ").split(",") if t.strip()]
        den = [int(t) for t in denpart.strip("[] ").split(",") if t.strip()]
        return cls(num, den)

    def __str__(self) -> str:
        return self.serialize()

    def __repr__(self) -> str:
        return f"RationalFunctionInN({list(self.num)}, {list(self.den)})"


ZERO_RF = RationalFunctionInN((0,))
ONE_RF = RationalFunctionInN((1,))


def as_ratfun(x) -> RationalFunctionInN:
    if isinstance(x, RationalFunctionInN):
        return x
    if isinstance(x, (int, Fraction)):
        return RationalFunctionInN.from_fraction(x)
    if isinstance(x, LaurentPoly):
        shift = min((e for e in x.coeffs), default=0)
        shift = min(shift, 0)
        num = [Fraction(0)] * (max((e for e in x.coeffs), default=0) - shift + 1)
        for e, c in x.coeffs.items():
            num[e - shift] = c
        return RationalFunctionInN(num, (0,) * (-shift) + (1,))
    return NotImplemented


# -- symmetric group characters (Murnaghan-Nakayama) --------------------------


@lru_cache(maxsize=None)
def integer_partitions(n: int) -> tuple[tuple[int, ...], ...]:
    """All partitions of n, parts weakly decreasing."""
    if n == 0:
        return ((),)
    out = []

    def rec(remaining: int, largest: int, prefix: tuple[int, ...]):
        if remaining == 0:
            out.append(prefix)
            return
        for part in range(min(largest, remaining), 0, -1):
            rec(remaining - part, part, prefix + (part,))

    rec(n, n, ())
    return tuple(out)


@lru_cache(maxsize=None)
def character(lam: tuple[int, ...], mu: tuple[int, ...]) -> int:
    """chi^lam(mu) by border-strip removal on beta-numbers."""
    if sum(lam) != sum(mu):
        raise ValueError("partition sizes differ")
    if not mu:
        return 1
    k, rest = mu[0], mu[1:]
    ell = len(lam)
    betas = frozenset(lam[i] + ell - 1 - i for i in range(ell))
    total = 0
    for b in betas:
        if b >= k and (b - k) not in betas:
            height = sum(1 for b2 in betas if b - k < b2 < b)
            new_betas = sorted((betas - {b}) | {b - k}, reverse=True)
            new_lam = _trim_partition(
                tuple(nb - (len(new_betas) - 1 - i) for i, nb in enumerate(new_betas))
            )
            total += (-1) ** height * character(new_lam, rest)
    return total


def _trim_partition(parts: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(p for p in parts if p > 0)


def hook_dimension(lam: tuple[int, ...]) -> int:
    """f^lam = chi^lam(1^n), via the hook length formula."""
    n = sum(lam)
    prod = 1
    for i, row in enumerate(lam):
        for j in range(row):
            arm = row - j - 1
            leg = sum(1 for r in lam[i + 1 :] if r > j)
            prod *= arm + leg + 1
    return math.factorial(n) // prod


# -- Weingarten functions ------------------------------------------------------


def _cycle_type_of(nu: Perm | IntegerPartition) -> tuple[int, ...]:
    if isinstance(nu, Perm):
        return nu.cycle_type().parts
    return nu.parts


@lru_cache(maxsize=None)
def _weingarten_by_type(parts: tuple[int, ...]) -> RationalFunctionInN:
    n = sum(parts)
    errors.check("Weingarten degree", n, WEINGARTEN_CAP_N)
    total = ZERO_RF
    for lam in integer_partitions(n):
        content = (Fraction(1),)
        for i, row in enumerate(lam):
            for j in range(row):
                content = _pmul(content, (Fraction(j - i), Fraction(1)))
        coeff = Fraction(hook_dimension(lam) * character(lam, parts), math.factorial(n))
        total = total + RationalFunctionInN((coeff,)) * RationalFunctionInN(
            (1,), content
        )
    return total


def weingarten(nu: Perm | IntegerPartition) -> RationalFunctionInN:
    """The unitary Weingarten function W^{(N)}(nu), an exact rational class
    function of N, computed by character expansion and cached by cycle type.

    Defining contract: sum over tau in S_n of W(sigma tau^{-1}) N^{#(tau
    rho^{-1})} equals delta_{sigma rho} identically in N.
    """
    return _weingarten_by_type(_cycle_type_of(nu))


def weingarten_asymptotic(nu: Perm | IntegerPartition) -> tuple[Fraction, int]:
    """Leading large-N behavior M(nu) * N^{-n - |nu|} as (coefficient,
    exponent); the exact function differs from it by a relative O(N^-2)."""
    parts = _cycle_type_of(nu)
    n = sum(parts)
    absval = n - len(parts)
    if isinstance(nu, Perm):
        m = moebius_nc(nu)
    else:
        m = moebius_nc(IntegerPartition(parts))
    return Fraction(m), -n - absval


def weingarten_product(s: PermTuple, t: PermTuple) -> RationalFunctionInN:
    """prod over colors of W(s_c t_c^{-1})."""
    if s.n != t.n or s.D != t.D:
        raise ValueError("shape mismatch")
    out = ONE_RF
    for c in range(s.D):
        out = out * weingarten(s.perms[c] * t.perms[c].inverse())
    return out
