"""A tiny symbolic-linear-combination value type for tests: values are
formal polynomials in named moment symbols with rational-function-of-N
coefficients, supporting exactly the ring operations the transforms use."""
from __future__ import annotations

from fractions import Fraction

from tensorfree.weingarten import RationalFunctionInN, as_ratfun


class Symbolic:
    """Mapping from monomials (sorted tuples of symbol names) to
    RationalFunctionInN coefficients."""

    def __init__(self, terms=None):
        clean = {}
        for mono, coeff in (terms or {}).items():
            coeff = as_ratfun(coeff)
            if not coeff.is_zero():
                clean[tuple(sorted(mono))] = coeff
        self.terms = clean

    @classmethod
    def symbol(cls, name):
        return cls({(name,): 1})

    def __add__(self, other):
        if isinstance(other, (int, Fraction, RationalFunctionInN)):
            other = Symbolic({(): other})
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, as_ratfun(0)) + c
        return Symbolic(out)

    __radd__ = __add__

    def __neg__(self):
        return Symbolic({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction, RationalFunctionInN)):
            other = Symbolic({(): other})
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, RationalFunctionInN)):
            return Symbolic({m: c * other for m, c in self.terms.items()})
        out = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(sorted(m1 + m2))
                out[m] = out.get(m, as_ratfun(0)) + c1 * c2
        return Symbolic(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, RationalFunctionInN)):
            other = Symbolic({(): other})
        return isinstance(other, Symbolic) and self.terms == other.terms

    def coefficient(self, mono):
        return self.terms.get(tuple(sorted(mono)), as_ratfun(0))

    def __repr__(self):
        return f"Symbolic({self.terms})"
