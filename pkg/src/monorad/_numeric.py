"""Working-precision arithmetic.

Everything numeric in the package goes through a :class:`NumContext`.  At 53
bits it wraps plain Python complex numbers and numpy; above that it wraps a
private mpmath context, so concurrent callers at different precisions never
fight over ``mpmath.mp.prec``.
"""
from __future__ import annotations

import cmath
import math
from fractions import Fraction
from functools import lru_cache

import numpy as np
from mpmath.ctx_mp import MPContext

NATIVE_BITS = 53


class NumContext:
    def __init__(self, bits: int = NATIVE_BITS):
        if bits < NATIVE_BITS:
            raise ValueError("precision must be at least 53 bits")
        self.bits = int(bits)
        self.native = self.bits == NATIVE_BITS
        if self.native:
            self.mp = None
            self.pi = math.pi
        else:
            self.mp = MPContext()
            self.mp.prec = self.bits
            self.pi = self.mp.pi
        self.eps = 2.0 ** (-self.bits)

    def __repr__(self):
        return f"NumContext(bits={self.bits})"

    def tol(self, slack_bits: float) -> float:
        """``2**-(bits - slack_bits)``: a tolerance that tracks the precision."""
        return 2.0 ** (-(self.bits - slack_bits))

    # -- conversions ------------------------------------------------------
    def c(self, z):
        if hasattr(z, "re") and hasattr(z, "im") and isinstance(z.re, Fraction):
            return self._from_fractions(z.re, z.im)
        if isinstance(z, Fraction):
            return self._from_fractions(z, Fraction(0))
        if isinstance(z, int):
            return complex(z) if self.native else self.mp.mpc(z)
        if self.native:
            return complex(z)
        return self.mp.mpc(z)

    def _from_fractions(self, re: Fraction, im: Fraction):
        if self.native:
            return complex(float(re), float(im))
        mp = self.mp
        return mp.mpc(mp.mpf(re.numerator) / re.denominator,
                      mp.mpf(im.numerator) / im.denominator)

    def real(self, x):
        return float(x) if self.native else self.mp.mpf(x)

    def to_complex(self, z) -> complex:
        return complex(z)

    def fmt(self, z) -> list:
        """Decimal (re, im) string pair at the working precision."""
        if self.native:
            z = complex(z)
            return [repr(z.real), repr(z.imag)]
        z = self.mp.mpc(z)
        digits = int(self.bits * 0.30103) + 2
        return [self.mp.nstr(z.real, digits), self.mp.nstr(z.imag, digits)]

    def parse_pair(self, pair):
        re, im = pair
        if self.native:
            return complex(float(re), float(im))
        return self.mp.mpc(self.mp.mpf(re), self.mp.mpf(im))

    # -- elementary functions ---------------------------------------------
    def expj(self, theta):
        if self.native:
            return cmath.exp(1j * theta)
        return self.mp.expj(theta)

    def unit_root(self, turn: Fraction):
        """``exp(2 pi i * turn)``, exact for multiples of a quarter turn."""
        turn = turn % 1
        exact = {Fraction(0): 1, Fraction(1, 4): 1j, Fraction(1, 2): -1,
                 Fraction(3, 4): -1j}
        if turn in exact:
            return self.c(exact[turn])
        if self.native:
            return cmath.exp(2j * math.pi * float(turn))
        return self.mp.expjpi(2 * self.mp.mpf(turn.numerator) / turn.denominator)

    def sqrt(self, z):
        return cmath.sqrt(z) if self.native else self.mp.sqrt(z)

    def arg(self, z):
        return cmath.phase(z) if self.native else self.mp.arg(z)

    def root(self, z, k: int):
        """Principal k-th root."""
        if k == 1:
            return z
        if z == 0:
            return z
        if self.native:
            return complex(z) ** (1.0 / k)
        return self.mp.root(z, k)

    # -- small dense linear algebra ----------------------------------------
    def lstsq(self, rows, rhs):
        if self.native:
            a = np.array(rows, dtype=complex)
            b = np.array(rhs, dtype=complex)
            sol, *_ = np.linalg.lstsq(a, b, rcond=None)
            return [complex(v) for v in sol]
        mp = self.mp
        sol, _ = mp.qr_solve(mp.matrix(rows), mp.matrix(rhs))
        return [sol[i] for i in range(sol.rows)]

    def nullvector(self, rows):
        """Right singular vector of the smallest singular value."""
        if self.native:
            a = np.array(rows, dtype=complex)
            _, _, vh = np.linalg.svd(a)
            return [complex(v) for v in vh[-1].conj()]
        mp = self.mp
        a = mp.matrix(rows)
        if a.rows < a.cols:
            pad = mp.zeros(a.cols - a.rows, a.cols)
            a = mp.matrix([[a[i, j] for j in range(a.cols)] for i in range(a.rows)]
                          + [[pad[i, j] for j in range(a.cols)] for i in range(pad.rows)])
        _, _, v = mp.svd_c(a)
        return [mp.conj(v[v.rows - 1, j]) for j in range(v.cols)]


@lru_cache(maxsize=None)
def context(bits: int = NATIVE_BITS) -> NumContext:
    return NumContext(bits)


def horner(coeffs, z):
    """Evaluate a descending coefficient list at ``z``."""
    acc = coeffs[0] * 0
    for a in coeffs:
        acc = acc * z + a
    return acc


def horner_with_derivative(coeffs, z):
    p = coeffs[0] * 0
    dp = p
    for a in coeffs:
        dp = dp * z + p
        p = p * z + a
    return p, dp
