"""Error function of a complex argument.

Three evaluation paths, chosen by region (after reducing to Re z >= 0 with
the odd symmetry):

* power series ``2/sqrt(pi) sum (-1)^n z^(2n+1) / (n! (2n+1))`` where
  ``Re z^2 < 0`` (no cancellation there);
* the Kummer form ``2z/sqrt(pi) e^(-z^2) sum (2z^2)^n / (2n+1)!!`` for
  small ``|z|`` with ``Re z^2 >= 0``;
* the Laplace continued fraction for ``erfc`` elsewhere.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)
_INV_SQRT_PI = 1.0 / math.sqrt(math.pi)
_EPS = 2.0**-53
SERIES_RADIUS = 3.0
# |erf| overflows once -Re(z^2) exceeds log(DBL_MAX)
_MAX_EXPONENT = 700.0
_MAX_TERMS = 20000


def _taylor(z: complex) -> complex:
    z2 = z * z
    term = z
    total = z
    n = 0
    while True:
        n += 1
        term *= -z2 / n
        add = term / (2 * n + 1)
        total += add
        if abs(add) <= _EPS * abs(total) and n > abs(z2):
            break
        if n > _MAX_TERMS:
            raise ArithmeticError(f"erf series did not converge for z={z!r}")
    return _TWO_OVER_SQRT_PI * total


def _kummer(z: complex) -> complex:
    z2 = z * z
    term = 1.0 + 0j
    total = term
    n = 0
    while True:
        n += 1
        term *= 2 * z2 / (2 * n + 1)
        total += term
        if abs(term) <= _EPS * abs(total):
            break
        if n > _MAX_TERMS:
            raise ArithmeticError(f"erf series did not converge for z={z!r}")
    return _TWO_OVER_SQRT_PI * z * cmath.exp(-z2) * total


def _erfc_cf(z: complex) -> complex:
    """erfc(z) for Re z > 0 from ``1/(z + (1/2)/(z + 1/(z + (3/2)/(z + ...))))`` (modified Lentz)."""
    tiny = 1e-300
    f = z
    c = z
    d = 0j
    n = 0
    while True:
        n += 1
        a = 0.5 * n
        d = z + a * d
        d = tiny if d == 0 else d
        c = z + a / c
        c = tiny if c == 0 else c
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) <= _EPS:
            break
        if n > _MAX_TERMS:
            raise ArithmeticError(f"erfc continued fraction did not converge for z={z!r}")
    return _INV_SQRT_PI * cmath.exp(-z * z) / f


def complex_erf(z) -> complex:
    """Error function for complex ``z``.

    Raises ``ValueError`` for non-finite input or where the result would
    overflow (``-Re(z^2) > 700``).
    """
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"erf argument must be finite, got {z!r}")
    if z.real < 0:
        return -complex_erf(-z)
    z2 = z * z
    if -z2.real > _MAX_EXPONENT:
        raise ValueError(f"erf({z!r}) overflows double precision")
    if z == 0:
        return 0j
    if z2.real < 0 and (abs(z) <= SERIES_RADIUS or z.real < 1.0):
        out = _taylor(z)
    elif abs(z) <= SERIES_RADIUS:
        out = _kummer(z)
    else:
        out = 1.0 - _erfc_cf(z)
    # exact symmetries on the axes
    if z.imag == 0:
        out = complex(out.real, 0.0)
    elif z.real == 0:
        out = complex(0.0, out.imag)
    return out


def complex_erfi(z) -> complex:
    """Imaginary error function ``-i erf(i z)``."""
    return -1j * complex_erf(1j * complex(z))


erf = np.vectorize(complex_erf, otypes=[complex])
erfi = np.vectorize(complex_erfi, otypes=[complex])
