"""Scalar arithmetic, Laurent polynomials, and linear algebra kernels.

Scalars are either exact rationals (arbitrary-precision ``Fraction``) or
complex floating values at a configurable binary precision (mpmath, gmpy2
backend when available).  Everything downstream -- Laurent polynomials,
rational functions, matrices, determinants -- is generic over the two modes:
exact inputs stay exact, inexact inputs are handled with tolerance-thresholded
pivoting and the proportional zero rule

    treat x as zero  iff  |x| < 2^(-precision/2) * scale,

where ``scale`` is the largest magnitude seen in the computation.
"""

from __future__ import annotations

from fractions import Fraction

import mpmath

from .errors import (
    DivisionByZero,
    InterpolationIllConditioned,
    NonSquare,
)

DEFAULT_PRECISION = 256
MAX_PRECISION = 8192
MIN_PRECISION = 53


def zero_threshold(prec, scale=1.0):
    """Absolute zero threshold at a given precision and computation scale."""
    with mpmath.workprec(53):
        return mpmath.mpf(scale) * mpmath.power(2, -(prec // 2))


# ---------------------------------------------------------------------------
# Scalar
# ---------------------------------------------------------------------------

class Scalar:
    """A field element: exact rational or complex float with precision.

    Exact values are stored as ``Fraction`` (lowest terms, positive
    denominator -- the Fraction invariant).  Inexact values are ``mpmath.mpc``
    tagged with the binary precision they were created at; mixed-precision
    operations round to the minimum of the operand precisions, and mixing
    exact with inexact coerces the exact side at the inexact side's precision.
    """

    __slots__ = ("q", "z", "prec")

    def __init__(self, q=None, z=None, prec=None):
        self.q = q
        self.z = z
        self.prec = prec

    # -- constructors -------------------------------------------------

    @classmethod
    def exact(cls, value, den=None):
        if den is not None:
            return cls(q=Fraction(value, den))
        if isinstance(value, Scalar):
            return value
        return cls(q=Fraction(value))

    @classmethod
    def inexact(cls, value, prec=DEFAULT_PRECISION):
        prec = max(MIN_PRECISION, int(prec))
        with mpmath.workprec(prec):
            return cls(z=mpmath.mpc(value), prec=prec)

    @classmethod
    def from_real_imag(cls, re, im="0", prec=DEFAULT_PRECISION):
        """Build a complex scalar from real/imag parts given as str or number."""
        prec = max(MIN_PRECISION, int(prec))
        with mpmath.workprec(prec):
            return cls(z=mpmath.mpc(mpmath.mpf(re), mpmath.mpf(im)), prec=prec)

    ZERO = None  # filled in below
    ONE = None

    # -- predicates -----------------------------------------------------

    @property
    def is_exact(self):
        return self.q is not None

    def is_zero(self):
        """Exact zero test (representation-level, no tolerance)."""
        if self.is_exact:
            return self.q == 0
        return self.z == 0

    # -- conversions ------------------------------------------------------

    def as_mpc(self, prec=None):
        if self.is_exact:
            p = prec or DEFAULT_PRECISION
            with mpmath.workprec(p):
                return mpmath.mpc(self.q.numerator) / self.q.denominator
        return self.z

    def mag(self):
        """Magnitude as an mpf (53-bit, unbounded exponent)."""
        with mpmath.workprec(53):
            if self.is_exact:
                if self.q == 0:
                    return mpmath.mpf(0)
                return abs(mpmath.mpf(self.q.numerator) / self.q.denominator)
            return abs(self.z)

    def real(self):
        if self.is_exact:
            return self.q
        return self.z.real

    def imag(self):
        if self.is_exact:
            return Fraction(0)
        return self.z.imag

    def conjugate(self):
        if self.is_exact:
            return self
        with mpmath.workprec(self.prec):
            return Scalar(z=mpmath.conj(self.z), prec=self.prec)

    # -- arithmetic ------------------------------------------------------

    @staticmethod
    def _coerce(x):
        if isinstance(x, Scalar):
            return x
        if isinstance(x, (int, Fraction)):
            return Scalar(q=Fraction(x))
        return NotImplemented

    def _binop(self, other, name):
        other = Scalar._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.is_exact and other.is_exact:
            a, b = self.q, other.q
            if name == "add":
                return Scalar(q=a + b)
            if name == "sub":
                return Scalar(q=a - b)
            if name == "mul":
                return Scalar(q=a * b)
            if b == 0:
                raise DivisionByZero("exact division by zero")
            return Scalar(q=a / b)
        prec = min(p for p in (self.prec, other.prec) if p is not None)
        with mpmath.workprec(prec):
            a = self.as_mpc(prec)
            b = other.as_mpc(prec)
            if name == "add":
                return Scalar(z=a + b, prec=prec)
            if name == "sub":
                return Scalar(z=a - b, prec=prec)
            if name == "mul":
                return Scalar(z=a * b, prec=prec)
            if b == 0:
                raise DivisionByZero("complex division by exact zero")
            return Scalar(z=a / b, prec=prec)

    def __add__(self, other):
        return self._binop(other, "add")

    __radd__ = __add__

    def __sub__(self, other):
        return self._binop(other, "sub")

    def __rsub__(self, other):
        other = Scalar._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        return self._binop(other, "mul")

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._binop(other, "div")

    def __rtruediv__(self, other):
        other = Scalar._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    def __neg__(self):
        if self.is_exact:
            return Scalar(q=-self.q)
        with mpmath.workprec(self.prec):
            return Scalar(z=-self.z, prec=self.prec)

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if self.is_exact:
            if self.q == 0 and n < 0:
                raise DivisionByZero("0**negative")
            return Scalar(q=self.q ** n)
        with mpmath.workprec(self.prec):
            if self.z == 0 and n < 0:
                raise DivisionByZero("0**negative")
            return Scalar(z=self.z ** n, prec=self.prec)

    def __eq__(self, other):
        other = Scalar._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.is_exact and other.is_exact:
            return self.q == other.q
        return self.as_mpc(53) == other.as_mpc(53)

    def __hash__(self):
        if self.is_exact:
            return hash(self.q)
        return hash(complex(self.z))

    def approx_equal(self, other, tol=1e-10):
        other = Scalar._coerce(other)
        d = (self - other).mag()
        s = max(mpmath.mpf(1), self.mag(), other.mag())
        return d <= mpmath.mpf(tol) * s

    def __repr__(self):
        if self.is_exact:
            return f"Scalar({self.q})"
        return f"Scalar({mpmath.nstr(self.z, 12)}@{self.prec})"

    def to_str(self, dps=None):
        if self.is_exact:
            return str(self.q)
        d = dps or mpmath.libmp.prec_to_dps(self.prec)
        return mpmath.nstr(self.z, d)


Scalar.ZERO = Scalar.exact(0)
Scalar.ONE = Scalar.exact(1)


def scalar_arithmetic(a, b, op):
    """Field operation dispatch: op in {'add','sub','mul','div'}."""
    a = Scalar._coerce(a)
    b = Scalar._coerce(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown op {op!r}")


# ---------------------------------------------------------------------------
# Laurent polynomials
# ---------------------------------------------------------------------------

class LaurentPolynomial:
    """Laurent polynomial sum_d c_d t^d with Scalar coefficients.

    Stored sparsely as {exponent: Scalar}; representation-level zeros are
    dropped on construction, so the zero polynomial has an empty map.
    Tolerance trimming of sub-threshold coefficients is explicit (``trimmed``)
    because only the caller knows the computation's scale.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=None):
        cleaned = {}
        if coeffs:
            for d, c in coeffs.items():
                c = Scalar._coerce(c)
                if not c.is_zero():
                    cleaned[int(d)] = c
        self.coeffs = cleaned

    # -- constructors  ---------------------------------------------------

    @classmethod
    def zero(cls):
        return cls()

    @classmethod
    def one(cls):
        return cls({0: Scalar.ONE})

    @classmethod
    def t_power(cls, k, coeff=None):
        return cls({k: coeff if coeff is not None else Scalar.ONE})

    @classmethod
    def constant(cls, c):
        return cls({0: Scalar._coerce(c)})

    # -- structure --------------------------------------------------------

    def is_zero(self):
        return not self.coeffs

    @property
    def d_lo(self):
        return min(self.coeffs) if self.coeffs else None

    @property
    def d_hi(self):
        return max(self.coeffs) if self.coeffs else None

    @property
    def span(self):
        if not self.coeffs:
            return None
        return max(self.coeffs) - min(self.coeffs)

    def coefficient(self, d):
        return self.coeffs.get(d, Scalar.ZERO)

    def is_exact(self):
        return all(c.is_exact for c in self.coeffs.values())

    def max_mag(self):
        if not self.coeffs:
            return mpmath.mpf(0)
        return max(c.mag() for c in self.coeffs.values())

    def trimmed(self, threshold):
        """Drop coefficients with magnitude below the absolute threshold."""
        kept = {d: c for d, c in self.coeffs.items()
                if c.is_exact or c.mag() > threshold}
        return LaurentPolynomial(kept)

    # -- arithmetic ------------------------------------------------------

    @staticmethod
    def _coerce(x):
        if isinstance(x, LaurentPolynomial):
            return x
        if isinstance(x, (int, Fraction, Scalar)):
            return LaurentPolynomial.constant(x)
        return NotImplemented

    def __add__(self, other):
        other = LaurentPolynomial._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self.coeffs)
        for d, c in other.coeffs.items():
            if d in out:
                out[d] = out[d] + c
            else:
                out[d] = c
        return LaurentPolynomial(out)

    __radd__ = __add__

    def __sub__(self, other):
        other = LaurentPolynomial._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return LaurentPolynomial({d: -c for d, c in self.coeffs.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, Scalar)):
            s = Scalar._coerce(other)
            return LaurentPolynomial({d: c * s for d, c in self.coeffs.items()})
        other = LaurentPolynomial._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out = {}
        for d1, c1 in self.coeffs.items():
            for d2, c2 in other.coeffs.items():
                d = d1 + d2
                prod = c1 * c2
                if d in out:
                    out[d] = out[d] + prod
                else:
                    out[d] = prod
        return LaurentPolynomial(out)

    __rmul__ = __mul__

    def shift(self, k):
        """Multiply by t^k."""
        return LaurentPolynomial({d + k: c for d, c in self.coeffs.items()})

    def reversed_t(self):
        """Substitute t -> 1/t."""
        return LaurentPolynomial({-d: c for d, c in self.coeffs.items()})

    def evaluate(self, t0):
        """Evaluate at a Scalar point (nonzero if negative exponents occur)."""
        t0 = Scalar._coerce(t0)
        total = Scalar.ZERO
        for d, c in self.coeffs.items():
            total = total + c * (t0 ** d)
        return total

    def divide(self, den, threshold=None):
        """Long division: self = q*den + r with the quotient supported on
        exponents [self.d_lo - den.d_lo, self.d_hi - den.d_hi].

        ``threshold`` (absolute) stops early once the remainder's magnitude
        drops below it; exact inputs ignore it.  Returns (q, r).
        """
        if den.is_zero():
            raise DivisionByZero("Laurent division by zero polynomial")
        if self.is_zero():
            return LaurentPolynomial.zero(), LaurentPolynomial.zero()
        q = {}
        r = self
        lead_exp = den.d_hi
        lead = den.coefficient(lead_exp)
        q_lo_bound = self.d_lo - den.d_lo
        while not r.is_zero():
            if threshold is not None and r.max_mag() <= threshold:
                break
            e = r.d_hi - lead_exp
            if e < q_lo_bound:
                break
            f = r.coefficient(r.d_hi) / lead
            q[e] = f
            r = r - den.shift(e) * f
            # guard against non-terminating cancellation drift
            if threshold is not None:
                r = r.trimmed(threshold * mpmath.mpf("1e-8"))
        return LaurentPolynomial(q), r

    def exact_div(self, den):
        """Exact division; raises if the remainder is nonzero (exact mode)."""
        q, r = self.divide(den)
        if not r.is_zero():
            raise DivisionByZero("inexact Laurent division in exact mode")
        return q

    # -- comparison & formatting -----------------------------------------

    def eq_exact(self, other):
        other = LaurentPolynomial._coerce(other)
        if set(self.coeffs) != set(other.coeffs):
            return False
        return all(self.coeffs[d] == other.coeffs[d] for d in self.coeffs)

    def __repr__(self):
        return f"LaurentPolynomial({self.to_string()})"

    def to_string(self, var="t", dps=None):
        if not self.coeffs:
            return "0"
        parts = []
        for d in sorted(self.coeffs):
            c = self.coeffs[d]
            cs = c.to_str(dps)
            if d == 0:
                parts.append(cs)
            else:
                power = var if d == 1 else f"{var}^{d}"
                if cs == "1":
                    parts.append(power)
                elif cs == "-1":
                    parts.append(f"-{power}")
                else:
                    parts.append(f"{cs}*{power}")
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out


def parse_laurent(text, prec=None):
    """Parse strings like ``"1-2t+t^2"``, ``"t^-1 + 3/2*t"`` into a polynomial.

    Integer and p/q coefficients become exact rationals; decimal coefficients
    become complex scalars at ``prec`` (default precision if unset).
    """
    import re

    s = text.replace(" ", "").replace("*", "")
    if not s:
        raise ValueError("empty polynomial string")
    term_re = re.compile(
        r"(?P<sign>[+-]?)"
        r"(?P<coeff>\d+(?:\.\d+)?(?:/\d+)?)?"
        r"(?P<var>t(?:\^(?P<exp>-?\d+))?)?"
    )
    pos = 0
    coeffs = {}
    while pos < len(s):
        m = term_re.match(s, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse {text!r} at position {pos}")
        if m.group("coeff") is None and m.group("var") is None:
            raise ValueError(f"cannot parse {text!r} at position {pos}")
        sign = -1 if m.group("sign") == "-" else 1
        ctext = m.group("coeff")
        if ctext is None:
            coeff = Scalar.exact(sign)
        elif "." in ctext:
            coeff = Scalar.from_real_imag(ctext, "0", prec or DEFAULT_PRECISION)
            if sign < 0:
                coeff = -coeff
        elif "/" in ctext:
            n, d = ctext.split("/")
            coeff = Scalar.exact(sign * int(n), int(d))
        else:
            coeff = Scalar.exact(sign * int(ctext))
        if m.group("var") is None:
            exp = 0
        else:
            exp = int(m.group("exp")) if m.group("exp") is not None else 1
        coeffs[exp] = coeffs.get(exp, Scalar.ZERO) + coeff
        pos = m.end()
    return LaurentPolynomial(coeffs)


# ---------------------------------------------------------------------------
# Rational functions (fraction field of the Laurent ring)
# ---------------------------------------------------------------------------

def _poly_gcd_exact(a, b):
    """Monic gcd of two exact Laurent polynomials (as ordinary polynomials)."""
    a = a.shift(-a.d_lo) if not a.is_zero() else a
    b = b.shift(-b.d_lo) if not b.is_zero() else b
    while not b.is_zero():
        _, r = a.divide(b)
        a, b = b, r
    if a.is_zero():
        return LaurentPolynomial.one()
    return a * (Scalar.ONE / a.coefficient(a.d_hi))


class RationalFunction:
    """Quotient num/den of Laurent polynomials.

    Exact operands are gcd-reduced; inexact operands skip gcd (numerically
    meaningless) and are instead rescaled so the denominator has unit
    max-magnitude, with common powers of t cancelled.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=None, reduce=True):
        num = LaurentPolynomial._coerce(num)
        den = LaurentPolynomial.one() if den is None else LaurentPolynomial._coerce(den)
        if den.is_zero():
            raise DivisionByZero("rational function with zero denominator")
        if num.is_zero():
            self.num = LaurentPolynomial.zero()
            self.den = LaurentPolynomial.one()
            return
        # cancel the common unit t^k so den starts at exponent 0
        k = den.d_lo
        num = num.shift(-k)
        den = den.shift(-k)
        if reduce and num.is_exact() and den.is_exact():
            g = _poly_gcd_exact(num, den)
            if g.span is not None and g.span > 0:
                num = num.exact_div(g)
                den = den.exact_div(g)
            lead = den.coefficient(den.d_hi)
            num = num * (Scalar.ONE / lead)
            den = den * (Scalar.ONE / lead)
        elif reduce:
            m = den.max_mag()
            if m > 0:
                inv = Scalar.inexact(1, _max_prec_of(num, den)) / _mag_scalar(m, num, den)
                num = num * inv
                den = den * inv
        self.num = num
        self.den = den

    @classmethod
    def from_laurent(cls, p):
        return cls(p, LaurentPolynomial.one(), reduce=False)

    @classmethod
    def zero(cls):
        return cls(LaurentPolynomial.zero(), LaurentPolynomial.one(), reduce=False)

    @classmethod
    def one(cls):
        return cls(LaurentPolynomial.one(), LaurentPolynomial.one(), reduce=False)

    def is_zero(self):
        return self.num.is_zero()

    def value_mag(self):
        if self.num.is_zero():
            return mpmath.mpf(0)
        dm = self.den.max_mag()
        return self.num.max_mag() / dm if dm > 0 else mpmath.mpf("inf")

    def __add__(self, other):
        other = RationalFunction._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return RationalFunction(
            self.num * other.den + other.num * self.den, self.den * other.den
        )

    __radd__ = __add__

    def __sub__(self, other):
        other = RationalFunction._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __neg__(self):
        return RationalFunction(-self.num, self.den, reduce=False)

    def __mul__(self, other):
        other = RationalFunction._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return RationalFunction(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = RationalFunction._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.num.is_zero():
            raise DivisionByZero("division by zero rational function")
        return RationalFunction(self.num * other.den, self.den * other.num)

    def inverse(self):
        if self.num.is_zero():
            raise DivisionByZero("inverse of zero")
        return RationalFunction(self.den, self.num)

    @staticmethod
    def _coerce(x):
        if isinstance(x, RationalFunction):
            return x
        if isinstance(x, LaurentPolynomial):
            return RationalFunction.from_laurent(x)
        if isinstance(x, (int, Fraction, Scalar)):
            return RationalFunction.from_laurent(LaurentPolynomial.constant(x))
        return NotImplemented

    def evaluate(self, t0):
        d = self.den.evaluate(t0)
        if d.is_zero():
            raise DivisionByZero("denominator vanishes at evaluation point")
        return self.num.evaluate(t0) / d

    def __repr__(self):
        return f"RationalFunction(({self.num.to_string()}) / ({self.den.to_string()}))"


def _max_prec_of(*polys):
    precs = [c.prec for p in polys for c in p.coeffs.values() if not c.is_exact]
    return max(precs) if precs else DEFAULT_PRECISION


def _mag_scalar(m, *polys):
    return Scalar.inexact(m, _max_prec_of(*polys))


# ---------------------------------------------------------------------------
# Matrices
# ---------------------------------------------------------------------------

class Matrix:
    """Dense matrix over whatever field the entries implement (+,-,*)."""

    __slots__ = ("rows",)

    def __init__(self, rows):
        rows = [list(r) for r in rows]
        if rows:
            w = len(rows[0])
            if any(len(r) != w for r in rows):
                raise ValueError("ragged matrix rows")
        self.rows = rows

    @property
    def nrows(self):
        return len(self.rows)

    @property
    def ncols(self):
        return len(self.rows[0]) if self.rows else 0

    @classmethod
    def identity(cls, n, one=None, zero=None):
        one = Scalar.ONE if one is None else one
        zero = Scalar.ZERO if zero is None else zero
        return cls([[one if i == j else zero for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, nrows, ncols, zero=None):
        zero = Scalar.ZERO if zero is None else zero
        return cls([[zero for _ in range(ncols)] for _ in range(nrows)])

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def is_square(self):
        return self.nrows == self.ncols

    def col(self, j):
        return [r[j] for r in self.rows]

    def transpose(self):
        return Matrix([[self.rows[i][j] for i in range(self.nrows)]
                       for j in range(self.ncols)])

    def map(self, f):
        return Matrix([[f(x) for x in r] for r in self.rows])

    def __add__(self, other):
        return Matrix([[a + b for a, b in zip(r1, r2)]
                       for r1, r2 in zip(self.rows, other.rows)])

    def __sub__(self, other):
        return Matrix([[a - b for a, b in zip(r1, r2)]
                       for r1, r2 in zip(self.rows, other.rows)])

    def __mul__(self, other):
        if isinstance(other, Matrix):
            if self.ncols != other.nrows:
                raise ValueError("dimension mismatch")
            out = []
            for i in range(self.nrows):
                row = []
                for j in range(other.ncols):
                    acc = None
                    for k in range(self.ncols):
                        term = self.rows[i][k] * other.rows[k][j]
                        acc = term if acc is None else acc + term
                    row.append(acc)
                out.append(row)
            return Matrix(out)
        return self.map(lambda x: x * other)

    def hstack(self, other):
        return Matrix([r1 + r2 for r1, r2 in zip(self.rows, other.rows)])

    def __repr__(self):
        return f"Matrix({self.rows!r})"


# ---------------------------------------------------------------------------
# Field operation adapters for the generic elimination routines
# ---------------------------------------------------------------------------

class ScalarField:
    """Scalar field ops with tolerance-aware zero tests at a precision."""

    def __init__(self, prec=DEFAULT_PRECISION):
        self.prec = prec
        self.zero = Scalar.ZERO
        self.one = Scalar.ONE

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def div(self, a, b):
        return a / b

    def neg(self, a):
        return -a

    def mag(self, a):
        return a.mag()

    def is_zero(self, a, scale=1):
        if a.is_exact:
            return a.q == 0
        return a.mag() <= zero_threshold(self.prec, scale)


class LaurentFractionField:
    """Fraction-field ops on RationalFunction elements."""

    def __init__(self, prec=DEFAULT_PRECISION):
        self.prec = prec
        self.zero = RationalFunction.zero()
        self.one = RationalFunction.one()

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def div(self, a, b):
        return a / b

    def neg(self, a):
        return -a

    def mag(self, a):
        return a.value_mag()

    def is_zero(self, a, scale=1):
        if a.num.is_zero():
            return True
        if a.num.is_exact() and a.den.is_exact():
            return False
        return a.value_mag() <= zero_threshold(self.prec, scale)


# ---------------------------------------------------------------------------
# Generic elimination: rref, kernel/image, solve, determinant
# ---------------------------------------------------------------------------

def _matrix_scale(rows, ops):
    s = mpmath.mpf(1)
    for r in rows:
        for x in r:
            m = ops.mag(x)
            if m > s:
                s = m
    return s


def rref(M, ops):
    """Reduced row echelon form.  Returns (rows, pivot_columns, scale)."""
    rows = [list(r) for r in (M.rows if isinstance(M, Matrix) else M)]
    nrows = len(rows)
    ncols = len(rows[0]) if rows else 0
    scale = _matrix_scale(rows, ops)
    pivots = []
    r = 0
    for c in range(ncols):
        if r >= nrows:
            break
        best, best_mag = None, None
        for i in range(r, nrows):
            m = ops.mag(rows[i][c])
            if not ops.is_zero(rows[i][c], scale) and (best is None or m > best_mag):
                best, best_mag = i, m
        if best is None:
            continue
        rows[r], rows[best] = rows[best], rows[r]
        piv = rows[r][c]
        rows[r] = [ops.div(x, piv) for x in rows[r]]
        for i in range(nrows):
            if i == r:
                continue
            f = rows[i][c]
            if ops.is_zero(f, scale):
                continue
            rows[i] = [ops.sub(x, ops.mul(f, y)) for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    return rows, pivots, scale


def kernel_image(M, ops):
    """Bases of ker(M) and im(M) (as lists of coordinate vectors).

    The image basis is the set of pivot columns of the original matrix; the
    kernel basis comes from the free columns of the reduced echelon form.
    """
    M = M if isinstance(M, Matrix) else Matrix(M)
    if M.nrows == 0 or M.ncols == 0:
        identity_cols = [[ops.one if i == j else ops.zero for i in range(M.ncols)]
                         for j in range(M.ncols)]
        return identity_cols, []
    rows, pivots, _ = rref(M, ops)
    image = [M.col(c) for c in pivots]
    pivot_set = set(pivots)
    free = [c for c in range(M.ncols) if c not in pivot_set]
    kernel = []
    for fc in free:
        v = [ops.zero] * M.ncols
        v[fc] = ops.one
        for r_idx, pc in enumerate(pivots):
            v[pc] = ops.neg(rows[r_idx][fc])
        kernel.append(v)
    return kernel, image


def kernel_and_image_bases(M, precision=DEFAULT_PRECISION):
    """Kernel and image bases of a Scalar matrix (tolerance-aware pivots)."""
    return kernel_image(M, ScalarField(precision))


def rank(M, ops=None, precision=DEFAULT_PRECISION):
    ops = ops or ScalarField(precision)
    M = M if isinstance(M, Matrix) else Matrix(M)
    if M.nrows == 0 or M.ncols == 0:
        return 0
    _, pivots, _ = rref(M, ops)
    return len(pivots)


def solve_columns(M, B, ops):
    """Solve M X = B column-by-column via pivoted elimination.

    B is a list of target vectors.  Free variables are set to zero.  Raises
    ValueError if a target is detectably inconsistent.
    """
    M = M if isinstance(M, Matrix) else Matrix(M)
    aug_rows = [list(M.rows[i]) + [b[i] for b in B] for i in range(M.nrows)]
    n = M.ncols
    rows, pivots, _ = rref(aug_rows, ops)
    # pivots beyond column n mean inconsistency
    for p in pivots:
        if p >= n:
            raise ValueError("inconsistent linear system in lift computation")
    solutions = []
    for k in range(len(B)):
        x = [ops.zero] * n
        for r_idx, pc in enumerate(pivots):
            x[pc] = rows[r_idx][n + k]
        solutions.append(x)
    return solutions


def det_eliminate(M, ops):
    """Determinant by forward elimination with partial pivoting."""
    M = M if isinstance(M, Matrix) else Matrix(M)
    if not M.is_square():
        raise NonSquare(f"{M.nrows}x{M.ncols} matrix")
    n = M.nrows
    if n == 0:
        return ops.one
    rows = [list(r) for r in M.rows]
    scale = _matrix_scale(rows, ops)
    det = ops.one
    sign = 1
    for c in range(n):
        best, best_mag = None, None
        for i in range(c, n):
            m = ops.mag(rows[i][c])
            if not ops.is_zero(rows[i][c], scale) and (best is None or m > best_mag):
                best, best_mag = i, m
        if best is None:
            return ops.zero
        if best != c:
            rows[c], rows[best] = rows[best], rows[c]
            sign = -sign
        piv = rows[c][c]
        det = ops.mul(det, piv)
        for i in range(c + 1, n):
            f = ops.div(rows[i][c], piv)
            if ops.is_zero(f, scale):
                continue
            rows[i] = [ops.sub(x, ops.mul(f, y)) for x, y in zip(rows[i], rows[c])]
    return det if sign == 1 else ops.neg(det)


# ---------------------------------------------------------------------------
# Determinants of Scalar matrices
# ---------------------------------------------------------------------------

def _bareiss_int(rows):
    """Fraction-free determinant of an integer matrix (Bareiss)."""
    n = len(rows)
    if n == 0:
        return 1
    m = [list(r) for r in rows]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            m[i][k] = 0
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def det_scalar(M, precision=None):
    """Determinant of a Scalar matrix.

    Exact matrices go through fraction-free (Bareiss) elimination on the
    denominator-cleared integer matrix, so the result is exact; inexact
    matrices use pivoted elimination at the minimum entry precision (or
    ``precision`` when given).
    """
    M = M if isinstance(M, Matrix) else Matrix(M)
    if not M.is_square():
        raise NonSquare(f"{M.nrows}x{M.ncols} matrix")
    entries = [x for r in M.rows for x in r]
    if all(isinstance(x, Scalar) and x.is_exact for x in entries):
        from math import lcm

        scale = Fraction(1)
        int_rows = []
        for r in M.rows:
            den = lcm(*[x.q.denominator for x in r]) if r else 1
            scale *= den
            int_rows.append([int(x.q * den) for x in r])
        d = _bareiss_int(int_rows)
        return Scalar(q=Fraction(d) / scale)
    precs = [x.prec for x in entries if isinstance(x, Scalar) and not x.is_exact]
    prec = precision or (min(precs) if precs else DEFAULT_PRECISION)
    return det_eliminate(M, ScalarField(prec))


# ---------------------------------------------------------------------------
# Determinants of Laurent matrices
# ---------------------------------------------------------------------------

def _laurent_matrix(M):
    M = M if isinstance(M, Matrix) else Matrix(M)
    return M.map(LaurentPolynomial._coerce)


def _degree_window(M):
    """Row-wise degree bounds: (sum of per-row min d_lo, sum of per-row max d_hi).

    Returns None if some row is identically zero (determinant vanishes).
    """
    lo = hi = 0
    for r in M.rows:
        row_lo = [p.d_lo for p in r if not p.is_zero()]
        row_hi = [p.d_hi for p in r if not p.is_zero()]
        if not row_hi:
            return None
        lo += min(row_lo)
        hi += max(row_hi)
    return lo, hi


def det_laurent_exact(M):
    """Exact determinant over the Laurent ring via fraction-free elimination."""
    M = _laurent_matrix(M)
    if not M.is_square():
        raise NonSquare(f"{M.nrows}x{M.ncols} matrix")
    n = M.nrows
    if n == 0:
        return LaurentPolynomial.one()
    rows = [[p.shift(0) for p in r] for r in M.rows]
    sign = 1
    prev = LaurentPolynomial.one()
    for k in range(n - 1):
        if rows[k][k].is_zero():
            swap = next((i for i in range(k + 1, n) if not rows[i][k].is_zero()), None)
            if swap is None:
                return LaurentPolynomial.zero()
            rows[k], rows[swap] = rows[swap], rows[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = rows[i][j] * rows[k][k] - rows[i][k] * rows[k][j]
                rows[i][j] = num.exact_div(prev) if not num.is_zero() else num
            rows[i][k] = LaurentPolynomial.zero()
        prev = rows[k][k]
    d = rows[n - 1][n - 1]
    return d if sign == 1 else -d


_PROBE_ANGLE = "0.73906245271593025"  # fixed irrational-ish fraction of a turn


def det_laurent(M, degree_hint=None, precision=None):
    """Determinant of a matrix of Laurent polynomials.

    Exact matrices are eliminated fraction-free.  Inexact matrices are
    evaluated at the N-th roots of unity spanning the degree window
    (N = D_hi - D_lo + 1) and the coefficients recovered by inverse DFT;
    a held-out unit-modulus probe point cross-checks the result and raises
    InterpolationIllConditioned when the relative error is out of tolerance,
    signalling the caller to escalate precision.
    """
    M = _laurent_matrix(M)
    if not M.is_square():
        raise NonSquare(f"{M.nrows}x{M.ncols} matrix")
    if M.nrows == 0:
        return LaurentPolynomial.one()
    if all(p.is_exact() for r in M.rows for p in r):
        return det_laurent_exact(M)

    precs = [c.prec for r in M.rows for p in r for c in p.coeffs.values()
             if not c.is_exact]
    prec = precision or (min(precs) if precs else DEFAULT_PRECISION)
    window = degree_hint if degree_hint is not None else _degree_window(M)
    if window is None:
        return LaurentPolynomial.zero()
    d_lo, d_hi = window
    n_samples = d_hi - d_lo + 1

    work = prec + 32
    field = ScalarField(work)
    with mpmath.workprec(work):
        omega = mpmath.exp(2j * mpmath.pi / n_samples)
        values = []
        for j in range(n_samples):
            tj = Scalar(z=omega ** j, prec=work)
            Mj = M.map(lambda p: p.evaluate(tj))
            values.append(det_eliminate(Mj, field).as_mpc(work))
        # inverse DFT after peeling off the t^d_lo factor
        coeffs = {}
        shifted = [values[j] * omega ** (-j * d_lo) for j in range(n_samples)]
        for e in range(n_samples):
            acc = mpmath.mpc(0)
            for j in range(n_samples):
                acc += shifted[j] * omega ** (-j * e)
            coeffs[d_lo + e] = Scalar(z=acc / n_samples, prec=prec)
        result = LaurentPolynomial(coeffs)
        result = result.trimmed(zero_threshold(prec, max(result.max_mag(), 1)))

        # verification probe at a held-out unit-modulus point
        theta = 2 * mpmath.pi * mpmath.mpf(_PROBE_ANGLE)
        tp = Scalar(z=mpmath.exp(1j * theta), prec=work)
        direct = det_eliminate(M.map(lambda p: p.evaluate(tp)), field).as_mpc(work)
        interp = result.evaluate(tp).as_mpc(work)
        err = abs(direct - interp)
        ref = max(abs(direct), result.max_mag(), mpmath.mpf(1))
        if err > ref * zero_threshold(prec // 2, 1):
            raise InterpolationIllConditioned(
                f"probe error {mpmath.nstr(err, 5)} at precision {prec}"
            )
    return result
