"""Normalization of torsion values into symmetric torsion polynomials, and
the derived genus / fiberedness data.

A torsion value num/den is cleared into a single Laurent polynomial (the
denominator divides exactly for the knots in scope), centered so that the
exponents are symmetric about 0, and sign-normalized so the top coefficient
has complex argument in [0, pi), with a snap-to-real-axis collar that maps a
negative real top coefficient to a positive one.  The leading coefficient is
then the coefficient of t^(2g-1), which vanishes when the span falls short
of the degree bound 4g-2.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath

from .algebra import LaurentPolynomial, Scalar
from .errors import (
    AsymmetricResult,
    InexactDivision,
    OddSpan,
    ZeroPolynomial,
)

DIVISION_TOL = 1e-8
SYMMETRY_TOL = 1e-8
MONIC_TOL = 1e-6

_REAL_AXIS_SNAP = mpmath.mpf("1e-12")


@dataclass
class TorsionPolynomial:
    """Centered symmetric Laurent representative of the torsion at one
    character, with the genus used for centering and the resulting leading
    coefficient."""

    poly: LaurentPolynomial
    genus: int
    leading: Scalar
    zero: bool = False
    sample: object = None
    symmetry_residual: float = 0.0

    @property
    def span(self):
        return 0 if self.poly.is_zero() else self.poly.span

    def coefficient(self, k):
        return self.poly.coefficient(k)


def _sign_normalize(p):
    """Choose the sign so the top coefficient has argument in [0, pi).

    Coefficients within a thin collar of the real axis are snapped to it, so
    the rule is numerically stable for the (common) real monic case where
    the raw value is -1 + noise*i.
    """
    top = p.coefficient(p.d_hi)
    with mpmath.workprec(max(top.prec or 53, 53)):
        z = top.as_mpc()
        if abs(z.imag) <= _REAL_AXIS_SNAP * abs(z):
            flip = z.real < 0
        else:
            flip = mpmath.arg(z) < 0
    return (-p, -top) if flip else (p, top)


def normalize(value, genus, division_tol=DIVISION_TOL, symmetry_tol=SYMMETRY_TOL,
              sample=None):
    """Normalize a torsion value at an SL2 point into a TorsionPolynomial.

    Clears the denominator (exact division up to ``division_tol`` of the
    numerator's scale), shifts by an integer power of t so the degrees are
    centered at 0 (an odd top+bottom degree sum means no symmetric
    representative exists and flags a computation fault), verifies the
    t <-> 1/t symmetry, and applies the sign convention.
    """
    if genus < 1:
        raise ValueError("genus must be >= 1")
    if value.is_zero():
        return TorsionPolynomial(
            poly=LaurentPolynomial.zero(), genus=genus, leading=Scalar.ZERO,
            zero=True, sample=sample,
        )
    num, den = value.num, value.den
    scale = num.max_mag()
    threshold = scale * mpmath.mpf(division_tol)
    quotient, remainder = num.divide(den, threshold=threshold * mpmath.mpf("1e-4"))
    if remainder.max_mag() > threshold:
        raise InexactDivision(
            f"remainder magnitude {mpmath.nstr(remainder.max_mag(), 5)} "
            f"exceeds {mpmath.nstr(threshold, 5)}")
    p = quotient.trimmed(quotient.max_mag() * mpmath.mpf(division_tol))
    if p.is_zero():
        return TorsionPolynomial(
            poly=p, genus=genus, leading=Scalar.ZERO, zero=True, sample=sample,
        )
    total = p.d_hi + p.d_lo
    if total % 2 != 0:
        raise OddSpan(f"degrees [{p.d_lo}, {p.d_hi}] admit no integer centering")
    p = p.shift(-total // 2)
    sym_res = max(
        ((p.coefficient(k) - p.coefficient(-k)).mag() for k in p.coeffs),
        default=mpmath.mpf(0),
    )
    rel = sym_res / p.max_mag()
    if rel > symmetry_tol:
        raise AsymmetricResult(
            f"symmetry residual {mpmath.nstr(rel, 5)} exceeds {symmetry_tol}")
    p, _ = _sign_normalize(p)
    if p.span > 4 * genus - 2:
        raise ValueError(
            f"span {p.span} violates the degree bound {4 * genus - 2}")
    return TorsionPolynomial(
        poly=p,
        genus=genus,
        leading=p.coefficient(2 * genus - 1),
        zero=False,
        sample=sample,
        symmetry_residual=float(rel),
    )


def leading_coefficient(T):
    """Coefficient of t^(2g-1); zero whenever the span is below 4g-2."""
    if T.zero or T.poly.is_zero():
        return Scalar.ZERO
    return T.poly.coefficient(2 * T.genus - 1)


def genus_lower_bound(T):
    """Smallest g with 4g - 2 >= span, i.e. ceil((span + 2) / 4)."""
    if T.zero or T.poly.is_zero():
        raise ZeroPolynomial("no genus bound from the zero polynomial")
    return (T.span + 2 + 3) // 4


@dataclass
class FiberednessReport:
    consistent_with_fibered: bool
    max_leading_deviation: float
    span_min: int
    span_max: int
    genus: int
    num_samples: int

    def to_json_dict(self):
        return {
            "consistent_with_fibered": self.consistent_with_fibered,
            "max_leading_deviation": self.max_leading_deviation,
            "span_min": self.span_min,
            "span_max": self.span_max,
            "genus": self.genus,
            "num_samples": self.num_samples,
        }


def fiberedness_evidence(samples, monic_tol=MONIC_TOL):
    """Necessary-condition check for fiberedness over sampled characters:
    every sample must have full span 4g - 2 and leading coefficient within
    ``monic_tol`` of 1."""
    nonzero = [T for T in samples if not (T.zero or T.poly.is_zero())]
    if not nonzero:
        raise ValueError("need at least one nonzero torsion polynomial sample")
    genus = nonzero[0].genus
    spans = [T.span for T in nonzero]
    deviations = [(leading_coefficient(T) - Scalar.ONE).mag() for T in nonzero]
    max_dev = max(deviations)
    consistent = all(s == 4 * genus - 2 for s in spans) and max_dev < monic_tol
    return FiberednessReport(
        consistent_with_fibered=bool(consistent),
        max_leading_deviation=float(max_dev),
        span_min=min(spans),
        span_max=max(spans),
        genus=genus,
        num_samples=len(nonzero),
    )
