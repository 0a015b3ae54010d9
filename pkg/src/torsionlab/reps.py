"""SL2(C) representation points of 2-bridge knot groups, trace functions,
parametrized solving for the nonabelian representation curve, and
predictor-corrector path following toward ideal points.

The parametrization assigns the two meridional generators

    a |-> [[s, 1], [0, 1/s]],      b |-> [[s, 0], [u, 1/s]],

so the relator condition cuts out a curve in the (s, u) plane.  The u = 0
locus is the reducible (abelian) solution and is always divided out before
root finding.  Ideal-point approach is witnessed numerically: a monitored
trace function exceeding 1e6 while growing monotonically over five
consecutive samples.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import mpmath

from .algebra import (
    DEFAULT_PRECISION,
    MAX_PRECISION,
    LaurentPolynomial,
    Matrix,
    Scalar,
)
from .errors import ContinuationStalled, DegenerateParameter
from .knots import Word

TRACE_BLOWUP = 1e6
MONITORED_TRACES = ("I_meridian", "I_ab", "I_ab_inv")

_PARABOLIC_MARGIN = 0.05


# ---------------------------------------------------------------------------
# SL2 matrices and representation points
# ---------------------------------------------------------------------------

class SL2Matrix:
    """2x2 matrix of complex Scalars with determinant 1 (within tolerance)."""

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a, b, c, d, check=False, tol=1e-9):
        self.a, self.b, self.c, self.d = a, b, c, d
        if check:
            err = (self.det() - Scalar.ONE).mag()
            if err > tol:
                raise ValueError(f"determinant differs from 1 by {err}")

    @classmethod
    def identity(cls):
        return cls(Scalar.ONE, Scalar.ZERO, Scalar.ZERO, Scalar.ONE)

    def det(self):
        return self.a * self.d - self.b * self.c

    def trace(self):
        return self.a + self.d

    def __mul__(self, o):
        return SL2Matrix(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )

    def inverse(self):
        # adjugate; exact inverse when det is exactly 1
        return SL2Matrix(self.d, -self.b, -self.c, self.a)

    def entries(self):
        return (self.a, self.b, self.c, self.d)

    def to_matrix(self):
        return Matrix([[self.a, self.b], [self.c, self.d]])

    def identity_distance(self):
        return max(
            (self.a - Scalar.ONE).mag(),
            self.b.mag(),
            self.c.mag(),
            (self.d - Scalar.ONE).mag(),
        )

    def __repr__(self):
        return f"SL2Matrix([[{self.a!r}, {self.b!r}], [{self.c!r}, {self.d!r}]])"


class RepresentationPoint:
    """Assignment of SL2 matrices to the generators of a presentation.

    Carries the relator residual (max entry magnitude of rho(relator) - I
    over all relators) and, when produced by the parametrized solver, the
    (s, u) coordinates.  ``word_matrix`` is the evaluation hook the torsion
    machinery uses.
    """

    dim = 2

    def __init__(self, presentation, matrices, s=None, u=None):
        self.presentation = presentation
        self.matrices = dict(matrices)
        self.s = s
        self.u = u
        self._inverses = {g: m.inverse() for g, m in self.matrices.items()}
        self.residual = self._relator_residual()

    def _relator_residual(self):
        worst = mpmath.mpf(0)
        for r in self.presentation.relators:
            worst = max(worst, self.sl2_image(r).identity_distance())
        return worst

    def sl2_image(self, w):
        m = SL2Matrix.identity()
        gens = self.presentation.generators
        for letter in w:
            name = gens[abs(letter) - 1]
            m = m * (self.matrices[name] if letter > 0 else self._inverses[name])
        return m

    def word_matrix(self, w):
        return self.sl2_image(w).to_matrix()

    def irreducibility_certificate(self):
        """Max |tr[X,Y] - 2| over generator pairs; > 0 means no common
        eigenvector, i.e. the representation is irreducible."""
        gens = list(self.matrices)
        worst = mpmath.mpf(0)
        for i in range(len(gens)):
            for j in range(i + 1, len(gens)):
                x, y = self.matrices[gens[i]], self.matrices[gens[j]]
                comm = x * y * x.inverse() * y.inverse()
                worst = max(worst, (comm.trace() - Scalar.exact(2)).mag())
        return worst

    def is_irreducible(self, tol=1e-9):
        return self.irreducibility_certificate() > tol

    def conjugated(self, g):
        """The point conjugated by an SL2 change of basis (same character)."""
        gi = g.inverse()
        return RepresentationPoint(
            self.presentation,
            {name: g * m * gi for name, m in self.matrices.items()},
        )


class TrivialRepresentation:
    """The 1-dimensional trivial representation (exact rational mode)."""

    dim = 1

    def __init__(self, presentation):
        self.presentation = presentation
        self.residual = mpmath.mpf(0)

    def word_matrix(self, w):
        return Matrix([[Scalar.ONE]])


def trace_function(w, point):
    """Trace of the word's image: the coordinate function of the character."""
    return point.sl2_image(w).trace()


# ---------------------------------------------------------------------------
# Parametrized candidates and curve solving
# ---------------------------------------------------------------------------

def _coerce_param(x, prec):
    if isinstance(x, Scalar):
        return x
    if isinstance(x, (tuple, list)):
        return Scalar.from_real_imag(x[0], x[1], prec)
    if isinstance(x, complex):
        return Scalar.from_real_imag(repr(x.real), repr(x.imag), prec)
    return Scalar.from_real_imag(x, "0", prec)


def riley_candidate(s, u, presentation, precision=DEFAULT_PRECISION):
    """Candidate representation at parameters (s, u); the residual is
    computed but NOT required to be small -- candidates may be off-curve."""
    s = _coerce_param(s, precision)
    u = _coerce_param(u, precision)
    if s.is_zero():
        raise DegenerateParameter("s = 0")
    inv_s = Scalar.ONE / s
    mats = {
        "a": SL2Matrix(s, Scalar.ONE, Scalar.ZERO, inv_s),
        "b": SL2Matrix(s, Scalar.ZERO, u, inv_s),
    }
    return RepresentationPoint(presentation, mats, s=s, u=u)


def _generator_polynomial_matrices(s):
    """Images of a, b, a^-1, b^-1 as 2x2 matrices of polynomials in u."""
    inv_s = Scalar.ONE / s
    const = LaurentPolynomial.constant
    u_poly = LaurentPolynomial.t_power(1)
    zero = LaurentPolynomial.zero()
    a = Matrix([[const(s), const(Scalar.ONE)], [zero, const(inv_s)]])
    ai = Matrix([[const(inv_s), const(-Scalar.ONE)], [zero, const(s)]])
    b = Matrix([[const(s), zero], [u_poly, const(inv_s)]])
    bi = Matrix([[const(inv_s), zero], [-u_poly, const(s)]])
    return {1: a, -1: ai, 2: b, -2: bi}


def relator_entry_polynomials(presentation, s):
    """Entries of rho(relator) - I as polynomials in u, one list per relator."""
    table = _generator_polynomial_matrices(s)
    out = []
    ident = Matrix.identity(2).map(LaurentPolynomial.constant)
    for r in presentation.relators:
        m = Matrix.identity(2).map(LaurentPolynomial.constant)
        for letter in r:
            m = m * table[letter]
        diff = m - ident
        out.append([diff[0, 0], diff[0, 1], diff[1, 0], diff[1, 1]])
    return out


def _poly_roots(p, prec):
    """All roots of a polynomial in u given as a LaurentPolynomial (d_lo >= 0
    after stripping the trivial u^k factor)."""
    p = p.shift(-p.d_lo)  # strip the abelian u = 0 locus
    top = p.d_hi
    if top == 0:
        return []
    scale = p.max_mag()
    coeffs = []
    for d in range(top, -1, -1):
        coeffs.append(p.coefficient(d).as_mpc(prec))
    with mpmath.workprec(prec):
        roots = mpmath.polyroots(coeffs, maxsteps=200, extraprec=prec // 2)
    return [Scalar(z=r, prec=prec) for r in roots]


def solve_u(s, presentation, precision=DEFAULT_PRECISION, residual_tol=1e-10):
    """All u with (s, u) on the nonabelian representation curve.

    The relator image entries are assembled symbolically as polynomials in u,
    the lowest-degree nontrivial entry is root-solved, and every candidate is
    certified by the full relator residual of its candidate point.  Returns
    the certified roots sorted by (Re, Im); the list may be empty.
    """
    s = _coerce_param(s, precision)
    if s.is_zero():
        raise DegenerateParameter("s = 0")
    entries = [e for group in relator_entry_polynomials(presentation, s)
               for e in group]
    scale = max([e.max_mag() for e in entries] + [mpmath.mpf(1)])
    nontrivial = [e for e in entries
                  if not e.is_zero() and e.max_mag() > scale * mpmath.mpf("1e-30")
                  and e.d_hi - e.d_lo > 0]
    if not nontrivial:
        return []
    nontrivial.sort(key=lambda e: e.d_hi - e.d_lo)
    candidates = _poly_roots(nontrivial[0], precision)
    good = []
    for u in candidates:
        point = riley_candidate(s, u, presentation, precision)
        if point.residual < residual_tol:
            good.append((u, point))
    # dedupe clustered roots
    out = []
    with mpmath.workprec(53):
        cluster_tol = mpmath.power(2, -(precision // 3))
        for u, point in good:
            if any(abs(u.z - v.z) <= cluster_tol * max(1, abs(u.z)) for v, _ in out):
                continue
            out.append((u, point))
    out.sort(key=lambda t: (t[0].z.real, t[0].z.imag))
    return [u for u, _ in out]


# ---------------------------------------------------------------------------
# Path following toward ideal points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Schedule:
    """Multiplicative drive of the u coordinate: u_k = u_0 * ratio^k."""

    ratio: float = 2.0
    steps: int = 40


@dataclass
class CurveSample:
    """A certified point on the representation curve with its trace
    coordinates and the path parameter that produced it."""

    point: RepresentationPoint
    step: int
    s: Scalar
    u: Scalar
    traces: dict = field(default_factory=dict)


@dataclass
class ContinuationResult:
    samples: list
    diverging_traces: list
    precision: int


def compute_traces(presentation, point):
    word_ab = Word([1, 2])
    word_ab_inv = Word([1, -2])
    return {
        "I_meridian": trace_function(presentation.meridian, point),
        "I_ab": trace_function(word_ab, point),
        "I_ab_inv": trace_function(word_ab_inv, point),
    }


class RelatorCurveSystem:
    """The curve cut out by the relator equations, with a Gauss-Newton
    corrector in s (u held fixed) and a global root-solve fallback."""

    def __init__(self, presentation):
        self.presentation = presentation
        if presentation.num_generators != 2:
            raise ValueError("parametrized continuation needs 2 generators")

    @staticmethod
    def _letter_matrices(s, u):
        one = mpmath.mpc(1)
        zero = mpmath.mpc(0)
        inv = 1 / s
        d_inv = -inv * inv
        mats = {
            1: ((s, one), (zero, inv)),
            -1: ((inv, -one), (zero, s)),
            2: ((s, zero), (u, inv)),
            -2: ((inv, zero), (-u, s)),
        }
        ders = {
            1: ((one, zero), (zero, d_inv)),
            -1: ((d_inv, zero), (zero, one)),
            2: ((one, zero), (zero, d_inv)),
            -2: ((d_inv, zero), (zero, one)),
        }
        return mats, ders

    @staticmethod
    def _mat_mul(x, y):
        return (
            (x[0][0] * y[0][0] + x[0][1] * y[1][0],
             x[0][0] * y[0][1] + x[0][1] * y[1][1]),
            (x[1][0] * y[0][0] + x[1][1] * y[1][0],
             x[1][0] * y[0][1] + x[1][1] * y[1][1]),
        )

    @staticmethod
    def _mat_add(x, y):
        return (
            (x[0][0] + y[0][0], x[0][1] + y[0][1]),
            (x[1][0] + y[1][0], x[1][1] + y[1][1]),
        )

    def _residual_and_derivative(self, s, u):
        """rho(relator) - I and its s-derivative, flattened over relators."""
        mats, ders = self._letter_matrices(s, u)
        one = mpmath.mpc(1)
        zero = mpmath.mpc(0)
        res, der = [], []
        for r in self.presentation.relators:
            v = ((one, zero), (zero, one))
            d = ((zero, zero), (zero, zero))
            for letter in r:
                d = self._mat_add(self._mat_mul(d, mats[letter]),
                                  self._mat_mul(v, ders[letter]))
                v = self._mat_mul(v, mats[letter])
            res.extend([v[0][0] - one, v[0][1], v[1][0], v[1][1] - one])
            der.extend([d[0][0], d[0][1], d[1][0], d[1][1]])
        return res, der

    def residual_mag(self, s, u, prec):
        with mpmath.workprec(prec):
            res, _ = self._residual_and_derivative(s.as_mpc(prec), u.as_mpc(prec))
            return max(abs(x) for x in res)

    def correct(self, u, s_guess, prec, tol, max_iter=60):
        """Gauss-Newton iteration on the relator residual as a function of s."""
        with mpmath.workprec(prec):
            uu = u.as_mpc(prec)
            s = s_guess.as_mpc(prec)
            target = mpmath.mpf(tol) * mpmath.mpf("1e-4")
            floor = mpmath.power(2, -(prec - 16))
            goal = max(target, floor)
            for _ in range(max_iter):
                res, der = self._residual_and_derivative(s, uu)
                worst = max(abs(x) for x in res)
                if worst < goal:
                    return Scalar(z=s, prec=prec)
                jtj = mpmath.mpf(0)
                jtf = mpmath.mpc(0)
                for f, j in zip(res, der):
                    jtj += abs(j) ** 2
                    jtf += mpmath.conj(j) * f
                if jtj == 0:
                    return None
                step = -jtf / jtj
                s = s + step
                if abs(s) == 0:
                    return None
            res, _ = self._residual_and_derivative(s, uu)
            if max(abs(x) for x in res) < mpmath.mpf(tol):
                return Scalar(z=s, prec=prec)
            return None

    def all_roots(self, u, prec, residual_tol):
        """Every s on the curve over fixed u, via the symbolic entry
        polynomials in s (clears 1/s powers first)."""
        u = _coerce_param(u, prec)
        table = {}
        const = LaurentPolynomial.constant
        s_poly = LaurentPolynomial.t_power(1)
        s_inv = LaurentPolynomial.t_power(-1)
        zero = LaurentPolynomial.zero()
        table[1] = Matrix([[s_poly, const(Scalar.ONE)], [zero, s_inv]])
        table[-1] = Matrix([[s_inv, const(-Scalar.ONE)], [zero, s_poly]])
        table[2] = Matrix([[s_poly, zero], [const(u), s_inv]])
        table[-2] = Matrix([[s_inv, zero], [const(-u), s_poly]])
        ident = Matrix.identity(2).map(LaurentPolynomial.constant)
        roots = []
        for r in self.presentation.relators:
            m = Matrix.identity(2).map(LaurentPolynomial.constant)
            for letter in r:
                m = m * table[letter]
            diff = m - ident
            entries = [diff[0, 0], diff[0, 1], diff[1, 0], diff[1, 1]]
            entries = [e for e in entries if not e.is_zero() and e.span > 0]
            if not entries:
                continue
            entries.sort(key=lambda e: e.span)
            for cand in _poly_roots(entries[0], prec):
                if cand.is_zero():
                    continue
                if self.residual_mag(cand, u, prec) < residual_tol:
                    roots.append(cand)
            break
        return roots

    def build_point(self, s, u, prec):
        return riley_candidate(s, u, self.presentation, prec)


def follow_to_ideal(presentation, seed, schedule, precision=DEFAULT_PRECISION,
                    residual_tol=1e-10, system=None):
    """Predictor-corrector continuation along the representation curve,
    driving |u| through u_k = u_0 * ratio^k.

    Every emitted sample satisfies the curve equations to within
    ``residual_tol``.  The corrector escalates precision (doubling, capped)
    and falls back to a global root solve -- choosing the root nearest the
    predictor, ties broken by smallest argument -- before giving up with
    ContinuationStalled.  Near the parabolic locus s = +-1 the step is
    halved to keep branch tracking honest.
    """
    system = system or RelatorCurveSystem(presentation)
    prec = precision
    s0 = _coerce_param(seed[0], prec)
    u0 = _coerce_param(seed[1], prec)
    if system.residual_mag(s0, u0, prec) >= residual_tol:
        raise ValueError("seed point is not on the curve to within tolerance")
    if schedule.ratio <= 1:
        raise ValueError("schedule ratio must exceed 1")

    def emit(k, s, u, p):
        point = system.build_point(s, u, p)
        return CurveSample(point=point, step=k, s=s, u=u,
                           traces=compute_traces(presentation, point))

    samples = [emit(0, s0, u0, prec)]
    precisions = [prec]
    s_prev, s_cur = None, s0
    near_parabolic = False
    with mpmath.workprec(53):
        ratio = mpmath.mpf(repr(float(schedule.ratio)))

    for k in range(1, schedule.steps + 1):
        u_k = u0 * Scalar.inexact(ratio ** k, prec)
        if s_prev is not None and not s_prev.is_zero():
            s_pred = s_cur * (s_cur / s_prev)
        else:
            s_pred = s_cur
        substeps = 2 if near_parabolic else 1
        s_new = None
        attempt_prec = prec
        while attempt_prec <= MAX_PRECISION:
            guess = s_pred
            ok = True
            for m in range(1, substeps + 1):
                u_mid = u0 * Scalar.inexact(ratio ** (k - 1 + mpmath.mpf(m) / substeps),
                                            attempt_prec)
                corrected = system.correct(u_mid, guess, attempt_prec, residual_tol)
                if corrected is None:
                    ok = False
                    break
                guess = corrected
            if ok:
                s_new = guess
                break
            if substeps < 4:
                substeps *= 2
                continue
            if attempt_prec >= MAX_PRECISION:
                break
            attempt_prec = min(2 * attempt_prec, MAX_PRECISION)
        if s_new is None and hasattr(system, "all_roots"):
            roots = system.all_roots(u_k, attempt_prec, residual_tol)
            if roots:
                with mpmath.workprec(attempt_prec):
                    sp = s_pred.as_mpc(attempt_prec)
                    roots.sort(key=lambda r: (float(abs(r.z - sp)),
                                              float(mpmath.arg(r.z))))
                s_new = roots[0]
        if s_new is None:
            raise ContinuationStalled(
                f"corrector failed at step {k}", last_good_index=k - 1,
                partial=ContinuationResult(samples, _diverging(samples),
                                           attempt_prec))
        prec = attempt_prec
        samples.append(emit(k, s_new, u_k, prec))
        precisions.append(prec)
        s_prev, s_cur = s_cur, s_new
        with mpmath.workprec(53):
            z = s_new.as_mpc(53)
            near_parabolic = min(abs(z - 1), abs(z + 1)) < _PARABOLIC_MARGIN

    return ContinuationResult(samples, _diverging(samples), prec)


def _diverging(samples, threshold=TRACE_BLOWUP, run=5):
    """Monitored traces that exceed the blow-up threshold and grow
    monotonically over the last ``run`` samples."""
    out = []
    for name in MONITORED_TRACES:
        mags = [s.traces[name].mag() for s in samples]
        if not mags or max(mags) <= threshold:
            continue
        tail = mags[-run:]
        if len(tail) >= 2 and all(x < y for x, y in zip(tail, tail[1:])):
            out.append(name)
    return out
