"""Fox calculus, twisted chain complexes of presentation 2-complexes, the
Wada invariant (twisted Alexander polynomial), and the algebraic torsion of
a based chain complex.

The two torsion routes -- determinant ratio of the Fox Jacobian versus the
alternating product of base-change determinants -- are deliberately kept
independent so they can cross-validate each other.
"""

from __future__ import annotations

import mpmath

from .algebra import (
    DEFAULT_PRECISION,
    LaurentFractionField,
    LaurentPolynomial,
    Matrix,
    RationalFunction,
    Scalar,
    ScalarField,
    det_eliminate,
    det_laurent,
    kernel_image,
    solve_columns,
    zero_threshold,
)
from .errors import (
    AllColumnsVanish,
    DenominatorVanishes,
    HomologyBasisMismatch,
    NotAComplex,
)
from .knots import Word, abelianize


# ---------------------------------------------------------------------------
# Group ring and Fox derivatives
# ---------------------------------------------------------------------------

class GroupRingElement:
    """Integer formal sum of freely reduced words."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        cleaned = {}
        if terms:
            for w, c in terms.items():
                if c:
                    cleaned[w] = cleaned.get(w, 0) + c
        self.terms = {w: c for w, c in cleaned.items() if c}

    @classmethod
    def zero(cls):
        return cls()

    @classmethod
    def of_word(cls, w, coeff=1):
        return cls({w: coeff})

    @classmethod
    def one(cls):
        return cls({Word(): 1})

    def __add__(self, other):
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out.get(w, 0) + c
        return GroupRingElement(out)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return GroupRingElement({w: -c for w, c in self.terms.items()})

    def __mul__(self, other):
        out = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                w = w1 * w2
                out[w] = out.get(w, 0) + c1 * c2
        return GroupRingElement(out)

    def __eq__(self, other):
        return isinstance(other, GroupRingElement) and self.terms == other.terms

    def is_zero(self):
        return not self.terms

    def __repr__(self):
        return f"GroupRingElement({self.terms!r})"


def fox_derivative(w, gen_index):
    """Free derivative of a word with respect to generator ``gen_index``.

    Satisfies dx/dx = 1, dy/dx = 0, d(x^-1)/dx = -x^-1, and the product rule
    d(uv)/dx = du/dx + u dv/dx.  Computed by a single left-to-right pass with
    a running prefix.
    """
    terms = {}
    prefix = Word()
    for letter in w:
        if letter == gen_index:
            terms[prefix] = terms.get(prefix, 0) + 1
        elif letter == -gen_index:
            neg = prefix * Word([letter])
            terms[neg] = terms.get(neg, 0) - 1
        prefix = prefix * Word([letter])
    return GroupRingElement(terms)


# ---------------------------------------------------------------------------
# Pushing group-ring elements through alpha (x) rho
# ---------------------------------------------------------------------------

def alpha_rho_word(P, rep, w):
    """The matrix of Laurent polynomials t^alpha(w) * rho(w)."""
    exp = abelianize(w, P)
    mat = rep.word_matrix(w)
    return mat.map(lambda s: LaurentPolynomial({exp: s}))


def alpha_rho_element(P, rep, elem):
    """Push a group-ring element through alpha (x) rho, block-by-block."""
    n = rep.dim
    zero = LaurentPolynomial.zero()
    total = Matrix([[zero for _ in range(n)] for _ in range(n)])
    for w, c in elem.terms.items():
        block = alpha_rho_word(P, rep, w)
        total = total + block.map(lambda p: p * Scalar.exact(c))
    return total


def _block_matrix(blocks):
    """Assemble a matrix from a 2D grid of equal-size square blocks."""
    if not blocks or not blocks[0]:
        return Matrix([])
    n = blocks[0][0].nrows
    rows = []
    for brow in blocks:
        for i in range(n):
            rows.append([entry for blk in brow for entry in blk.rows[i]])
    return Matrix(rows)


# ---------------------------------------------------------------------------
# Torsion values (fractions modulo units +-t^k)
# ---------------------------------------------------------------------------

def laurent_unit_match(p, q, tol=1e-8):
    """Test p == unit * t^k * q with unit = +-1; returns (ok, unit, shift).

    Comparison is coefficientwise with relative tolerance ``tol`` after both
    polynomials are trimmed and aligned at their lowest degree.
    """
    scale_p, scale_q = p.max_mag(), q.max_mag()
    big = max(scale_p, scale_q, mpmath.mpf(1))
    if scale_p <= tol * big and scale_q <= tol * big:
        return True, 1, 0
    if scale_p <= tol * big or scale_q <= tol * big:
        return False, 0, 0
    p = p.trimmed(scale_p * mpmath.mpf(tol))
    q = q.trimmed(scale_q * mpmath.mpf(tol))
    shift = p.d_lo - q.d_lo
    q = q.shift(shift)
    if p.d_hi != q.d_hi:
        return False, 0, shift
    k_star = max(p.coeffs, key=lambda d: p.coeffs[d].mag())
    qc = q.coefficient(k_star)
    if qc.mag() <= tol * scale_q:
        return False, 0, shift
    lam = p.coefficient(k_star) / qc
    unit = None
    for candidate in (1, -1):
        if (lam - Scalar.exact(candidate)).mag() <= mpmath.mpf(tol) * max(lam.mag(), 1):
            unit = candidate
            break
    if unit is None:
        return False, 0, shift
    diff = p - q * Scalar.exact(unit)
    if diff.max_mag() > mpmath.mpf(tol) * scale_p:
        return False, unit, shift
    return True, unit, shift


class TorsionValue:
    """A torsion as a fraction num/den of Laurent polynomials, considered up
    to the unit ambiguity +-t^k."""

    __slots__ = ("num", "den", "column", "dim")

    AMBIGUITY = "unit * t^k with unit in {+1, -1}"

    def __init__(self, num, den, column=None, dim=None):
        if den.is_zero():
            raise DenominatorVanishes("torsion value with zero denominator")
        self.num = num
        self.den = den
        self.column = column
        self.dim = dim

    def is_zero(self):
        return self.num.is_zero()

    def as_rational_function(self):
        return RationalFunction(self.num, self.den, reduce=False)

    def equal_up_to_unit(self, other, tol=1e-8):
        """Equality modulo +-t^k, tested by cross-multiplication."""
        if isinstance(other, RationalFunction):
            other = TorsionValue(other.num, other.den)
        ok, _, _ = laurent_unit_match(
            self.num * other.den, other.num * self.den, tol=tol
        )
        return ok

    def __repr__(self):
        return (f"TorsionValue(({self.num.to_string()}) / "
                f"({self.den.to_string()}) mod {self.AMBIGUITY})")


# ---------------------------------------------------------------------------
# Wada invariant
# ---------------------------------------------------------------------------

def _column_indices(P, column):
    if column is None:
        return list(range(P.num_generators))
    if isinstance(column, str):
        return [P.generators.index(column)]
    return [int(column)]


def wada_invariant(P, rep, column=None, precision=None):
    """Twisted Alexander polynomial as a determinant ratio.

    For a deficiency-one presentation, delete one generator column from the
    Fox Jacobian pushed through alpha (x) rho, take its determinant as the
    numerator, and divide by det of (alpha (x) rho)(x_j) - I for the deleted
    generator.  Columns are tried in generator order; a vanishing denominator
    moves on to the next column, and if every usable column yields a zero
    numerator the twisted homology is nonzero and AllColumnsVanish is raised.
    """
    if P.deficiency() != 1:
        raise ValueError("wada_invariant requires a deficiency-one presentation")
    n = rep.dim
    prec = precision or DEFAULT_PRECISION
    jac = [[alpha_rho_element(P, rep, fox_derivative(r, j + 1))
            for j in range(P.num_generators)]
           for r in P.relators]
    identity = Matrix.identity(n).map(LaurentPolynomial.constant)

    saw_valid_column = False
    for j in _column_indices(P, column):
        gen_word = Word([j + 1])
        den = det_laurent(alpha_rho_word(P, rep, gen_word) - identity,
                          precision=prec)
        if den.is_zero():
            if column is not None:
                raise DenominatorVanishes(
                    f"denominator vanishes for column {P.generators[j]!r}")
            continue
        saw_valid_column = True
        deleted = [[row[c] for c in range(P.num_generators) if c != j]
                   for row in jac]
        num = det_laurent(_block_matrix(deleted), precision=prec)
        if num.is_zero():
            if column is not None:
                raise AllColumnsVanish(
                    f"numerator vanishes for column {P.generators[j]!r}")
            continue
        return TorsionValue(num, den, column=P.generators[j], dim=n)
    if saw_valid_column:
        raise AllColumnsVanish(
            "every usable column gives a vanishing numerator; "
            "twisted homology is nonzero and the torsion polynomial is 0")
    raise DenominatorVanishes("no column has a nonvanishing denominator")


# ---------------------------------------------------------------------------
# Based chain complexes and algebraic torsion
# ---------------------------------------------------------------------------

class BasedChainComplex:
    """Finite based chain complex C_n -> ... -> C_0 over a field.

    ``boundaries`` lists the boundary matrices [d_n, ..., d_1]; entries are
    Scalars (viewed in the scalar field) or Laurent polynomials / rational
    functions (viewed in the fraction field of the Laurent ring).  The
    distinguished basis in each degree is the standard one the matrices are
    written in.  ``homology_bases`` optionally maps degree -> list of cycle
    vectors representing a homology basis.
    """

    def __init__(self, boundaries, homology_bases=None, dims=None,
                 precision=None, chain_tol=1e-6):
        self.boundaries = [b if isinstance(b, Matrix) else Matrix(b)
                           for b in boundaries]
        self.homology_bases = dict(homology_bases or {})
        self.precision = precision
        if self.boundaries:
            self.dims = [self.boundaries[0].ncols] + \
                        [b.nrows for b in self.boundaries]
        elif dims is not None:
            self.dims = list(dims)
        else:
            raise ValueError("empty complex requires explicit dims")
        for upper, lower in zip(self.boundaries, self.boundaries[1:]):
            if lower.ncols != upper.nrows:
                raise NotAComplex("boundary dimensions do not chain")
        self._laurent = any(
            isinstance(x, (LaurentPolynomial, RationalFunction))
            for b in self.boundaries for r in b.rows for x in r
        )
        self._check_boundary_squares(chain_tol)

    @property
    def top_degree(self):
        return len(self.dims) - 1

    def dim(self, i):
        # dims is stored top degree first
        return self.dims[self.top_degree - i]

    def boundary(self, i):
        """The map d_i : C_i -> C_{i-1} (1 <= i <= top degree)."""
        return self.boundaries[self.top_degree - i]

    def field_ops(self, precision=None):
        prec = precision or self.precision or DEFAULT_PRECISION
        if self._laurent:
            return LaurentFractionField(prec)
        return ScalarField(prec)

    def _lift(self, x):
        if self._laurent:
            return RationalFunction._coerce(x)
        return x

    def lifted_boundary(self, i):
        return self.boundary(i).map(self._lift)

    def _check_boundary_squares(self, chain_tol):
        for upper, lower in zip(self.boundaries, self.boundaries[1:]):
            prod = lower * upper
            if self._laurent:
                mags = [RationalFunction._coerce(x).value_mag()
                        for r in prod.rows for x in r]
                ref = max(
                    [RationalFunction._coerce(x).value_mag()
                     for m in (lower, upper) for r in m.rows for x in r]
                    + [mpmath.mpf(1)]
                )
            else:
                mags = [x.mag() for r in prod.rows for x in r]
                ref = max([x.mag() for m in (lower, upper)
                           for r in m.rows for x in r] + [mpmath.mpf(1)])
            if any(m > chain_tol * ref for m in mags):
                raise NotAComplex("boundary composition is not zero")


def _perturb_basis(basis, ops, seed):
    """Replace a basis by its image under a seeded unimodular transformation."""
    import random

    if len(basis) < 2:
        return basis
    rng = random.Random(seed)
    k = len(basis)
    lower = [[1 if i == j else (rng.randint(-2, 2) if i > j else 0)
              for j in range(k)] for i in range(k)]
    upper = [[1 if i == j else (rng.randint(-2, 2) if i < j else 0)
              for j in range(k)] for i in range(k)]
    t = [[sum(lower[i][m] * upper[m][j] for m in range(k)) for j in range(k)]
         for i in range(k)]
    out = []
    for i in range(k):
        v = None
        for j in range(k):
            if t[i][j] == 0:
                continue
            scaled = [ops.mul(x, _int_elem(ops, t[i][j])) for x in basis[j]]
            v = scaled if v is None else [ops.add(a, b) for a, b in zip(v, scaled)]
        out.append(v)
    return out


def _int_elem(ops, c):
    if isinstance(ops, LaurentFractionField):
        return RationalFunction._coerce(Scalar.exact(c))
    return Scalar.exact(c)


def algebraic_torsion(C, precision=None, image_basis_seed=None):
    """Algebraic torsion of a based chain complex.

    Chooses bases b_i of the image of the incoming boundary in each degree,
    lifts the supplied homology basis (cycles) and a preimage of b_{i-1},
    forms the base-change determinant [b_i h_i b_{i-1} / c_i] against the
    distinguished basis, and returns the alternating product with exponent
    (-1)^(i+1).  The result does not depend on the choice of the b_i (the
    ``image_basis_seed`` hook exists so tests can verify exactly that).

    Returns a Scalar for scalar complexes and a RationalFunction for Laurent
    ones.
    """
    ops = C.field_ops(precision)
    n = C.top_degree

    kernels = {}
    images = {i: [] for i in range(n + 1)}
    for i in range(n, 0, -1):
        ker, img = kernel_image(C.lifted_boundary(i), ops)
        kernels[i] = ker
        images[i - 1] = img
    # degree 0: the outgoing boundary is the zero map
    kernels[0] = [[ops.one if r == c else ops.zero for r in range(C.dim(0))]
                  for c in range(C.dim(0))]

    if image_basis_seed is not None:
        for i in range(n + 1):
            images[i] = _perturb_basis(images[i], ops, image_basis_seed + i)

    result_num = ops.one
    result_den = ops.one
    for i in range(n + 1):
        d_i = C.dim(i)
        h_rank = len(kernels[i]) - len(images[i])
        supplied = C.homology_bases.get(i, [])
        if len(supplied) != h_rank:
            raise HomologyBasisMismatch(
                f"degree {i}: homology rank {h_rank}, basis of size {len(supplied)}"
            )
        h_vectors = [[self_lift for self_lift in map(C._lift, v)] for v in supplied]
        if i >= 1 and h_vectors:
            bd = C.lifted_boundary(i)
            scale = max([ops.mag(x) for r in bd.rows for x in r] + [mpmath.mpf(1)])
            for v in h_vectors:
                img = [None] * bd.nrows
                for r_idx in range(bd.nrows):
                    acc = ops.zero
                    for c_idx in range(bd.ncols):
                        acc = ops.add(acc, ops.mul(bd.rows[r_idx][c_idx], v[c_idx]))
                    img[r_idx] = acc
                if any(not ops.is_zero(x, scale) for x in img):
                    raise HomologyBasisMismatch(
                        f"degree {i}: supplied homology vector is not a cycle")
        lifts = []
        if i >= 1 and images[i - 1]:
            lifts = solve_columns(C.lifted_boundary(i), images[i - 1], ops)
        columns = images[i] + h_vectors + lifts
        if len(columns) != d_i:
            raise HomologyBasisMismatch(
                f"degree {i}: assembled basis has {len(columns)} of {d_i} vectors")
        A = Matrix([[columns[c][r] for c in range(d_i)] for r in range(d_i)])
        det = det_eliminate(A, ops)
        if ops.is_zero(det, 1):
            raise HomologyBasisMismatch(
                f"degree {i}: base-change matrix is singular")
        if i % 2 == 1:
            result_num = ops.mul(result_num, det)
        else:
            result_den = ops.mul(result_den, det)
    return ops.div(result_num, result_den)


# ---------------------------------------------------------------------------
# Presentation 2-complexes
# ---------------------------------------------------------------------------

def presentation_complex(P, rep, precision=None, chain_tol=1e-6):
    """Twisted chain complex of the presentation 2-complex.

    C_2 -> C_1 -> C_0 with d_2 the full Fox Jacobian pushed through
    alpha (x) rho (block (generator, relator)) and d_1 the column of blocks
    (alpha (x) rho)(x_j) - I.  Bases are the cells tensor the standard basis.
    The fundamental Fox identity sum_j dr/dx_j (x_j - 1) = r - 1 forces
    d_1 d_2 = 0 whenever rho satisfies the relators.
    """
    n = rep.dim
    g = P.num_generators
    identity = Matrix.identity(n).map(LaurentPolynomial.constant)
    # Row-vector convention underlies the Fox identity
    # sum_j dr/dx_j (x_j - 1) = r - 1, so the column-convention boundary
    # matrices are the transposes of the Jacobian block matrices.
    jac_rows = [[alpha_rho_element(P, rep, fox_derivative(r, j + 1))
                 for j in range(g)]
                for r in P.relators]
    d1_col = [[alpha_rho_word(P, rep, Word([j + 1])) - identity]
              for j in range(g)]
    d2 = _block_matrix(jac_rows).transpose()
    d1 = _block_matrix(d1_col).transpose()
    return BasedChainComplex([d2, d1], precision=precision, chain_tol=chain_tol)
