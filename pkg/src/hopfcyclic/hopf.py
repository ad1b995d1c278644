"""Finite-dimensional Hopf algebras as validated structure-constant data.

An algebra is a rank-3 multiplication tensor over a fixed basis whose element
0 is the unit; a Hopf algebra adds comultiplication, counit and antipode
tensors.  All axioms are finite tensor identities and are checked as such,
producing witness-carrying reports rather than exceptions: a failed axiom is
a result, not a crash.
"""

from fractions import Fraction

from .linalg import SparseMatrix, vec_addmul, vec_clean


class NotAutomorphism(Exception):
    pass


class Element:
    """An element of the algebra, as a dense coefficient vector."""

    __slots__ = ("algebra", "coeffs")

    def __init__(self, algebra, coeffs):
        if len(coeffs) != algebra.dim:
            raise ValueError("coefficient vector has wrong length")
        self.algebra = algebra
        self.coeffs = tuple(Fraction(c) for c in coeffs)

    def __add__(self, other):
        return Element(self.algebra, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other):
        return Element(self.algebra, [a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self):
        return Element(self.algebra, [-a for a in self.coeffs])

    def __rmul__(self, scalar):
        scalar = Fraction(scalar)
        return Element(self.algebra, [scalar * a for a in self.coeffs])

    def __mul__(self, other):
        if isinstance(other, Element):
            return self.algebra.mul(self, other)
        return Element(self.algebra, [Fraction(other) * a for a in self.coeffs])

    def __eq__(self, other):
        return isinstance(other, Element) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def is_zero(self):
        return not any(self.coeffs)

    def sparse(self):
        return {i: c for i, c in enumerate(self.coeffs) if c}

    def __repr__(self):
        labels = self.algebra.basis_labels
        terms = [f"{c}*{labels[i]}" for i, c in enumerate(self.coeffs) if c]
        return " + ".join(terms) if terms else "0"


class TensorVector:
    """A sparse element of the n-th tensor power of the algebra."""

    __slots__ = ("algebra", "arity", "entries")

    def __init__(self, algebra, arity, entries):
        self.algebra = algebra
        self.arity = arity
        clean = {}
        for key, v in entries.items():
            if len(key) != arity:
                raise ValueError("multi-index arity mismatch")
            if any(not 0 <= i < algebra.dim for i in key):
                raise ValueError("multi-index out of range")
            v = Fraction(v)
            if v:
                clean[key] = v
        self.entries = clean

    def __add__(self, other):
        merged = dict(self.entries)
        for k, v in other.entries.items():
            s = merged.get(k, 0) + v
            if s:
                merged[k] = s
            else:
                merged.pop(k, None)
        return TensorVector(self.algebra, self.arity, merged)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, coeff):
        coeff = Fraction(coeff)
        return TensorVector(
            self.algebra, self.arity, {k: coeff * v for k, v in self.entries.items()}
        )

    def __eq__(self, other):
        return (
            isinstance(other, TensorVector)
            and self.arity == other.arity
            and self.entries == other.entries
        )

    def is_zero(self):
        return not self.entries

    def __repr__(self):
        return f"TensorVector(arity={self.arity}, {self.entries})"


class AlgebraPresentation:
    """An associative unital algebra given by its multiplication tensor.

    mult[i][j] is the sparse expansion {k: coeff} of e_i * e_j; basis element
    0 is required to be the unit.
    """

    def __init__(self, dim, basis_labels, mult):
        self.dim = dim
        self.basis_labels = list(basis_labels)
        self.unit_index = 0
        self.mult = [[vec_clean(dict(mult[i][j])) for j in range(dim)] for i in range(dim)]

    def basis_element(self, i):
        coeffs = [Fraction(0)] * self.dim
        coeffs[i] = Fraction(1)
        return Element(self, coeffs)

    def unit(self):
        return self.basis_element(0)

    def element(self, coeffs):
        return Element(self, coeffs)

    def zero(self):
        return Element(self, [0] * self.dim)

    def mul(self, a, b):
        out = [Fraction(0)] * self.dim
        for i, ca in enumerate(a.coeffs):
            if not ca:
                continue
            for j, cb in enumerate(b.coeffs):
                if not cb:
                    continue
                for k, m in self.mult[i][j].items():
                    out[k] += ca * cb * m
        return Element(self, out)

    def mul_basis(self, i, j):
        return self.mult[i][j]

    def check_unit(self):
        for i in range(self.dim):
            e = self.basis_element(i)
            if self.mul(self.unit(), e) != e:
                return ("unit", (0, i))
            if self.mul(e, self.unit()) != e:
                return ("unit", (i, 0))
        return None

    def check_associativity(self):
        for i in range(self.dim):
            ei = self.basis_element(i)
            for j in range(self.dim):
                ej = self.basis_element(j)
                ij = self.mul(ei, ej)
                for k in range(self.dim):
                    ek = self.basis_element(k)
                    if self.mul(ij, ek) != self.mul(ei, self.mul(ej, ek)):
                        return ("associativity", (i, j, k))
        return None

    def automorphism_matrix_is_valid(self, F):
        """Check a d x d matrix gives an invertible algebra map fixing 1."""
        cols = F.by_columns()
        if vec_clean(dict(cols[0])) != {0: Fraction(1)}:
            return False
        images = [Element(self, [cols[j].get(i, 0) for i in range(self.dim)]) for j in range(self.dim)]
        for i in range(self.dim):
            for j in range(self.dim):
                lhs = Element(self, [F.apply(self.mult[i][j]).get(k, 0) for k in range(self.dim)])
                if lhs != self.mul(images[i], images[j]):
                    return False
        from .linalg import rank_kernel_image

        rank, _, _ = rank_kernel_image(F)
        return rank == self.dim


class HopfPresentation(AlgebraPresentation):
    """A Hopf algebra: algebra plus comult, counit and antipode tensors.

    comult[i] is the sparse expansion {(j, k): coeff} of Delta(e_i);
    counit is a dense vector; antipode[i] is the sparse image of e_i.
    """

    def __init__(self, dim, basis_labels, mult, comult, counit, antipode):
        super().__init__(dim, basis_labels, mult)
        self.comult = [vec_clean(dict(comult[i])) for i in range(dim)]
        self.counit = tuple(Fraction(c) for c in counit)
        self.antipode = [vec_clean(dict(antipode[i])) for i in range(dim)]

    def coproduct(self, a):
        entries = {}
        for i, c in enumerate(a.coeffs):
            if not c:
                continue
            for (j, k), v in self.comult[i].items():
                key = (j, k)
                s = entries.get(key, 0) + c * v
                if s:
                    entries[key] = s
                else:
                    entries.pop(key, None)
        return TensorVector(self, 2, entries)

    def eps(self, a):
        return sum(c * e for c, e in zip(a.coeffs, self.counit))

    def antipode_of(self, a):
        out = [Fraction(0)] * self.dim
        for i, c in enumerate(a.coeffs):
            if not c:
                continue
            for k, v in self.antipode[i].items():
                out[k] += c * v
        return Element(self, out)

    def antipode_matrix(self):
        entries = {}
        for i in range(self.dim):
            for k, v in self.antipode[i].items():
                entries[(k, i)] = v
        return SparseMatrix(self.dim, self.dim, entries)

    def tensor_mul(self, t, u):
        """Componentwise product of two tensor vectors of equal arity."""
        if t.arity != u.arity:
            raise ValueError("arity mismatch")
        entries = {}
        for key1, c1 in t.entries.items():
            for key2, c2 in u.entries.items():
                expansions = [self.mult[i][j] for i, j in zip(key1, key2)]
                _accumulate_product(entries, expansions, c1 * c2)
        return TensorVector(self, t.arity, entries)

    def canonical_json(self):
        from . import algfile

        return algfile.dumps(self)


def _accumulate_product(entries, expansions, coeff):
    keys = [()]
    coeffs = [coeff]
    for exp in expansions:
        new_keys = []
        new_coeffs = []
        for key, c in zip(keys, coeffs):
            for k, v in exp.items():
                new_keys.append(key + (k,))
                new_coeffs.append(c * v)
        keys, coeffs = new_keys, new_coeffs
    for key, c in zip(keys, coeffs):
        s = entries.get(key, 0) + c
        if s:
            entries[key] = s
        else:
            entries.pop(key, None)


class Character:
    """A multiplicative linear functional on the algebra.

    Multiplicativity and normalization at the unit are checked eagerly:
    every downstream construction assumes them.
    """

    __slots__ = ("algebra", "values")

    def __init__(self, algebra, values):
        self.algebra = algebra
        self.values = tuple(Fraction(v) for v in values)
        if len(self.values) != algebra.dim:
            raise ValueError("character vector has wrong length")
        if self.values[0] != 1:
            raise NotAutomorphism("character does not send 1 to 1")
        for i in range(algebra.dim):
            for j in range(algebra.dim):
                prod = sum(
                    m * self.values[k] for k, m in algebra.mult[i][j].items()
                )
                if prod != self.values[i] * self.values[j]:
                    raise NotAutomorphism(
                        f"character is not multiplicative on basis pair ({i},{j})"
                    )

    def __call__(self, a):
        return sum(c * v for c, v in zip(a.coeffs, self.values))

    def __eq__(self, other):
        return isinstance(other, Character) and self.values == other.values

    def __hash__(self):
        return hash(self.values)

    def compose_antipode(self):
        """The convolution inverse xi o S, itself a character."""
        H = self.algebra
        vals = [self(H.antipode_of(H.basis_element(i))) for i in range(H.dim)]
        return Character(H, vals)

    def __repr__(self):
        return f"Character({self.values})"


class ReportEntry:
    __slots__ = ("name", "status", "witness")

    def __init__(self, name, status, witness=None):
        self.name = name
        self.status = status  # "pass" | "fail" | "skip" | "note"
        self.witness = witness

    def as_dict(self):
        d = {"name": self.name, "status": self.status}
        if self.witness is not None:
            d["witness"] = str(self.witness)
        return d


class Report:
    """An ordered list of named checks with pass/fail/skip status."""

    def __init__(self, title, entries=None):
        self.title = title
        self.entries = list(entries or [])

    def add(self, name, ok, witness=None):
        self.entries.append(ReportEntry(name, "pass" if ok else "fail", witness if not ok else None))

    def add_skip(self, name, reason=None):
        self.entries.append(ReportEntry(name, "skip", reason))

    def add_note(self, name, value):
        self.entries.append(ReportEntry(name, "note", value))

    @property
    def all_passed(self):
        return all(e.status != "fail" for e in self.entries)

    def failures(self):
        return [e for e in self.entries if e.status == "fail"]

    def as_dict(self):
        return {
            "title": self.title,
            "all_passed": self.all_passed,
            "entries": [e.as_dict() for e in self.entries],
        }

    def render(self):
        lines = [self.title]
        width = max((len(e.name) for e in self.entries), default=0)
        for e in self.entries:
            line = f"  {e.name.ljust(width)}  {e.status.upper()}"
            if e.witness is not None:
                line += f"  [{e.witness}]"
            lines.append(line)
        return "\n".join(lines)


def validate_hopf(H):
    """Check every Hopf algebra axiom as a finite tensor identity.

    Failures are report entries carrying a witness tuple of basis indices,
    never exceptions.
    """
    report = Report(f"Hopf axiom validation (dim {H.dim})")
    bad = H.check_unit()
    report.add("unit element is basis element 0", bad is None, bad and bad[1])
    bad = H.check_associativity()
    report.add("multiplication associative", bad is None, bad and bad[1])

    ok, wit = True, None
    if H.eps(H.unit()) != 1:
        ok, wit = False, (0,)
    report.add("counit normalized at unit", ok, wit)

    ok, wit = True, None
    if H.coproduct(H.unit()).entries != {(0, 0): Fraction(1)}:
        ok, wit = False, (0,)
    report.add("coproduct of unit is 1 (x) 1", ok, wit)

    # coassociativity
    ok, wit = True, None
    for i in range(H.dim):
        left = {}
        right = {}
        for (j, k), v in H.comult[i].items():
            for (a, b), w in H.comult[j].items():
                key = (a, b, k)
                left[key] = left.get(key, 0) + v * w
            for (a, b), w in H.comult[k].items():
                key = (j, a, b)
                right[key] = right.get(key, 0) + v * w
        if vec_clean(left) != vec_clean(right):
            ok, wit = False, (i,)
            break
    report.add("comultiplication coassociative", ok, wit)

    # counit law
    ok, wit = True, None
    for i in range(H.dim):
        lhs = {}
        rhs = {}
        for (j, k), v in H.comult[i].items():
            lhs[k] = lhs.get(k, 0) + v * H.counit[j]
            rhs[j] = rhs.get(j, 0) + v * H.counit[k]
        want = {i: Fraction(1)}
        if vec_clean(lhs) != want or vec_clean(rhs) != want:
            ok, wit = False, (i,)
            break
    report.add("counit law", ok, wit)

    # Delta and eps are algebra maps
    ok, wit = True, None
    for i in range(H.dim):
        ei = H.basis_element(i)
        for j in range(H.dim):
            ej = H.basis_element(j)
            prod = H.mul(ei, ej)
            if H.coproduct(prod) != H.tensor_mul(H.coproduct(ei), H.coproduct(ej)):
                ok, wit = False, (i, j)
                break
            if H.eps(prod) != H.eps(ei) * H.eps(ej):
                ok, wit = False, (i, j)
                break
        if not ok:
            break
    report.add("comultiplication and counit multiplicative", ok, wit)

    # antipode axiom
    ok, wit = True, None
    for i in range(H.dim):
        target = H.eps(H.basis_element(i)) * H.unit()
        left = H.zero()
        right = H.zero()
        for (j, k), v in H.comult[i].items():
            left = left + v * H.mul(H.antipode_of(H.basis_element(j)), H.basis_element(k))
            right = right + v * H.mul(H.basis_element(j), H.antipode_of(H.basis_element(k)))
        if left != target or right != target:
            ok, wit = False, (i,)
            break
    report.add("antipode axiom", ok, wit)

    S = H.antipode_matrix()
    involutive = (S @ S) == SparseMatrix.identity(H.dim)
    report.add_note("antipode squares to identity", "yes" if involutive else "no")
    return report


def iterated_coproduct(a, n):
    """Delta^(n-1) of an element, as an arity-n tensor vector."""
    H = a.algebra
    if n < 1:
        raise ValueError("arity must be at least 1")
    if n == 1:
        return TensorVector(H, 1, {(i,): c for i, c in enumerate(a.coeffs) if c})
    prev = iterated_coproduct(a, n - 1)
    entries = {}
    for key, c in prev.entries.items():
        # expand the first slot; coassociativity makes the choice immaterial
        i = key[0]
        for (j, k), v in H.comult[i].items():
            nk = (j, k) + key[1:]
            s = entries.get(nk, 0) + c * v
            if s:
                entries[nk] = s
            else:
                entries.pop(nk, None)
    return TensorVector(H, n, entries)


def is_grouplike(sigma):
    H = sigma.algebra
    if H.eps(sigma) != 1:
        return False
    want = {}
    for i, ci in enumerate(sigma.coeffs):
        if not ci:
            continue
        for j, cj in enumerate(sigma.coeffs):
            if not cj:
                continue
            want[(i, j)] = ci * cj
    return H.coproduct(sigma).entries == vec_clean(want)


def star_convolve(a, xi):
    """Right convolution a * xi = sum a_(1) xi(a_(2))."""
    H = a.algebra
    out = [Fraction(0)] * H.dim
    for i, c in enumerate(a.coeffs):
        if not c:
            continue
        for (j, k), v in H.comult[i].items():
            out[j] += c * v * xi.values[k]
    return Element(H, out)


def convolve_left(xi, a):
    """Left convolution xi * a = sum xi(a_(1)) a_(2)."""
    H = a.algebra
    out = [Fraction(0)] * H.dim
    for i, c in enumerate(a.coeffs):
        if not c:
            continue
        for (j, k), v in H.comult[i].items():
            out[k] += c * v * xi.values[j]
    return Element(H, out)


def convolution_matrix(xi):
    """Matrix of the algebra automorphism a -> a * xi."""
    H = xi.algebra
    cols = [star_convolve(H.basis_element(j), xi).sparse() for j in range(H.dim)]
    return SparseMatrix.from_columns(H.dim, cols)


def ad_character(xi, a):
    """Adjoint action xi^{-1} * a * xi of the character group."""
    return star_convolve(convolve_left(xi.compose_antipode(), a), xi)


def twisted_antipode(delta, h):
    """S_delta(h) = sum delta(h_(1)) S(h_(2))."""
    H = h.algebra
    out = H.zero()
    for i, c in enumerate(h.coeffs):
        if not c:
            continue
        for (j, k), v in H.comult[i].items():
            out = out + (c * v * delta.values[j]) * H.antipode_of(H.basis_element(k))
    return out


def twisted_antipode_matrix(delta):
    H = delta.algebra
    cols = [twisted_antipode(delta, H.basis_element(j)).sparse() for j in range(H.dim)]
    return SparseMatrix.from_columns(H.dim, cols)


def element_inverse(sigma):
    """Inverse of a group-like element, computed as S(sigma)."""
    return sigma.algebra.antipode_of(sigma)


def check_modular_pair(delta, sigma):
    """Verify that (delta, sigma) is a modular pair in involution.

    Checks: delta is a character (by construction), sigma group-like,
    delta(sigma) = 1, and that the square of the twisted antipode equals
    conjugation by sigma.  The equivalent involution criterion
    (sigma . S_delta)^2 = id is cross-computed; the two criteria disagreeing
    would be an internal inconsistency and is flagged as such.
    """
    H = delta.algebra
    report = Report("modular pair check")
    report.add("delta is a character", True)
    grouplike = is_grouplike(sigma)
    report.add("sigma is group-like", grouplike)
    report.add("delta(sigma) = 1", delta(sigma) == 1)

    Sd = twisted_antipode_matrix(delta)
    Sd2 = Sd @ Sd
    sigma_inv = element_inverse(sigma)
    conj_ok = True
    wit = None
    for i in range(H.dim):
        conj = H.mul(H.mul(sigma, H.basis_element(i)), sigma_inv)
        got = Element(H, [Sd2.apply({i: Fraction(1)}).get(k, 0) for k in range(H.dim)])
        if conj != got:
            conj_ok, wit = False, (i,)
            break
    report.add("square of twisted antipode is conjugation by sigma", conj_ok, wit)

    # (sigma S_delta)^2 = id
    cols = []
    for j in range(H.dim):
        v = Sd.apply({j: Fraction(1)})
        img = H.mul(sigma, Element(H, [v.get(k, 0) for k in range(H.dim)]))
        cols.append(img.sparse())
    sSd = SparseMatrix.from_columns(H.dim, cols)
    alt_ok = (sSd @ sSd) == SparseMatrix.identity(H.dim)
    report.add_note("(sigma . S_delta)^2 = id", "yes" if alt_ok else "no")
    if grouplike and delta(sigma) == 1:
        report.add("involution criteria agree", conj_ok == alt_ok, (conj_ok, alt_ok))
    return report


def pair_is_valid(report):
    return report.all_passed


def diagonal_action(h, t):
    """h . (h_1, ..., h_n) = (h_(1) h_1, ..., h_(n) h_n)."""
    H = h.algebra
    legs = iterated_coproduct(h, t.arity)
    entries = {}
    for lkey, lc in legs.entries.items():
        for tkey, tc in t.entries.items():
            expansions = [H.mult[i][j] for i, j in zip(lkey, tkey)]
            _accumulate_product(entries, expansions, lc * tc)
    return TensorVector(H, t.arity, entries)


def two_sided_twist(alpha, beta):
    """Matrix of a -> sum alpha(a_(1)) a_(2) beta(a_(3)).

    Raises NotAutomorphism when the result is not an invertible algebra map,
    which signals bad character input.
    """
    H = alpha.algebra
    cols = []
    for j in range(H.dim):
        a = convolve_left(alpha, H.basis_element(j))
        cols.append(star_convolve(a, beta).sparse())
    F = SparseMatrix.from_columns(H.dim, cols)
    if not H.automorphism_matrix_is_valid(F):
        raise NotAutomorphism("two-sided convolution twist is not an algebra automorphism")
    return F
