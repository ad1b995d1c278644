"""Exact sparse linear algebra over the rationals.

Vectors are sparse dicts ``{index: Fraction}`` with no stored zeros.
Matrices are immutable sparse maps ``(row, col) -> Fraction``.  Elimination
is fraction-free (Bareiss style, so intermediate entries stay integral once
denominators are cleared) with a final normalization pass to reduced row
echelon form; subspaces are canonicalized to RREF bases so that equality of
subspaces is a syntactic check.
"""

from fractions import Fraction
from math import lcm


class LinAlgError(Exception):
    pass


class DimensionMismatch(LinAlgError):
    pass


class NonSquare(LinAlgError):
    pass


class NotAComplex(LinAlgError):
    """d_out . d_in != 0; carries the index of a witness column."""

    def __init__(self, column):
        super().__init__(f"composite differential is nonzero on column {column}")
        self.column = column


class NotStable(LinAlgError):
    """A map carried a subspace basis vector outside the target subspace.

    This is a mathematical finding, not a crash: ``witness`` is the offending
    domain vector and ``image`` its image, both as sparse dicts.
    """

    def __init__(self, witness, image):
        super().__init__("map does not stabilize the given subspaces")
        self.witness = witness
        self.image = image


def vec_clean(v):
    return {k: c for k, c in v.items() if c}


def vec_addmul(target, src, coeff):
    """target += coeff * src, in place, dropping zeros."""
    if not coeff:
        return target
    for k, c in src.items():
        s = target.get(k, 0) + coeff * c
        if s:
            target[k] = s
        else:
            target.pop(k, None)
    return target


def vec_scale(v, coeff):
    if not coeff:
        return {}
    return {k: coeff * c for k, c in v.items()}


class SparseMatrix:
    """Immutable sparse matrix over Q."""

    __slots__ = ("rows", "cols", "entries", "_bycol", "_byrow")

    def __init__(self, rows, cols, entries):
        self.rows = rows
        self.cols = cols
        clean = {}
        for (r, c), v in entries.items():
            if not (0 <= r < rows and 0 <= c < cols):
                raise DimensionMismatch(f"entry ({r},{c}) outside {rows}x{cols}")
            v = Fraction(v)
            if v:
                clean[(r, c)] = v
        self.entries = clean
        self._bycol = None
        self._byrow = None

    @classmethod
    def zero(cls, rows, cols):
        return cls(rows, cols, {})

    @classmethod
    def identity(cls, n):
        return cls(n, n, {(i, i): Fraction(1) for i in range(n)})

    @classmethod
    def from_columns(cls, rows, columns):
        entries = {}
        for j, col in enumerate(columns):
            for i, v in col.items():
                if v:
                    entries[(i, j)] = Fraction(v)
        return cls(rows, len(columns), entries)

    @classmethod
    def from_rows(cls, cols, rowvecs):
        entries = {}
        for i, row in enumerate(rowvecs):
            for j, v in row.items():
                if v:
                    entries[(i, j)] = Fraction(v)
        return cls(len(rowvecs), cols, entries)

    def by_columns(self):
        if self._bycol is None:
            cols = [dict() for _ in range(self.cols)]
            for (r, c), v in self.entries.items():
                cols[c][r] = v
            self._bycol = cols
        return self._bycol

    def by_rows(self):
        if self._byrow is None:
            rows = [dict() for _ in range(self.rows)]
            for (r, c), v in self.entries.items():
                rows[r][c] = v
            self._byrow = rows
        return self._byrow

    def column(self, j):
        return dict(self.by_columns()[j])

    def transpose(self):
        return SparseMatrix(
            self.cols, self.rows, {(c, r): v for (r, c), v in self.entries.items()}
        )

    def apply(self, vec):
        """Matrix times sparse column vector."""
        cols = self.by_columns()
        out = {}
        for j, coeff in vec.items():
            vec_addmul(out, cols[j], coeff)
        return out

    def __matmul__(self, other):
        if self.cols != other.rows:
            raise DimensionMismatch(f"{self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        mycols = self.by_columns()
        out_cols = []
        for col in other.by_columns():
            acc = {}
            for k, coeff in col.items():
                vec_addmul(acc, mycols[k], coeff)
            out_cols.append(acc)
        return SparseMatrix.from_columns(self.rows, out_cols)

    def __add__(self, other):
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise DimensionMismatch("matrix addition shape mismatch")
        entries = dict(self.entries)
        for k, v in other.entries.items():
            s = entries.get(k, 0) + v
            if s:
                entries[k] = s
            else:
                entries.pop(k, None)
        return SparseMatrix(self.rows, self.cols, entries)

    def __sub__(self, other):
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, coeff):
        coeff = Fraction(coeff)
        if not coeff:
            return SparseMatrix.zero(self.rows, self.cols)
        return SparseMatrix(
            self.rows, self.cols, {k: coeff * v for k, v in self.entries.items()}
        )

    def pow(self, k):
        if self.rows != self.cols:
            raise NonSquare("matrix power needs a square matrix")
        if k < 0:
            raise ValueError("negative power")
        result = SparseMatrix.identity(self.rows)
        base = self
        while k:
            if k & 1:
                result = result @ base
            k >>= 1
            if k:
                base = base @ base
        return result

    def is_zero(self):
        return not self.entries

    def __eq__(self, other):
        return (
            isinstance(other, SparseMatrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and self.entries == other.entries
        )

    def __hash__(self):
        return hash((self.rows, self.cols, tuple(sorted(self.entries.items()))))

    def nnz(self):
        return len(self.entries)

    def to_sorted_triples(self):
        """Deterministic row-major dump [(row, col, Fraction), ...]."""
        return [(r, c, self.entries[(r, c)]) for (r, c) in sorted(self.entries)]

    def __repr__(self):
        return f"SparseMatrix({self.rows}x{self.cols}, nnz={self.nnz()})"


def _clear_denominators(row):
    denoms = [v.denominator for v in row.values()]
    if not denoms:
        return row
    m = lcm(*denoms) if len(denoms) > 1 else denoms[0]
    if m == 1:
        return row
    return {k: v * m for k, v in row.items()}


def rref_rows(rowvecs, ncols):
    """Reduced row echelon form of a list of sparse row vectors.

    Returns (rows, pivots) where rows are RREF rows (pivot entries 1, pivot
    columns cleared elsewhere) and pivots is the increasing list of pivot
    columns.  Forward elimination is fraction-free on integer-cleared rows.
    """
    remaining = [_clear_denominators(vec_clean(dict(r))) for r in rowvecs]
    remaining = [r for r in remaining if r]
    pivrows = []
    pivots = []
    prev = Fraction(1)
    for col in range(ncols):
        best = None
        for idx, row in enumerate(remaining):
            if col in row:
                key = (len(row), idx)
                if best is None or key < best[0]:
                    best = (key, idx)
        if best is None:
            continue
        pivot_row = remaining.pop(best[1])
        piv = pivot_row[col]
        updated = []
        for row in remaining:
            q = row.get(col)
            if q is None:
                new = {k: (piv * v) / prev for k, v in row.items()}
            else:
                new = {}
                for k in set(row) | set(pivot_row):
                    v = (piv * row.get(k, 0) - q * pivot_row.get(k, 0)) / prev
                    if v:
                        new[k] = v
            if new:
                updated.append(new)
        remaining = updated
        pivrows.append(pivot_row)
        pivots.append(col)
        prev = piv
    # normalization pass: unit pivots, clear pivot columns upward
    for i in range(len(pivrows) - 1, -1, -1):
        piv = pivrows[i][pivots[i]]
        pivrows[i] = {k: v / piv for k, v in pivrows[i].items()}
        for j in range(i):
            q = pivrows[j].get(pivots[i])
            if q:
                vec_addmul(pivrows[j], pivrows[i], -q)
    return pivrows, pivots


class Subspace:
    """A linear subspace of Q^n with a canonical RREF basis.

    Because the basis is in reduced echelon form, two subspaces are equal
    iff their bases are literally equal.
    """

    __slots__ = ("ambient_dim", "basis", "pivots")

    def __init__(self, ambient_dim, basis, pivots):
        self.ambient_dim = ambient_dim
        self.basis = basis
        self.pivots = pivots

    @classmethod
    def from_vectors(cls, ambient_dim, vectors):
        rows, pivots = rref_rows(vectors, ambient_dim)
        return cls(ambient_dim, rows, pivots)

    @classmethod
    def zero(cls, ambient_dim):
        return cls(ambient_dim, [], [])

    @classmethod
    def full(cls, ambient_dim):
        return cls(
            ambient_dim,
            [{i: Fraction(1)} for i in range(ambient_dim)],
            list(range(ambient_dim)),
        )

    @property
    def dim(self):
        return len(self.basis)

    def reduce(self, vec):
        """Residue of vec after subtracting its projection onto the basis."""
        v = vec_clean(dict(vec))
        for row, p in zip(self.basis, self.pivots):
            c = v.get(p)
            if c:
                vec_addmul(v, row, -c)
        return v

    def contains_vector(self, vec):
        return not self.reduce(vec)

    def coords_of(self, vec):
        """Coordinates of vec in the RREF basis, or None if outside."""
        v = vec_clean(dict(vec))
        coords = []
        for row, p in zip(self.basis, self.pivots):
            c = v.get(p, Fraction(0))
            coords.append(c)
            if c:
                vec_addmul(v, row, -c)
        if v:
            return None
        return coords

    def contains(self, other):
        if self.ambient_dim != other.ambient_dim:
            raise DimensionMismatch("ambient dimensions differ")
        return all(self.contains_vector(b) for b in other.basis)

    def equals(self, other):
        if self.ambient_dim != other.ambient_dim:
            raise DimensionMismatch("ambient dimensions differ")
        return self.pivots == other.pivots and self.basis == other.basis

    def __eq__(self, other):
        return isinstance(other, Subspace) and self.ambient_dim == other.ambient_dim and self.equals(other)

    def __hash__(self):
        return hash(
            (self.ambient_dim, tuple(tuple(sorted(b.items())) for b in self.basis))
        )

    def sum(self, other):
        if self.ambient_dim != other.ambient_dim:
            raise DimensionMismatch("ambient dimensions differ")
        return Subspace.from_vectors(self.ambient_dim, self.basis + other.basis)

    def intersect(self, other):
        if self.ambient_dim != other.ambient_dim:
            raise DimensionMismatch("ambient dimensions differ")
        # x = sum a_i A_i = sum b_j B_j  <=>  (a, b) in ker [A^T | -B^T]
        na, nb = self.dim, other.dim
        cols = []
        for b in self.basis:
            cols.append(dict(b))
        for b in other.basis:
            cols.append(vec_scale(b, -1))
        stacked = SparseMatrix.from_columns(self.ambient_dim, cols)
        _, kernel, _ = rank_kernel_image(stacked)
        vectors = []
        for kv in kernel.basis:
            x = {}
            for i in range(na):
                c = kv.get(i)
                if c:
                    vec_addmul(x, self.basis[i], c)
            vectors.append(x)
        return Subspace.from_vectors(self.ambient_dim, vectors)

    def basis_matrix(self):
        """Matrix whose columns are the basis vectors."""
        return SparseMatrix.from_columns(self.ambient_dim, [dict(b) for b in self.basis])

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient={self.ambient_dim})"


def rank_kernel_image(M):
    """Exact rank, null space and column space of a sparse matrix."""
    rows, pivots = rref_rows(M.by_rows(), M.cols)
    rank = len(rows)
    free = [c for c in range(M.cols) if c not in set(pivots)]
    kernel_vectors = []
    for f in free:
        v = {f: Fraction(1)}
        for row, p in zip(rows, pivots):
            c = row.get(f)
            if c:
                v[p] = -c
        kernel_vectors.append(v)
    kernel = Subspace.from_vectors(M.cols, kernel_vectors)
    image = Subspace.from_vectors(M.rows, M.by_columns())
    return rank, kernel, image


def subspace_combine(op, A, B=None):
    """Set-theoretic operations on subspaces.

    op is one of 'intersect', 'sum', 'contains_vector', 'equals'; B is the
    second subspace, or a sparse vector for 'contains_vector'.
    """
    if op == "intersect":
        return A.intersect(B)
    if op == "sum":
        return A.sum(B)
    if op == "contains_vector":
        return A.contains_vector(B)
    if op == "equals":
        return A.equals(B)
    raise ValueError(f"unknown subspace operation {op!r}")


def restrict_map(M, dom, cod):
    """Matrix of M in the bases of dom and cod.

    Verifies M(dom) <= cod; on failure raises NotStable carrying the domain
    basis vector that escapes and its image.
    """
    if M.cols != dom.ambient_dim or M.rows != cod.ambient_dim:
        raise DimensionMismatch("map does not match ambient spaces")
    columns = []
    for b in dom.basis:
        w = M.apply(b)
        coords = cod.coords_of(w)
        if coords is None:
            raise NotStable(dict(b), w)
        columns.append({i: c for i, c in enumerate(coords) if c})
    return SparseMatrix.from_columns(cod.dim, columns)


def cohomology_dim(d_in, d_out):
    """Dimension and representatives of ker(d_out)/im(d_in).

    Raises NotAComplex when d_out . d_in != 0 (with a witness column).
    """
    if d_out.cols != d_in.rows:
        raise DimensionMismatch("differentials are not composable")
    composite = d_out @ d_in
    if not composite.is_zero():
        bad = min(c for (_, c) in composite.entries)
        raise NotAComplex(bad)
    _, kernel, _ = rank_kernel_image(d_out)
    _, _, image = rank_kernel_image(d_in)
    reps = []
    span = list(image.basis)
    current = Subspace.from_vectors(kernel.ambient_dim, span)
    for b in kernel.basis:
        if not current.contains_vector(b):
            reps.append(dict(b))
            span.append(b)
            current = Subspace.from_vectors(kernel.ambient_dim, span)
    return len(reps), reps


def solve(M, target):
    """One exact solution x of M x = target, or None if inconsistent."""
    augmented = [dict(r) for r in M.by_rows()]
    for i, v in target.items():
        if v:
            augmented[i][M.cols] = Fraction(v)
    rows, pivots = rref_rows(augmented, M.cols + 1)
    x = {}
    for row, p in zip(rows, pivots):
        if p == M.cols:
            return None
        c = row.get(M.cols)
        if c:
            x[p] = c
    return x


def kron(A, B):
    """Kronecker product, row/col index = a_index * b_count + b_index."""
    entries = {}
    for (ra, ca), va in A.entries.items():
        for (rb, cb), vb in B.entries.items():
            entries[(ra * B.rows + rb, ca * B.cols + cb)] = va * vb
    return SparseMatrix(A.rows * B.rows, A.cols * B.cols, entries)


def evaluate_polynomial(M, coeffs):
    """sum coeffs[i] * M^i, exactly.

    Uses Horner evaluation, or binary powering per term when the polynomial
    is lacunary enough that this saves matrix products.
    """
    if M.rows != M.cols:
        raise NonSquare("polynomial evaluation needs a square matrix")
    coeffs = [Fraction(c) for c in coeffs]
    while coeffs and not coeffs[-1]:
        coeffs.pop()
    n = M.rows
    if not coeffs:
        return SparseMatrix.zero(n, n)
    support = [i for i, c in enumerate(coeffs) if c]
    degree = len(coeffs) - 1
    if len(support) <= 2 and degree > 4:
        acc = SparseMatrix.zero(n, n)
        for i in support:
            acc = acc + M.pow(i).scale(coeffs[i])
        return acc
    acc = SparseMatrix.zero(n, n)
    ident = SparseMatrix.identity(n)
    for c in reversed(coeffs):
        acc = acc @ M
        if c:
            acc = acc + ident.scale(c)
    return acc
