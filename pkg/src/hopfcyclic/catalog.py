"""Builtin Hopf algebras over Q.

Group algebras come from Cayley tables (Delta g = g (x) g, eps = 1,
S(g) = g^{-1}).  Function algebras on Z/n use the basis {1, d_1, ..., d_{n-1}}
where d_k is the delta function at k; the constant function 1 must be basis
element 0, so d_0 = 1 - d_1 - ... - d_{n-1} is eliminated.  The four
dimensional algebra "sweedler" is generated by a group-like g and a skew
primitive x with g^2 = 1, x^2 = 0, xg = -gx.
"""

from fractions import Fraction
from itertools import permutations

from .hopf import HopfPresentation, Character


def _group_algebra(labels, table, inverse):
    """Hopf algebra of a finite group given by its Cayley table.

    table[i][j] is the index of the product; inverse[i] the index of the
    inverse; index 0 must be the group identity.
    """
    d = len(labels)
    mult = [[{table[i][j]: Fraction(1)} for j in range(d)] for i in range(d)]
    comult = [{(i, i): Fraction(1)} for i in range(d)]
    counit = [Fraction(1)] * d
    antipode = [{inverse[i]: Fraction(1)} for i in range(d)]
    return HopfPresentation(d, labels, mult, comult, counit, antipode)


def _cyclic_group_algebra(n):
    labels = ["1"] + [("g" if k == 1 else f"g{k}") for k in range(1, n)]
    table = [[(i + j) % n for j in range(n)] for i in range(n)]
    inverse = [(-i) % n for i in range(n)]
    return _group_algebra(labels, table, inverse)


def _symmetric_group_algebra():
    elems = sorted(permutations(range(3)))  # identity (0,1,2) sorts first
    index = {p: i for i, p in enumerate(elems)}
    labels = ["".join(str(x) for x in p) for p in elems]
    d = len(elems)
    table = [
        [index[tuple(p[q[k]] for k in range(3))] for q in elems]
        for p in elems
    ]
    inverse = []
    for p in elems:
        inv = [0] * 3
        for k in range(3):
            inv[p[k]] = k
        inverse.append(index[tuple(inv)])
    return _group_algebra(labels, table, inverse)


def _function_algebra(n):
    """Functions on Z/n in the basis {1, d_1, ..., d_{n-1}}."""
    d = n
    labels = ["1"] + [f"d{k}" for k in range(1, n)]

    def delta_vec(k):
        # d_k in the chosen basis; d_0 = 1 - sum of the others
        v = [Fraction(0)] * d
        if k % n == 0:
            v[0] = Fraction(1)
            for i in range(1, d):
                v[i] = Fraction(-1)
        else:
            v[k % n] = Fraction(1)
        return v

    def to_delta_coords(i):
        # basis element i written in the full delta-function basis d_0..d_{n-1}
        if i == 0:
            return [Fraction(1)] * n
        out = [Fraction(0)] * n
        out[i] = Fraction(1)
        return out

    mult = [[{} for _ in range(d)] for _ in range(d)]
    for i in range(d):
        for j in range(d):
            di, dj = to_delta_coords(i), to_delta_coords(j)
            acc = [Fraction(0)] * d
            for k in range(n):
                c = di[k] * dj[k]
                if c:
                    for idx, v in enumerate(delta_vec(k)):
                        acc[idx] += c * v
            mult[i][j] = {idx: v for idx, v in enumerate(acc) if v}

    comult = []
    for i in range(d):
        di = to_delta_coords(i)
        acc = {}
        for k in range(n):
            if not di[k]:
                continue
            for a in range(n):
                b = (k - a) % n
                va, vb = delta_vec(a), delta_vec(b)
                for p, cp in enumerate(va):
                    if not cp:
                        continue
                    for q, cq in enumerate(vb):
                        if not cq:
                            continue
                        key = (p, q)
                        s = acc.get(key, 0) + di[k] * cp * cq
                        if s:
                            acc[key] = s
                        else:
                            acc.pop(key, None)
        comult.append(acc)

    counit = [Fraction(1)] + [Fraction(0)] * (d - 1)  # evaluation at 0
    antipode = []
    for i in range(d):
        di = to_delta_coords(i)
        acc = [Fraction(0)] * d
        for k in range(n):
            if di[k]:
                for idx, v in enumerate(delta_vec((-k) % n)):
                    acc[idx] += di[k] * v
        antipode.append({idx: v for idx, v in enumerate(acc) if v})
    return HopfPresentation(d, labels, mult, comult, counit, antipode)


def _sweedler_algebra():
    labels = ["1", "g", "x", "gx"]
    one, g, x, gx = 0, 1, 2, 3
    F = Fraction
    mult = [[{} for _ in range(4)] for _ in range(4)]

    def put(i, j, expansion):
        mult[i][j] = expansion

    put(one, one, {one: F(1)})
    put(one, g, {g: F(1)})
    put(one, x, {x: F(1)})
    put(one, gx, {gx: F(1)})
    put(g, one, {g: F(1)})
    put(g, g, {one: F(1)})
    put(g, x, {gx: F(1)})
    put(g, gx, {x: F(1)})
    put(x, one, {x: F(1)})
    put(x, g, {gx: F(-1)})      # xg = -gx
    put(x, x, {})
    put(x, gx, {})              # x(gx) = (xg)x = -gx^2 = 0
    put(gx, one, {gx: F(1)})
    put(gx, g, {x: F(-1)})      # gxg = -x
    put(gx, x, {})              # gx x = 0
    put(gx, gx, {})

    comult = [
        {(one, one): F(1)},
        {(g, g): F(1)},
        {(x, one): F(1), (g, x): F(1)},
        {(gx, g): F(1), (one, gx): F(1)},
    ]
    counit = [F(1), F(1), F(0), F(0)]
    antipode = [
        {one: F(1)},
        {g: F(1)},
        {gx: F(-1)},   # S(x) = -gx
        {x: F(1)},     # S(gx) = S(x)S(g) = -gx g = x
    ]
    return HopfPresentation(4, labels, mult, comult, counit, antipode)


def _trivial_algebra():
    F = Fraction
    return HopfPresentation(1, ["1"], [[{0: F(1)}]], [{(0, 0): F(1)}], [F(1)], [{0: F(1)}])


_BUILDERS = {
    "trivial": _trivial_algebra,
    "group:Z2": lambda: _cyclic_group_algebra(2),
    "group:Z3": lambda: _cyclic_group_algebra(3),
    "group:Z4": lambda: _cyclic_group_algebra(4),
    "group:S3": _symmetric_group_algebra,
    "functions:Z2": lambda: _function_algebra(2),
    "functions:Z3": lambda: _function_algebra(3),
    "sweedler": _sweedler_algebra,
}

_CACHE = {}


def builtin_names():
    return sorted(_BUILDERS)


def builtin(name):
    if name not in _BUILDERS:
        raise KeyError(f"unknown builtin algebra {name!r}")
    if name not in _CACHE:
        _CACHE[name] = _BUILDERS[name]()
    return _CACHE[name]


def counit_character(H):
    return Character(H, H.counit)


def sign_character(H, name):
    """The order-two character of a builtin, where one exists over Q."""
    F = Fraction
    if name in ("group:Z2", "group:Z4"):
        vals = [F(1) if i % 2 == 0 else F(-1) for i in range(H.dim)]
        return Character(H, vals)
    if name == "group:S3":
        # sign of the permutation spelled by the label
        vals = []
        for label in H.basis_labels:
            p = [int(ch) for ch in label]
            inversions = sum(
                1 for a in range(3) for b in range(a + 1, 3) if p[a] > p[b]
            )
            vals.append(F(-1) ** inversions)
        return Character(H, vals)
    if name == "sweedler":
        return Character(H, [F(1), F(-1), F(0), F(0)])
    if name == "functions:Z2":
        # evaluation at the nonzero point: 1 -> 1, d1 -> 1
        return Character(H, [F(1), F(1)])
    return None


def builtin_pair(H, pair_name):
    """Resolve a named (delta, sigma) pair on a builtin algebra."""
    from .hopf import Character

    if pair_name == "eps-1":
        return counit_character(H), H.unit()
    if pair_name == "eps-g":
        if "g" not in H.basis_labels:
            raise KeyError("algebra has no basis element labeled 'g'")
        return counit_character(H), H.basis_element(H.basis_labels.index("g"))
    raise KeyError(f"unknown pair name {pair_name!r}")
