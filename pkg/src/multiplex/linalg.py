"""Exact linear algebra over QQ or a prime field F_p.

Everything downstream (homology, spectral pages, homotopy solving) reduces
to rank / kernel / solve / subquotient over a field, so this module is the
single computational substrate.  Matrices are dense and tiny (bidegree
blocks), so plain Gaussian elimination over exact field elements is enough.
No floating point anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


DEFAULT_PRIME = 32003


@dataclass(frozen=True)
class Field:
    """Field of coefficients: kind 'rational' or 'prime_field' (with modulus p)."""

    kind: str
    p: int = 0

    def __post_init__(self):
        if self.kind == "rational":
            if self.p:
                raise ValueError("rational field takes no modulus")
        elif self.kind == "prime_field":
            if not _is_prime(self.p):
                raise ValueError(f"modulus {self.p} is not prime")
        else:
            raise ValueError(f"unknown field kind {self.kind!r}")

    # -- element ops ---------------------------------------------------
    def zero(self):
        return 0 if self.kind == "prime_field" else Fraction(0)

    def one(self):
        return 1 if self.kind == "prime_field" else Fraction(1)

    def of_int(self, n: int):
        return n % self.p if self.kind == "prime_field" else Fraction(n)

    def add(self, a, b):
        return (a + b) % self.p if self.kind == "prime_field" else a + b

    def sub(self, a, b):
        return (a - b) % self.p if self.kind == "prime_field" else a - b

    def mul(self, a, b):
        return (a * b) % self.p if self.kind == "prime_field" else a * b

    def neg(self, a):
        return (-a) % self.p if self.kind == "prime_field" else -a

    def inv(self, a):
        if not a:
            raise ZeroDivisionError("inverse of zero")
        if self.kind == "prime_field":
            return pow(a, self.p - 2, self.p)
        return 1 / a

    def parse(self, v):
        """Element from its JSON form: int for F_p, int or 'a/b' string for QQ."""
        if self.kind == "prime_field":
            if not isinstance(v, int):
                raise ValueError(f"F_{self.p} entries must be integers, got {v!r}")
            return v % self.p
        if isinstance(v, int):
            return Fraction(v)
        if isinstance(v, str):
            return Fraction(v)
        raise ValueError(f"rational entries must be int or 'a/b' string, got {v!r}")

    def dump(self, a):
        if self.kind == "prime_field":
            return int(a)
        if a.denominator == 1:
            return int(a)
        return f"{a.numerator}/{a.denominator}"

    def __str__(self):
        return "QQ" if self.kind == "rational" else f"F_{self.p}"


QQ = Field("rational")


def GF(p: int = DEFAULT_PRIME) -> Field:
    return Field("prime_field", p)


class Matrix:
    """Dense matrix over a Field, entries row-major. Acts on column vectors."""

    __slots__ = ("field", "rows", "cols", "data")

    def __init__(self, field: Field, rows: int, cols: int, data=None):
        self.field = field
        self.rows = rows
        self.cols = cols
        if data is None:
            self.data = [field.zero()] * (rows * cols)
        else:
            if len(data) != rows * cols:
                raise ValueError("entry count does not match shape")
            self.data = list(data)

    # -- constructors ---------------------------------------------------
    @classmethod
    def zero(cls, field, rows, cols):
        return cls(field, rows, cols)

    @classmethod
    def identity(cls, field, n):
        m = cls(field, n, n)
        one = field.one()
        for i in range(n):
            m.data[i * n + i] = one
        return m

    @classmethod
    def from_rows(cls, field, rows):
        r = len(rows)
        c = len(rows[0]) if rows else 0
        data = []
        for row in rows:
            if len(row) != c:
                raise ValueError("ragged rows")
            data.extend(field.parse(v) if not isinstance(v, (int, Fraction)) else
                        (field.of_int(v) if isinstance(v, int) else v) for v in row)
        return cls(field, r, c, data)

    @classmethod
    def column(cls, field, entries):
        return cls(field, len(entries), 1, list(entries))

    def copy(self):
        return Matrix(self.field, self.rows, self.cols, self.data)

    # -- access ----------------------------------------------------------
    def __getitem__(self, rc):
        r, c = rc
        return self.data[r * self.cols + c]

    def __setitem__(self, rc, v):
        r, c = rc
        self.data[r * self.cols + c] = v

    def row(self, r):
        return self.data[r * self.cols:(r + 1) * self.cols]

    def col(self, c):
        return [self.data[r * self.cols + c] for r in range(self.rows)]

    def to_rows(self):
        return [self.row(r) for r in range(self.rows)]

    def __eq__(self, other):
        return (isinstance(other, Matrix) and self.field == other.field
                and self.rows == other.rows and self.cols == other.cols
                and self.data == other.data)

    def __hash__(self):
        raise TypeError("matrices are not hashable")

    def __repr__(self):
        return f"Matrix({self.field}, {self.rows}x{self.cols})"

    def is_zero(self):
        z = self.field.zero()
        return all(v == z for v in self.data)

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other):
        self._same_shape(other)
        f = self.field
        return Matrix(f, self.rows, self.cols,
                      [f.add(a, b) for a, b in zip(self.data, other.data)])

    def __sub__(self, other):
        self._same_shape(other)
        f = self.field
        return Matrix(f, self.rows, self.cols,
                      [f.sub(a, b) for a, b in zip(self.data, other.data)])

    def __neg__(self):
        f = self.field
        return Matrix(f, self.rows, self.cols, [f.neg(a) for a in self.data])

    def scale(self, c):
        f = self.field
        return Matrix(f, self.rows, self.cols, [f.mul(c, a) for a in self.data])

    def __mul__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.rows}x{self.cols} * "
                             f"{other.rows}x{other.cols}")
        f = self.field
        out = Matrix(f, self.rows, other.cols)
        oc = other.cols
        # nonzero sweep of the right factor: products here are usually
        # sparse identity-tensor patterns, so skip empty rows entirely
        nz = []
        for k in range(other.rows):
            ob = k * oc
            row = [(j, other.data[ob + j]) for j in range(oc)
                   if other.data[ob + j]]
            nz.append(row)
        for i in range(self.rows):
            base = i * self.cols
            tb = i * oc
            for k in range(self.cols):
                a = self.data[base + k]
                if not a:
                    continue
                for j, b in nz[k]:
                    out.data[tb + j] = f.add(out.data[tb + j], f.mul(a, b))
        return out

    def _same_shape(self, other):
        if self.rows != other.rows or self.cols != other.cols:
            raise ValueError("shape mismatch")
        if self.field != other.field:
            raise ValueError("field mismatch")

    def hstack(self, other):
        if self.rows != other.rows:
            raise ValueError("row mismatch in hstack")
        data = []
        for r in range(self.rows):
            data.extend(self.row(r))
            data.extend(other.row(r))
        return Matrix(self.field, self.rows, self.cols + other.cols, data)

    def take_cols(self, idxs):
        data = []
        for r in range(self.rows):
            row = self.row(r)
            data.extend(row[c] for c in idxs)
        return Matrix(self.field, self.rows, len(idxs), data)

    # -- elimination -------------------------------------------------------
    def _echelon(self):
        """Row echelon form (in place on a copy); returns (mat, pivot cols)."""
        f = self.field
        m = self.copy()
        pivots = []
        r = 0
        for c in range(m.cols):
            pr = None
            for rr in range(r, m.rows):
                if m.data[rr * m.cols + c]:
                    pr = rr
                    break
            if pr is None:
                continue
            if pr != r:
                for j in range(m.cols):
                    m.data[r * m.cols + j], m.data[pr * m.cols + j] = \
                        m.data[pr * m.cols + j], m.data[r * m.cols + j]
            piv = f.inv(m.data[r * m.cols + c])
            for j in range(c, m.cols):
                m.data[r * m.cols + j] = f.mul(piv, m.data[r * m.cols + j])
            for rr in range(m.rows):
                if rr == r:
                    continue
                factor = m.data[rr * m.cols + c]
                if factor:
                    for j in range(c, m.cols):
                        m.data[rr * m.cols + j] = f.sub(
                            m.data[rr * m.cols + j],
                            f.mul(factor, m.data[r * m.cols + j]))
            pivots.append(c)
            r += 1
            if r == m.rows:
                break
        return m, pivots

    def rank(self) -> int:
        return len(self._echelon()[1])

    def kernel_basis(self) -> "Matrix":
        """Columns form a basis of ker(self); cols = self.cols - rank."""
        f = self.field
        ech, pivots = self._echelon()
        pivset = set(pivots)
        free = [c for c in range(self.cols) if c not in pivset]
        out = Matrix(f, self.cols, len(free))
        for k, fc in enumerate(free):
            out.data[fc * out.cols + k] = f.one()
            for r, pc in enumerate(pivots):
                v = ech.data[r * ech.cols + fc]
                if v:
                    out.data[pc * out.cols + k] = f.neg(v)
        return out

    def solve(self, b: "Matrix"):
        """Some x with self*x = b (b may have several columns); None if insoluble."""
        if b.rows != self.rows:
            raise ValueError("dimension mismatch in solve")
        f = self.field
        aug = self.hstack(b)
        ech, pivots = aug._echelon()
        # a pivot in the b-part means inconsistency
        for c in pivots:
            if c >= self.cols:
                return None
        x = Matrix(f, self.cols, b.cols)
        for r, pc in enumerate(pivots):
            for j in range(b.cols):
                x.data[pc * x.cols + j] = ech.data[r * ech.cols + self.cols + j]
        return x

    def inverse(self):
        if self.rows != self.cols:
            return None
        x = self.solve(Matrix.identity(self.field, self.rows))
        if x is None:
            return None
        if (self * x != Matrix.identity(self.field, self.rows)):
            return None
        return x

    def is_invertible(self) -> bool:
        return self.rows == self.cols and self.rank() == self.rows


def rank(m: Matrix) -> int:
    return m.rank()


def kernel_basis(m: Matrix) -> Matrix:
    return m.kernel_basis()


def solve(m: Matrix, b: Matrix):
    return m.solve(b)


class Subquotient:
    """A subquotient Z/B of an ambient space, with chosen representative lifts.

    Z and B are given by matrices whose columns span the cycle and boundary
    subspaces.  rep_basis columns are the first columns of Z that are
    independent modulo B (deterministic tie-breaking by column index).
    """

    __slots__ = ("field", "ambient_dim", "cycle_basis", "boundary_basis",
                 "rep_basis", "dim", "_red")

    def __init__(self, Z: Matrix, B: Matrix):
        if Z.rows != B.rows:
            raise ValueError("ambient dimension mismatch")
        if Z.field != B.field:
            raise ValueError("field mismatch")
        self.field = Z.field
        self.ambient_dim = Z.rows
        rkZ = Z.rank()
        ZB = Z.hstack(B)
        if ZB.rank() != rkZ:
            raise ValueError("boundary span not contained in cycle span")
        rkB = B.rank()
        self.cycle_basis = Z
        self.boundary_basis = B
        # first independent columns of Z modulo B
        keep = []
        base = B
        rk = rkB
        for c in range(Z.cols):
            cand = base.hstack(Z.take_cols([c]))
            r2 = cand.rank()
            if r2 > rk:
                keep.append(c)
                base = cand
                rk = r2
        self.rep_basis = Z.take_cols(keep)
        self.dim = rkZ - rkB
        if len(keep) != self.dim:
            raise AssertionError("rep basis size disagrees with rank arithmetic")
        self._red = self.rep_basis.hstack(self.boundary_basis)

    def contains(self, v: Matrix) -> bool:
        return self.cycle_basis.solve(v) is not None

    def reduce(self, v: Matrix) -> Matrix:
        """Coordinates of [v] in the rep basis; v must lie in span(Z)."""
        x = self._red.solve(v)
        if x is None:
            raise ValueError("vector not in the cycle span")
        out = Matrix(self.field, self.dim, v.cols)
        for i in range(self.dim):
            for j in range(v.cols):
                out[i, j] = x[i, j]
        return out


def subquotient(Z: Matrix, B: Matrix) -> Subquotient:
    return Subquotient(Z, B)


class BlockLinearSystem:
    """Sparse linear system in unknown matrix blocks.

    Equations are matrix identities sum_t scalar_t * L_t * X_{v_t} * R_t = RHS,
    one per registered equation block.  Used for homotopy solving and for
    sampling morphisms from linear constraint spaces.
    """

    def __init__(self, field: Field):
        self.field = field
        self._vars: dict = {}
        self._var_order: list = []
        self._eqs: dict = {}
        self._eq_order: list = []
        self._terms: list = []

    def variable(self, key, rows: int, cols: int):
        if key in self._vars:
            if self._vars[key] != (rows, cols):
                raise ValueError("variable re-registered with another shape")
            return
        self._vars[key] = (rows, cols)
        self._var_order.append(key)

    def equation(self, key, rows: int, cols: int):
        if key in self._eqs:
            if (self._eqs[key][0], self._eqs[key][1]) != (rows, cols):
                raise ValueError("equation re-registered with another shape")
            return
        self._eqs[key] = (rows, cols, Matrix.zero(self.field, rows, cols))
        self._eq_order.append(key)

    def add_term(self, eq_key, var_key, left: Matrix | None,
                 right: Matrix | None, scalar=1):
        if eq_key not in self._eqs or var_key not in self._vars:
            raise KeyError("unregistered equation or variable")
        self._terms.append((eq_key, var_key, left, right,
                            self.field.of_int(scalar) if isinstance(scalar, int)
                            else scalar))

    def add_rhs(self, eq_key, mat: Matrix, scalar=1):
        rows, cols, acc = self._eqs[eq_key]
        if mat.rows != rows or mat.cols != cols:
            raise ValueError("rhs shape mismatch")
        c = self.field.of_int(scalar) if isinstance(scalar, int) else scalar
        self._eqs[eq_key] = (rows, cols, acc + mat.scale(c))

    def _offsets(self):
        voff, n = {}, 0
        for k in self._var_order:
            r, c = self._vars[k]
            voff[k] = n
            n += r * c
        eoff, m = {}, 0
        for k in self._eq_order:
            r, c, _ = self._eqs[k]
            eoff[k] = m
            m += r * c
        return voff, n, eoff, m

    def assemble(self):
        f = self.field
        voff, nvars, eoff, neqs = self._offsets()
        coeff: dict[tuple[int, int], object] = {}
        for eq_key, var_key, left, right, scalar in self._terms:
            er, ec, _ = self._eqs[eq_key]
            vr, vc = self._vars[var_key]
            lrows = er if left is None else left.rows
            if left is not None and (left.rows != er or left.cols != vr):
                raise ValueError("left factor shape mismatch")
            if right is not None and (right.rows != vc or right.cols != ec):
                raise ValueError("right factor shape mismatch")
            if left is None and er != vr:
                raise ValueError("identity left factor shape mismatch")
            if right is None and ec != vc:
                raise ValueError("identity right factor shape mismatch")
            for r in range(er):
                for c in range(ec):
                    row = eoff[eq_key] + r * ec + c
                    for a in range(vr):
                        lv = (f.one() if r == a else f.zero()) if left is None \
                            else left[r, a]
                        if not lv:
                            continue
                        for b in range(vc):
                            rv = (f.one() if b == c else f.zero()) if right is None \
                                else right[b, c]
                            if not rv:
                                continue
                            col = voff[var_key] + a * vc + b
                            v = f.mul(scalar, f.mul(lv, rv))
                            key = (row, col)
                            coeff[key] = f.add(coeff.get(key, f.zero()), v)
        rhs = Matrix.zero(f, neqs, 1)
        for k in self._eq_order:
            er, ec, acc = self._eqs[k]
            for r in range(er):
                for c in range(ec):
                    rhs[eoff[k] + r * ec + c, 0] = acc[r, c]
        # drop rows that are identically zero on both sides
        live = sorted({r for (r, _) in coeff} | {r for r in range(neqs)
                                                 if rhs[r, 0]})
        remap = {r: k for k, r in enumerate(live)}
        mat = Matrix.zero(f, len(live), nvars)
        for (r, c), v in coeff.items():
            if v:
                mat[remap[r], c] = v
        b = Matrix.zero(f, len(live), 1)
        for r in live:
            b[remap[r], 0] = rhs[r, 0]
        return mat, b, voff, nvars

    def solve(self):
        """A particular solution as {var_key: Matrix}, or None."""
        mat, b, voff, nvars = self.assemble()
        x = mat.solve(b)
        if x is None:
            return None
        return self._unflatten(x, voff)

    def solution_space(self):
        """(particular, kernel_columns) where each kernel column unflattens
        to a dict; None if the system is inconsistent."""
        mat, b, voff, nvars = self.assemble()
        x = mat.solve(b)
        if x is None:
            return None
        ker = mat.kernel_basis()
        cols = [self._unflatten(ker.take_cols([c]), voff) for c in range(ker.cols)]
        return self._unflatten(x, voff), cols

    def _unflatten(self, x: Matrix, voff):
        out = {}
        for k in self._var_order:
            r, c = self._vars[k]
            m = Matrix.zero(self.field, r, c)
            for a in range(r):
                for bcol in range(c):
                    m[a, bcol] = x[voff[k] + a * c + bcol, 0]
            out[k] = m
        return out


def induced_map(f: Matrix, src: Subquotient, dst: Subquotient) -> Matrix:
    """Matrix of the map induced by f on rep bases.

    Requires f(span Z_src) <= span Z_dst and f(span B_src) <= span B_dst
    (checked), which is exactly well-definedness on the subquotient.
    """
    if f.cols != src.ambient_dim or f.rows != dst.ambient_dim:
        raise ValueError("ambient dimension mismatch")
    fz = f * src.cycle_basis
    if dst.cycle_basis.solve(fz) is None:
        raise ValueError("map does not send cycles to cycles")
    fb = f * src.boundary_basis
    if dst.boundary_basis.solve(fb) is None:
        raise ValueError("map does not send boundaries to boundaries")
    if src.dim == 0:
        return Matrix(f.field, dst.dim, 0)
    return dst.reduce(f * src.rep_basis)
