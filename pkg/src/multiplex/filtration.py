"""Totalization: split filtered complexes and the bridge to twisted complexes.

Tot(A)^n collects the A_i^{n+i} with the column filtration
F_p Tot^n = (+)_{i<=p} A_i^{n+i}; everything here assumes finite support,
so products and sums coincide.  The differential of Tot carries the sign
(-1)^{mn} on the d_m-component applied in degree n, and the inverse
reading peels those signs off again:

    d(a)_j = sum_m (-1)^{mn} d_m(a_{j+m}),    d_m(a) = (-1)^{nm} d(a)_{i-m}.

Basis convention: Tot^n is ordered by ascending column index i, then by
the basis order inside A_i^{n+i}.  The same convention is reused for
tensor products of totalizations, where the column of a (x) b is the sum
of columns; with that ordering the lax-monoidal comparison map mu is
diagonal with entries (-1)^{k_1 n_2}.
"""

from __future__ import annotations

from .bigraded import BigradedMap, BigradedModule, tensor_modules, tensor_summands
from .linalg import Matrix
from .reports import Report
from .twisted import RHomotopy, TwistedComplex, TwistedMorphism, check_r_homotopy


def degrees_of(module: BigradedModule) -> list[int]:
    return sorted({j - i for (i, j) in module.dims})


def tot_basis(module: BigradedModule, n: int) -> list[tuple[int, int]]:
    """Ordered basis of Tot^n: (column i, index inside A_i^{n+i})."""
    out = []
    for i in sorted({i for (i, j) in module.dims if j - i == n}):
        for a in range(module.dims[(i, n + i)]):
            out.append((i, a))
    return out


class FilteredComplex:
    """Split filtered cochain complex: splitting module + total differential."""

    __slots__ = ("module", "d", "_basis")

    def __init__(self, module: BigradedModule, d: dict[int, Matrix]):
        self.module = module
        self._basis = {}
        self.d = {}
        for n, mat in d.items():
            src = self.basis(n)
            dst = self.basis(n + 1)
            if mat.rows != len(dst) or mat.cols != len(src):
                raise ValueError(f"differential in degree {n} has shape "
                                 f"{mat.rows}x{mat.cols}, expected "
                                 f"{len(dst)}x{len(src)}")
            for rr, (i2, _) in enumerate(dst):
                for cc, (i, _) in enumerate(src):
                    if i2 > i and mat[rr, cc]:
                        raise ValueError(
                            f"differential violates the filtration in degree {n}: "
                            f"column {i} hits column {i2}")
            if not mat.is_zero():
                self.d[n] = mat

    @property
    def field(self):
        return self.module.field

    def basis(self, n: int) -> list[tuple[int, int]]:
        b = self._basis.get(n)
        if b is None:
            b = tot_basis(self.module, n)
            self._basis[n] = b
        return b

    def dim(self, n: int) -> int:
        return len(self.basis(n))

    def degrees(self) -> list[int]:
        return degrees_of(self.module)

    def d_mat(self, n: int) -> Matrix:
        m = self.d.get(n)
        if m is None:
            m = Matrix.zero(self.field, self.dim(n + 1), self.dim(n))
        return m

    def __eq__(self, other):
        if not isinstance(other, FilteredComplex):
            return NotImplemented
        if self.module != other.module:
            return False
        ns = set(self.d) | set(other.d)
        return all(self.d_mat(n) == other.d_mat(n) for n in ns)

    def __repr__(self):
        return f"FilteredComplex(dims={dict(sorted(self.module.dims.items()))})"


def check_filtered_complex(k: FilteredComplex) -> Report:
    rep = Report("split filtered complex (d^2 = 0)")
    for n in k.degrees():
        rep.tick()
        if not (k.d_mat(n + 1) * k.d_mat(n)).is_zero():
            rep.fail(("degree", n), "d o d != 0")
    return rep


class FilteredMap:
    """Graded map between split filtered complexes.

    degree: shift of the total degree; shift: filtration allowance
    (image of column i lies in columns <= i + shift).
    """

    __slots__ = ("src", "dst", "degree", "shift", "blocks")

    def __init__(self, src: FilteredComplex, dst: FilteredComplex,
                 degree: int, shift: int, blocks: dict[int, Matrix]):
        self.src = src
        self.dst = dst
        self.degree = degree
        self.shift = shift
        self.blocks = {}
        for n, mat in blocks.items():
            sb = src.basis(n)
            db = dst.basis(n + degree)
            if mat.rows != len(db) or mat.cols != len(sb):
                raise ValueError(f"map block in degree {n} has shape "
                                 f"{mat.rows}x{mat.cols}, expected "
                                 f"{len(db)}x{len(sb)}")
            for rr, (i2, _) in enumerate(db):
                for cc, (i, _) in enumerate(sb):
                    if i2 > i + shift and mat[rr, cc]:
                        raise ValueError(
                            f"map violates its filtration allowance {shift} "
                            f"in degree {n}: column {i} hits column {i2}")
            if not mat.is_zero():
                self.blocks[n] = mat

    @property
    def field(self):
        return self.src.field

    def block(self, n: int) -> Matrix:
        m = self.blocks.get(n)
        if m is None:
            m = Matrix.zero(self.field, self.dst.dim(n + self.degree),
                            self.src.dim(n))
        return m

    def __eq__(self, other):
        if not isinstance(other, FilteredMap):
            return NotImplemented
        if self.src != other.src or self.dst != other.dst \
                or self.degree != other.degree:
            return False
        ns = set(self.blocks) | set(other.blocks)
        return all(self.block(n) == other.block(n) for n in ns)

    def __add__(self, other):
        if self.degree != other.degree:
            raise ValueError("degree mismatch")
        ns = set(self.blocks) | set(other.blocks)
        return FilteredMap(self.src, self.dst, self.degree,
                           max(self.shift, other.shift),
                           {n: self.block(n) + other.block(n) for n in ns})

    def __sub__(self, other):
        return self + other.scale(self.field.of_int(-1))

    def scale(self, c):
        return FilteredMap(self.src, self.dst, self.degree, self.shift,
                           {n: m.scale(c) for n, m in self.blocks.items()})

    def is_zero(self):
        return not self.blocks

    def compose(self, other: "FilteredMap") -> "FilteredMap":
        """self after other."""
        if other.dst != self.src:
            raise ValueError("source/target mismatch")
        blocks = {}
        for n, m in other.blocks.items():
            s = self.blocks.get(n + other.degree)
            if s is not None:
                blocks[n] = s * m
        return FilteredMap(other.src, self.dst, self.degree + other.degree,
                           self.shift + other.shift, blocks)

    def chain_defect(self) -> "FilteredMap":
        """d o F - (-1)^{degree} F o d (zero exactly for maps of complexes)."""
        sgn = -1 if self.degree % 2 else 1
        ns = set(self.src.degrees()) | set(self.blocks)
        blocks = {}
        for n in ns:
            a = self.dst.d_mat(n + self.degree) * self.block(n)
            b = self.block(n + 1) * self.src.d_mat(n)
            m = a - b if sgn > 0 else a + b
            if not m.is_zero():
                blocks[n] = m
        return FilteredMap(self.src, self.dst, self.degree + 1,
                           self.shift, blocks)

    def check_chain_map(self) -> Report:
        rep = Report("filtered chain map")
        defect = self.chain_defect()
        for n in sorted(set(self.src.degrees()) | set(self.blocks)):
            rep.tick()
            if n in defect.blocks:
                rep.fail(("degree", n), "does not commute with the differentials")
        return rep


def identity_filtered(k: FilteredComplex) -> FilteredMap:
    return FilteredMap(k, k, 0, 0,
                       {n: Matrix.identity(k.field, k.dim(n))
                        for n in k.degrees() if k.dim(n)})


# ---------------------------------------------------------------------------
# Tot and its inverse
# ---------------------------------------------------------------------------

def tot(a: TwistedComplex) -> FilteredComplex:
    """d(x)_j = sum_m (-1)^{mn} d_m(x_{j+m}) on Tot^n."""
    module = a.module
    field = a.field
    d = {}
    for n in degrees_of(module):
        src = tot_basis(module, n)
        dst = tot_basis(module, n + 1)
        if not src or not dst:
            continue
        dindex = {key: k for k, key in enumerate(dst)}
        mat = Matrix.zero(field, len(dst), len(src))
        for cc, (i, aa) in enumerate(src):
            for m, dm in a.d.items():
                blk = dm.blocks.get((i, n + i))
                if blk is None:
                    continue
                sgn = -1 if (m * n) % 2 else 1
                for b in range(blk.rows):
                    v = blk[b, aa]
                    if v:
                        rr = dindex[(i - m, b)]
                        mat[rr, cc] = field.add(
                            mat[rr, cc], v if sgn > 0 else field.neg(v))
        if not mat.is_zero():
            d[n] = mat
    return FilteredComplex(module, d)


def tot_family(family: dict[int, BigradedMap], u: int, v: int,
               src: FilteredComplex, dst: FilteredComplex,
               extra_sign: int = 1) -> FilteredMap:
    """Enriched Tot of a map family of overall bidegree (u, v):
    (Tot(f)(a))_{j+u} = sum_m (-1)^{(m+u)n} f_m(a_{j+m}) for a in Tot^n.

    extra_sign multiplies every block (used for homotopy normalization).
    """
    field = src.field
    blocks = {}
    deg = v - u
    for n in src.degrees():
        sb = src.basis(n)
        db = dst.basis(n + deg)
        if not sb or not db:
            continue
        dindex = {key: k for k, key in enumerate(db)}
        mat = Matrix.zero(field, len(db), len(sb))
        nonzero = False
        for cc, (i, aa) in enumerate(sb):
            for m, fm in family.items():
                blk = fm.blocks.get((i, n + i))
                if blk is None:
                    continue
                sgn = extra_sign * (-1 if ((m + u) * n) % 2 else 1)
                for b in range(blk.rows):
                    val = blk[b, aa]
                    if val:
                        rr = dindex.get((i - m + u, b))
                        if rr is None:
                            raise AssertionError("component landed off basis")
                        mat[rr, cc] = field.add(
                            mat[rr, cc], val if sgn > 0 else field.neg(val))
                        nonzero = True
        if nonzero:
            blocks[n] = mat
    return FilteredMap(src, dst, deg, u, blocks)


def tot_morphism(f: TwistedMorphism, src_k: FilteredComplex | None = None,
                 dst_k: FilteredComplex | None = None) -> FilteredMap:
    src_k = src_k or tot(f.src)
    dst_k = dst_k or tot(f.dst)
    out = tot_family(f.f, 0, 0, src_k, dst_k)
    out.check_chain_map().raise_if_failed()
    return out


def tot_inverse(k: FilteredComplex) -> TwistedComplex:
    """d_m(a) = (-1)^{nm} d(a)_{i-m} for a in A_i^{n+i}."""
    module = k.module
    field = k.field
    per_m: dict[int, dict] = {}
    for n in k.degrees():
        src = k.basis(n)
        dst = k.basis(n + 1)
        mat = k.d.get(n)
        if mat is None:
            continue
        for cc, (i, aa) in enumerate(src):
            for rr, (i2, bb) in enumerate(dst):
                v = mat[rr, cc]
                if not v:
                    continue
                m = i - i2
                if m < 0:
                    raise ValueError("filtration violated by the differential")
                if (n * m) % 2:
                    v = field.neg(v)
                blk = per_m.setdefault(m, {}).setdefault(
                    (i, n + i),
                    Matrix.zero(field, module.dim(i - m, n + i - m + 1),
                                module.dim(i, n + i)))
                blk[bb, aa] = field.add(blk[bb, aa], v)
    d = {m: BigradedMap(module, module, (-m, -m + 1), blocks)
         for m, blocks in per_m.items()}
    out = TwistedComplex(module, d)
    from .twisted import check_twisted
    check_twisted(out).raise_if_failed()
    return out


def tot_inverse_morphism(fmap: FilteredMap, src: TwistedComplex,
                         dst: TwistedComplex) -> TwistedMorphism:
    """f_m(a) = (-1)^{nm} f(a)_{i-m}; fmap must be a degree-0 filtered chain map."""
    if fmap.degree != 0 or fmap.shift > 0:
        raise ValueError("not a filtration-preserving degree-0 map")
    field = fmap.field
    per_m: dict[int, dict] = {}
    for n in fmap.src.degrees():
        mat = fmap.blocks.get(n)
        if mat is None:
            continue
        sb = fmap.src.basis(n)
        db = fmap.dst.basis(n)
        for cc, (i, aa) in enumerate(sb):
            for rr, (i2, bb) in enumerate(db):
                v = mat[rr, cc]
                if not v:
                    continue
                m = i - i2
                if m < 0:
                    raise ValueError("filtration violated by the map")
                if (n * m) % 2:
                    v = field.neg(v)
                blk = per_m.setdefault(m, {}).setdefault(
                    (i, n + i),
                    Matrix.zero(field, dst.module.dim(i - m, n + i - m),
                                src.module.dim(i, n + i)))
                blk[bb, aa] = field.add(blk[bb, aa], v)
    f = {m: BigradedMap(src.module, dst.module, (-m, -m), blocks)
         for m, blocks in per_m.items()}
    out = TwistedMorphism(src, dst, f)
    from .twisted import check_morphism
    check_morphism(out).raise_if_failed()
    return out


# ---------------------------------------------------------------------------
# graded tensor of totalizations and the comparison map mu
# ---------------------------------------------------------------------------

def graded_tensor(k: FilteredComplex, l: FilteredComplex) -> FilteredComplex:
    """Tot(A) (x) Tot(B) with differential d (x) 1 + 1 (x) d (Koszul by
    total degree), presented as a split filtered complex over the tensor
    module (the basis orderings coincide, see module docstring)."""
    module = tensor_modules(k.module, l.module)
    field = module.field
    d = {}
    for n in degrees_of(module):
        src = tot_basis(module, n)
        dst = tot_basis(module, n + 1)
        if not src or not dst:
            continue
        sdec = _pair_decode(k.module, l.module, n)
        ddec_index = _pair_index(k.module, l.module, n + 1)
        kb = {m: k.basis(m) for m in set(degrees_of(k.module))}
        lb = {m: l.basis(m) for m in set(degrees_of(l.module))}
        kbi = {m: {key: idx for idx, key in enumerate(b)} for m, b in kb.items()}
        lbi = {m: {key: idx for idx, key in enumerate(b)} for m, b in lb.items()}
        mat = Matrix.zero(field, len(dst), len(src))
        for cc, (p, q, axi, s, t, bxi) in enumerate(sdec):
            n1 = q - p
            n2 = n - n1
            dk = k.d.get(n1)
            if dk is not None:
                col = kbi[n1][(p, axi)]
                for rr2, (p2, a2) in enumerate(kb.get(n1 + 1, [])):
                    v = dk[rr2, col]
                    if v:
                        tgt = ddec_index.get((p2, p2 + n1 + 1, a2, s, t, bxi))
                        if tgt is not None:
                            mat[tgt, cc] = field.add(mat[tgt, cc], v)
            dl = l.d.get(n2)
            if dl is not None:
                col = lbi[n2][(s, bxi)]
                sgn = -1 if n1 % 2 else 1
                for rr2, (s2, b2) in enumerate(lb.get(n2 + 1, [])):
                    v = dl[rr2, col]
                    if v:
                        if sgn < 0:
                            v = field.neg(v)
                        tgt = ddec_index.get((p, q, axi, s2, s2 + n2 + 1, b2))
                        if tgt is not None:
                            mat[tgt, cc] = field.add(mat[tgt, cc], v)
        if not mat.is_zero():
            d[n] = mat
    return FilteredComplex(module, d)


def _pair_decode(ma: BigradedModule, mb: BigradedModule, n: int):
    """Tot^n basis of the tensor module as (p, q, a, s, t, b) tuples."""
    out = []
    module = tensor_modules(ma, mb)
    for i in sorted({i for (i, j) in module.dims if j - i == n}):
        j = n + i
        for (p, q, da, db) in tensor_summands(ma, mb, i, j):
            for a in range(da):
                for b in range(db):
                    out.append((p, q, a, i - p, j - q, b))
    return out


def _pair_index(ma: BigradedModule, mb: BigradedModule, n: int):
    return {key: idx for idx, key in enumerate(_pair_decode(ma, mb, n))}


def graded_map_tensor(f: FilteredMap, g: FilteredMap) -> FilteredMap:
    """f (x) g with the total-degree Koszul rule:
    (f (x) g)(x (x) y) = (-1)^{deg(g)·deg(x)} f(x) (x) g(y)."""
    src = graded_tensor(f.src, g.src)
    dst = graded_tensor(f.dst, g.dst)
    field = src.field
    blocks = {}
    deg = f.degree + g.degree
    for n in src.degrees():
        sdec = _pair_decode(f.src.module, g.src.module, n)
        didx = _pair_index(f.dst.module, g.dst.module, n + deg)
        if not sdec or not didx:
            continue
        gsrc_bi = {m: {key: idx for idx, key in enumerate(g.src.basis(m))}
                   for m in set(degrees_of(g.src.module))}
        fsrc_bi = {m: {key: idx for idx, key in enumerate(f.src.basis(m))}
                   for m in set(degrees_of(f.src.module))}
        mat = Matrix.zero(field, len(didx), len(sdec))
        nonzero = False
        for cc, (p, q, a, s, t, b) in enumerate(sdec):
            n1 = q - p
            n2 = n - n1
            fb = f.blocks.get(n1)
            gb = g.blocks.get(n2)
            if fb is None or gb is None:
                continue
            sgn0 = -1 if (g.degree * n1) % 2 else 1
            fcol = fsrc_bi[n1][(p, a)]
            gcol = gsrc_bi[n2][(s, b)]
            for rr1, (p2, a2) in enumerate(f.dst.basis(n1 + f.degree)):
                v1 = fb[rr1, fcol]
                if not v1:
                    continue
                for rr2, (s2, b2) in enumerate(g.dst.basis(n2 + g.degree)):
                    v2 = gb[rr2, gcol]
                    if not v2:
                        continue
                    tgt = didx.get((p2, p2 + n1 + f.degree, a2,
                                    s2, s2 + n2 + g.degree, b2))
                    if tgt is None:
                        raise AssertionError("tensor image off basis")
                    v = field.mul(v1, v2)
                    if sgn0 < 0:
                        v = field.neg(v)
                    mat[tgt, cc] = field.add(mat[tgt, cc], v)
                    nonzero = True
        if nonzero:
            blocks[n] = mat
    return FilteredMap(src, dst, deg, f.shift + g.shift, blocks)


def mu(a: TwistedComplex, b: TwistedComplex,
       tot_a: FilteredComplex | None = None,
       tot_b: FilteredComplex | None = None) -> FilteredMap:
    """mu_{A,B}: Tot(A) (x) Tot(B) -> Tot(A (x) B),
    (a (x) b)_{k_1,k_2} -> (-1)^{k_1 n_2} a_{k_1} (x) b_{k_2}.

    With the shared basis ordering the map is diagonal; in the bounded
    (finite support) case it is an isomorphism.
    """
    from .twisted import tensor
    ka = tot_a or tot(a)
    kb = tot_b or tot(b)
    src = graded_tensor(ka, kb)
    dst = tot(tensor(a, b))
    field = src.field
    blocks = {}
    for n in src.degrees():
        sdec = _pair_decode(a.module, b.module, n)
        if not sdec:
            continue
        mat = Matrix.zero(field, len(sdec), len(sdec))
        for cc, (p, q, _a, s, t, _b) in enumerate(sdec):
            n1 = q - p
            n2 = n - n1
            mat[cc, cc] = field.one() if (p * n2) % 2 == 0 else field.of_int(-1)
        blocks[n] = mat
    out = FilteredMap(src, dst, 0, 0, blocks)
    out.check_chain_map().raise_if_failed()
    return out


# ---------------------------------------------------------------------------
# order-r homotopies on totalizations
# ---------------------------------------------------------------------------

class OrderRHomotopy:
    """Cartan-Eilenberg homotopy of order r: degree -1, H(F_p) <= F_{p+r},
    with dH + Hd = g - f."""

    __slots__ = ("r", "f", "g", "h")

    def __init__(self, r: int, f: FilteredMap, g: FilteredMap, h: FilteredMap):
        if f.src != g.src or f.dst != g.dst:
            raise ValueError("f and g must be parallel")
        if h.degree != -1 or h.shift > r:
            raise ValueError("not an order-r homotopy candidate")
        self.r = r
        self.f = f
        self.g = g
        self.h = h


def check_order_homotopy(oh: OrderRHomotopy) -> Report:
    rep = Report(f"order-{oh.r} homotopy (dH + Hd = g - f)")
    h, f, g = oh.h, oh.f, oh.g
    for n in sorted(set(h.src.degrees()) | set(h.blocks)):
        lhs = h.dst.d_mat(n - 1) * h.block(n) + h.block(n + 1) * h.src.d_mat(n)
        rhs = g.block(n) - f.block(n)
        rep.tick()
        if lhs != rhs:
            rep.fail(("degree", n), "dH + Hd != g - f")
    return rep


def homotopy_to_tot(h: RHomotopy,
                    src_k: FilteredComplex | None = None,
                    dst_k: FilteredComplex | None = None) -> OrderRHomotopy:
    """Exact Cartan-Eilenberg form: H = (-1)^r Tot(hhat) (enriched Tot at
    bidegree (r, r-1)); then dH + Hd = Tot(g) - Tot(f) holds on the nose."""
    check_r_homotopy(h).raise_if_failed()
    src_k = src_k or tot(h.src)
    dst_k = dst_k or tot(h.dst)
    hmap = tot_family(h.h, h.r, h.r - 1, src_k, dst_k,
                      extra_sign=-1 if h.r % 2 else 1)
    out = OrderRHomotopy(h.r, tot_morphism(h.f, src_k, dst_k),
                         tot_morphism(h.g, src_k, dst_k), hmap)
    check_order_homotopy(out).raise_if_failed()
    return out


def tot_to_homotopy(oh: OrderRHomotopy, f: TwistedMorphism,
                    g: TwistedMorphism) -> RHomotopy:
    """Inverse reading: hhat_m(a) = (-1)^{(m+r)n + r} H(a)_{i-m+r}."""
    check_order_homotopy(oh).raise_if_failed()
    r = oh.r
    field = oh.h.field
    a_mod, b_mod = f.src.module, f.dst.module
    per_m: dict[int, dict] = {}
    for n in oh.h.src.degrees():
        mat = oh.h.blocks.get(n)
        if mat is None:
            continue
        sb = oh.h.src.basis(n)
        db = oh.h.dst.basis(n - 1)
        for cc, (i, aa) in enumerate(sb):
            for rr, (i2, bb) in enumerate(db):
                v = mat[rr, cc]
                if not v:
                    continue
                m = i - i2 + r
                if m < 0:
                    raise ValueError("homotopy exceeds its filtration allowance")
                if (((m + r) * n) + r) % 2:
                    v = field.neg(v)
                blk = per_m.setdefault(m, {}).setdefault(
                    (i, n + i),
                    Matrix.zero(field, b_mod.dim(i - m + r, n + i - m + r - 1),
                                a_mod.dim(i, n + i)))
                blk[bb, aa] = field.add(blk[bb, aa], v)
    hfam = {m: BigradedMap(a_mod, b_mod, (-m + r, -m + r - 1), blocks)
            for m, blocks in per_m.items()}
    out = RHomotopy(r, f, g, hfam)
    check_r_homotopy(out).raise_if_failed()
    return out
