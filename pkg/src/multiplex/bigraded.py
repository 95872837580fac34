"""Bigraded modules and bidegree-graded maps with Koszul sign bookkeeping.

A bigraded module is a finite family of free summands A_i^j; a map of
bidegree (p,q) sends A_i^j to A_{i+p}^{j+q} and is stored as one matrix
block per populated source bidegree.  The scalar product of bidegrees
<x,y> = x1*y1 + x2*y2 drives every Koszul sign: moving a map g past an
element a costs (-1)^{<g,a>}.

Tensor products fix a deterministic summand ordering (lexicographic in the
bidegree of the left factor, then basis order), and all regrouping /
permutation isomorphisms between iterated tensor products are computed
through explicit basis enumerations of tensor trees.
"""

from __future__ import annotations

from .linalg import Field, Matrix

Bidegree = tuple[int, int]


def sprod(x: Bidegree, y: Bidegree) -> int:
    """Scalar product of bidegrees driving the Koszul rule."""
    return x[0] * y[0] + x[1] * y[1]


def total_degree(x: Bidegree) -> int:
    return x[1] - x[0]


class BigradedModule:
    """Free bigraded module with finitely many nonzero ranks."""

    __slots__ = ("field", "dims", "_hash")

    def __init__(self, field: Field, dims: dict[Bidegree, int]):
        self.field = field
        self.dims = {k: v for k, v in dims.items() if v}
        self._hash = None
        for (i, j), n in self.dims.items():
            if n < 0:
                raise ValueError(f"negative rank at {(i, j)}")

    def dim(self, i: int, j: int) -> int:
        return self.dims.get((i, j), 0)

    def support(self) -> list[Bidegree]:
        return sorted(self.dims)

    def total_dim(self) -> int:
        return sum(self.dims.values())

    def is_zero(self) -> bool:
        return not self.dims

    def __eq__(self, other):
        return (isinstance(other, BigradedModule)
                and self.field == other.field and self.dims == other.dims)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.field, tuple(sorted(self.dims.items()))))
        return self._hash

    def __repr__(self):
        return f"BigradedModule({self.field}, {dict(sorted(self.dims.items()))})"

    def shifted(self, shift: Bidegree) -> "BigradedModule":
        """Module moved by +shift: result_(i,j) = self_(i-shift)."""
        u, v = shift
        return BigradedModule(self.field,
                              {(i + u, j + v): n for (i, j), n in self.dims.items()})


class BigradedMap:
    """Map of a fixed bidegree, stored as per-source-bidegree matrix blocks."""

    __slots__ = ("src", "dst", "bidegree", "blocks")

    def __init__(self, src: BigradedModule, dst: BigradedModule,
                 bidegree: Bidegree, blocks: dict[Bidegree, Matrix] | None = None):
        if src.field != dst.field:
            raise ValueError("field mismatch")
        self.src = src
        self.dst = dst
        self.bidegree = bidegree
        self.blocks = {}
        if blocks:
            p, q = bidegree
            for (i, j), m in blocks.items():
                if m.is_zero():
                    continue
                if m.cols != src.dim(i, j) or m.rows != dst.dim(i + p, j + q):
                    raise ValueError(
                        f"block at {(i, j)} has shape {m.rows}x{m.cols}, expected "
                        f"{dst.dim(i + p, j + q)}x{src.dim(i, j)}")
                self.blocks[(i, j)] = m

    @property
    def field(self):
        return self.src.field

    def block(self, i: int, j: int) -> Matrix:
        b = self.blocks.get((i, j))
        if b is None:
            p, q = self.bidegree
            b = Matrix.zero(self.field, self.dst.dim(i + p, j + q), self.src.dim(i, j))
        return b

    def is_zero(self) -> bool:
        return not self.blocks

    def __eq__(self, other):
        if not isinstance(other, BigradedMap):
            return NotImplemented
        if self.src != other.src or self.dst != other.dst:
            return False
        if self.bidegree != other.bidegree:
            raise ValueError("comparing maps of different bidegrees")
        keys = set(self.blocks) | set(other.blocks)
        return all(self.block(*k) == other.block(*k) for k in keys)

    def __hash__(self):
        raise TypeError("maps are not hashable")

    def __repr__(self):
        return f"BigradedMap(bidegree={self.bidegree}, blocks={sorted(self.blocks)})"

    # -- linear structure -------------------------------------------------
    def __add__(self, other):
        self._compatible(other)
        keys = set(self.blocks) | set(other.blocks)
        return BigradedMap(self.src, self.dst, self.bidegree,
                           {k: self.block(*k) + other.block(*k) for k in keys})

    def __sub__(self, other):
        return self + other.scale(self.field.of_int(-1))

    def __neg__(self):
        return self.scale(self.field.of_int(-1))

    def scale(self, c) -> "BigradedMap":
        return BigradedMap(self.src, self.dst, self.bidegree,
                           {k: m.scale(c) for k, m in self.blocks.items()})

    def _compatible(self, other):
        if self.src != other.src or self.dst != other.dst:
            raise ValueError("module mismatch")
        if self.bidegree != other.bidegree:
            raise ValueError("bidegree mismatch")

    def shifted(self, shift: Bidegree) -> "BigradedMap":
        """Same matrices, viewed between shifted modules, same bidegree."""
        u, v = shift
        return BigradedMap(self.src.shifted(shift), self.dst.shifted(shift),
                           self.bidegree,
                           {(i + u, j + v): m for (i, j), m in self.blocks.items()})


def zero_map(src: BigradedModule, dst: BigradedModule, bidegree: Bidegree) -> BigradedMap:
    return BigradedMap(src, dst, bidegree)


_ID_CACHE: dict = {}


def identity_map(mod: BigradedModule) -> BigradedMap:
    out = _ID_CACHE.get(mod)
    if out is None:
        out = BigradedMap(mod, mod, (0, 0),
                          {k: Matrix.identity(mod.field, n)
                           for k, n in mod.dims.items()})
        _ID_CACHE[mod] = out
    return out


def compose(f: BigradedMap, g: BigradedMap) -> BigradedMap:
    """f after g; bidegrees add, blocks multiply."""
    if g.dst != f.src:
        raise ValueError("module mismatch in composition")
    p, q = g.bidegree
    bid = (f.bidegree[0] + p, f.bidegree[1] + q)
    blocks = {}
    for (i, j), m in g.blocks.items():
        fb = f.blocks.get((i + p, j + q))
        if fb is not None:
            blocks[(i, j)] = fb * m
    return BigradedMap(g.src, f.dst, bid, blocks)


def add(f: BigradedMap, g: BigradedMap) -> BigradedMap:
    return f + g


def scale(c, f: BigradedMap) -> BigradedMap:
    return f.scale(c)


def equal(f: BigradedMap, g: BigradedMap) -> bool:
    return f == g


# ---------------------------------------------------------------------------
# tensor products
# ---------------------------------------------------------------------------

_TS_CACHE: dict = {}
_TM_CACHE: dict = {}


def tensor_summands(a: BigradedModule, b: BigradedModule, i: int, j: int):
    """Ordered summands of (A (x) B)_i^j: (p, q, dimA(p,q), dimB(i-p,j-q))."""
    key = (a, b, i, j)
    out = _TS_CACHE.get(key)
    if out is None:
        out = []
        for (p, q) in a.support():
            db = b.dim(i - p, j - q)
            if db:
                out.append((p, q, a.dims[(p, q)], db))
        _TS_CACHE[key] = out
    return out


def tensor_modules(a: BigradedModule, b: BigradedModule) -> BigradedModule:
    if a.field != b.field:
        raise ValueError("field mismatch")
    key = (a, b)
    out = _TM_CACHE.get(key)
    if out is None:
        dims: dict[Bidegree, int] = {}
        for (p, q), da in a.dims.items():
            for (s, t), db in b.dims.items():
                k = (p + s, q + t)
                dims[k] = dims.get(k, 0) + da * db
        out = BigradedModule(a.field, dims)
        _TM_CACHE[key] = out
    return out


def unit_module(field: Field) -> BigradedModule:
    return BigradedModule(field, {(0, 0): 1})


def tensor_maps(f: BigradedMap, g: BigradedMap) -> BigradedMap:
    """Koszul rule: on the (p,q) summand the block is
    (-1)^{<bideg g, (p,q)>} f_block (x) g_block."""
    src = tensor_modules(f.src, g.src)
    dst = tensor_modules(f.dst, g.dst)
    fb, fq = f.bidegree
    gb, gq = g.bidegree
    bid = (fb + gb, fq + gq)
    field = f.field
    blocks: dict[Bidegree, Matrix] = {}
    for (i, j) in src.support():
        src_sum = tensor_summands(f.src, g.src, i, j)
        dst_sum = tensor_summands(f.dst, g.dst, i + bid[0], j + bid[1])
        dst_off = {}
        off = 0
        for (p, q, da, db) in dst_sum:
            dst_off[(p, q)] = off
            off += da * db
        rows = dst.dim(i + bid[0], j + bid[1])
        cols = src.dim(i, j)
        out = Matrix.zero(field, rows, cols)
        coff = 0
        nonzero = False
        for (p, q, da, db) in src_sum:
            fblk = f.blocks.get((p, q))
            gblk = g.blocks.get((i - p, j - q))
            if fblk is not None and gblk is not None:
                sign = -1 if sprod((gb, gq), (p, q)) % 2 else 1
                roff = dst_off.get((p + fb, q + fq))
                if roff is None:
                    raise AssertionError("tensor block landed outside target")
                gr, gc = gblk.rows, gblk.cols
                for ra in range(fblk.rows):
                    for ca in range(fblk.cols):
                        fv = fblk[ra, ca]
                        if not fv:
                            continue
                        if sign < 0:
                            fv = field.neg(fv)
                        for rb in range(gr):
                            for cb in range(gc):
                                gv = gblk[rb, cb]
                                if gv:
                                    out[roff + ra * gr + rb,
                                        coff + ca * gc + cb] = field.mul(fv, gv)
                        nonzero = True
            coff += da * db
        if nonzero:
            blocks[(i, j)] = out
    return BigradedMap(src, dst, bid, blocks)


# ---------------------------------------------------------------------------
# tensor trees: enumerations and structural isomorphisms
# ---------------------------------------------------------------------------

class Tree:
    """Parenthesized tensor word; leaves are bigraded modules."""

    __slots__ = ("left", "right", "module", "_leaves", "_basis")

    def __init__(self, left=None, right=None, module: BigradedModule | None = None):
        self._basis = {}
        if module is not None:
            self.left = self.right = None
            self.module = module
            self._leaves = [module]
        else:
            self.left = left
            self.right = right
            self.module = tensor_modules(left.module, right.module)
            self._leaves = left._leaves + right._leaves

    @property
    def is_leaf(self):
        return self.left is None

    def leaves(self) -> list[BigradedModule]:
        return self._leaves


def leaf(mod: BigradedModule) -> Tree:
    return Tree(module=mod)


def node(left: Tree, right: Tree) -> Tree:
    return Tree(left, right)


_PT_CACHE: dict = {}


def left_tree(mods: list[BigradedModule]) -> Tree:
    t = leaf(mods[0])
    for m in mods[1:]:
        t = node(t, leaf(m))
    return t


def power_tree(mod: BigradedModule, k: int) -> Tree:
    key = (mod, k)
    t = _PT_CACHE.get(key)
    if t is None:
        t = left_tree([mod] * k)
        _PT_CACHE[key] = t
    return t


def power_module(mod: BigradedModule, k: int) -> BigradedModule:
    if k == 0:
        return unit_module(mod.field)
    return power_tree(mod, k).module


def tree_basis(tree: Tree, i: int, j: int):
    """Ordered basis of tree.module at (i,j): tuples of (p, q, idx) per leaf.

    The order coincides with the summand ordering produced by the binary
    tensor constructions, so flat index in this list = coordinate index.
    """
    cached = tree._basis.get((i, j))
    if cached is not None:
        return cached
    if tree.is_leaf:
        out = [((i, j, a),) for a in range(tree.module.dim(i, j))]
    else:
        out = []
        for (p, q, _, _) in tensor_summands(tree.left.module,
                                            tree.right.module, i, j):
            lefts = tree_basis(tree.left, p, q)
            rights = tree_basis(tree.right, i - p, j - q)
            for lt in lefts:
                for rt in rights:
                    out.append(lt + rt)
    tree._basis[(i, j)] = out
    return out


def tree_iso(src: Tree, dst: Tree, perm: list[int] | None = None) -> BigradedMap:
    """Structural isomorphism src.module -> dst.module.

    perm sends source leaf position s to target leaf position perm[s]
    (identity if omitted: a pure regrouping, which carries no signs).
    For genuine permutations the Koszul sign is the product over inverted
    pairs of (-1)^{<bideg_s, bideg_t>}.
    """
    n = len(src.leaves())
    if perm is None:
        perm = list(range(n))
    if sorted(perm) != list(range(n)) or len(dst.leaves()) != n:
        raise ValueError("bad permutation")
    for s in range(n):
        if src.leaves()[s] != dst.leaves()[perm[s]]:
            raise ValueError("leaf modules do not match under permutation")
    field = src.module.field
    blocks = {}
    for (i, j) in src.module.support():
        sbasis = tree_basis(src, i, j)
        dbasis = tree_basis(dst, i, j)
        dindex = {t: k for k, t in enumerate(dbasis)}
        m = Matrix.zero(field, len(dbasis), len(sbasis))
        for cidx, items in enumerate(sbasis):
            target = [None] * n
            for s, item in enumerate(items):
                target[perm[s]] = item
            sign = 0
            for s in range(n):
                for t in range(s + 1, n):
                    if perm[s] > perm[t]:
                        sign += sprod(items[s][:2], items[t][:2])
            ridx = dindex[tuple(target)]
            m[ridx, cidx] = field.one() if sign % 2 == 0 else field.of_int(-1)
        if len(dbasis) and len(sbasis):
            blocks[(i, j)] = m
    return BigradedMap(src.module, dst.module, (0, 0), blocks)


def symmetry_iso(a: BigradedModule, b: BigradedModule) -> BigradedMap:
    """tau_{A,B}: A (x) B -> B (x) A, a (x) b -> (-1)^{<a,b>} b (x) a."""
    return tree_iso(node(leaf(a), leaf(b)), node(leaf(b), leaf(a)), [1, 0])


def interleave_iso(a: BigradedModule, b: BigradedModule, k: int) -> BigradedMap:
    """(A (x) B)^{(x) k} -> A^{(x) k} (x) B^{(x) k}, the Koszul shuffle tau_k.

    The source coordinates are those of the canonical left power of
    tensor_modules(a, b); for k = 1 this is the identity.
    """
    if k < 1:
        raise ValueError("k must be positive")
    pair = tensor_modules(a, b)
    if k == 1:
        return identity_map(pair)
    pairs = _pairs_tree(a, b, k)  # same module and coordinates as pair^{(x) k}
    flat = left_tree([a, b] * k)
    regroup = tree_iso(pairs, flat)
    perm = []
    for s in range(k):
        perm.extend([s, k + s])
    shuffle = tree_iso(flat, node(power_tree(a, k), power_tree(b, k)), perm)
    return compose(shuffle, regroup)


def _pairs_tree(a: BigradedModule, b: BigradedModule, k: int) -> Tree:
    t = node(leaf(a), leaf(b))
    for _ in range(k - 1):
        t = node(t, node(leaf(a), leaf(b)))
    return t


def direct_sum(parts: list[BigradedModule]):
    """Direct sum with its injections and projections.

    Basis order per bidegree: all of parts[0], then parts[1], ...
    """
    if not parts:
        raise ValueError("empty direct sum")
    field = parts[0].field
    dims: dict[Bidegree, int] = {}
    for p in parts:
        if p.field != field:
            raise ValueError("field mismatch")
        for k, n in p.dims.items():
            dims[k] = dims.get(k, 0) + n
    total = BigradedModule(field, dims)
    injections, projections = [], []
    for s, p in enumerate(parts):
        inj_blocks, proj_blocks = {}, {}
        for (i, j), n in p.dims.items():
            off = sum(parts[t].dim(i, j) for t in range(s))
            tot = total.dim(i, j)
            inj = Matrix.zero(field, tot, n)
            proj = Matrix.zero(field, n, tot)
            for a in range(n):
                inj[off + a, a] = field.one()
                proj[a, off + a] = field.one()
            inj_blocks[(i, j)] = inj
            proj_blocks[(i, j)] = proj
        injections.append(BigradedMap(p, total, (0, 0), inj_blocks))
        projections.append(BigradedMap(total, p, (0, 0), proj_blocks))
    return total, injections, projections


def shift_into(mod: BigradedModule, shift: Bidegree) -> BigradedMap:
    """Canonical iso mod -> mod.shifted(shift), identity blocks, bidegree = shift."""
    u, v = shift
    return BigradedMap(mod, mod.shifted(shift), (u, v),
                       {k: Matrix.identity(mod.field, n) for k, n in mod.dims.items()})


def shift_out(mod: BigradedModule, shift: Bidegree) -> BigradedMap:
    """Canonical iso mod.shifted(shift) -> mod, identity blocks, bidegree = -shift."""
    u, v = shift
    return BigradedMap(mod.shifted(shift), mod, (-u, -v),
                       {(i + u, j + v): Matrix.identity(mod.field, n)
                        for (i, j), n in mod.dims.items()})


def nary_tensor_maps(maps: list[BigradedMap]) -> BigradedMap:
    """Left-associated Koszul tensor of several maps.

    Source and target are the left-associated tensor products of the
    sources / targets; regroup with tree_iso if other shapes are needed.
    """
    out = maps[0]
    for m in maps[1:]:
        out = tensor_maps(out, m)
    return out


def hom_one_map_one(m: BigradedMap, base: BigradedModule, r: int, t: int,
                    q: int) -> BigradedMap:
    """1^{(x) r} (x) m (x) 1^{(x) t} between canonical powers of base.

    m maps power_module(base, q) -> base (arity q passed explicitly).
    """
    if m.src != power_module(base, q) or m.dst != base:
        raise ValueError("map shape does not match the stated arity")
    parts = []
    if r:
        parts.append(identity_map(power_module(base, r)))
    parts.append(m)
    if t:
        parts.append(identity_map(power_module(base, t)))
    mid = nary_tensor_maps(parts)
    # conjugate by regroupings so src/dst are canonical left powers
    src_shape = []
    dst_shape = []
    if r:
        src_shape.append(power_tree(base, r))
        dst_shape.append(power_tree(base, r))
    src_shape.append(power_tree(base, q))
    dst_shape.append(leaf(base))
    if t:
        src_shape.append(power_tree(base, t))
        dst_shape.append(power_tree(base, t))
    src_tree = src_shape[0]
    for s in src_shape[1:]:
        src_tree = node(src_tree, s)
    dst_tree = dst_shape[0]
    for s in dst_shape[1:]:
        dst_tree = node(dst_tree, s)
    pre = tree_iso(power_tree(base, r + q + t), src_tree)
    post = tree_iso(dst_tree, power_tree(base, r + 1 + t))
    return compose(post, compose(mid, pre))
