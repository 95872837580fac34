"""Shared helpers for the test suite and the acceptance gate."""

import random

from multiplex.bigraded import BigradedMap
from multiplex.linalg import Matrix, subquotient
from multiplex.twisted import RHomotopy, compose, identity_morphism, path


def column_subquotient(a, p, q):
    """H^q(A_p^*, d_0) computed directly with exact linear algebra."""
    d0 = a.d_map(0)
    ker = d0.block(p, q).kernel_basis()
    img = d0.block(p, q - 1)
    return subquotient(ker, img)


def page_to_column_coords(page, p, q, sq):
    """Change of basis from page-1 rep coordinates at (p, q) to the
    canonical ker/im coordinates of the column subquotient sq."""
    k = page.complex
    n = q - p
    col_rows = [idx for idx, (i, _) in enumerate(k.basis(n)) if i == p]
    e = page.entries[(p, q)]
    field = k.field
    chg = Matrix.zero(field, sq.dim, e.dim)
    for c in range(e.dim):
        v = e.rep_basis.take_cols([c])
        colv = Matrix.zero(field, len(col_rows), 1)
        for out_r, rr in enumerate(col_rows):
            colv[out_r, 0] = v[rr, 0]
        red = sq.reduce(colv)
        for rr in range(sq.dim):
            chg[rr, c] = red[rr, 0]
    return chg


def iota_pminus_witness(a, p):
    """hhat_0: P_r(A) -> P_r(A), (x, y, z) -> (0, 0, y)."""
    field = a.field
    r = p.r
    pm = p.complex.module
    blocks = {}
    for (i, j) in pm.support():
        n0 = a.module.dim(i, j)
        n1 = a.module.dim(i + r, j + r - 1)
        cols = pm.dim(i, j)
        t0 = a.module.dim(i + r, j + r - 1)
        t1 = a.module.dim(i + 2 * r, j + 2 * r - 2)
        rows = pm.dim(i + r, j + r - 1)
        if not rows or not n1:
            continue
        mat = Matrix.zero(field, rows, cols)
        for y in range(n1):
            mat[t0 + t1 + y, n0 + y] = field.one()
        blocks[(i, j)] = mat
    return BigradedMap(pm, pm, (r, r - 1), blocks)


def lemma_path_homotopy(a, r):
    """The explicit witness iota o p_minus ~_r id on P_r(A)."""
    p = path(a, r)
    f = compose(p.iota, p.p_minus)
    g = identity_morphism(p.complex)
    return RHomotopy(r, f, g, {0: iota_pminus_witness(a, p)})


def corrupt_homotopy(h, bump=1):
    """Flip one matrix entry of the witness (may or may not stay valid)."""
    if not h.h:
        return None
    m0 = sorted(h.h)[0]
    bad_map = h.h[m0]
    loc = sorted(bad_map.blocks)[0]
    blk = bad_map.blocks[loc].copy()
    field = blk.field
    blk[0, 0] = field.add(blk[0, 0], field.of_int(bump))
    blocks = dict(bad_map.blocks)
    blocks[loc] = blk
    bad = dict(h.h)
    bad[m0] = BigradedMap(bad_map.src, bad_map.dst, bad_map.bidegree, blocks)
    return RHomotopy(h.r, h.f, h.g, bad)
