import random

import pytest

from multiplex.bigraded import BigradedModule, symmetry_iso
from multiplex.filtration import (
    FilteredComplex, check_filtered_complex, check_order_homotopy,
    graded_map_tensor, graded_tensor, homotopy_to_tot, identity_filtered, mu,
    tot, tot_inverse, tot_inverse_morphism, tot_morphism, tot_to_homotopy,
)
from multiplex.generators import (
    random_endo_morphism, random_filtered_complex, random_homotopic_pair,
    random_twisted_complex,
)
from multiplex.linalg import GF, Matrix
from multiplex.twisted import (
    TwistedComplex, TwistedMorphism, check_morphism, compose,
    identity_morphism, tensor, tensor_morphisms,
)

F = GF()


def test_tot_trivial_and_single_column():
    mod = BigradedModule(F, {(0, 0): 2, (1, 2): 1, (2, 2): 1})
    a = TwistedComplex(mod, {})
    k = tot(a)
    assert not k.d
    for n in k.degrees():
        assert k.dim(n) == sum(mod.dim(i, n + i) for i in range(0, 4))

    # single column: Tot is the column complex with no signs
    col = BigradedModule(F, {(0, 0): 1, (0, 1): 1})
    from multiplex.bigraded import BigradedMap
    d0 = BigradedMap(col, col, (0, 1), {(0, 0): Matrix.identity(F, 1)})
    a2 = TwistedComplex(col, {0: d0})
    k2 = tot(a2)
    assert k2.d_mat(0)[0, 0] == F.one()


def test_tot_sign_on_d1():
    # an element of A_1^{n+1} inside Tot^n hit by d_1 lands with (-1)^{1*n}
    from multiplex.bigraded import BigradedMap
    for n in (0, 1, 2, 3):
        mod = BigradedModule(F, {(1, n + 1): 1, (0, n + 1): 1})
        d1 = BigradedMap(mod, mod, (-1, 0), {(1, n + 1): Matrix.identity(F, 1)})
        a = TwistedComplex(mod, {1: d1})
        k = tot(a)
        expected = F.one() if (n % 2 == 0) else F.of_int(-1)
        assert k.d_mat(n)[0, 0] == expected


@pytest.mark.parametrize("seed", range(10))
def test_roundtrip_both_ways(seed):
    rng = random.Random(600 + seed)
    a = random_twisted_complex(F, rng)
    assert tot_inverse(tot(a)) == a
    k = random_filtered_complex(F, rng)
    assert check_filtered_complex(k).ok
    assert tot(tot_inverse(k)) == k


@pytest.mark.parametrize("seed", range(5))
def test_tot_morphism_functorial(seed):
    rng = random.Random(700 + seed)
    a = random_twisted_complex(F, rng, spots=3)
    f = random_endo_morphism(a, rng)
    g = random_endo_morphism(a, rng)
    ka = tot(a)
    tf = tot_morphism(f, ka, ka)
    tg = tot_morphism(g, ka, ka)
    assert tg.compose(tf) == tot_morphism(compose(g, f), ka, ka)
    assert tot_morphism(identity_morphism(a), ka, ka) == identity_filtered(ka)
    # and back
    assert tot_inverse_morphism(tf, a, a) == f


@pytest.mark.parametrize("seed", range(4))
def test_mu_unit_and_chain_map(seed):
    rng = random.Random(800 + seed)
    a = random_twisted_complex(F, rng, spots=3)
    from multiplex.twisted import unit_complex
    r = unit_complex(F)
    m = mu(a, r)
    # B = unit: identity identification on every degree
    for n in m.src.degrees():
        blk = m.block(n)
        assert blk == Matrix.identity(F, blk.rows)
    b = random_twisted_complex(F, rng, spots=3)
    m2 = mu(a, b)
    assert m2.check_chain_map().ok
    # bounded case: iso degreewise
    for n in m2.src.degrees():
        assert m2.block(n).is_invertible() or m2.src.dim(n) == 0


@pytest.mark.parametrize("seed", range(3))
def test_mu_symmetry_square(seed):
    # Tot(tau_tc) o mu_{A,B} = mu_{B,A} o tau_fc elementwise
    rng = random.Random(900 + seed)
    a = random_twisted_complex(F, rng, spots=3)
    b = random_twisted_complex(F, rng, spots=3)
    ka, kb = tot(a), tot(b)
    m_ab = mu(a, b, ka, kb)
    m_ba = mu(b, a, kb, ka)
    tau_tc = TwistedMorphism(tensor(a, b), tensor(b, a),
                             {0: symmetry_iso(a.module, b.module)})
    check_morphism(tau_tc).raise_if_failed()
    tot_tau = tot_morphism(tau_tc)
    # the filtered-complex symmetry on Tot(A) (x) Tot(B): Koszul by total degree
    tau_fc = _graded_symmetry(ka, kb)
    lhs = tot_tau.compose(m_ab)
    rhs = m_ba.compose(tau_fc)
    assert lhs == rhs


def _graded_symmetry(ka, kb):
    """Tot(A) (x) Tot(B) -> Tot(B) (x) Tot(A), x (x) y -> (-1)^{n1 n2} y (x) x."""
    from multiplex.filtration import FilteredMap, _pair_decode, _pair_index
    src = graded_tensor(ka, kb)
    dst = graded_tensor(kb, ka)
    blocks = {}
    for n in src.degrees():
        sdec = _pair_decode(ka.module, kb.module, n)
        didx = _pair_index(kb.module, ka.module, n)
        if not sdec:
            continue
        mat = Matrix.zero(F, len(didx), len(sdec))
        for cc, (p, q, aa, s, t, bb) in enumerate(sdec):
            n1, n2 = q - p, n - (q - p)
            rr = didx[(s, t, bb, p, q, aa)]
            mat[rr, cc] = F.one() if (n1 * n2) % 2 == 0 else F.of_int(-1)
        blocks[n] = mat
    return FilteredMap(src, dst, 0, 0, blocks)


@pytest.mark.parametrize("seed", range(3))
def test_mu_naturality_square(seed):
    rng = random.Random(1000 + seed)
    a = random_twisted_complex(F, rng, spots=2)
    b = random_twisted_complex(F, rng, spots=2)
    f = random_endo_morphism(a, rng)
    g = random_endo_morphism(b, rng)
    ka, kb = tot(a), tot(b)
    m1 = mu(a, b, ka, kb)
    fg = tensor_morphisms(f, g)
    lhs = tot_morphism(fg).compose(m1)
    rhs = m1.compose(graded_map_tensor(tot_morphism(f, ka, ka),
                                       tot_morphism(g, kb, kb)))
    assert lhs == rhs


def test_graded_tensor_differential_squares_to_zero():
    rng = random.Random(1100)
    a = random_twisted_complex(F, rng, spots=3)
    b = random_twisted_complex(F, rng, spots=3)
    k = graded_tensor(tot(a), tot(b))
    assert check_filtered_complex(k).ok


@pytest.mark.parametrize("r", [0, 1, 2])
@pytest.mark.parametrize("seed", range(3))
def test_homotopy_tot_roundtrip(r, seed):
    rng = random.Random(1200 + 10 * seed + r)
    a = random_twisted_complex(F, rng, spots=3)
    f = random_endo_morphism(a, rng)
    g, h = random_homotopic_pair(f, r, rng)
    oh = homotopy_to_tot(h)
    # defining identity holds exactly
    assert check_order_homotopy(oh).ok
    # filtration allowance r
    assert oh.h.shift <= r
    back = tot_to_homotopy(oh, f, g)
    assert back.h.keys() == h.h.keys()
    for m in h.h:
        assert back.h[m] == h.h[m]
    # zero homotopy round-trips to zero
    from multiplex.twisted import RHomotopy
    z = RHomotopy(r, f, f, {})
    oz = homotopy_to_tot(z)
    assert oz.h.is_zero()
    assert not tot_to_homotopy(oz, f, f).h
