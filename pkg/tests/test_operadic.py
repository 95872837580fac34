import random

import pytest

from multiplex.bigraded import BigradedMap, BigradedModule, identity_map
from multiplex.generators import (
    random_endo_morphism, random_homotopic_pair, random_homotopy_family,
    random_twisted_complex,
)
from multiplex.linalg import GF, Matrix
from multiplex.operadic import (
    check_coderh, check_square_zero_coderivation, default_truncation,
    expand_module, extract, lift, lift_morphism, lift_twisted, shift,
)
from multiplex.twisted import (
    RHomotopy, TwistedComplex, compose, identity_morphism,
)

F = GF()


def test_expand_module_dims():
    mod = BigradedModule(F, {(0, 0): 2, (1, 2): 1})
    e = expand_module(mod, 2)
    assert e.dim(0, 0) == 2
    assert e.dim(-1, -1) == 2
    assert e.dim(-1, 0) == 1
    assert e.total_dim() == 3 * mod.total_dim()


def test_lift_identity_family():
    mod = BigradedModule(F, {(0, 0): 2, (1, 2): 1})
    lifted = lift({0: identity_map(mod)}, 0, 0, mod, mod, 3)
    assert lifted.map == identity_map(expand_module(mod, 3))


def test_lift_sign_on_degree_one_family():
    # a (0,1) family places (-1)^i on the x^i row
    mod = BigradedModule(F, {(0, 0): 1, (0, 1): 1})
    d0 = BigradedMap(mod, mod, (0, 1), {(0, 0): Matrix.identity(F, 1)})
    lifted = lift({0: d0}, 0, 1, mod, mod, 2)
    # x^1 (x) a sits at (-1, -1); its image x^1 (x) d0(a) at (-1, 0)
    blk = lifted.map.block(-1, -1)
    assert blk.rows == 1 and blk.cols == 1
    assert blk[0, 0] == F.of_int(-1)
    blk0 = lifted.map.block(0, 0)
    assert blk0[0, 0] == F.one()


@pytest.mark.parametrize("seed", range(4))
def test_lift_extract_roundtrip(seed):
    rng = random.Random(2200 + seed)
    a = random_twisted_complex(F, rng, spots=3)
    b = random_twisted_complex(F, rng, spots=3)
    fam = random_homotopy_family(a, b, rng.choice([0, 1, 2]), rng)
    if not fam:
        fam = {0: identity_map(a.module)} if a.module == b.module else {}
    u, v = (2, 1) if fam and next(iter(fam.values())).bidegree == (2, 1) else (0, 0)
    # use the family's own overall bidegree
    if fam:
        m0 = sorted(fam)[0]
        p, q = fam[m0].bidegree
        u, v = p + m0, q + m0
    lifted = lift(fam, u, v, a.module, b.module, 8)
    back = extract(lifted)
    assert back.keys() == fam.keys()
    for m in fam:
        assert back[m] == fam[m]


def test_shift_matches_index_shift():
    rng = random.Random(2300)
    a = random_twisted_complex(F, rng, spots=3)
    f = random_endo_morphism(a, rng)
    lf = lift_morphism(f, 8)
    shifted = shift(lf)
    fam = extract(shifted)
    expect = {m + 1: fm for m, fm in f.f.items()}
    assert fam.keys() == expect.keys()
    for m in fam:
        assert fam[m] == expect[m]
    # double shift = two index shifts
    fam2 = extract(shift(shifted))
    assert fam2.keys() == {m + 2 for m in f.f}


def test_lift_respects_composition():
    rng = random.Random(2400)
    a = random_twisted_complex(F, rng, spots=3)
    f = random_endo_morphism(a, rng)
    g = random_endo_morphism(a, rng)
    n = 8
    assert lift_morphism(compose(g, f), n) == \
        lift_morphism(g, n).compose(lift_morphism(f, n))


def test_square_zero_oracle_verdicts():
    # zero family
    mod = BigradedModule(F, {(0, 0): 1, (1, 2): 2})
    assert check_square_zero_coderivation(TwistedComplex(mod, {}), 5)
    # valid random fixtures
    rng = random.Random(2500)
    for _ in range(3):
        a = random_twisted_complex(F, rng)
        assert check_square_zero_coderivation(a, 6)
    # broken commutation: the same fixture as the twisted tests
    mod = BigradedModule(F, {(1, 0): 1, (1, 1): 1, (0, 0): 1, (0, 1): 1})
    d0 = BigradedMap(mod, mod, (0, 1), {(1, 0): Matrix.identity(F, 1)})
    d1 = BigradedMap(mod, mod, (-1, 0), {(1, 1): Matrix.identity(F, 1)})
    broken = TwistedComplex(mod, {0: d0, 1: d1})
    assert not check_square_zero_coderivation(broken, 6)


@pytest.mark.parametrize("seed", range(4))
@pytest.mark.parametrize("r", [0, 1, 2])
def test_coderh_oracle(seed, r):
    rng = random.Random(2600 + 10 * seed + r)
    a = random_twisted_complex(F, rng, spots=3)
    f = random_endo_morphism(a, rng)
    g, h = random_homotopic_pair(f, r, rng)
    assert check_coderh(h)
    # trivial homotopy
    assert check_coderh(RHomotopy(r, f, f, {}))
    # corrupt one entry: verdict flips in both routes (the oracle would
    # raise if they ever disagreed)
    if h.h:
        m0 = sorted(h.h)[0]
        bad_map = h.h[m0]
        loc = sorted(bad_map.blocks)[0]
        blk = bad_map.blocks[loc].copy()
        blk[0, 0] = F.add(blk[0, 0], F.one())
        blocks = dict(bad_map.blocks)
        blocks[loc] = blk
        bad = dict(h.h)
        bad[m0] = BigradedMap(bad_map.src, bad_map.dst, bad_map.bidegree,
                              blocks)
        assert not check_coderh(RHomotopy(r, f, g, bad))


def test_truncation_floor_and_stability():
    rng = random.Random(2700)
    a = random_twisted_complex(F, rng, spots=3)
    f = random_endo_morphism(a, rng)
    g, h = random_homotopic_pair(f, 1, rng)
    n0 = default_truncation(h)
    with pytest.raises(ValueError):
        check_coderh(h, n0 - 1)
    assert check_coderh(h, n0) == check_coderh(h, n0 + 3)