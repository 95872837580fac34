"""Shared sign calculator for the derived A-infinity relations.

Every exponent printed in the defining equations lives here, pinned by
unit tests, so the algebra/morphism/homotopy checkers and the composition
formula all draw their signs from one place.

Conventions (parts = [(p_1, q_1), ..., (p_l, q_l)], 1-based positions):

  structure relation term  m_{ij}(1^r (x) m_{pq} (x) 1^t):   rq + t + pj
  morphism right side      m_{ij}(f_{p_1 q_1} (x) ... ):     u + compose_sign
  composition              f_{ij}(g_{p_1 q_1} (x) ... ):     compose_sign
  homotopy sum 1           m_{il}(g .. g h f .. f):          p + alpha + p_1+..+p_s
  homotopy sum 2           h_{il}(1^s (x) m_{pq} (x) 1^t):   beta = sq + t + pl + r

with
  compose_sign = sum_t (p_t+q_t)(l+t) + q_t * sum_{w>t} (p_w+q_w)
  alpha = compose_sign + (r-1)(l+1+s+q_1+..+q_s)
"""

from __future__ import annotations


def structure_sign(r: int, q: int, t: int, p: int, j: int) -> int:
    """Exponent of the (A_uv)/(B_uv) left-hand term with inner map at
    position r+1 (r units before, t after)."""
    return (r * q + t + p * j) % 2


def compose_sign(parts: list[tuple[int, int]]) -> int:
    """Exponent in the composition formula f_{il}(g_{p_1q_1} (x) ...)."""
    l = len(parts)
    s = 0
    for t1, (pt, qt) in enumerate(parts):
        t = t1 + 1
        s += (pt + qt) * (l + t)
        s += qt * sum(pw + qw for (pw, qw) in parts[t1 + 1:])
    return s % 2


def morphism_rhs_sign(u: int, parts: list[tuple[int, int]]) -> int:
    """Exponent sigma on the right side of (B_uv)."""
    return (u + compose_sign(parts)) % 2


def homotopy_alpha(r: int, s: int, parts: list[tuple[int, int]]) -> int:
    """alpha in (H_mk): the h-slot sits at position s+1 of l slots."""
    l = len(parts)
    a = compose_sign(parts)
    a += (r - 1) * (l + 1 + s + sum(q for (_, q) in parts[:s]))
    return a % 2


def homotopy_sum1_sign(r: int, p: int, s: int,
                       parts: list[tuple[int, int]]) -> int:
    """Full exponent of a first-sum term: p + alpha + p_1 + ... + p_s."""
    return (p + homotopy_alpha(r, s, parts)
            + sum(pp for (pp, _) in parts[:s])) % 2


def homotopy_beta(r: int, s: int, q: int, t: int, p: int, l: int) -> int:
    """beta in (H_mk) for h_{il}(1^s (x) m_{pq} (x) 1^t), l = s+1+t."""
    return (s * q + t + p * l + r) % 2


def ainf_sign(r: int, q: int, t: int) -> int:
    """Exponent rq + t of the plain A-infinity relation on totalizations."""
    return (r * q + t) % 2
