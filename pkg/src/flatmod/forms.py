"""Differential forms on finite products of group, vector, and simplex factors.

Forms are evaluator-backed: a FormField is its shape, an arity, and a function
(point, tangents...) -> complex. Group tangents are left-trivialized algebra
elements; simplex tangents are zero-sum coordinate vectors; vector-factor
tangents are plain real vectors. The exterior derivative is the invariant-frame
finite-difference formula, so no charts are ever introduced.

Equivariant forms (Cartan model) carry one evaluator per tangent arity,
because the Cartan differential d - iota mixes arities p+1 and p-1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from . import liecore as lc

DEFAULT_FD_STEP = 1e-5


class SimplexMarginError(ValueError):
    """Point is too close to the simplex boundary for the FD step."""


# ---------------------------------------------------------------------------
# shapes, points, tangents

@dataclass(frozen=True)
class GroupFactor:
    n: int


@dataclass(frozen=True)
class VectorFactor:
    dim: int


@dataclass(frozen=True)
class SimplexFactor:
    n: int


def group_power(n, copies):
    """Shape of K^copies for K = SU(n)."""
    return tuple(GroupFactor(n) for _ in range(copies))


@dataclass(frozen=True)
class Point:
    parts: tuple

    def __getitem__(self, i):
        return self.parts[i]

    def __len__(self):
        return len(self.parts)


@dataclass(frozen=True)
class Tangent:
    parts: tuple

    def __getitem__(self, i):
        return self.parts[i]

    def __len__(self):
        return len(self.parts)


def point(shape, *parts, validate=True):
    if len(parts) != len(shape):
        raise ValueError("wrong number of point components")
    fixed = []
    for fac, p in zip(shape, parts):
        if isinstance(fac, GroupFactor):
            p = lc.check_group(p) if validate else np.asarray(p, dtype=complex)
            if p.shape != (fac.n, fac.n):
                raise ValueError("group component has wrong size")
        elif isinstance(fac, VectorFactor):
            p = np.asarray(p, dtype=float)
            if p.shape != (fac.dim,):
                raise ValueError("vector component has wrong dimension")
        elif isinstance(fac, SimplexFactor):
            p = np.asarray(p, dtype=float)
            if p.shape != (fac.n + 1,):
                raise ValueError("simplex component has wrong length")
            if validate and abs(p.sum() - 1.0) > 1e-12:
                raise ValueError("barycentric coordinates must sum to 1")
        else:
            raise TypeError(f"unknown factor {fac!r}")
        fixed.append(p)
    return Point(tuple(fixed))


def tangent(shape, *parts, validate=True):
    if len(parts) != len(shape):
        raise ValueError("wrong number of tangent components")
    fixed = []
    for fac, v in zip(shape, parts):
        if isinstance(fac, GroupFactor):
            v = lc.check_algebra(v) if validate else np.asarray(v, dtype=complex)
        elif isinstance(fac, VectorFactor):
            v = np.asarray(v, dtype=float)
        else:
            v = np.asarray(v, dtype=float)
            if validate and abs(v.sum()) > 1e-12:
                raise ValueError("simplex tangent must sum to 0")
        fixed.append(v)
    return Tangent(tuple(fixed))


def zero_tangent(shape):
    parts = []
    for fac in shape:
        if isinstance(fac, GroupFactor):
            parts.append(np.zeros((fac.n, fac.n), dtype=complex))
        elif isinstance(fac, VectorFactor):
            parts.append(np.zeros(fac.dim))
        else:
            parts.append(np.zeros(fac.n + 1))
    return Tangent(tuple(parts))


def add_tangents(u, v, a=1.0, b=1.0):
    return Tangent(tuple(a * x + b * y for x, y in zip(u.parts, v.parts)))


def scale_tangent(v, a):
    return Tangent(tuple(a * x for x in v.parts))


def random_point(shape, seed, simplex_margin=0.05):
    rng = lc.as_rng(seed)
    parts = []
    for fac in shape:
        if isinstance(fac, GroupFactor):
            parts.append(lc.random_group(fac.n, rng))
        elif isinstance(fac, VectorFactor):
            parts.append(rng.standard_normal(fac.dim))
        else:
            t = rng.dirichlet(np.full(fac.n + 1, 2.0))
            while t.min() < simplex_margin:
                t = rng.dirichlet(np.full(fac.n + 1, 2.0))
            parts.append(t)
    return Point(tuple(parts))


def random_tangent(shape, seed, unit=True):
    rng = lc.as_rng(seed)
    parts = []
    for fac in shape:
        if isinstance(fac, GroupFactor):
            x = lc.random_algebra(fac.n, rng)
            if unit:
                x = x / math.sqrt(lc.inner(x, x))
            parts.append(x)
        elif isinstance(fac, VectorFactor):
            v = rng.standard_normal(fac.dim)
            if unit:
                v = v / np.linalg.norm(v)
            parts.append(v)
        else:
            tau = rng.standard_normal(fac.n + 1)
            tau -= tau.mean()
            if unit and np.linalg.norm(tau) > 0:
                tau = tau / np.linalg.norm(tau)
            parts.append(tau)
    return Tangent(tuple(parts))


# ---------------------------------------------------------------------------
# fields

class FormField:
    """Alternating multilinear evaluator of fixed arity on a product shape."""

    def __init__(self, shape, arity, fn, name=""):
        if arity < 0:
            raise ValueError("arity must be nonnegative")
        self.shape = tuple(shape)
        self.arity = arity
        self.fn = fn
        self.name = name

    def __call__(self, pt, *tangents):
        if len(tangents) != self.arity:
            raise ValueError(
                f"form {self.name or ''} of arity {self.arity} "
                f"got {len(tangents)} tangents"
            )
        return complex(self.fn(pt, *tangents))

    def __repr__(self):
        return f"FormField({self.name or 'anon'}, arity={self.arity})"


class EquivariantFormField:
    """Family of forms alpha(phi) with one evaluator per tangent arity.

    components maps arity p to a function (phi, point, tangents...) -> complex.
    Missing arities evaluate to zero. actions lists the group action per
    factor: 'conjugation' | 'left' | 'adjoint' | 'trivial'.
    """

    def __init__(self, shape, actions, components, phi_degree=None, name=""):
        self.shape = tuple(shape)
        self.actions = tuple(actions)
        if len(self.actions) != len(self.shape):
            raise ValueError("one action per factor required")
        self.components = dict(components)
        self.phi_degree = phi_degree
        self.name = name

    @property
    def arities(self):
        return sorted(self.components)

    def __call__(self, phi, pt, *tangents):
        fn = self.components.get(len(tangents))
        if fn is None:
            return 0j
        return complex(fn(phi, pt, *tangents))

    def __repr__(self):
        return f"EquivariantFormField({self.name or 'anon'}, arities={self.arities})"


def constant_function(shape, value):
    return FormField(shape, 0, lambda pt: value, name="const")


# ---------------------------------------------------------------------------
# wedge product

@lru_cache(maxsize=None)
def _shuffles(p, q):
    """(p,q)-shuffles of range(p+q) with their permutation signs."""
    idx = tuple(range(p + q))
    out = []
    for left in combinations(idx, p):
        right = tuple(i for i in idx if i not in left)
        perm = left + right
        sign = 1
        for a in range(len(perm)):
            for b in range(a + 1, len(perm)):
                if perm[a] > perm[b]:
                    sign = -sign
        out.append((left, right, sign))
    return tuple(out)


def wedge(f, g):
    if f.shape != g.shape:
        raise ValueError("wedge requires forms on the same shape")
    p, q = f.arity, g.arity
    table = _shuffles(p, q)

    def fn(pt, *vs):
        total = 0j
        for left, right, sign in table:
            total += sign * f(pt, *(vs[i] for i in left)) * g(
                pt, *(vs[i] for i in right)
            )
        return total

    return FormField(f.shape, p + q, fn, name=f"({f.name}^{g.name})")


# ---------------------------------------------------------------------------
# maps between shapes

class SmoothMap:
    """A map of product shapes carrying an exact tangent pushforward."""

    domain = ()
    codomain = ()

    def apply(self, pt):
        raise NotImplementedError

    def push(self, pt, v):
        raise NotImplementedError


class IdentityMap(SmoothMap):
    def __init__(self, shape):
        self.domain = tuple(shape)
        self.codomain = tuple(shape)

    def apply(self, pt):
        return pt

    def push(self, pt, v):
        return v


class ComposedMap(SmoothMap):
    """outer after inner."""

    def __init__(self, outer, inner):
        if inner.codomain != outer.domain:
            raise ValueError("shape mismatch in composition")
        self.outer = outer
        self.inner = inner
        self.domain = inner.domain
        self.codomain = outer.codomain

    def apply(self, pt):
        return self.outer.apply(self.inner.apply(pt))

    def push(self, pt, v):
        mid = self.inner.apply(pt)
        return self.outer.push(mid, self.inner.push(pt, v))


class CallableMap(SmoothMap):
    def __init__(self, domain, codomain, apply_fn, push_fn):
        self.domain = tuple(domain)
        self.codomain = tuple(codomain)
        self._apply = apply_fn
        self._push = push_fn

    def apply(self, pt):
        return self._apply(pt)

    def push(self, pt, v):
        return self._push(pt, v)


def pullback(m, f):
    if f.shape != m.codomain:
        raise ValueError("form shape does not match map codomain")

    def fn(pt, *vs):
        return f(m.apply(pt), *(m.push(pt, v) for v in vs))

    return FormField(m.domain, f.arity, fn, name=f"{f.name}*")


def pullback_equivariant(m, ef, actions):
    """Pull back an equivariant family along an action-intertwining map.

    The caller asserts that m is equivariant for the declared domain actions;
    phi passes through unchanged.
    """
    if ef.shape != m.codomain:
        raise ValueError("form shape does not match map codomain")
    comps = {}
    for p, fn in ef.components.items():
        def make(fn):
            def g(phi, pt, *vs):
                return fn(phi, m.apply(pt), *(m.push(pt, v) for v in vs))
            return g
        comps[p] = make(fn)
    return EquivariantFormField(
        m.domain, actions, comps, phi_degree=ef.phi_degree, name=f"{ef.name}*"
    )


# ---------------------------------------------------------------------------
# interior product and generating fields

def interior_product(field_fn, f):
    """Contract the first slot of f with the vector field point -> Tangent."""
    if f.arity == 0:
        raise ValueError("cannot contract a 0-form")

    def fn(pt, *vs):
        return f(pt, field_fn(pt), *vs)

    return FormField(f.shape, f.arity - 1, fn, name=f"i({f.name})")


def generating_field(shape, actions, phi, pt):
    """Left-trivialized infinitesimal action of phi at pt.

    conjugation at h: Ad(h^-1)phi - phi; left multiplication at g: Ad(g^-1)phi;
    adjoint on a vector factor at Lam: [phi, Lam]; trivial: 0.
    """
    parts = []
    for fac, act, p in zip(shape, actions, pt.parts):
        if act == "trivial":
            if isinstance(fac, GroupFactor):
                parts.append(np.zeros((fac.n, fac.n), dtype=complex))
            elif isinstance(fac, VectorFactor):
                parts.append(np.zeros(fac.dim))
            else:
                parts.append(np.zeros(fac.n + 1))
        elif act == "conjugation":
            gi = p.conj().T
            parts.append(gi @ phi @ p - phi)
        elif act == "left":
            gi = p.conj().T
            parts.append(gi @ phi @ p)
        elif act == "adjoint":
            n = int(round(math.sqrt(fac.dim + 1)))
            lam = lc.from_coords(p, n)
            parts.append(lc.to_coords(lc.bracket(phi, lam), n))
        else:
            raise ValueError(f"unknown action {act!r}")
    return Tangent(tuple(parts))


# ---------------------------------------------------------------------------
# exterior derivative (invariant-frame finite differences)

def flow(shape, pt, v, s):
    """Move pt along v for time s: g exp(s xi) on groups, straight lines else."""
    parts = []
    for fac, p, x in zip(shape, pt.parts, v.parts):
        if isinstance(fac, GroupFactor):
            parts.append(p @ lc.exp_alg(s * x))
        else:
            parts.append(p + s * x)
    return Point(tuple(parts))


def frame_bracket(shape, u, v):
    """Componentwise bracket of invariant-frame tangents.

    Group components bracket in the algebra; vector and simplex frames are
    commuting coordinate frames, so those components vanish.
    """
    parts = []
    for fac, a, b in zip(shape, u.parts, v.parts):
        if isinstance(fac, GroupFactor):
            parts.append(lc.bracket(a, b))
        elif isinstance(fac, VectorFactor):
            parts.append(np.zeros(fac.dim))
        else:
            parts.append(np.zeros(fac.n + 1))
    return Tangent(tuple(parts))


def _check_margin(shape, pt, step):
    for fac, p in zip(shape, pt.parts):
        if isinstance(fac, SimplexFactor) and p.min() < 10 * step:
            raise SimplexMarginError(
                "point too close to the simplex boundary for this FD step"
            )


def exterior_derivative(f, step=DEFAULT_FD_STEP):
    """d of a form field by the invariant-frame formula.

    df(v_0..v_p) = sum_i (-1)^i D_{v_i} f(..no v_i..)
                 + sum_{i<j} (-1)^{i+j} f([v_i,v_j]_frame, ..no v_i, v_j..),
    directional derivatives by central differences along the factor flows.
    """
    p = f.arity

    def fn(pt, *vs):
        _check_margin(f.shape, pt, step)
        total = 0j
        for i in range(p + 1):
            rest = vs[:i] + vs[i + 1:]
            plus = f(flow(f.shape, pt, vs[i], step), *rest)
            minus = f(flow(f.shape, pt, vs[i], -step), *rest)
            total += (-1) ** i * (plus - minus) / (2 * step)
        for i in range(p + 1):
            for j in range(i + 1, p + 1):
                br = frame_bracket(f.shape, vs[i], vs[j])
                rest = tuple(vs[k] for k in range(p + 1) if k not in (i, j))
                total += (-1) ** (i + j) * f(pt, br, *rest)
        return total

    return FormField(f.shape, p + 1, fn, name=f"d({f.name})")


def cartan_differential(ef, step=DEFAULT_FD_STEP):
    """(d_K f)(phi) = d(f(phi)) - iota_{phi-tilde} f(phi), arity by arity."""
    targets = set()
    for p in ef.components:
        targets.add(p + 1)
        if p - 1 >= 0:
            targets.add(p - 1)
    comps = {}
    for q in sorted(targets):
        def make(q):
            def fn(phi, pt, *vs):
                val = 0j
                lower = ef.components.get(q - 1)
                if lower is not None:
                    frozen = FormField(
                        ef.shape, q - 1,
                        lambda pt2, *vs2: lower(phi, pt2, *vs2),
                    )
                    val += exterior_derivative(frozen, step)(pt, *vs)
                upper = ef.components.get(q + 1)
                if upper is not None:
                    gen = generating_field(ef.shape, ef.actions, phi, pt)
                    val -= upper(phi, pt, gen, *vs)
                return val
            return fn
        comps[q] = make(q)
    deg = None if ef.phi_degree is None else ef.phi_degree + 1
    return EquivariantFormField(
        ef.shape, ef.actions, comps, phi_degree=deg, name=f"dK({ef.name})"
    )


# ---------------------------------------------------------------------------
# diagnostics used by the test suite

def alternation_residual(f, pt, vs, seed=0):
    """Max |f(..u,v..) + f(..v,u..)| over adjacent transpositions."""
    worst = 0.0
    vs = list(vs)
    for i in range(len(vs) - 1):
        swapped = list(vs)
        swapped[i], swapped[i + 1] = swapped[i + 1], swapped[i]
        worst = max(worst, abs(f(pt, *vs) + f(pt, *swapped)))
    return worst


def linearity_residual(f, pt, vs, seed=0):
    """|f(a u + b w, ...) - a f(u, ...) - b f(w, ...)| on a random slot."""
    rng = lc.as_rng(seed)
    i = int(rng.integers(len(vs)))
    w = random_tangent(f.shape, rng)
    a, b = rng.standard_normal(2)
    combo = list(vs)
    combo[i] = add_tangents(vs[i], w, a, b)
    lhs = f(pt, *combo)
    first = list(vs)
    second = list(vs)
    second[i] = w
    rhs = a * f(pt, *first) + b * f(pt, *second)
    return abs(lhs - rhs)
