"""Free-group words, Fox derivatives, and evaluation maps into SU(N).

Words are freely reduced tuples of nonzero signed integers: +j stands for the
generator x_j, -j for its inverse (1-based). Chains over words carry integer
coefficients and normalize eagerly. Evaluation maps push tangents forward
exactly via the left-trivialized product rule, never by finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import forms
from . import liecore as lc


# ---------------------------------------------------------------------------
# words

def _reduce(letters):
    out = []
    for l in letters:
        l = int(l)
        if l == 0:
            raise ValueError("letter 0 is not allowed")
        if out and out[-1] == -l:
            out.pop()
        else:
            out.append(l)
    return tuple(out)


@dataclass(frozen=True)
class Word:
    """Freely reduced word in a free group."""

    letters: tuple

    @staticmethod
    def from_letters(letters):
        return Word(_reduce(letters))

    @staticmethod
    def identity():
        return Word(())

    @staticmethod
    def generator(j):
        if j < 1:
            raise ValueError("generator index must be positive")
        return Word((j,))

    def __mul__(self, other):
        return Word(_reduce(self.letters + other.letters))

    def inverse(self):
        return Word(tuple(-l for l in reversed(self.letters)))

    def is_identity(self):
        return not self.letters

    def max_generator(self):
        return max((abs(l) for l in self.letters), default=0)

    def __len__(self):
        return len(self.letters)

    def __str__(self):
        if not self.letters:
            return "1"
        return " ".join(
            f"x{l}" if l > 0 else f"x{-l}^-1" for l in self.letters
        )

    def __repr__(self):
        return f"Word({self})"


def parse_word(text, num_generators=None):
    """Parse 'x1 x2^-1 x1' into a Word; '1' or '' is the identity."""
    text = text.strip()
    letters = []
    if text and text != "1":
        for tok in text.split():
            body = tok
            sign = 1
            if "^" in tok:
                body, exp = tok.split("^", 1)
                if exp != "-1":
                    raise ValueError(f"unsupported exponent in {tok!r}")
                sign = -1
            if not body.startswith("x"):
                raise ValueError(f"bad token {tok!r}")
            j = int(body[1:])
            if j < 1:
                raise ValueError(f"bad generator index in {tok!r}")
            letters.append(sign * j)
    w = Word.from_letters(letters)
    if num_generators is not None and w.max_generator() > num_generators:
        raise ValueError("word uses a generator beyond the declared alphabet")
    return w


def commutator(a, b):
    return a * b * a.inverse() * b.inverse()


def surface_relator(genus):
    """Product of commutators [x1,x2][x3,x4]... for the given genus."""
    if genus < 1:
        raise ValueError("genus must be at least 1")
    r = Word.identity()
    for j in range(genus):
        r = r * commutator(Word.generator(2 * j + 1), Word.generator(2 * j + 2))
    return r


# ---------------------------------------------------------------------------
# integer chains of words (group-ring elements) and word pairs

class Chain1:
    """Integer combination of words; doubles as a group-ring element."""

    def __init__(self, terms=()):
        data = {}
        for w, c in dict(terms).items() if isinstance(terms, dict) else terms:
            c = int(c)
            if c:
                data[w] = data.get(w, 0) + c
        self.terms = {w: c for w, c in data.items() if c}

    @staticmethod
    def of(word, coeff=1):
        return Chain1([(word, coeff)])

    @staticmethod
    def one():
        return Chain1.of(Word.identity())

    def __add__(self, other):
        merged = dict(self.terms)
        for w, c in other.terms.items():
            merged[w] = merged.get(w, 0) + c
        return Chain1(merged.items())

    def __sub__(self, other):
        return self + other.scaled(-1)

    def scaled(self, k):
        return Chain1([(w, k * c) for w, c in self.terms.items()])

    def __mul__(self, other):
        """Group-ring product: words concatenate and reduce."""
        out = {}
        for a, ca in self.terms.items():
            for b, cb in other.terms.items():
                w = a * b
                out[w] = out.get(w, 0) + ca * cb
        return Chain1(out.items())

    def left_mul(self, word):
        return Chain1([(word * w, c) for w, c in self.terms.items()])

    def __eq__(self, other):
        return isinstance(other, Chain1) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def is_zero(self):
        return not self.terms

    def __repr__(self):
        if not self.terms:
            return "Chain1(0)"
        bits = " + ".join(f"{c}*({w})" for w, c in sorted(
            self.terms.items(), key=lambda t: str(t[0])))
        return f"Chain1({bits})"


class Chain2:
    """Integer combination of ordered word pairs (a | b)."""

    def __init__(self, terms=()):
        data = {}
        for pair, c in dict(terms).items() if isinstance(terms, dict) else terms:
            c = int(c)
            if c:
                data[pair] = data.get(pair, 0) + c
        self.terms = {p: c for p, c in data.items() if c}

    def __add__(self, other):
        merged = dict(self.terms)
        for p, c in other.terms.items():
            merged[p] = merged.get(p, 0) + c
        return Chain2(merged.items())

    def scaled(self, k):
        return Chain2([(p, k * c) for p, c in self.terms.items()])

    def __eq__(self, other):
        return isinstance(other, Chain2) and self.terms == other.terms

    def __repr__(self):
        if not self.terms:
            return "Chain2(0)"
        bits = " + ".join(
            f"{c}*({a} | {b})" for (a, b), c in sorted(
                self.terms.items(), key=lambda t: (str(t[0][0]), str(t[0][1])))
        )
        return f"Chain2({bits})"


def fox_derivative(word, j):
    """Free derivative of a word with respect to x_j, as a Chain1.

    Rules: d(x_j) = 1, d(x_j^-1) = -x_j^-1, d(uv) = d(u) + u d(v).
    """
    terms = []
    prefix = Word.identity()
    for l in word.letters:
        if l == j:
            terms.append((prefix, 1))
        elif l == -j:
            terms.append((prefix * Word((-j,)), -1))
        prefix = prefix * Word((l,))
    return Chain1(terms)


def bar_boundary(chain2):
    """Boundary of sum c (a | b): each term contributes b - ab + a."""
    out = Chain1()
    for (a, b), c in chain2.terms.items():
        out = out + Chain1([(b, c), (a * b, -c), (a, c)])
    return out


def fundamental_class(genus):
    """Bar 2-chain whose boundary is 1 - R, built from Fox derivatives.

    For the surface relator each d(R)/d(x_j) has exactly two terms with
    coefficients +1 and -1; the pairs (word | x_j) with those signs assemble
    the fundamental class.
    """
    R = surface_relator(genus)
    terms = []
    for j in range(1, 2 * genus + 1):
        d = fox_derivative(R, j)
        if sorted(d.terms.values()) != [-1, 1]:
            raise ValueError("relator derivative is not a difference of words")
        for w, c in d.terms.items():
            terms.append(((w, Word.generator(j)), c))
    return Chain2(terms)


def augmentation(chain):
    return sum(chain.terms.values())


def random_word(num_generators, length, seed):
    rng = lc.as_rng(seed)
    letters = []
    while len(letters) < length:
        j = int(rng.integers(1, num_generators + 1))
        s = 1 if rng.random() < 0.5 else -1
        if letters and letters[-1] == -s * j:
            continue
        letters.append(s * j)
    return Word(tuple(letters))


# ---------------------------------------------------------------------------
# evaluation maps K^m -> K^k and their exact pushforwards

def _eval_word(word, mats):
    n = mats[0].shape[0]
    g = np.eye(n, dtype=complex)
    for l in word.letters:
        m = mats[abs(l) - 1]
        g = g @ (m if l > 0 else m.conj().T)
    return g


def _push_word(word, mats, tangents):
    """Left-trivialized differential of the evaluation of one word.

    Letter x_j contributes xi_j, letter x_j^-1 contributes -Ad(A_j) xi_j;
    each contribution is conjugated back through the suffix that follows it.
    """
    n = mats[0].shape[0]
    suffix = np.eye(n, dtype=complex)
    total = np.zeros((n, n), dtype=complex)
    for l in reversed(word.letters):
        m = mats[abs(l) - 1]
        xi = tangents[abs(l) - 1]
        d = xi if l > 0 else -lc.adjoint(m, xi)
        total += lc.adjoint(suffix.conj().T, d)
        suffix = (m if l > 0 else m.conj().T) @ suffix
    return total


@dataclass(frozen=True)
class WordMap:
    """Tuple of words (with optional central prefactors) read as a map K^m -> K^k.

    components are (central, word) pairs; central is a CentralElement or None.
    A component with the identity word and a central prefactor is a constant
    map to the center.
    """

    arity: int
    components: tuple

    @staticmethod
    def from_words(words, arity):
        comps = []
        for w in words:
            if w.max_generator() > arity:
                raise ValueError("word uses more variables than the map arity")
            comps.append((None, w))
        return WordMap(arity, tuple(comps))

    @staticmethod
    def projection(arity, indices):
        return WordMap.from_words([Word.generator(i) for i in indices], arity)

    def evaluate(self, mats):
        if len(mats) != self.arity:
            raise ValueError("wrong number of group arguments")
        out = []
        for central, w in self.components:
            g = _eval_word(w, mats)
            if central is not None:
                g = central.matrix() @ g
            out.append(g)
        return tuple(out)

    def push(self, mats, tangents):
        """Exact left-trivialized pushforward; central prefactors drop out."""
        return tuple(
            _push_word(w, mats, tangents) for _, w in self.components
        )

    def geometry(self, n):
        """The same map as a SmoothMap on SU(n) factors."""
        dom = forms.group_power(n, self.arity)
        cod = forms.group_power(n, len(self.components))

        def apply(pt):
            return forms.Point(self.evaluate(pt.parts))

        def push(pt, v):
            return forms.Tangent(self.push(pt.parts, v.parts))

        return forms.CallableMap(dom, cod, apply, push)


def evaluation_map(words, num_generators):
    """Map sending a representation (by its generator images) to word values."""
    return WordMap.from_words(list(words), num_generators)


# ---------------------------------------------------------------------------
# slant products against word chains

def slant_form(chain, form, num_generators, n):
    """Pair a word chain with a form on a group power.

    A Chain1 pairs with a form on K^1, a Chain2 with a form on K^2; the result
    lives on K^num_generators, pulled back along each term's evaluation map
    and summed with the chain coefficients.
    """
    pulled = []
    if isinstance(chain, Chain1):
        items = [((w,), c) for w, c in chain.terms.items()]
    else:
        items = [((a, b), c) for (a, b), c in chain.terms.items()]
    for words, c in items:
        m = evaluation_map(words, num_generators).geometry(n)
        pulled.append((forms.pullback(m, form), c))
    shape = forms.group_power(n, num_generators)
    if form.shape != forms.group_power(n, len(items[0][0]) if items else 1):
        raise ValueError("form shape does not match the chain's word count")

    def fn(pt, *vs):
        return sum(c * f(pt, *vs) for f, c in pulled)

    return forms.FormField(shape, form.arity, fn, name=f"slant({form.name})")


def slant_form_equivariant(chain, eform, num_generators, n):
    """Equivariant version of slant_form; conjugation acts on every factor."""
    if isinstance(chain, Chain1):
        items = [((w,), c) for w, c in chain.terms.items()]
    else:
        items = [((a, b), c) for (a, b), c in chain.terms.items()]
    shape = forms.group_power(n, num_generators)
    actions = ("conjugation",) * num_generators
    pulled = []
    for words, c in items:
        m = evaluation_map(words, num_generators).geometry(n)
        pulled.append((forms.pullback_equivariant(m, eform, actions), c))
    arities = sorted({p for f, _ in pulled for p in f.components})
    comps = {}
    for p in arities:
        def make(p):
            def fn(phi, pt, *vs):
                return sum(c * f(phi, pt, *vs) for f, c in pulled)
            return fn
        comps[p] = make(p)
    return forms.EquivariantFormField(
        shape, actions, comps, phi_degree=eform.phi_degree,
        name=f"slant({eform.name})",
    )
