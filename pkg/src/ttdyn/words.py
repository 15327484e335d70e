"""Reduced words, conjugacy classes and basis automorphisms of a free group.

Words are plain ``str`` objects over the letters ``a..z``; an uppercase letter
is the inverse of its lowercase partner (``A = a^-1``).  The generators of
``F_n`` are the first ``n`` lowercase letters.  All functions are pure.
"""

from __future__ import annotations

import json
import re
import string
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import InvalidLetter, NotSurjective, RankMismatch

MAX_RANK = 26
GENERATORS = string.ascii_lowercase

_INV = {c: c.swapcase() for c in string.ascii_letters}
_PAIR = re.compile("|".join(f"{c}{c.upper()}|{c.upper()}{c}" for c in GENERATORS))

# global letter order a < A < b < B < ...
_ORDER_KEY = str.maketrans(
    {c: chr(2 * i + (1 if c.isupper() else 0) + 32)
     for i, x in enumerate(GENERATORS) for c in (x, x.upper())})


# -- letters -----------------------------------------------------------------

def letter(index: int, sign: int = 1) -> str:
    """The letter for generator ``index`` (1-based) raised to ``sign``."""
    if not 1 <= index <= MAX_RANK or sign not in (1, -1):
        raise InvalidLetter(f"bad letter ({index}, {sign})")
    c = GENERATORS[index - 1]
    return c if sign == 1 else c.upper()


def letter_index(c: str) -> int:
    return ord(c.lower()) - ord("a") + 1


def letter_sign(c: str) -> int:
    return -1 if c.isupper() else 1


def alphabet(rank: int) -> str:
    """The symmetric alphabet of ``F_rank`` in the global order a, A, b, B, ..."""
    return "".join(c + c.upper() for c in GENERATORS[:rank])


def check_word(w: str, rank: int | None = None) -> None:
    for c in w:
        if c not in _INV:
            raise InvalidLetter(f"invalid letter {c!r} in {w!r}")
        if rank is not None and letter_index(c) > rank:
            raise InvalidLetter(f"letter {c!r} outside rank {rank}")


def word_rank(w: str) -> int:
    return max((letter_index(c) for c in w), default=0)


# -- reduction ---------------------------------------------------------------

def inverse(w: str) -> str:
    return w[::-1].swapcase()


def is_reduced(w: str) -> bool:
    return _PAIR.search(w) is None


def reduce(w: str | Iterable[str], rank: int | None = None) -> str:
    """Freely reduce ``w``; returns the unique reduced word equal to it in F."""
    if not isinstance(w, str):
        w = "".join(w)
    if rank is not None:
        check_word(w, rank)
    # vectorised passes that delete inverse pairs are cheap when cancellation
    # is shallow, which is the common case for images of long reduced words
    if len(w) >= _LONG:
        w, done = _reduce_long(w)
        if done:
            return w
    return _reduce_stack(w)


_LONG = 64


def _reduce_long(w: str, passes: int = 8) -> tuple[str, bool]:
    # a letter and its inverse differ exactly in the ASCII case bit
    a = np.frombuffer(w.encode("ascii"), dtype=np.uint8)
    for _ in range(passes):
        if len(a) < 2:
            return a.tobytes().decode("ascii"), True
        idx = np.flatnonzero((a[:-1] ^ a[1:]) == 32)
        if not len(idx):
            return a.tobytes().decode("ascii"), True
        # in a run of overlapping pairs (xXxX...) delete every other one
        k = np.arange(len(idx))
        first = np.concatenate(([True], np.diff(idx) != 1))
        start = np.maximum.accumulate(np.where(first, k, 0))
        sel = idx[(k - start) % 2 == 0]
        keep = np.ones(len(a), dtype=bool)
        keep[sel] = False
        keep[sel + 1] = False
        a = a[keep]
    return a.tobytes().decode("ascii"), False


def _reduce_stack(w: str) -> str:
    out: list[str] = []
    for c in w:
        if out and out[-1] == _INV[c]:
            out.pop()
        else:
            out.append(c)
    return "".join(out)


def multiply(u: str, v: str) -> str:
    """Reduced product of two reduced words; only the seam is scanned."""
    n = min(len(u), len(v))
    t = 0
    while t < n and u[-1 - t] == _INV[v[t]]:
        t += 1
    if t == 0:
        return u + v
    return u[: len(u) - t] + v[t:]


def product_of(words: Iterable[str]) -> str:
    out = ""
    for w in words:
        out = multiply(out, w)
    return out


def power(w: str, k: int) -> str:
    if k < 0:
        return power(inverse(w), -k)
    out = ""
    for _ in range(k):
        out = multiply(out, w)
    return out


def conjugate(w: str, x: str) -> str:
    """``x w x^-1``."""
    return multiply(multiply(x, w), inverse(x))


def cyclic_reduce(w: str) -> tuple[str, str]:
    """Split reduced ``w`` as ``conj . core . conj^-1`` with ``core`` cyclically reduced."""
    i, j = 0, len(w) - 1
    while i < j and w[i] == _INV[w[j]]:
        i += 1
        j -= 1
    return w[i:j + 1], w[:i]


def is_cyclically_reduced(w: str) -> bool:
    return is_reduced(w) and (len(w) < 2 or w[0] != _INV[w[-1]])


def cyclic_core(w: str) -> str:
    return cyclic_reduce(reduce(w))[0]


# -- conjugacy classes ---------------------------------------------------------

def order_key(w: str) -> str:
    """Sort key realising the letter order a < A < b < B < ..."""
    return w.translate(_ORDER_KEY)


def shortlex_key(w: str) -> tuple[int, str]:
    return len(w), order_key(w)


def _least_rotation(s: str) -> int:
    # Booth's algorithm
    t = s + s
    f = [-1] * len(t)
    k = 0
    for j in range(1, len(t)):
        c = t[j]
        i = f[j - k - 1]
        while i != -1 and c != t[k + i + 1]:
            if c < t[k + i + 1]:
                k = j - i - 1
            i = f[i]
        if c != t[k + i + 1]:
            if c < t[k]:
                k = j
            f[j - k] = -1
        else:
            f[j - k] = i + 1
    return k


def least_rotation(w: str) -> str:
    if not w:
        return w
    k = _least_rotation(order_key(w))
    return w[k:] + w[:k]


def canonical(w: str) -> str:
    """Canonical representative of the conjugacy class of ``w``.

    The least cyclic rotation, in the global letter order, of the cyclic core
    of ``w`` and of its inverse.
    """
    core = cyclic_core(w)
    if not core:
        return ""
    r1 = least_rotation(core)
    r2 = least_rotation(inverse(core))
    return r1 if order_key(r1) <= order_key(r2) else r2


def cyclic_rotations(w: str) -> list[str]:
    return [w[i:] + w[:i] for i in range(len(w))] or [w]


@dataclass(frozen=True, order=True)
class ConjugacyClass:
    """A conjugacy class held by its canonical representative."""

    rep: str

    @classmethod
    def of(cls, w: str) -> "ConjugacyClass":
        return cls(canonical(reduce(w)))

    def __post_init__(self):
        if canonical(self.rep) != self.rep:
            raise ValueError(f"{self.rep!r} is not a canonical class representative")

    def __len__(self):
        return len(self.rep)

    def __str__(self):
        return f"[{self.rep}]"

    @property
    def trivial(self) -> bool:
        return not self.rep


# -- enumeration ----------------------------------------------------------------

def reduced_words(length: int, rank: int) -> Iterator[str]:
    """All reduced words of exactly ``length`` letters, in shortlex order."""
    letters = alphabet(rank)
    if length == 0:
        yield ""
        return

    def rec(prefix: str, k: int):
        if k == 0:
            yield prefix
            return
        last = prefix[-1] if prefix else None
        for c in letters:
            if last is not None and c == _INV[last]:
                continue
            yield from rec(prefix + c, k - 1)

    yield from rec("", length)


def words_up_to(maxlen: int, rank: int, include_empty: bool = False) -> Iterator[str]:
    for n in range(0 if include_empty else 1, maxlen + 1):
        yield from reduced_words(n, rank)


def conjugacy_classes(maxlen: int, rank: int) -> list[str]:
    """Canonical reps of all nontrivial conjugacy classes with cyclic length <= maxlen."""
    out = []
    for n in range(1, maxlen + 1):
        for w in reduced_words(n, rank):
            if is_cyclically_reduced(w) and canonical(w) == w:
                out.append(w)
    return out


def raw_sequences(length: int, rank: int) -> Iterator[str]:
    """All (not necessarily reduced) letter sequences of a given length."""
    for t in product(alphabet(rank), repeat=length):
        yield "".join(t)


# -- automorphisms ---------------------------------------------------------------

@dataclass(frozen=True)
class BasisAutomorphism:
    """An endomorphism of ``F_rank`` given by the images of the generators."""

    rank: int
    images: tuple[str, ...]

    def __post_init__(self):
        if not 1 <= self.rank <= MAX_RANK:
            raise RankMismatch(f"unsupported rank {self.rank}")
        images = tuple(reduce(w) for w in self.images)
        if len(images) != self.rank:
            raise RankMismatch(f"{len(images)} images for rank {self.rank}")
        for w in images:
            check_word(w, self.rank)
        object.__setattr__(self, "images", images)

    # construction ---------------------------------------------------------
    @classmethod
    def identity(cls, rank: int) -> "BasisAutomorphism":
        return cls(rank, tuple(GENERATORS[:rank]))

    @classmethod
    def from_mapping(cls, mapping: dict[str, str], rank: int | None = None):
        rank = rank or max(letter_index(k) for k in mapping)
        return cls(rank, tuple(mapping.get(GENERATORS[i], GENERATORS[i]) for i in range(rank)))

    @classmethod
    def inner(cls, rank: int, x: str) -> "BasisAutomorphism":
        """The inner automorphism ``w -> x w x^-1``."""
        return cls(rank, tuple(conjugate(g, x) for g in GENERATORS[:rank]))

    @classmethod
    def from_json(cls, data) -> "BasisAutomorphism":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(int(data["rank"]), tuple(data["images"]))

    def to_json(self) -> dict:
        return {"rank": self.rank, "images": list(self.images)}

    # action ------------------------------------------------------------------
    @property
    def table(self) -> dict:
        t = getattr(self, "_table", None)
        if t is None:
            m = {}
            for i, w in enumerate(self.images):
                m[GENERATORS[i]] = w
                m[GENERATORS[i].upper()] = inverse(w)
            t = str.maketrans(m)
            object.__setattr__(self, "_table", t)
        return t

    def image(self, c: str) -> str:
        w = self.images[letter_index(c) - 1]
        return w if c.islower() else inverse(w)

    def apply(self, w: str) -> str:
        if word_rank(w) > self.rank:
            raise RankMismatch(f"word {w!r} is not in F_{self.rank}")
        return reduce(w.translate(self.table))

    __call__ = apply

    def compose(self, other: "BasisAutomorphism") -> "BasisAutomorphism":
        """``self o other``: first ``other``, then ``self``."""
        if self.rank != other.rank:
            raise RankMismatch("ranks differ")
        return BasisAutomorphism(self.rank, tuple(self.apply(w) for w in other.images))

    def __matmul__(self, other):
        return self.compose(other)

    def power(self, k: int) -> "BasisAutomorphism":
        base = self if k >= 0 else invert(self)
        out = BasisAutomorphism.identity(self.rank)
        for _ in range(abs(k)):
            out = base.compose(out)
        return out

    def is_identity(self) -> bool:
        return self.images == tuple(GENERATORS[: self.rank])

    def __str__(self):
        return ", ".join(f"{GENERATORS[i]}->{w or '1'}" for i, w in enumerate(self.images))


def apply(aut: BasisAutomorphism, w: str) -> str:
    return aut.apply(w)


def compose(g: BasisAutomorphism, h: BasisAutomorphism) -> BasisAutomorphism:
    return g.compose(h)


def _fold_with_tags(words: Sequence[str]):
    """Fold the petal graph of ``words`` keeping formal tags on edges.

    Petal ``i`` carries the formal generator ``i`` on its first edge.  A closed
    path at the basepoint reading ``x`` has a tag spelling ``x`` as a word in the
    formal generators.  Returns the folded edge list ``[u, label, v, tag]``.
    """
    edges: list[list] = []
    nv = 1
    for i, w in enumerate(words):
        prev = 0
        for k, c in enumerate(w):
            nxt = 0 if k == len(w) - 1 else nv
            if nxt:
                nv += 1
            tag = GENERATORS[i] if k == 0 else ""
            if c.islower():
                edges.append([prev, c, nxt, tag])
            else:
                edges.append([nxt, c.lower(), prev, inverse(tag)])
            prev = nxt

    def directions(x):
        for e in edges:
            if e[0] == x:
                yield e, e[1], e[2], e[3]
            if e[2] == x:
                yield e, e[1].upper(), e[0], inverse(e[3])

    changed = True
    while changed:
        changed = False
        for x in sorted({e[0] for e in edges} | {e[2] for e in edges}):
            seen = {}
            for d in directions(x):
                e, lab, w, tag = d
                if lab not in seen:
                    seen[lab] = d
                    continue
                e1, _, w1, t1 = seen[lab]
                e2, w2, t2 = e, w, tag
                if e1 is e2:
                    continue
                if w1 != w2:
                    if w2 == 0:
                        e1, w1, t1, e2, w2, t2 = e2, w2, t2, e1, w1, t1
                    c = multiply(inverse(t1), t2)
                    ci = inverse(c)
                    for f in edges:
                        if f[0] == w2 and f[2] == w2:
                            f[3] = product_of([c, f[3], ci])
                        elif f[0] == w2:
                            f[3] = multiply(c, f[3])
                        elif f[2] == w2:
                            f[3] = multiply(f[3], ci)
                    for f in edges:
                        if f[0] == w2:
                            f[0] = w1
                        if f[2] == w2:
                            f[2] = w1
                edges.remove(e2)
                changed = True
                break
            if changed:
                break
    return edges


def is_surjective(aut: BasisAutomorphism) -> bool:
    edges = _fold_with_tags(aut.images)
    verts = {e[0] for e in edges} | {e[2] for e in edges}
    return verts == {0} and len(edges) == aut.rank


def invert(aut: BasisAutomorphism) -> BasisAutomorphism:
    """Inverse automorphism; raises ``NotSurjective`` if the images do not generate F.

    Surjectivity is decided by folding the petal graph of the images down to
    the rank-n rose (Hopf property gives injectivity for free).
    """
    edges = _fold_with_tags(aut.images)
    verts = {e[0] for e in edges} | {e[2] for e in edges}
    if verts != {0} or len(edges) != aut.rank:
        raise NotSurjective(f"images of {aut} do not generate F_{aut.rank}")
    tags = {e[1]: reduce(e[3]) for e in edges}
    return BasisAutomorphism(aut.rank, tuple(tags[g] for g in GENERATORS[: aut.rank]))
