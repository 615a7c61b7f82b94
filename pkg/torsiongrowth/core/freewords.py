#! /usr/bin/env python

from __future__ import annotations
from collections import defaultdict
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Optional, Sequence, Union

from typing_extensions import Self


# letters are generator indices with a sign: x = 1, X = x^-1 = -1, ...
LETTER_NAMES = {1: 'x', -1: 'X', 2: 'y', -2: 'Y'}
LETTERS = {v: k for k, v in LETTER_NAMES.items()}
GENERATORS = (1, 2)
LETTER_ORDER = (1, 2, -1, -2)  # breadth-first order x, y, X, Y

Action = Callable[[int, int], int]
Visitor = Callable[[int, int, int, int], None]


def free_reduce(letters:Iterable[int]) -> tuple[int, ...]:
    stack = list()
    for letter in letters:
        if len(stack) > 0 and stack[-1] == -letter:
            stack.pop()
        else:
            stack.append(letter)

    return tuple(stack)

def generator_index(g:Union[int, str]) -> int:
    if isinstance(g, str):
        g = LETTERS.get(g, 0)
    if g not in GENERATORS:
        raise ValueError(f"Unknown generator: {g}")

    return g


class _WordParser():
    """ Recursive descent over  word := factor* ;
        factor := (letter | '1' | '(' word ')') ('^' integer)? """

    def __init__(self, text:str) -> None:
        self.text = "".join(c for c in text if not c.isspace() and c != '*')
        self.pos = 0

    def parse(self) -> list[int]:
        letters = self.word()
        if self.pos < len(self.text):
            raise ValueError(f"Unexpected '{self.text[self.pos]}' at "
                             f"position {self.pos} in '{self.text}'")

        return letters

    def word(self) -> list[int]:
        letters = list()
        while self.pos < len(self.text) and self.text[self.pos] != ')':
            letters.extend(self.factor())

        return letters

    def factor(self) -> list[int]:
        c = self.text[self.pos]
        if c == '(':
            self.pos += 1
            inner = self.word()
            if self.pos >= len(self.text) or self.text[self.pos] != ')':
                raise ValueError(f"Unbalanced parenthesis in '{self.text}'")
            self.pos += 1
        elif c in LETTERS:
            inner = [LETTERS[c]]
            self.pos += 1
        elif c == '1':
            inner = list()
            self.pos += 1
        else:
            raise ValueError(f"Unexpected '{c}' at position {self.pos} "
                             f"in '{self.text}'")

        if self.pos < len(self.text) and self.text[self.pos] == '^':
            self.pos += 1
            start = self.pos
            if self.pos < len(self.text) and self.text[self.pos] in "+-":
                self.pos += 1
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
            try:
                n = int(self.text[start:self.pos])
            except ValueError:
                raise ValueError(f"Missing exponent in '{self.text}'")

            if n < 0:
                inner = [-letter for letter in reversed(inner)]
            inner = inner * abs(n)

        return inner


@dataclass(frozen=True)
class Word:
    """ Freely reduced element of the free group on x and y """
    letters: tuple[int, ...] = tuple()

    def __post_init__(self) -> None:
        for letter in self.letters:
            if letter not in LETTER_NAMES:
                raise ValueError(f"Unknown letter: {letter}")
        object.__setattr__(self, "letters", free_reduce(self.letters))

    @classmethod
    def parse(cls, text:str) -> Self:
        """ Read juxtaposed letters, with X and Y for inverses.

        Powers such as 'x^3' or '(xY)^-2' are expanded; '1' is the
        identity.
        """
        return cls(tuple(_WordParser(text).parse()))

    @classmethod
    def generator(cls, g:Union[int, str]) -> Self:
        return cls((generator_index(g),))

    def __mul__(self, other:Word) -> Word:
        return Word(self.letters + other.letters)

    def inverse(self) -> Word:
        return Word(tuple(-letter for letter in reversed(self.letters)))

    def __pow__(self, n:int) -> Word:
        base = self if n >= 0 else self.inverse()

        return Word(base.letters * abs(n))

    def __len__(self) -> int:
        return len(self.letters)

    def is_identity(self) -> bool:
        return len(self.letters) <= 0

    def exponent_sum(self, g:Union[int, str]) -> int:
        g = generator_index(g)

        return sum(1 if letter == g else -1 for letter in self.letters
                   if abs(letter) == g)

    def __str__(self) -> str:
        if self.is_identity():
            return "1"

        return "".join(LETTER_NAMES[letter] for letter in self.letters)


@dataclass(frozen=True)
class PowerWord:
    """ Product of powers of words, kept in compressed form.

    Adjacent factors over the same base (or its inverse) are merged, so
    that exponents such as p^a never get expanded.
    """
    factors: tuple[tuple[Word, int], ...] = tuple()

    def __post_init__(self) -> None:
        stack = list()
        for base, e in self.factors:
            base, e = (Word.parse(base) if isinstance(base, str) else base,
                       int(e))
            if base.is_identity() or e == 0:
                continue
            if len(stack) > 0 and stack[-1][0] == base:
                e += stack.pop()[1]
            elif len(stack) > 0 and stack[-1][0] == base.inverse():
                base, e = stack[-1][0], stack.pop()[1] - e
            if e != 0:
                stack.append((base, e))

        object.__setattr__(self, "factors", tuple(stack))

    @classmethod
    def from_word(cls, w:Word) -> Self:
        return cls(((w, 1),))

    @classmethod
    def power(cls, w:Word, e:int) -> Self:
        return cls(((w, e),))

    def __mul__(self, other:Union[PowerWord, Word]) -> PowerWord:
        if isinstance(other, Word):
            other = PowerWord.from_word(other)

        return PowerWord(self.factors + other.factors)

    def inverse(self) -> PowerWord:
        return PowerWord(tuple((base, -e) for base, e
                               in reversed(self.factors)))

    def is_identity(self) -> bool:
        return len(self.factors) <= 0

    def expanded_length(self) -> int:
        return sum(len(base) * abs(e) for base, e in self.factors)

    def expand(self, max_length:int = 1 << 16) -> Word:
        if self.expanded_length() > max_length:
            raise ValueError(f"Refusing to expand a word of length "
                             f"{self.expanded_length()}")

        w = Word()
        for base, e in self.factors:
            w = w * base ** e

        return w

    def to_json(self) -> list[list[Any]]:
        return [[str(base), e] for base, e in self.factors]

    @classmethod
    def from_json(cls, data:Sequence[Sequence[Any]]) -> Self:
        return cls(tuple((Word.parse(base), int(e)) for base, e in data))

    def __str__(self) -> str:
        if self.is_identity():
            return "1"

        return " ".join(str(base) if e == 1 else f"({base})^{e}"
                        for base, e in self.factors)


AnyWord = Union[Word, PowerWord]


def _factors(word:AnyWord) -> tuple[tuple[Word, int], ...]:
    return word.factors if isinstance(word, PowerWord) else ((word, 1),)

def _letter_walk(act:Action, start:int, letters:tuple[int, ...],
                 visit:Optional[Visitor], weight:int) -> int:
    c = start
    for letter in letters:
        d = act(c, letter)
        if visit is not None:
            visit(c, letter, d, weight)
        c = d

    return c

def walk(act:Action, start:int, word:AnyWord,
         visit:Optional[Visitor] = None) -> int:
    """ Follow a word through a permutation action.

    ``visit(c, letter, d, weight)`` is called for each traversed edge
    c -letter-> d. A factor b^e runs around the cycle of its start point
    under b, so each pass over b is visited once with a weight equal to
    its multiplicity rather than e times.

    :param act: action of a letter on a point
    :type act: Action
    :param start: start point
    :type start: int
    :param word: word to follow
    :type word: AnyWord
    :param visit: optional edge callback
    :type visit: Optional[Visitor]
    :rtype: int
    :returns: end point
    """
    c = start
    for base, e in _factors(word):
        b = base if e > 0 else base.inverse()
        e = abs(e)

        cycle = [c]
        d = _letter_walk(act, c, b.letters, None, 0)
        while d != c:
            cycle.append(d)
            d = _letter_walk(act, d, b.letters, None, 0)

        q, r = divmod(e, len(cycle))
        if visit is not None:
            for k, h in enumerate(cycle):
                weight = q + (1 if k < r else 0)
                if weight > 0:
                    _letter_walk(act, h, b.letters, visit, weight)

        c = cycle[r]

    return c


class PermutationHomomorphism():
    """ Homomorphism from F onto a finite group G acting regularly.

    G is given by the permutations of x and y on |G| points. Point 0 is
    the identity and point c stands for the element mapping 0 to c, so
    that elements and points are the same integers.
    """

    def __init__(self, x_perm:Sequence[int], y_perm:Sequence[int]) -> None:
        n = len(x_perm)
        if len(y_perm) != n or sorted(x_perm) != list(range(n)) \
                or sorted(y_perm) != list(range(n)):
            raise ValueError("Generator images are not permutations of "
                             "the same set")

        x_inv, y_inv = [0] * n, [0] * n
        for c in range(n):
            x_inv[x_perm[c]] = c
            y_inv[y_perm[c]] = c
        self.perms = {1: tuple(x_perm), -1: tuple(x_inv),
                      2: tuple(y_perm), -2: tuple(y_inv)}

        elements = {0: tuple(range(n))}
        words = {0: Word()}
        queue = [0]
        for a in queue:
            for letter in LETTER_ORDER:
                image = self.perms[letter]
                perm = tuple(image[elements[a][c]] for c in range(n))
                b = perm[0]
                if b not in elements:
                    elements[b] = perm
                    words[b] = words[a] * Word((letter,))
                    queue.append(b)
                elif elements[b] != perm:
                    raise ValueError("Action is not regular")

        if len(elements) != n:
            raise ValueError("Action is not regular")

        self.element_perms = tuple(elements[a] for a in range(n))
        self.words = tuple(words[a] for a in range(n))
        self._inverses = tuple(next(b for b in range(n)
                                    if self.element_perms[b][a] == 0)
                               for a in range(n))

    @property
    def order(self) -> int:
        return len(self.element_perms)

    def act(self, c:int, letter:int) -> int:
        return self.perms[letter][c]

    def image(self, word:AnyWord) -> int:
        return walk(self.act, 0, word)

    def in_kernel(self, word:AnyWord) -> bool:
        return self.image(word) == 0

    def mul(self, a:int, b:int) -> int:
        return self.element_perms[b][a]

    def inverse(self, a:int) -> int:
        return self._inverses[a]

    def element_order(self, a:int) -> int:
        k, h = 1, a
        while h != 0:
            h = self.mul(h, a)
            k += 1

        return k


@dataclass(frozen=True)
class GroupRingElement:
    """ Element of ZG as sorted (element, coefficient) pairs """
    terms: tuple[tuple[int, int], ...] = tuple()

    def __post_init__(self) -> None:
        acc = defaultdict(int)
        for g, k in self.terms:
            acc[int(g)] += int(k)
        object.__setattr__(self, "terms", tuple(sorted((g, k) for g, k
                                                       in acc.items()
                                                       if k != 0)))

    @classmethod
    def from_dict(cls, coeffs:dict[int, int]) -> Self:
        return cls(tuple(coeffs.items()))

    @classmethod
    def from_vector(cls, vec:Sequence[int]) -> Self:
        return cls(tuple(enumerate(vec)))

    @classmethod
    def unit(cls, g:int = 0) -> Self:
        return cls(((g, 1),))

    def coefficient(self, g:int) -> int:
        return dict(self.terms).get(g, 0)

    def __add__(self, other:GroupRingElement) -> GroupRingElement:
        return GroupRingElement(self.terms + other.terms)

    def __neg__(self) -> GroupRingElement:
        return GroupRingElement(tuple((g, -k) for g, k in self.terms))

    def __sub__(self, other:GroupRingElement) -> GroupRingElement:
        return self + (-other)

    def scale(self, k:int) -> GroupRingElement:
        return GroupRingElement(tuple((g, k * c) for g, c in self.terms))

    def augmentation(self) -> int:
        return sum(k for _, k in self.terms)

    def is_zero(self) -> bool:
        return len(self.terms) <= 0

    def multiply(self, other:GroupRingElement,
                 hom:PermutationHomomorphism) -> GroupRingElement:
        return GroupRingElement(tuple((hom.mul(g, h), a * b)
                                      for g, a in self.terms
                                      for h, b in other.terms))

    def to_vector(self, n:int) -> list[int]:
        vec = [0] * n
        for g, k in self.terms:
            vec[g] = k

        return vec

    def __str__(self) -> str:
        if self.is_zero():
            return "0"

        return " + ".join(f"{k}*g{g}" for g, k in self.terms)


def fox_derivative(w:AnyWord, g:Union[int, str],
                   hom:PermutationHomomorphism) -> GroupRingElement:
    """ Free differential of w with respect to a generator, pushed into
        ZG through ``hom``.

    Follows the rules d(g)/dg = 1, d(g^-1)/dg = -g^-1 and
    d(uv)/dg = du/dg + u·dv/dg; powers use
    d(w^n)/dg = (1 + w + ... + w^(n-1))·dw/dg.

    :param w: word in x and y
    :type w: AnyWord
    :param g: generator, 1/'x' or 2/'y'
    :type g: Union[int, str]
    :param hom: homomorphism onto a finite group
    :type hom: PermutationHomomorphism
    :rtype: GroupRingElement
    """
    g = generator_index(g)
    coeffs = defaultdict(int)

    def visit(c:int, letter:int, d:int, weight:int) -> None:
        if letter == g:
            coeffs[c] += weight
        elif letter == -g:
            coeffs[d] -= weight

    walk(hom.act, 0, w, visit)

    return GroupRingElement.from_dict(coeffs)

def magnus_vector(w:AnyWord, hom:PermutationHomomorphism) -> tuple[int, ...]:
    """ Both Fox derivatives of a kernel element as one vector of length
        2|G|: x-derivative in slots 0..|G|-1, y-derivative after it.

    :rtype: tuple[int, ...]
    """
    n = hom.order
    vec = [0] * (2 * n)

    def visit(c:int, letter:int, d:int, weight:int) -> None:
        if letter > 0:
            vec[(letter - 1) * n + c] += weight
        else:
            vec[(-letter - 1) * n + d] -= weight

    if walk(hom.act, 0, w, visit) != 0:
        raise ValueError(f"Word {w} is not in the kernel of the action")

    return tuple(vec)

def magnus_image(w:AnyWord, hom:PermutationHomomorphism
                 ) -> tuple[GroupRingElement, GroupRingElement]:
    """ Image of a kernel element in (ZG)^2

    :rtype: tuple[GroupRingElement, GroupRingElement]
    """
    vec = magnus_vector(w, hom)
    n = hom.order

    return (GroupRingElement.from_vector(vec[:n]),
            GroupRingElement.from_vector(vec[n:]))
