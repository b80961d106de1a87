"""The Porter suffix-stripping stemmer.

Follows the reference ANSI C release of the algorithm, including its two
well-known departures from the 1980 description ("bli" -> "ble" in place of
"abli" -> "able", and the extra "logi" -> "log" rule in step 2).
"""

from __future__ import annotations

from functools import lru_cache

_VOWELS = frozenset("aeiou")


class _Stem:
    """Mutable working state: the live word is ``b[:k + 1]``."""

    __slots__ = ("b", "k", "j")

    def __init__(self, word: str):
        self.b = list(word)
        self.k = len(word) - 1
        self.j = 0

    def cons(self, i: int) -> bool:
        ch = self.b[i]
        if ch in _VOWELS:
            return False
        if ch == "y":
            return i == 0 or not self.cons(i - 1)
        return True

    def m(self) -> int:
        """Number of vowel-consonant sequences in ``b[:j + 1]``."""
        n = 0
        i = 0
        j = self.j
        while True:
            if i > j:
                return n
            if not self.cons(i):
                break
            i += 1
        i += 1
        while True:
            while True:
                if i > j:
                    return n
                if self.cons(i):
                    break
                i += 1
            i += 1
            n += 1
            while True:
                if i > j:
                    return n
                if not self.cons(i):
                    break
                i += 1
            i += 1

    def vowel_in_stem(self) -> bool:
        return any(not self.cons(i) for i in range(self.j + 1))

    def double_cons(self, j: int) -> bool:
        return j >= 1 and self.b[j] == self.b[j - 1] and self.cons(j)

    def cvc(self, i: int) -> bool:
        if i < 2 or not self.cons(i) or self.cons(i - 1) or not self.cons(i - 2):
            return False
        return self.b[i] not in "wxy"

    def ends(self, s: str) -> bool:
        length = len(s)
        if length > self.k + 1 or s[-1] != self.b[self.k]:
            return False
        if "".join(self.b[self.k - length + 1 : self.k + 1]) != s:
            return False
        self.j = self.k - length
        return True

    def set_to(self, s: str) -> None:
        self.b[self.j + 1 :] = list(s)
        self.k = self.j + len(s)

    def replace_if_measured(self, s: str) -> None:
        if self.m() > 0:
            self.set_to(s)

    def word(self) -> str:
        return "".join(self.b[: self.k + 1])


def _step1ab(z: _Stem) -> None:
    b = z.b
    if b[z.k] == "s":
        if z.ends("sses"):
            z.k -= 2
        elif z.ends("ies"):
            z.set_to("i")
        elif b[z.k - 1] != "s":
            z.k -= 1
    if z.ends("eed"):
        if z.m() > 0:
            z.k -= 1
    elif (z.ends("ed") or z.ends("ing")) and z.vowel_in_stem():
        z.k = z.j
        del b[z.k + 1 :]
        if z.ends("at"):
            z.set_to("ate")
        elif z.ends("bl"):
            z.set_to("ble")
        elif z.ends("iz"):
            z.set_to("ize")
        elif z.double_cons(z.k):
            z.k -= 1
            if b[z.k] in "lsz":
                z.k += 1
        elif z.m() == 1 and z.cvc(z.k):
            z.set_to("e")


def _step1c(z: _Stem) -> None:
    if z.ends("y") and z.vowel_in_stem():
        z.b[z.k] = "i"


# Step 2 and 3 rules, keyed by the letter that selects the rule group.
_STEP2 = {
    "a": (("ational", "ate"), ("tional", "tion")),
    "c": (("enci", "ence"), ("anci", "ance")),
    "e": (("izer", "ize"),),
    "l": (("bli", "ble"), ("alli", "al"), ("entli", "ent"), ("eli", "e"), ("ousli", "ous")),
    "o": (("ization", "ize"), ("ation", "ate"), ("ator", "ate")),
    "s": (("alism", "al"), ("iveness", "ive"), ("fulness", "ful"), ("ousness", "ous")),
    "t": (("aliti", "al"), ("iviti", "ive"), ("biliti", "ble")),
    "g": (("logi", "log"),),
}

_STEP3 = {
    "e": (("icate", "ic"), ("ative", ""), ("alize", "al")),
    "i": (("iciti", "ic"),),
    "l": (("ical", "ic"), ("ful", "")),
    "s": (("ness", ""),),
}

_STEP4 = {
    "a": ("al",),
    "c": ("ance", "ence"),
    "e": ("er",),
    "i": ("ic",),
    "l": ("able", "ible"),
    "n": ("ant", "ement", "ment", "ent"),
    "o": ("ion", "ou"),
    "s": ("ism",),
    "t": ("ate", "iti"),
    "u": ("ous",),
    "v": ("ive",),
    "z": ("ize",),
}


def _apply_rules(z: _Stem, rules) -> None:
    # The first suffix that matches ends the step, even when the measure
    # condition blocks the replacement.
    for suffix, repl in rules:
        if z.ends(suffix):
            z.replace_if_measured(repl)
            return


def _step2(z: _Stem) -> None:
    if z.k < 1:
        return
    _apply_rules(z, _STEP2.get(z.b[z.k - 1], ()))


def _step3(z: _Stem) -> None:
    _apply_rules(z, _STEP3.get(z.b[z.k], ()))


def _step4(z: _Stem) -> None:
    if z.k < 1:
        return
    for suffix in _STEP4.get(z.b[z.k - 1], ()):
        if z.ends(suffix):
            if suffix == "ion" and not (z.j >= 0 and z.b[z.j] in "st"):
                continue
            break
    else:
        return
    if z.m() > 1:
        z.k = z.j


def _step5(z: _Stem) -> None:
    z.j = z.k
    if z.b[z.k] == "e":
        a = z.m()
        if a > 1 or (a == 1 and not z.cvc(z.k - 1)):
            z.k -= 1
    if z.b[z.k] == "l" and z.double_cons(z.k) and z.m() > 1:
        z.k -= 1


@lru_cache(maxsize=65536)
def porter_stem(token: str) -> str:
    """Return the Porter stem of a lowercase token.

    >>> porter_stem("caresses"), porter_stem("running"), porter_stem("cat")
    ('caress', 'run', 'cat')
    """
    if len(token) <= 2:
        return token
    z = _Stem(token)
    _step1ab(z)
    if z.k > 0:
        _step1c(z)
        _step2(z)
        _step3(z)
        _step4(z)
        _step5(z)
    return z.word()
