"""Exact words in the group generated by a_1..a_m and a displacing element h.

Conjugates ``h^k a_i h^-k`` at distinct labels k commute (their supports are
disjoint), so every element has the normal form

    (prod_k  h^k w_k h^-k) . h^e

with each ``w_k`` a freely reduced word in the a_i.  Letters are stored as
signed integers: ``+i`` is a_i, ``-i`` its inverse.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping

Word = tuple[int, ...]


def reduce_word(letters: Iterable[int]) -> Word:
    stack: list[int] = []
    for a in letters:
        if stack and stack[-1] == -a:
            stack.pop()
        else:
            stack.append(a)
    return tuple(stack)


def invert_letters(w: Word) -> Word:
    return tuple(-a for a in reversed(w))


@dataclass(frozen=True)
class GroupWord:
    h_exponent: int = 0
    parts: tuple[tuple[int, Word], ...] = ()  # sorted (label, reduced word), no empties

    @classmethod
    def make(cls, components: Mapping[int, Iterable[int]], h_exponent: int = 0) -> GroupWord:
        parts = []
        for k in sorted(components):
            w = reduce_word(components[k])
            if w:
                parts.append((k, w))
        return cls(h_exponent, tuple(parts))

    @property
    def components(self) -> dict[int, Word]:
        return dict(self.parts)

    @property
    def labels(self) -> list[int]:
        return [k for k, _ in self.parts]

    def is_identity(self) -> bool:
        return self.h_exponent == 0 and not self.parts

    def __mul__(self, other: GroupWord) -> GroupWord:
        return multiply(self, other)

    def __str__(self) -> str:
        return format_group_word(self)


IDENTITY = GroupWord()
H = GroupWord(1)


def gen(i: int, label: int = 0, power: int = 1) -> GroupWord:
    """``h^label a_i^power h^-label``."""
    if i == 0:
        raise ValueError("generator indices start at 1")
    return GroupWord.make({label: (i if power > 0 else -i,) * abs(power)})


def h_power(k: int) -> GroupWord:
    return GroupWord(k)


# ---------------------------------------------------------------- trace


@dataclass
class ProofTrace:
    """Rewrite log: (rule, before, after) triples, one per line when serialized."""

    steps: list[tuple[str, str, str]] = field(default_factory=list)

    def add(self, rule: str, before: str, after: str) -> None:
        self.steps.append((rule, before, after))

    def __len__(self) -> int:
        return len(self.steps)

    def dumps(self) -> str:
        return "".join(f"{r}\t{b}\t{a}\n" for r, b, a in self.steps)

    @classmethod
    def loads(cls, text: str) -> ProofTrace:
        steps = []
        for line in text.splitlines():
            if line:
                r, b, a = line.split("\t")
                steps.append((r, b, a))
        return cls(steps)

    def labels(self) -> set[int]:
        out = set()
        for rule, _, _ in self.steps:
            m = re.match(r"(?:append|cancel)@(-?\d+)", rule)
            if m:
                out.add(int(m.group(1)))
        return out


def format_letters(w: Iterable[int]) -> str:
    s = " ".join(f"a{abs(a)}" + ("^-1" if a < 0 else "") for a in w)
    return s or "e"


def parse_letters(text: str) -> Word:
    if text.strip() == "e":
        return ()
    out = []
    for tok in text.split():
        m = re.fullmatch(r"a(\d+)(\^-1)?", tok)
        if m is None:
            raise ValueError(f"bad letter {tok!r}")
        i = int(m.group(1))
        out.append(-i if m.group(2) else i)
    return tuple(out)


def format_group_word(u: GroupWord) -> str:
    if u.is_identity():
        return "e"
    parts = [f"[{k}| {format_letters(w)}]" for k, w in u.parts]
    return " ".join(parts + [f"h^{u.h_exponent}"])


# ---------------------------------------------------------------- group law


def multiply(u: GroupWord, v: GroupWord, trace: ProofTrace | None = None) -> GroupWord:
    """Normal form of u.v: v's labels shift by u's h-exponent, then per-label free reduction."""
    comps = {k: list(w) for k, w in u.parts}
    for k, w in v.parts:
        label = k + u.h_exponent
        stack = comps.setdefault(label, [])
        if trace is not None:
            before = format_letters(stack)
            trace.add(f"append@{label}", before, format_letters(stack + list(w)))
        for a in w:
            if stack and stack[-1] == -a:
                if trace is not None:
                    trace.add(f"cancel@{label}:{len(stack) - 1}", format_letters((stack[-1], a)), "e")
                stack.pop()
            else:
                stack.append(a)
    e = u.h_exponent + v.h_exponent
    if trace is not None and v.h_exponent:
        trace.add("h", f"h^{u.h_exponent}", f"h^{e}")
    return GroupWord(e, tuple((k, tuple(w)) for k, w in sorted(comps.items()) if w))


def product(factors: Iterable[GroupWord], trace: ProofTrace | None = None) -> GroupWord:
    acc = IDENTITY
    for f in factors:
        if trace is not None:
            trace.add("factor", str(acc), str(f))
        acc = multiply(acc, f, trace)
    return acc


def invert(u: GroupWord) -> GroupWord:
    e = u.h_exponent
    return GroupWord(-e, tuple((k - e, invert_letters(w)) for k, w in u.parts))


def conjugate_by_h_power(u: GroupWord, k: int) -> GroupWord:
    """h^k u h^-k."""
    return GroupWord(u.h_exponent, tuple((lab + k, w) for lab, w in u.parts))


def conjugate(u: GroupWord, by: GroupWord) -> GroupWord:
    """by u by^-1."""
    return multiply(multiply(by, u), invert(by))


def commutator(u: GroupWord, v: GroupWord) -> GroupWord:
    """[u, v] = u v u^-1 v^-1."""
    return product([u, v, invert(u), invert(v)])


# ---------------------------------------------------------------- the construction


def prefix(i: int) -> GroupWord:
    """c_i = a_1 a_2 ... a_i at label 0."""
    return GroupWord.make({0: range(1, i + 1)})


def target(m: int) -> GroupWord:
    """f = a_1 ... a_m."""
    return prefix(m)


def build_g(m: int) -> GroupWord:
    """g = prod_i h^(i-m-1) c_i^-1 h^-(i-m-1), one prefix inverse per label -m..-1."""
    if m < 1:
        raise ValueError("m must be at least 1")
    return product(conjugate_by_h_power(invert(prefix(i)), i - m - 1) for i in range(1, m + 1))


def build_b(m: int) -> GroupWord:
    """b = prod_i h^(i-m-1) a_i h^-(i-m-1): the glued element."""
    if m < 1:
        raise ValueError("m must be at least 1")
    return product(gen(i, i - m - 1) for i in range(1, m + 1))


def verify_identity(m: int) -> tuple[bool, ProofTrace]:
    """Check f = [g, h] . b in normal form, logging every rewrite."""
    g, b = build_g(m), build_b(m)
    trace = ProofTrace()
    lhs = product([g, H, invert(g), invert(H), b], trace)
    ok = lhs == target(m) and trace.labels() <= set(range(-m, 1))
    return ok, trace


def verify_commutator_split(m: int) -> bool:
    """[g, h] equals (g h g^-1) . h^-1: a conjugate of h followed by h^-1."""
    g = build_g(m)
    first = conjugate(H, g)
    return first.h_exponent == 1 and commutator(g, H) == multiply(first, invert(H))


def replay(trace: ProofTrace) -> GroupWord:
    """Re-execute a trace from the identity, checking each logged rewrite.

    Raises ValueError at the first step that does not follow from the state.
    """
    comps: dict[int, list[int]] = {}
    e = 0
    for rule, before, after in trace.steps:
        if rule == "factor":
            continue
        if rule == "h":
            if before != f"h^{e}":
                raise ValueError(f"h step expected h^{e}, got {before}")
            e = int(after[2:])
            continue
        kind, _, where = rule.partition("@")
        if kind == "append":
            label = int(where)
            cur = comps.setdefault(label, [])
            if format_letters(cur) != before:
                raise ValueError(f"append at {label}: state {format_letters(cur)} != {before}")
            new = list(parse_letters(after))
            if new[: len(cur)] != cur:
                raise ValueError(f"append at {label} does not extend the current word")
            comps[label] = new
        elif kind == "cancel":
            lab, pos = (int(s) for s in where.split(":"))
            cur = comps[lab]
            pair = parse_letters(before)
            if tuple(cur[pos : pos + 2]) != pair or pair[0] != -pair[1]:
                raise ValueError(f"invalid cancellation {before} at label {lab}, position {pos}")
            del cur[pos : pos + 2]
        else:
            raise ValueError(f"unknown rule {rule!r}")
    return GroupWord.make(comps, e)


def cancellation_summary(m: int) -> dict[int, str]:
    """Per-label content of [g, h] . b before reduction, for display."""
    g, b = build_g(m), build_b(m)
    raw: dict[int, list[int]] = {}
    e = 0
    for f in [g, H, invert(g), invert(H), b]:
        for k, w in f.parts:
            raw.setdefault(k + e, []).extend(w)
        e += f.h_exponent
    return {k: f"{format_letters(w)} -> {format_letters(reduce_word(w))}" for k, w in sorted(raw.items())}
