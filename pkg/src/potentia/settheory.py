"""Hereditarily finite sets and the desk-scale set-theoretic systems.

HF sets are identified with their Ackermann codes: the code of a set is the
sum of 2^code(member) over its members, so membership is a bit test and the
canonical order on sets is integer order on codes.  V_n is exactly the sets
with code below 2^|V_{n-1}|, giving sizes 0, 1, 2, 4, 16, 65536 for n = 0..5.

Two systems are built here: finite rank potentialism (worlds V_0..V_N under
the full linear order) and finite transitive-set potentialism (transitive
subsets of V_N under inclusion).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .formula import (And, Atom, BOT, Eq, Exists, Forall, Implies, Not,
    SET_SIGNATURE, TOP, Variable, conj, disj)
from .potentialist import Structure, check_potentialist
from . import control

#: |V_n| for n = 0..5; beyond rank 5 enumeration is physically out of reach
V_SIZES = (0, 1, 2, 4, 16, 65536)
MAX_RANK = 5


class RankError(ValueError):
    pass


# ---------------------------------------------------------------------------
# HF sets via Ackermann codes
# ---------------------------------------------------------------------------

class HFSet:
    """Canonical hereditarily finite set; children are ordered by canonical
    (Ackermann) order and duplicates are impossible by construction."""

    __slots__ = ("code",)
    _interned = {}

    def __new__(cls, code):
        code = int(code)
        if code < 0:
            raise RankError("negative code")
        hit = cls._interned.get(code)
        if hit is None:
            hit = object.__new__(cls)
            hit.code = code
            cls._interned[code] = hit
        return hit

    @classmethod
    def from_members(cls, members):
        code = 0
        for m in members:
            code |= 1 << m.code
        return cls(code)

    @property
    def members(self):
        out = []
        c = self.code
        while c:
            b = (c & -c).bit_length() - 1
            c &= c - 1
            out.append(HFSet(b))
        return tuple(out)

    @property
    def rank(self):
        return _rank(self.code)

    def is_transitive(self):
        return all(m.code & self.code == m.code for m in self.members)

    def is_ordinal(self):
        return self.is_transitive() and all(m.is_transitive() for m in self.members)

    def __str__(self):
        return "{" + ",".join(str(m) for m in self.members) + "}"

    def __repr__(self):
        return f"HFSet({self.code})"

    def __eq__(self, other):
        return isinstance(other, HFSet) and other.code == self.code

    def __hash__(self):
        return hash(self.code)

    def __lt__(self, other):
        return self.code < other.code


@lru_cache(maxsize=None)
def _rank(code):
    if code == 0:
        return 0
    r = 0
    c = code
    while c:
        b = (c & -c).bit_length() - 1
        c &= c - 1
        r = max(r, _rank(b) + 1)
    return r


EMPTY = HFSet(0)


def parse_hf(text):
    """Brace notation, e.g. {}, {{}}, {{},{{}}}."""
    pos = 0

    def parse():
        nonlocal pos
        if pos >= len(text) or text[pos] != "{":
            raise RankError(f"expected '{{' at position {pos} in {text!r}")
        pos += 1
        members = []
        while pos < len(text) and text[pos] != "}":
            members.append(parse())
            if pos < len(text) and text[pos] == ",":
                pos += 1
        if pos >= len(text):
            raise RankError(f"unbalanced braces in {text!r}")
        pos += 1
        return HFSet.from_members(members)

    out = parse()
    if pos != len(text):
        raise RankError(f"trailing input at position {pos} in {text!r}")
    return out


def build_v(n, cap=MAX_RANK):
    """All HF sets of rank below n, canonically ordered."""
    if n > cap or n > MAX_RANK:
        raise RankError(f"rank {n} exceeds the cap {min(cap, MAX_RANK)}")
    if n < 0:
        raise RankError("negative rank")
    return [HFSet(c) for c in range(V_SIZES[n])]


# ---------------------------------------------------------------------------
# Worlds as structures (element ids are Ackermann codes)
# ---------------------------------------------------------------------------

def membership_structure(codes):
    """Structure over {mem} whose domain is the given codes with true
    membership."""
    codes = tuple(sorted(codes))
    cset = set(codes)
    tuples = []
    for b in codes:
        c = b
        while c:
            a = (c & -c).bit_length() - 1
            c &= c - 1
            if a in cset:
                tuples.append((a, b))
    return Structure(SET_SIGNATURE, codes, {"mem": tuples})


def rank_world(k):
    return membership_structure(range(V_SIZES[k]))


def build_rank_system(N, cap=MAX_RANK):
    """Worlds V_0..V_N under the full linear order; validated, linear and
    coherent with limit V_N."""
    if N > cap or N > MAX_RANK:
        raise RankError(f"rank {N} exceeds the cap {min(cap, MAX_RANK)}")
    worlds = [rank_world(k) for k in range(N + 1)]
    n = N + 1
    access = tuple(sum(1 << u for u in range(w, n)) for w in range(n))
    return check_potentialist(worlds, access=access,
                              world_ids=tuple(f"V{k}" for k in range(n)))


def transitive_subset_masks(N):
    """Bitmasks (over element codes) of the transitive subsets of V_N.
    A subset mask S is transitive iff every member's code-bits lie in S."""
    size = V_SIZES[N]
    out = []
    for s in range(1 << size):
        m = s
        ok = True
        while m:
            e = (m & -m).bit_length() - 1
            m &= m - 1
            if e & s != e:
                ok = False
                break
        if ok:
            out.append(s)
    return out


def _mask_codes(mask):
    out = []
    while mask:
        e = (mask & -mask).bit_length() - 1
        mask &= mask - 1
        out.append(e)
    return out


def build_transitive_system(N, cap=None):
    """Transitive subsets of V_N under inclusion.  Exhaustive for N <= 3;
    for larger N a closure-generated family (downward closures of single
    elements, closed under union) within `cap` worlds."""
    if N <= 3:
        masks = transitive_subset_masks(N)
    else:
        if N > MAX_RANK - 1:
            raise RankError(f"transitive systems are capped at rank {MAX_RANK - 1}")
        masks = _generated_transitive_family(N, cap or 64)
    masks.sort(key=lambda s: (bin(s).count("1"), s))
    worlds = [membership_structure(_mask_codes(s)) for s in masks]
    n = len(worlds)
    return check_potentialist(worlds, mode="substructure",
                              world_ids=tuple(f"T{i}" for i in range(n)))


def _downward_closure(code):
    mask = 1 << code
    stack = [code]
    while stack:
        c = stack.pop()
        m = c
        while m:
            e = (m & -m).bit_length() - 1
            m &= m - 1
            if not mask >> e & 1:
                mask |= 1 << e
                stack.append(e)
    return mask


def _generated_transitive_family(N, cap):
    size = V_SIZES[N]
    seeds = [0] + [_downward_closure(c) for c in range(size)]
    family = set(seeds)
    frontier = True
    while frontier and len(family) < cap:
        frontier = False
        for a in sorted(family):
            for b in sorted(family):
                u = a | b
                if u not in family:
                    family.add(u)
                    frontier = True
                    if len(family) >= cap:
                        break
            if len(family) >= cap:
                break
    return sorted(family)


# ---------------------------------------------------------------------------
# Ordinal-counting formulas
# ---------------------------------------------------------------------------

def _mem(a, b):
    return Atom("mem", (Variable(a), Variable(b)))


def transitive_formula(var):
    """var is a transitive set: members of members are members.  Bound names
    are derived from var so nesting cannot capture."""
    y, z = f"{var}a", f"{var}b"
    return Forall(y, Implies(_mem(y, var),
                             Forall(z, Implies(_mem(z, y), _mem(z, var)))))


def ordinal_formula(var):
    """Ordinals in HF are exactly the hereditarily transitive sets, so linear
    order clauses are unnecessary."""
    w = f"{var}c"
    return And(transitive_formula(var),
               Forall(w, Implies(_mem(w, var), transitive_formula(w))))


def ordinal_count_at_least(k):
    """Sentence asserting k pairwise-distinct ordinals exist; in V_n it is
    true iff n >= k.  Distinctness conjuncts come before the ordinal checks
    so that the candidate scan rejects cheaply."""
    if k < 0:
        raise RankError("negative count")
    if k == 0:
        return TOP

    def level(i):
        name = f"x{i}"
        parts = [Not(Eq(Variable(name), Variable(f"x{j}"))) for j in range(i)]
        parts.append(ordinal_formula(name))
        if i + 1 < k:
            parts.append(level(i + 1))
        return Exists(name, conj(parts))

    return level(0)


def exact_ordinal_count(c, cap):
    """Exactly c ordinals, relative to systems whose worlds never hold more
    than `cap` ordinals: the unsatisfiable upper conjunct is dropped at the
    cap, which keeps refutation cheap on very large worlds."""
    if c < cap:
        return And(ordinal_count_at_least(c), Not(ordinal_count_at_least(c + 1)))
    return ordinal_count_at_least(c)


def height_dial(m, cap):
    """Dial sentences d_j = "the ordinal count is congruent to j mod m",
    as a disjunction of exact-count sentences up to the cap."""
    if m < 1:
        raise RankError("dial size must be positive")
    return tuple(disj([exact_ordinal_count(c, cap) for c in range(j, cap + 1, m)])
                 for j in range(m))


def rank_long_ratchet(N):
    """Stages r_v = "at least v ordinals" for v <= N, topped by an always
    false stage: within V_0..V_N the count never exceeds N, so the first
    out-of-reach stage is literally bottom.  This realizes the graded,
    never-exhausted shape the extraction needs."""
    return tuple(ordinal_count_at_least(v) for v in range(N + 1)) + (BOT,)


def rank_ratchet(n, m, N):
    """Finite ratchet of length n with a mod-m dial over build_rank_system(N),
    extracted from the long ratchet of at-least sentences."""
    if N < m * n + 1:
        raise RankError(f"need N >= m*n+1 = {m * n + 1}, got {N}")
    stages = rank_long_ratchet(N)
    return control.long_ratchet_extract(stages, n, m)


# ---------------------------------------------------------------------------
# Describing individual sets
# ---------------------------------------------------------------------------

def describe_set(h, cap=MAX_RANK):
    """Sentence asserting that a set with h's exact extensional structure
    exists; true in a transitive world iff h is in its domain."""
    if h.rank > cap:
        raise RankError(f"rank {h.rank} exceeds the cap {cap}")
    counter = [0]

    def fresh():
        counter[0] += 1
        return f"u{counter[0]}"

    def chi(s, var):
        kids = s.members
        if not kids:
            y = fresh()
            return Forall(y, Not(_mem(y, var)))
        names = [fresh() for _ in kids]
        z = fresh()
        parts = []
        parts.extend(_mem(nm, var) for nm in names)
        parts.extend(Not(Eq(Variable(names[i]), Variable(names[j])))
                     for i in range(len(kids)) for j in range(i))
        parts.extend(chi(kid, nm) for kid, nm in zip(kids, names))
        parts.append(Forall(z, Implies(_mem(z, var),
                                       disj([Eq(Variable(z), Variable(nm))
                                             for nm in names]))))
        body = conj(parts)
        for nm in reversed(names):
            body = Exists(nm, body)
        return body

    root = fresh()
    return Exists(root, chi(h, root))


def transitive_buttons(k, N, dial_size=1):
    """Buttons b_i = "c_i exists" for k pairwise membership-incomparable sets
    of equal rank N-1, paired with a height-style companion dial.  Returns
    (buttons, dial, chosen sets)."""
    candidates = [HFSet(c) for c in range(V_SIZES[N])]
    candidates = [h for h in candidates if h.rank == N - 1]
    chosen = []
    for h in sorted(candidates):
        if all(h.code >> c.code & 1 == 0 and c.code >> h.code & 1 == 0
               for c in chosen):
            chosen.append(h)
        if len(chosen) == k:
            break
    if len(chosen) < k:
        raise RankError(f"only {len(chosen)} membership-incomparable sets of "
                        f"rank {N - 1} available, need {k}")
    buttons = tuple(describe_set(h) for h in chosen)
    dial = height_dial(dial_size, N)
    return buttons, dial, tuple(chosen)
