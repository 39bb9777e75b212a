"""Axiom schemes for K, T, 4, .2, .3, 5 and bounded membership decisions for
S4, S4.2, S4.3 and S5 over their complete finite frame classes.

Theoremhood is only ever reported as bounded: a "theorem" verdict records the
frame bound searched, and every "nontheorem" verdict carries a countermodel
that is re-checkable with eval_prop.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .formula import And, Box, Diamond, Implies, Not, Or, Var, conj
from . import kripke
from . import synthesis

THEORY_NAMES = ("S4", "S4.2", "S4.3", "S5")

_P0, _P1 = Var(0), Var(1)

_AXIOMS = {
    "K": Implies(Box(Implies(_P0, _P1)), Implies(Box(_P0), Box(_P1))),
    "T": Implies(Box(_P0), _P0),
    "4": Implies(Box(_P0), Box(Box(_P0))),
    ".2": Implies(Diamond(Box(_P0)), Box(Diamond(_P0))),
    ".3": Implies(And(Diamond(_P0), Diamond(_P1)),
                  Diamond(Or(And(_P0, Diamond(_P1)), And(_P1, Diamond(_P0))))),
    # the maximality form of axiom 5; over S4 it is equivalent to the
    # textbook formulation <>p -> []<>p
    "5": Implies(Diamond(Box(_P0)), _P0),
}


def axiom(name):
    if name not in _AXIOMS:
        raise KeyError(f"unknown axiom {name!r}")
    return _AXIOMS[name]


def axiom_names():
    return tuple(_AXIOMS)


def three_button_formula():
    """The scheme asserting that p0, p1, p2 are NOT three independent
    unpushed buttons.  Its negation describes a world from which the full
    cube of push-patterns over three pure buttons ([]p_i) is reachable
    stepwise, so this formula is valid where no such triple exists but is
    not an S4.2 theorem."""
    n = 3
    memo = {}

    def pattern(a):
        return conj([Box(Var(i)) if i in a else Not(Box(Var(i)))
                     for i in range(n)])

    def reach(a):
        if a in memo:
            return memo[a]
        parts = [pattern(a)]
        for i in range(n):
            if i not in a:
                parts.append(Diamond(reach(a | frozenset([i]))))
        memo[a] = conj(parts)
        return memo[a]

    return Not(reach(frozenset()))


def corpus():
    """The curated formula corpus used for separation and monotonicity
    tests."""
    out = dict(_AXIOMS)
    out["no-3-buttons"] = three_button_formula()
    return out


@dataclass(frozen=True)
class Verdict:
    status: str                              # "theorem" | "nontheorem"
    theory: str
    bound: int
    exhaustive_to: int                       # largest exhaustively searched size
    countermodel: Optional[synthesis.Countermodel] = None

    @property
    def is_theorem(self):
        return self.status == "theorem"


def _s4_frames(bound, sample_count=64, seed=0):
    cap = min(bound, kripke.PREORDER_EXHAUSTIVE_CAP)
    for n in range(1, cap + 1):
        yield from kripke.all_preorders(n)
    for n in range(cap + 1, bound + 1):
        yield from kripke.sampled_preorders(n, sample_count, seed=seed)


def decide(phi, theory, bound):
    """Bounded decision: search the theory's complete finite frame class up
    to `bound` worlds for a countermodel."""
    if bound < 1:
        raise ValueError("bound must be at least 1")
    if theory == "S4":
        exhaustive_to = min(bound, kripke.PREORDER_EXHAUSTIVE_CAP)
        for frame in _s4_frames(bound):
            hit = kripke.find_failing_valuation(frame, phi)
            if hit is not None:
                index, world = hit
                model = kripke.valuation_from_index(frame, phi, index)
                cm = synthesis.Countermodel(model, world, "preorder")
                return Verdict("nontheorem", theory, bound, exhaustive_to, cm)
        return Verdict("theorem", theory, bound, exhaustive_to)
    if theory not in THEORY_NAMES:
        raise KeyError(f"unknown theory {theory!r}")
    cm = synthesis.find_countermodel(phi, theory, bound)
    if cm is None:
        return Verdict("theorem", theory, bound, bound)
    return Verdict("nontheorem", theory, bound, bound, cm)


def classify(phi, bound):
    """Least theory among S4, S4.2, S4.3, S5 proving phi within the bound;
    "none" when even the complete frames refute it."""
    for theory in THEORY_NAMES:
        if decide(phi, theory, bound).is_theorem:
            return theory
    return "none"
