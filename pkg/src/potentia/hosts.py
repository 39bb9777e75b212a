"""Artificial host systems for switches and dials.

A finite potentialist system cannot carry a switch: every finite preorder has
a maximal cluster, and full atomic agreement forces cluster-mates to be
identical structures, so <>s and <>~s cannot both persist.  The hosts built
here are honest Kripke models of structures (reflexive, transitive,
inflationary) that deliberately drop atomic agreement: one world per flag
pattern, all worlds mutually accessible, which is exactly the shape the
switch arguments need.
"""

from __future__ import annotations

from .formula import Atom, Parameter, Signature
from .potentialist import Structure, kripke_system

FLAG_SIGNATURE = Signature((("on", 1),))


def switch_sentence(i):
    return Atom("on", (Parameter(i),))


def build_switch_host(flags):
    """Complete-access system on 2^flags worlds, one per flag pattern; the
    sentences on(#i) form an independent switch family of size flags."""
    if flags < 1:
        raise ValueError("need at least one flag")
    domain = tuple(range(flags))
    worlds = []
    for pattern in range(1 << flags):
        on = [(i,) for i in range(flags) if pattern >> i & 1]
        worlds.append(Structure(FLAG_SIGNATURE, domain, {"on": on}))
    n = len(worlds)
    full = (1 << n) - 1
    system = kripke_system(worlds, tuple(full for _ in range(n)),
                           world_ids=tuple(f"P{p}" for p in range(n)))
    switches = tuple(switch_sentence(i) for i in range(flags))
    return system, switches
