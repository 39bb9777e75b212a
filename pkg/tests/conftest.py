"""Shared fixtures and independent oracle evaluators.

The naive evaluators below deliberately avoid every optimization used by the
library (bitmasks, guards, sentence caching): plain recursion over explicit
world/pair/domain collections, so they can serve as cross-check oracles.
"""

import itertools

import pytest

from potentia.formula import (And, Atom, Bot, Box, Diamond, Eq, Exists,
    Forall, Iff, Implies, Not, Or, Parameter, Top, Var, Variable)


def naive_eval_prop(frame_pairs, valuation, n, w, phi):
    """Independent propositional Kripke evaluation over a pair list."""
    succ = {u: [b for a, b in frame_pairs if a == u] for u in range(n)}

    def ev(u, f):
        if isinstance(f, Top):
            return True
        if isinstance(f, Bot):
            return False
        if isinstance(f, Var):
            return f.index in valuation[u]
        if isinstance(f, Not):
            return not ev(u, f.sub)
        if isinstance(f, And):
            return ev(u, f.left) and ev(u, f.right)
        if isinstance(f, Or):
            return ev(u, f.left) or ev(u, f.right)
        if isinstance(f, Implies):
            return (not ev(u, f.left)) or ev(u, f.right)
        if isinstance(f, Iff):
            return ev(u, f.left) == ev(u, f.right)
        if isinstance(f, Diamond):
            return any(ev(v, f.sub) for v in succ[u])
        if isinstance(f, Box):
            return all(ev(v, f.sub) for v in succ[u])
        raise AssertionError(f)

    return ev(w, phi)


def naive_frame_valid(frame_pairs, n, phi, var_indices):
    """Validity by explicit product over valuations-as-dicts."""
    worlds = range(n)
    for bits in itertools.product([False, True], repeat=len(var_indices) * n):
        valuation = {u: set() for u in worlds}
        k = 0
        for v in var_indices:
            for u in worlds:
                if bits[k]:
                    valuation[u].add(v)
                k += 1
        for u in worlds:
            if not naive_eval_prop(frame_pairs, valuation, n, u, phi):
                return False
    return True


def naive_eval_fo(structures, access_pairs, w, phi, env=None):
    """Independent first-order Kripke evaluation: no guards, no caches."""
    env = dict(env or {})
    succ = {u: [b for a, b in access_pairs if a == u]
            for u in range(len(structures))}

    def term(t, u):
        if isinstance(t, Parameter):
            assert t.ident in structures[u].domain_set
            return t.ident
        return env_stack[-1][t.name]

    env_stack = [env]

    def ev(u, f):
        s = structures[u]
        if isinstance(f, Top):
            return True
        if isinstance(f, Bot):
            return False
        if isinstance(f, Atom):
            return tuple(term(t, u) for t in f.terms) in s.rel(f.rel)
        if isinstance(f, Eq):
            return term(f.left, u) == term(f.right, u)
        if isinstance(f, Not):
            return not ev(u, f.sub)
        if isinstance(f, And):
            return ev(u, f.left) and ev(u, f.right)
        if isinstance(f, Or):
            return ev(u, f.left) or ev(u, f.right)
        if isinstance(f, Implies):
            return (not ev(u, f.left)) or ev(u, f.right)
        if isinstance(f, Iff):
            return ev(u, f.left) == ev(u, f.right)
        if isinstance(f, Exists):
            for a in s.domain:
                env_stack.append({**env_stack[-1], f.var: a})
                hit = ev(u, f.body)
                env_stack.pop()
                if hit:
                    return True
            return False
        if isinstance(f, Forall):
            for a in s.domain:
                env_stack.append({**env_stack[-1], f.var: a})
                hit = ev(u, f.body)
                env_stack.pop()
                if not hit:
                    return False
            return True
        if isinstance(f, Diamond):
            return any(ev(v, f.sub) for v in succ[u])
        if isinstance(f, Box):
            return all(ev(v, f.sub) for v in succ[u])
        raise AssertionError(f)

    return ev(w, phi)


@pytest.fixture(scope="session")
def rank3():
    from potentia.settheory import build_rank_system
    return build_rank_system(3)


@pytest.fixture(scope="session")
def rank4():
    from potentia.settheory import build_rank_system
    return build_rank_system(4)


@pytest.fixture(scope="session")
def transitive3():
    from potentia.settheory import build_transitive_system
    return build_transitive_system(3)


@pytest.fixture(scope="session")
def host2():
    from potentia.hosts import build_switch_host
    return build_switch_host(2)


@pytest.fixture(scope="session")
def host3():
    from potentia.hosts import build_switch_host
    return build_switch_host(3)
