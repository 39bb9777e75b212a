"""Potentialist systems of finite first-order structures and their semantics.

A System is a reflexive transitive Kripke model of structures with domains
inflationary along access.  check_potentialist additionally enforces atomic
agreement along access (the potentialist invariant); kripke_system admits
artificial hosts that deliberately violate agreement, which is what lets a
finite system carry switches at all.

Quantifiers range over the current world's domain only.  Evaluation
short-circuits, restricts quantifier candidates through relational guards
(forall y . mem(y, t) -> ... iterates over the members of t), and caches
closed subformula truth per world, which keeps worlds with tens of thousands
of elements tractable.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

from .formula import (And, Atom, Bot, Box, Diamond, Eq, Exists, Forall, Iff,
    Implies, Not, Or, Parameter, Substitution, Top, Var, Variable,
    enumerate_sentences, free_variables, is_modal_free, parameters,
    potentialist_translation, print_fo, prop_variables, substitute,
    validate_fo)
from .kripke import Frame, frame_properties


class PotentialistError(ValueError):
    pass


class ValidationError(PotentialistError):
    """A named violation of a system invariant, with a witness."""

    def __init__(self, kind, witness, message):
        super().__init__(message)
        self.kind = kind
        self.witness = witness


class EvalError(PotentialistError):
    pass


# ---------------------------------------------------------------------------
# Structures
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Structure:
    """A finite relational structure: ordered domain of element ids and, per
    relation, a set of tuples over the domain."""

    signature: object
    domain: tuple
    interpretation: dict

    def __post_init__(self):
        object.__setattr__(self, "domain", tuple(self.domain))
        interp = {}
        for name, arity in self.signature.relations:
            tuples = frozenset(tuple(t) for t in self.interpretation.get(name, ()))
            for t in tuples:
                if len(t) != arity:
                    raise ValidationError(
                        "arity", (name, t),
                        f"tuple {t} has wrong arity for {name}/{arity}")
            interp[name] = tuples
        for name in self.interpretation:
            if not self.signature.has(name):
                raise ValidationError("unknown-relation", name,
                                      f"relation {name!r} not in signature")
        object.__setattr__(self, "interpretation", interp)
        dset = frozenset(self.domain)
        object.__setattr__(self, "_domain_set", dset)
        for name, tuples in interp.items():
            for t in tuples:
                for e in t:
                    if e not in dset:
                        raise ValidationError(
                            "element", (name, t, e),
                            f"tuple {t} of {name} uses element {e!r} "
                            f"outside the domain")

    @property
    def domain_set(self):
        return self._domain_set

    def rel(self, name):
        try:
            return self.interpretation[name]
        except KeyError:
            raise EvalError(f"unknown relation {name!r}") from None

    @cached_property
    def _guard_indexes(self):
        return {}

    def guard_index(self, name, var_pos):
        """For a binary relation, map the fixed coordinate's value to the
        candidate values of the variable coordinate."""
        key = (name, var_pos)
        idx = self._guard_indexes.get(key)
        if idx is None:
            idx = {}
            for t in self.rel(name):
                fixed = t[1 - var_pos]
                idx.setdefault(fixed, []).append(t[var_pos])
            self._guard_indexes[key] = idx
        return idx

    def restrict_tuples(self, name, elements):
        return frozenset(t for t in self.rel(name)
                         if all(e in elements for e in t))


# ---------------------------------------------------------------------------
# Systems
# ---------------------------------------------------------------------------

class System:
    """Worlds plus a reflexive transitive accessibility relation, held as
    per-world bitmasks.  Immutable once constructed."""

    def __init__(self, signature, worlds, access, world_ids, potentialist, mode):
        self.signature = signature
        self.worlds = tuple(worlds)
        self.access = tuple(access)
        self.world_ids = tuple(world_ids)
        self.potentialist = potentialist
        self.mode = mode
        self._cache = {}
        self._pins = {}
        self._closed = {}
        self._validated_fo = set()

    def __len__(self):
        return len(self.worlds)

    def world_index(self, ident):
        try:
            return self.world_ids.index(ident)
        except ValueError:
            raise PotentialistError(f"no world with id {ident!r}") from None

    def accessible(self, w):
        mask = self.access[w]
        while mask:
            u = (mask & -mask).bit_length() - 1
            mask &= mask - 1
            yield u

    def frame(self):
        return Frame(len(self.worlds), self.access)

    def properties(self):
        return frame_properties(self.frame())

    # -- evaluation ---------------------------------------------------------

    def _is_closed(self, phi):
        key = id(phi)
        hit = self._closed.get(key)
        if hit is None:
            hit = not free_variables(phi)
            self._closed[key] = hit
            self._pins[key] = phi
        return hit

    def eval(self, world, phi, env=None):
        return eval_fo(self, world, phi, env)


def _pairs_to_masks(n, pairs):
    rows = [0] * n
    for a, b in pairs:
        rows[a] |= 1 << b
    return tuple(rows)


def _check_preorder_inflation(worlds, access):
    n = len(worlds)
    for w in range(n):
        if not access[w] >> w & 1:
            raise ValidationError("non-reflexive", w,
                                  f"world {w} does not access itself")
    for w in range(n):
        for u in range(n):
            if access[w] >> u & 1:
                for v in range(n):
                    if access[u] >> v & 1 and not access[w] >> v & 1:
                        raise ValidationError(
                            "non-transitive", (w, u, v),
                            f"access {w}->{u}->{v} without {w}->{v}")
    for w in range(n):
        for u in range(n):
            if access[w] >> u & 1:
                if not worlds[w].domain_set <= worlds[u].domain_set:
                    raise ValidationError(
                        "shrinking-domain", (w, u),
                        f"world {w} accesses {u} but its domain is not "
                        f"contained in the target's")


def kripke_system(worlds, access_pairs, world_ids=None, signature=None):
    """A Kripke model of structures: reflexive, transitive, with inflationary
    domains, but with no atomic-agreement requirement.  This is the host type
    for artificial switch systems."""
    worlds = tuple(worlds)
    sig = signature or worlds[0].signature
    n = len(worlds)
    access = _pairs_to_masks(n, access_pairs) if not isinstance(access_pairs[0], int) \
        else tuple(access_pairs)
    _check_preorder_inflation(worlds, access)
    ids = tuple(world_ids) if world_ids else tuple(f"W{i}" for i in range(n))
    return System(sig, worlds, access, ids, potentialist=False, mode="explicit")


def _substructure_access(worlds):
    n = len(worlds)
    rows = [0] * n
    for w in range(n):
        for u in range(n):
            if worlds[w].domain_set <= worlds[u].domain_set and \
                    _atoms_agree(worlds[w], worlds[u]):
                rows[w] |= 1 << u
    return tuple(rows)


def _atoms_agree(small, large):
    dom = small.domain_set
    for name, _ in small.signature.relations:
        if small.rel(name) != large.restrict_tuples(name, dom):
            return False
    return True


def check_potentialist(worlds, access=None, mode="explicit", world_ids=None):
    """Validate a potentialist system: reflexive transitive access,
    inflationary domains, atomic agreement along access; in substructure mode
    access is computed as the substructure relation.  Raises ValidationError
    naming the violated clause."""
    worlds = tuple(worlds)
    if not worlds:
        raise ValidationError("empty", None, "a system needs at least one world")
    sig = worlds[0].signature
    for i, s in enumerate(worlds):
        if s.signature != sig:
            raise ValidationError("signature", i,
                                  f"world {i} has a different signature")
    n = len(worlds)
    if mode == "substructure":
        access_masks = _substructure_access(worlds)
    elif access is None:
        raise PotentialistError("explicit mode needs an access relation")
    elif access and isinstance(next(iter(access)), int):
        access_masks = tuple(access)
    else:
        access_masks = _pairs_to_masks(n, access)
    _check_preorder_inflation(worlds, access_masks)
    for w in range(n):
        for u in range(n):
            if access_masks[w] >> u & 1 and not _atoms_agree(worlds[w], worlds[u]):
                raise ValidationError(
                    "atomic-disagreement", (w, u),
                    f"worlds {w} and {u} disagree on atomic facts over the "
                    f"smaller domain")
    ids = tuple(world_ids) if world_ids else tuple(f"W{i}" for i in range(n))
    return System(sig, worlds, access_masks, ids, potentialist=True, mode=mode)


# ---------------------------------------------------------------------------
# First-order Kripke evaluation
# ---------------------------------------------------------------------------

def _resolve(term, env, struct):
    if isinstance(term, Parameter):
        if term.ident not in struct.domain_set:
            raise EvalError(f"parameter #{term.ident} not in the current "
                            f"world's domain")
        return term.ident
    try:
        return env[term.name]
    except KeyError:
        raise EvalError(f"unbound variable {term.name}") from None


def _conjuncts(phi):
    out = []
    stack = [phi]
    while stack:
        f = stack.pop()
        if isinstance(f, And):
            stack.append(f.right)
            stack.append(f.left)
        else:
            out.append(f)
    return out


def _guard_candidates(var, body, env, struct, universal):
    """Candidate elements for a quantified variable when a top-level
    relational guard pins it down; None means the full domain."""
    source = body
    if universal:
        if not isinstance(body, Implies):
            return None
        source = body.left
    for g in _conjuncts(source):
        if isinstance(g, Atom) and len(g.terms) == 2:
            a, b = g.terms
            for pos, (mine, other) in enumerate(((a, b), (b, a))):
                if isinstance(mine, Variable) and mine.name == var:
                    if isinstance(other, Variable) and other.name == var:
                        continue
                    try:
                        fixed = _resolve(other, env, struct)
                    except EvalError:
                        continue
                    return struct.guard_index(g.rel, pos).get(fixed, ())
    return None


def _eval(system, w, phi, env):
    closed = system._is_closed(phi)
    if closed:
        key = (w, id(phi))
        hit = system._cache.get(key)
        if hit is not None:
            return hit
    struct = system.worlds[w]
    if isinstance(phi, Top):
        out = True
    elif isinstance(phi, Bot):
        out = False
    elif isinstance(phi, Atom):
        out = tuple(_resolve(t, env, struct) for t in phi.terms) in struct.rel(phi.rel)
    elif isinstance(phi, Eq):
        out = _resolve(phi.left, env, struct) == _resolve(phi.right, env, struct)
    elif isinstance(phi, Not):
        out = not _eval(system, w, phi.sub, env)
    elif isinstance(phi, And):
        out = _eval(system, w, phi.left, env) and _eval(system, w, phi.right, env)
    elif isinstance(phi, Or):
        out = _eval(system, w, phi.left, env) or _eval(system, w, phi.right, env)
    elif isinstance(phi, Implies):
        out = (not _eval(system, w, phi.left, env)) or _eval(system, w, phi.right, env)
    elif isinstance(phi, Iff):
        out = _eval(system, w, phi.left, env) == _eval(system, w, phi.right, env)
    elif isinstance(phi, (Exists, Forall)):
        universal = isinstance(phi, Forall)
        cands = _guard_candidates(phi.var, phi.body, env, struct, universal)
        if cands is None:
            cands = struct.domain
        inner = dict(env)
        out = universal
        for a in cands:
            inner[phi.var] = a
            got = _eval(system, w, phi.body, inner)
            if got != universal:
                out = not universal
                break
    elif isinstance(phi, Diamond):
        out = False
        for u in system.accessible(w):
            if _eval(system, u, phi.sub, env):
                out = True
                break
    elif isinstance(phi, Box):
        out = True
        for u in system.accessible(w):
            if not _eval(system, u, phi.sub, env):
                out = False
                break
    elif isinstance(phi, Var):
        raise EvalError("propositional variable in first-order evaluation; "
                        "apply a substitution first")
    else:
        raise EvalError(f"cannot evaluate {phi!r}")
    if closed:
        system._cache[(w, id(phi))] = out
        system._pins[id(phi)] = phi
    return out


def eval_fo(system, world, phi, env=None):
    """Potentialist satisfaction at a world: Tarskian atoms, quantifiers over
    the current domain, diamond/box over accessed worlds."""
    if not 0 <= world < len(system.worlds):
        raise EvalError(f"world {world} out of range")
    if id(phi) not in system._validated_fo:
        validate_fo(phi, system.signature)
        system._validated_fo.add(id(phi))
        system._pins[id(phi)] = phi
    env = dict(env or {})
    struct = system.worlds[world]
    for p in parameters(phi):
        if p not in struct.domain_set:
            raise EvalError(f"parameter #{p} not in world {world}'s domain")
    for name, value in env.items():
        if value not in struct.domain_set:
            raise EvalError(f"environment value {value!r} for {name} not in "
                            f"world {world}'s domain")
    return _eval(system, world, phi, env)


def sentence_mask(system, phi):
    """Bitmask of worlds where the sentence phi holds."""
    mask = 0
    for w in range(len(system.worlds)):
        if eval_fo(system, w, phi):
            mask |= 1 << w
    return mask


# ---------------------------------------------------------------------------
# Coherence and the limit structure
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CoherenceReport:
    coherent: bool
    limit: Optional[Structure]
    witness: object = None
    reason: str = ""


def _sort_key(e):
    return (0, e, "") if isinstance(e, int) else (1, 0, str(e))


def coherence(worlds):
    """Coherent iff the structures agree on atomic truth over shared elements
    and every (world, element) pair is accommodated by some world containing
    both.  The limit is simply the union of the structures."""
    worlds = tuple(worlds)
    sig = worlds[0].signature
    for i, s in enumerate(worlds):
        if s.signature != sig:
            raise ValidationError("signature", i, "signatures differ")
    for i in range(len(worlds)):
        for j in range(i + 1, len(worlds)):
            shared = worlds[i].domain_set & worlds[j].domain_set
            for name, _ in sig.relations:
                a = worlds[i].restrict_tuples(name, shared)
                b = worlds[j].restrict_tuples(name, shared)
                if a != b:
                    t = next(iter(a.symmetric_difference(b)))
                    return CoherenceReport(False, None, (i, j, name, t),
                                           "atomic-disagreement")
    union_elems = set()
    for s in worlds:
        union_elems |= s.domain_set
    for i, s in enumerate(worlds):
        covered = set()
        for t in worlds:
            if s.domain_set <= t.domain_set:
                covered |= t.domain_set
        missing = union_elems - covered
        if missing:
            e = sorted(missing, key=_sort_key)[0]
            return CoherenceReport(False, None, (i, e), "unaccommodated-element")
    domain = tuple(sorted(union_elems, key=_sort_key))
    interp = {name: frozenset().union(*(s.rel(name) for s in worlds))
              for name, _ in sig.relations}
    limit = Structure(sig, domain, interp)
    return CoherenceReport(True, limit)


def limit_system(limit):
    """One-world system for Tarskian evaluation in the limit structure."""
    return kripke_system((limit,), ((0, 0),), world_ids=("limit",))


def check_translation(system, psi, params=()):
    """Truth of psi in the limit structure versus potentialist truth of its
    translation at every world containing psi's parameters."""
    if not is_modal_free(psi):
        raise PotentialistError("check_translation expects a modal-free formula")
    report = coherence(system.worlds)
    if not report.coherent:
        raise ValidationError(report.reason, report.witness,
                              "system is not coherent")
    needed = parameters(psi) | set(params)
    limit_truth = eval_fo(limit_system(report.limit), 0, psi)
    translated = potentialist_translation(psi)
    seen_world = False
    for w in range(len(system.worlds)):
        if needed <= system.worlds[w].domain_set:
            seen_world = True
            if eval_fo(system, w, translated) != limit_truth:
                return False
    if not seen_world:
        raise EvalError("no world contains the parameters")
    return True


# ---------------------------------------------------------------------------
# Validity refutation and scheme checking
# ---------------------------------------------------------------------------

def refute_validity(system, world, phi, sigma):
    """Evaluate the substitution instance of a propositional scheme at a
    world; "fails" certifies that phi is not valid there for the language of
    sigma."""
    instance = substitute(phi, sigma)
    return "holds" if eval_fo(system, world, instance) else "fails"


@dataclass(frozen=True)
class SchemeReport:
    scheme: str
    trials: int
    failures: tuple

    @property
    def ok(self):
        return not self.failures


def scheme_check(system, phi, pool, trials, seed=0):
    """Test a propositional scheme under `trials` seeded random substitutions
    from the pool, at every world; failures carry their witness."""
    pool = tuple(pool)
    if not pool:
        raise PotentialistError("empty substitution pool")
    vars_ = prop_variables(phi)
    failures = []
    for t in range(trials):
        rng = random.Random(f"{seed}:{t}")
        mapping = {v: pool[rng.randrange(len(pool))] for v in vars_}
        sigma = Substitution(tuple(mapping.items()))
        instance = substitute(phi, sigma)
        for w in range(len(system.worlds)):
            if not eval_fo(system, w, instance):
                failures.append((system.world_ids[w], t,
                                 tuple(print_fo(mapping[v]) for v in vars_)))
    return SchemeReport(print_fo(phi) if not vars_ else "scheme", trials,
                        tuple(failures))


def converse_barcan_check(system, open_pool, trials, seed=0, var="y"):
    """Sample open formulas psi(var) and test the converse Barcan instance
    [] forall var . psi -> forall var . [] psi at every world."""
    open_pool = tuple(open_pool)
    if not open_pool:
        raise PotentialistError("empty open-formula pool")
    failures = []
    for t in range(trials):
        rng = random.Random(f"{seed}:{t}:cb")
        psi = open_pool[rng.randrange(len(open_pool))]
        instance = Implies(Box(Forall(var, psi)), Forall(var, Box(psi)))
        for w in range(len(system.worlds)):
            if not eval_fo(system, w, instance):
                failures.append((system.world_ids[w], t, print_fo(psi)))
    return SchemeReport("converse-barcan", trials, tuple(failures))


def sentence_pool(signature, extras=(), max_qdepth=2, max_size=6, limit=None):
    """Bounded pool of closed sentences over the signature, plus any extras
    (typically the system's own control statements)."""
    pool = list(extras)
    for phi in enumerate_sentences(signature, max_qdepth, max_size):
        pool.append(phi)
        if limit is not None and len(pool) >= limit:
            break
    return tuple(pool)


def open_formula_pool(signature, var, max_qdepth=1, max_size=5, limit=None):
    """Bounded pool of formulas with exactly one free variable."""
    from .formula import enumerate_formulas
    pool = []
    for phi in enumerate_formulas(signature, max_qdepth, max_size,
                                  free_vars=(var,)):
        if free_variables(phi) == {var}:
            pool.append(phi)
            if limit is not None and len(pool) >= limit:
                break
    return tuple(pool)
