"""Countermodel search and the upper-bound machines.

find_countermodel scans each theory's complete finite frame class in
canonical order (frames ascending, then valuations of the formula's
variables by index, then worlds), so the least countermodel is reproducible.
The simulate_* constructions label a potentialist system's worlds with
control-statement combinations matching a countermodel's worlds, produce the
induced substitution, and verify_bisimulation sweeps every reachable world
and every subformula to confirm the simulation, after which refute_validity
evaluates the failing instance itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .formula import (And, Box, Not, Substitution, TOP, conj, disj,
    prop_variables, subformulas, substitute)
from .kripke import (Frame, KripkeModel, clusters, complete_frame, eval_prop,
    find_failing_valuation, is_complete_frame, is_linear_preorder,
    is_pre_boolean_algebra, linear_frame, preboolean_frame,
    valuation_from_index)
from .potentialist import eval_fo, refute_validity
from .control import ControlError, is_pushed


class ShapeError(ControlError):
    pass


class AssociationError(ControlError):
    """A world of the system matched no label, or more than one."""


@dataclass(frozen=True)
class Countermodel:
    model: KripkeModel
    world: int
    frame_class: str


@dataclass(frozen=True, eq=False)
class Association:
    """Per countermodel world, the labelling sentence; plus the induced
    substitution, anchored at a base world of the system."""

    labels: tuple
    substitution: Substitution
    base_world: int
    countermodel: Countermodel


def _frames_for(theory, max_worlds):
    if theory == "S5":
        for n in range(1, max_worlds + 1):
            yield complete_frame(n), "complete"
    elif theory == "S4.2":
        a = 0
        while 1 << a <= max_worlds:
            for m in range(1, max_worlds // (1 << a) + 1):
                yield preboolean_frame(a, m), "preboolean"
            a += 1
    elif theory == "S4.3":
        for c in range(1, max_worlds + 1):
            for m in range(1, max_worlds // c + 1):
                yield linear_frame(c, m), "linear"
    else:
        raise KeyError(f"no canonical frame class for theory {theory!r}")


def find_countermodel(phi, theory, max_worlds):
    """Least countermodel for phi over the theory's canonical frame class,
    or None when no frame within the bound refutes it."""
    if max_worlds < 1:
        raise ValueError("maxWorlds must be at least 1")
    for frame, tag in _frames_for(theory, max_worlds):
        hit = find_failing_valuation(frame, phi)
        if hit is not None:
            index, world = hit
            return Countermodel(valuation_from_index(frame, phi, index),
                                world, tag)
    return None


# ---------------------------------------------------------------------------
# Shape fitting: cone truncation, duplication, and placing the failing world
# ---------------------------------------------------------------------------

def _chain_order(dec):
    # bottom cluster accesses the most clusters
    return sorted(range(len(dec.clusters)),
                  key=lambda c: -bin(dec.quotient[c]).count("1"))


def _lay_out(members, size, rotate_to=0):
    """Pad a cluster's member list to `size` by duplicating the last member,
    then rotate right so the first member lands at index rotate_to."""
    if len(members) > size:
        raise ShapeError(f"cluster of {len(members)} worlds cannot fit "
                         f"size {size}")
    padded = list(members) + [members[-1]] * (size - len(members))
    return [padded[(i - rotate_to) % size] for i in range(size)]


def _rebuild(cm, frame, source_worlds, failing_index, tag):
    valuation = tuple(cm.model.valuation[s] for s in source_worlds)
    model = KripkeModel(frame, valuation, cm.model.var_count)
    return Countermodel(model, failing_index, tag)


def uniformize(cm, size):
    """Pad every cluster to exactly `size` worlds by duplicating members;
    satisfaction of all subformulas is preserved at corresponding worlds."""
    dec = clusters(cm.model.frame)
    order = sorted(range(len(dec.clusters)), key=lambda c: min(dec.clusters[c]))
    if max(len(c) for c in dec.clusters) > size:
        raise ShapeError("target size below the largest cluster")
    layout = []
    failing = None
    for pos, c in enumerate(order):
        members = sorted(dec.clusters[c])
        laid = _lay_out(members, size)
        if cm.world in members:
            failing = pos * size + laid.index(cm.world)
        layout.extend(laid)
    rows = []
    for pos, c in enumerate(order):
        mask = 0
        for qos, d in enumerate(order):
            if dec.quotient[c] >> d & 1:
                mask |= ((1 << size) - 1) << (qos * size)
        rows.extend([mask] * size)
    frame = Frame(len(layout), tuple(rows))
    return _rebuild(cm, frame, layout, failing, cm.frame_class)


def fit_complete(cm, world_count, base_value):
    """Duplicate worlds of a complete-frame countermodel up to world_count
    and place the failing world at index base_value."""
    if not is_complete_frame(cm.model.frame):
        raise ShapeError("countermodel frame is not complete")
    n = cm.model.frame.world_count
    if n > world_count:
        raise ShapeError(f"{n} worlds cannot fit {world_count}")
    members = [cm.world] + [w for w in range(n) if w != cm.world]
    laid = _lay_out(members, world_count, rotate_to=base_value)
    return _rebuild(cm, complete_frame(world_count), laid, base_value,
                    "complete")


def fit_linear(cm, cluster_count, size, base_value):
    """Cone-truncate a linear countermodel at the failing world's cluster,
    pad cluster sizes, duplicate the top cluster up to cluster_count, and
    place the failing world at intra-cluster index base_value."""
    if not is_linear_preorder(cm.model.frame):
        raise ShapeError("countermodel frame is not a linear preorder")
    dec = clusters(cm.model.frame)
    chain = _chain_order(dec)
    fpos = chain.index(dec.cluster_of[cm.world])
    cone = chain[fpos:]
    if len(cone) > cluster_count:
        raise ShapeError(f"{len(cone)} clusters cannot fit {cluster_count}")
    cone = cone + [cone[-1]] * (cluster_count - len(cone))
    layout = []
    for pos, c in enumerate(cone):
        members = sorted(dec.clusters[c])
        if pos == 0:
            members = [cm.world] + [m for m in members if m != cm.world]
            layout.extend(_lay_out(members, size, rotate_to=base_value))
        else:
            layout.extend(_lay_out(members, size))
    frame = linear_frame(cluster_count, size)
    return _rebuild(cm, frame, layout, base_value, "linear")


def fit_preboolean(cm, atom_count, size, base_value):
    """Cone-truncate a pre-Boolean countermodel at the failing world's
    cluster (a Boolean interval), extend with fresh atoms up to atom_count by
    duplication, pad cluster sizes, and place the failing world at index
    base_value of the bottom cluster."""
    if not is_pre_boolean_algebra(cm.model.frame):
        raise ShapeError("countermodel frame is not a pre-Boolean algebra")
    dec = clusters(cm.model.frame)
    leq = lambda a, b: bool(dec.quotient[a] >> b & 1)
    f = dec.cluster_of[cm.world]
    cone = [c for c in range(len(dec.clusters)) if leq(f, c)]
    atoms = [a for a in cone if a != f
             and all(not leq(d, a) for d in cone if d not in (f, a))]
    atoms.sort(key=lambda c: min(dec.clusters[c]))
    if len(atoms) > atom_count:
        raise ShapeError(f"countermodel needs {len(atoms)} independent "
                         f"buttons, certificate provides {atom_count}")
    by_set = {}
    for c in cone:
        key = frozenset(i for i, a in enumerate(atoms) if leq(a, c))
        if key in by_set:
            raise ShapeError("cluster quotient cone is not a Boolean algebra")
        by_set[key] = c
    if len(by_set) != 1 << len(atoms):
        raise ShapeError("cluster quotient cone is not a Boolean algebra")
    subsets = sorted(range(1 << atom_count), key=lambda s: (bin(s).count("1"), s))
    layout = []
    for pos, s in enumerate(subsets):
        proj = frozenset(i for i in range(len(atoms)) if s >> i & 1)
        members = sorted(dec.clusters[by_set[proj]])
        if pos == 0:
            members = [cm.world] + [m for m in members if m != cm.world]
            layout.extend(_lay_out(members, size, rotate_to=base_value))
        else:
            layout.extend(_lay_out(members, size))
    frame = preboolean_frame(atom_count, size)
    return _rebuild(cm, frame, layout, base_value, "preboolean")


# ---------------------------------------------------------------------------
# Simulations
# ---------------------------------------------------------------------------

def _substitution_for(cm, labels):
    mapping = {}
    for p in range(cm.model.var_count):
        mask = cm.model.var_mask(p)
        mapping[p] = disj([labels[w] for w in range(cm.model.frame.world_count)
                           if mask >> w & 1])
    return Substitution(tuple(mapping.items()))


def simulate_s5(system, switches_cert, cm):
    """Label the system's worlds by switch patterns matching a complete-frame
    countermodel with 2^m worlds; returns the substitution and association."""
    switches_cert.require_verified()
    if switches_cert.kind != "switches":
        raise ShapeError("simulate_s5 needs a switches certificate")
    family = switches_cert.formulas
    m = len(family)
    n = cm.model.frame.world_count
    if n != 1 << m:
        raise ShapeError(f"countermodel has {n} worlds, switches give {1 << m}")
    if not is_complete_frame(cm.model.frame):
        raise ShapeError("countermodel frame is not complete")
    labels = []
    for j in range(n):
        lits = [family[i] if j >> i & 1 else Not(family[i])
                for i in reversed(range(m))]
        labels.append(conj(lits))
    sigma = _substitution_for(cm, labels)
    return sigma, Association(tuple(labels), sigma,
                              switches_cert.base_world, cm)


def _pushed_sentence(system, w, b):
    # pure buttons are their own pushed-sentence, matching the construction
    # in the source arguments; otherwise []b is the honest pushed predicate
    from .control import verify_pure_button
    return b if verify_pure_button(system, w, b) else Box(b)


def simulate_s42(system, buttons_cert, cm):
    """Label worlds by (pushed-button set, dial value) matching a pre-Boolean
    countermodel with one atom per button and uniform cluster size equal to
    the dial size."""
    buttons_cert.require_verified()
    if buttons_cert.kind != "buttons":
        raise ShapeError("simulate_s42 needs a buttons certificate")
    buttons = buttons_cert.formulas
    dial = buttons_cert.companion.require_verified().formulas
    w = buttons_cert.base_world
    n, m = len(buttons), len(dial)
    for b in buttons:
        if is_pushed(system, w, b):
            raise ShapeError("a button is already pushed at the base world")
    dec = clusters(cm.model.frame)
    if len(dec.clusters) != 1 << n or \
            any(len(c) != m for c in dec.clusters) or \
            not is_pre_boolean_algebra(cm.model.frame):
        raise ShapeError(f"countermodel is not pre-Boolean with {1 << n} "
                         f"clusters of size {m}")
    pushed = [_pushed_sentence(system, w, b) for b in buttons]
    subsets = sorted(range(1 << n), key=lambda s: (bin(s).count("1"), s))
    labels = []
    for s in subsets:
        for j in range(m):
            parts = ([pushed[i] for i in range(n) if s >> i & 1]
                     + [Not(pushed[i]) for i in range(n) if not s >> i & 1]
                     + [dial[j]])
            labels.append(conj(parts))
    sigma = _substitution_for(cm, labels)
    return sigma, Association(tuple(labels), sigma, w, cm)


def volume_sentences(stages):
    """Exact-volume sentences over ratchet stages r_1..r_n, with r_0 read as
    true and r_{n+1} as false."""
    stages = tuple(stages)
    n = len(stages)
    if n == 0:
        return (TOP,)
    out = [Not(stages[0])]
    for i in range(1, n):
        out.append(And(stages[i - 1], Not(stages[i])))
    out.append(stages[n - 1])
    return tuple(out)


def simulate_s43(system, ratchet_cert, cm):
    """Label worlds by (exact ratchet volume, dial value) matching a linear
    countermodel with n+1 clusters of uniform size m."""
    ratchet_cert.require_verified()
    if ratchet_cert.kind != "ratchet":
        raise ShapeError("simulate_s43 needs a ratchet certificate")
    stages = ratchet_cert.formulas
    dial = ratchet_cert.companion.require_verified().formulas
    w = ratchet_cert.base_world
    n, m = len(stages), len(dial)
    if stages and eval_fo(system, w, stages[0]):
        raise ShapeError("nonzero ratchet volume at the base world")
    dec = clusters(cm.model.frame)
    if len(dec.clusters) != n + 1 or any(len(c) != m for c in dec.clusters) \
            or not is_linear_preorder(cm.model.frame):
        raise ShapeError(f"countermodel is not linear with {n + 1} clusters "
                         f"of size {m}")
    vols = volume_sentences(stages)
    labels = []
    for i in range(n + 1):
        for j in range(m):
            labels.append(And(vols[i], dial[j]))
    sigma = _substitution_for(cm, labels)
    return sigma, Association(tuple(labels), sigma, w, cm)


# ---------------------------------------------------------------------------
# Bisimulation verification and the full pipeline
# ---------------------------------------------------------------------------

def associated_world(system, u, assoc):
    matches = [k for k, lab in enumerate(assoc.labels)
               if eval_fo(system, u, lab)]
    if len(matches) != 1:
        raise AssociationError(
            f"world {system.world_ids[u]} matches {len(matches)} labels")
    return matches[0]


def verify_bisimulation(system, cm, assoc, phi):
    """For every world reachable from the base and every subformula of phi,
    potentialist truth of the substituted subformula equals countermodel
    truth at the associated world."""
    parts = [(chi, substitute(chi, assoc.substitution))
             for chi in subformulas(phi)]
    mask = system.access[assoc.base_world]
    while mask:
        u = (mask & -mask).bit_length() - 1
        mask &= mask - 1
        mw = associated_world(system, u, assoc)
        for chi, inst in parts:
            if eval_fo(system, u, inst) != eval_prop(cm.model, mw, chi):
                return False
    return True


@dataclass(frozen=True, eq=False)
class SynthesisReport:
    theory: str
    bound: int
    found: bool
    countermodel: Optional[Countermodel] = None
    fitted: Optional[Countermodel] = None
    substitution: Optional[Substitution] = None
    association: Optional[Association] = None
    bisimulation_ok: Optional[bool] = None
    refutation: Optional[str] = None

    @property
    def ok(self):
        if not self.found:
            return True
        return bool(self.bisimulation_ok) and self.refutation == "fails"


def _dial_value_at(system, w, dial):
    values = [j for j, d in enumerate(dial) if eval_fo(system, w, d)]
    if len(values) != 1:
        raise AssociationError(f"base world has {len(values)} dial values")
    return values[0]


def synthesize(system, cert, phi, theory, bound):
    """End to end: find a countermodel over the theory's frame class, fit it
    to the certificate's shape, build the substitution, verify the induced
    bisimulation, and evaluate the failing instance at the base world."""
    raw = find_countermodel(phi, theory, bound)
    if raw is None:
        return SynthesisReport(theory, bound, False)
    w = cert.base_world
    if theory == "S5":
        m = len(cert.formulas)
        pattern = sum(1 << i for i, s in enumerate(cert.formulas)
                      if eval_fo(system, w, s))
        fitted = fit_complete(raw, 1 << m, pattern)
        sigma, assoc = simulate_s5(system, cert, fitted)
    elif theory == "S4.2":
        dial = cert.companion.formulas
        fitted = fit_preboolean(raw, len(cert.formulas), len(dial),
                                _dial_value_at(system, w, dial))
        sigma, assoc = simulate_s42(system, cert, fitted)
    elif theory == "S4.3":
        dial = cert.companion.formulas
        fitted = fit_linear(raw, len(cert.formulas) + 1, len(dial),
                            _dial_value_at(system, w, dial))
        sigma, assoc = simulate_s43(system, cert, fitted)
    else:
        raise KeyError(f"unknown synthesis theory {theory!r}")
    if eval_prop(fitted.model, fitted.world, phi):
        raise ShapeError("shape fitting lost the countermodel")
    bisim = verify_bisimulation(system, fitted, assoc, phi)
    verdict = refute_validity(system, w, phi, sigma)
    return SynthesisReport(theory, bound, True, raw, fitted, sigma, assoc,
                           bisim, verdict)


def default_bound(phi, cap=8):
    """min(2^|subformulas(phi)|, cap): filtration-style in principle, capped
    for desk-scale runtimes; absence at the bound is reported as bounded."""
    return min(1 << len(subformulas(phi)), cap)
