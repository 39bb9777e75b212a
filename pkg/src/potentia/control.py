"""Control statements over a system: switches, dials, buttons, ratchets.

Verification is brute-force exhaustion over the worlds reachable from the
certificate's base world.  Finite systems have boundary effects that the
motivating infinite systems lack (a maximal world accesses nothing new), so
two clauses are checked in a finite rendering, documented on the verifier:

* a dial's value-reachability clause exempts terminal worlds (worlds whose
  only accessible world is themselves), and instead requires every value to
  be realized somewhere;
* a ratchet's mutual-independence clause requires every realized ratchet
  volume to carry every companion value among reachable worlds, plus the
  literal volume-preserving reachability of all values at the base world.

Every synthesis run re-checks the end product directly (bisimulation sweep
plus refutation), so these verifiers gate constructions rather than carry
the final soundness burden.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .formula import And, BOT, Box, Not, TOP, conj, disj
from .potentialist import PotentialistError, sentence_mask


class ControlError(PotentialistError):
    pass


@dataclass(frozen=True, eq=False)
class ControlCertificate:
    kind: str                 # switches | dial | buttons | ratchet | long-ratchet
    formulas: tuple
    system: object
    base_world: int
    verified: bool
    companion: Optional["ControlCertificate"] = None

    def require_verified(self):
        if not self.verified:
            raise ControlError(f"unverified {self.kind} certificate")
        return self


def _bits(mask):
    while mask:
        b = (mask & -mask).bit_length() - 1
        mask &= mask - 1
        yield b


def _reach(system, w):
    return system.access[w]


def _full(system):
    return (1 << len(system.worlds)) - 1


# ---------------------------------------------------------------------------
# Switches
# ---------------------------------------------------------------------------

def verify_switch(system, w, s):
    """True iff both <>s and <>~s hold at every world reachable from w."""
    mask = sentence_mask(system, s)
    full = _full(system)
    for u in _bits(_reach(system, w)):
        acc = system.access[u]
        if not (acc & mask and acc & ~mask & full):
            return False
    return True


def _pattern_ids(system, masks):
    pats = []
    for v in range(len(system.worlds)):
        pats.append(sum(1 << i for i, m in enumerate(masks) if m >> v & 1))
    return pats


def verify_independent_switches(system, w, family):
    """From every world reachable from w, every boolean pattern over the
    family is realized at some accessed world."""
    family = tuple(family)
    if not family:
        raise ControlError("independent-switch family must be nonempty")
    masks = [sentence_mask(system, s) for s in family]
    pats = _pattern_ids(system, masks)
    want = set(range(1 << len(family)))
    for u in _bits(_reach(system, w)):
        got = {pats[v] for v in _bits(system.access[u])}
        if got != want:
            return False
    return True


# ---------------------------------------------------------------------------
# Dials
# ---------------------------------------------------------------------------

def verify_dial(system, family):
    """Exactly one value at every world; every value realized at some world;
    every non-terminal world can access every value.  Terminal worlds (which
    access only themselves) are exempt from the reachability clause: they are
    the finite truncation's boundary and have no analogue in the motivating
    unbounded systems."""
    family = tuple(family)
    if not family:
        raise ControlError("a dial needs at least one sentence")
    masks = [sentence_mask(system, d) for d in family]
    n_worlds = len(system.worlds)
    for v in range(n_worlds):
        if sum(m >> v & 1 for m in masks) != 1:
            return False
    for m in masks:
        if not m:
            return False
    for u in range(n_worlds):
        acc = system.access[u]
        if acc == 1 << u:
            continue
        for m in masks:
            if not acc & m:
                return False
    return True


def switches_to_dial(family):
    """Dial sentence d_j asserts the switch pattern matches the binary digits
    of j, highest switch first."""
    family = tuple(family)
    m = len(family)
    out = []
    for j in range(1 << m):
        lits = [family[i] if j >> i & 1 else Not(family[i])
                for i in reversed(range(m))]
        out.append(conj(lits))
    return tuple(out)


def dial_to_switches(dial, m):
    """Switch s_i asserts that some d_j with bit i of j set holds."""
    dial = tuple(dial)
    if 1 << m > len(dial):
        raise ControlError(f"cannot extract {m} switches from a dial of "
                           f"size {len(dial)}")
    return tuple(disj([dial[j] for j in range(len(dial)) if j >> i & 1])
                 for i in range(m))


# ---------------------------------------------------------------------------
# Buttons
# ---------------------------------------------------------------------------

def _box_mask(system, s):
    mask = sentence_mask(system, s)
    out = 0
    for v in range(len(system.worlds)):
        if system.access[v] & ~mask == 0:
            out |= 1 << v
    return out


def is_pushed(system, u, b):
    """A button is pushed where []b holds."""
    return bool(_box_mask(system, b) >> u & 1)


def verify_button(system, w, b):
    """<>[]b at every world reachable from w."""
    boxed = _box_mask(system, b)
    return all(system.access[u] & boxed for u in _bits(_reach(system, w)))


def verify_pure_button(system, w, b):
    """A button with b -> []b true at every reachable world."""
    if not verify_button(system, w, b):
        return False
    mask = sentence_mask(system, b)
    boxed = _box_mask(system, b)
    reach = _reach(system, w)
    return mask & reach & ~boxed == 0


def verify_independent_buttons(system, w, buttons, dial):
    """Some reachable world has every button unpushed; from every reachable
    world, each unpushed button can be pushed without pushing the other
    as-yet-unpushed ones, while realizing any prescribed dial value."""
    buttons = tuple(buttons)
    dial = tuple(dial)
    boxed = [_box_mask(system, b) for b in buttons]
    dmasks = [sentence_mask(system, d) for d in dial]
    reach = _reach(system, w)
    if buttons and not any(
            all(not bm >> u & 1 for bm in boxed) for u in _bits(reach)):
        return False
    for u in _bits(reach):
        unpushed = [i for i, bm in enumerate(boxed) if not bm >> u & 1]
        for i in unpushed:
            keep = [boxed[k] for k in unpushed if k != i]
            for dm in dmasks:
                ok = any(boxed[i] >> v & 1
                         and all(not km >> v & 1 for km in keep)
                         and dm >> v & 1
                         for v in _bits(system.access[u]))
                if not ok:
                    return False
    return True


# ---------------------------------------------------------------------------
# Ratchets
# ---------------------------------------------------------------------------

def ratchet_volume_masks(system, stages):
    """Per volume level 0..n, the bitmask of worlds with that exact volume
    (volume = largest i with r_i true, 0 when none)."""
    stages = tuple(stages)
    smasks = [sentence_mask(system, r) for r in stages]
    full = _full(system)
    levels = []
    prev = full
    for i, m in enumerate(smasks):
        levels.append(prev & ~m)
        prev &= m
    levels.append(prev)
    return levels


def verify_ratchet(system, w, stages, dial):
    """Each stage an unpushed button at w; necessary downward implications;
    each volume enterable exactly (r_i without r_{i+1}); and companion
    independence in the finite form described in the module docstring."""
    stages = tuple(stages)
    dial = tuple(dial)
    if not stages:
        raise ControlError("a ratchet needs at least one stage")
    reach = _reach(system, w)
    smasks = [sentence_mask(system, r) for r in stages]
    boxed = [_box_mask(system, r) for r in stages]
    n = len(stages)
    # unpushed buttons at w
    for i in range(n):
        if boxed[i] >> w & 1:
            return False
        if not all(system.access[u] & boxed[i] for u in _bits(reach)):
            return False
    # r_i necessarily implies all earlier r_j
    for i in range(n):
        for j in range(i):
            if smasks[i] & reach & ~smasks[j]:
                return False
    # entering level i without overshooting, for i < n
    for i in range(n - 1):
        exact = smasks[i] & ~smasks[i + 1]
        for u in _bits(reach & ~smasks[i]):
            if not system.access[u] & exact:
                return False
    # companion independence, finite form
    levels = ratchet_volume_masks(system, stages)
    dmasks = [sentence_mask(system, d) for d in dial]
    for lev in levels:
        if not lev & reach:
            continue
        for dm in dmasks:
            if not lev & reach & dm:
                return False
    base_level = next(lev for lev in levels if lev >> w & 1)
    for dm in dmasks:
        if not system.access[w] & base_level & dm:
            return False
    return True


def verify_long_ratchet(system, w, stages):
    """Graded finite long ratchet: r_0 everywhere, downward implications,
    stages 1..L-1 unpushed buttons at w, single steps possible, and no
    reachable world satisfies the top stage."""
    stages = tuple(stages)
    if len(stages) < 2:
        raise ControlError("a long ratchet needs stages r_0..r_L with L >= 1")
    reach = _reach(system, w)
    smasks = [sentence_mask(system, r) for r in stages]
    top = len(stages) - 1
    if reach & ~smasks[0]:
        return False
    if smasks[top] & reach:
        return False
    for i in range(1, len(stages)):
        if smasks[i] & reach & ~smasks[i - 1]:
            return False
    boxed = [_box_mask(system, r) for r in stages]
    for i in range(1, top):
        if boxed[i] >> w & 1:
            return False
        if not all(system.access[u] & boxed[i] for u in _bits(reach)):
            return False
    for i in range(top):
        exact = smasks[i] & (~smasks[i + 1] if i + 1 <= top else _full(system))
        for u in _bits(reach & ~smasks[i]):
            if not system.access[u] & exact:
                return False
    return True


def long_ratchet_extract(stages, n, m):
    """Simulated ratchet R_k = r_{m*k} and mod-m dial over the long-ratchet
    volume, built from volume-interval sentences r_v & ~r_{v+1}.  Stages that
    are literally bottom (the truncation's out-of-reach tail) simplify away."""
    stages = tuple(stages)
    top = len(stages) - 1
    if m < 1 or n < 0:
        raise ControlError("need m >= 1 and n >= 0")
    if m * n > top:
        raise ControlError(f"need m*n <= {top}, got {m * n}")
    ratchet = tuple(stages[m * k] for k in range(1, n + 1))
    dial = []
    for j in range(m):
        parts = []
        for v in range(j, top + 1, m):
            cur = stages[v]
            nxt = stages[v + 1] if v + 1 <= top else BOT
            if cur == BOT:
                continue
            parts.append(cur if nxt == BOT else And(cur, Not(nxt)))
        dial.append(disj(parts))
    return ratchet, tuple(dial)


# ---------------------------------------------------------------------------
# Certificates
# ---------------------------------------------------------------------------

def certify_switches(system, w, family):
    ok = verify_independent_switches(system, w, family)
    return ControlCertificate("switches", tuple(family), system, w, ok)


def certify_dial(system, family, base_world=0):
    ok = verify_dial(system, family)
    return ControlCertificate("dial", tuple(family), system, base_world, ok)


def certify_buttons(system, w, buttons, dial_cert):
    dial_cert.require_verified()
    ok = verify_independent_buttons(system, w, buttons, dial_cert.formulas)
    return ControlCertificate("buttons", tuple(buttons), system, w, ok,
                              companion=dial_cert)


def certify_ratchet(system, w, stages, dial_cert):
    dial_cert.require_verified()
    ok = verify_ratchet(system, w, stages, dial_cert.formulas)
    return ControlCertificate("ratchet", tuple(stages), system, w, ok,
                              companion=dial_cert)


def certify_long_ratchet(system, w, stages):
    ok = verify_long_ratchet(system, w, stages)
    return ControlCertificate("long-ratchet", tuple(stages), system, w, ok)


def dial_certificate_from_switches(cert):
    """Convert a verified independent switch family into a dial certificate;
    the output is re-verified."""
    cert.require_verified()
    if cert.kind != "switches":
        raise ControlError(f"expected a switches certificate, got {cert.kind}")
    return certify_dial(cert.system, switches_to_dial(cert.formulas),
                        cert.base_world)


def switch_certificate_from_dial(cert, m):
    """Convert a verified dial into m independent switches; re-verified."""
    cert.require_verified()
    if cert.kind != "dial":
        raise ControlError(f"expected a dial certificate, got {cert.kind}")
    family = dial_to_switches(cert.formulas, m)
    return certify_switches(cert.system, cert.base_world, family)
