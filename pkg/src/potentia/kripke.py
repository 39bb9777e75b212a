"""Finite propositional Kripke frames and models.

Frames store the accessibility relation as per-world bitmasks, so evaluation
of a propositional modal formula is a single recursion producing the bitmask
of worlds where it holds.  Exact frame validity is decided by exhausting all
valuations of the formula's variables; large valuation spaces are scanned in
chunks with numpy.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .formula import (And, Bot, Box, Diamond, Iff, Implies, Not, Or, Top, Var,
    FormulaError, prop_variables)


class FrameError(ValueError):
    pass


@dataclass(frozen=True)
class Frame:
    """worldCount worlds; access[w] is the bitmask of worlds w accesses."""

    world_count: int
    access: tuple

    def __post_init__(self):
        if self.world_count < 1:
            raise FrameError("frame needs at least one world")
        acc = tuple(int(m) for m in self.access)
        if len(acc) != self.world_count:
            raise FrameError("access row count does not match world count")
        full = (1 << self.world_count) - 1
        for m in acc:
            if m & ~full:
                raise FrameError("access mask names a world out of range")
        object.__setattr__(self, "access", acc)

    @classmethod
    def from_pairs(cls, world_count, pairs):
        rows = [0] * world_count
        for a, b in pairs:
            rows[a] |= 1 << b
        return cls(world_count, tuple(rows))

    @classmethod
    def from_matrix(cls, matrix):
        n = len(matrix)
        rows = []
        for row in matrix:
            if len(row) != n:
                raise FrameError("access matrix is not square")
            rows.append(sum(1 << j for j, v in enumerate(row) if v))
        return cls(n, tuple(rows))

    def pairs(self):
        return [(w, u) for w in range(self.world_count)
                for u in range(self.world_count) if self.access[w] >> u & 1]


@dataclass(frozen=True)
class KripkeModel:
    frame: Frame
    valuation: tuple          # per world, frozenset of true variable indices
    var_count: int

    def __post_init__(self):
        val = tuple(frozenset(v) for v in self.valuation)
        if len(val) != self.frame.world_count:
            raise FrameError("valuation length does not match world count")
        for v in val:
            for idx in v:
                if not 0 <= idx < self.var_count:
                    raise FrameError(f"variable index {idx} out of range")
        object.__setattr__(self, "valuation", val)

    def var_mask(self, index):
        return sum(1 << w for w, v in enumerate(self.valuation) if index in v)


@dataclass(frozen=True)
class FrameProperties:
    reflexive: bool
    transitive: bool
    convergent: bool
    linear_preorder: bool
    complete: bool


@dataclass(frozen=True)
class ClusterDecomposition:
    cluster_of: tuple         # cluster id per world
    clusters: tuple           # tuple of tuples of world indices
    quotient: tuple           # per cluster, bitmask of accessed clusters


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def _mask_eval(phi, var_masks, access, full, memo):
    key = id(phi)
    if key in memo:
        return memo[key]
    if isinstance(phi, Top):
        out = full
    elif isinstance(phi, Bot):
        out = 0
    elif isinstance(phi, Var):
        out = var_masks.get(phi.index, 0)
    elif isinstance(phi, Not):
        out = full & ~_mask_eval(phi.sub, var_masks, access, full, memo)
    elif isinstance(phi, And):
        out = (_mask_eval(phi.left, var_masks, access, full, memo)
               & _mask_eval(phi.right, var_masks, access, full, memo))
    elif isinstance(phi, Or):
        out = (_mask_eval(phi.left, var_masks, access, full, memo)
               | _mask_eval(phi.right, var_masks, access, full, memo))
    elif isinstance(phi, Implies):
        out = ((full & ~_mask_eval(phi.left, var_masks, access, full, memo))
               | _mask_eval(phi.right, var_masks, access, full, memo))
    elif isinstance(phi, Iff):
        a = _mask_eval(phi.left, var_masks, access, full, memo)
        b = _mask_eval(phi.right, var_masks, access, full, memo)
        out = full & ~(a ^ b)
    elif isinstance(phi, Diamond):
        sub = _mask_eval(phi.sub, var_masks, access, full, memo)
        out = 0
        for w in range(len(access)):
            if access[w] & sub:
                out |= 1 << w
    elif isinstance(phi, Box):
        sub = _mask_eval(phi.sub, var_masks, access, full, memo)
        out = 0
        for w in range(len(access)):
            if access[w] & sub == access[w]:
                out |= 1 << w
    else:
        raise FormulaError(f"not a propositional modal formula: {phi!r}")
    memo[key] = out
    return out


def truth_mask(model, phi):
    """Bitmask of worlds where phi holds in the model."""
    n = model.frame.world_count
    var_masks = {i: model.var_mask(i) for i in prop_variables(phi)}
    return _mask_eval(phi, var_masks, model.frame.access, (1 << n) - 1, {})


def eval_prop(model, world, phi):
    """Standard Kripke satisfaction at a world."""
    if not 0 <= world < model.frame.world_count:
        raise FrameError(f"world {world} out of range")
    return bool(truth_mask(model, phi) >> world & 1)


# ---------------------------------------------------------------------------
# Valuation scans
# ---------------------------------------------------------------------------

_NUMPY_THRESHOLD = 1 << 8
_CHUNK = 1 << 20


def _scan_python(frame, phi, var_indices, start, stop):
    n = frame.world_count
    full = (1 << n) - 1
    for i in range(start, stop):
        var_masks = {v: (i >> (k * n)) & full for k, v in enumerate(var_indices)}
        mask = _mask_eval(phi, var_masks, frame.access, full, {})
        if mask != full:
            return i
    return -1


def _numpy_eval(phi, var_arrays, access, full, memo):
    key = id(phi)
    if key in memo:
        return memo[key]
    if isinstance(phi, Top):
        out = np.full_like(next(iter(var_arrays.values())), full)
    elif isinstance(phi, Bot):
        out = np.zeros_like(next(iter(var_arrays.values())))
    elif isinstance(phi, Var):
        out = var_arrays[phi.index]
    elif isinstance(phi, Not):
        out = full & ~_numpy_eval(phi.sub, var_arrays, access, full, memo)
    elif isinstance(phi, And):
        out = (_numpy_eval(phi.left, var_arrays, access, full, memo)
               & _numpy_eval(phi.right, var_arrays, access, full, memo))
    elif isinstance(phi, Or):
        out = (_numpy_eval(phi.left, var_arrays, access, full, memo)
               | _numpy_eval(phi.right, var_arrays, access, full, memo))
    elif isinstance(phi, Implies):
        out = ((full & ~_numpy_eval(phi.left, var_arrays, access, full, memo))
               | _numpy_eval(phi.right, var_arrays, access, full, memo))
    elif isinstance(phi, Iff):
        a = _numpy_eval(phi.left, var_arrays, access, full, memo)
        b = _numpy_eval(phi.right, var_arrays, access, full, memo)
        out = full & ~(a ^ b)
    elif isinstance(phi, Diamond):
        sub = _numpy_eval(phi.sub, var_arrays, access, full, memo)
        out = np.zeros_like(sub)
        for w, acc in enumerate(access):
            out |= ((sub & acc) != 0).astype(sub.dtype) << w
    elif isinstance(phi, Box):
        sub = _numpy_eval(phi.sub, var_arrays, access, full, memo)
        out = np.zeros_like(sub)
        for w, acc in enumerate(access):
            out |= ((sub & acc) == acc).astype(sub.dtype) << w
    else:
        raise FormulaError(f"not a propositional modal formula: {phi!r}")
    memo[key] = out
    return out


def _scan_numpy(frame, phi, var_indices, total):
    n = frame.world_count
    full = (1 << n) - 1
    dtype = np.uint8 if n <= 8 else np.uint16 if n <= 16 else np.int64
    for start in range(0, total, _CHUNK):
        stop = min(start + _CHUNK, total)
        idx = np.arange(start, stop, dtype=np.int64)
        var_arrays = {v: ((idx >> (k * n)) & full).astype(dtype)
                      for k, v in enumerate(var_indices)}
        mask = _numpy_eval(phi, var_arrays, frame.access, full, {})
        failing = np.nonzero(mask != full)[0]
        if failing.size:
            return start + int(failing[0])
    return -1


def find_failing_valuation(frame, phi):
    """Least valuation index i (variable k's mask occupies bits [k*n,(k+1)*n)
    of i) under which phi fails somewhere, together with the least failing
    world; None when phi is valid on the frame."""
    var_indices = prop_variables(phi)
    n = frame.world_count
    total = 1 << (len(var_indices) * n)
    if total > _NUMPY_THRESHOLD:
        i = _scan_numpy(frame, phi, var_indices, total)
    else:
        i = _scan_python(frame, phi, var_indices, 0, total)
    if i < 0:
        return None
    full = (1 << n) - 1
    var_masks = {v: (i >> (k * n)) & full for k, v in enumerate(var_indices)}
    mask = _mask_eval(phi, var_masks, frame.access, full, {})
    world = ((mask ^ full) & -(mask ^ full)).bit_length() - 1
    return i, world


def valuation_from_index(frame, phi, index):
    """KripkeModel carrying valuation `index` for phi's variables."""
    var_indices = prop_variables(phi)
    n = frame.world_count
    full = (1 << n) - 1
    val = [set() for _ in range(n)]
    for k, v in enumerate(var_indices):
        mask = (index >> (k * n)) & full
        for w in range(n):
            if mask >> w & 1:
                val[w].add(v)
    var_count = (max(var_indices) + 1) if var_indices else 1
    return KripkeModel(frame, tuple(frozenset(v) for v in val), var_count)


def frame_valid(frame, phi):
    """True iff phi holds at every world under every valuation of its
    variables over the frame (exact, by valuation exhaustion)."""
    return find_failing_valuation(frame, phi) is None


# ---------------------------------------------------------------------------
# Frame properties, clusters, recognisers
# ---------------------------------------------------------------------------

def frame_properties(frame):
    n = frame.world_count
    acc = frame.access
    full = (1 << n) - 1
    reflexive = all(acc[w] >> w & 1 for w in range(n))
    transitive = True
    for w in range(n):
        m = acc[w]
        reach = m
        u = m
        while u:
            j = (u & -u).bit_length() - 1
            u &= u - 1
            reach |= acc[j]
        if reach != m:
            transitive = False
            break
    convergent = True
    for w in range(n):
        targets = [u for u in range(n) if acc[w] >> u & 1]
        for a in targets:
            for b in targets:
                if not any(acc[a] >> z & 1 and acc[b] >> z & 1 for z in range(n)):
                    convergent = False
    linear = reflexive and transitive and all(
        acc[u] >> v & 1 or acc[v] >> u & 1 for u in range(n) for v in range(n))
    complete = all(acc[w] == full for w in range(n))
    return FrameProperties(reflexive, transitive, convergent, linear, complete)


def clusters(frame):
    """Mutual-access classes of a preorder frame with the induced quotient."""
    props = frame_properties(frame)
    if not (props.reflexive and props.transitive):
        raise FrameError("cluster decomposition requires a preorder frame")
    n = frame.world_count
    acc = frame.access
    cluster_of = [-1] * n
    groups = []
    for w in range(n):
        if cluster_of[w] >= 0:
            continue
        cid = len(groups)
        members = [u for u in range(n)
                   if acc[w] >> u & 1 and acc[u] >> w & 1]
        for u in members:
            cluster_of[u] = cid
        groups.append(tuple(members))
    quotient = []
    for members in groups:
        w = members[0]
        mask = 0
        for d, other in enumerate(groups):
            if acc[w] >> other[0] & 1:
                mask |= 1 << d
        quotient.append(mask)
    return ClusterDecomposition(tuple(cluster_of), tuple(groups), tuple(quotient))


def is_pre_boolean_algebra(frame):
    """True iff the cluster quotient is isomorphic to the powerset lattice of
    its minimal-above-bottom elements."""
    dec = clusters(frame)
    k = len(dec.clusters)
    # unique bottom cluster accessing everything
    bottoms = [c for c in range(k) if dec.quotient[c] == (1 << k) - 1]
    if len(bottoms) != 1:
        return False
    bottom = bottoms[0]
    leq = lambda a, b: bool(dec.quotient[a] >> b & 1)
    atoms = [c for c in range(k) if c != bottom
             and all(not leq(d, c) for d in range(k) if d not in (c, bottom))]
    atom_sets = {}
    for c in range(k):
        atom_sets[c] = frozenset(a for a in atoms if leq(a, c))
    if len(set(atom_sets.values())) != k or k != 1 << len(atoms):
        return False
    return all((atom_sets[a] <= atom_sets[b]) == leq(a, b)
               for a in range(k) for b in range(k))


def is_linear_preorder(frame):
    return frame_properties(frame).linear_preorder


def is_complete_frame(frame):
    return frame_properties(frame).complete


def is_preorder(frame):
    p = frame_properties(frame)
    return p.reflexive and p.transitive


# ---------------------------------------------------------------------------
# Canonical frame generation
# ---------------------------------------------------------------------------

def complete_frame(n):
    """All worlds access all worlds."""
    if n < 1:
        raise FrameError("size must be positive")
    full = (1 << n) - 1
    return Frame(n, tuple(full for _ in range(n)))


def linear_frame(cluster_count, cluster_size):
    """Chain of cluster_count clusters of uniform size; worlds ordered by
    (cluster index, intra-cluster index)."""
    if cluster_count < 1 or cluster_size < 1:
        raise FrameError("sizes must be positive")
    n = cluster_count * cluster_size
    rows = []
    for c in range(cluster_count):
        mask = sum(1 << w for w in range(c * cluster_size, n))
        rows.extend([mask] * cluster_size)
    return Frame(n, tuple(rows))


def preboolean_frame(atom_count, cluster_size):
    """Clusters indexed by subsets of the atoms, ordered by (popcount, value);
    w^a accesses w^b iff a is a subset of b."""
    if atom_count < 0 or cluster_size < 1:
        raise FrameError("sizes must be positive")
    subsets = sorted(range(1 << atom_count), key=lambda s: (bin(s).count("1"), s))
    n = len(subsets) * cluster_size
    rows = []
    for a in subsets:
        mask = 0
        for j, b in enumerate(subsets):
            if a & b == a:
                for t in range(cluster_size):
                    mask |= 1 << (j * cluster_size + t)
        rows.extend([mask] * cluster_size)
    return Frame(n, tuple(rows))


def generate_frame(kind, **kw):
    """Canonical frame of a requested shape: complete(n), linear(clusters,
    size), preboolean(atoms, size)."""
    if kind == "complete":
        return complete_frame(kw["n"])
    if kind == "linear":
        return linear_frame(kw["clusters"], kw["size"])
    if kind == "preboolean":
        return preboolean_frame(kw["atoms"], kw["size"])
    raise FrameError(f"unknown frame class {kind!r}")


# ---------------------------------------------------------------------------
# Exhaustive preorder enumeration (finite model property for S4)
# ---------------------------------------------------------------------------

PREORDER_EXHAUSTIVE_CAP = 5


@lru_cache(maxsize=None)
def all_preorders(n):
    """All reflexive transitive frames on n labelled worlds, in lexicographic
    order of the off-diagonal adjacency encoding.  Feasible for n <= 5."""
    if n > PREORDER_EXHAUSTIVE_CAP:
        raise FrameError(f"exhaustive preorder enumeration capped at "
                         f"{PREORDER_EXHAUSTIVE_CAP} worlds")
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    out = []
    for code in range(1 << len(pairs)):
        rows = [1 << i for i in range(n)]
        for bit, (i, j) in enumerate(pairs):
            if code >> bit & 1:
                rows[i] |= 1 << j
        ok = True
        for i in range(n):
            reach = rows[i]
            u = rows[i]
            while u:
                j = (u & -u).bit_length() - 1
                u &= u - 1
                reach |= rows[j]
            if reach != rows[i]:
                ok = False
                break
        if ok:
            out.append(Frame(n, tuple(rows)))
    return tuple(out)


def sampled_preorders(n, count, seed=0):
    """Deterministic sample of preorders on n worlds: transitive closures of
    seeded random digraphs, deduplicated, sorted by access encoding."""
    import random
    rng = random.Random(f"{seed}:{n}")
    seen = set()
    for _ in range(count * 4):
        rows = [1 << i | rng.getrandbits(n) for i in range(n)]
        changed = True
        while changed:
            changed = False
            for i in range(n):
                reach = rows[i]
                u = rows[i]
                while u:
                    j = (u & -u).bit_length() - 1
                    u &= u - 1
                    reach |= rows[j]
                if reach != rows[i]:
                    rows[i] = reach
                    changed = True
        seen.add(tuple(rows))
        if len(seen) >= count:
            break
    return tuple(Frame(n, rows) for rows in sorted(seen))
