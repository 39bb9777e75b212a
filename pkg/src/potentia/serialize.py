"""JSON file formats for systems, certificates, frames and models.

System files:  {"signature": {"relations": [{"name", "arity"}]},
                "worlds": [{"id", "domain": [...], "relations": {...}}],
                "access": "substructure" | [[fromId, toId], ...]}
Certificates:  {"kind", "base_world", "formulas": [texts],
                "companion": {...}?}; verifiers re-run on load.
Frames/models: {"worlds": n, "access": [[i, j], ...],
                "valuation": {"worldIndex": [varIndices]}} with integer keys
                as strings, pair lists, and the failing world for
                countermodels.
"""

from __future__ import annotations

import json

from .formula import Signature, parse_fo, print_fo
from .kripke import Frame, KripkeModel
from .potentialist import Structure, System, check_potentialist, kripke_system
from .control import (ControlCertificate, certify_buttons, certify_dial,
    certify_long_ratchet, certify_ratchet, certify_switches)
from .synthesis import Countermodel


class FormatError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Systems
# ---------------------------------------------------------------------------

def system_to_dict(system):
    worlds = []
    for i, s in enumerate(system.worlds):
        worlds.append({
            "id": system.world_ids[i],
            "domain": list(s.domain),
            "relations": {name: sorted(list(t) for t in s.rel(name))
                          for name, _ in system.signature.relations},
        })
    if system.mode == "substructure":
        access = "substructure"
    else:
        ids = system.world_ids
        access = [[ids[w], ids[u]] for w in range(len(system.worlds))
                  for u in system.accessible(w)]
    return {
        "signature": {"relations": [{"name": n, "arity": a}
                                    for n, a in system.signature.relations]},
        "worlds": worlds,
        "access": access,
        "potentialist": system.potentialist,
    }


def system_from_dict(data):
    try:
        sig = Signature(tuple((r["name"], r["arity"])
                              for r in data["signature"]["relations"]))
        ids = [w["id"] for w in data["worlds"]]
        worlds = [Structure(sig, tuple(w["domain"]),
                            {name: [tuple(t) for t in ts]
                             for name, ts in w.get("relations", {}).items()})
                  for w in data["worlds"]]
        access = data["access"]
    except (KeyError, TypeError) as e:
        raise FormatError(f"malformed system file: {e}") from e
    if access == "substructure":
        return check_potentialist(worlds, mode="substructure", world_ids=ids)
    index = {ident: i for i, ident in enumerate(ids)}
    try:
        pairs = [(index[a], index[b]) for a, b in access]
    except KeyError as e:
        raise FormatError(f"access names unknown world {e}") from e
    if data.get("potentialist", False):
        return check_potentialist(worlds, access=pairs, world_ids=ids)
    return kripke_system(worlds, pairs, world_ids=ids)


def save_system(system, path):
    with open(path, "w") as fh:
        json.dump(system_to_dict(system), fh, indent=1)


def load_system(path):
    with open(path) as fh:
        return system_from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# Certificates
# ---------------------------------------------------------------------------

def certificate_to_dict(cert):
    out = {
        "kind": cert.kind,
        "base_world": cert.system.world_ids[cert.base_world],
        "formulas": [print_fo(f) for f in cert.formulas],
    }
    if cert.companion is not None:
        out["companion"] = certificate_to_dict(cert.companion)
    return out


def certificate_from_dict(data, system):
    """Parse and re-verify a certificate against a system."""
    try:
        kind = data["kind"]
        base = system.world_index(data["base_world"])
        formulas = tuple(parse_fo(t, system.signature)
                         for t in data["formulas"])
    except (KeyError, TypeError) as e:
        raise FormatError(f"malformed certificate: {e}") from e
    if kind == "switches":
        return certify_switches(system, base, formulas)
    if kind == "dial":
        return certify_dial(system, formulas, base)
    if kind == "long-ratchet":
        return certify_long_ratchet(system, base, formulas)
    if kind in ("buttons", "ratchet"):
        if "companion" not in data:
            raise FormatError(f"{kind} certificate needs a companion dial")
        dial = certificate_from_dict(data["companion"], system)
        if not dial.verified:
            return ControlCertificate(kind, formulas, system, base, False,
                                      companion=dial)
        make = certify_buttons if kind == "buttons" else certify_ratchet
        return make(system, base, formulas, dial)
    raise FormatError(f"unknown certificate kind {kind!r}")


def save_certificate(cert, path):
    with open(path, "w") as fh:
        json.dump(certificate_to_dict(cert), fh, indent=1)


def load_certificate(path, system):
    with open(path) as fh:
        return certificate_from_dict(json.load(fh), system)


# ---------------------------------------------------------------------------
# Frames and countermodels
# ---------------------------------------------------------------------------

def model_to_dict(model):
    frame = model.frame
    return {
        "worlds": frame.world_count,
        "access": [list(p) for p in frame.pairs()],
        "valuation": {str(w): sorted(model.valuation[w])
                      for w in range(frame.world_count)},
    }


def model_from_dict(data):
    try:
        frame = Frame.from_pairs(data["worlds"],
                                 [tuple(p) for p in data["access"]])
        val = [frozenset(data["valuation"].get(str(w), ()))
               for w in range(data["worlds"])]
    except (KeyError, TypeError) as e:
        raise FormatError(f"malformed model: {e}") from e
    var_count = max((v + 1 for vs in val for v in vs), default=1)
    return KripkeModel(frame, tuple(val), var_count)


def countermodel_to_dict(cm):
    out = model_to_dict(cm.model)
    out["failing_world"] = cm.world
    out["frame_class"] = cm.frame_class
    return out


def countermodel_from_dict(data):
    return Countermodel(model_from_dict(data), data["failing_world"],
                        data.get("frame_class", "preorder"))
