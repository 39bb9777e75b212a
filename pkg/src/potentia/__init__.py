"""Potentia: a workbench for potentialist Kripke semantics over finite
first-order structures, with control-statement verification (switches,
dials, buttons, ratchets) and countermodel-to-substitution synthesis for
S5, S4.2 and S4.3."""

from .formula import (Atom, And, BOT, Box, Bot, Diamond, Eq, Exists, Forall,
    FormulaError, Iff, Implies, Not, Or, Parameter, ParseError, Signature,
    SET_SIGNATURE, Substitution, TOP, Top, Var, Variable, parse_fo,
    parse_prop, potentialist_translation, print_fo, print_prop, subformulas,
    substitute)
from .kripke import (Frame, FrameProperties, KripkeModel, clusters,
    complete_frame, eval_prop, frame_properties, frame_valid,
    is_pre_boolean_algebra, linear_frame, preboolean_frame)
from .potentialist import (CoherenceReport, EvalError, PotentialistError,
    Structure, System, ValidationError, check_potentialist, check_translation,
    coherence, eval_fo, kripke_system, refute_validity, scheme_check)
from .control import (ControlCertificate, certify_buttons, certify_dial,
    certify_ratchet, certify_switches, dial_to_switches, long_ratchet_extract,
    switches_to_dial, verify_button, verify_dial, verify_independent_buttons,
    verify_independent_switches, verify_pure_button, verify_ratchet,
    verify_switch)
from .synthesis import (Association, Countermodel, ShapeError,
    SynthesisReport, find_countermodel, simulate_s42, simulate_s43,
    simulate_s5, synthesize, uniformize, verify_bisimulation)
from .settheory import (HFSet, build_rank_system, build_transitive_system,
    build_v, describe_set, height_dial, ordinal_count_at_least, parse_hf,
    rank_ratchet, transitive_buttons)
from .theories import Verdict, axiom, classify, corpus, decide

__version__ = "0.1.0"
