import pytest
from hypothesis import given, settings, strategies as st

from potentia.formula import (SET_SIGNATURE, Signature, Substitution,
    enumerate_sentences, parse_fo, parse_prop)
from potentia.potentialist import (EvalError, Structure, ValidationError,
    check_potentialist, check_translation, coherence, converse_barcan_check,
    eval_fo, kripke_system, open_formula_pool, refute_validity, scheme_check,
    sentence_mask, sentence_pool)
from potentia.settheory import build_rank_system, build_v, \
    membership_structure, ordinal_count_at_least
from potentia.theories import axiom

from conftest import naive_eval_fo


def struct(domain, mem=()):
    return Structure(SET_SIGNATURE, domain, {"mem": mem})


# ---------------------------------------------------------------------------
# Structure and system validation
# ---------------------------------------------------------------------------

def test_structure_validation():
    with pytest.raises(ValidationError):
        struct((0, 1), [(0,)])                       # arity
    with pytest.raises(ValidationError):
        struct((0, 1), [(0, 7)])                     # element outside domain
    with pytest.raises(ValidationError):
        Structure(SET_SIGNATURE, (0,), {"other": []})


def test_check_potentialist_single_world():
    s = check_potentialist([struct((0,))], access=[(0, 0)])
    assert s.potentialist and len(s) == 1


def test_check_potentialist_rank_chain(rank3):
    assert rank3.potentialist
    assert rank3.properties().linear_preorder


def test_check_potentialist_atomic_disagreement():
    a = struct((0, 1), [(0, 1)])
    b = struct((0, 1), [])
    with pytest.raises(ValidationError) as err:
        check_potentialist([a, b], access=[(0, 0), (1, 1), (0, 1)])
    assert err.value.kind == "atomic-disagreement"


def test_check_potentialist_named_errors():
    a, b = struct((0,)), struct((0, 1))
    with pytest.raises(ValidationError) as err:
        check_potentialist([a, b], access=[(0, 0), (0, 1)])
    assert err.value.kind == "non-reflexive"
    c = struct((0, 1, 2))
    with pytest.raises(ValidationError) as err:
        check_potentialist([a, b, c], access=[(0, 0), (1, 1), (2, 2),
                                              (0, 1), (1, 2)])
    assert err.value.kind == "non-transitive"
    with pytest.raises(ValidationError) as err:
        check_potentialist([b, a], access=[(0, 0), (1, 1), (0, 1)])
    assert err.value.kind == "shrinking-domain"


def test_substructure_mode_computes_access():
    worlds = [struct(()), struct((0,)), struct((0, 1), [(0, 1)])]
    s = check_potentialist(worlds, mode="substructure")
    assert s.access == (0b111, 0b110, 0b100)


# ---------------------------------------------------------------------------
# eval_fo
# ---------------------------------------------------------------------------

def test_eval_empty_set_exists(rank3):
    phi = parse_fo("exists x . forall y . ~mem(y,x)")
    assert eval_fo(rank3, 1, phi)          # V_1 contains the empty set
    assert not eval_fo(rank3, 0, phi)      # V_0 is empty


def test_eval_diamond_future_member(rank3):
    # {#0} appears one rank up: from V_1, possibly something contains it
    phi = parse_fo("<> exists x . mem(#0, x)")
    assert eval_fo(rank3, 1, phi)
    assert not eval_fo(rank3, 1, parse_fo("exists x . mem(#0, x)"))


def test_eval_box_top(rank3):
    assert eval_fo(rank3, 0, parse_fo("[] true"))


def test_eval_parameter_errors(rank3):
    with pytest.raises(EvalError):
        eval_fo(rank3, 0, parse_fo("mem(#0, #1)"))   # V_0 has no elements
    with pytest.raises(EvalError):
        eval_fo(rank3, 3, parse_fo("mem(#0, #99)"))


def test_guarded_and_unguarded_agree(rank3):
    guarded = parse_fo("forall x . mem(x, #3) -> mem(x, #3)")
    assert eval_fo(rank3, 3, guarded)
    mixed = parse_fo("exists x . mem(x, #3) & ~mem(#3, x)")
    assert eval_fo(rank3, 3, mixed) == naive_eval_fo(
        rank3.worlds, rank3.frame().pairs(), 3, mixed)


@given(data=st.data())
@settings(max_examples=80, deadline=None)
def test_eval_matches_naive_evaluator(rank3, data):
    sents = list(enumerate_sentences(SET_SIGNATURE, 2, 6))
    phi = data.draw(st.sampled_from(sents))
    w = data.draw(st.integers(0, 3))
    assert eval_fo(rank3, w, phi) == naive_eval_fo(
        rank3.worlds, rank3.frame().pairs(), w, phi)


@given(data=st.data())
@settings(max_examples=40, deadline=None)
def test_modal_eval_matches_naive_evaluator(rank3, data):
    base = list(enumerate_sentences(SET_SIGNATURE, 1, 4))
    from potentia.formula import Box, Diamond, Implies
    phi = data.draw(st.sampled_from(base))
    shape = data.draw(st.sampled_from(["dia", "box", "mix"]))
    if shape == "dia":
        phi = Diamond(phi)
    elif shape == "box":
        phi = Box(phi)
    else:
        phi = Implies(Diamond(phi), Box(Diamond(phi)))
    w = data.draw(st.integers(0, 3))
    assert eval_fo(rank3, w, phi) == naive_eval_fo(
        rank3.worlds, rank3.frame().pairs(), w, phi)


# ---------------------------------------------------------------------------
# Coherence and the limit
# ---------------------------------------------------------------------------

def test_coherence_of_rank_chain(rank3):
    rep = coherence(rank3.worlds)
    assert rep.coherent
    assert rep.limit.domain == rank3.worlds[3].domain


def test_coherence_disjoint_domains():
    rep = coherence([struct((0,)), struct((1,))])
    assert not rep.coherent and rep.reason == "unaccommodated-element"


def test_coherence_atomic_disagreement():
    rep = coherence([struct((0, 1), [(0, 1)]), struct((0, 1), [])])
    assert not rep.coherent and rep.reason == "atomic-disagreement"


def test_coherence_all_transitive_subsets_of_v2():
    # brute-force oracle: transitive subsets of V_2 = {} , {0}, {0,1}
    from potentia.settheory import transitive_subset_masks, _mask_codes
    masks = transitive_subset_masks(2)
    assert sorted(masks) == [0b00, 0b01, 0b11]
    worlds = [membership_structure(_mask_codes(m)) for m in masks]
    rep = coherence(worlds)
    assert rep.coherent
    assert rep.limit.domain == (0, 1)


# ---------------------------------------------------------------------------
# Translation theorem
# ---------------------------------------------------------------------------

def test_check_translation_examples(rank3):
    assert check_translation(rank3, parse_fo("exists x . forall y . ~mem(y,x)"))
    assert check_translation(rank3, parse_fo("false"))
    assert check_translation(rank3, parse_fo("forall x . exists y . mem(x,y)"))


def test_check_translation_rejects_incoherent():
    sys = kripke_system([struct((0,)), struct((1,))],
                        [(0, 0), (1, 1)])
    with pytest.raises(ValidationError):
        check_translation(sys, parse_fo("false"))


def test_check_translation_small_systems_exhaustive(rank3):
    from potentia.settheory import build_transitive_system
    systems = [build_rank_system(2), build_transitive_system(2), rank3]
    sents = list(enumerate_sentences(SET_SIGNATURE, 3, 6))
    for system in systems:
        assert len(system.worlds) <= 4
        assert all(len(w.domain) <= 6 for w in system.worlds)
        for psi in sents:
            assert check_translation(system, psi)


# ---------------------------------------------------------------------------
# Refutation and scheme checks
# ---------------------------------------------------------------------------

def test_refute_validity_trivial(rank3):
    sigma = Substitution({0: parse_fo("exists x . mem(x,x)")}.items())
    assert refute_validity(rank3, 0, parse_prop("true"), sigma) == "holds"
    assert refute_validity(rank3, 0, axiom("T"), sigma) == "holds"


def test_scheme_check_s4_axioms(rank3):
    pool = sentence_pool(SET_SIGNATURE, extras=(ordinal_count_at_least(2),),
                         max_size=6, limit=400)
    for name in ("K", "T", "4", ".3"):
        rep = scheme_check(rank3, axiom(name), pool, trials=30)
        assert rep.ok, (name, rep.failures[:3])


def test_scheme_check_deterministic(rank3):
    pool = sentence_pool(SET_SIGNATURE, max_size=5, limit=50)
    a = scheme_check(rank3, axiom("T"), pool, trials=10, seed=7)
    b = scheme_check(rank3, axiom("T"), pool, trials=10, seed=7)
    assert a == b


def test_scheme_check_reports_failures():
    # an artificial non-reflexive-in-spirit failure: axiom 5 on a rank chain
    S = build_rank_system(2)
    pool = (ordinal_count_at_least(1),)
    rep = scheme_check(S, axiom("5"), pool, trials=1)
    assert not rep.ok


def test_converse_barcan(rank3):
    pool = open_formula_pool(SET_SIGNATURE, "y", max_qdepth=1, max_size=5,
                             limit=120)
    rep = converse_barcan_check(rank3, pool, trials=40)
    assert rep.ok


def test_sentence_mask_matches_eval(rank3):
    phi = ordinal_count_at_least(2)
    mask = sentence_mask(rank3, phi)
    for w in range(4):
        assert bool(mask >> w & 1) == eval_fo(rank3, w, phi)
