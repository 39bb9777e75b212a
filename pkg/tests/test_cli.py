import io
import json

import pytest

from potentia.cli import main
from potentia.hosts import build_switch_host
from potentia.control import certify_switches
from potentia.serialize import (certificate_from_dict, certificate_to_dict,
    countermodel_from_dict, countermodel_to_dict, load_certificate,
    load_system, model_from_dict, model_to_dict, save_certificate,
    save_system, system_from_dict, system_to_dict)
from potentia.settheory import build_rank_system, build_transitive_system
from potentia.synthesis import find_countermodel
from potentia.theories import axiom


def run(argv):
    out = io.StringIO()
    code = main(argv, out=out)
    return code, out.getvalue()


# ---------------------------------------------------------------------------
# Serialization round trips
# ---------------------------------------------------------------------------

def test_system_round_trip(rank3, tmp_path):
    path = tmp_path / "rank3.json"
    save_system(rank3, path)
    back = load_system(path)
    assert back.world_ids == rank3.world_ids
    assert back.potentialist
    assert back.access == rank3.access
    for a, b in zip(back.worlds, rank3.worlds):
        assert a.domain == b.domain and a.interpretation == b.interpretation


def test_substructure_system_round_trip(tmp_path):
    t = build_transitive_system(2)
    d = system_to_dict(t)
    assert d["access"] == "substructure"
    back = system_from_dict(d)
    assert back.access == t.access


def test_host_round_trip(host2, tmp_path):
    system, switches = host2
    back = system_from_dict(system_to_dict(system))
    assert not back.potentialist
    assert back.access == system.access


def test_certificate_round_trip(host2, tmp_path):
    system, switches = host2
    cert = certify_switches(system, 0, switches)
    path = tmp_path / "cert.json"
    save_certificate(cert, path)
    back = load_certificate(path, system)
    assert back.verified and back.kind == "switches"
    assert back.formulas == cert.formulas


def test_ratchet_certificate_round_trip(rank4, tmp_path):
    from potentia.control import certify_dial, certify_ratchet
    from potentia.settheory import rank_ratchet
    stages, dial = rank_ratchet(1, 2, 4)
    cert = certify_ratchet(rank4, 0, stages, certify_dial(rank4, dial, 0))
    back = certificate_from_dict(certificate_to_dict(cert), rank4)
    assert back.verified and back.companion.verified
    assert back.formulas == stages


def test_model_round_trip():
    cm = find_countermodel(axiom(".3"), "S4.2", 8)
    back = model_from_dict(model_to_dict(cm.model))
    assert back == cm.model
    cm2 = countermodel_from_dict(countermodel_to_dict(cm))
    assert cm2 == cm


# ---------------------------------------------------------------------------
# CLI verbs
# ---------------------------------------------------------------------------

def test_cli_parse():
    code, out = run(["parse", "--prop", "<>[]p0->p0"])
    assert code == 0 and out.strip() == "<> [] p0 -> p0"
    code, out = run(["parse", "--fo", "exists x . mem(x,x)"])
    assert code == 0 and out.strip() == "exists x . mem(x, x)"


def test_cli_parse_error_exit2():
    code, out = run(["parse", "--prop", "p0 ->"])
    assert code == 2 and "syntax error" in out


def test_cli_translate_golden():
    code, out = run(["translate", "exists x . forall y . ~mem(y,x)"])
    assert code == 0
    assert out.strip() == "<> exists x . [] forall y . ~ mem(y, x)"


def test_cli_decide_axiom5_s43():
    code, out = run(["decide", "--formula", "<>[]p0 -> p0",
                     "--theory", "S4.3", "--bound", "8"])
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "NONTHEOREM worlds=2 class=linear"


def test_cli_decide_theorem():
    code, out = run(["decide", "--formula", "[]p0 -> p0",
                     "--theory", "S5", "--bound", "8"])
    assert code == 0 and out.strip() == "THEOREM(bound=8)"


def test_cli_classify():
    code, out = run(["classify", "--formula",
                     "(<>p0 & <>p1) -> <>((p0 & <>p1) | (p1 & <>p0))",
                     "--bound", "6"])
    assert code == 0 and out.strip() == "S4.3"


def test_cli_demo_rank_and_frame(tmp_path):
    sysfile = str(tmp_path / "s.json")
    certfile = str(tmp_path / "c.json")
    code, out = run(["demo", "rank", "--N", "2",
                     "--out-system", sysfile, "--out-cert", certfile])
    assert code == 0, out
    code, out = run(["frame", "--system", sysfile])
    assert code == 0
    assert "linear_preorder=true" in out
    assert "convergent=true" in out


def test_cli_eval(tmp_path):
    sysfile = str(tmp_path / "s.json")
    run(["demo", "rank", "--N", "2", "--out-system", sysfile,
         "--out-cert", str(tmp_path / "c.json")])
    code, out = run(["eval", "--system", sysfile, "--world", "V1",
                     "--formula", "exists x . forall y . ~mem(y,x)"])
    assert code == 0 and out.strip() == "true"
    code, out = run(["eval", "--system", sysfile, "--world", "V0",
                     "--formula", "exists x . x = x"])
    assert code == 0 and out.strip() == "false"


def test_cli_verify_control(tmp_path):
    sysfile = str(tmp_path / "s.json")
    certfile = str(tmp_path / "c.json")
    run(["demo", "rank", "--N", "3", "--out-system", sysfile,
         "--out-cert", certfile])
    code, out = run(["verify-control", "--system", sysfile,
                     "--cert", certfile])
    assert code == 0 and "verified=true" in out
    # corrupt the certificate: duplicate stage breaks verification
    data = json.load(open(certfile))
    data["formulas"] = [data["formulas"][0], data["formulas"][0]]
    json.dump(data, open(certfile, "w"))
    code, out = run(["verify-control", "--system", sysfile,
                     "--cert", certfile])
    assert code == 3 and "verified=false" in out


def test_cli_demo_transitive(tmp_path):
    sysfile = str(tmp_path / "t.json")
    certfile = str(tmp_path / "tc.json")
    code, out = run(["demo", "transitive", "--N", "3",
                     "--out-system", sysfile, "--out-cert", certfile])
    assert code == 0
    assert "linear=false convergent=true" in out
    code, out = run(["frame", "--system", sysfile])
    assert "clusters=6" in out


def test_cli_synthesize_pipeline(tmp_path):
    sysfile = str(tmp_path / "t.json")
    certfile = str(tmp_path / "tc.json")
    run(["demo", "transitive", "--N", "3", "--out-system", sysfile,
         "--out-cert", certfile])
    code, out = run(["synthesize", "--system", sysfile, "--cert", certfile,
                     "--formula", "(<>p0 & <>p1) -> <>((p0 & <>p1) | (p1 & <>p0))",
                     "--theory", "S4.2", "--bound", "8"])
    assert code == 0, out
    assert "bisimulation=true" in out
    assert "refutation=fails" in out
    assert "sigma p0 :=" in out


def test_cli_synthesize_no_countermodel(tmp_path):
    sysfile = str(tmp_path / "t.json")
    certfile = str(tmp_path / "tc.json")
    run(["demo", "transitive", "--N", "3", "--out-system", sysfile,
         "--out-cert", certfile])
    code, out = run(["synthesize", "--system", sysfile, "--cert", certfile,
                     "--formula", "<>[]p0 -> []<>p0",
                     "--theory", "S4.2", "--bound", "8"])
    assert code == 0
    assert out.startswith("NO-COUNTERMODEL")


def test_cli_usage_error():
    code, _ = run(["decide", "--formula", "p0"])      # missing --theory
    assert code == 1


def test_cli_missing_file():
    code, out = run(["frame", "--system", "/nonexistent.json"])
    assert code == 2


def test_cli_deterministic_synthesize(tmp_path):
    sysfile = str(tmp_path / "t.json")
    certfile = str(tmp_path / "tc.json")
    run(["demo", "transitive", "--N", "3", "--out-system", sysfile,
         "--out-cert", certfile])
    args = ["synthesize", "--system", sysfile, "--cert", certfile,
            "--formula", "(<>p0 & <>p1) -> <>((p0 & <>p1) | (p1 & <>p0))",
            "--theory", "S4.2", "--bound", "8"]
    assert run(args) == run(args)


# ---------------------------------------------------------------------------
# Hosts
# ---------------------------------------------------------------------------

def test_switch_host_shape(host3):
    system, switches = host3
    assert len(system.worlds) == 8
    assert len(switches) == 3
    assert system.properties().complete
    assert not system.potentialist
