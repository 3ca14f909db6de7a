import json
import subprocess
import sys

import pytest

from fiberlog.cli import EXIT_IO, EXIT_OK, EXIT_REJECTED, EXIT_USAGE, main

from conftest import BIOLOGY_BUSINESS, CBT, ICD, METEOROLOGY, META_TYPING, PHYSICS, write_jsonl


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    lines = [json.loads(line) for line in out.splitlines() if line.strip()]
    return code, (lines[0] if len(lines) == 1 else lines)


def line(frm, rel, domain, to):
    return json.dumps({"from": frm, "rel": rel, "domain": domain, "to": to})


@pytest.fixture
def bio(tmp_path):
    return write_jsonl(tmp_path / "bio.jsonl", BIOLOGY_BUSINESS)


def test_query_closure(capsys, bio):
    code, out = run(capsys, "--data", str(bio), "query", "--domain", "@Biology", "--from", "Apple",
                    "--rel", "is_a", "--closure")
    assert code == EXIT_OK
    assert out == ["Fruit", "Organic_Matter", "Plant_Product"]


def test_query_unknown_domain_is_empty(capsys, bio):
    assert run(capsys, "--data", str(bio), "query", "--domain", "@Nowhere", "--rel", "is_a") == (EXIT_OK, [])


def test_query_match(capsys, bio):
    code, out = run(capsys, "--data", str(bio), "query", "--domain", "@Business", "--from", "Apple")
    assert out == [{"from": "Apple", "rel": "is_a", "domain": "@Business", "to": "Company"}]


def test_insert_reversal_rejected(capsys, tmp_path):
    data = write_jsonl(tmp_path / "w.jsonl", METEOROLOGY)
    code, out = run(capsys, "--data", str(data), "insert", line("Thunder", "causes", "@Meteorology", "Dark_Clouds"))
    assert code == EXIT_REJECTED
    assert out["verdict"] == "rejected" and out["reason"] == "causal_reversal"
    assert len(out["witness"]) == 4


def test_session_persists(capsys, tmp_path, bio):
    s = str(tmp_path / "sess")
    assert run(capsys, "--session", s, "load", str(bio))[0] == EXIT_OK
    code, out = run(capsys, "--session", s, "insert", line("Banana", "is_a", "@Biology", "Fruit"))
    assert code == EXIT_OK and out["verdict"] == "accepted"
    _, out = run(capsys, "--session", s, "query", "--domain", "@Biology", "--to", "Fruit", "--rel", "is_a")
    assert {r["from"] for r in out} == {"Apple", "Banana"}
    _, audit = run(capsys, "--session", s, "audit")
    assert [e["verdict"] for e in audit] == ["accepted"]


def test_env_session(capsys, tmp_path, bio, monkeypatch):
    monkeypatch.setenv("CDC_SESSION_DIR", str(tmp_path / "envsess"))
    assert main(["load", str(bio)]) == EXIT_OK
    assert (tmp_path / "envsess" / "kb.jsonl").exists()
    capsys.readouterr()
    proc = subprocess.run([sys.executable, "-m", "fiberlog.cli", "query", "--domain", "@Business", "--rel", "is_a"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert len(json.loads(proc.stdout)) == 2


def test_meta_frozen_across_invocations(capsys, tmp_path):
    s = str(tmp_path / "sess")
    physics = write_jsonl(tmp_path / "p.jsonl", PHYSICS + META_TYPING)
    run(capsys, "--session", s, "load", str(physics))
    meta = line("causes", "has_property", "@Meta@Logic", "monotone")
    assert run(capsys, "--session", s, "insert", meta)[0] == EXIT_REJECTED
    assert run(capsys, "--session", s, "--end-session", "audit")[0] == EXIT_OK
    # a fresh session may load new meta records before its typing is frozen
    extra = tmp_path / "meta.jsonl"
    extra.write_text(meta + "\n" + line("Heat", "causes", "@Physics", "Expansion") + "\n")
    assert run(capsys, "--session", s, "load", str(extra))[0] == EXIT_OK
    run(capsys, "--session", s, "insert", line("x", "r", "@Physics@Thermo", "y"))
    code, out = run(capsys, "--session", s, "reindex", "--domain", "@Physics@Thermo")
    assert out == {"added": {"@Physics@Thermo": 2}}


def test_reindex_command(capsys, tmp_path):
    physics = write_jsonl(tmp_path / "p.jsonl", PHYSICS + META_TYPING)
    s = str(tmp_path / "sess")
    run(capsys, "--session", s, "load", str(physics))
    run(capsys, "--session", s, "insert", line("Photon", "contrasts_with", "@Physics@Quantum", "Atom"))
    code, out = run(capsys, "--session", s, "reindex", "--domain", "@Physics@Quantum")
    assert out == {"added": {"@Physics@Quantum": 1}}
    code, out = run(capsys, "--session", s, "reindex")
    assert code == EXIT_OK and out["total"] == 0


def test_contradiction_config(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"contradictions": [["supports", "refutes"]]}))
    s = str(tmp_path / "sess")
    assert run(capsys, "--session", s, "--config", str(cfg), "insert", line("e", "supports", "@X", "h"))[0] == EXIT_OK
    code, out = run(capsys, "--session", s, "insert", line("e", "refutes", "@X", "h"))
    assert code == EXIT_REJECTED and out["reason"] == "contradiction"


def test_multi_and_temporal(capsys, tmp_path):
    data = write_jsonl(tmp_path / "c.jsonl", CBT)
    code, out = run(capsys, "--data", str(data), "temporal", "--rel", "causes", "--before", "@CBT@Session2@Turn1",
                    "--scope", "@CBT")
    assert code == EXIT_OK and len(out) == 2
    code, out = run(capsys, "--data", str(data), "multi", "--domain", "@CBT@Session1@Turn3",
                    "--constraint", "causes:isolation")
    assert out == {"candidates": ["avoidance", "catastrophizing"], "counts": [2, 2]}


def test_bridge_commands(capsys, tmp_path):
    data = write_jsonl(tmp_path / "icd.jsonl", ICD)
    bridge = json.dumps({"from": "Viral_Pneumonia", "rel": "same_entity_across",
                         "domain_1": "@ICD11@Respiratory", "domain_2": "@ICD11@Infectious"})
    s = str(tmp_path / "sess")
    run(capsys, "--session", s, "load", str(data))
    code, out = run(capsys, "--session", s, "bridge", "add", bridge)
    assert code == EXIT_OK and out["verdict"] == "accepted"
    code, out = run(capsys, "--session", s, "bridge", "intersect", "--d1", "@ICD11@Respiratory",
                    "--d2", "@ICD11@Infectious")
    assert out == ["Viral_Pneumonia"]
    missing = json.dumps({"from": "Nobody", "rel": "same_entity_across",
                          "domain_1": "@ICD11@Respiratory", "domain_2": "@ICD11@Infectious"})
    code, out = run(capsys, "--session", s, "bridge", "add", missing)
    assert code == EXIT_REJECTED and out["reason"] == "unknown_concept"

    cbt = write_jsonl(tmp_path / "cbt.jsonl", CBT)
    code, out = run(capsys, "--data", str(cbt), "bridge", "diff", "--d1", "@CBT@Session1", "--d2", "@CBT@Session2",
                    "--rel", "weakens")
    assert [r["from"] for r in out] == ["reality_testing"]
    code, out = run(capsys, "--data", str(data), "bridge", "analogy", "--a", "Viral_Pneumonia",
                    "--d1", "@ICD11@Respiratory@Anatomical", "--b", "Viral_Pneumonia",
                    "--d2", "@ICD11@Infectious@Etiological", "--rel", "is_a")
    assert out == {"holds": True, "witness": [["is_a", "Respiratory_Disease", "Infectious_Disease"]]}


def test_save_round_trip(capsys, tmp_path, bio):
    out_file = tmp_path / "saved.jsonl"
    code, out = run(capsys, "--data", str(bio), "save", str(out_file))
    assert code == EXIT_OK and out["saved"] == 5
    first = out_file.read_text()
    run(capsys, "--data", str(out_file), "save", str(out_file))
    assert out_file.read_text() == first


def test_output_deterministic(capsys, bio):
    args = ("--data", str(bio), "query", "--domain", "@Biology")
    main(list(args))
    a = capsys.readouterr().out
    main(list(args))
    assert capsys.readouterr().out == a


def test_bench_generate(capsys, tmp_path):
    spec = json.dumps({"n_entities": 300, "n_fibers": 3, "feature_pool": 5, "planted_answers": 2,
                       "constraints": 3, "seed": 1})
    out_file = tmp_path / "corpus.jsonl"
    code, out = run(capsys, "bench", "generate", "--spec", spec, "--out", str(out_file))
    assert code == EXIT_OK and out["records"] == len(out_file.read_text().splitlines())
    assert len(out["planted"]) == 2
    code = main(["bench", "generate", "--spec", spec])
    assert code == EXIT_OK and capsys.readouterr().out == out_file.read_text()
    code, multi = run(capsys, "--data", str(out_file), "multi", "--domain", out["target"],
                      *[x for c in out["constraints"] for x in ("--constraint", c)])
    assert multi["candidates"] == out["planted"]


@pytest.mark.parametrize("figures", [False, True])
def test_bench_scaling(capsys, tmp_path, figures):
    grid = json.dumps({"n_entities": 300, "n_fibers": [1, 3], "m_values": [1, 2], "m_sweep_fibers": 3,
                       "feature_pool": 4, "planted_answers": 2})
    argv = ["bench", "scaling", "--grid", grid, "-m", "2", "--repeats", "1", "--out-dir", str(tmp_path)]
    if not figures:
        argv.append("--no-figures")
    code, out = run(capsys, *argv)
    assert code == EXIT_OK
    assert (tmp_path / "scaling.csv").exists() and (tmp_path / "scaling.json").exists()
    assert (tmp_path / "scaling.png").exists() == figures
    assert "size_power" in out["fits"]


def test_usage_errors(capsys, tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["query"])
    assert exc.value.code == EXIT_USAGE
    assert main(["insert", '{"from": "a"}']) == EXIT_USAGE
    assert main(["query", "--domain", "no-at-sign"]) == EXIT_USAGE
    assert main(["bench", "generate", "--spec", '{"n_entities": 1, "n_fibers": 2}']) == EXIT_USAGE
    bad = tmp_path / "bad.jsonl"
    bad.write_text(line("a", "r", "@X", "b") + "\nnot json\n")
    assert main(["load", str(bad)]) == EXIT_USAGE
    assert "line 2" in capsys.readouterr().err


def test_io_error(tmp_path):
    assert main(["load", str(tmp_path / "missing.jsonl")]) == EXIT_IO


def test_console_script_help():
    proc = subprocess.run(["fiberlog", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "bench" in proc.stdout
