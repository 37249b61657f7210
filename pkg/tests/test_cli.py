import json

import pytest

from maxchain.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_eval_linear_example(capsys):
    code, out, _ = run(capsys, "eval", "--family", "linear", "--p", "7", "--m", "3",
                       "--a", "2", "--b", "1", "--x", "4")
    assert code == 0
    assert out.strip() == "2"


def test_eval_ms_example(capsys):
    code, out, _ = run(capsys, "eval", "--family", "ms", "--r", "4", "--l", "2",
                       "--a", "1", "--x", "13")
    assert code == 0
    assert out.strip() == "3"


def test_eval_missing_param_is_usage_error(capsys):
    code, _, err = run(capsys, "eval", "--family", "linear", "--m", "3",
                       "--a", "2", "--b", "1", "--x", "4")
    assert code == 2
    assert "--p" in err


def test_unknown_flag_exits_two():
    with pytest.raises(SystemExit) as exc:
        main(["eval", "--famly", "linear"])
    assert exc.value.code == 2


def test_maxload_single_key(capsys, tmp_path):
    out_path = tmp_path / "out.json"
    code, _, _ = run(capsys, "maxload", "--family", "linear", "--p", "13", "--m", "4",
                     "--keys", "5", "--trials", "40", "--base-seed", "1",
                     "--out", str(out_path))
    assert code == 0
    doc = json.loads(out_path.read_text())
    assert doc["results"]["mean"] == 1.0
    assert doc["results"]["ci_low"] == doc["results"]["ci_high"] == 1.0
    assert doc["tool"] == "maxchain"


def test_maxload_force_a_zero(capsys, tmp_path):
    out_path = tmp_path / "out.json"
    code, _, _ = run(capsys, "maxload", "--family", "linear", "--p", "251", "--m", "16",
                     "--keyset", "interval", "--n", "16", "--trials", "100",
                     "--base-seed", "4", "--force-a", "0", "--out", str(out_path))
    assert code == 0
    doc = json.loads(out_path.read_text())
    assert doc["results"]["mean"] == 16.0
    assert doc["results"]["min"] == doc["results"]["max"] == 16


def test_maxload_csv_and_profile(capsys, tmp_path):
    csv_path = tmp_path / "trials.csv"
    prof_path = tmp_path / "profile.csv"
    code, _, _ = run(capsys, "maxload", "--family", "linear", "--p", "251", "--m", "16",
                     "--keyset", "interval", "--n", "16", "--trials", "50",
                     "--base-seed", "9", "--out", str(tmp_path / "o.json"),
                     "--csv", str(csv_path), "--profile-out", str(prof_path),
                     "--profile-trial", "3")
    assert code == 0
    lines = csv_path.read_text().splitlines()
    assert lines[0].startswith("# maxchain")
    assert lines[1].startswith("# config:")
    assert lines[2] == "trial_index,a,b,M"
    assert len(lines) == 3 + 50
    first = lines[3].split(",")
    assert first[0] == "0" and all(tok.isdigit() for tok in first)
    prof_lines = prof_path.read_text().splitlines()
    assert prof_lines[2] == "bucket_index,count"
    counts = [int(row.split(",")[1]) for row in prof_lines[3:]]
    assert sum(counts) == 16 and len(counts) == 16


def test_maxload_csv_thread_invariance(capsys, tmp_path):
    paths = []
    for threads in ("1", "4"):
        p = tmp_path / f"t{threads}.csv"
        code, _, _ = run(capsys, "maxload", "--family", "ms", "--r", "20", "--l", "5",
                         "--keyset", "uniform-random", "--n", "64", "--key-seed", "3",
                         "--trials", "500", "--base-seed", "2", "--threads", threads,
                         "--out", str(tmp_path / f"o{threads}.json"), "--csv", str(p))
        assert code == 0
        paths.append(p.read_bytes())
    assert paths[0] == paths[1]


def test_maxload_validation_error(capsys, tmp_path):
    code, _, err = run(capsys, "maxload", "--family", "linear", "--p", "13", "--m", "4",
                       "--keys", "13", "--trials", "5", "--out", str(tmp_path / "o.json"))
    assert code == 2
    assert "universe" in err


def test_io_error_exit_code(capsys):
    code, _, err = run(capsys, "maxload", "--family", "linear", "--p", "13", "--m", "4",
                       "--keys", "5", "--trials", "5",
                       "--out", "/nonexistent-dir/x.json")
    assert code == 4
    assert "i/o" in err


def test_tail_output(capsys, tmp_path):
    out_path = tmp_path / "tail.json"
    code, _, _ = run(capsys, "tail", "--family", "linear", "--p", "251", "--m", "16",
                     "--keyset", "interval", "--n", "16", "--trials", "400",
                     "--base-seed", "3", "--alphas", "1,2,4", "--out", str(out_path))
    assert code == 0
    doc = json.loads(out_path.read_text())
    tails = doc["results"]["tails"]
    assert [t["threshold"] for t in tails] == [4, 8, 16]
    for t in tails:
        assert 0 <= t["ci_low"] <= t["p_hat"] <= t["ci_high"] <= 1
    code, _, err = run(capsys, "tail", "--family", "linear", "--p", "251", "--m", "16",
                       "--keyset", "interval", "--n", "16", "--alphas", "0.5",
                       "--out", str(out_path))
    assert code == 2


def test_exhaustive_mean_string(capsys):
    code, out, _ = run(capsys, "exhaustive", "--p", "3", "--m", "3", "--keys", "0,1,2")
    assert code == 0
    assert '"mean": 1.6666666666666667' in out
    doc = json.loads(out)
    assert doc["results"]["mean_exact"] == "5/3"
    assert doc["results"]["distribution"] == [[1, 6], [3, 3]]


def test_exhaustive_guard_respected(capsys, tmp_path):
    code, _, err = run(capsys, "exhaustive", "--p", "65537", "--m", "4",
                       "--keys", "0,1", "--out", str(tmp_path / "o.json"))
    assert code == 2
    assert "guard" in err


def test_scaling_self_test(capsys, tmp_path):
    out_path = tmp_path / "st.json"
    code, _, _ = run(capsys, "scaling", "--self-test-exponent", "0.5",
                     "--n-grid", "16,64,256,1024", "--out", str(out_path))
    assert code == 0
    doc = json.loads(out_path.read_text())
    assert doc["results"]["fit"]["slope"] == pytest.approx(0.5, abs=1e-9)


def test_scaling_run_and_csv(capsys, tmp_path):
    out_path = tmp_path / "sc.json"
    csv_path = tmp_path / "sc.csv"
    code, _, _ = run(capsys, "scaling", "--family", "linear",
                     "--keysets", "interval,uniform-random",
                     "--n-grid", "16,64,256", "--trials", "30", "--base-seed", "5",
                     "--universe-exponent", "16",
                     "--out", str(out_path), "--csv", str(csv_path))
    assert code == 0
    doc = json.loads(out_path.read_text())
    assert len(doc["results"]["sweeps"]) == 2
    assert doc["results"]["worst_keyset"] in ("interval", "uniform-random")
    rows = csv_path.read_text().splitlines()
    assert rows[2].startswith("family,keyset,n,m,")
    assert len(rows) == 3 + 2 * 3


def test_lemma_check_success(capsys, tmp_path):
    out_path = tmp_path / "lemma.json"
    code, _, _ = run(capsys, "lemma-check", "--instances", "30", "--base-seed", "11",
                     "--out", str(out_path), "--dump", str(tmp_path / "dump.json"))
    assert code == 0
    doc = json.loads(out_path.read_text())
    assert doc["results"]["all_hold"] is True
    assert doc["results"]["instances_checked"] == 30
    assert not (tmp_path / "dump.json").exists()


def test_genkeys_and_from_file_round_trip(capsys, tmp_path):
    keys_path = tmp_path / "keys.txt"
    code, out, _ = run(capsys, "genkeys", "--variant", "arithmetic-progression",
                       "--start", "3", "--stride", "10", "--n", "4",
                       "--universe", "100", "--out", str(keys_path))
    assert code == 0
    assert keys_path.read_text() == "3\n13\n23\n33\n"
    out_path = tmp_path / "o.json"
    code, _, _ = run(capsys, "maxload", "--family", "linear", "--p", "101", "--m", "10",
                     "--keyset", "from-file", "--keys-file", str(keys_path),
                     "--trials", "20", "--out", str(out_path))
    assert code == 0
    assert json.loads(out_path.read_text())["results"]["n"] == 4


def test_verify_round_trip(capsys, tmp_path):
    out_path = tmp_path / "o.json"
    for command in (
        ["maxload", "--family", "linear", "--p", "251", "--m", "16",
         "--keyset", "interval", "--n", "16", "--trials", "200", "--base-seed", "8"],
        ["tail", "--family", "ms", "--r", "16", "--l", "4",
         "--keyset", "uniform-random", "--n", "32", "--key-seed", "5",
         "--trials", "200", "--base-seed", "8", "--alphas", "1,2"],
        ["exhaustive", "--p", "31", "--m", "4", "--keys", "0,1,5,9"],
        ["lemma-check", "--instances", "10", "--base-seed", "1"],
    ):
        code, _, _ = run(capsys, *command, "--out", str(out_path))
        assert code == 0
        code, out, _ = run(capsys, "verify", str(out_path))
        assert code == 0, command
        assert "ok" in out
    # verify across a different thread count still matches
    code, out, _ = run(capsys, "verify", str(out_path), "--threads", "4")
    assert code == 0


def test_verify_detects_tampering(capsys, tmp_path):
    out_path = tmp_path / "o.json"
    code, _, _ = run(capsys, "exhaustive", "--p", "31", "--m", "4",
                     "--keys", "0,1,5,9", "--out", str(out_path))
    assert code == 0
    doc = json.loads(out_path.read_text())
    doc["results"]["mean"] += 1e-9
    out_path.write_text(json.dumps(doc))
    code, _, err = run(capsys, "verify", str(out_path))
    assert code == 3
    assert "MISMATCH" in err


def test_version_flag():
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
