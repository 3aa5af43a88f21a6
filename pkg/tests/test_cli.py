import json
import subprocess
import sys

import pytest

from groupkey.cli import bundled_scenarios, main
from groupkey.ldpc import TannerGraph, build_stopping_set, bundled_matrix, syndrome
from groupkey.ldpc.codeword import Codeword, bits_from_string

S = build_stopping_set(TannerGraph(bundled_matrix()), 3)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_bundled_scenarios_present():
    assert {"fig3", "stress16", "stress16_nocodec", "stress16_clean", "empty"} <= set(bundled_scenarios())


def test_sim_fig3(capsys, tmp_path):
    code, out, _ = run(capsys, "sim", "fig3", "--out", str(tmp_path))
    assert code == 0
    doc = json.loads((tmp_path / "fig3.json").read_text())
    assert [e["updated_nodes"] for e in doc["events"][1:]] == [[5, 2, 0], [5, 2, 0]]
    assert "updated [5,2,0]" in out
    assert (tmp_path / "fig3.csv").exists()


def test_sim_empty_events(capsys, tmp_path):
    assert run(capsys, "sim", "empty", "--out", str(tmp_path))[0] == 0


def test_sim_codec_off_noisy_exits_2(capsys, tmp_path):
    assert run(capsys, "sim", "stress16_nocodec", "--out", str(tmp_path))[0] == 2


def test_sim_report_dir_from_environment(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("GROUPKEY_REPORT_DIR", str(tmp_path / "env"))
    assert run(capsys, "sim", "empty")[0] == 0
    assert (tmp_path / "env" / "empty.json").exists()


def test_sim_config_errors_exit_1(capsys, tmp_path):
    code, _, err = run(capsys, "sim", str(tmp_path / "nope.json"))
    assert code == 1 and "error" in err
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"params": {"p": 23, "y": 5}, "members": ["a"], "events": [{"leave": "a"}]}))
    assert run(capsys, "sim", str(bad))[0] == 1


def test_usage_errors_exit_1(capsys):
    assert run(capsys, "frobnicate")[0] == 1
    assert run(capsys, "ldpc", "encode")[0] == 1
    assert run(capsys, "ldpc", "encode", "--bits", "101")[0] == 1
    assert run(capsys, "ldpc", "encode", "--bits", "1101001x")[0] == 1
    assert run(capsys, "ldpc", "decode", "--bits", "0" * 16, "--flip", "16")[0] == 1
    assert run(capsys, "ldpc", "encode", "--bits", "11010011", "--matrix", "/no/such/file")[0] == 1
    assert run(capsys, "bench", "--sizes", "1")[0] == 1


def test_encode(capsys):
    code, out, _ = run(capsys, "ldpc", "encode", "--bits", "11010011")
    assert code == 0
    word = Codeword.from_wire(bits_from_string(out.strip()), S.transmit_order)
    assert not any(syndrome(bundled_matrix(), word.bits))
    assert out.strip() == "1101001100000000"


def test_decode_clean_word(capsys):
    code, out, _ = run(capsys, "ldpc", "decode", "--bits", "1101001100000000")
    assert code == 0
    assert "info 11010011" in out and "trials 1" in out and "case clean" in out


def test_decode_with_label_flip(capsys):
    code, out, _ = run(capsys, "ldpc", "decode", "--bits", "1101001100000000", "--flip", "X16")
    assert code == 0 and "info 11010011" in out and "case reevaluated" in out


def test_roundtrip_sweep(capsys):
    code, out, _ = run(capsys, "ldpc", "roundtrip", "--bits", "11010011", "--sweep")
    assert code == 0
    assert out.strip().splitlines()[-1] == "16/16 successes"


def test_unrecoverable_exit_3(capsys):
    code, out, _ = run(capsys, "ldpc", "decode", "--bits", "0000000000000111", "--max-info-flips", "1")
    assert code == 3
    assert out.startswith("UNRECOVERABLE syndrome ")


def test_custom_matrix_file(capsys, tmp_path):
    m = tmp_path / "h.txt"
    m.write_text(bundled_matrix().to_text())
    code, out, _ = run(capsys, "ldpc", "encode", "--bits", "11010011", "--matrix", str(m))
    assert code == 0 and out.strip() == "1101001100000000"


def test_bench_small(capsys, tmp_path):
    out_csv = tmp_path / "b.csv"
    code, out, _ = run(capsys, "bench", "--sizes", "2,8", "--reps", "1", "--sample", "2", "--out", str(out_csv))
    assert code == 0
    lines = out_csv.read_text().splitlines()
    assert lines[0].startswith("group_size,variant,modexp_per_member")
    assert lines[1].startswith("2,etf,1.0000,1,1,1")
    assert len(lines) == 5


def test_help_lists_flags():
    for sub in ("sim", "ldpc", "bench"):
        text = subprocess.run([sys.executable, "-m", "groupkey", sub, "--help"],
                              capture_output=True, text=True, check=True).stdout
        assert "--" in text
    text = subprocess.run([sys.executable, "-m", "groupkey", "--help"], capture_output=True, text=True).stdout
    assert "GROUPKEY_REPORT_DIR" in text


@pytest.mark.parametrize("argv, code", [(["sim", "fig3"], 0), (["ldpc", "decode", "--bits", "0000000000000111",
                                                                   "--max-info-flips", "1"], 3)])
def test_module_entry_point_exit_codes(argv, code, tmp_path):
    proc = subprocess.run([sys.executable, "-m", "groupkey", *argv], capture_output=True, text=True,
                          env={"GROUPKEY_REPORT_DIR": str(tmp_path), "PATH": ""})
    assert proc.returncode == code, proc.stderr
