import subprocess
import sys

import pytest

from slpforge.cli import main
from slpforge.slp import expand, parse


def run(capsys, *args):
    code = main(list(args))
    out, err = capsys.readouterr()
    return code, out, err


def usage(capsys, *args):
    with pytest.raises(SystemExit) as info:
        main(list(args))
    capsys.readouterr()
    return info.value.code


def test_gen_rle(capsys):
    code, out, err = run(capsys, "gen", "--k", "4", "--rle")
    assert code == 0
    assert out == "a*20 b a*41 b a*82 b a*165\n"
    assert "w=10100101" in err and "n=311" in err
    assert run(capsys, "gen", "--k", "2", "--rle")[1] == "a*4 b a*9\n"


def test_gen_raw_file(tmp_path, capsys):
    out = tmp_path / "s4.bin"
    assert run(capsys, "gen", "--k", "4", "-o", str(out))[0] == 0
    assert out.read_bytes() == b"b".join(b"a" * m for m in (20, 41, 82, 165))


def test_gen_usage_and_capacity(capsys):
    assert usage(capsys, "gen", "--k", "1") == 2
    assert run(capsys, "--budget", "100", "gen", "--k", "4")[0] == 3


def test_gen_budget_env(monkeypatch, capsys):
    monkeypatch.setenv("SLPFORGE_BUDGET", "300")
    assert run(capsys, "gen", "--k", "4")[0] == 3
    assert run(capsys, "gen", "--k", "4", "--rle")[0] == 0


def test_compress_unary_example1(tmp_path, capsys):
    out = tmp_path / "a27.slp"
    code, stdout, _ = run(capsys, "compress", "--unary", "27", "--variant", "mg", "-o", str(out))
    assert code == 0
    assert out.read_text().splitlines() == ["S -> X3 X3 X3 X1 'a'", "X1 -> 'a' 'a'", "X2 -> X1 X1", "X3 -> X2 X2"]
    assert stdout.startswith("n=27 size=11 rounds=3")


def test_compress_unary_digram(capsys):
    code, out, err = run(capsys, "compress", "--unary", "5", "--variant", "digram")
    assert out.splitlines() == ["S -> X1 X1 'a'", "X1 -> 'a' 'a'"]
    assert "n=5 size=5 rounds=1" in err


def test_compress_s4_three_rounds(tmp_path, capsys):
    s4 = tmp_path / "s4.rle"
    run(capsys, "gen", "--k", "4", "--rle", "-o", str(s4))
    trace = tmp_path / "trace.txt"
    code, out, _ = run(capsys, "compress", "-i", str(s4), "--variant", "mg", "--rounds", "3", "--trace", str(trace))
    assert code == 0
    start = out.splitlines()[0].split()[2:]
    expected = (["X3", "X3", "X2", "'b'"] + ["X3"] * 5 + ["'a'", "'b'"] + ["X3"] * 10 + ["X1", "'b'"]
                + ["X3"] * 20 + ["X2", "'a'"])
    assert start == expected
    lines = trace.read_text().splitlines()
    assert lines[2] == 'round=3 chosen="X2 X2" count=37 fresh=X3 size_before=86 size_after=51'


def test_compress_full_round_trip(tmp_path, capsys):
    word = tmp_path / "w.bin"
    word.write_bytes(b"abracadabra abracadabra")
    slp_path = tmp_path / "w.slp"
    assert run(capsys, "compress", "-i", str(word), "-o", str(slp_path))[0] == 0
    assert expand(parse(slp_path.read_text())) == b"abracadabra abracadabra"


def test_compress_errors(tmp_path, capsys):
    bad = tmp_path / "bad.rle"
    bad.write_text("a*x")
    assert run(capsys, "compress", "-i", str(bad))[0] == 2
    assert usage(capsys, "compress") == 2
    assert run(capsys, "--budget", "10", "compress", "--unary", "27")[0] == 3


def test_verify(capsys):
    code, out, _ = run(capsys, "verify", "--k", "4")
    assert code == 0
    assert "X2; a; X1; X2 a" in out
    assert "FAIL" not in out
    assert usage(capsys, "verify", "--k", "3") == 2


def test_verify_k10(capsys):
    code, out, _ = run(capsys, "verify", "--k", "10")
    assert code == 0 and out.splitlines()[-1].startswith("PASS k=10")


def test_bench(tmp_path, capsys):
    csv_path = tmp_path / "b.csv"
    code, out, _ = run(capsys, "bench", "--kmin", "4", "--kmax", "10", "-o", str(csv_path))
    assert code == 0
    rows = csv_path.read_text().splitlines()
    assert rows[0] == "k,n,repair_size,small_slp_size,ratio,rounds,ms"
    assert len(rows) == 8
    assert "strictly increasing for k >= 6: yes" in out
    first = csv_path.read_text()
    run(capsys, "bench", "--kmin", "4", "--kmax", "10", "-o", str(csv_path))
    assert csv_path.read_text() == first

    code, out, _ = run(capsys, "bench", "--kmin", "4", "--kmax", "4")
    assert out.splitlines()[1].startswith("4,311,") and out.splitlines()[1].split(",")[3] == "24"
    assert usage(capsys, "bench", "--kmin", "5", "--kmax", "4") == 2


def test_oracle_cli(tmp_path, capsys):
    code, out, _ = run(capsys, "oracle", "--word", "abcabc")
    assert code == 0 and out.splitlines() == ["g=5", "S -> X1 X1", "X1 -> 'a' 'b' 'c'"]
    assert run(capsys, "oracle", "--word", "a" * 13)[0] == 3
    csv_path = tmp_path / "audit.csv"
    code, out, _ = run(capsys, "oracle", "--all-binary-upto", "5", "--csv", str(csv_path))
    assert code == 0 and "violations=0" in out
    assert len(csv_path.read_text().splitlines()) == 1 + 62


def test_analyze(tmp_path, capsys):
    code, out, _ = run(capsys, "analyze", "--k", "4")
    assert code == 0 and "v_factors=X2; a; X1; X2 a" in out
    code, out, _ = run(capsys, "analyze", "--unary", "27")
    assert "lemma3_lower_bound=1" in out and "repair_mg_size=11" in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "slpforge", "gen", "--k", "2", "--rle"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == "a*4 b a*9\n"
