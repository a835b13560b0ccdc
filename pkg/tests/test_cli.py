import csv
import io
import json
import os
import stat
import subprocess
import sys

import pytest

from raptorcrypt.cli import atomic_write, main


def run(*argv):
    out = io.StringIO()
    code = main([str(a) for a in argv], out=out)
    return code, out.getvalue()


class TestPlan:
    def test_boundary(self):
        code, out = run("plan", "-n", 20, "-s", 10, "--key-bytes", 992)
        assert code == 0
        assert "k=1000 f=110" in out
        assert "max_threshold=10" in out

    def test_above_maximum_exits_2(self, capsys):
        code, _ = run("plan", "-n", 5, "-s", 11, "--key-bytes", 992)
        assert code == 2
        assert "(s-1)*f" in capsys.readouterr().err

    def test_small(self):
        code, out = run("plan", "-n", 3, "-s", 2, "--key-bytes", 92)
        assert code == 0
        assert "k=100 f=55" in out

    def test_usage_error_exits_1(self):
        assert run("plan", "-n", "x")[0] == 1

    def test_overhead_flag(self):
        code, out = run("plan", "-n", 20, "-s", 15, "--key-bytes", 992, "--overhead-hi", 1.05)
        assert code == 0
        assert "max_threshold=17" in out


class TestSplitCombine:
    @pytest.fixture
    def split_dir(self, tmp_path):
        code, _ = run("--seed", 7, "split", "-n", 20, "-s", 10, "--key-bytes", 992,
                      "--out-dir", tmp_path / "frags")
        assert code == 0
        return tmp_path / "frags"

    def test_roundtrip_ten_of_twenty(self, split_dir, tmp_path):
        files = sorted(split_dir.glob("member_*.rcf"))
        assert len(files) == 20
        key = (split_dir / "key.bin").read_bytes()
        assert len(key) == 992
        assert stat.S_IMODE(os.stat(split_dir / "key.bin").st_mode) == 0o600
        code, _ = run("combine", *files[5:15], "-o", tmp_path / "out.bin")
        assert code == 0
        assert (tmp_path / "out.bin").read_bytes() == key
        code, out = run("combine", *files[:10])
        assert code == 0 and out.strip() == key.hex()

    def test_nine_files_undecodable(self, split_dir):
        files = sorted(split_dir.glob("member_*.rcf"))
        assert run("combine", *files[:9])[0] == 4

    def test_mixed_splits(self, split_dir, tmp_path):
        run("--seed", 8, "split", "-n", 20, "-s", 10, "--key-bytes", 992, "--out-dir", tmp_path / "b")
        a = sorted(split_dir.glob("member_*.rcf"))
        b = sorted((tmp_path / "b").glob("member_*.rcf"))
        assert run("combine", *a[:5], *b[5:10])[0] == 3

    def test_malformed(self, split_dir, tmp_path):
        bad = tmp_path / "bad.rcf"
        bad.write_bytes(b"RCF1garbage")
        files = sorted(split_dir.glob("member_*.rcf"))
        assert run("combine", files[0], bad)[0] == 5
        assert run("combine", files[0], files[0])[0] == 5

    def test_seeded_split_is_byte_identical(self, split_dir, tmp_path):
        run("--seed", 7, "split", "-n", 20, "-s", 10, "--key-bytes", 992, "--out-dir", tmp_path / "again")
        for f in split_dir.iterdir():
            assert (tmp_path / "again" / f.name).read_bytes() == f.read_bytes()

    def test_key_hex_warns(self, tmp_path, capsys):
        code, _ = run("split", "-n", 3, "-s", 2, "--key-hex", "00" * 92, "--out-dir", tmp_path)
        assert code == 0
        assert "warning" in capsys.readouterr().err
        assert (tmp_path / "key.bin").read_bytes() == bytes(92)

    def test_seed_after_subcommand(self, tmp_path):
        run("split", "--seed", 7, "-n", 3, "-s", 2, "--key-bytes", 92, "--out-dir", tmp_path / "x")
        run("--seed", 7, "split", "-n", 3, "-s", 2, "--key-bytes", 92, "--out-dir", tmp_path / "y")
        assert (tmp_path / "x" / "key.bin").read_bytes() == (tmp_path / "y" / "key.bin").read_bytes()


class TestSimulate:
    def test_csv(self):
        code, out = run("--seed", 3, "simulate", "-n", 6, "-s", 3, "--key-bytes", 92, "--trials", 20)
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert [int(r["subset_size"]) for r in rows] == [2, 3, 4, 5, 6]
        assert float(rows[0]["success_ratio"]) == 0.0
        assert all(0.0 <= float(r["success_ratio"]) <= 1.0 for r in rows)
        assert out == run("--seed", 3, "simulate", "-n", 6, "-s", 3, "--key-bytes", 92, "--trials", 20)[1]

    def test_overhead_sweep(self):
        code, out = run("simulate", "-n", 6, "-s", 3, "--key-bytes", 92, "--trials", 5,
                        "--overhead-hi", "1.05,1.1", "--subset-sizes", "3")
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert [r["overhead_hi"] for r in rows] == ["1.05", "1.1"]


class TestCommitVerify:
    CHOSEN = "3,7,12,19,23,31,38"

    def _commit(self, tmp_path, *extra):
        code, _ = run("--seed", 1, "commit", "--universe", 39, "--choose", self.CHOSEN,
                      "--bits", 64, "--out", tmp_path / "c.psc", "--reveal-out", tmp_path / "r.psr", *extra)
        assert code == 0

    def test_seven_of_thirty_nine(self, tmp_path):
        self._commit(tmp_path)
        code, out = run("verify", tmp_path / "c.psc", tmp_path / "r.psr")
        assert code == 0
        assert out.splitlines()[-1] == "selected=7 not_selected=32 invalid=0"
        assert "3 Selected" in out.splitlines()

    def test_tampered_tag(self, tmp_path):
        self._commit(tmp_path)
        lines = (tmp_path / "c.psc").read_text().splitlines()
        index, i_hex, tag = lines[5].split()
        lines[5] = f"{index} {i_hex} {(int(tag) + 5) % 10}"
        (tmp_path / "c.psc").write_text("\n".join(lines) + "\n")
        code, out = run("verify", tmp_path / "c.psc", tmp_path / "r.psr")
        assert code == 0
        assert f"{index} Invalid" in out.splitlines()
        assert "invalid=1" in out
        assert run("verify", "--strict", tmp_path / "c.psc", tmp_path / "r.psr")[0] == 6

    def test_election_mode(self, tmp_path):
        code, _ = run("commit", "--universe", 200, "--choose", "1,50,199", "--bits", 32,
                      "--out", tmp_path / "c", "--reveal-out", tmp_path / "r")
        assert code == 0
        code, out = run("verify", tmp_path / "c", tmp_path / "r")
        assert out.splitlines()[-1] == "selected=3 not_selected=197 invalid=0"

    def test_reveal_chosen_only(self, tmp_path):
        self._commit(tmp_path, "--reveal-chosen-only")
        code, out = run("verify", tmp_path / "c.psc", tmp_path / "r.psr")
        assert out.splitlines()[-1] == "selected=7 not_selected=0 invalid=0 unrevealed=32"

    def test_reproducible(self, tmp_path):
        self._commit(tmp_path)
        first = (tmp_path / "c.psc").read_bytes(), (tmp_path / "r.psr").read_bytes()
        self._commit(tmp_path)
        assert ((tmp_path / "c.psc").read_bytes(), (tmp_path / "r.psr").read_bytes()) == first

    def test_bad_choice(self, tmp_path):
        code, _ = run("commit", "--universe", 39, "--choose", "40", "--out", tmp_path / "c",
                      "--reveal-out", tmp_path / "r")
        assert code == 1

    def test_malformed_file(self, tmp_path):
        (tmp_path / "c").write_text("nonsense\n")
        (tmp_path / "r").write_text("PSR1 U=1\n")
        assert run("verify", tmp_path / "c", tmp_path / "r")[0] == 5


class TestReceipt:
    def test_roundtrip_and_tamper(self, tmp_path):
        assert run("--seed", 2, "receipt-keygen", "--bits", 512, "--out", tmp_path / "k")[0] == 0
        doc = tmp_path / "doc"
        doc.write_bytes(b"PSC1 U=1\n1 f 8\n")
        assert run("receipt-sign", "--key", tmp_path / "k", doc, "-o", tmp_path / "rcpt")[0] == 0
        assert (tmp_path / "rcpt").read_text().startswith("RCPT1 ")
        code, out = run("receipt-verify", doc, tmp_path / "rcpt")
        assert (code, out.strip()) == (0, "valid")
        doc.write_bytes(b"PSC1 U=1\n1 f 9\n")
        code, out = run("receipt-verify", doc, tmp_path / "rcpt")
        assert (code, out.strip()) == (7, "invalid")

    def test_keygen_too_small(self, tmp_path):
        assert run("receipt-keygen", "--bits", 128, "--out", tmp_path / "k")[0] == 1


def test_config_file_and_env(tmp_path, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"overhead_hi": 1.05}))
    code, out = run("--config", cfg, "plan", "-n", 20, "-s", 15, "--key-bytes", 992)
    assert code == 0 and "max_threshold=17" in out
    monkeypatch.setenv("RAPTOR_THRESHOLD_CONFIG", str(cfg))
    code, out = run("plan", "-n", 20, "-s", 15, "--key-bytes", 992)
    assert code == 0
    # flags win over the file
    code, _ = run("plan", "-n", 20, "-s", 15, "--key-bytes", 992, "--overhead-hi", 1.1)
    assert code == 2


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run("--config", cfg, "plan", "-n", 3, "-s", 2, "--key-bytes", 10)[0] == 1


def test_atomic_write_leaves_no_temp(tmp_path):
    target = tmp_path / "f"
    atomic_write(target, b"one")
    atomic_write(target, b"two", mode=0o600)
    assert target.read_bytes() == b"two"
    assert [p.name for p in tmp_path.iterdir()] == ["f"]


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "raptorcrypt", "plan", "-n", "20", "-s", "10",
                           "--key-bytes", "992"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "f=110" in proc.stdout
