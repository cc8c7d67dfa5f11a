import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from finrel.cli import run

ROOT = Path(__file__).resolve().parent.parent
LNAT = str(ROOT / "corpus" / "lnat.fr")
BETA1 = str(ROOT / "corpus" / "beta1.fr")
GOLDEN = Path(__file__).parent / "golden"


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


def call_json(*argv):
    code, out, _ = call(*argv, "--json")
    data = json.loads(out)
    assert data["schema_version"] == 1 and data["exit_code"] == code
    return code, data


# ---------------------------------------------------------------- subcommands

def test_denote_exact_value():
    code, out, _ = call("denote", LNAT, "two", "--exact")
    assert code == 0
    assert out.splitlines()[1:] == ["path(s ; *)", "path(s p s ; *)", "path(s p s p z ; *)"]


def test_denote_and_oracle_agree():
    for bound in range(5):
        _, a, _ = call("denote", BETA1, "lhs", "--bound", bound)
        _, b, _ = call("oracle", BETA1, "lhs", "--bound", bound)
        assert a.splitlines()[1:] == b.splitlines()[1:]


def test_eq_exit_codes(tmp_path):
    assert call("eq", BETA1)[0] == 0
    src = tmp_path / "neq.fr"
    src.write_text("space A = {a, b}\nconst c : A = {a@A}\nconst d : A = {b@A}\nterm lhs = c\nterm rhs = d\n")
    code, out, _ = call("eq", src, "--bound", 2)
    assert code == 1 and "differ at bound 2" in out


def test_derive():
    assert call("derive", BETA1, "lhs", "a@A") == (0, "|- lhs : a@A: derivable\n", "")
    assert call("derive", BETA1, "lhs", "b@A")[0] == 1
    assert call("derive", BETA1, "lhs", "((")[0] == 2


def test_fincheck():
    code, out, _ = call("fincheck", LNAT)
    assert code == 1
    assert out.splitlines() == ["all: NotFinitary (the length image is infinite)", "short: Finitary (finite set)"]
    assert call("fincheck", LNAT, "short")[0] == 0


def test_fincheck_with_extra_probes(tmp_path):
    extra = tmp_path / "p.fr"
    extra.write_text("probe nats : N = full\n")
    code, out, _ = call("fincheck", LNAT, "nats", "--probes", extra)
    assert code == 1 and out.startswith("nats: NotFinitary")


def test_relcheck():
    assert call("relcheck", LNAT, "succ")[0] == 0
    assert call("relcheck", LNAT, "natiter")[0] == 0
    code, data = call_json("relcheck", LNAT, "flip")
    assert code == 0 and data["verdict"] == "Finitary"


def test_relcheck_refutes_fix(tmp_path):
    src = tmp_path / "fix.fr"
    src.write_text("space A = {a}\nconst y : (A => A) => A = fix\n")
    code, out, _ = call("relcheck", src, "y", "--n", 10)
    assert code == 1 and "NotFinitary" in out


def test_fixweb_and_lazyweb():
    code, out, _ = call("fixweb", LNAT, "--depth", 3)
    assert code == 0
    assert sorted(line.split("# ")[1] for line in out.splitlines()) == ["0", "0~", "1", "1~", "2", "2~"]
    code, out, _ = call("lazyweb", LNAT, "--bound", 3)
    assert code == 0 and len(out.splitlines()) == 4


def test_demo_tree_example_is_byte_identical_to_golden():
    code, out, _ = call("demo", "tree-example")
    assert code == 0
    assert out.encode() == (GOLDEN / "tree_example.txt").read_bytes()


@pytest.mark.parametrize("name", ["fix-not-finitary", "supp-not-finitary"])
def test_certificates_round_trip_through_verify(tmp_path, name):
    code, cert, _ = call("demo", name, "--n", 50)
    assert code == 0
    assert cert.count("\nmember ") == 50
    path = tmp_path / "cert.txt"
    path.write_text(cert)
    assert call("verify-cert", path)[0] == 0
    lines = cert.splitlines()
    lines[-1] = lines[-1].rsplit(" ", 1)[0] + " " + lines[-2].split(" ", 2)[2]
    path.write_text("\n".join(lines) + "\n")
    code, out, _ = call("verify-cert", path)
    assert code == 1 and "repeats" in out


# ---------------------------------------------------------------- behaviour shared by all commands

def test_runs_are_deterministic():
    runs = [call("fixweb", LNAT, "--depth", 3, "--json")[1] for _ in range(3)]
    assert runs[0] == runs[1] == runs[2]


def test_json_output_is_sorted_and_complete():
    code, out, _ = call("demo", "tree-example", "--json")
    data = json.loads(out)
    assert list(data) == sorted(data)
    assert data["command"] == "demo" and len(data["points"]) == 15


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["nosuchcommand"],
        ["denote", BETA1],
        ["denote", BETA1, "lhs", "--bound", "-1"],
        ["denote", "/nonexistent.fr", "lhs"],
        ["denote", BETA1, "nope"],
    ],
)
def test_usage_errors_exit_2(argv, capsys):
    assert call(*argv)[0] == 2


def test_source_errors_exit_2_with_position(tmp_path):
    src = tmp_path / "bad.fr"
    src.write_text("space A = {a}\nterm t = y\n")
    code, _, err = call("denote", src, "t")
    assert code == 2 and "2:1: unbound name 'y'" in err


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "finrel.cli", "demo", "tree-example"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout == (GOLDEN / "tree_example.txt").read_text()
