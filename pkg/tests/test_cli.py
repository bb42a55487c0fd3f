import json
import subprocess
import sys
from pathlib import Path

import pytest

from golden_cases import CASES, facts_in_text
from qobs.cli import run
from qobs.docio import Loader, observable_document

ROOT = Path(__file__).resolve().parent.parent


@pytest.fixture(autouse=True)
def at_root(monkeypatch):
    monkeypatch.chdir(ROOT)


@pytest.mark.parametrize("name,argv", CASES, ids=[c[0] for c in CASES])
def test_golden(name, argv):
    code, out = run(argv)
    golden = (ROOT / "tests" / "golden" / f"{name}.txt").read_text(encoding="utf-8")
    assert f"exit {code}\n{out}" == golden
    jcode, jout = run(["--json", *argv])
    assert jcode == code
    assert facts_in_text(jout, out)
    assert run(["--json", *argv]) == (jcode, jout)


def test_spec_examples():
    code, out = run(["validate", "corpus/chain5.qsa"])
    assert code == 0 and out.startswith("OK\n") and "flags: mv,lattice,rdp" in out
    code, out = run(["validate", "corpus/bad_one_plus_one.qsa"])
    assert code == 1 and out.startswith("FAIL axiom-iv")
    code, out = run(["validate", "corpus/malformed.qsa"])
    assert code == 2 and out.startswith("FAIL parse") and ":3:" in out
    code, out = run(["eval", "corpus/example.obs", "--set", "(-inf,1.5)"])
    assert (code, out) == (0, "OK\n1/5\n")
    assert run(["spectrum", "corpus/example.obs"]) == (0, "OK\n{1} U {2}\n")
    code, out = run(["states", "corpus/chain5.qsa", "--extremal", "--json"])
    assert code == 0 and len(json.loads(out)["extremal"]) == 1


def test_exit_codes():
    assert run([])[0] == 3
    assert run(["eval", "corpus/example.obs"])[0] == 3
    assert run(["eval", "corpus/example.obs", "--set", "(0,"])[0] == 2
    assert run(["exp", "corpus/example.obs", "--f", "1"])[0] == 3
    assert run(["validate", "corpus/does-not-exist.qsa"])[0] == 2
    assert run(["refine", "corpus/chain5.qsa", "x", "0", "0", "0"])[0] == 3


def test_build_writes_canonical_observable(tmp_path):
    out = tmp_path / "x.obs"
    code, report = run(["build", "--family", "corpus/example.spf", "-o", str(out)])
    assert code == 0
    text = out.read_text(encoding="utf-8")
    s, pairs = Loader().observable_atoms(out)
    assert [(str(t), s.names[a]) for t, a in pairs] == [("1", "1/5"), ("2", "4/5")]
    ref = text.splitlines()[0].split()[1]
    from qobs.observables import make_observable

    assert observable_document(make_observable(s, pairs), ref) == text
    assert run(["validate", str(out)])[1] == run(["validate", "corpus/example.obs"])[1]


def test_build_writes_povm(tmp_path):
    out = tmp_path / "p.mat"
    assert run(["build", "--family", "corpus/hilbert.mat", "-o", str(out)])[0] == 0
    code, report = run(["exp", str(out)])
    assert code == 0 and report == run(["exp", "corpus/hilbert.mat"])[1]


def test_console_entry_point():
    cmd = [sys.executable, "-m", "qobs.cli", "spectrum", "corpus/example.obs"]
    first = subprocess.run(cmd, cwd=ROOT, capture_output=True, check=False)
    second = subprocess.run(cmd, cwd=ROOT, capture_output=True, check=False)
    assert first.returncode == 0
    assert first.stdout == second.stdout == b"OK\n{1} U {2}\n"
