"""Tests for the command line interface"""

import io
import json
import tempfile
from contextlib import redirect_stdout
from pathlib import Path

from openpyxl import load_workbook

from del_cli import EXIT_ERROR, EXIT_FALSE, EXIT_TRUE, main


def run(*argv):
    out = io.StringIO()
    with redirect_stdout(out):
        code = main(list(argv))
    return code, out.getvalue()


def setup_files(folder: Path):
    """Pub signature, C_2 and the private announcement pair under folder"""
    files = {
        'pub': folder / "pub.json",
        'pri': folder / "pri.json",
        'c2': folder / "c2.json",
        'pair': folder / "pair.json",
    }
    assert run('gen', 'sig', 'pub', '-o', str(files['pub']))[0] == EXIT_TRUE
    assert run('gen', 'sig', 'pri', '-o', str(files['pri']))[0] == EXIT_TRUE
    assert run('gen', 'cn', '2', '-o', str(files['c2']))[0] == EXIT_TRUE
    assert run('gen', 'private', '--J', '1', '2', '--f', '1:2', '2:3', '--j', '1',
               '-o', str(files['pair']))[0] == EXIT_TRUE
    pair = json.loads(files['pair'].read_text())
    for key in ('S', 'T'):
        files[key] = folder / f"{key}.json"
        files[key].write_text(json.dumps(pair[key]))
    return {k: str(v) for k, v in files.items()}


def test_check():
    with tempfile.TemporaryDirectory() as tmp:
        f = setup_files(Path(tmp))
        code, out = run('check', '--sig', f['pub'], '--model', f['c2'], '--state', 'a_6',
                        '--formula', '<Pub(p)> E_{A,B} q')
        assert code == EXIT_TRUE and "true at a_6" in out
        code, out = run('check', '--sig', f['pub'], '--model', f['c2'], '--state', 'a_2',
                        '--formula', '<Pub(p)> E_{A,B} q')
        assert code == EXIT_FALSE and "false at a_2" in out


def test_check_errors():
    with tempfile.TemporaryDirectory() as tmp:
        f = setup_files(Path(tmp))
        code, out = run('check', '--sig', f['pub'], '--model', f['c2'], '--state', 'nowhere',
                        '--formula', 'p')
        assert code == EXIT_ERROR and "Error" in out
        code, out = run('check', '--sig', f['pub'], '--model', f['c2'], '--state', 'a_1',
                        '--formula', 'p & & q')
        assert code == EXIT_ERROR
        code, _ = run('check', '--model', f['c2'], '--state', 'a_1', '--formula', 'p')
        assert code == EXIT_ERROR
        assert run('frobnicate')[0] == EXIT_ERROR


def test_check_unknown_iteration():
    with tempfile.TemporaryDirectory() as tmp:
        folder = Path(tmp)
        sig, model = folder / "single.json", folder / "dec.json"
        run('gen', 'sig', 'pub', '--agents', 'A', '-o', str(sig))
        run('gen', 'decreasing', '4', '-o', str(model))
        code, out = run('check', '--sig', str(sig), '--model', str(model), '--state', 'r',
                        '--formula', '[Pub(M_A true)*] M_A K_A false', '--unfold', '1')
        assert code == EXIT_ERROR and "UNKNOWN" in out
        code, out = run('check', '--sig', str(sig), '--model', str(model), '--state', 'r',
                        '--formula', '[Pub(M_A true)*] M_A K_A false', '--unfold', '8')
        assert code == EXIT_FALSE


def test_eval_with_report():
    with tempfile.TemporaryDirectory() as tmp:
        f = setup_files(Path(tmp))
        report = Path(tmp) / "table.xlsx"
        code, out = run('eval', '--sig', f['pri'], '--model', f['S'],
                        '--formula', '<Pri(p, true)> E_{A} M_B ~p', '--formula', 'p',
                        '--xlsx', str(report))
        assert code == EXIT_TRUE
        assert "<Pri(p, true)> E_{A} M_B ~p: {c1_1, c1_2, c2_1, c2_2, c2_3}" in out
        assert load_workbook(report).sheetnames == ["Summary", "Truth table", "Model"]


def test_normalize_trace():
    with tempfile.TemporaryDirectory() as tmp:
        f = setup_files(Path(tmp))
        code, out = run('normalize', '--sig', f['pub'], '--formula', '[Pub(p)]q', '--trace')
        assert code == EXIT_TRUE
        lines = out.strip().splitlines()
        assert lines[-1] == "~(p & ~q)"
        assert "r4:" in lines[0]


def test_decide():
    with tempfile.TemporaryDirectory() as tmp:
        f = setup_files(Path(tmp))
        code, out = run('decide', '--sig', f['pub'], '--formula', 'p & ~p')
        assert code == EXIT_FALSE and out.startswith("UNSAT")
        witness = Path(tmp) / "w.json"
        code, out = run('decide', '--sig', f['pub'], '--formula', 'M_A p & ~p',
                        '--witness', str(witness), '--minimize')
        assert code == EXIT_TRUE and out.startswith("SAT")
        data = json.loads(witness.read_text())
        assert data['state'] in data['model']['states']
        code, out = run('decide', '--sig', f['pub'], '--valid', '--formula', '[Pub(p)] C_{A,B} p')
        assert code == EXIT_TRUE and out.startswith("VALID")
        code, out = run('decide', '--sig', f['pub'], '--valid', '--formula', 'p -> K_A p')
        assert code == EXIT_FALSE and out.startswith("NOT VALID")


def test_translate():
    with tempfile.TemporaryDirectory() as tmp:
        f = setup_files(Path(tmp))
        code, out = run('translate', '--sig', f['pub'], '--formula', 'C_{A,B} p')
        assert code == EXIT_TRUE and out.strip() == "[(A + B)*]p"


def test_bisim():
    with tempfile.TemporaryDirectory() as tmp:
        f = setup_files(Path(tmp))
        code, out = run('bisim', '--model', f['S'], '--other', f['T'], '--state', 'b', '--other-state', 'b')
        assert code == EXIT_TRUE and "are bisimilar" in out
        code, out = run('bisim', '--model', f['S'], '--other', f['T'], '--state', 'a', '--other-state', 'a')
        assert code == EXIT_FALSE and "not bisimilar" in out
        code, _ = run('bisim', '--model', f['S'], '--state', 'a')
        assert code == EXIT_ERROR


def test_gen_to_stdout():
    code, out = run('gen', 'cn', '2')
    assert code == EXIT_TRUE
    assert len(json.loads(out)['states']) == 10
    assert run('gen', 'cn', '3')[0] == EXIT_ERROR
    assert run('gen', 'private', '--J', '1', '--f', '1-2', '--j', '1')[0] == EXIT_ERROR


if __name__ == "__main__":
    print("🧪 Testing CLI...")
    for name, fn in list(globals().items()):
        if name.startswith("test_"):
            fn()
            print(f"   ✓ {name}")
    print("✅ All tests passed!")
