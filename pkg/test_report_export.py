"""Tests for truth tables and Excel reports"""

import tempfile
from pathlib import Path

from openpyxl import load_workbook

from formula_parser import parse_sentence
from generators import gen_cn, gen_decreasing, pub_signature
from report_export import ReportExporter, model_frame, truth_table

PUB = pub_signature()


def test_truth_table_columns():
    c2 = gen_cn(2)
    sentences = [parse_sentence(t, PUB) for t in ("p", "<Pub(p)> E_{A,B} q")]
    table = truth_table(c2, sentences, PUB)
    assert list(table.columns) == ["p", "<Pub(p)> E_{A,B} q"]
    assert table.index.name == 'state'
    assert int(table["p"].sum()) == 8
    assert list(table.index[table["<Pub(p)> E_{A,B} q"].values]) == [f"a_{i}" for i in range(6, 11)]
    assert table.attrs['unknown'] == []


def test_unknown_columns_are_listed():
    single = pub_signature(("A",))
    sentence = parse_sentence("[Pub(M_A true)*] M_A K_A false", single)
    table = truth_table(gen_decreasing(4), [sentence], single, fuel=1)
    assert table.attrs['unknown'] == list(table.columns)


def test_model_frame():
    frame = model_frame(gen_cn(2))
    assert frame.loc["a_1", "K_A"] == "a_2"
    assert frame.loc["a_9", "atoms"] == "p, q"
    assert frame.loc["a_1", "atoms"] == ""


def test_workbook_layout():
    c2 = gen_cn(2)
    table = truth_table(c2, [parse_sentence("q", PUB)], PUB)
    with tempfile.TemporaryDirectory() as tmp:
        path = ReportExporter().export(str(Path(tmp) / "c2.xlsx"), c2, table, title="C_2")
        wb = load_workbook(path)
        assert wb.sheetnames == ["Summary", "Truth table", "Model"]
        summary = wb["Summary"]
        assert summary["A1"].value == "C_2"
        assert summary["A4"].value == "q"
        assert summary["B4"].value == 1
        assert summary["D4"].value == "yes"
        marks = [row[1] for row in wb["Truth table"].iter_rows(min_row=2, values_only=True) if row[1]]
        assert marks == ["T"]


if __name__ == "__main__":
    print("🧪 Testing Report Export...")
    for name, fn in list(globals().items()):
        if name.startswith("test_"):
            fn()
            print(f"   ✓ {name}")
    print("✅ All tests passed!")
