"""
DEL Toolkit - Excel Reports
Truth tables and model listings as formatted workbooks.

Sheets:
- Summary: one row per sentence with its truth count and exactness
- Truth table: states x sentences, true cells highlighted
- Model: successors per agent and atoms per state
"""

from pathlib import Path
from typing import Dict, Iterable, List, Optional

import numpy as np
import pandas as pd
from openpyxl import Workbook
from openpyxl.styles import Alignment, Border, Font, PatternFill, Side
from openpyxl.utils.dataframe import dataframe_to_rows

from core import DEFAULT_CONFIG, EngineConfig, Signature, StateModel
from formula_parser import render
from model_checker import ModelChecker, TruthSet


class ReportFormatter:
    """Styling shared by every sheet"""
    HEADER_FILL = PatternFill(start_color='366092', end_color='366092', fill_type='solid')
    TRUE_FILL = PatternFill(start_color='C6EFCE', end_color='C6EFCE', fill_type='solid')
    UNKNOWN_FILL = PatternFill(start_color='FFEB9C', end_color='FFEB9C', fill_type='solid')

    HEADER_FONT = Font(name='Arial', size=10, bold=True, color='FFFFFF')
    TITLE_FONT = Font(name='Arial', size=12, bold=True)
    NORMAL_FONT = Font(name='Arial', size=10)
    NOTE_FONT = Font(name='Arial', size=9, italic=True)

    THIN_BORDER = Border(
        left=Side(style='thin'), right=Side(style='thin'),
        top=Side(style='thin'), bottom=Side(style='thin'),
    )
    CENTER = Alignment(horizontal='center', vertical='center')
    LEFT = Alignment(horizontal='left', vertical='center')

    @staticmethod
    def fit_columns(worksheet, min_width=8, max_width=60):
        for cells in worksheet.columns:
            length = max(len(str(c.value or '')) for c in cells)
            worksheet.column_dimensions[cells[0].column_letter].width = min(max(length + 2, min_width), max_width)

    @classmethod
    def header(cls, cell):
        cell.font = cls.HEADER_FONT
        cell.fill = cls.HEADER_FILL
        cell.alignment = cls.CENTER
        cell.border = cls.THIN_BORDER


def truth_table(model: StateModel, sentences: Iterable, signature: Signature,
                config: EngineConfig = DEFAULT_CONFIG, fuel: Optional[int] = None) -> pd.DataFrame:
    """
    Boolean DataFrame indexed by state, one column per rendered sentence.
    Columns whose iteration did not converge are listed in attrs['unknown'].
    """
    checker = ModelChecker(signature, config, star_fuel=fuel)
    columns: Dict[str, List[bool]] = {}
    unknown = []
    for sentence in sentences:
        name = render(sentence)
        result: TruthSet = checker.truth_set(model, sentence)
        columns[name] = [s in result for s in model.states]
        if not result.exact:
            unknown.append(name)
    table = pd.DataFrame(columns, index=pd.Index(model.states, name='state'))
    table.attrs['unknown'] = unknown
    return table


def model_frame(model: StateModel) -> pd.DataFrame:
    rows = {}
    for s in model.states:
        row = {f"K_{a}": ", ".join(model.successors(s, a)) for a in model.agents}
        row['atoms'] = ", ".join(sorted(model.atoms_at(s)))
        rows[s] = row
    return pd.DataFrame.from_dict(rows, orient='index').rename_axis('state')


class ReportExporter:
    """Writes truth tables and models to one workbook"""

    def export(self, filepath: str, model: StateModel, table: pd.DataFrame, title: str = "Truth table") -> Path:
        wb = Workbook()
        wb.remove(wb.active)
        self._summary_sheet(wb.create_sheet("Summary"), table, title)
        self._table_sheet(wb.create_sheet("Truth table"), table)
        self._model_sheet(wb.create_sheet("Model"), model)
        path = Path(filepath)
        wb.save(path)
        return path

    def _summary_sheet(self, ws, table: pd.DataFrame, title: str):
        ws['A1'] = title
        ws['A1'].font = ReportFormatter.TITLE_FONT
        for col, label in enumerate(['Sentence', 'True at', 'States', 'Exact'], 1):
            cell = ws.cell(row=3, column=col, value=label)
            ReportFormatter.header(cell)
        unknown = set(table.attrs.get('unknown', ()))
        for r, name in enumerate(table.columns, 4):
            ws.cell(row=r, column=1, value=name).alignment = ReportFormatter.LEFT
            ws.cell(row=r, column=2, value=int(table[name].sum()))
            ws.cell(row=r, column=3, value=len(table))
            exact = ws.cell(row=r, column=4, value='no' if name in unknown else 'yes')
            if name in unknown:
                exact.fill = ReportFormatter.UNKNOWN_FILL
        if unknown:
            note = ws.cell(row=len(table.columns) + 5, column=1,
                           value='Note: iteration did not converge within the unfold budget')
            note.font = ReportFormatter.NOTE_FONT
        ReportFormatter.fit_columns(ws)

    def _table_sheet(self, ws, table: pd.DataFrame):
        frame = pd.DataFrame(np.where(table.values, 'T', ''), index=table.index, columns=table.columns)
        for r, row in enumerate(dataframe_to_rows(frame, index=True, header=True), 1):
            for c, value in enumerate(row, 1):
                cell = ws.cell(row=r, column=c, value=value)
                if r == 1:
                    ReportFormatter.header(cell)
                    continue
                cell.font = ReportFormatter.NORMAL_FONT
                cell.border = ReportFormatter.THIN_BORDER
                cell.alignment = ReportFormatter.LEFT if c == 1 else ReportFormatter.CENTER
                if value == 'T':
                    cell.fill = ReportFormatter.TRUE_FILL
        ReportFormatter.fit_columns(ws)

    def _model_sheet(self, ws, model: StateModel):
        frame = model_frame(model)
        for r, row in enumerate(dataframe_to_rows(frame, index=True, header=True), 1):
            for c, value in enumerate(row, 1):
                cell = ws.cell(row=r, column=c, value=value)
                if r == 1:
                    ReportFormatter.header(cell)
                else:
                    cell.font = ReportFormatter.NORMAL_FONT
                    cell.border = ReportFormatter.THIN_BORDER
        ReportFormatter.fit_columns(ws)
