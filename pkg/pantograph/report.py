import csv
from enum import Enum
from typing import Any, Dict, Generic, List, TextIO, TypeVar, Union

from pydantic import BaseModel, Field
from pydantic.generics import GenericModel

Result = TypeVar("Result")

Cell = Union[float, int, str, None]


class ReportStatus(str, Enum):
    success = "success"
    error = "error"


class Table(BaseModel):
    """Rows of a tabulation, the payload shared by the csv and json writers."""

    columns: List[str] = Field(..., description="Column names, in output order")
    rows: List[Dict[str, Cell]] = Field(default_factory=list)

    class Config:
        smart_union = True

    def append(self, *values: Cell):
        if len(values) != len(self.columns):
            raise ValueError(f"expected {len(self.columns)} values, got {len(values)}")
        self.rows.append(dict(zip(self.columns, values)))


class ErrorReport(BaseModel):
    detail: str
    status: ReportStatus = ReportStatus.error
    exit_code: int = 1

    @classmethod
    def from_exc(cls, exc, exit_code: int):
        return cls(detail=getattr(exc, "detail", str(exc)), exit_code=exit_code)


class Report(GenericModel, Generic[Result]):
    status: ReportStatus = ReportStatus.success
    result: Union[Result, None] = None


def format_cell(value: Any) -> str:
    """
    Shortest text that parses back to the same double (at most 17 significant
    digits); integral floats drop the trailing '.0'.
    """
    if value is None:
        return ""
    if isinstance(value, float):
        text = repr(value)
        return text[:-2] if text.endswith(".0") else text
    return str(value)


def write_table(table: Table, stream: TextIO, as_json: bool):
    """csv with a header row, or one json Report object"""
    if as_json:
        stream.write(Report[Table](result=table).json() + "\n")
        return
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow(format_cell(row[column]) for column in table.columns)
