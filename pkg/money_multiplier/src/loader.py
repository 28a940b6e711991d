# src/loader.py
import logging
from typing import List, Sequence

import pandas as pd
from pydantic import ValidationError

from .errors import ScenarioFormatError
from .models import ScenarioRow
from .utils import ensure_directories, format_significant

logger = logging.getLogger(__name__)

SCENARIO_COLUMNS = ("period", "i", "i_r", "chi", "uc_over_y")
NUMERIC_COLUMNS = ("i", "i_r", "chi", "uc_over_y")
# Header is line 1, the first data row line 2
FIRST_DATA_LINE = 2


class ScenarioLoader:
    """Handles loading and validation of scenario CSV files"""

    def __init__(self, filepath: str):
        self.filepath = filepath
        self.frame: pd.DataFrame = pd.DataFrame()
        self.rows: List[ScenarioRow] = []
        self.parsed = False

    def load_data(self) -> None:
        """Read the raw table; every cell stays text until validated"""
        try:
            self.frame = pd.read_csv(
                self.filepath, dtype=str, keep_default_na=False, skipinitialspace=True
            )
        except FileNotFoundError:
            logger.error(f"Scenario file not found: {self.filepath}")
            raise ScenarioFormatError(f"scenario file not found: {self.filepath}")
        except pd.errors.EmptyDataError:
            raise ScenarioFormatError(f"{self.filepath} is empty", line=1)
        except pd.errors.ParserError as e:
            raise ScenarioFormatError(f"{self.filepath}: {e}")
        self.frame.columns = [str(c).strip() for c in self.frame.columns]
        missing = [c for c in SCENARIO_COLUMNS if c not in self.frame.columns]
        if missing:
            raise ScenarioFormatError(f"missing column(s) {missing} in {self.filepath}", line=1)
        logger.info(f"Loaded {len(self.frame)} scenario rows from {self.filepath}")

    def parse_rows(self) -> None:
        """Validate rows in file order"""
        self.rows = []
        for offset, record in enumerate(self.frame.to_dict(orient="records")):
            line = FIRST_DATA_LINE + offset
            values = {}
            for column in NUMERIC_COLUMNS:
                cell = str(record[column]).strip()
                try:
                    values[column] = float(cell)
                except ValueError:
                    raise ScenarioFormatError(f"column {column}: '{cell}' is not a number", line=line)
            try:
                row = ScenarioRow(
                    period=str(record["period"]).strip(),
                    i=values["i"],
                    i_r=values["i_r"],
                    chi=values["chi"],
                    uc_over_y_obs=values["uc_over_y"],
                )
            except ValidationError as e:
                problems = "; ".join(
                    f"{err['loc'][0] if err['loc'] else 'row'}: {err['msg']}" for err in e.errors()
                )
                raise ScenarioFormatError(problems, line=line) from e
            self.rows.append(row)
        self.parsed = True

    def get_rows(self) -> List[ScenarioRow]:
        if not self.parsed:
            self.load_data()
            self.parse_rows()
        return self.rows


def load_scenario(path: str) -> List[ScenarioRow]:
    """Scenario rows from a `period,i,i_r,chi,uc_over_y` CSV, order preserved"""
    return ScenarioLoader(path).get_rows()


def write_scenario(rows: Sequence[ScenarioRow], path: str) -> None:
    """Write rows with 17 significant digits so a reload is bit-exact"""
    ensure_directories([path])
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(",".join(SCENARIO_COLUMNS) + "\n")
        for row in rows:
            cells = [row.period] + [
                format_significant(v) for v in (row.i, row.i_r, row.chi, row.uc_over_y_obs)
            ]
            f.write(",".join(cells) + "\n")
    logger.info(f"Wrote {len(rows)} scenario rows to {path}")
