from app.utils.io import append_csv_rows, atomic_write_text
from app.utils.report import RATIO_COLUMNS, ratio_table, results_frame

__all__ = ["append_csv_rows", "atomic_write_text", "RATIO_COLUMNS", "ratio_table", "results_frame"]
