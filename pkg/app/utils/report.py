from typing import Sequence

import numpy as np
import pandas as pd

from app.errors import MissingBaselineError

RATIO_COLUMNS = ["group", "run_id", "coupling", "speedup", "energy_ratio", "llcmpi_ratio"]


def results_frame(rows: Sequence[dict], columns: Sequence[str]) -> pd.DataFrame:
    return pd.DataFrame(list(rows), columns=list(columns))


def ratio_table(results: pd.DataFrame) -> pd.DataFrame:
    """
    Analog-vs-digital ratios of every analog run against the digital run of its group.

    Args:
        results: One row per run with ``group``, ``run_id``, ``mapping``, ``coupling``,
            ``time_s``, ``energy_j`` and ``llcmpi`` columns.

    Returns:
        One row per analog run; speedup and energy ratio are digital / analog,
        the LLCMPI ratio is analog / digital.

    Raises:
        MissingBaselineError: if a group with analog runs has no digital run.
    """
    if results.empty:
        return pd.DataFrame(columns=RATIO_COLUMNS)
    df = results.copy()
    for col in ("time_s", "energy_j", "llcmpi"):
        df[col] = df[col].astype(float)
    digital = df[df["mapping"] == "digital"].drop_duplicates("group", keep="first").set_index("group")
    analog = df[df["mapping"] == "analog"]
    missing = sorted(set(analog["group"]) - set(digital.index))
    if missing:
        raise MissingBaselineError(missing[0])
    base = digital.loc[analog["group"]]
    out = pd.DataFrame({
        "group": analog["group"].to_numpy(),
        "run_id": analog["run_id"].to_numpy(),
        "coupling": analog["coupling"].to_numpy(),
        "speedup": base["time_s"].to_numpy() / analog["time_s"].to_numpy(),
        "energy_ratio": base["energy_j"].to_numpy() / analog["energy_j"].to_numpy(),
    })
    with np.errstate(divide="ignore", invalid="ignore"):
        out["llcmpi_ratio"] = np.where(base["llcmpi"].to_numpy() > 0,
                                       analog["llcmpi"].to_numpy() / base["llcmpi"].to_numpy(), np.nan)
    return out[RATIO_COLUMNS]
