"""Synthetic bank-customer table with a known logistic churn signal."""

import logging
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
import pandas as pd

from src.exceptions import DataError
from src.tabular import DEFAULT_NULL_TOKENS, Frame

logger = logging.getLogger(__name__)

NULL_TOKEN = "NULL"
TARGET_COLUMN = "churn"
POSITIVE_VALUE = "Yes"
ID_COLUMN = "cust_id"

# Column that always gets this null fraction, to exercise the drop rule.
HIGH_NULL_COLUMN = "lga"
HIGH_NULL_FRACTION = 0.40

OCCUPATIONS = ["Civil Servant", "Trader", "Engineer", "Teacher", "Student",
               "Farmer", "Medical Doctor", "Self Employed"]
STATES = ["Lagos", "Oyo", "FCT", "Kano", "Rivers", "Enugu", "Kaduna", "Ogun"]
LGAS = ["Ikeja", "Ibadan North", "Municipal", "Nassarawa", "Port Harcourt",
        "Enugu North", "Kaduna South", "Abeokuta South", "Surulere", "Eti-Osa"]

NULLABLE_COLUMNS = [
    "gender", "marital_status", "religion", "occupation", "state", "tenure_months",
    "mobapp_fund_trsl_lcy_count", "mobapp_fund_trsl_lcy_vol", "mobapp_fund_trsl_lcy_revenue",
    "mobapp_fund_trsl_fcy_count", "mobapp_fund_trsl_fcy_vol", "mobapp_fund_trsl_fcy_revenue",
    "mobapp_lifestyle_count", "mobapp_lifestyle_vol", "mobapp_lifestyle_revenue",
]

# Share of customers whose accounts have gone dormant.
DORMANT_RATE = 0.035

# Ground-truth churn logit weights over a subset of the columns. The dormant
# weight outranks every other term, so churners come from dormant accounts
# first and are ordered among them by the rest of the logit.
LOGIT_WEIGHTS = {
    "inactive": 15.0,
    "tenure_months": -0.01,
    "log_lcy_count": -1.0,
    "log_lifestyle_count": -0.5,
    "single": 0.7,
    "no_current_account": 0.5,
}


def _money(values: np.ndarray) -> List[str]:
    return [f"{v:.2f}" for v in values]


def _ints(values: np.ndarray) -> List[str]:
    return [str(int(v)) for v in values]


def churn_logit(columns: Dict[str, np.ndarray]) -> np.ndarray:
    """Ground-truth churn logit for numeric arrays keyed like LOGIT_WEIGHTS."""
    return sum(weight * columns[name] for name, weight in LOGIT_WEIGHTS.items())


def gen_synthetic(
    n_rows: int,
    churn_rate: float = 0.03,
    null_rate: float = 0.05,
    seed: int = 7,
    path: Optional[Union[str, Path]] = None,
) -> Frame:
    """Generate a customer table with exactly round(churn_rate * n_rows) churners.

    Churners are the top rows by ground-truth logit plus Gumbel noise, which
    samples them without replacement in proportion to exp(logit). Every
    nullable column gets round(null_rate * n_rows) NULL cells, and the
    HIGH_NULL_COLUMN gets HIGH_NULL_FRACTION of its cells NULL.
    """
    if n_rows < 10:
        raise DataError(f"n_rows must be at least 10, got {n_rows}")
    for name, rate in (("churn_rate", churn_rate), ("null_rate", null_rate)):
        if not 0.0 <= rate < 1.0:
            raise DataError(f"{name} must lie in [0, 1), got {rate}")

    rng = np.random.default_rng(seed)
    n = n_rows

    gender = rng.choice(["M", "F"], size=n, p=[0.55, 0.45])
    marital = rng.choice(["S", "M", "D"], size=n, p=[0.4, 0.5, 0.1])
    religion = rng.choice(["Christian", "Islam", "Other Religion"], size=n, p=[0.5, 0.45, 0.05])
    occupation = rng.choice(OCCUPATIONS, size=n)
    state = rng.choice(STATES, size=n)
    lga = rng.choice(LGAS, size=n)
    inactive = rng.random(n) < DORMANT_RATE
    days_idle = np.where(inactive, rng.integers(120, 366, size=n), rng.integers(0, 31, size=n))

    current_account = (rng.random(n) < 0.7).astype(np.int64)
    xclusive = (rng.random(n) < 0.05).astype(np.int64)
    youth_savings = (rng.random(n) < 0.10).astype(np.int64)
    community_savings = (rng.random(n) < 0.05).astype(np.int64)
    hida = (rng.random(n) < 0.15).astype(np.int64)
    tenure = rng.integers(1, 241, size=n)

    engagement = rng.standard_normal(n)
    lcy_rate = np.where(inactive, np.exp(0.5 + 0.7 * engagement), np.exp(1.6 + 0.7 * engagement))
    lcy_count = rng.poisson(lcy_rate)
    lcy_vol = lcy_count * rng.lognormal(10.0, 0.8, size=n)
    lcy_revenue = lcy_vol * 0.005
    fcy_count = rng.poisson(0.3 * np.exp(0.5 * engagement))
    fcy_vol = fcy_count * rng.lognormal(5.0, 0.7, size=n)
    fcy_revenue = fcy_vol * 0.01
    lifestyle_count = rng.poisson(np.exp(0.3 + 0.6 * engagement))
    lifestyle_vol = lifestyle_count * rng.lognormal(8.5, 0.6, size=n)
    lifestyle_revenue = lifestyle_vol * 0.02

    logit = churn_logit({
        "inactive": inactive.astype(np.float64),
        "tenure_months": tenure.astype(np.float64),
        "log_lcy_count": np.log1p(lcy_count),
        "log_lifestyle_count": np.log1p(lifestyle_count),
        "single": (marital == "S").astype(np.float64),
        "no_current_account": 1.0 - current_account,
    })
    n_churners = round(churn_rate * n)
    keys = logit + rng.gumbel(size=n)
    churned = np.zeros(n, dtype=bool)
    churned[np.argsort(-keys, kind="mergesort")[:n_churners]] = True

    columns: Dict[str, List[str]] = {
        ID_COLUMN: [f"C{i:07d}" for i in range(1, n + 1)],
        "gender": gender.tolist(),
        "marital_status": marital.tolist(),
        "religion": religion.tolist(),
        "occupation": occupation.tolist(),
        "state": state.tolist(),
        "lga": lga.tolist(),
        "cust_txn_status": ["Inactive" if flag else "Active" for flag in inactive],
        "days_since_last_txn": _ints(days_idle),
        "current_account": _ints(current_account),
        "xclusive_subscript": _ints(xclusive),
        "savings_deposit_youth": _ints(youth_savings),
        "community_savings_account": _ints(community_savings),
        "hida": _ints(hida),
        "tenure_months": _ints(tenure),
        "mobapp_fund_trsl_lcy_count": _ints(lcy_count),
        "mobapp_fund_trsl_lcy_vol": _money(lcy_vol),
        "mobapp_fund_trsl_lcy_revenue": _money(lcy_revenue),
        "mobapp_fund_trsl_fcy_count": _ints(fcy_count),
        "mobapp_fund_trsl_fcy_vol": _money(fcy_vol),
        "mobapp_fund_trsl_fcy_revenue": _money(fcy_revenue),
        "mobapp_lifestyle_count": _ints(lifestyle_count),
        "mobapp_lifestyle_vol": _money(lifestyle_vol),
        "mobapp_lifestyle_revenue": _money(lifestyle_revenue),
        TARGET_COLUMN: [POSITIVE_VALUE if flag else "No" for flag in churned],
    }

    n_null = round(null_rate * n)
    for name in NULLABLE_COLUMNS:
        if n_null:
            for row in rng.choice(n, size=n_null, replace=False):
                columns[name][row] = NULL_TOKEN
    for row in rng.choice(n, size=round(HIGH_NULL_FRACTION * n), replace=False):
        columns[HIGH_NULL_COLUMN][row] = NULL_TOKEN

    header = list(columns)
    records = [list(row) for row in zip(*columns.values())]
    frame = Frame.from_text(header, records, null_tokens=DEFAULT_NULL_TOKENS)

    if path is not None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        pd.DataFrame(columns, columns=header).to_csv(path, index=False, lineterminator="\n", encoding="utf-8")
        logger.info("Wrote %d synthetic rows (%d churners) to %s", n, n_churners, path)
    return frame
