"""扫描结果表 (SweepResult)：固定列、固定排序、NA 表示未请求/未计算"""
import logging
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

COLUMNS = (
    "scheme",
    "variant",
    "user",
    "parameter",
    "value",
    "common_rate",
    "private_rate",
    "closed_form_rate",
    "mc_approx_mean",
    "mc_approx_stderr",
    "mc_exact_mean",
    "mc_exact_stderr",
    "sum_rate",
    "ee",
    "jfi",
    "approx_warning",
)

TEXT_COLUMNS = ("scheme", "variant", "parameter")
FLOAT_COLUMNS = (
    "value",
    "common_rate",
    "private_rate",
    "closed_form_rate",
    "mc_approx_mean",
    "mc_approx_stderr",
    "mc_exact_mean",
    "mc_exact_stderr",
    "sum_rate",
    "ee",
    "jfi",
)

# 系统级指标，同一网格点的每个用户行取值相同
SYSTEM_COLUMNS = ("sum_rate", "ee", "jfi")

COLUMN_DTYPES: Dict[str, Any] = {
    **{name: object for name in TEXT_COLUMNS},
    "user": "int64",
    **{name: "float64" for name in FLOAT_COLUMNS},
    "approx_warning": "boolean",
}


def empty_row() -> Dict[str, Any]:
    row: Dict[str, Any] = {name: np.nan for name in FLOAT_COLUMNS}
    row.update({"scheme": "", "variant": "", "user": 0, "parameter": "", "approx_warning": pd.NA})
    return row


def normalize_frame(frame: pd.DataFrame) -> pd.DataFrame:
    """列顺序与 dtype 统一，emit/read 两侧使用同一规则"""
    missing = [name for name in COLUMNS if name not in frame.columns]
    if missing:
        raise ValueError(f"result table lacks columns: {', '.join(missing)}")
    frame = frame.loc[:, list(COLUMNS)].copy()
    for name, dtype in COLUMN_DTYPES.items():
        frame[name] = frame[name].astype(dtype)
    return frame.reset_index(drop=True)


def _order_key(values: pd.Series, order: Optional[Sequence[str]]) -> pd.Series:
    if not order:
        return values
    rank = {name: i for i, name in enumerate(order)}
    return values.map(lambda v: rank.get(v, len(rank)))


@dataclass
class SweepResult:
    frame: pd.DataFrame

    @classmethod
    def empty(cls) -> "SweepResult":
        return cls(normalize_frame(pd.DataFrame({name: [] for name in COLUMNS})))

    @classmethod
    def from_rows(
        cls,
        rows: Iterable[Mapping[str, Any]],
        scheme_order: Optional[Sequence[str]] = None,
        variant_order: Optional[Sequence[str]] = None,
    ) -> "SweepResult":
        """按 scheme、variant、user、value 排序；与执行顺序无关"""
        records: List[Dict[str, Any]] = []
        for row in rows:
            record = empty_row()
            for name, value in row.items():
                if name not in record:
                    raise ValueError(f"unknown result column '{name}'")
                if value is None:
                    continue
                record[name] = value
            records.append(record)
        if not records:
            return cls.empty()

        frame = normalize_frame(pd.DataFrame.from_records(records, columns=list(COLUMNS)))
        keys = pd.DataFrame({
            "scheme": _order_key(frame["scheme"], scheme_order),
            "variant": _order_key(frame["variant"], variant_order),
            "user": frame["user"],
            "value": frame["value"],
        })
        order = keys.sort_values(["scheme", "variant", "user", "value"], kind="mergesort").index
        return cls(frame.loc[order].reset_index(drop=True))

    def __len__(self) -> int:
        return len(self.frame)

    def equals(self, other: "SweepResult") -> bool:
        return self.frame.equals(other.frame)

    @property
    def parameter(self) -> str:
        values = self.frame["parameter"].unique()
        return str(values[0]) if len(values) else ""

    def has_values(self, column: str) -> bool:
        return bool(self.frame[column].notna().any())

    def curves(self) -> List[tuple]:
        """(scheme, variant) 组合，按表中出现顺序"""
        pairs = self.frame[["scheme", "variant"]].drop_duplicates()
        return list(pairs.itertuples(index=False, name=None))

    def select(self, scheme: str, variant: str, user: Optional[int] = None) -> pd.DataFrame:
        mask = (self.frame["scheme"] == scheme) & (self.frame["variant"] == variant)
        if user is not None:
            mask &= self.frame["user"] == user
        return self.frame.loc[mask].sort_values("value", kind="mergesort")

    def system_series(self, scheme: str, variant: str, column: str) -> pd.DataFrame:
        """系统级指标按网格值去重"""
        rows = self.select(scheme, variant)
        return rows.drop_duplicates("value")[["value", column]]
