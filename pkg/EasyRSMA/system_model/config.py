"""系统场景配置 (SystemConfig) 及其校验。"""
import logging
import math
from typing import Any, Mapping, Tuple, Type, TypeVar, Union

from pydantic import BaseModel, ConfigDict, ValidationError, field_validator, model_validator

from EasyRSMA.common.errors import ConfigValidationError

logger = logging.getLogger(__name__)

ModelT = TypeVar("ModelT", bound=BaseModel)

# 完美 CSIR 的 ξ 取值，场景文件中写作 `inf`
INFINITY = math.inf

POWER_SPLIT_TOLERANCE = 1e-9

PER_USER_FIELDS = (
    "beta_private",
    "kappa_r_sq",
    "phi",
    "xi",
    "m",
    "distance_m",
    "pathloss_exp",
)


class SystemConfig(BaseModel):
    """下行 RSMA 场景：用户数、功率分配、损伤、衰落和几何参数"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    n_users: int
    beta_common: float
    beta_private: Tuple[float, ...]
    kappa_t_sq: float = 0.0
    kappa_r_sq: Tuple[float, ...]
    phi: Tuple[float, ...]
    xi: Tuple[float, ...]
    m: Tuple[float, ...]
    distance_m: Tuple[float, ...]
    pathloss_exp: Tuple[float, ...]
    pathloss_ref: float = 1.0
    noise_dbm: float
    circuit_power_w: float = 0.0

    @field_validator("n_users")
    @classmethod
    def _check_n_users(cls, v: int) -> int:
        if v < 1:
            raise ValueError("n_users must be a positive integer")
        return v

    @field_validator("beta_common", "kappa_t_sq", "pathloss_ref", "noise_dbm", "circuit_power_w")
    @classmethod
    def _check_finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("must be finite")
        return v

    @model_validator(mode="after")
    def _check_invariants(self) -> "SystemConfig":
        n = self.n_users
        mismatched = [name for name in PER_USER_FIELDS if len(getattr(self, name)) != n]
        if mismatched:
            raise ConfigValidationError(
                f"dimension mismatch: n_users={n} but "
                + ", ".join(f"{name} has {len(getattr(self, name))}" for name in mismatched),
                keys=mismatched,
            )

        bad = []
        if not 0.0 <= self.beta_common <= 1.0:
            bad.append("beta_common")
        if any(not 0.0 <= b <= 1.0 for b in self.beta_private):
            bad.append("beta_private")
        if self.kappa_t_sq < 0.0:
            bad.append("kappa_t_sq")
        if any(not (k >= 0.0 and math.isfinite(k)) for k in self.kappa_r_sq):
            bad.append("kappa_r_sq")
        if any(not 0.0 <= p <= 1.0 for p in self.phi):
            bad.append("phi")
        if any(not x > 0.0 for x in self.xi):
            bad.append("xi")
        if any(not (mm >= 0.5 and math.isfinite(mm)) for mm in self.m):
            bad.append("m")
        if any(not (d > 0.0 and math.isfinite(d)) for d in self.distance_m):
            bad.append("distance_m")
        if any(not (t > 0.0 and math.isfinite(t)) for t in self.pathloss_exp):
            bad.append("pathloss_exp")
        if self.pathloss_ref <= 0.0:
            bad.append("pathloss_ref")
        if self.circuit_power_w < 0.0:
            bad.append("circuit_power_w")
        if bad:
            raise ConfigValidationError("parameter out of range", keys=bad)

        total = self.beta_common + sum(self.beta_private)
        if abs(total - 1.0) > POWER_SPLIT_TOLERANCE:
            raise ConfigValidationError(
                f"power split sums to {total:.12g}, expected 1",
                keys=("beta_common", "beta_private"),
            )
        return self

    def with_overrides(self, **fields: Any) -> "SystemConfig":
        """返回修改若干字段后重新校验的副本"""
        data = self.model_dump()
        data.update(fields)
        return validate_config(data)

    def is_ideal(self, user: int) -> bool:
        """完美 CSIR、完美 SIC、无硬件损伤"""
        return (
            math.isinf(self.xi[user])
            and self.phi[user] == 0.0
            and self.kappa_t_sq == 0.0
            and self.kappa_r_sq[user] == 0.0
        )

    def total_private(self) -> float:
        return sum(self.beta_private)


def _error_keys(exc: ValidationError) -> list:
    keys = []
    for err in exc.errors():
        loc = err.get("loc") or ()
        if loc and isinstance(loc[0], str) and loc[0] not in keys:
            keys.append(loc[0])
    return keys


def validate_config(raw: Union[SystemConfig, Mapping[str, Any]]) -> SystemConfig:
    """
    校验配置

    Args:
        raw: SystemConfig 或字段字典

    Returns:
        满足全部不变量的 SystemConfig (已是 SystemConfig 时原样返回)

    Raises:
        ConfigValidationError: 维度不匹配、功率和不为 1、参数越界
    """
    return validate_model(SystemConfig, raw, "system config")


def validate_model(model_cls: Type[ModelT], raw: Union[ModelT, Mapping[str, Any]], label: str) -> ModelT:
    """按 pydantic 模型校验，错误统一转换为 ConfigValidationError"""
    if isinstance(raw, model_cls):
        return raw
    try:
        return model_cls.model_validate(dict(raw))
    except ConfigValidationError:
        raise
    except ValidationError as e:
        # pydantic 会把 validator 里抛出的 ValueError 包一层
        for err in e.errors():
            inner = (err.get("ctx") or {}).get("error")
            if isinstance(inner, ConfigValidationError):
                raise inner from None
        keys = _error_keys(e)
        detail = "; ".join(f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors())
        logger.debug(f"配置校验失败: {detail}")
        raise ConfigValidationError(f"invalid {label}: {detail}", keys=keys) from None
