"""
两用户下行功率域 NOMA 基线，损伤模型与 RSMA 相同

远用户 (user 0) 直接解自己的信号，把近用户信号当干扰；
近用户 (user 1) 先解远用户信号并做 SIC，残留 φ·α_far。
κ² = κ_t² + κ_rn²。
"""
import logging
import math
from enum import StrEnum
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from EasyRSMA.analytic import rate_kernel
from EasyRSMA.common.errors import ConfigValidationError, DegenerateChannelError
from EasyRSMA.montecarlo import McEstimate, McMode, StreamAccumulator, check_samples, check_seed
from EasyRSMA.montecarlo.sampler import DEFAULT_BLOCK_SIZE, channel_gain_blocks
from EasyRSMA.system_model import (
    KernelTerms,
    LinkStats,
    SystemConfig,
    derive_link_stats,
    sinr_from_terms,
    validate_model,
)
from EasyRSMA.system_model.link_stats import linear_snr

logger = logging.getLogger(__name__)


class NomaRole(StrEnum):
    FAR = "far"
    NEAR = "near"

    @property
    def user(self) -> int:
        return 0 if self is NomaRole.FAR else 1


class NomaConfig(BaseModel):
    """NOMA 基线配置；xi 非空时覆盖 system.xi (每种方案独立的 CSIR 质量)"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    system: SystemConfig
    alpha_far: float
    xi: Optional[Tuple[float, ...]] = None

    @field_validator("alpha_far")
    @classmethod
    def _check_alpha(cls, v: float) -> float:
        if not 0.0 < v < 1.0:
            raise ConfigValidationError(f"alpha_far must lie in (0, 1), got {v}", keys=("alpha_far",))
        if not v > 1.0 - v:
            raise ConfigValidationError(
                f"alpha_far={v} must exceed alpha_near={1.0 - v:g} (far user gets more power)",
                keys=("alpha_far",),
            )
        return v

    @model_validator(mode="after")
    def _check_users(self) -> "NomaConfig":
        if self.system.n_users != 2:
            raise ConfigValidationError(f"NOMA baseline needs exactly 2 users, got {self.system.n_users}", keys=("n_users",))
        if self.xi is not None:
            if len(self.xi) != 2:
                raise ConfigValidationError(f"xi override needs 2 entries, got {len(self.xi)}", keys=("xi",))
            if any(not x > 0.0 for x in self.xi):
                raise ConfigValidationError("xi override must be positive", keys=("xi",))
        return self

    @property
    def alpha_near(self) -> float:
        return 1.0 - self.alpha_far

    @property
    def effective_system(self) -> SystemConfig:
        if self.xi is None:
            return self.system
        return self.system.with_overrides(xi=self.xi)


def validate_noma_config(raw: Union[NomaConfig, Mapping[str, Any]]) -> NomaConfig:
    return validate_model(NomaConfig, raw, "NOMA config")


def noma_sinr_terms(config: NomaConfig, role: NomaRole, stats: LinkStats) -> Tuple[float, float, float]:
    """(c, a1, a2)，γ = c·x/(a1·x + a2)"""
    role = NomaRole(role)
    system = config.effective_system
    user = role.user
    rho = stats.rho
    kappa_sq = system.kappa_t_sq + system.kappa_r_sq[user]
    alpha_far = config.alpha_far
    alpha_near = config.alpha_near
    if role is NomaRole.FAR:
        c = rho * alpha_far
        a1 = rho * (alpha_near + kappa_sq)
        a2 = rho * stats.omega_err * (1.0 + kappa_sq) + 1.0
    else:
        phi = system.phi[user]
        c = rho * alpha_near
        a1 = rho * (phi * alpha_far + kappa_sq)
        a2 = rho * stats.omega_err * (phi * alpha_far + alpha_near + kappa_sq) + 1.0
    return c, a1, a2


def noma_sinr(config: NomaConfig, role: NomaRole, g_hat_sq, stats: LinkStats,
              tx_power_dbm: Optional[float] = None):
    """
    瞬时 SINR

    far:  ρα_f·g / (ρ(α_n + κ²)·g + ρΩ_gne(1 + κ²) + 1)
    near: ρα_n·g / (ρ(φα_f + κ²)·g + ρΩ_gne(φα_f + α_n + κ²) + 1)
    ρ 取自 stats；给出 tx_power_dbm 时检查两者一致。
    """
    if tx_power_dbm is not None:
        rho = linear_snr(tx_power_dbm, config.effective_system.noise_dbm)
        if not math.isclose(rho, stats.rho, rel_tol=1e-12):
            raise ConfigValidationError(
                f"stats were derived for rho={stats.rho:.6g}, not for {tx_power_dbm} dBm (rho={rho:.6g})",
                keys=("tx_power_dbm",),
            )
    c, a1, a2 = noma_sinr_terms(config, role, stats)
    return sinr_from_terms(c, a1, a2, g_hat_sq)


def noma_coefficients(config: NomaConfig, role: NomaRole, stats: LinkStats) -> KernelTerms:
    if not stats.omega_hat > 0.0:
        raise DegenerateChannelError(f"estimated channel variance is zero for NOMA {NomaRole(role)} user")
    c, a1, a2 = noma_sinr_terms(config, role, stats)
    return KernelTerms(c, a1, a2, stats.m, stats.m / stats.omega_hat)


def noma_stats(config: NomaConfig, role: NomaRole, tx_power_dbm: float) -> LinkStats:
    return derive_link_stats(config.effective_system, NomaRole(role).user, tx_power_dbm)


def noma_ergodic_rate(config: NomaConfig, role: NomaRole, tx_power_dbm: float) -> float:
    """NOMA 用户的闭式近似遍历速率，与 RSMA 共用速率核"""
    system = config.effective_system
    if linear_snr(tx_power_dbm, system.noise_dbm) == 0.0:
        return 0.0
    stats = noma_stats(config, role, tx_power_dbm)
    return rate_kernel(*noma_coefficients(config, role, stats))


def noma_rates(config: NomaConfig, tx_power_dbm: float) -> List[float]:
    """[远用户, 近用户]，按用户编号排列"""
    return [noma_ergodic_rate(config, role, tx_power_dbm) for role in (NomaRole.FAR, NomaRole.NEAR)]


def mc_noma_rates(
    config: NomaConfig,
    role: NomaRole,
    tx_power_dbm: float,
    n_samples: int,
    seed: int,
    point_index: int = 0,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> Dict[McMode, McEstimate]:
    """两种模式的 MC 估计；信道抽样与同一用户的 RSMA 估计共用"""
    n_samples = check_samples(n_samples)
    seed = check_seed(seed)
    role = NomaRole(role)
    stats = noma_stats(config, role, tx_power_dbm)
    acc = StreamAccumulator()
    for _, unit in channel_gain_blocks(stats.m, seed, point_index, role.user, n_samples, block_size):
        acc.add(noma_sinr(config, role, unit * stats.omega_hat, stats))
    return {
        mode: McEstimate(
            mean=acc.rates[mode].mean,
            stderr=acc.rates[mode].stderr,
            n_samples=n_samples,
            mode=mode,
            seed=seed,
            degenerate=not stats.omega_hat > 0.0,
            mean_sinr=acc.sinr.mean,
        )
        for mode in McMode
    }


def mc_noma_rate(
    config: NomaConfig,
    role: NomaRole,
    tx_power_dbm: float,
    mode: McMode,
    n_samples: int,
    seed: int,
    point_index: int = 0,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> McEstimate:
    return mc_noma_rates(config, role, tx_power_dbm, n_samples, seed, point_index, block_size)[McMode(mode)]
