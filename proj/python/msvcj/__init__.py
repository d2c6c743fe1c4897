"""Markov-switching volatility with co-jumps: exact AIV distributions,
European and Bermudan pricing, simulation and calibration."""

from ._msvcj import (
    ChainSpec,
    JumpSpec,
    MarketSpec,
    ModelSpec,
    PeaSpec,
    ResourceCapError,
    ValidationError,
    aiv,
    boxplot_split,
    bs_price,
    calibrate_jumps,
    implied_vol_impact,
    jump_time_bias,
    load_config,
    lsm_bermudan,
    mc_european,
    price_bermudan,
    price_european,
)

__all__ = [
    "ChainSpec",
    "JumpSpec",
    "MarketSpec",
    "ModelSpec",
    "PeaSpec",
    "ResourceCapError",
    "ValidationError",
    "aiv",
    "boxplot_split",
    "bs_price",
    "calibrate_jumps",
    "implied_vol_impact",
    "jump_time_bias",
    "load_config",
    "lsm_bermudan",
    "mc_european",
    "price_bermudan",
    "price_european",
]
