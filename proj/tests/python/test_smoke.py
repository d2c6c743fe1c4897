import math
import os
from pathlib import Path

import pytest

import msvcj

CONFIGS = Path(os.environ.get("MSVCJ_CONFIG_DIR", Path(__file__).resolve().parents[2] / "configs"))

P = [
    [0.70, 0.15, 0.10, 0.05],
    [0.03, 0.90, 0.06, 0.01],
    [0.05, 0.05, 0.85, 0.05],
    [0.03, 0.07, 0.10, 0.80],
]


def table2_model():
    chain = msvcj.ChainSpec.from_variances([0.02, 0.04, 0.06, 0.08], P, 0.25 / 30, 1)
    jump = msvcj.JumpSpec(3.0, -0.025, 0.005, max_jumps=10)
    pea = msvcj.PeaSpec(2.0, 250.0, 0.02)
    return msvcj.ModelSpec(chain, jump, pea)


def test_toy_aiv_support():
    chain = msvcj.ChainSpec([0.2, 0.4], [[0.7, 0.3], [0.4, 0.6]], 1 / 3, 1)
    support, probs = msvcj.aiv(chain, 3)
    assert support == pytest.approx([0.08, 0.12, 0.16], abs=1e-15)
    assert sum(probs) == pytest.approx(1.0)
    assert msvcj.aiv(chain, 3, "ce")[0] == support


def test_table2_price_matches_config_file():
    market = msvcj.MarketSpec(50, 55, 0.25, rate=0.05)
    r = msvcj.price_european(table2_model(), market)
    assert abs(r["price"] - 0.9696) <= 1e-3
    assert r["support_size"] == 88
    model, mk = msvcj.load_config(str(CONFIGS / "table2_european.json"))
    assert model.kind == "ms_svcj"
    assert msvcj.price_european(model, mk)["price"] == r["price"]


def test_single_state_is_black_scholes():
    chain = msvcj.ChainSpec.from_variances([0.09], [[1.0]], 0.05, 0)
    mk = msvcj.MarketSpec(100, 110, 1.0, rate=0.03)
    got = msvcj.price_european(msvcj.ModelSpec(chain), mk)["price"]
    sd = 0.3
    d1 = (math.log(100 / 110) + 0.03) / sd + 0.5 * sd
    n = lambda x: 0.5 * math.erfc(-x / math.sqrt(2))
    assert got == pytest.approx(100 * n(d1) - 110 * math.exp(-0.03) * n(d1 - sd), abs=1e-12)


def test_bermudan_bounds_bracket():
    chain = msvcj.ChainSpec.from_variances([0.02, 0.04, 0.06, 0.08], P, 0.5 / 30, 1)
    mk = msvcj.MarketSpec(100, 100, 3.0, rate=0.05, dividend_yield=0.04)
    rows = msvcj.price_bermudan(msvcj.ModelSpec(chain), mk, "0.5:6", [90, 100], n_points=100)
    assert len(rows) == 2
    for r in rows:
        assert r["lower"] <= r["upper"] + 1e-9
    assert rows[1]["lower"] == pytest.approx(14.883, abs=0.01)


def test_mc_and_bias():
    model = table2_model()
    mk = msvcj.MarketSpec(50, 55, 0.25, rate=0.05)
    e = msvcj.mc_european(model, mk, paths=20000, runs=4, substeps=30, seed=3)
    assert abs(e["mean"] - 0.9696) <= 4 * e["mean_std_err"]
    assert msvcj.mc_european(model, mk, paths=20000, runs=4, substeps=30, seed=3)["runs"] == e["runs"]
    eb = msvcj.jump_time_bias(model.jump, model.pea, 0.25, 10)
    assert eb == pytest.approx(2.07e-6, rel=0.01)


def test_errors_map_to_python_exceptions():
    with pytest.raises(msvcj.ValidationError):
        msvcj.ChainSpec([0.2, 0.4], [[0.5, 0.6], [0.4, 0.6]], 0.1, 0)
    with pytest.raises(ValueError):
        msvcj.MarketSpec(-1, 100, 1.0)
    chain = msvcj.ChainSpec.from_variances([0.01, 0.02], [[0.5, 0.5], [0.5, 0.5]], 0.1, 0)
    with pytest.raises(msvcj.ResourceCapError):
        msvcj.aiv(chain, 40, "ce")


def test_boxplot_split():
    closes = [100.0]
    for r in [0.001, -0.002, 0.0005, 0.0015, -0.001, 0.08, 0.0, -0.0005, -0.09, 0.002]:
        closes.append(closes[-1] * math.exp(r))
    out = msvcj.boxplot_split(list(range(len(closes))), closes)
    assert out["jump_indices"] == [5, 8]
