"""Smoke test for the Python bindings.

Build and install with `maturin develop` (or `pip install .`) from crates/python,
then run `python python/smoke_test.py`.
"""

import math
import pathlib
import tempfile

import portfolio_dqn_py as pdq


def main():
    assert pdq.reward(True, False, 0.01, 0.002, 0.0005) == 0.01 - 0.0005
    assert pdq.reward(True, True, 0.01, 0.002, 0.0005) == 0.01
    assert pdq.reward(False, True, 0.01, 0.002, 0.0005) == 0.002
    assert pdq.td_target(0.01, 0.9, (0.1, 0.2)) == 0.01 + 0.9 * 0.2
    assert pdq.td_target(0.01, 0.9, (0.1, 0.2), terminal=True) == 0.01
    assert math.isclose(pdq.compound([0.1, -0.1]), 1.1 * 0.9 - 1.0)

    net = pdq.QNetwork([29, 8, 8, 2], seed=3)
    q_cash, q_invest = net.forward([0.0] * 29)
    assert net.dims == [29, 8, 8, 2]
    assert len(net.params) == 29 * 8 + 8 + 8 * 8 + 8 + 8 * 2 + 2
    assert net.invests([0.0] * 29) == (q_invest > q_cash)
    try:
        net.forward([0.0] * 3)
    except ValueError:
        pass
    else:
        raise AssertionError("wrong state length accepted")

    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)
        (tmp / "synth.conf").write_text("nAssets = 6\nnDays = 400\nsynthSeed = 5\n")
        pdq.synth(str(tmp / "synth.conf"), str(tmp / "data"))
        lines = (tmp / "data" / "prices.csv").read_text().splitlines()
        assert len(lines) > 1

        dates = sorted({line.split(",")[0] for line in lines[1:]})
        (tmp / "run.conf").write_text(
            "prices = data/prices.csv\n"
            "fundamentals = data/fundamentals.csv\n"
            f"validationStart = {dates[280]}\ntestStart = {dates[340]}\nend = {dates[399]}\n"
            "iterations = 2000\nmemory = 500\nevaluationInterval = 500\n"
            "batchSize = 32\nhiddenWidths = 4,4,4\nseed = 1\n"
        )
        reports = pdq.train(str(tmp / "run.conf"), str(tmp / "ckpt"))
        assert len(reports) == 3
        written = pdq.backtest(str(tmp / "run.conf"), str(tmp / "ckpt"), str(tmp / "report"))
        assert len(written) == 13
        saved = [r["checkpoint"] for r in reports if r["checkpoint"]]
        if saved:
            loaded = pdq.QNetwork.load(saved[0])
            assert loaded.fingerprint is not None

    print("smoke test passed")


if __name__ == "__main__":
    main()
