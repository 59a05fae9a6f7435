"""Smoke test for the cbound_py extension.

Build and install first:

    pip install --no-build-isolation ./crates/python

then run `python python/smoke_test.py`.
"""

import json
import math

import cbound_py as cb


def main():
    r = cb.bound("chernoff", 2.0, dist="gauss:mu=0,sd=1")
    assert abs(r["bound"] - math.exp(-2.0)) < 1e-9, r

    r = cb.bound("freedman-poisson", 0.0, v2=1.0)
    assert r["bound"] == 1.0, r

    fb = cb.bound("freedman-binom", 2.0, n=10, v2=1.0)["bound"]
    fan = cb.bound("fan", 2.0, n=10, v2=1.0)["bound"]
    assert fb <= fan, (fb, fan)

    a = cb.bound("azuma5", 3.0, v=1.0)
    assert a["bound"] <= a["cap_gauss"], a

    # E[(Z - 0)_+] = 1/sqrt(2 pi)
    assert abs(cb.plus_moment("gauss:mu=0,sd=1", 0.0, 1.0) - 1 / math.sqrt(2 * math.pi)) < 1e-12
    assert abs(cb.survival("twopoint:a=-1,b=1,p=0.5", 0.5) - 0.5) < 1e-15

    q, a_q, b_q = cb.splice_zero_mean("point:c=-1", "point:c=1")
    assert abs(q - 0.5) < 1e-9 and (a_q, b_q) == (-1.0, 1.0)
    assert cb.dominated("point:c=0", "twopoint:a=-1,b=1,p=0.5", 2.0)
    assert not cb.dominated("twopoint:a=-1,b=1,p=0.5", "gauss:mu=0,sd=1", 2.0)

    val, arg = cb.q_alpha("gauss:mu=0,sd=1", 0.05)
    assert val > arg

    coin = json.dumps({"horizon": 1, "iid": {"law": "twopoint:a=-1,b=1,p=0.5"}})
    r = cb.verify_dp(coin, "freedman", 1.0, 1.0)
    assert r["exact"] == 0.5 and r["pass"], r

    budget = json.dumps({"horizon": 4, "iid": {"law": {"values": [-0.25, 1.0], "probs": [0.8, 0.2]}}})
    m1 = cb.verify_mc(budget, "freedman", 1.0, 1.0, trials=100_000, seed=3)
    m2 = cb.verify_mc(budget, "freedman", 1.0, 1.0, trials=100_000, seed=3)
    assert m1 == m2 and m1["pass"], m1
    assert abs(m1["estimate"] - 0.2832) < 0.01, m1

    try:
        cb.bound("nope", 1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("unknown method accepted")

    print("cbound_py smoke test: ok")


if __name__ == "__main__":
    main()
