import math

import pytest

import qadv


@pytest.fixture(scope="module")
def key():
    return qadv.keygen("rabin", bits=32, seed=3)


def test_rabin_roundtrip():
    y = qadv.rabin_eval(77, 15)
    assert y == 225 % 77
    roots = qadv.rabin_invert(7, 11, y)
    assert 15 in roots and len(roots) == 2
    assert sorted(qadv.factor_from_claw(77, *roots)) == [7, 11]


def test_key_file_shape(key):
    assert set(key) == {"family", "public", "secret"}
    assert "p" not in key["public"]


def test_ideal_prover_scores_above_bound(key):
    rep = qadv.run_protocol(key, "ideal", trials=4000, seed=2)
    assert rep["p_x"] == 1.0
    assert abs(rep["score"] - (math.sqrt(2) - 1)) < 0.12


def test_cheater_near_zero(key):
    rep = qadv.run_protocol(key, "cheater", trials=4000, seed=2)
    assert abs(rep["score"]) < 0.12


def test_run_is_deterministic(key):
    assert qadv.run_protocol(key, "ideal", trials=500, seed=7) == qadv.run_protocol(key, "ideal", trials=500, seed=7)


def test_extract_factors():
    k = qadv.keygen("rabin", bits=24, seed=5)
    rep = qadv.extract(k, "ideal", seed=1)
    p, q = (int(v) for v in rep["factors"])
    assert p * q == int(k["public"]["N"])


def test_postselect_helpers():
    lk = qadv.lift_key(77, 2)
    assert lk["k"] == 9 and lk["N_lifted"] == 6237
    assert qadv.is_valid_y(225, 3) and not qadv.is_valid_y(226, 3)
    assert qadv.rejection_power(3) == pytest.approx(8 / 9)
    rows = [{"m": 0, "F": 0.5, "score": -0.1}, {"m": 0, "F": 0.52, "score": 0.1}]
    assert 0.5 < qadv.threshold_of(rows) < 0.52
    with pytest.raises(qadv.NoCrossing):
        qadv.threshold_of([{"m": 0, "F": 0.5, "score": 0.1}])


def test_angles():
    assert qadv.optimal_theta(1.0, 0.7) == pytest.approx(math.atan(0.4))
    assert qadv.pm_of_theta(1.0, 1.0, math.pi / 4) == pytest.approx(math.cos(math.pi / 8) ** 2)


def test_resources():
    r = qadv.resources("karatsuba", 32)
    assert r["qubits"] > 32 and r["total_gates"] > 0


def test_frames():
    line = qadv.encode_frame("s1", 3, "challenge", "preimage")
    assert line.endswith("\n")
    f = qadv.decode_frame(line)
    assert f["seq"] == 3 and f["payload"] == "preimage"
    with pytest.raises(qadv.ParseError):
        qadv.decode_frame(line[:-5])


def test_small_sweep():
    rows = qadv.sweep(24, [1], [1.0], trials=200, seed=3)
    assert rows[0]["discard_rate"] == 0.0
    assert rows[0]["overhead"] >= 1.0
