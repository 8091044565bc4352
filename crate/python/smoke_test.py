"""Quick check of the gripforge Python bindings.

Build and install first, e.g. `maturin develop --release -m crates/py/Cargo.toml`.
"""

import math
import os
import tempfile

import gripforge as gf


def main():
    v = gf.fsr_to_voltage(250.0)
    assert abs(v - 3219.512) < 1e-3, v

    frame = gf.encode_frame("R", 7, 140, list(range(100, 112)))
    assert len(frame) == 33 and frame[0] == 0xAA
    d = gf.decode_frame(frame)
    assert d["glove"] == "R" and d["seq"] == 7 and d["voltages"][11] == 111
    bad = bytearray(frame)
    bad[5] ^= 0x01
    try:
        gf.decode_frame(bytes(bad))
        raise AssertionError("corrupted frame accepted")
    except ValueError:
        pass

    stream = b"\x00\x13" + b"".join(
        gf.encode_frame("L", k, 20 * k, [k] * 12) for k in range(10) if k != 4
    )
    s = gf.ingest(stream, "replay", "n", 1)
    assert s.key == "replay_n_01" and s.hand == "n"
    assert "@80,gap" in s.to_csv()

    assert abs(gf.session_std([1.0, 2.0, 3.0]) - math.sqrt(2.0 / 3.0)) < 1e-12

    sessions = gf.simulate_cohort(seed=1, sessions=3)
    assert len(sessions) == 12
    first = sessions[0]
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, first.key + ".csv")
        first.write(path)
        again = gf.Session.read(path)
        assert again.to_csv() == first.to_csv()
    assert gf.Session.from_csv(first.to_csv()).key == first.key
    amv = first.amv("S5")
    assert len(amv) > 3 and all(a > 0 for a in amv)

    dom = [x for x in sessions if x.hand == "d"]
    expert = [x for x in dom if x.user == "expert"]
    novice = [x for x in dom if x.user == "novice"]
    t = gf.two_group_t([x.pooled_std() for x in expert], [x.pooled_std() for x in novice])
    assert t["df"] == 4 and t["t"] < 0 and t["p"] < 0.01, t

    inputs = expert[0].som_inputs()
    assert len(inputs[0]) == 10
    som = gf.Som.fit(inputs, epochs=5, seed=3)
    assert len(som.models()) == 49
    assert 0 <= som.bmu(inputs[0]) < 49
    qe = som.quantization_error(inputs)
    assert qe > 0
    same = gf.Som.from_models(som.models())
    assert same.quantization_error(inputs) == qe

    rows = gf.som_qe_curve([("expert_d", expert), ("novice_d", novice)], seed=1, epochs=5)
    assert len(rows) == 6
    e = sum(r[2] for r in rows if r[0] == "expert_d")
    n = sum(r[2] for r in rows if r[0] == "novice_d")
    assert e < n

    cells = [[[1.0, 2.0, 3.0], [2.0, 3.0, 4.0]], [[5.0, 6.0, 7.0], [6.0, 7.0, 9.0]]]
    a = gf.anova_2x2(cells)
    assert a["df_error"] == 8 and a["a"][0] > a["b"][0]

    print("python smoke test ok")


if __name__ == "__main__":
    main()
