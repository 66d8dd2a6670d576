"""Netlist container, text format, and the two discrete evaluators."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import lutnn
from lutnn.netlist import (
    Netlist,
    NetlistParseError,
    dumps,
    encode_inputs,
    eval_bitpacked,
    eval_reference,
    loads,
    pack_bits,
    predict,
    unpack_bits,
)


def xor_and_netlist() -> Netlist:
    # (x1 xor x2) and x3, materialized as two layers over three raw bits.
    # encoder: identity thresholds at 0.5 per feature, one bit each
    thresholds = np.full((1, 3), 0.5)
    layer1 = (
        np.array([[0, 1], [2, 2]], dtype=np.int64),
        np.array([[0, 1, 1, 0], [0, 0, 0, 1]], dtype=np.uint8),  # xor, pass x3
    )
    layer2 = (
        np.array([[0, 1], [0, 1]], dtype=np.int64),
        np.array([[0, 0, 0, 1], [1, 1, 1, 0]], dtype=np.uint8),  # and, nand
    )
    return Netlist(
        seed=0,
        classes=2,
        group_size=1,
        groupsum_tau=1.0,
        thresholds=thresholds,
        layers=[layer1, layer2],
    )


def all_inputs_3bit() -> np.ndarray:
    grid = np.array([[(a >> k) & 1 for k in range(3)] for a in range(8)], dtype=np.float64)
    return grid  # already 0/1, thresholds at 0.5 binarize faithfully


def test_hand_netlist_exact_truth_table():
    nl = xor_and_netlist()
    x = all_inputs_3bit()
    bits = encode_inputs(nl, x)
    np.testing.assert_array_equal(bits, x.astype(np.uint8))
    packed = pack_bits(bits)
    preds = eval_bitpacked(nl, packed, 8)
    naive = eval_reference(nl, bits)
    expected_fn = [((a & 1) ^ ((a >> 1) & 1)) & ((a >> 2) & 1) for a in range(8)]
    # class 0 node computes the function, class 1 its complement
    np.testing.assert_array_equal(preds, [0 if v else 1 for v in expected_fn])
    np.testing.assert_array_equal(naive, preds)


def test_pack_unpack_awkward_sizes(rng):
    for samples in (1, 63, 64, 65, 1000):
        bits = (rng.uniform(size=(samples, 7)) > 0.5).astype(np.uint8)
        packed = pack_bits(bits)
        assert packed.shape == (7, -(-samples // 64))
        assert packed.dtype == np.dtype("<u8")
        np.testing.assert_array_equal(unpack_bits(packed, samples), bits)


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=1, max_value=200))
def test_pack_unpack_property(samples):
    rng = np.random.Generator(np.random.PCG64(samples))
    bits = (rng.uniform(size=(samples, 3)) > 0.3).astype(np.uint8)
    np.testing.assert_array_equal(unpack_bits(pack_bits(bits), samples), bits)


def test_bitpacked_equals_reference_on_random_netlist(rng):
    nl = xor_and_netlist()
    x = rng.uniform(size=(500, 3))
    bits = encode_inputs(nl, x)
    np.testing.assert_array_equal(
        eval_bitpacked(nl, pack_bits(bits), 500), eval_reference(nl, bits)
    )


def test_predict_convenience_matches_manual(rng):
    nl = xor_and_netlist()
    x = rng.uniform(size=(100, 3))
    manual = eval_bitpacked(nl, pack_bits(encode_inputs(nl, x)), 100)
    np.testing.assert_array_equal(predict(nl, x), manual)


def test_encode_inputs_tie_goes_high():
    nl = xor_and_netlist()
    x = np.array([[0.5, 0.4999999, 0.5000001]])
    np.testing.assert_array_equal(encode_inputs(nl, x), [[1, 0, 1]])


def test_roundtrip_byte_identical():
    nl = xor_and_netlist()
    text = dumps(nl)
    assert dumps(loads(text)) == text
    assert text.startswith("lutnn-netlist v1\n")
    assert text.rstrip().endswith("end")


def test_dumps_hex_is_lowercase_lsb_first():
    nl = xor_and_netlist()
    text = dumps(nl)
    # xor table (0,1,1,0) packs to 0b0110 = 6 with address 0 at bit 0
    assert " 6" in [line for line in text.splitlines() if line.startswith("L1 2 0 1")][0]


def test_netlist_validation_errors():
    good = xor_and_netlist()
    with pytest.raises(ValueError, match="wire"):
        Netlist(0, 2, 1, 1.0, good.thresholds,
                [(np.array([[0, 9]]), np.array([[0, 1, 1, 0]], dtype=np.uint8))])
    with pytest.raises(ValueError, match="0/1"):
        Netlist(0, 2, 1, 1.0, good.thresholds,
                [(np.array([[0, 1], [1, 2]]), np.array([[0, 2, 1, 0], [0, 0, 0, 1]], dtype=np.uint8))])
    with pytest.raises(ValueError, match=r"final width 2 != classes\*group_size = 6"):
        Netlist(0, 3, 2, 1.0, good.thresholds, good.layers)


MALFORMED = [
    ("", "line 1"),
    ("bogus v1\n", "not a netlist file"),
    ("lutnn-netlist v9\n", "unsupported version"),
    ("lutnn-netlist v1\nseed x\n", "seed"),
    ("lutnn-netlist v1\nseed 0\n", "line 3"),  # truncated after seed
]


@pytest.mark.parametrize("text, fragment", MALFORMED)
def test_malformed_prefixes(text, fragment):
    with pytest.raises(NetlistParseError, match=fragment):
        loads(text)


def test_malformed_error_carries_line_number():
    text = dumps(xor_and_netlist())
    lines = text.splitlines()
    # find a node line and break its arity field
    idx = next(i for i, l in enumerate(lines) if l.startswith("L1"))
    lines[idx] = lines[idx].replace("L1 2", "L1 3", 1)
    with pytest.raises(NetlistParseError) as err:
        loads("\n".join(lines) + "\n")
    assert err.value.line_no == idx + 1
    assert str(err.value).startswith(f"line {idx + 1}:")


def test_parse_error_uppercase_hex():
    text = dumps(xor_and_netlist())
    patched = []
    hit = False
    for line in text.splitlines():
        if not hit and line.startswith("L") and line.rsplit(" ", 1)[-1] in "0123456789abcdef":
            head, lut = line.rsplit(" ", 1)
            # force a letter digit so upper/lower actually differ: use 'F'
            patched.append(head + " F")
            hit = True
        else:
            patched.append(line)
    assert hit
    with pytest.raises(NetlistParseError, match="lowercase"):
        loads("\n".join(patched) + "\n")


def test_loads_rejects_trailing_content():
    text = dumps(xor_and_netlist()) + "extra\n"
    with pytest.raises(NetlistParseError, match="trailing"):
        loads(text)


def test_eval_rejects_width_mismatch():
    nl = xor_and_netlist()
    with pytest.raises(ValueError, match="width"):
        eval_bitpacked(nl, np.zeros((5, 1), dtype="<u8"), 3)


def test_netlist_properties():
    nl = xor_and_netlist()
    assert nl.input_width == 3
    assert nl.widths == [3, 2, 2]
    assert nl.digest == "-"
