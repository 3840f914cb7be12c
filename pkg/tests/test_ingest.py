import io
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gdaids import (CATEGORIES, ConfigError, DataError, NumericDataset, ParseError,
                    encode, fit_encoder, load_label_map, load_schema, map_labels,
                    parse_kdd_csv, read_kdd_file, select_features, stratified_sample)
from gdaids.ingest import LabelMap, allocate, histogram
from gdaids.synthetic import kdd_like_lines

from reference_tables import GDA_SUBSET, LDA_SUBSET

SMALL_SCHEMA = [("duration", "continuous"), ("protocol_type", "discrete"),
                ("src_bytes", "continuous")]


def kdd_line(label="normal.", n_features=41):
    fields = ["0"] * n_features
    fields[1], fields[2], fields[3] = "tcp", "http", "SF"
    return ",".join(fields + [label])


def test_builtin_schema_shape():
    schema = load_schema()
    assert len(schema) == 41
    kinds = [k for _, k in schema]
    assert kinds.count("continuous") == 34 and kinds.count("discrete") == 7


def test_parse_strips_trailing_period():
    ds = parse_kdd_csv(kdd_line("normal.") + "\n")
    assert ds.n_rows == 1
    assert ds.labels[0] == "normal"
    assert len(ds.row(0)) == 42


def test_parse_accepts_bytes_binary_stream_and_blank_lines():
    text = kdd_line("smurf.") + "\n\n" + kdd_line("normal") + "\n"
    a = parse_kdd_csv(text.encode())
    b = parse_kdd_csv(io.BytesIO(text.encode()))
    assert a.n_rows == b.n_rows == 2
    assert list(a.labels) == ["smurf", "normal"]


def test_parse_wrong_field_count_reports_line():
    text = kdd_line() + "\n" + kdd_line(n_features=40) + "\n"
    with pytest.raises(ParseError) as info:
        parse_kdd_csv(text, source="t.csv")
    assert info.value.line == 2
    assert "t.csv:2" in str(info.value)


def test_parse_bad_number_reports_line():
    rows = [kdd_line(), kdd_line(), kdd_line().replace("0,tcp", "x1,tcp", 1)]
    with pytest.raises(ParseError) as info:
        parse_kdd_csv("\n".join(rows))
    assert info.value.line == 3
    assert "x1" in str(info.value)


@pytest.mark.parametrize("text", ["", "\n\n  \n"])
def test_parse_empty_input(text):
    with pytest.raises(ParseError, match="empty"):
        parse_kdd_csv(text)


def test_parse_header_flag():
    text = "a,b,c,label\n1,tcp,2,normal.\n"
    ds = parse_kdd_csv(text, SMALL_SCHEMA, header=True)
    assert ds.n_rows == 1 and ds.continuous.tolist() == [[1.0, 2.0]]
    with pytest.raises(ParseError):
        parse_kdd_csv(text, SMALL_SCHEMA)


def test_read_missing_file(tmp_path):
    with pytest.raises(DataError):
        read_kdd_file(tmp_path / "nope.csv")


def test_label_map_defaults_and_histogram():
    lmap = load_label_map()
    assert lmap.category("normal") == "Normal"
    assert lmap.category("smurf") == "DOS"
    assert lmap.category("buffer_overflow") == "U2R"
    assert lmap.category("ipsweep") == "Probe"
    assert lmap.category("guess_passwd") == "R2L"
    ds = parse_kdd_csv(kdd_like_lines(300, seed=2))
    y, hist = map_labels(ds, lmap)
    assert sum(hist.values()) == ds.n_rows
    assert set(hist) == set(CATEGORIES)
    assert histogram(y) == hist


def test_all_normal_histogram():
    ds = parse_kdd_csv("\n".join([kdd_line()] * 7))
    _, hist = map_labels(ds, load_label_map())
    assert hist == {"Normal": 7, "DOS": 0, "R2L": 0, "U2R": 0, "Probe": 0}


def test_unknown_attack_policy():
    ds = parse_kdd_csv(kdd_line("zeroday."))
    with pytest.raises(DataError, match="zeroday"):
        map_labels(ds, load_label_map())
    lenient = load_label_map(unknown_policy="assign-category", fallback="R2L")
    y, _ = map_labels(ds, lenient)
    assert CATEGORIES[y[0]] == "R2L"
    with pytest.raises(ConfigError):
        LabelMap({"normal": "DOS"})


def test_fit_encoder_examples():
    text = "0,tcp,5\n2,udp,5\n1,tcp,5\n"
    ds = parse_kdd_csv("\n".join(line + ",normal" for line in text.split()), SMALL_SCHEMA)
    enc = fit_encoder(ds)
    assert enc.vocabularies["protocol_type"] == ("tcp", "udp")
    assert enc.zero_variance == frozenset({"src_bytes"})
    assert enc.feature_names == ["duration", "protocol_type=tcp", "protocol_type=udp",
                                 "src_bytes"]
    two = parse_kdd_csv("0,tcp,1,normal\n2,tcp,3,normal\n", SMALL_SCHEMA)
    e2 = fit_encoder(two)
    assert e2.means.tolist() == [1.0, 2.0]
    assert e2.stds.tolist() == [1.0, 1.0]


def test_single_row_all_zero_variance():
    ds = parse_kdd_csv("3,tcp,4,normal\n", SMALL_SCHEMA)
    enc = fit_encoder(ds)
    assert enc.zero_variance == frozenset({"duration", "src_bytes"})
    X = encode(enc, ds).X
    assert X.tolist() == [[0.0, 1.0, 0.0]]


def test_encode_fit_set_is_standardized():
    ds = parse_kdd_csv(kdd_like_lines(250, seed=4))
    y, _ = map_labels(ds, load_label_map())
    enc = fit_encoder(ds)
    nd = encode(enc, ds, y)
    cont = [j for j, (n, o) in enumerate(zip(nd.feature_names, nd.feature_origins))
            if n == o and "=" not in n]
    block = nd.X[:, cont]
    assert np.abs(block.mean(axis=0)).max() < 1e-9
    names = [nd.feature_names[j] for j in cont]
    for j, name in enumerate(names):
        if name in enc.zero_variance:
            assert np.all(block[:, j] == 0)
        else:
            assert abs(block[:, j].std() - 1) < 1e-9
    expected_width = 34 + sum(len(v) for v in enc.vocabularies.values())
    assert nd.n_features == expected_width
    assert nd.class_sizes.sum() == nd.n_rows


def test_encode_unseen_token_zero_block():
    train = parse_kdd_csv("0,tcp,1,normal\n1,udp,2,normal\n", SMALL_SCHEMA)
    test = parse_kdd_csv("0,icmp,1,normal\n1,udp,2,normal\n", SMALL_SCHEMA)
    nd = encode(fit_encoder(train), test)
    assert nd.X[0, 1:3].tolist() == [0.0, 0.0]
    assert nd.X[1, 1:3].tolist() == [0.0, 1.0]


def test_encode_column_mismatch():
    a = parse_kdd_csv("0,tcp,1,normal\n", SMALL_SCHEMA)
    b = parse_kdd_csv("0,1,normal\n", [("duration", "continuous"), ("x", "continuous")])
    with pytest.raises(DataError):
        encode(fit_encoder(a), b)


def test_parse_encode_bit_identical():
    text = kdd_like_lines(120, seed=9).encode()
    outs = []
    for _ in range(2):
        ds = parse_kdd_csv(io.BytesIO(text))
        y, _ = map_labels(ds, load_label_map())
        outs.append(encode(fit_encoder(ds), ds, y))
    assert outs[0].X.tobytes() == outs[1].X.tobytes()
    assert np.array_equal(outs[0].y, outs[1].y)
    assert outs[0].feature_names == outs[1].feature_names


def hamilton_oracle(sizes, budget, floor):
    """Independent exact re-derivation of the allocation rule with Fractions."""
    if budget >= sum(sizes):
        return list(sizes)
    floors = [min(floor, m) for m in sizes]
    room = [m - f for m, f in zip(sizes, floors)]
    rest = budget - sum(floors)
    quotas = [Fraction(rest * r, sum(room)) for r in room]
    base = [q.numerator // q.denominator for q in quotas]
    fracs = [q - b for q, b in zip(quotas, base)]
    order = sorted(range(len(sizes)), key=lambda c: (-fracs[c], c))
    for c in order[:rest - sum(base)]:
        base[c] += 1
    return [f + b for f, b in zip(floors, base)]


def test_allocation_examples():
    assert allocate([1000, 1000], 100, 10).tolist() == [50, 50]
    assert allocate([5, 7], 100, 3).tolist() == [5, 7]


def test_allocation_kdd_sizes_exhaustive():
    sizes = [97277, 391458, 1126, 52, 4107]
    got = allocate(sizes, 1500, 50).tolist()
    assert got == hamilton_oracle(sizes, 1500, 50)
    assert sum(got) == 1500
    assert all(g >= min(50, m) for g, m in zip(got, sizes))
    assert all(g <= m for g, m in zip(got, sizes))
    # every other integer vector with the same floors and total has a larger
    # deviation from the exact proportional quota in at least one coordinate
    floors = [min(50, m) for m in sizes]
    room = [m - f for m, f in zip(sizes, floors)]
    quotas = [f + Fraction((1500 - sum(floors)) * r, sum(room)) for f, r in zip(floors, room)]
    assert all(abs(g - q) < 1 for g, q in zip(got, quotas))


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(0, 400), min_size=2, max_size=5), st.integers(1, 20),
       st.integers(1, 2000))
def test_allocation_matches_oracle(sizes, floor, budget):
    if sum(sizes) == 0 or budget < len(sizes) * floor:
        return
    got = allocate(sizes, budget, floor).tolist()
    assert got == hamilton_oracle(sizes, budget, floor)
    assert sum(got) == min(budget, sum(sizes))
    assert all(min(floor, m) <= g <= m for g, m in zip(got, sizes))


def labelled(sizes, d=3, seed=0):
    rng = np.random.default_rng(seed)
    y = np.repeat(np.arange(len(sizes)), sizes)
    rng.shuffle(y)
    return NumericDataset(rng.standard_normal((len(y), d)), y, tuple("abcde"[:len(sizes)]))


def test_stratified_sample_properties():
    ds = labelled([300, 120, 30])
    s = stratified_sample(ds, 90, 20, seed=7)
    assert s.class_sizes.tolist() == allocate(ds.class_sizes, 90, 20).tolist()
    assert np.all(s.class_sizes <= ds.class_sizes)
    # rows keep their original relative order: each sampled row appears in X in order
    pos = [int(np.flatnonzero((ds.X == row).all(axis=1))[0]) for row in s.X]
    assert pos == sorted(pos)
    again = stratified_sample(ds, 90, 20, seed=7)
    assert np.array_equal(again.X, s.X)


def test_stratified_sample_budget_cases():
    ds = labelled([10, 10])
    assert stratified_sample(ds, 50, 5, seed=0) is ds
    with pytest.raises(ConfigError):
        stratified_sample(ds, 9, 5, seed=0)


def test_select_features_reference_subsets():
    ds = parse_kdd_csv(kdd_like_lines(200, seed=5))
    y, _ = map_labels(ds, load_label_map())
    enc = fit_encoder(ds)
    nd = encode(enc, ds, y)
    for subset in (GDA_SUBSET, LDA_SUBSET):
        sel = select_features(nd, subset)
        assert sorted(o.lower() for o in sel.original_features()) == sorted(
            s.lower() for s in subset)
        width = sum(len(enc.vocabularies[n.lower()]) if n.lower() in enc.vocabularies else 1
                    for n in subset)
        assert sel.n_features == width
        assert np.array_equal(sel.y, nd.y)
    assert len(select_features(nd, GDA_SUBSET).original_features()) == 12
    assert len(select_features(nd, LDA_SUBSET).original_features()) == 17


def test_select_all_is_identity_and_errors():
    ds = parse_kdd_csv(kdd_like_lines(40, seed=6))
    nd = encode(fit_encoder(ds), ds)
    same = select_features(nd, [n for n, _ in load_schema()])
    assert np.array_equal(same.X, nd.X) and same.feature_names == nd.feature_names
    with pytest.raises(DataError, match="bogus"):
        select_features(nd, ["bogus"])
    assert select_features(nd, [0, "service=http"]).n_features == 2
