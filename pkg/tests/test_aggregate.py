import numpy as np
import pytest

from hopse.aggregate import (
    HopseEncoder,
    aggregate_rank,
    bundle_bytes,
    bundle_from_bytes,
    load_bundle,
    precompute_bundle,
    save_bundle,
)
from hopse.exceptions import ChannelMismatch, FormatError, RankMismatch, ShapeError
from hopse.lifting import InputGraph, clique_lift
from hopse.neighborhoods import Adjacency, Incidence, hasse_graph, rank_targeted, taxonomy_set
from hopse.pse import RWSE, PseKind, encode, parse_pse_list

from conftest import random_graph, small_corpus
from oracles import rwse_oracle

TWO_TRIANGLES = InputGraph.from_edges(5, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (2, 4), (1, 3)])


def test_triangle_adj1(triangle):
    b = precompute_bundle(triangle, taxonomy_set("Adj-1"), [PseKind(RWSE, 2)])
    np.testing.assert_allclose(b.features[(0, RWSE)], [[0, 0.5]] * 3, atol=1e-12)
    assert b.features[(1, RWSE)].shape == (3, 0)
    assert b.features[(2, RWSE)].shape == (1, 0)
    for r in range(3):
        np.testing.assert_array_equal(b.init[r], np.ones((b.n_cells(r), 1)))


def test_mix2_rank1_width():
    cc = clique_lift(TWO_TRIANGLES)
    b = precompute_bundle(cc, taxonomy_set("Mix-2"), [PseKind(RWSE, 4)])
    assert b.features[(1, RWSE)].shape == (cc.n_cells(1), 8)


def test_widths_are_data_independent(rng):
    kinds = parse_pse_list("rwse:K=5,lap:i=3,hk:K=2,elstatic")
    nfs = taxonomy_set("Mix-1")
    expected = None
    for _ in range(6):
        cc = clique_lift(random_graph(rng, 7, float(rng.uniform(0.1, 0.9))))
        b = precompute_bundle(cc, nfs, kinds, max_rank=2)
        widths = {k: v for k, v in b.widths().items() if k[0] != "Z"}
        for (r, tag), w in widths.items():
            kind = next(k for k in kinds if k.tag == tag)
            assert w == len(rank_targeted(nfs, r)) * kind.width
        expected = expected or widths
        assert widths == expected


def test_zero_fill_face_free():
    cc = clique_lift(InputGraph.from_edges(3, [(0, 1), (1, 2)]))
    b = precompute_bundle(cc, [Adjacency(1, 2), Adjacency(1, 0)], [PseKind(RWSE, 3)], max_rank=2)
    x = b.features[(1, RWSE)]
    assert np.all(x[:, :3] == 0)
    assert np.any(x[:, 3:] != 0)


def test_aggregate_matches_oracle():
    cc = clique_lift(TWO_TRIANGLES)
    kind = PseKind(RWSE, 4)
    nfs = rank_targeted(taxonomy_set("Mix-1"), 1)
    x = aggregate_rank(cc, [encode(hasse_graph(cc, nf), kind) for nf in nfs], 1, kind)
    ids = [c for c in cc.rank_index[1]]
    for j, nf in enumerate(nfs):
        h = hasse_graph(cc, nf)
        ref = rwse_oracle(h.adjacency_matrix(), 4)
        for row, cid in enumerate(ids):
            want = ref[h.index[cid]] if cid in h.index else np.zeros(4)
            np.testing.assert_allclose(x[row, 4 * j : 4 * j + 4], want, atol=1e-12)


def test_aggregate_errors(triangle):
    enc = encode(hasse_graph(triangle, Adjacency(0, 1)), PseKind(RWSE, 2))
    with pytest.raises(ChannelMismatch):
        aggregate_rank(triangle, [enc], 0, PseKind(RWSE, 3))
    with pytest.raises(RankMismatch):
        aggregate_rank(triangle, [enc], 1, PseKind(RWSE, 2))


def test_no_targeting_neighborhood(triangle):
    assert aggregate_rank(triangle, [], 2, PseKind(RWSE, 2)).shape == (1, 0)


def test_precompute_errors(triangle):
    with pytest.raises(ValueError):
        precompute_bundle(triangle, [], [PseKind(RWSE, 2)])
    with pytest.raises(ShapeError):
        precompute_bundle(triangle, [Adjacency(0, 1)], [PseKind(RWSE, 2)], z_init={0: np.ones((2, 1))})


def test_custom_init(triangle):
    z0 = np.arange(6.0).reshape(3, 2)
    b = precompute_bundle(triangle, [Adjacency(0, 1)], [PseKind(RWSE, 2)], z_init={0: z0})
    np.testing.assert_array_equal(b.init[0], z0)
    assert b.init[1].shape == (3, 1)


def test_round_trip_and_determinism(tmp_path):
    kinds = parse_pse_list("rwse:K=4,lap:i=2,hk:K=3,elstatic")
    for i, cc in enumerate(small_corpus(seed=21, count=8)):
        b = precompute_bundle(cc, taxonomy_set("Mix-1"), kinds, max_rank=2, taxonomy="Mix-1")
        again = precompute_bundle(cc, taxonomy_set("Mix-1"), kinds, max_rank=2, taxonomy="Mix-1")
        assert bundle_bytes(b) == bundle_bytes(again)
        path = tmp_path / f"b{i}.hb"
        save_bundle(b, path)
        loaded = load_bundle(path)
        assert bundle_bytes(loaded) == path.read_bytes()
        assert loaded.metadata == b.metadata and loaded.cell_ids == b.cell_ids
        for key in b.features:
            assert np.array_equal(loaded.features[key], b.features[key])


def test_bad_bundle_bytes(triangle):
    blob = bundle_bytes(precompute_bundle(triangle, [Adjacency(0, 1)], [PseKind(RWSE, 2)]))
    with pytest.raises(FormatError):
        bundle_from_bytes(b"NOTABNDL" + blob[8:])
    with pytest.raises(FormatError):
        bundle_from_bytes(blob[:-8])


def test_metadata(triangle):
    b = precompute_bundle(triangle, taxonomy_set("Inc-1"), [PseKind(RWSE, 2)], taxonomy="Inc-1")
    assert b.metadata["complex_hash"] == triangle.content_hash()
    assert b.metadata["neighborhoods"] == ["A_0,1", "I_0->1", "I_1->2"]
    assert b.metadata["channels"] == ["rwse:K=2"]


def test_relabel_permutes_rows(rng):
    kinds = parse_pse_list("rwse:K=5,hk:K=3,elstatic")
    for _ in range(5):
        g = random_graph(rng, 7, 0.5)
        perm = rng.permutation(7)
        cc, cc2 = clique_lift(g), clique_lift(g.relabel(perm))
        b = precompute_bundle(cc, taxonomy_set("Mix-1"), kinds, max_rank=2)
        b2 = precompute_bundle(cc2, taxonomy_set("Mix-1"), kinds, max_rank=2)
        for (r, tag), x in b.features.items():
            rows2 = {cid: i for i, cid in enumerate(b2.cell_ids[r])}
            order = [rows2[cc2.find([perm[v] for v in cc[cid].vertices], r)] for cid in b.cell_ids[r]]
            np.testing.assert_allclose(b2.features[(r, tag)][order], x, atol=1e-10)


def test_encoder_sklearn_contract():
    enc = HopseEncoder(neighborhoods="Adj-2", pse="rwse:K=3")
    assert enc.get_params()["neighborhoods"] == "Adj-2"
    enc.fit()
    assert enc.neighborhoods_ == taxonomy_set("Adj-2") and enc.taxonomy_ == "Adj-2"
    bundles = enc.transform([TWO_TRIANGLES, clique_lift(TWO_TRIANGLES)])
    assert bundles[0].equals(bundles[1])
    with pytest.raises(TypeError):
        enc.transform_one("not a graph")
    with pytest.raises(ValueError):
        HopseEncoder(lifting="nope").fit()


def test_encoder_explicit_list():
    enc = HopseEncoder(neighborhoods=[Incidence(2, 1)], pse=[PseKind(RWSE, 2)]).fit()
    assert enc.taxonomy_ is None and enc.max_rank_ == 2
    b = enc.transform_one(TWO_TRIANGLES)
    assert b.features[(1, RWSE)].shape == (7, 2)
