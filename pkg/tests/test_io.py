import io
import os
import tarfile

import numpy as np
import pytest

import oracles
from sknet import io as gio
from sknet.errors import (FetchError, FormatError, ParameterError, ParseError)
from sknet.sparse import BipartiteGraph, CsrMatrix, Graph


class TestParseEdgeList:
    def test_integer_path(self):
        g = gio.parse_edge_list("0 1\n1 2\n")
        assert g.n == 3 and g.m == 2
        assert g.names is None
        assert np.all(g.adjacency.data == 1.0)

    def test_named_weighted(self):
        g = gio.parse_edge_list("% header\na\tb\t2.5\n")
        assert g.n == 2 and g.m == 1
        assert g.names == ["a", "b"]
        assert g.adjacency.to_dense()[0, 1] == 2.5

    def test_karate_counts(self):
        raw = (gio.resources.files("sknet.data") / "karate_club.tsv").read_text()
        n_lines = len([l for l in raw.splitlines() if l.strip()])
        g = gio.parse_edge_list(raw)
        assert n_lines == 78
        assert g.n == 34 and g.m == n_lines

    def test_mixed_delimiters_and_blanks(self):
        g = gio.parse_edge_list("0,1\n\n1\t2\n2 3  \n# note\n")
        assert g.n == 4 and g.m == 3

    def test_field_count_errors(self):
        with pytest.raises(ParseError) as e:
            gio.parse_edge_list("0 1\n2\n")
        assert "line 2" in str(e.value)
        with pytest.raises(ParseError) as e:
            gio.parse_edge_list("0 1 2 3\n")
        assert "line 1" in str(e.value)

    def test_non_numeric_weight(self):
        with pytest.raises(ParseError):
            gio.parse_edge_list("a b heavy\n")

    def test_weighted_no_ignores_third_column(self):
        g = gio.parse_edge_list("0 1 9\n", gio.ParseOptions(weighted="no"))
        assert g.adjacency.to_dense()[0, 1] == 1.0

    def test_weighted_yes_requires_weight(self):
        with pytest.raises(ParseError):
            gio.parse_edge_list("0 1 2\n1 2\n", gio.ParseOptions(weighted="yes"))

    def test_duplicate_edges_summed(self):
        g = gio.parse_edge_list("0 1 1\n0 1 2\n", gio.ParseOptions(directed=True))
        assert g.adjacency.to_dense()[0, 1] == 3.0

    def test_noncontiguous_integers_become_names(self):
        g = gio.parse_edge_list("10 20\n")
        assert g.names == ["10", "20"]
        assert g.n == 2

    def test_directed_flag(self):
        g = gio.parse_edge_list("0 1\n", gio.ParseOptions(directed=True))
        assert g.directed and g.m == 1
        assert g.adjacency.to_dense().tolist() == [[0, 1], [0, 0]]

    def test_bipartite(self):
        g = gio.parse_edge_list("a x\nb x\n", gio.ParseOptions(bipartite=True))
        assert isinstance(g, BipartiteGraph)
        assert g.n_rows == 2 and g.n_cols == 1
        assert g.row_names == ["a", "b"] and g.col_names == ["x"]

    def test_undirected_self_loop_doubles(self):
        g = gio.parse_edge_list("0 0 2\n0 1 1\n")
        # degree counts the loop twice
        assert g.degrees()[0] == 5.0
        assert g.m == 2

    def test_stream_and_bytes_inputs(self):
        for payload in (b"0 1\n", io.StringIO("0 1\n"), io.BytesIO(b"0 1\n")):
            assert gio.parse_edge_list(payload).m == 1


class TestSerializeRoundTrip:
    def fuzz_graphs(self):
        # isolated nodes cannot survive an edge-list format, so compact
        # the id space to edge-covered nodes before round-tripping
        rng = np.random.default_rng(77)
        for k in range(25):
            n = int(rng.integers(2, 9))
            directed = bool(rng.integers(0, 2))
            triples = oracles.random_graph_triples(
                rng, n, weighted=bool(rng.integers(0, 2)), directed=True)
            if not directed:
                triples = triples + [(j, i, w) for i, j, w in triples]
            used = sorted({i for i, _, _ in triples} | {j for _, j, _ in triples})
            remap = {old: new for new, old in enumerate(used)}
            triples = [(remap[i], remap[j], w) for i, j, w in triples]
            n = len(used)
            adj = CsrMatrix.from_edge_list(triples, n, n)
            names = None
            if rng.integers(0, 2):
                names = [f"node{i}" for i in range(n)]
            yield Graph(adj, directed=directed, names=names)

    def test_parse_serialize_identity(self):
        for g in self.fuzz_graphs():
            text = gio.serialize_edge_list(g)
            back = gio.parse_edge_list(text, gio.ParseOptions(directed=g.directed))
            assert back.n == g.n
            if g.names is None:
                # contiguous integer labels keep their ids exactly
                assert back.names is None
                assert np.array_equal(back.adjacency.indptr, g.adjacency.indptr)
                assert np.array_equal(back.adjacency.indices, g.adjacency.indices)
                assert np.array_equal(back.adjacency.data, g.adjacency.data)
            else:
                # named nodes are renumbered in first-seen order; the
                # graph must be identical under the name correspondence
                assert sorted(back.names) == sorted(g.names)
                perm = np.array([back.names.index(nm) for nm in g.names])
                want = g.adjacency.to_dense()
                got = back.adjacency.to_dense()[np.ix_(perm, perm)]
                assert np.array_equal(got, want)

    def test_bipartite_round_trip(self):
        g = gio.builtin("bipartite_demo")
        text = gio.serialize_edge_list(g)
        back = gio.parse_edge_list(text, gio.ParseOptions(bipartite=True))
        assert np.array_equal(back.biadjacency.to_dense(),
                              g.biadjacency.to_dense())
        assert back.row_names == g.row_names
        assert back.col_names == g.col_names


class TestBuiltin:
    def test_karate(self):
        g = gio.builtin("karate_club")
        assert g.n == 34 and g.m == 78 and not g.directed
        assert np.all(g.adjacency.data == 1.0)
        # connectivity via the dense hop-distance oracle
        dist = oracles.hop_distances(g.adjacency.to_dense())
        assert np.all(np.isfinite(dist))

    def test_bipartite_demo(self):
        g = gio.builtin("bipartite_demo")
        assert isinstance(g, BipartiteGraph)
        assert g.n_rows != g.n_cols
        assert g.biadjacency.degrees("rows").min() > 0
        assert g.biadjacency.degrees("cols").min() > 0

    def test_deterministic(self):
        a = gio.builtin("karate_club")
        b = gio.builtin("karate_club")
        assert np.array_equal(a.adjacency.indices, b.adjacency.indices)
        assert np.array_equal(a.adjacency.data, b.adjacency.data)

    def test_unknown(self):
        with pytest.raises(ParameterError):
            gio.builtin("petersen")


class TestSbm:
    def test_all_zero_probs(self):
        g = gio.generate_sbm(gio.SbmParams([3, 3], np.zeros((2, 2)), seed=1))
        assert g.n == 6 and g.m == 0

    def test_complete_block(self):
        g = gio.generate_sbm(gio.SbmParams([4], np.ones((1, 1)), seed=1))
        assert g.n == 4 and g.m == 6
        assert np.array_equal(g.adjacency.to_dense(),
                              np.ones((4, 4)) - np.eye(4))

    def test_block_counts_within_3_sigma(self):
        p_in, p_out = 0.02, 0.002
        probs = np.array([[p_in, p_out], [p_out, p_in]])
        g = gio.generate_sbm(gio.SbmParams([500, 500], probs, seed=42))
        dense_counts = np.zeros((2, 2))
        adj = g.adjacency
        rows = np.repeat(np.arange(g.n), np.diff(adj.indptr))
        blocks = (rows >= 500).astype(int), (adj.indices >= 500).astype(int)
        for bi, bj in zip(*blocks):
            dense_counts[bi, bj] += 1
        n_pairs = 500 * 499 // 2
        for b in (0, 1):
            mean = n_pairs * p_in
            sigma = np.sqrt(n_pairs * p_in * (1 - p_in))
            within = dense_counts[b, b] / 2  # symmetric storage
            assert abs(within - mean) <= 3 * sigma

    def test_seed_reproducible(self):
        params = gio.SbmParams([60, 60], np.array([[0.3, 0.05], [0.05, 0.3]]),
                               seed=9)
        a = gio.generate_sbm(params)
        b = gio.generate_sbm(params)
        assert np.array_equal(a.adjacency.indices, b.adjacency.indices)
        assert np.array_equal(a.adjacency.indptr, b.adjacency.indptr)

    def test_seeds_differ(self):
        probs = np.array([[0.5]])
        a = gio.generate_sbm(gio.SbmParams([100], probs, seed=1))
        b = gio.generate_sbm(gio.SbmParams([100], probs, seed=2))
        assert a.m >= 1000 and b.m >= 1000
        assert not np.array_equal(a.adjacency.indices, b.adjacency.indices)

    def test_invalid_probs(self):
        with pytest.raises(ParameterError):
            gio.generate_sbm(gio.SbmParams([3], np.array([[1.5]]), seed=0))
        with pytest.raises(ParameterError):
            gio.generate_sbm(gio.SbmParams([3, 3],
                                           np.array([[0.1, 0.2], [0.3, 0.1]]),
                                           seed=0))

    def test_node_order_is_block_order(self):
        probs = np.array([[1.0, 0.0], [0.0, 1.0]])
        g = gio.generate_sbm(gio.SbmParams([3, 4], probs, seed=5))
        dense = g.adjacency.to_dense()
        assert np.all(dense[:3, 3:] == 0)
        assert np.all(dense[:3, :3] == 1 - np.eye(3))
        assert np.all(dense[3:, 3:] == 1 - np.eye(4))


class TestBinary:
    def test_round_trip_karate(self, tmp_path):
        g = gio.builtin("karate_club")
        path = tmp_path / "karate.sknb"
        gio.save_binary(g, path)
        back = gio.load_binary(path)
        assert back.directed == g.directed
        assert np.array_equal(back.adjacency.indptr, g.adjacency.indptr)
        assert np.array_equal(back.adjacency.indices, g.adjacency.indices)
        assert np.array_equal(back.adjacency.data, g.adjacency.data)

    def test_round_trip_named_directed(self, tmp_path):
        adj = CsrMatrix.from_edge_list([(0, 1, 2.5)], 2, 2)
        g = Graph(adj, directed=True, names=["α", "b"])
        path = tmp_path / "g.sknb"
        gio.save_binary(g, path)
        back = gio.load_binary(path)
        assert back.directed and back.names == ["α", "b"]

    def test_round_trip_bipartite(self, tmp_path):
        g = gio.builtin("bipartite_demo")
        path = tmp_path / "b.sknb"
        gio.save_binary(g, path)
        back = gio.load_binary(path)
        assert isinstance(back, BipartiteGraph)
        assert back.row_names == g.row_names
        assert back.col_names == g.col_names
        assert np.array_equal(back.biadjacency.data, g.biadjacency.data)

    def test_round_trip_int64_indices(self, tmp_path):
        m = CsrMatrix(1, 2, np.array([0, 1]), np.array([1], dtype=np.int64),
                      np.array([1.0]))
        assert m.index_width == 8
        g = Graph(CsrMatrix(2, 2, np.array([0, 1, 1]),
                            np.array([1], dtype=np.int64), np.array([1.0])),
                  directed=True)
        path = tmp_path / "wide.sknb"
        gio.save_binary(g, path)
        back = gio.load_binary(path)
        assert back.adjacency.index_width == 8

    def test_truncated(self, tmp_path):
        g = gio.builtin("karate_club")
        path = tmp_path / "k.sknb"
        gio.save_binary(g, path)
        blob = path.read_bytes()
        short = tmp_path / "short.sknb"
        short.write_bytes(blob[: len(blob) // 2])
        with pytest.raises(FormatError) as e:
            gio.load_binary(short)
        assert "byte" in str(e.value)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.sknb"
        path.write_bytes(b"NOPE" + b"\x00" * 64)
        with pytest.raises(FormatError) as e:
            gio.load_binary(path)
        assert "bad magic" in str(e.value)

    def test_load_graph_sniffs_format(self, tmp_path):
        g = gio.builtin("karate_club")
        tsv = tmp_path / "k.tsv"
        tsv.write_text(gio.serialize_edge_list(g))
        sknb = tmp_path / "k.sknb"
        gio.save_binary(g, sknb)
        assert gio.load_graph(tsv).m == 78
        assert gio.load_graph(sknb).m == 78


def make_konect_archive(tmp_path, name, lines):
    inner = tmp_path / f"{name}"
    inner.mkdir(exist_ok=True)
    out = inner / f"out.{name}"
    out.write_text(lines)
    archive = tmp_path / f"download.tsv.{name}.tar.bz2"
    with tarfile.open(archive, "w:bz2") as tf:
        tf.add(out, arcname=f"{name}/out.{name}")
    return archive


class TestKonect:
    def test_fixture_graph(self, tmp_path):
        make_konect_archive(tmp_path, "tiny", "% sym\n1 2\n2 3\n1 3\n")
        cache = tmp_path / "cache"
        template = f"file://{tmp_path}/download.tsv.{{name}}.tar.bz2"
        g = gio.load_konect("tiny", cache_dir=str(cache), url_template=template)
        assert g.n == 3 and g.m == 3

    def test_warm_cache_skips_network(self, tmp_path):
        archive = make_konect_archive(tmp_path, "tiny", "% sym\n1 2\n2 3\n1 3\n")
        cache = tmp_path / "cache"
        template = f"file://{tmp_path}/download.tsv.{{name}}.tar.bz2"
        first = gio.load_konect("tiny", cache_dir=str(cache),
                                url_template=template)
        archive.unlink()  # any re-fetch or re-parse would now fail
        second = gio.load_konect("tiny", cache_dir=str(cache),
                                 url_template=template)
        assert np.array_equal(first.adjacency.indices,
                              second.adjacency.indices)
        assert np.array_equal(first.adjacency.data, second.adjacency.data)

    def test_bipartite_marker(self, tmp_path):
        make_konect_archive(tmp_path, "bip", "% bip\n1 1\n2 1\n3 2\n")
        cache = tmp_path / "cache"
        template = f"file://{tmp_path}/download.tsv.{{name}}.tar.bz2"
        g = gio.load_konect("bip", cache_dir=str(cache), url_template=template)
        assert isinstance(g, BipartiteGraph)
        assert g.m == 3

    def test_fetch_failure_leaves_cache(self, tmp_path):
        cache = tmp_path / "cache"
        template = f"file://{tmp_path}/download.tsv.{{name}}.tar.bz2"
        with pytest.raises(FetchError):
            gio.load_konect("absent", cache_dir=str(cache),
                            url_template=template)
        assert not os.path.exists(cache / "parsed" / "absent.sknb")
        assert list((cache / "archives").iterdir()) == []

    def test_env_var_overrides_cache_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv("SKNET_DATA_DIR", str(tmp_path / "env-cache"))
        assert gio.data_dir() == str(tmp_path / "env-cache")

    def test_zip_archive_variant(self, tmp_path):
        import zipfile
        archive = tmp_path / "download.tsv.z.tar.bz2"  # name per template
        with zipfile.ZipFile(archive, "w") as zf:
            zf.writestr("z/out.z", "% sym\n1 2\n")
        cache = tmp_path / "cache"
        template = f"file://{tmp_path}/download.tsv.{{name}}.tar.bz2"
        g = gio.load_konect("z", cache_dir=str(cache), url_template=template)
        assert g.n == 2 and g.m == 1

    def test_malformed_archive(self, tmp_path):
        bad = tmp_path / "download.tsv.bad.tar.bz2"
        bad.write_bytes(b"this is not an archive at all")
        cache = tmp_path / "cache"
        template = f"file://{tmp_path}/download.tsv.{{name}}.tar.bz2"
        with pytest.raises(FormatError):
            gio.load_konect("bad", cache_dir=str(cache),
                            url_template=template)

    def test_archive_without_out_member(self, tmp_path):
        inner = tmp_path / "noout.txt"
        inner.write_text("1 2\n")
        archive = tmp_path / "download.tsv.noout.tar.bz2"
        with tarfile.open(archive, "w:bz2") as tf:
            tf.add(inner, arcname="noout/readme.txt")
        cache = tmp_path / "cache"
        template = f"file://{tmp_path}/download.tsv.{{name}}.tar.bz2"
        with pytest.raises(FormatError) as e:
            gio.load_konect("noout", cache_dir=str(cache),
                            url_template=template)
        assert "out.*" in str(e.value)

    def test_unicode_digit_labels_are_names(self):
        g = gio.parse_edge_list("³ 7\n")  # superscript three
        assert g.names == ["³", "7"]
