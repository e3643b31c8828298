"""Graph ingestion and persistence.

Covers TSV edge lists, a compact binary container (magic ``SKNB``),
bundled demo graphs, stochastic block model generation and a cached
downloader for remote archives in the Konect layout.
"""

from __future__ import annotations

import math
import os
import re
import struct
import tarfile
import tempfile
import urllib.request
import zipfile
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import (FetchError, FormatError, ParameterError, ParseError,
                     SknetError)
from .sparse import BipartiteGraph, CsrMatrix, Graph

MAGIC = b"SKNB"
VERSION = 1
FLAG_DIRECTED = 1
FLAG_BIPARTITE = 2
FLAG_INDEX64 = 4
FLAG_NAMES = 8

DEFAULT_URL_TEMPLATE = "http://konect.cc/files/download.tsv.{name}.tar.bz2"


def data_dir():
    """Cache directory: $SKNET_DATA_DIR or ~/.cache/sknet."""
    env = os.environ.get("SKNET_DATA_DIR")
    if env:
        return env
    return os.path.join(os.path.expanduser("~"), ".cache", "sknet")


@dataclass
class ParseOptions:
    """Edge-list parsing knobs.

    ``weighted`` is 'auto' (third column on the first data line decides),
    'yes' or 'no'. Labels map to contiguous ids in first-seen order; if
    every label is a decimal integer and together they form exactly
    0..n-1, the integers are used as the ids and no names are kept.
    """

    comment_prefixes: frozenset = frozenset({"#", "%"})
    delimiters: frozenset = frozenset({"\t", " ", ","})
    weighted: str = "auto"
    bipartite: bool = False
    directed: bool = False

    def splitter(self):
        if not self.delimiters:
            raise ParameterError("delimiters must be non-empty")
        return re.compile("[" + re.escape("".join(sorted(self.delimiters))) + "]+")


class _NameSpace:
    """Assigns contiguous ids to labels in first-seen order."""

    def __init__(self):
        self.ids = {}
        self.labels = []

    def get(self, label):
        i = self.ids.get(label)
        if i is None:
            i = len(self.labels)
            self.ids[label] = i
            self.labels.append(label)
        return i

    def resolve(self):
        """(permutation old->final id, names or None).

        Integer labels forming exactly 0..n-1 become the ids themselves;
        anything else keeps first-seen numbering with names retained.
        """
        n = len(self.labels)
        values = []
        for lab in self.labels:
            # ascii check: isdigit() alone accepts superscripts etc.
            if not (lab.isascii() and lab.isdigit()):
                return None, self.labels
            values.append(int(lab))
        if sorted(values) != list(range(n)):
            return None, self.labels
        return np.array(values, dtype=np.int64), None


def parse_edge_list(text, opts=None):
    """Parse a TSV/CSV edge list into a Graph or BipartiteGraph.

    Lines hold ``src<sep>dst[<sep>weight]``; '#'/'%' lines and blank
    lines are skipped. Duplicate edges are summed.
    """
    opts = opts or ParseOptions()
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"input is not valid UTF-8: {exc}") from None
    elif hasattr(text, "read"):
        text = text.read()
        if isinstance(text, bytes):
            text = text.decode("utf-8")
    split = opts.splitter()
    src_names = _NameSpace()
    dst_names = src_names if not opts.bipartite else _NameSpace()
    rows, cols, weights = [], [], []
    weighted = {"auto": None, "yes": True, "no": False}[opts.weighted]
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in opts.comment_prefixes:
            continue
        fields = [f for f in split.split(line) if f]
        if len(fields) < 2 or len(fields) > 3:
            raise ParseError(f"expected 2 or 3 fields, found {len(fields)}",
                             line=lineno)
        if weighted is None:
            weighted = len(fields) == 3
        if weighted and len(fields) < 3:
            raise ParseError("missing weight column", line=lineno)
        w = 1.0
        if weighted:
            try:
                w = float(fields[2])
            except ValueError:
                raise ParseError(f"non-numeric weight {fields[2]!r}",
                                 line=lineno) from None
            if not math.isfinite(w) or w < 0:
                raise ParseError(f"weight must be finite and >= 0, got {w}",
                                 line=lineno)
        rows.append(src_names.get(fields[0]))
        cols.append(dst_names.get(fields[1]))
        weights.append(w)
    rows = np.array(rows, dtype=np.int64)
    cols = np.array(cols, dtype=np.int64)
    weights = np.array(weights, dtype=np.float64)
    perm_r, names_r = src_names.resolve()
    if perm_r is not None and rows.size:
        rows = perm_r[rows]
    if opts.bipartite:
        perm_c, names_c = dst_names.resolve()
        if perm_c is not None and cols.size:
            cols = perm_c[cols]
        bi = CsrMatrix.from_arrays(rows, cols, weights,
                                   len(src_names.labels),
                                   len(dst_names.labels))
        return BipartiteGraph(bi, row_names=names_r, col_names=names_c)
    if perm_r is not None and cols.size:
        cols = perm_r[cols]
    n = len(src_names.labels)
    if not opts.directed:
        rows, cols = np.concatenate([rows, cols]), np.concatenate([cols, rows])
        weights = np.concatenate([weights, weights])
    adj = CsrMatrix.from_arrays(rows, cols, weights, n, n)
    return Graph(adj, directed=opts.directed, names=names_r)


def _format_weight(w):
    return repr(float(w))


def serialize_edge_list(g):
    """Graph -> TSV text; the inverse of :func:`parse_edge_list`.

    Undirected graphs emit each edge once (self-loop weights halved back
    to their single-incidence value).
    """
    lines = []
    if isinstance(g, BipartiteGraph):
        m = g.biadjacency
        rname = g.row_names or [str(i) for i in range(m.n_rows)]
        cname = g.col_names or [str(j) for j in range(m.n_cols)]
        weighted = bool(m.nnz) and not np.all(m.data == 1.0)
        for i in range(m.n_rows):
            cols, w = m.row(i)
            for j, wj in zip(cols, w):
                item = f"{rname[i]}\t{cname[j]}"
                lines.append(item + (f"\t{_format_weight(wj)}" if weighted else ""))
        return "\n".join(lines) + ("\n" if lines else "")
    m = g.adjacency
    names = g.names or [str(i) for i in range(g.n)]
    out_w = []
    out_pairs = []
    for i in range(m.n_rows):
        cols, w = m.row(i)
        for j, wj in zip(cols, w):
            if not g.directed:
                if j < i:
                    continue
                if j == i:
                    wj = wj / 2.0
            out_pairs.append((i, j))
            out_w.append(wj)
    weighted = bool(out_w) and not all(w == 1.0 for w in out_w)
    for (i, j), wj in zip(out_pairs, out_w):
        item = f"{names[i]}\t{names[j]}"
        lines.append(item + (f"\t{_format_weight(wj)}" if weighted else ""))
    return "\n".join(lines) + ("\n" if lines else "")


# -- bundled graphs ----------------------------------------------------

_BIPARTITE_DEMO_EDGES = [
    (0, 0), (0, 1), (1, 0), (1, 2), (2, 1), (2, 2), (3, 2), (3, 3),
    (4, 0), (4, 3),
]


def builtin(name):
    """Small graphs embedded in the package for tests and teaching."""
    if name == "karate_club":
        path = resources.files("sknet.data") / "karate_club.tsv"
        return parse_edge_list(path.read_text(), ParseOptions(directed=False))
    if name == "bipartite_demo":
        bi = CsrMatrix.from_edge_list(
            [(r, c, 1.0) for r, c in _BIPARTITE_DEMO_EDGES], 5, 4)
        return BipartiteGraph(bi,
                              row_names=[f"left_{i}" for i in range(5)],
                              col_names=[f"right_{j}" for j in range(4)])
    raise ParameterError(f"unknown builtin graph {name!r}")


# -- stochastic block model --------------------------------------------

@dataclass
class SbmParams:
    """Stochastic block model: sizes, a symmetric probability matrix, seed."""

    block_sizes: list
    block_probs: object
    seed: int = 0

    def validated(self):
        sizes = np.asarray(self.block_sizes, dtype=np.int64)
        probs = np.asarray(self.block_probs, dtype=np.float64)
        if sizes.ndim != 1 or sizes.size == 0 or np.any(sizes < 0):
            raise ParameterError("block_sizes must be non-negative counts")
        k = sizes.size
        if probs.shape != (k, k):
            raise ParameterError("block_probs must be k x k")
        if np.any(probs < 0) or np.any(probs > 1) or not np.all(np.isfinite(probs)):
            raise ParameterError("probabilities must lie in [0, 1]")
        if not np.array_equal(probs, probs.T):
            raise ParameterError("block_probs must be symmetric")
        return sizes, probs


def _sample_bernoulli_indices(rng, n_pairs, p):
    """Indices of successes among n_pairs Bernoulli(p) draws, via skips."""
    if p <= 0.0 or n_pairs == 0:
        return np.empty(0, dtype=np.int64)
    if p >= 1.0:
        return np.arange(n_pairs, dtype=np.int64)
    out = []
    pos = -1
    expect = int(n_pairs * p + 10.0 * math.sqrt(n_pairs * p) + 10.0)
    while pos < n_pairs:
        skips = rng.geometric(p, size=expect)
        steps = np.cumsum(skips) + pos
        out.append(steps)
        pos = int(steps[-1])
    hits = np.concatenate(out)
    return hits[hits < n_pairs]


def generate_sbm(params):
    """Undirected simple graph drawn from a stochastic block model.

    Each node pair is included independently with the probability of its
    block pair; sampling skips over failures geometrically so the cost is
    proportional to the number of edges, not node pairs.
    """
    sizes, probs = params.validated()
    rng = np.random.default_rng(params.seed)
    starts = np.concatenate([[0], np.cumsum(sizes)])
    n = int(starts[-1])
    all_u, all_v = [], []
    k = sizes.size
    for a in range(k):
        sa = int(sizes[a])
        # within-block pairs i < j
        n_pairs = sa * (sa - 1) // 2
        hits = _sample_bernoulli_indices(rng, n_pairs, float(probs[a, a]))
        if hits.size:
            # pair t belongs to first node i with cum_pairs[i+1] > t
            cum = np.concatenate([[0], np.cumsum(np.arange(sa - 1, 0, -1))])
            i = np.searchsorted(cum, hits, side="right") - 1
            j = hits - cum[i] + i + 1
            all_u.append(i + starts[a])
            all_v.append(j + starts[a])
        for b in range(a + 1, k):
            sb = int(sizes[b])
            hits = _sample_bernoulli_indices(rng, sa * sb, float(probs[a, b]))
            if hits.size:
                all_u.append(hits // sb + starts[a])
                all_v.append(hits % sb + starts[b])
    if all_u:
        u = np.concatenate(all_u)
        v = np.concatenate(all_v)
    else:
        u = np.empty(0, dtype=np.int64)
        v = np.empty(0, dtype=np.int64)
    rows = np.concatenate([u, v])
    cols = np.concatenate([v, u])
    weights = np.ones(rows.size, dtype=np.float64)
    return Graph(CsrMatrix.from_arrays(rows, cols, weights, n, n),
                 directed=False)


# -- binary container ----------------------------------------------------

def _pack_names(names):
    if names is None:
        return struct.pack("<Q", 0)
    parts = [struct.pack("<Q", len(names))]
    for s in names:
        b = str(s).encode("utf-8")
        parts.append(struct.pack("<I", len(b)))
        parts.append(b)
    return b"".join(parts)


def save_binary(g, path):
    """Write a graph to ``path`` in the SKNB container, atomically."""
    bipartite = isinstance(g, BipartiteGraph)
    m = g.biadjacency if bipartite else g.adjacency
    flags = 0
    if not bipartite and g.directed:
        flags |= FLAG_DIRECTED
    if bipartite:
        flags |= FLAG_BIPARTITE
    if m.indices.dtype == np.int64:
        flags |= FLAG_INDEX64
    if bipartite:
        has_names = g.row_names is not None or g.col_names is not None
    else:
        has_names = g.names is not None
    if has_names:
        flags |= FLAG_NAMES
    blob = [MAGIC, struct.pack("<BB", VERSION, flags),
            struct.pack("<QQQ", m.n_rows, m.n_cols, m.nnz),
            m.indptr.astype("<i8").tobytes(),
            m.indices.astype("<i8" if flags & FLAG_INDEX64 else "<i4").tobytes(),
            m.data.astype("<f8").tobytes()]
    if has_names:
        if bipartite:
            blob.append(_pack_names(g.row_names))
            blob.append(_pack_names(g.col_names))
        else:
            blob.append(_pack_names(g.names))
    payload = b"".join(blob)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(os.path.abspath(path)),
                               prefix=".sknb-")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class _Reader:
    def __init__(self, f):
        self.f = f
        self.offset = 0

    def read(self, size, what):
        buf = self.f.read(size)
        self.offset += len(buf)
        if len(buf) != size:
            raise FormatError(f"truncated file while reading {what}",
                              offset=self.offset)
        return buf

    def read_array(self, dtype, count, what):
        dtype = np.dtype(dtype)
        arr = np.fromfile(self.f, dtype=dtype, count=count)
        self.offset += arr.size * dtype.itemsize
        if arr.size != count:
            raise FormatError(f"truncated file while reading {what}",
                              offset=self.offset)
        return arr


def _unpack_names(r, count_label):
    (count,) = struct.unpack("<Q", r.read(8, count_label))
    if count == 0:
        return None
    names = []
    for i in range(count):
        (ln,) = struct.unpack("<I", r.read(4, f"{count_label}[{i}] length"))
        names.append(r.read(ln, f"{count_label}[{i}]").decode("utf-8"))
    return names


def load_binary(path):
    """Read a graph written by :func:`save_binary` (lossless)."""
    with open(path, "rb") as f:
        r = _Reader(f)
        magic = r.read(4, "magic")
        if magic != MAGIC:
            raise FormatError(f"bad magic {magic!r}", offset=0)
        version, flags = struct.unpack("<BB", r.read(2, "version/flags"))
        if version != VERSION:
            raise FormatError(f"unsupported version {version}", offset=4)
        n_rows, n_cols, nnz = struct.unpack("<QQQ", r.read(24, "dimensions"))
        indptr = r.read_array("<i8", n_rows + 1, "indptr")
        idx_dtype = "<i8" if flags & FLAG_INDEX64 else "<i4"
        indices = r.read_array(idx_dtype, nnz, "indices")
        data = r.read_array("<f8", nnz, "data")
        try:
            m = CsrMatrix(n_rows, n_cols, indptr, indices, data)
        except SknetError as exc:
            raise FormatError(f"inconsistent arrays: {exc}",
                              offset=r.offset) from None
        if flags & FLAG_BIPARTITE:
            row_names = col_names = None
            if flags & FLAG_NAMES:
                row_names = _unpack_names(r, "row name count")
                col_names = _unpack_names(r, "column name count")
            return BipartiteGraph(m, row_names=row_names, col_names=col_names)
        names = None
        if flags & FLAG_NAMES:
            names = _unpack_names(r, "name count")
        return Graph(m, directed=bool(flags & FLAG_DIRECTED), names=names)


def load_graph(path, opts=None):
    """Load TSV or SKNB, sniffing the binary container by its magic."""
    with open(path, "rb") as f:
        head = f.read(4)
    if head == MAGIC:
        return load_binary(path)
    with open(path, "rb") as f:
        return parse_edge_list(f.read(), opts)


# -- remote repositories -------------------------------------------------

def _konect_options(text):
    """Parse Konect header conventions from the first comment line."""
    opts = ParseOptions()
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line[0] != "%":
            break
        tokens = line[1:].split()
        if "bip" in tokens:
            opts = ParseOptions(bipartite=True)
        elif "asym" in tokens:
            opts = ParseOptions(directed=True)
        break
    return opts


def _extract_out_member(archive_path):
    """Bytes of the ``out.*`` member of a tar or zip archive."""
    if tarfile.is_tarfile(archive_path):
        with tarfile.open(archive_path) as tf:
            for member in tf.getmembers():
                base = os.path.basename(member.name)
                if member.isfile() and base.startswith("out."):
                    return tf.extractfile(member).read()
    elif zipfile.is_zipfile(archive_path):
        with zipfile.ZipFile(archive_path) as zf:
            for name in zf.namelist():
                if os.path.basename(name).startswith("out."):
                    return zf.read(name)
    else:
        raise FormatError(f"{archive_path}: not a tar or zip archive")
    raise FormatError(f"{archive_path}: no out.* member found")


def load_konect(name, cache_dir=None, url_template=DEFAULT_URL_TEMPLATE):
    """Fetch, parse and cache a named dataset from a remote repository.

    The parsed graph is cached in binary form, so repeat calls perform no
    network or archive I/O. A failed download leaves the cache untouched.
    """
    cache_dir = cache_dir or data_dir()
    parsed = os.path.join(cache_dir, "parsed", f"{name}.sknb")
    if os.path.exists(parsed):
        return load_binary(parsed)
    archive_dir = os.path.join(cache_dir, "archives")
    os.makedirs(archive_dir, exist_ok=True)
    os.makedirs(os.path.dirname(parsed), exist_ok=True)
    url = url_template.format(name=name)
    archive = os.path.join(archive_dir, os.path.basename(url))
    if not os.path.exists(archive):
        fd, tmp = tempfile.mkstemp(dir=archive_dir, prefix=".fetch-")
        try:
            with urllib.request.urlopen(url) as resp, os.fdopen(fd, "wb") as f:
                f.write(resp.read())
            os.replace(tmp, archive)
        except OSError as exc:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise FetchError(f"failed to fetch {url}: {exc}") from None
    text = _extract_out_member(archive).decode("utf-8")
    g = parse_edge_list(text, _konect_options(text))
    save_binary(g, parsed)
    return g
