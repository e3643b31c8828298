"""Command-line front end and benchmark harness.

Every subcommand reads graphs from --input (TSV edge list or SKNB
binary, sniffed by magic bytes), writes its primary output to --output
or stdout, and reports errors on stderr with exit code 1 (usage errors
exit 2). Outputs are built fully in memory and written atomically.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import resource
import statistics
import sys
import tempfile
import time

import numpy as np

from . import _kernels, classification, clustering, connectivity, embedding
from . import hierarchy as hier
from . import io as gio
from . import ranking, viz
from .errors import ParameterError, SknetError
from .sparse import BipartiteGraph, Graph

SIG = "%.12g"

BENCH_REFERENCE = (
    "# reference, large-scale: Orkut, 3,072,441 nodes / 117,184,899 edges: "
    "louvain 771 s, pagerank 48 s, hits 109 s, spectral 534 s "
    "(16-core AMD Threadripper 1950X, 32 GB RAM)")


def _write_output(payload, path):
    """Atomic file write, or stdout when no path was given."""
    if isinstance(payload, str):
        payload = payload.encode("utf-8")
    if path is None or path == "-":
        sys.stdout.buffer.write(payload)
        sys.stdout.buffer.flush()
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".sknet-out-")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load_input(args, bipartite=False):
    opts = gio.ParseOptions(directed=getattr(args, "directed", False),
                            bipartite=bipartite)
    return gio.load_graph(args.input, opts)


def _node_name(g, i):
    if isinstance(g, Graph):
        return g.name_of(i)
    return str(i)


def _scores_tsv(g, scores):
    lines = [f"{_node_name(g, i)}\t{SIG % s}" for i, s in enumerate(scores)]
    return "\n".join(lines) + "\n"


def _labels_tsv(g, labels):
    lines = [f"{_node_name(g, i)}\t{int(l)}" for i, l in enumerate(labels)]
    return "\n".join(lines) + "\n"


def _resolve_node(g, token):
    """Node id from a CLI token: a name when the graph has names."""
    if g.names is not None:
        try:
            return g.names.index(token)
        except ValueError:
            pass
    try:
        return int(token)
    except ValueError:
        raise ParameterError(f"unknown node {token!r}") from None


def _read_node_value_tsv(g, path):
    """(node id, string value) pairs from a two-column TSV."""
    pairs = []
    with open(path, "r", encoding="utf-8") as f:
        for raw in f:
            line = raw.strip()
            if not line or line[0] in "#%":
                continue
            fields = line.replace(",", "\t").replace(" ", "\t").split("\t")
            fields = [x for x in fields if x]
            if len(fields) < 2:
                raise ParameterError(f"expected 2 columns in {path}")
            pairs.append((_resolve_node(g, fields[0]), fields[1]))
    return pairs


def _peak_rss_mb():
    return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024.0


# -- subcommand handlers -------------------------------------------------

def cmd_info(args):
    g = _load_input(args, bipartite=args.bipartite)
    if isinstance(g, BipartiteGraph):
        m = g.biadjacency
        lines = [("kind", "bipartite"), ("n_rows", m.n_rows),
                 ("n_cols", m.n_cols), ("m", g.m)]
    else:
        m = g.adjacency
        lines = [("kind", "directed" if g.directed else "undirected"),
                 ("n", g.n), ("m", g.m)]
    lines += [("nnz", m.nnz),
              ("weighted", int(not np.all(m.data == 1.0)) if m.nnz else 0),
              ("named", int(getattr(g, "names", None) is not None
                            or getattr(g, "row_names", None) is not None)),
              ("index_width", m.index_width), ("csr_bytes", m.nbytes())]
    _write_output("".join(f"{k}\t{v}\n" for k, v in lines), args.output)
    return 0


def cmd_pagerank(args):
    g = _load_input(args)
    params = ranking.PageRankParams(damping=args.damping,
                                    iterations=args.iters,
                                    tolerance=args.tol)
    scores = ranking.pagerank(g, params)
    _write_output(_scores_tsv(g, scores), args.output)
    return 0


def cmd_hits(args):
    g = _load_input(args)
    hubs, auth = ranking.hits(g, iterations=args.iters, tolerance=args.tol)
    lines = [f"{_node_name(g, i)}\t{SIG % hubs[i]}\t{SIG % auth[i]}"
             for i in range(g.n)]
    _write_output("\n".join(lines) + "\n", args.output)
    return 0


def cmd_katz(args):
    g = _load_input(args)
    scores = ranking.katz(g, alpha=args.alpha, depth=args.depth)
    _write_output(_scores_tsv(g, scores), args.output)
    return 0


def cmd_harmonic(args):
    g = _load_input(args)
    _write_output(_scores_tsv(g, ranking.harmonic_centrality(g)), args.output)
    return 0


def cmd_louvain(args):
    g = _load_input(args)
    params = clustering.LouvainParams(resolution=args.resolution,
                                      tol_gain=args.tol_gain,
                                      max_passes=args.max_passes,
                                      seed=args.seed)
    labels = clustering.louvain(g, params)
    _write_output(_labels_tsv(g, labels), args.output)
    return 0


def cmd_modularity(args):
    g = _load_input(args)
    labels = np.full(g.n, -1, dtype=np.int64)
    for node, value in _read_node_value_tsv(g, args.labels):
        labels[node] = int(value)
    if labels.min() < 0:
        raise ParameterError("labels file must cover every node")
    q = clustering.modularity(g, labels, resolution=args.resolution)
    _write_output(f"{SIG % q}\n", args.output)
    return 0


def cmd_hierarchy(args):
    g = _load_input(args)
    d = hier.agglomerate(g)
    if d.restricted:
        print(f"warning: restricted to the largest component "
              f"({d.n_leaves} of {g.n} nodes)", file=sys.stderr)
    _write_output(hier.dendrogram_to_tsv(d), args.output)
    return 0


def cmd_cut(args):
    with open(args.dendrogram, "r", encoding="utf-8") as f:
        d = hier.dendrogram_from_tsv(f.read())
    labels = hier.cut_straight(d, args.clusters)
    lines = [f"{i}\t{int(l)}" for i, l in enumerate(labels)]
    _write_output("\n".join(lines) + "\n", args.output)
    return 0


def cmd_spectral(args):
    g = _load_input(args)
    params = embedding.SpectralParams(dim=args.dim, gamma=args.gamma,
                                      max_lanczos_iters=args.max_iters,
                                      tol=args.tol, seed=args.seed)
    emb = embedding.spectral_embedding(g, params)
    lines = ["% spectrum\t" + "\t".join(SIG % v for v in emb.spectrum)]
    for i in range(g.n):
        coords = "\t".join(SIG % c for c in emb.coords[i])
        lines.append(f"{_node_name(g, i)}\t{coords}")
    _write_output("\n".join(lines) + "\n", args.output)
    return 0


def _svd_payload(u, s, v, names):
    lines = ["% singular-values\t" + "\t".join(SIG % x for x in s)]
    for i in range(u.shape[0]):
        lines.append(names(i) + "\t" + "\t".join(SIG % c for c in u[i]))
    return "\n".join(lines) + "\n", v


def cmd_svd(args):
    g = _load_input(args, bipartite=args.bipartite)
    m = g.biadjacency if isinstance(g, BipartiteGraph) else g.adjacency
    u, s, v = embedding.truncated_svd(m, args.rank, seed=args.seed)
    payload, v = _svd_payload(u, s, v, lambda i: _node_name(g, i))
    _write_output(payload, args.output)
    if args.col_output:
        lines = [str(j) + "\t" + "\t".join(SIG % c for c in v[j])
                 for j in range(v.shape[0])]
        _write_output("\n".join(lines) + "\n", args.col_output)
    return 0


def cmd_gsvd(args):
    g = _load_input(args, bipartite=args.bipartite)
    m = g.biadjacency if isinstance(g, BipartiteGraph) else g.adjacency
    u, s, v = embedding.gsvd(m, args.rank, seed=args.seed)
    payload, v = _svd_payload(u, s, v, lambda i: str(i))
    _write_output(payload, args.output)
    if args.col_output:
        lines = [str(j) + "\t" + "\t".join(SIG % c for c in v[j])
                 for j in range(v.shape[0])]
        _write_output("\n".join(lines) + "\n", args.col_output)
    return 0


def cmd_classify(args):
    g = _load_input(args)
    seeds = {node: value for node, value in _read_node_value_tsv(g, args.seeds)}
    if args.method == "pagerank":
        labels = classification.pagerank_classifier(
            g, seeds, damping=args.damping, iterations=args.iters)
    else:
        labels = classification.label_propagation(g, seeds,
                                                  max_iters=args.iters)
    classes = sorted(set(seeds.values()), key=str)
    out = [f"{_node_name(g, i)}\t" + (classes[l] if l >= 0 else "-1")
           for i, l in enumerate(labels)]
    _write_output("\n".join(out) + "\n", args.output)
    return 0


def _path_tsv(g, result):
    lines = []
    for i in range(g.n):
        d = result.dist[i]
        dist = "infinity" if np.isinf(d) else SIG % d
        lines.append(f"{_node_name(g, i)}\t{dist}\t{int(result.pred[i])}")
    return "\n".join(lines) + "\n"


def cmd_bfs(args):
    g = _load_input(args)
    result = connectivity.bfs(g, _resolve_node(g, args.source))
    _write_output(_path_tsv(g, result), args.output)
    return 0


def cmd_dijkstra(args):
    g = _load_input(args)
    result = connectivity.dijkstra(g, _resolve_node(g, args.source))
    _write_output(_path_tsv(g, result), args.output)
    return 0


def cmd_components(args):
    g = _load_input(args)
    _write_output(_labels_tsv(g, connectivity.connected_components(g)),
                  args.output)
    return 0


def cmd_scc(args):
    g = _load_input(args)
    _write_output(_labels_tsv(g, connectivity.strongly_connected_components(g)),
                  args.output)
    return 0


def cmd_svg_graph(args):
    g = _load_input(args)
    if args.positions:
        pos = np.zeros((g.n, 2))
        seen = np.zeros(g.n, dtype=bool)
        with open(args.positions, "r", encoding="utf-8") as f:
            for raw in f:
                line = raw.strip()
                if not line or line[0] in "#%":
                    continue
                fields = [x for x in line.split("\t") if x]
                node = _resolve_node(g, fields[0])
                pos[node] = [float(fields[1]), float(fields[2])]
                seen[node] = True
        if not seen.all():
            raise ParameterError("positions file must cover every node")
        layout = viz.layout_from_embedding(pos)
    else:
        emb = embedding.spectral_embedding(
            g, embedding.SpectralParams(dim=2, gamma=args.gamma,
                                        seed=args.seed))
        layout = viz.layout_from_embedding(emb)
    labels = None
    if args.labels:
        labels = np.zeros(g.n, dtype=np.int64)
        for node, value in _read_node_value_tsv(g, args.labels):
            labels[node] = int(value)
    _write_output(viz.svg_graph(g, layout, labels), args.output)
    return 0


def cmd_svg_dendrogram(args):
    with open(args.input, "r", encoding="utf-8") as f:
        d = hier.dendrogram_from_tsv(f.read())
    _write_output(viz.svg_dendrogram(d), args.output)
    return 0


def cmd_sbm(args):
    sizes = [int(x) for x in args.sizes.split(",") if x]
    k = len(sizes)
    probs = np.full((k, k), args.p_out)
    np.fill_diagonal(probs, args.p_in)
    g = gio.generate_sbm(gio.SbmParams(sizes, probs, seed=args.seed))
    _save_graph(g, args.output, args.format)
    return 0


def _save_graph(g, output, fmt):
    if fmt == "auto":
        fmt = "sknb" if output and str(output).endswith(".sknb") else "tsv"
    if fmt == "sknb":
        if output is None:
            raise ParameterError("binary output requires --output")
        gio.save_binary(g, output)
    else:
        _write_output(gio.serialize_edge_list(g), output)


def cmd_fetch(args):
    try:
        g = gio.builtin(args.name)
    except ParameterError:
        g = gio.load_konect(args.name, cache_dir=args.cache_dir,
                            url_template=args.url_template)
    if args.output:
        _save_graph(g, args.output, args.format)
    else:
        print(repr(g))
    return 0


def cmd_convert(args):
    g = _load_input(args, bipartite=args.bipartite)
    _save_graph(g, args.output, args.format)
    return 0


# -- benchmark harness ----------------------------------------------------

def _bench_algorithms(args):
    def run_louvain(g):
        labels = clustering.louvain(
            g, clustering.LouvainParams(resolution=args.resolution,
                                        seed=args.seed))
        q = clustering.modularity(g, labels, args.resolution)
        sha = hashlib.sha1(np.ascontiguousarray(labels).tobytes()).hexdigest()
        return (f"clusters={int(labels.max()) + 1} q={q:.6f} "
                f"labels_sha1={sha[:12]}")

    def run_pagerank(g):
        scores = ranking.pagerank(
            g, ranking.PageRankParams(damping=args.damping,
                                      iterations=args.iters))
        return f"sum={scores.sum():.9f} max={scores.max():.6g}"

    def run_hits(g):
        hubs, auth = ranking.hits(g, iterations=args.iters)
        return f"top_auth={int(np.argmax(auth))}"

    def run_spectral(g):
        emb = embedding.spectral_embedding(
            g, embedding.SpectralParams(dim=args.dim, gamma=args.gamma,
                                        seed=args.seed))
        return f"lambda2={emb.spectrum[0]:.6g}"

    return {"louvain": run_louvain, "pagerank": run_pagerank,
            "hits": run_hits, "spectral": run_spectral}


def cmd_bench(args):
    g = _load_input(args)
    algos = [a for a in args.algos.split(",") if a]
    runners = _bench_algorithms(args)
    unknown = [a for a in algos if a not in runners]
    if unknown:
        raise ParameterError(f"unknown algorithms: {unknown}; "
                             f"available: {sorted(runners)}")
    if args.kernel == "both":
        kernels = _kernels.available_backends()
    else:
        _kernels.use_backend(args.kernel)
        kernels = [_kernels.backend_name()]
    name = os.path.basename(args.input)
    header = [
        "# bench protocol: cold-start, wall-clock median of "
        f"{args.repeats} repeats; peak RSS via OS accounting (approximate, "
        "process-wide)",
        f"# graph: {name} n={g.n} m={g.m}",
        f"# params: pagerank iters={args.iters} damping={args.damping} "
        f"(damping is this tool's default assumption); "
        f"spectral dim={args.dim}; louvain resolution={args.resolution} "
        f"seed={args.seed}; hits iters={args.iters}",
        BENCH_REFERENCE,
    ]
    rows = []
    for kernel in kernels:
        _kernels.use_backend(kernel)
        for algo in algos:
            times = []
            detail = ""
            status = "ok"
            try:
                for _ in range(max(1, args.repeats)):
                    t0 = time.perf_counter()
                    detail = runners[algo](g)
                    times.append(time.perf_counter() - t0)
                seconds = statistics.median(times)
            except Exception as exc:  # failures recorded, run continues
                status = f"failed: {exc}"
                seconds = float("nan")
            rows.append((kernel, algo, seconds, _peak_rss_mb(), status,
                         detail))
    width = max(len(a) for a in algos)
    table = [f"{'algorithm':<{width + 2}}{'kernel':<9}{'seconds':>12}"
             f"{'peak_rss_mb':>14}  detail"]
    for kernel, algo, seconds, rss, status, detail in rows:
        shown = detail if status == "ok" else status
        table.append(f"{algo:<{width + 2}}{kernel:<9}{seconds:>12.4f}"
                     f"{rss:>14.1f}  {shown}")
    payload = "\n".join(header + table) + "\n"
    _write_output(payload, args.output)
    if args.tsv_output:
        lines = ["kernel\talgorithm\tseconds_median\tpeak_rss_mb\tstatus"
                 "\tn\tm\tdetail"]
        for kernel, algo, seconds, rss, status, detail in rows:
            lines.append(f"{kernel}\t{algo}\t{SIG % seconds}\t{rss:.1f}\t"
                         f"{status}\t{g.n}\t{g.m}\t{detail}")
        _write_output("\n".join(lines) + "\n", args.tsv_output)
    return 0


# -- parser ---------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="sknet",
        description="Sparse CSR graph analysis toolkit")
    parser.add_argument("--threads", type=int,
                        default=_kernels.machine_parallelism(),
                        help="worker count for row-parallel kernels")
    parser.add_argument("--kernel", choices=["auto", "native", "python"],
                        default="auto", help="kernel backend selection")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, handler, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(handler=handler)
        return p

    def with_io(p, needs_input=True):
        if needs_input:
            p.add_argument("--input", required=True,
                           help="graph file (TSV edge list or SKNB binary)")
            p.add_argument("--directed", action="store_true",
                           help="parse TSV edge lists as directed")
        p.add_argument("--output", default=None,
                       help="output file (default: stdout)")
        # also accepted after the subcommand; SUPPRESS keeps the
        # top-level value when the trailing flag is absent
        p.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                       help=argparse.SUPPRESS)
        if p.get_default("handler") is not cmd_bench:
            p.add_argument("--kernel", choices=["auto", "native", "python"],
                           default=argparse.SUPPRESS, help=argparse.SUPPRESS)
        return p

    p = add("info", cmd_info, help="graph summary")
    with_io(p)
    p.add_argument("--bipartite", action="store_true")

    p = add("pagerank", cmd_pagerank, help="damped random-walk scores")
    with_io(p)
    p.add_argument("--damping", type=float, default=0.85)
    p.add_argument("--iters", type=int, default=100)
    p.add_argument("--tol", type=float, default=None)

    p = add("hits", cmd_hits, help="hub and authority scores")
    with_io(p)
    p.add_argument("--iters", type=int, default=100)
    p.add_argument("--tol", type=float, default=0.0)

    p = add("katz", cmd_katz, help="truncated Katz centrality")
    with_io(p)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--depth", type=int, default=10)

    p = add("harmonic", cmd_harmonic, help="harmonic centrality")
    with_io(p)

    p = add("louvain", cmd_louvain, help="modularity communities")
    with_io(p)
    p.add_argument("--resolution", type=float, default=1.0)
    p.add_argument("--tol-gain", type=float, default=1e-9)
    p.add_argument("--max-passes", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)

    p = add("modularity", cmd_modularity, help="score a partition")
    with_io(p)
    p.add_argument("--labels", required=True, help="TSV node<TAB>label")
    p.add_argument("--resolution", type=float, default=1.0)

    p = add("hierarchy", cmd_hierarchy, help="agglomerative dendrogram")
    with_io(p)

    p = add("cut", cmd_cut, help="cut a dendrogram into k clusters")
    with_io(p, needs_input=False)
    p.add_argument("--dendrogram", required=True, help="dendrogram TSV")
    p.add_argument("--clusters", type=int, required=True)

    p = add("spectral", cmd_spectral, help="spectral embedding")
    with_io(p)
    p.add_argument("--dim", type=int, default=16)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-iters", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)

    for name, handler in (("svd", cmd_svd), ("gsvd", cmd_gsvd)):
        p = add(name, handler, help=f"truncated {name.upper()}")
        with_io(p)
        p.add_argument("--bipartite", action="store_true")
        p.add_argument("--rank", type=int, required=True)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--col-output", default=None,
                       help="also write column embeddings here")

    p = add("classify", cmd_classify, help="semi-supervised labels")
    with_io(p)
    p.add_argument("--seeds", required=True, help="TSV node<TAB>label")
    p.add_argument("--method", choices=["pagerank", "propagation"],
                   default="pagerank")
    p.add_argument("--damping", type=float, default=0.85)
    p.add_argument("--iters", type=int, default=100)

    for name, handler in (("bfs", cmd_bfs), ("dijkstra", cmd_dijkstra)):
        p = add(name, handler, help=f"{name} distances from a source")
        with_io(p)
        p.add_argument("--source", required=True)

    p = add("components", cmd_components, help="weak components")
    with_io(p)
    p = add("scc", cmd_scc, help="strongly connected components")
    with_io(p)

    p = add("svg-graph", cmd_svg_graph, help="render the graph as SVG")
    with_io(p)
    p.add_argument("--labels", default=None, help="TSV node<TAB>label")
    p.add_argument("--positions", default=None, help="TSV node<TAB>x<TAB>y")
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)

    p = add("svg-dendrogram", cmd_svg_dendrogram,
            help="render a dendrogram as SVG")
    with_io(p, needs_input=False)
    p.add_argument("--input", required=True, help="dendrogram TSV")

    p = add("sbm", cmd_sbm, help="stochastic block model graph")
    with_io(p, needs_input=False)
    p.add_argument("--sizes", required=True, help="comma-separated block sizes")
    p.add_argument("--p-in", type=float, required=True)
    p.add_argument("--p-out", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["auto", "tsv", "sknb"],
                   default="auto")

    p = add("fetch", cmd_fetch, help="fetch a named dataset (cached)")
    with_io(p, needs_input=False)
    p.add_argument("--name", required=True)
    p.add_argument("--cache-dir", default=None)
    p.add_argument("--url-template", default=gio.DEFAULT_URL_TEMPLATE)
    p.add_argument("--format", choices=["auto", "tsv", "sknb"],
                   default="auto")

    p = add("convert", cmd_convert, help="convert between TSV and SKNB")
    with_io(p)
    p.add_argument("--bipartite", action="store_true")
    p.add_argument("--format", choices=["auto", "tsv", "sknb"],
                   default="auto")

    p = add("bench", cmd_bench, help="benchmark representative algorithms")
    with_io(p)
    p.add_argument("--kernel", choices=["auto", "native", "python", "both"],
                   default=argparse.SUPPRESS,
                   help="kernel backend; 'both' compares all built backends")
    p.add_argument("--algos", default="louvain,pagerank,hits,spectral")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--iters", type=int, default=100)
    p.add_argument("--damping", type=float, default=0.85)
    p.add_argument("--dim", type=int, default=16)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--resolution", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tsv-output", default=None,
                   help="machine-readable report")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _kernels.set_num_threads(args.threads)
        if args.kernel != "both":  # bench resolves 'both' itself
            _kernels.use_backend(args.kernel)
        return args.handler(args)
    except SknetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
