"""Deterministic SVG rendering of graphs and dendrograms.

All coordinates are written with fixed 6-decimal precision and a fixed
attribute order, so identical inputs produce identical bytes; output is
golden-file testable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError
from .hierarchy import Dendrogram, validate_dendrogram
from .sparse import Graph

PALETTE12 = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#aec7e8", "#ffbb78",
)


@dataclass
class SvgStyle:
    width: int = 440
    height: int = 340
    margin: float = 20.0
    node_radius: float = 5.0
    edge_width: float = 1.0
    edge_color: str = "#9a9a9a"
    node_color: str = "#3b6ea5"
    stroke_color: str = "#333333"
    palette: tuple = PALETTE12

    def validated(self):
        if self.width <= 0 or self.height <= 0:
            raise ParameterError("canvas dimensions must be positive")
        if not self.palette:
            raise ParameterError("palette must not be empty")
        return self


@dataclass
class Layout:
    """n x 2 positions in the unit square."""

    positions: np.ndarray


def _fmt(x):
    return f"{x:.6f}"


def layout_from_embedding(e) -> Layout:
    """First two embedding columns, rescaled into the unit square.

    The axis with the larger spread spans exactly [0, 1]; the other is
    centered, preserving the aspect ratio. Degenerate (single-point)
    inputs map to the center.
    """
    coords = e.coords if hasattr(e, "coords") else np.asarray(e, dtype=float)
    if coords.ndim != 2 or coords.shape[1] < 2:
        raise ParameterError("layout needs at least two embedding columns")
    xy = coords[:, :2].astype(np.float64)
    lo = xy.min(axis=0)
    span = xy.max(axis=0) - lo
    scale = span.max()
    if scale == 0:
        return Layout(np.full_like(xy, 0.5))
    out = (xy - lo) / scale
    out = out + (1.0 - span / scale) / 2.0
    return Layout(out)


def _canvas_xy(layout, style):
    inner_w = style.width - 2 * style.margin
    inner_h = style.height - 2 * style.margin
    x = style.margin + layout.positions[:, 0] * inner_w
    y = style.height - style.margin - layout.positions[:, 1] * inner_h
    return x, y


def svg_graph(g: Graph, layout: Layout, labels=None,
              style: SvgStyle = None) -> bytes:
    """Render nodes as circles and edges as lines.

    Undirected graphs draw each edge once; node fill follows the palette
    keyed by label when a partition is given.
    """
    style = (style or SvgStyle()).validated()
    pos = np.asarray(layout.positions, dtype=float)
    if pos.shape != (g.n, 2):
        raise DimensionError(f"layout must be {g.n} x 2, got {pos.shape}")
    if labels is not None:
        labels = np.asarray(labels)
        if labels.shape != (g.n,):
            raise DimensionError("labels length must equal node count")
    x, y = _canvas_xy(Layout(pos), style)
    adj = g.adjacency
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{style.width}" '
        f'height="{style.height}" '
        f'viewBox="0 0 {style.width} {style.height}">'
    ]
    rows = np.repeat(np.arange(g.n), np.diff(adj.indptr))
    for i, j in zip(rows.tolist(), adj.indices.tolist()):
        if not g.directed and j < i:
            continue
        parts.append(
            f'<line x1="{_fmt(x[i])}" y1="{_fmt(y[i])}" x2="{_fmt(x[j])}" '
            f'y2="{_fmt(y[j])}" stroke="{style.edge_color}" '
            f'stroke-width="{_fmt(style.edge_width)}"/>')
    for i in range(g.n):
        if labels is None:
            fill = style.node_color
        else:
            fill = style.palette[int(labels[i]) % len(style.palette)]
        parts.append(
            f'<circle cx="{_fmt(x[i])}" cy="{_fmt(y[i])}" '
            f'r="{_fmt(style.node_radius)}" fill="{fill}" '
            f'stroke="{style.stroke_color}"/>')
    parts.append("</svg>")
    return "\n".join(parts).encode("utf-8")


def _leaf_order(d: Dendrogram):
    """Left-to-right leaf order of the merge tree."""
    n = d.n_leaves
    if n == 1:
        return [0]
    order = []
    stack = [n + d.merges.shape[0] - 1]
    while stack:
        node = stack.pop()
        if node < n:
            order.append(node)
        else:
            t = node - n
            a, b = int(d.merges[t, 0]), int(d.merges[t, 1])
            stack.append(b)  # popped after a: a comes first
            stack.append(a)
    return order


def svg_dendrogram(d: Dendrogram, style: SvgStyle = None) -> bytes:
    """Classic bracket plot: leaves on the x-axis, heights on y."""
    style = (style or SvgStyle()).validated()
    validate_dendrogram(d)
    n = d.n_leaves
    order = _leaf_order(d)
    slot = {leaf: i for i, leaf in enumerate(order)}
    inner_w = style.width - 2 * style.margin
    inner_h = style.height - 2 * style.margin
    base_y = style.height - style.margin
    heights = d.merges[:, 2] if d.merges.size else np.zeros(0)
    h_max = float(heights.max()) if heights.size and heights.max() > 0 else 1.0

    def y_of(h):
        return base_y - (h / h_max) * inner_h

    xs = {}
    hs = {}
    for i, leaf in enumerate(order):
        xs[leaf] = style.margin + (i / max(n - 1, 1)) * inner_w
        hs[leaf] = 0.0
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{style.width}" '
        f'height="{style.height}" '
        f'viewBox="0 0 {style.width} {style.height}">'
    ]
    for t in range(d.merges.shape[0]):
        a, b, h, _ = d.merges[t]
        a, b = int(a), int(b)
        ym = y_of(h)
        pts = (f"{_fmt(xs[a])},{_fmt(y_of(hs[a]))} {_fmt(xs[a])},{_fmt(ym)} "
               f"{_fmt(xs[b])},{_fmt(ym)} {_fmt(xs[b])},{_fmt(y_of(hs[b]))}")
        parts.append(f'<polyline points="{pts}" fill="none" '
                     f'stroke="{style.stroke_color}" '
                     f'stroke-width="{_fmt(style.edge_width)}"/>')
        xs[n + t] = (xs[a] + xs[b]) / 2.0
        hs[n + t] = float(h)
    for leaf in order:
        label = leaf if d.kept_nodes is None else int(d.kept_nodes[leaf])
        parts.append(
            f'<text x="{_fmt(xs[leaf])}" y="{_fmt(base_y + 12.0)}" '
            f'font-size="8" text-anchor="middle">{label}</text>')
    parts.append("</svg>")
    return "\n".join(parts).encode("utf-8")
