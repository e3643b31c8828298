/**
 * Scikit-learn-style estimators over the core graph library.
 *
 * Each estimator is a thin wrapper: fit() marshals the graph to the
 * core process, runs one algorithm and parses the result into typed
 * arrays. Nothing is reimplemented here, so a binding's numbers are the
 * core's numbers; computation runs out-of-process, leaving the JS
 * runtime free.
 */

import { BoundGraph } from "./csr.js";
import {
  parseValueColumn,
  rawValueColumn,
  runCoreOnGraph,
} from "./runner.js";

export interface PageRankParams {
  damping?: number;
  iterations?: number;
}

/** Damped random-walk node scores (sums to one). */
export class PageRank {
  readonly damping: number;
  readonly iterations: number;
  /** Scores after fit(), one per node. */
  scores_!: Float64Array;
  /** The core's serialized score strings (12 significant digits). */
  rawScores_!: string[];

  constructor(params: PageRankParams = {}) {
    this.damping = params.damping ?? 0.85;
    this.iterations = params.iterations ?? 100;
  }

  getParams(): Required<PageRankParams> {
    return { damping: this.damping, iterations: this.iterations };
  }

  fit(graph: BoundGraph): this {
    const out = runCoreOnGraph(graph, [
      "pagerank",
      "--damping",
      String(this.damping),
      "--iters",
      String(this.iterations),
    ]);
    this.scores_ = parseValueColumn(out);
    this.rawScores_ = rawValueColumn(out);
    return this;
  }

  /** fit() and return the scores. */
  fitTransform(graph: BoundGraph): Float64Array {
    return this.fit(graph).scores_;
  }

  /** Node ids sorted by decreasing score. */
  predict(topK?: number): Int32Array {
    const order = Int32Array.from(this.scores_.keys()).sort(
      (a, b) => this.scores_[b]! - this.scores_[a]! || a - b,
    );
    return topK === undefined ? order : order.subarray(0, topK);
  }
}

export interface LouvainParams {
  resolution?: number;
  seed?: number;
}

/** Modularity communities via the core's Louvain implementation. */
export class Louvain {
  readonly resolution: number;
  readonly seed: number;
  /** Cluster labels after fit(), one per node. */
  labels_!: Int32Array;

  constructor(params: LouvainParams = {}) {
    this.resolution = params.resolution ?? 1.0;
    this.seed = params.seed ?? 0;
  }

  getParams(): Required<LouvainParams> {
    return { resolution: this.resolution, seed: this.seed };
  }

  fit(graph: BoundGraph): this {
    const out = runCoreOnGraph(graph, [
      "louvain",
      "--resolution",
      String(this.resolution),
      "--seed",
      String(this.seed),
    ]);
    this.labels_ = Int32Array.from(parseValueColumn(out));
    return this;
  }

  fitPredict(graph: BoundGraph): Int32Array {
    return this.fit(graph).labels_;
  }

  get nClusters(): number {
    return this.labels_.length ? Math.max(...this.labels_) + 1 : 0;
  }
}

export interface SpectralParams {
  dim?: number;
  gamma?: number;
  seed?: number;
}

/** Spectral node embedding; rows of embedding_ are node coordinates. */
export class Spectral {
  readonly dim: number;
  readonly gamma: number;
  readonly seed: number;
  /** n x dim coordinates after fit(). */
  embedding_!: Float64Array[];
  /** Laplacian eigenvalues (ascending, trivial pair excluded). */
  spectrum_!: Float64Array;

  constructor(params: SpectralParams = {}) {
    this.dim = params.dim ?? 16;
    this.gamma = params.gamma ?? 0;
    this.seed = params.seed ?? 0;
  }

  getParams(): Required<SpectralParams> {
    return { dim: this.dim, gamma: this.gamma, seed: this.seed };
  }

  fit(graph: BoundGraph): this {
    const out = runCoreOnGraph(graph, [
      "spectral",
      "--dim",
      String(this.dim),
      "--gamma",
      String(this.gamma),
      "--seed",
      String(this.seed),
    ]);
    const lines = out.trim().split("\n");
    const header = lines.shift()!;
    this.spectrum_ = Float64Array.from(
      header.split("\t").slice(1).map(Number),
    );
    this.embedding_ = lines.map((line) =>
      Float64Array.from(line.split("\t").slice(1).map(Number)),
    );
    return this;
  }

  fitTransform(graph: BoundGraph): Float64Array[] {
    return this.fit(graph).embedding_;
  }
}
