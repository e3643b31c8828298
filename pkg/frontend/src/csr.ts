/**
 * CSR graph container and the SKNB binary codec.
 *
 * The binding ships graphs to the core process as SKNB bytes; arrays are
 * validated against the same invariants the core enforces, so malformed
 * input fails fast on this side with a matching message.
 */

const MAGIC = Buffer.from("SKNB", "ascii");
const VERSION = 1;
const FLAG_DIRECTED = 1;
const FLAG_BIPARTITE = 2;
const FLAG_INDEX64 = 4;

export class ConstructionError extends Error {}

export interface CsrArrays {
  /** Row offsets, length nRows + 1. */
  indptr: BigInt64Array | number[];
  /** Column indices, length nnz, sorted strictly increasing per row. */
  indices: Int32Array | number[];
  /** Non-negative finite weights, length nnz. */
  data: Float64Array | number[];
  shape: [number, number];
  directed?: boolean;
}

export type Edge = [source: number, target: number, weight?: number];

/**
 * A graph held as CSR arrays, constructible from raw arrays or an edge
 * list. Arrays given as typed arrays are kept as-is (no copy); plain
 * number arrays are converted once.
 */
export class BoundGraph {
  readonly nRows: number;
  readonly nCols: number;
  readonly indptr: BigInt64Array;
  readonly indices: Int32Array;
  readonly data: Float64Array;
  readonly directed: boolean;

  constructor(arrays: CsrArrays) {
    const [nRows, nCols] = arrays.shape;
    this.nRows = nRows;
    this.nCols = nCols;
    this.directed = arrays.directed ?? false;
    this.indptr =
      arrays.indptr instanceof BigInt64Array
        ? arrays.indptr
        : BigInt64Array.from(arrays.indptr.map((v) => BigInt(v)));
    this.indices =
      arrays.indices instanceof Int32Array
        ? arrays.indices
        : Int32Array.from(arrays.indices);
    this.data =
      arrays.data instanceof Float64Array
        ? arrays.data
        : Float64Array.from(arrays.data);
    this.validate();
  }

  /**
   * Build an undirected (or directed) graph from an edge list; duplicate
   * edges are summed, mirroring the core's construction semantics.
   * Undirected self-loop weights sit doubled on the diagonal, as in the
   * core.
   */
  static fromEdges(edges: Edge[], n: number, directed = false): BoundGraph {
    const cells = new Map<number, number>();
    const put = (i: number, j: number, w: number) => {
      if (i < 0 || i >= n || j < 0 || j >= n) {
        throw new ConstructionError(`edge (${i}, ${j}) out of range for n=${n}`);
      }
      const key = i * n + j;
      cells.set(key, (cells.get(key) ?? 0) + w);
    };
    for (const [i, j, w] of edges) {
      const weight = w ?? 1.0;
      put(i, j, weight);
      if (!directed) put(j, i, weight);
    }
    const keys = [...cells.keys()].sort((a, b) => a - b);
    const indptr = new BigInt64Array(n + 1);
    const indices = new Int32Array(keys.length);
    const data = new Float64Array(keys.length);
    keys.forEach((key, pos) => {
      const row = Math.floor(key / n);
      indices[pos] = key % n;
      data[pos] = cells.get(key)!;
      indptr[row + 1] = BigInt(pos + 1);
    });
    for (let i = 1; i <= n; i++) {
      if (indptr[i]! === 0n && i > 0) indptr[i] = indptr[i - 1]!;
    }
    return new BoundGraph({ indptr, indices, data, shape: [n, n], directed });
  }

  get nnz(): number {
    return this.indices.length;
  }

  private validate(): void {
    const { indptr, indices, data, nRows, nCols } = this;
    if (indptr.length !== nRows + 1) {
      throw new ConstructionError("indptr length must be n_rows + 1");
    }
    if (indptr[0] !== 0n || Number(indptr[nRows]!) !== indices.length) {
      throw new ConstructionError("indptr must start at 0 and end at nnz");
    }
    if (indices.length !== data.length) {
      throw new ConstructionError("indices and data lengths differ");
    }
    for (let i = 0; i < nRows; i++) {
      const start = Number(indptr[i]!);
      const end = Number(indptr[i + 1]!);
      if (end < start) {
        throw new ConstructionError("indptr must be non-decreasing");
      }
      for (let k = start; k < end; k++) {
        const col = indices[k]!;
        if (col < 0 || col >= nCols) {
          throw new ConstructionError("column index out of range");
        }
        if (k > start && indices[k - 1]! >= col) {
          throw new ConstructionError("row indices must be strictly increasing");
        }
        const w = data[k]!;
        if (!Number.isFinite(w) || w < 0) {
          throw new ConstructionError("weights must be finite and >= 0");
        }
      }
    }
  }

  /** Encode as SKNB container bytes (the core's binary interchange). */
  toSknb(): Buffer {
    const { indptr, indices, data, nRows, nCols, nnz } = this;
    const head = Buffer.alloc(4 + 2 + 24);
    MAGIC.copy(head, 0);
    head.writeUInt8(VERSION, 4);
    head.writeUInt8(this.directed ? FLAG_DIRECTED : 0, 5);
    head.writeBigUInt64LE(BigInt(nRows), 6);
    head.writeBigUInt64LE(BigInt(nCols), 14);
    head.writeBigUInt64LE(BigInt(nnz), 22);
    return Buffer.concat([
      head,
      Buffer.from(indptr.buffer, indptr.byteOffset, indptr.byteLength),
      Buffer.from(indices.buffer, indices.byteOffset, indices.byteLength),
      Buffer.from(data.buffer, data.byteOffset, data.byteLength),
    ]);
  }

  /** Decode an SKNB buffer written by this module or by the core. */
  static fromSknb(buf: Buffer): BoundGraph {
    if (buf.length < 30 || !buf.subarray(0, 4).equals(MAGIC)) {
      throw new ConstructionError("bad magic");
    }
    const flags = buf.readUInt8(5);
    if (flags & FLAG_BIPARTITE) {
      throw new ConstructionError("bipartite graphs are not supported here");
    }
    const nRows = Number(buf.readBigUInt64LE(6));
    const nCols = Number(buf.readBigUInt64LE(14));
    const nnz = Number(buf.readBigUInt64LE(22));
    let offset = 30;
    const slice = (bytes: number): Buffer => {
      const out = buf.subarray(offset, offset + bytes);
      if (out.length !== bytes) {
        throw new ConstructionError(`truncated file at byte ${offset}`);
      }
      offset += bytes;
      return out;
    };
    const indptr = new BigInt64Array(
      new Uint8Array(slice((nRows + 1) * 8)).buffer,
    );
    const wide = Boolean(flags & FLAG_INDEX64);
    let indices: Int32Array;
    if (wide) {
      const raw = new BigInt64Array(new Uint8Array(slice(nnz * 8)).buffer);
      indices = Int32Array.from(raw, (v) => Number(v));
    } else {
      indices = new Int32Array(new Uint8Array(slice(nnz * 4)).buffer);
    }
    const data = new Float64Array(new Uint8Array(slice(nnz * 8)).buffer);
    return new BoundGraph({
      indptr,
      indices,
      data,
      shape: [nRows, nCols],
      directed: Boolean(flags & FLAG_DIRECTED),
    });
  }
}
