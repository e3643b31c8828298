export { BoundGraph, ConstructionError } from "./csr.js";
export type { CsrArrays, Edge } from "./csr.js";
export { CoreError, coreCommand, runCore, runCoreOnGraph } from "./runner.js";
export { Louvain, PageRank, Spectral } from "./estimators.js";
export type {
  LouvainParams,
  PageRankParams,
  SpectralParams,
} from "./estimators.js";
