// Typed client for the conepid HTTP service.
//
// Mirrors the dictionary calling convention of the Python package: pass a
// mapping from outcome triplets to probabilities plus optional tolerance
// parameters, get back the result record with keys SI, UIY, UIZ, CI,
// Num_err and Solver (all information quantities in bits).

export type Label = number | string | Label[];
export type Triplet = [Label, Label, Label];

/** One outcome record as the service expects it. */
export interface PdfEntry {
  x: Label;
  y: Label;
  z: Label;
  p: number;
}

/**
 * A distribution is either a list of entries or a record keyed by the
 * JSON encoding of the triplet, e.g. { "[0,0,0]": 0.25, ... }.
 */
export type PdfInput = PdfEntry[] | Record<string, number>;

export interface SolverParams {
  feastol?: number;
  abstol?: number;
  reltol?: number;
  feastol_inacc?: number;
  abstol_inacc?: number;
  reltol_inacc?: number;
  max_iter?: number;
}

export interface ReturnData {
  SI: number;
  UIY: number;
  UIZ: number;
  CI: number;
  Num_err: [number, number, number];
  Solver: string;
}

export interface PidResponse {
  returndata: ReturnData;
  status: string;
  status_detail: string;
  iterations: number;
  consistency_warning: string | null;
}

export interface GateResponse {
  gate: string;
  returndata: ReturnData;
  status: string;
  iterations: number;
  expected: [number, number, number, number];
  max_deviation: number;
}

export interface CopyResponse {
  returndata: ReturnData;
  status: string;
  iterations: number;
  seconds: number;
  uiy_rel_dev: number;
  uiz_rel_dev: number;
}

export interface InstanceReport {
  seed: number;
  returndata: ReturnData | null;
  status: string;
  seconds: number;
  error: string | null;
}

export interface SweepAggregate {
  si_mean: number;
  uiy_mean: number;
  uiz_mean: number;
  ci_mean: number;
  seconds_mean: number;
  solved: number;
  failed: number;
}

export interface RandomPdfResponse {
  instances: InstanceReport[];
  aggregate: SweepAggregate;
}

const PARAM_KEYS: ReadonlyArray<keyof SolverParams> = [
  "feastol",
  "abstol",
  "reltol",
  "feastol_inacc",
  "abstol_inacc",
  "reltol_inacc",
  "max_iter",
];

/** Raised when the service reports a solver failure. */
export class Broja2PidError extends Error {
  constructor(message: string, readonly status?: number) {
    super(message);
    this.name = "Broja2PidError";
  }
}

export interface ClientOptions {
  /** Base URL of a running conepid service. */
  baseUrl?: string;
  /** Per-request timeout in milliseconds. */
  timeoutMs?: number;
}

const DEFAULT_BASE_URL = "http://127.0.0.1:8000";

function toEntries(pdf: PdfInput): PdfEntry[] {
  if (Array.isArray(pdf)) {
    return pdf;
  }
  return Object.entries(pdf).map(([key, p]) => {
    let triplet: unknown;
    try {
      triplet = JSON.parse(key);
    } catch {
      throw new Error(`pdf key ${key} is not a JSON-encoded [x, y, z] triplet`);
    }
    if (!Array.isArray(triplet) || triplet.length !== 3) {
      throw new Error(`pdf key ${key} must encode a three-element array`);
    }
    const [x, y, z] = triplet as Triplet;
    return { x, y, z, p };
  });
}

function checkParams(params: SolverParams): void {
  const unknown = Object.keys(params).filter(
    (k) => !PARAM_KEYS.includes(k as keyof SolverParams),
  );
  if (unknown.length > 0) {
    throw new Error(
      `unknown parameter(s) ${unknown.join(", ")}; valid keys are ${PARAM_KEYS.join(", ")}`,
    );
  }
}

async function post<T>(path: string, body: unknown, options: ClientOptions): Promise<T> {
  const base = options.baseUrl ?? DEFAULT_BASE_URL;
  const response = await fetch(`${base}${path}`, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(body),
    signal: AbortSignal.timeout(options.timeoutMs ?? 600_000),
  });
  const text = await response.text();
  if (response.status >= 500) {
    throw new Broja2PidError(text, response.status);
  }
  if (!response.ok) {
    throw new Error(`request failed (${response.status}): ${text}`);
  }
  return JSON.parse(text) as T;
}

/**
 * Compute the partial information decomposition of a distribution and
 * return the result record.
 */
export async function pid(
  pdf: PdfInput,
  params: SolverParams = {},
  options: ClientOptions = {},
): Promise<ReturnData> {
  const response = await pidFull(pdf, params, options);
  return response.returndata;
}

/** Like {@link pid} but keeps the solver metadata (status, iterations). */
export async function pidFull(
  pdf: PdfInput,
  params: SolverParams = {},
  options: ClientOptions = {},
): Promise<PidResponse> {
  checkParams(params);
  return post<PidResponse>("/pid", { pdf: toEntries(pdf), params }, options);
}

/** Run one battery gate on the service. */
export async function gateDecomposition(
  name: string,
  options: ClientOptions = {},
): Promise<GateResponse> {
  return post<GateResponse>(`/gates/${encodeURIComponent(name)}`, null, options);
}

/** Run one copy-gate instance. */
export async function copyGate(
  m: number,
  n: number,
  params: SolverParams = {},
  options: ClientOptions = {},
): Promise<CopyResponse> {
  checkParams(params);
  return post<CopyResponse>("/copy", { m, n, params }, options);
}

/** Run a seeded uniform-simplex sweep. */
export async function randomPdfSweep(
  nx: number,
  ny: number,
  nz: number,
  count: number,
  seed = 0,
  params: SolverParams = {},
  options: ClientOptions = {},
): Promise<RandomPdfResponse> {
  checkParams(params);
  return post<RandomPdfResponse>(
    "/randompdf",
    { nx, ny, nz, count, seed, params },
    options,
  );
}

/** List the battery gate names the service knows. */
export async function listGates(options: ClientOptions = {}): Promise<string[]> {
  const base = options.baseUrl ?? DEFAULT_BASE_URL;
  const response = await fetch(`${base}/gates`);
  if (!response.ok) {
    throw new Error(`request failed (${response.status})`);
  }
  const body = (await response.json()) as { gates: string[] };
  return body.gates;
}
