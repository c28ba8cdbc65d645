/* tslint:disable */
/* eslint-disable */

/**
 * Samples one field (`"rho"`, `"K"` or `"phi"`) over `[-half, half]^2`.
 *
 * Returns `{"cells", "half", "values", "min", "max", "inside"}` where
 * `values` is row-major in `q2` (bottom row first) and `null` outside the
 * allowed region.
 */
export function densityGrid(potential: string, params: string, energy: number, mass: number, half: number, cells: number, epsilon: number, field: string): string;

/**
 * Reduced oscillator integral at `q0 = ratio * a` next to its closed form.
 */
export function reducedIntegral(k: number, energy: number, b: number, ratio: number, tol: number): string;

/**
 * Spectrum rows `n = 0..=n_max` as `{"rows": [{n, E, a, C, q0, residual}]}`.
 */
export function spectrumTable(n_max: number, b: number, hbar: number, omega: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly densityGrid: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number, j: number, k: number) => [number, number, number, number];
    readonly reducedIntegral: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly spectrumTable: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
