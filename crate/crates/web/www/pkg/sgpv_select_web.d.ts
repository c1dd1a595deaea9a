/* tslint:disable */
/* eslint-disable */

/**
 * Small Monte Carlo comparison of exact-support capture rates.
 */
export function capture_rates(n: number, p: number, s: number, rho: number, snr: number, reps: number, seed: number): string;

/**
 * Simulates one data set and runs the two-stage selection on it, returning
 * the lasso path, the GIC choice, the candidate intervals and the selection.
 */
export function fit_simulated(n: number, p: number, s: number, rho: number, snr: number, seed: number, null_bound: string): string;

/**
 * SGPV of the interval `estimate +- 1.96 se` against the null `[-bound, bound]`.
 */
export function sgpv_interval(estimate: number, se: number, bound: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly capture_rates: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number];
    readonly fit_simulated: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number];
    readonly sgpv_interval: (a: number, b: number, c: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
