/* tslint:disable */
/* eslint-disable */

export function lambdaRate(gamma1: number, gamma2: number): Float64Array;

export function lambdaSurface(gamma1: number, gamma2: number, max_total_rate_t: number, n_t: number, n_angle: number): Float64Array;

export function overlapCurve(max_dim: number): Float64Array;

export function selectedSurface(mixed: boolean, q: number, n_chi: number, n_vartheta: number, resolution: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly lambdaRate: (a: number, b: number) => [number, number, number, number];
    readonly lambdaSurface: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly overlapCurve: (a: number) => [number, number, number, number];
    readonly selectedSurface: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
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
