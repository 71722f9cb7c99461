/* tslint:disable */
/* eslint-disable */

/**
 * Exploitability-vs-t curves for all four learners on one game.
 */
export class Curves {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    count(): number;
    failed(i: number): boolean;
    label(i: number): string;
    /**
     * Exploitability at each `t`; truncated where the run diverged.
     */
    series(i: number): Float64Array;
    t(): Float64Array;
}

export function curves(game: string, sigma: number, eta: number, mu: number, update_freq: number, iterations: number, points: number, seed: number): Curves;

/**
 * Row and column counts of a named game.
 */
export function game_shape(game: string): Uint32Array;

export function stationary(game: string, mus: Float64Array): Float64Array;

export function trajectory(game: string, mu: number, start: Float64Array, t_end: number, samples: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_curves_free: (a: number, b: number) => void;
    readonly curves: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number];
    readonly curves_count: (a: number) => number;
    readonly curves_failed: (a: number, b: number) => number;
    readonly curves_label: (a: number, b: number) => [number, number];
    readonly curves_series: (a: number, b: number) => [number, number];
    readonly curves_t: (a: number) => [number, number];
    readonly game_shape: (a: number, b: number) => [number, number];
    readonly stationary: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly trajectory: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
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
