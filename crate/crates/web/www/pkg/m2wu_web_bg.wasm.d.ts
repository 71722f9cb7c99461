/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_curves_free: (a: number, b: number) => void;
export const curves: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number];
export const curves_count: (a: number) => number;
export const curves_failed: (a: number, b: number) => number;
export const curves_label: (a: number, b: number) => [number, number];
export const curves_series: (a: number, b: number) => [number, number];
export const curves_t: (a: number) => [number, number];
export const game_shape: (a: number, b: number) => [number, number];
export const stationary: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const trajectory: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
