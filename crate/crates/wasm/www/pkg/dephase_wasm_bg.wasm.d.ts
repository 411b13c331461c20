/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_curves_free: (a: number, b: number) => void;
export const curves_column: (a: number, b: number) => [number, number];
export const curves_count: (a: number) => number;
export const curves_label: (a: number, b: number) => [number, number];
export const emitter_relaxation: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const scramble_vs_master: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
export const window_curves: (a: number, b: number, c: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
