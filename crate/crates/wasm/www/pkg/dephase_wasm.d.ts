/* tslint:disable */
/* eslint-disable */

/**
 * Equal-length columns with a label each.
 */
export class Curves {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    column(i: number): Float64Array;
    count(): number;
    label(i: number): string;
}

/**
 * A two-level emitter coupled to one boson mode of the same energy: mean
 * occupations from the exact many-body master equation and from the
 * Boltzmann equation, starting from a product state.
 */
export function emitter_relaxation(f_upper: number, temperature: number, n_max: number, horizon: number, points: number): Curves;

/**
 * Population of state 0 under the master equation and under periodic
 * phase scrambling, for a random system of `states` levels with `dt = 1`.
 */
export function scramble_vs_master(states: number, energy_spread: number, coupling: number, samples: number, periods: number, seed: number): Curves;

/**
 * `|chi|^2` and its box approximation over `[-extent W, extent W]`, `hbar = 1`.
 */
export function window_curves(dt: number, extent: number, points: number): Curves;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_curves_free: (a: number, b: number) => void;
    readonly curves_column: (a: number, b: number) => [number, number];
    readonly curves_count: (a: number) => number;
    readonly curves_label: (a: number, b: number) => [number, number];
    readonly emitter_relaxation: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly scramble_vs_master: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
    readonly window_curves: (a: number, b: number, c: number) => [number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_table_dealloc: (a: number) => void;
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
