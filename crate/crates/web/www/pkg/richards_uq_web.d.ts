/* tslint:disable */
/* eslint-disable */

/**
 * A square field in row-major order, `z` rows from the bottom.
 */
export class FieldView {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * W-cycles spent; zero for sampled fields.
     */
    readonly cycles: number;
    readonly failed: boolean;
    readonly m: number;
    readonly max: number;
    readonly min: number;
    readonly values: Float64Array;
}

/**
 * Retention and conductivity curves on `points` log-spaced suctions in
 * `[1e-3, 1e2]`, interleaved as `p, θ, K_r`.
 */
export function retention_curves(alpha: number, n: number, theta_s: number, theta_r: number, points: number): Float64Array;

/**
 * One soil parameter field. `which` indexes `ks, alpha, n, theta_s, theta_r`.
 */
export function sample_field(m: number, which: number, alpha: number, n: number, phi2: boolean, seed: bigint): FieldView;

/**
 * Pressure head after infiltrating for `t_final` hours into one soil sample.
 */
export function solve_infiltration(m: number, alpha: number, n: number, randomize: boolean, seed: bigint, t_final: number): FieldView;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_fieldview_free: (a: number, b: number) => void;
    readonly fieldview_cycles: (a: number) => number;
    readonly fieldview_failed: (a: number) => number;
    readonly fieldview_m: (a: number) => number;
    readonly fieldview_max: (a: number) => number;
    readonly fieldview_min: (a: number) => number;
    readonly fieldview_values: (a: number) => [number, number];
    readonly retention_curves: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly sample_field: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number];
    readonly solve_infiltration: (a: number, b: number, c: number, d: number, e: bigint, f: number) => [number, number, number];
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
