/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_fieldview_free: (a: number, b: number) => void;
export const fieldview_cycles: (a: number) => number;
export const fieldview_failed: (a: number) => number;
export const fieldview_m: (a: number) => number;
export const fieldview_max: (a: number) => number;
export const fieldview_min: (a: number) => number;
export const fieldview_values: (a: number) => [number, number];
export const retention_curves: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const sample_field: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number];
export const solve_infiltration: (a: number, b: number, c: number, d: number, e: bigint, f: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
