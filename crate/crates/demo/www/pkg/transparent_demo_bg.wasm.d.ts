/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_demo_free: (a: number, b: number) => void;
export const demo_cocycle_curve: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const demo_higgs_norm: (a: number) => [number, number];
export const demo_new: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const demo_section_residual: (a: number) => number;
export const demo_size: (a: number) => number;
export const demo_transport_residual: (a: number) => number;
export const demo_trivializer_degree: (a: number) => number;
export const section_residuals: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
