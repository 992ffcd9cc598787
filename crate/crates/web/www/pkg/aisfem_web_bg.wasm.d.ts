/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_get_marking_marked_fraction: (a: number) => number;
export const __wbg_get_marking_mesh_svg: (a: number) => [number, number];
export const __wbg_get_marking_n_elements: (a: number) => number;
export const __wbg_get_marking_n_marked: (a: number) => number;
export const __wbg_get_runresult_dim: (a: number) => number;
export const __wbg_get_runresult_eta: (a: number) => number;
export const __wbg_get_runresult_levels_csv: (a: number) => [number, number];
export const __wbg_get_runresult_mesh_svg: (a: number) => [number, number];
export const __wbg_get_runresult_n_elements: (a: number) => number;
export const __wbg_get_runresult_status: (a: number) => [number, number];
export const __wbg_get_runresult_total_steps: (a: number) => number;
export const __wbg_marking_free: (a: number, b: number) => void;
export const __wbg_runresult_free: (a: number, b: number) => void;
export const __wbg_set_marking_marked_fraction: (a: number, b: number) => void;
export const __wbg_set_marking_mesh_svg: (a: number, b: number, c: number) => void;
export const __wbg_set_marking_n_elements: (a: number, b: number) => void;
export const __wbg_set_marking_n_marked: (a: number, b: number) => void;
export const __wbg_set_runresult_dim: (a: number, b: number) => void;
export const __wbg_set_runresult_eta: (a: number, b: number) => void;
export const __wbg_set_runresult_levels_csv: (a: number, b: number, c: number) => void;
export const __wbg_set_runresult_mesh_svg: (a: number, b: number, c: number) => void;
export const __wbg_set_runresult_n_elements: (a: number, b: number) => void;
export const __wbg_set_runresult_status: (a: number, b: number, c: number) => void;
export const __wbg_set_runresult_total_steps: (a: number, b: number) => void;
export const markElements: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const runAdaptive: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number, j: number) => [number, number, number];
export const sweepDelta: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
export const __externref_table_alloc: () => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
