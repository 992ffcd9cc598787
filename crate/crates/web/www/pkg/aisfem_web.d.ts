/* tslint:disable */
/* eslint-disable */

/**
 * Dörfler marking of the estimator at the exact discrete solution on a
 * uniformly refined initial mesh.
 */
export class Marking {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Share of `eta^2` carried by the marked elements.
     */
    marked_fraction: number;
    mesh_svg: string;
    n_elements: number;
    n_marked: number;
}

/**
 * Everything the page shows after an adaptive run.
 */
export class RunResult {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    dim: number;
    eta: number;
    /**
     * Per-level CSV as written by the command line tool.
     */
    levels_csv: string;
    /**
     * Final mesh coloured by the final error indicators.
     */
    mesh_svg: string;
    n_elements: number;
    status: string;
    total_steps: number;
}

/**
 * Dörfler marking picture; see [`marking_demo`].
 */
export function markElements(problem_name: string, degree: number, refinements: number, theta: number): Marking;

/**
 * Runs the adaptive algorithm; see [`run_demo`].
 */
export function runAdaptive(problem_name: string, degree: number, theta: number, lambda_sym: number, lambda_alg: number, delta: number, max_dim: number, solver: string): RunResult;

/**
 * CSV `delta,q` for `count` equispaced damping values in `(0, max_delta]`.
 */
export function sweepDelta(problem_name: string, degree: number, refinements: number, max_delta: number, count: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_get_marking_marked_fraction: (a: number) => number;
    readonly __wbg_get_marking_mesh_svg: (a: number) => [number, number];
    readonly __wbg_get_marking_n_elements: (a: number) => number;
    readonly __wbg_get_marking_n_marked: (a: number) => number;
    readonly __wbg_get_runresult_dim: (a: number) => number;
    readonly __wbg_get_runresult_eta: (a: number) => number;
    readonly __wbg_get_runresult_levels_csv: (a: number) => [number, number];
    readonly __wbg_get_runresult_mesh_svg: (a: number) => [number, number];
    readonly __wbg_get_runresult_n_elements: (a: number) => number;
    readonly __wbg_get_runresult_status: (a: number) => [number, number];
    readonly __wbg_get_runresult_total_steps: (a: number) => number;
    readonly __wbg_marking_free: (a: number, b: number) => void;
    readonly __wbg_runresult_free: (a: number, b: number) => void;
    readonly __wbg_set_marking_marked_fraction: (a: number, b: number) => void;
    readonly __wbg_set_marking_mesh_svg: (a: number, b: number, c: number) => void;
    readonly __wbg_set_marking_n_elements: (a: number, b: number) => void;
    readonly __wbg_set_marking_n_marked: (a: number, b: number) => void;
    readonly __wbg_set_runresult_dim: (a: number, b: number) => void;
    readonly __wbg_set_runresult_eta: (a: number, b: number) => void;
    readonly __wbg_set_runresult_levels_csv: (a: number, b: number, c: number) => void;
    readonly __wbg_set_runresult_mesh_svg: (a: number, b: number, c: number) => void;
    readonly __wbg_set_runresult_n_elements: (a: number, b: number) => void;
    readonly __wbg_set_runresult_status: (a: number, b: number, c: number) => void;
    readonly __wbg_set_runresult_total_steps: (a: number, b: number) => void;
    readonly markElements: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly runAdaptive: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number, j: number) => [number, number, number];
    readonly sweepDelta: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly __externref_table_alloc: () => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
