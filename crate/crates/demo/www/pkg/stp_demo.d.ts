/* tslint:disable */
/* eslint-disable */

/**
 * Objective values on a `res × res` grid over `[xmin, xmax] × [ymin, ymax]`,
 * row-major with `y` increasing by row.
 */
export function contour_grid(problem: string, xmin: number, xmax: number, ymin: number, ymax: number, res: number): Float64Array;

/**
 * Relative gap `(f − f*)/(f(x₀) − f*)` against evaluations for `method` on
 * the `n`-dimensional chain quadratic, as `[evals, gap]` pairs. STP and
 * PSTP use the solution-free stepsize with the known Lipschitz constant
 * scaled by `1/alpha0`.
 */
export function convergence(method: string, n: number, alpha0: number, seed: number, max_evals: number): Float64Array;

/**
 * For `n = 2..=max_n`: `[n, exact μ, asymptotic μ, Monte-Carlo μ, stderr]`,
 * where the estimate of `E|⟨e₁, s⟩|` uses `samples` sphere directions.
 */
export function mu_curve(max_n: number, samples: number, seed: number): Float64Array;

/**
 * The default view of a 2-D problem: `[xmin, xmax, ymin, ymax, x0, y0, x*, y*]`,
 * with `NaN` for an unknown minimizer.
 */
export function problem_view(problem: string): Float64Array;

/**
 * Iterates of `method` on a 2-D problem from its standard start, as
 * `[x, y, f, evals]` quadruples (iteration 0 first). Stops at `max_evals`
 * evaluations or when the method fails (e.g. RGF diverging).
 */
export function trajectory(problem: string, method: string, alpha0: number, seed: number, max_evals: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly contour_grid: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly convergence: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly mu_curve: (a: number, b: number, c: number) => [number, number, number, number];
    readonly problem_view: (a: number, b: number) => [number, number, number, number];
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
