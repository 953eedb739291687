/* tslint:disable */
/* eslint-disable */

/**
 * Convexity verdict and optimum of the three-cell example on an action
 * grid of the given step.
 */
export function example1_summary(params_json: string): string;

/**
 * Interval gaps `|∫_A Q_n − m(A)/2|` of the square-wave sequence, with the
 * bound `1/(2n)` they must respect.
 */
export function square_wave_gaps(params_json: string): string;

/**
 * Witsenhausen costs along two one-parameter families: linear encoders
 * `λx` with their linear decoder (closed form), and two-point quantizers
 * `a·sgn(x)` with their conditional-mean decoder (quadrature).
 */
export function witsenhausen_curves(params_json: string): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly example1_summary: (a: number, b: number) => [number, number];
    readonly square_wave_gaps: (a: number, b: number) => [number, number];
    readonly witsenhausen_curves: (a: number, b: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
