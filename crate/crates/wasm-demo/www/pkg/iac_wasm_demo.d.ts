/* tslint:disable */
/* eslint-disable */

/**
 * Equilibrium above `u₀`, polished from the end of an implicit pre-run.
 */
export class Equilibrium {
    free(): void;
    [Symbol.dispose](): void;
    multiplier(): Float64Array;
    constructor(preset: string, n: number, kappa: number, t_pre: number);
    obstacle(): Float64Array;
    /**
     * Largest complementarity residual.
     */
    residual(): number;
    state(): Float64Array;
    x(): Float64Array;
}

/**
 * Ground state of `−Δ + 3u₀²`, with `σ = λ − κ`.
 */
export class GroundState {
    free(): void;
    [Symbol.dispose](): void;
    field(): Float64Array;
    lambda(): number;
    constructor(preset: string, n: number, kappa: number);
    sigma(): number;
    x(): Float64Array;
}

/**
 * Stored frames and scalar series of one run.
 */
export class Simulation {
    free(): void;
    [Symbol.dispose](): void;
    energy(): Float64Array;
    eta_l2(): Float64Array;
    frame(k: number): Float64Array;
    frame_count(): number;
    frame_time(k: number): number;
    /**
     * `scheme` is `explicit`, `implicit` or `yosida`; explicit-type schemes
     * use the largest stable step when `dt` exceeds it.
     */
    constructor(preset: string, n: number, kappa: number, scheme: string, dt: number, t_end: number, frames: number);
    times(): Float64Array;
    x(): Float64Array;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_equilibrium_free: (a: number, b: number) => void;
    readonly __wbg_groundstate_free: (a: number, b: number) => void;
    readonly __wbg_simulation_free: (a: number, b: number) => void;
    readonly equilibrium_multiplier: (a: number) => [number, number];
    readonly equilibrium_new: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly equilibrium_obstacle: (a: number) => [number, number];
    readonly equilibrium_residual: (a: number) => number;
    readonly equilibrium_state: (a: number) => [number, number];
    readonly equilibrium_x: (a: number) => [number, number];
    readonly groundstate_field: (a: number) => [number, number];
    readonly groundstate_lambda: (a: number) => number;
    readonly groundstate_new: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly groundstate_sigma: (a: number) => number;
    readonly groundstate_x: (a: number) => [number, number];
    readonly simulation_energy: (a: number) => [number, number];
    readonly simulation_eta_l2: (a: number) => [number, number];
    readonly simulation_frame: (a: number, b: number) => [number, number];
    readonly simulation_frame_count: (a: number) => number;
    readonly simulation_frame_time: (a: number, b: number) => number;
    readonly simulation_new: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number];
    readonly simulation_times: (a: number) => [number, number];
    readonly simulation_x: (a: number) => [number, number];
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
