/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_equilibrium_free: (a: number, b: number) => void;
export const __wbg_groundstate_free: (a: number, b: number) => void;
export const __wbg_simulation_free: (a: number, b: number) => void;
export const equilibrium_multiplier: (a: number) => [number, number];
export const equilibrium_new: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const equilibrium_obstacle: (a: number) => [number, number];
export const equilibrium_residual: (a: number) => number;
export const equilibrium_state: (a: number) => [number, number];
export const equilibrium_x: (a: number) => [number, number];
export const groundstate_field: (a: number) => [number, number];
export const groundstate_lambda: (a: number) => number;
export const groundstate_new: (a: number, b: number, c: number, d: number) => [number, number, number];
export const groundstate_sigma: (a: number) => number;
export const groundstate_x: (a: number) => [number, number];
export const simulation_energy: (a: number) => [number, number];
export const simulation_eta_l2: (a: number) => [number, number];
export const simulation_frame: (a: number, b: number) => [number, number];
export const simulation_frame_count: (a: number) => number;
export const simulation_frame_time: (a: number, b: number) => number;
export const simulation_new: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number];
export const simulation_times: (a: number) => [number, number];
export const simulation_x: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
