/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_get_lasers_b_gauss: (a: number) => number;
export const __wbg_get_lasers_cooling_detuning_mhz: (a: number) => number;
export const __wbg_get_lasers_cooling_intensity: (a: number) => number;
export const __wbg_get_lasers_repump_detuning_mhz: (a: number) => number;
export const __wbg_get_lasers_repump_intensity: (a: number) => number;
export const __wbg_lasers_free: (a: number, b: number) => void;
export const __wbg_set_lasers_b_gauss: (a: number, b: number) => void;
export const __wbg_set_lasers_cooling_detuning_mhz: (a: number, b: number) => void;
export const __wbg_set_lasers_cooling_intensity: (a: number, b: number) => void;
export const __wbg_set_lasers_repump_detuning_mhz: (a: number, b: number) => void;
export const __wbg_set_lasers_repump_intensity: (a: number, b: number) => void;
export const coolingCurve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const lasers_new: () => number;
export const repumpScan: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const sidebandTrace: (a: number, b: number, c: number, d: bigint) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
