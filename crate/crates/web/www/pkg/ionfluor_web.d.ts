/* tslint:disable */
/* eslint-disable */

/**
 * Laser and field settings shown on the page, in lab units.
 */
export class Lasers {
    free(): void;
    [Symbol.dispose](): void;
    constructor();
    b_gauss: number;
    cooling_detuning_mhz: number;
    /**
     * mW/cm².
     */
    cooling_intensity: number;
    repump_detuning_mhz: number;
    repump_intensity: number;
}

export function coolingCurve(lasers: Lasers, start_mhz: number, stop_mhz: number, points: number): Float64Array;

export function repumpScan(lasers: Lasers, start_mhz: number, stop_mhz: number, points: number): Float64Array;

export function sidebandTrace(order: number, m_micro: number, snr_unit_db: number, seed: bigint): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_get_lasers_b_gauss: (a: number) => number;
    readonly __wbg_get_lasers_cooling_detuning_mhz: (a: number) => number;
    readonly __wbg_get_lasers_cooling_intensity: (a: number) => number;
    readonly __wbg_get_lasers_repump_detuning_mhz: (a: number) => number;
    readonly __wbg_get_lasers_repump_intensity: (a: number) => number;
    readonly __wbg_lasers_free: (a: number, b: number) => void;
    readonly __wbg_set_lasers_b_gauss: (a: number, b: number) => void;
    readonly __wbg_set_lasers_cooling_detuning_mhz: (a: number, b: number) => void;
    readonly __wbg_set_lasers_cooling_intensity: (a: number, b: number) => void;
    readonly __wbg_set_lasers_repump_detuning_mhz: (a: number, b: number) => void;
    readonly __wbg_set_lasers_repump_intensity: (a: number, b: number) => void;
    readonly coolingCurve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly lasers_new: () => number;
    readonly repumpScan: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly sidebandTrace: (a: number, b: number, c: number, d: bigint) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
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
