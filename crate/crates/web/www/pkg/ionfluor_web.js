/* @ts-self-types="./ionfluor_web.d.ts" */

/**
 * Laser and field settings shown on the page, in lab units.
 */
export class Lasers {
    __destroy_into_raw() {
        const ptr = this.__wbg_ptr;
        this.__wbg_ptr = 0;
        LasersFinalization.unregister(this);
        return ptr;
    }
    free() {
        const ptr = this.__destroy_into_raw();
        wasm.__wbg_lasers_free(ptr, 0);
    }
    /**
     * @returns {number}
     */
    get b_gauss() {
        const ret = wasm.__wbg_get_lasers_b_gauss(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get cooling_detuning_mhz() {
        const ret = wasm.__wbg_get_lasers_cooling_detuning_mhz(this.__wbg_ptr);
        return ret;
    }
    /**
     * mW/cm².
     * @returns {number}
     */
    get cooling_intensity() {
        const ret = wasm.__wbg_get_lasers_cooling_intensity(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get repump_detuning_mhz() {
        const ret = wasm.__wbg_get_lasers_repump_detuning_mhz(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get repump_intensity() {
        const ret = wasm.__wbg_get_lasers_repump_intensity(this.__wbg_ptr);
        return ret;
    }
    constructor() {
        const ret = wasm.lasers_new();
        this.__wbg_ptr = ret;
        LasersFinalization.register(this, this.__wbg_ptr, this);
        return this;
    }
    /**
     * @param {number} arg0
     */
    set b_gauss(arg0) {
        wasm.__wbg_set_lasers_b_gauss(this.__wbg_ptr, arg0);
    }
    /**
     * @param {number} arg0
     */
    set cooling_detuning_mhz(arg0) {
        wasm.__wbg_set_lasers_cooling_detuning_mhz(this.__wbg_ptr, arg0);
    }
    /**
     * mW/cm².
     * @param {number} arg0
     */
    set cooling_intensity(arg0) {
        wasm.__wbg_set_lasers_cooling_intensity(this.__wbg_ptr, arg0);
    }
    /**
     * @param {number} arg0
     */
    set repump_detuning_mhz(arg0) {
        wasm.__wbg_set_lasers_repump_detuning_mhz(this.__wbg_ptr, arg0);
    }
    /**
     * @param {number} arg0
     */
    set repump_intensity(arg0) {
        wasm.__wbg_set_lasers_repump_intensity(this.__wbg_ptr, arg0);
    }
}
if (Symbol.dispose) Lasers.prototype[Symbol.dispose] = Lasers.prototype.free;

/**
 * @param {Lasers} lasers
 * @param {number} start_mhz
 * @param {number} stop_mhz
 * @param {number} points
 * @returns {Float64Array}
 */
export function coolingCurve(lasers, start_mhz, stop_mhz, points) {
    _assertClass(lasers, Lasers);
    const ret = wasm.coolingCurve(lasers.__wbg_ptr, start_mhz, stop_mhz, points);
    if (ret[3]) {
        throw takeFromExternrefTable0(ret[2]);
    }
    var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
    wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
    return v1;
}

/**
 * @param {Lasers} lasers
 * @param {number} start_mhz
 * @param {number} stop_mhz
 * @param {number} points
 * @returns {Float64Array}
 */
export function repumpScan(lasers, start_mhz, stop_mhz, points) {
    _assertClass(lasers, Lasers);
    const ret = wasm.repumpScan(lasers.__wbg_ptr, start_mhz, stop_mhz, points);
    if (ret[3]) {
        throw takeFromExternrefTable0(ret[2]);
    }
    var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
    wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
    return v1;
}

/**
 * @param {number} order
 * @param {number} m_micro
 * @param {number} snr_unit_db
 * @param {bigint} seed
 * @returns {Float64Array}
 */
export function sidebandTrace(order, m_micro, snr_unit_db, seed) {
    const ret = wasm.sidebandTrace(order, m_micro, snr_unit_db, seed);
    if (ret[3]) {
        throw takeFromExternrefTable0(ret[2]);
    }
    var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
    wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
    return v1;
}
function __wbg_get_imports() {
    const import0 = {
        __proto__: null,
        __wbg_Error_92b29b0548f8b746: function(arg0, arg1) {
            const ret = Error(getStringFromWasm0(arg0, arg1));
            return ret;
        },
        __wbg___wbindgen_throw_344f42d3211c4765: function(arg0, arg1) {
            throw new Error(getStringFromWasm0(arg0, arg1));
        },
        __wbindgen_init_externref_table: function() {
            const table = wasm.__wbindgen_externrefs;
            const offset = table.grow(4);
            table.set(0, undefined);
            table.set(offset + 0, undefined);
            table.set(offset + 1, null);
            table.set(offset + 2, true);
            table.set(offset + 3, false);
        },
    };
    return {
        __proto__: null,
        "./ionfluor_web_bg.js": import0,
    };
}

const LasersFinalization = (typeof FinalizationRegistry === 'undefined')
    ? { register: () => {}, unregister: () => {} }
    : new FinalizationRegistry(ptr => wasm.__wbg_lasers_free(ptr, 1));

function _assertClass(instance, klass) {
    if (!(instance instanceof klass)) {
        throw new Error(`expected instance of ${klass.name}`);
    }
}

function getArrayF64FromWasm0(ptr, len) {
    ptr = ptr >>> 0;
    return getFloat64ArrayMemory0().subarray(ptr / 8, ptr / 8 + len);
}

let cachedFloat64ArrayMemory0 = null;
function getFloat64ArrayMemory0() {
    if (cachedFloat64ArrayMemory0 === null || cachedFloat64ArrayMemory0.byteLength === 0) {
        cachedFloat64ArrayMemory0 = new Float64Array(wasm.memory.buffer);
    }
    return cachedFloat64ArrayMemory0;
}

function getStringFromWasm0(ptr, len) {
    return decodeText(ptr >>> 0, len);
}

let cachedUint8ArrayMemory0 = null;
function getUint8ArrayMemory0() {
    if (cachedUint8ArrayMemory0 === null || cachedUint8ArrayMemory0.byteLength === 0) {
        cachedUint8ArrayMemory0 = new Uint8Array(wasm.memory.buffer);
    }
    return cachedUint8ArrayMemory0;
}

function takeFromExternrefTable0(idx) {
    const value = wasm.__wbindgen_externrefs.get(idx);
    wasm.__externref_table_dealloc(idx);
    return value;
}

let cachedTextDecoder = new TextDecoder('utf-8', { ignoreBOM: true, fatal: true });
cachedTextDecoder.decode();
const MAX_SAFARI_DECODE_BYTES = 2146435072;
let numBytesDecoded = 0;
function decodeText(ptr, len) {
    numBytesDecoded += len;
    if (numBytesDecoded >= MAX_SAFARI_DECODE_BYTES) {
        cachedTextDecoder = new TextDecoder('utf-8', { ignoreBOM: true, fatal: true });
        cachedTextDecoder.decode();
        numBytesDecoded = len;
    }
    return cachedTextDecoder.decode(getUint8ArrayMemory0().subarray(ptr, ptr + len));
}

let wasmModule, wasmInstance, wasm;
function __wbg_finalize_init(instance, module) {
    wasmInstance = instance;
    wasm = instance.exports;
    wasmModule = module;
    cachedFloat64ArrayMemory0 = null;
    cachedUint8ArrayMemory0 = null;
    wasm.__wbindgen_start();
    return wasm;
}

async function __wbg_load(module, imports) {
    if (typeof Response === 'function' && module instanceof Response) {
        if (typeof WebAssembly.instantiateStreaming === 'function') {
            try {
                return await WebAssembly.instantiateStreaming(module, imports);
            } catch (e) {
                const validResponse = module.ok && expectedResponseType(module.type);

                if (validResponse && module.headers.get('Content-Type') !== 'application/wasm') {
                    console.warn("`WebAssembly.instantiateStreaming` failed because your server does not serve Wasm with `application/wasm` MIME type. Falling back to `WebAssembly.instantiate` which is slower. Original error:\n", e);

                } else { throw e; }
            }
        }

        const bytes = await module.arrayBuffer();
        return await WebAssembly.instantiate(bytes, imports);
    } else {
        const instance = await WebAssembly.instantiate(module, imports);

        if (instance instanceof WebAssembly.Instance) {
            return { instance, module };
        } else {
            return instance;
        }
    }

    function expectedResponseType(type) {
        switch (type) {
            case 'basic': case 'cors': case 'default': return true;
        }
        return false;
    }
}

function initSync(module) {
    if (wasm !== undefined) return wasm;


    if (module !== undefined) {
        if (Object.getPrototypeOf(module) === Object.prototype) {
            ({module} = module)
        } else {
            console.warn('using deprecated parameters for `initSync()`; pass a single object instead')
        }
    }

    const imports = __wbg_get_imports();
    if (!(module instanceof WebAssembly.Module)) {
        module = new WebAssembly.Module(module);
    }
    const instance = new WebAssembly.Instance(module, imports);
    return __wbg_finalize_init(instance, module);
}

async function __wbg_init(module_or_path) {
    if (wasm !== undefined) return wasm;


    if (module_or_path !== undefined) {
        if (Object.getPrototypeOf(module_or_path) === Object.prototype) {
            ({module_or_path} = module_or_path)
        } else {
            console.warn('using deprecated parameters for the initialization function; pass a single object instead')
        }
    }

    if (module_or_path === undefined) {
        module_or_path = new URL('ionfluor_web_bg.wasm', import.meta.url);
    }
    const imports = __wbg_get_imports();

    if (typeof module_or_path === 'string' || (typeof Request === 'function' && module_or_path instanceof Request) || (typeof URL === 'function' && module_or_path instanceof URL)) {
        module_or_path = fetch(module_or_path);
    }

    const { instance, module } = await __wbg_load(await module_or_path, imports);

    return __wbg_finalize_init(instance, module);
}

export { initSync, __wbg_init as default };
