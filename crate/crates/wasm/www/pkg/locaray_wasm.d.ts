/* tslint:disable */
/* eslint-disable */

/**
 * Searches for a small locating array. Returns JSON.
 */
export function generate(model: string, strength: number, seed: bigint, strategy: string, timeout_s: number): string;

/**
 * Finds the interactions whose covering rows equal `failing`, a list of
 * 1-based row numbers. Returns JSON.
 */
export function locate(text: string, failing: string, strength: number): string;

/**
 * Checks an array in the text file format. A strength of 0 means the one
 * recorded in the text. Returns JSON.
 */
export function verifyArray(text: string, strength: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly generate: (a: number, b: number, c: number, d: bigint, e: number, f: number, g: number) => [number, number, number, number];
    readonly locate: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly verifyArray: (a: number, b: number, c: number) => [number, number, number, number];
    readonly __externref_table_alloc: () => number;
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
