/* tslint:disable */
/* eslint-disable */

/**
 * Positive anchors per scale for one epoch over a synthetic dataset,
 * baseline crop range against the enlarged one.
 */
export function anchor_stats_demo(images: number, seed: bigint): string;

export function baseline_names(): string;

/**
 * Samples a surrogate-scored population and bootstraps the range of one
 * component. Stage components come from the backbone-only search,
 * backbone/neck/head from whole-detector sampling.
 */
export function bootstrap_demo(component: string, count: number, seed: bigint, noise_sigma: number): string;

/**
 * `arch` is a baseline name or architecture JSON; `input` is `"WxH"`.
 */
export function flops_report(arch: string, input: string): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly anchor_stats_demo: (a: number, b: bigint) => [number, number, number, number];
    readonly baseline_names: () => [number, number];
    readonly bootstrap_demo: (a: number, b: number, c: number, d: bigint, e: number) => [number, number, number, number];
    readonly flops_report: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
