// Method forms are generated purely from ABI metadata: one input control
// per ABI input, and the action button derived from mutability (view
// methods get a Call button only). Validation runs client-side before a
// request is issued; values are converted to the wire form the server
// expects (integers as decimal strings, byte data as 0x-hex).

import type { ContractDetails, MethodInfo } from './types.js';

export type ActionKind = 'invoke' | 'call';

export interface FieldModel {
  name: string;
  type: string;
  label: string;
  placeholder: string;
}

export interface MethodFormModel {
  method: string;
  signature: string;
  mutability: string;
  action: ActionKind;
  supported: boolean;
  notice: string | null;
  inputs: FieldModel[];
  outputs: string[];
}

const SUPPORTED_SCALAR = /^(uint\d+|int\d+|address|bool|bytes\d+|bytes|string)$/;

export function isSupportedType(type: string): boolean {
  let base = type;
  let arrayDepth = 0;
  while (base.endsWith(']')) {
    const open = base.lastIndexOf('[');
    if (open < 0) return false;
    arrayDepth += 1;
    base = base.slice(0, open);
  }
  return arrayDepth <= 2 && SUPPORTED_SCALAR.test(base);
}

function placeholderFor(type: string): string {
  if (type.endsWith(']')) return 'JSON array, e.g. ["1","2"]';
  if (type.startsWith('uint') || type.startsWith('int')) return 'decimal integer';
  if (type === 'address') return '0x + 40 hex chars';
  if (type === 'bool') return 'true or false';
  if (type === 'bytes') return '0x-prefixed hex';
  if (type.startsWith('bytes')) return `0x + ${2 * Number(type.slice(5))} hex chars`;
  return 'text';
}

export function buildMethodForms(details: ContractDetails): MethodFormModel[] {
  return details.methods.map((method: MethodInfo) => {
    const unsupported = method.inputs.filter(
      (input) => !isSupportedType(input.type),
    );
    return {
      method: method.name,
      signature: method.signature,
      mutability: method.mutability,
      action: method.mutability === 'view' ? 'call' : 'invoke',
      supported: unsupported.length === 0,
      notice:
        unsupported.length === 0
          ? null
          : `unsupported input type ${unsupported[0].type}`,
      inputs: method.inputs.map((input, index) => ({
        name: input.name || `arg${index}`,
        type: input.type,
        label: `${input.name || `arg${index}`} (${input.type})`,
        placeholder: placeholderFor(input.type),
      })),
      outputs: [...method.outputs],
    };
  });
}

// -- validation ---------------------------------------------------------

const DECIMAL_RE = /^-?\d+$/;
const HEX_RE = /^0x[0-9a-fA-F]*$/;

function intBounds(type: string): { min: bigint; max: bigint } {
  const signed = type.startsWith('int');
  const bits = BigInt(type.slice(signed ? 3 : 4) || '256');
  if (signed) {
    const half = 1n << (bits - 1n);
    return { min: -half, max: half - 1n };
  }
  return { min: 0n, max: (1n << bits) - 1n };
}

/** Returns an error message, or null when the raw text is a valid value. */
export function validateValue(type: string, raw: string): string | null {
  if (type.endsWith(']')) {
    const open = type.lastIndexOf('[');
    const elemType = type.slice(0, open);
    const count = type.slice(open + 1, -1);
    let parsed: unknown;
    try {
      parsed = JSON.parse(raw);
    } catch {
      return 'must be a JSON array';
    }
    if (!Array.isArray(parsed)) return 'must be a JSON array';
    if (count !== '' && parsed.length !== Number(count)) {
      return `must have exactly ${count} elements`;
    }
    for (const element of parsed) {
      const rendered =
        typeof element === 'string' ? element : JSON.stringify(element);
      const problem = validateValue(elemType, rendered);
      if (problem) return `element: ${problem}`;
    }
    return null;
  }
  if (type.startsWith('uint') || type.startsWith('int')) {
    if (!DECIMAL_RE.test(raw.trim())) return 'must be a decimal integer';
    const value = BigInt(raw.trim());
    const { min, max } = intBounds(type);
    if (value < min || value > max) return `out of range for ${type}`;
    return null;
  }
  switch (type) {
    case 'address':
      return /^0x[0-9a-fA-F]{40}$/.test(raw.trim())
        ? null
        : 'must be 0x followed by exactly 40 hex characters';
    case 'bool':
      return raw === 'true' || raw === 'false'
        ? null
        : 'must be true or false';
    case 'bytes':
      return HEX_RE.test(raw.trim()) && raw.trim().length % 2 === 0
        ? null
        : 'must be 0x-prefixed hex of even length';
    case 'string':
      return null;
    default:
      break;
  }
  if (/^bytes\d+$/.test(type)) {
    const size = Number(type.slice(5));
    return new RegExp(`^0x[0-9a-fA-F]{${2 * size}}$`).test(raw.trim())
      ? null
      : `must be 0x followed by exactly ${2 * size} hex characters`;
  }
  return `unsupported type ${type}`;
}

/** Converts validated raw text into the JSON wire value. */
export function toWireValue(type: string, raw: string): unknown {
  if (type.endsWith(']')) {
    const open = type.lastIndexOf('[');
    const elemType = type.slice(0, open);
    const parsed = JSON.parse(raw) as unknown[];
    return parsed.map((element) =>
      toWireValue(
        elemType,
        typeof element === 'string' ? element : JSON.stringify(element),
      ),
    );
  }
  if (type.startsWith('uint') || type.startsWith('int')) {
    return raw.trim(); // decimal string, arbitrary precision preserved
  }
  if (type === 'bool') return raw === 'true';
  if (type === 'string') return raw;
  return raw.trim(); // address / bytes / bytesN stay 0x-hex strings
}

/** Format a typed output value for display without numeric coercion. */
export function formatOutput(type: string, value: unknown): string {
  if (Array.isArray(value)) {
    const open = type.lastIndexOf('[');
    const elemType = open >= 0 ? type.slice(0, open) : type;
    return `[${value.map((v) => formatOutput(elemType, v)).join(', ')}]`;
  }
  return String(value);
}
