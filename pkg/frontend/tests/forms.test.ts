import { describe, expect, it } from 'vitest';

import {
  buildMethodForms,
  formatOutput,
  isSupportedType,
  toWireValue,
  validateValue,
} from '../src/forms.js';
import type { ContractDetails } from '../src/types.js';

// three methods: one view (call-only) and two nonpayable (invoke)
const DEMO_DETAILS: ContractDetails = {
  name: 'storage',
  active_version: 1,
  methods: [
    {
      name: 'get', signature: 'get()', selector: '0x6d4ce63c',
      inputs: [], outputs: ['uint256'], mutability: 'view',
    },
    {
      name: 'set', signature: 'set(uint256)', selector: '0x60fe47b1',
      inputs: [{ name: 'x', type: 'uint256' }], outputs: [],
      mutability: 'nonpayable',
    },
    {
      name: 'transferTo', signature: 'transferTo(address)', selector: '0x00000000',
      inputs: [{ name: 'dest', type: 'address' }], outputs: [],
      mutability: 'nonpayable',
    },
  ],
  versions: [],
  accounts: ['0x' + '11'.repeat(20)],
};

describe('buildMethodForms', () => {
  it('derives one call-only form and two invoke forms from the demo ABI', () => {
    const forms = buildMethodForms(DEMO_DETAILS);
    expect(forms).toHaveLength(3);
    expect(forms.filter((f) => f.action === 'call')).toHaveLength(1);
    expect(forms.filter((f) => f.action === 'invoke')).toHaveLength(2);
    expect(forms[0].method).toBe('get');
    expect(forms[0].action).toBe('call');
  });

  it('creates one input control per ABI input', () => {
    const forms = buildMethodForms(DEMO_DETAILS);
    expect(forms[0].inputs).toHaveLength(0);
    expect(forms[1].inputs).toHaveLength(1);
    expect(forms[1].inputs[0].label).toBe('x (uint256)');
  });

  it('marks forms with unsupported input types disabled with a notice', () => {
    const withTuple: ContractDetails = {
      ...DEMO_DETAILS,
      methods: [{
        name: 'odd', signature: 'odd(tuple)', selector: '0x00000001',
        inputs: [{ name: 't', type: 'tuple' }], outputs: [],
        mutability: 'nonpayable',
      }],
    };
    const [form] = buildMethodForms(withTuple);
    expect(form.supported).toBe(false);
    expect(form.notice).toContain('tuple');
  });
});

describe('validateValue (client-side, before any request)', () => {
  it('rejects a 19-byte address and accepts a 20-byte one', () => {
    expect(validateValue('address', '0x' + 'ab'.repeat(19))).toMatch(/40 hex/);
    expect(validateValue('address', '0x' + 'ab'.repeat(20))).toBeNull();
  });

  it('checks integer ranges with bigint precision', () => {
    expect(validateValue('uint8', '255')).toBeNull();
    expect(validateValue('uint8', '256')).toMatch(/out of range/);
    expect(validateValue('uint8', '-1')).toMatch(/out of range/);
    expect(validateValue('int8', '-128')).toBeNull();
    expect(validateValue('uint256', '2'.repeat(78))).toMatch(/out of range/);
    expect(validateValue('uint256', (2n ** 255n).toString())).toBeNull();
  });

  it('rejects non-decimal integers', () => {
    expect(validateValue('uint256', '0x10')).toMatch(/decimal/);
    expect(validateValue('uint256', '1.5')).toMatch(/decimal/);
  });

  it('validates fixed and dynamic byte strings', () => {
    expect(validateValue('bytes3', '0xaabbcc')).toBeNull();
    expect(validateValue('bytes3', '0xaabb')).toMatch(/6 hex/);
    expect(validateValue('bytes', '0xdeadbeef')).toBeNull();
    expect(validateValue('bytes', '0xdeadbee')).toMatch(/even length/);
  });

  it('validates booleans and arrays', () => {
    expect(validateValue('bool', 'true')).toBeNull();
    expect(validateValue('bool', 'yes')).toMatch(/true or false/);
    expect(validateValue('uint8[]', '["1","2"]')).toBeNull();
    expect(validateValue('uint8[]', '["1","999"]')).toMatch(/out of range/);
    expect(validateValue('uint8[2]', '["1"]')).toMatch(/exactly 2/);
    expect(validateValue('uint8[]', 'not json')).toMatch(/JSON array/);
  });
});

describe('toWireValue', () => {
  it('keeps integers as decimal strings (no Number coercion)', () => {
    const big = (2n ** 200n).toString();
    expect(toWireValue('uint256', big)).toBe(big);
  });

  it('converts booleans and arrays', () => {
    expect(toWireValue('bool', 'true')).toBe(true);
    expect(toWireValue('uint8[]', '["1","2"]')).toEqual(['1', '2']);
  });
});

describe('formatOutput', () => {
  it('renders values and nested arrays without precision loss', () => {
    const big = (2n ** 200n + 1n).toString();
    expect(formatOutput('uint256', big)).toBe(big);
    expect(formatOutput('uint8[]', ['1', '2'])).toBe('[1, 2]');
  });
});

describe('isSupportedType', () => {
  it('accepts the documented scope and rejects the rest', () => {
    for (const good of ['uint256', 'address', 'bytes32', 'string',
                        'uint8[]', 'bool[2][]']) {
      expect(isSupportedType(good), good).toBe(true);
    }
    for (const bad of ['tuple', 'fixed128x18', 'uint8[][][]']) {
      expect(isSupportedType(bad), bad).toBe(false);
    }
  });
});
