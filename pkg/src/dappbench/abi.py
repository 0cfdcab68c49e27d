"""Contract-ABI parsing and call-data encoding/decoding.

Supports the value types commonly seen in application contracts: sized
integers, address, bool, fixed-size byte strings, dynamic bytes/strings,
and arrays up to two levels deep. Tuples, fixed-point numbers, and deeper
array nesting are rejected at parse time so the strict decoder stays sound.

Argument values travel through the REST layer as JSON; integers are
carried as decimal strings so clients never lose precision past 2**53.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from .codec import from_hex, keccak256, to_hex

WORD = 32
MAX_ARRAY_DEPTH = 2


class AbiError(ValueError):
    """Base class for ABI failures."""


class MalformedJson(AbiError):
    pass


class UnsupportedType(AbiError):
    pass


class DuplicateSignature(AbiError):
    pass


class TypeMismatch(AbiError):
    pass


class ValueOutOfRange(AbiError):
    pass


class EmptyBytecode(AbiError):
    pass


class AbiDecodeError(AbiError):
    """Base class for strict-decoder rejections."""


class DataTooShort(AbiDecodeError):
    pass


class OffsetOutOfBounds(AbiDecodeError):
    pass


class BoolNotCanonical(AbiDecodeError):
    pass


class PaddingNotZero(AbiDecodeError):
    pass


@dataclass(frozen=True)
class AbiParamType:
    """A parameter type: uint/int/address/bool/bytesN/bytes/string/array."""

    kind: str
    bits: int = 0                # uint / int
    size: int = 0                # fixed bytes length
    elem: Optional["AbiParamType"] = None   # arrays
    length: Optional[int] = None            # fixed array length, None = dynamic

    @property
    def canonical(self) -> str:
        if self.kind in ("uint", "int"):
            return f"{self.kind}{self.bits}"
        if self.kind == "fixed_bytes":
            return f"bytes{self.size}"
        if self.kind == "array":
            suffix = "[]" if self.length is None else f"[{self.length}]"
            return self.elem.canonical + suffix
        return self.kind  # address, bool, bytes, string

    @property
    def is_dynamic(self) -> bool:
        if self.kind in ("bytes", "string"):
            return True
        if self.kind == "array":
            return self.length is None or self.elem.is_dynamic
        return False

    def head_size(self) -> int:
        """Bytes this type occupies in the head section."""
        if self.is_dynamic:
            return WORD
        if self.kind == "array":
            return self.length * self.elem.head_size()
        return WORD


def parse_type(name: str, _depth: int = 0) -> AbiParamType:
    """Parse a solidity type name like ``uint256`` or ``address[3][]``."""
    name = name.strip()
    if name.endswith("]"):
        open_idx = name.rindex("[")
        inner, count = name[:open_idx], name[open_idx + 1:-1]
        if _depth + 1 > MAX_ARRAY_DEPTH:
            raise UnsupportedType(f"array nesting beyond depth {MAX_ARRAY_DEPTH}: {name}")
        elem = parse_type(inner, _depth + 1)
        if count == "":
            return AbiParamType("array", elem=elem, length=None)
        if not count.isdigit() or int(count) == 0:
            raise UnsupportedType(f"bad array length in {name!r}")
        return AbiParamType("array", elem=elem, length=int(count))

    if name in ("address", "bool", "bytes", "string"):
        return AbiParamType(name)
    if name in ("uint", "int"):  # legacy aliases
        return AbiParamType(name, bits=256)
    for prefix in ("uint", "int"):
        if name.startswith(prefix) and name[len(prefix):].isdigit():
            bits = int(name[len(prefix):])
            if bits % 8 != 0 or not 8 <= bits <= 256:
                raise UnsupportedType(f"bad integer width: {name}")
            return AbiParamType(prefix, bits=bits)
    if name == "byte":
        return AbiParamType("fixed_bytes", size=1)
    if name.startswith("bytes") and name[5:].isdigit():
        size = int(name[5:])
        if not 1 <= size <= 32:
            raise UnsupportedType(f"bad fixed-bytes length: {name}")
        return AbiParamType("fixed_bytes", size=size)
    raise UnsupportedType(f"unsupported ABI type: {name!r}")


@dataclass(frozen=True)
class AbiFunction:
    name: str
    inputs: tuple = ()    # tuple of (name, AbiParamType)
    outputs: tuple = ()   # tuple of AbiParamType
    mutability: str = "nonpayable"  # view | nonpayable | payable

    @property
    def signature(self) -> str:
        return f"{self.name}({','.join(t.canonical for _, t in self.inputs)})"

    @property
    def selector(self) -> bytes:
        return keccak256(self.signature.encode("ascii"))[:4]

    @property
    def is_view(self) -> bool:
        return self.mutability == "view"


def canonical_signature(fn: AbiFunction) -> str:
    return fn.signature


def selector(fn: AbiFunction) -> bytes:
    return fn.selector


@dataclass
class ContractAbi:
    functions: list = field(default_factory=list)
    constructor_inputs: Optional[list] = None  # list of AbiParamType, or None

    def function(self, name: str) -> Optional[AbiFunction]:
        for fn in self.functions:
            if fn.name == name:
                return fn
        return None


def parse_abi_json(text: str) -> ContractAbi:
    """Parse a compiler-emitted ABI JSON array.

    Function and constructor entries are extracted; events, fallback, and
    receive entries are skipped. Unsupported parameter types (tuples,
    fixed-point, deep arrays) raise UnsupportedType.
    """
    try:
        entries = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedJson(f"ABI is not valid JSON: {exc}") from exc
    if not isinstance(entries, list):
        raise MalformedJson("ABI must be a JSON array")

    abi = ContractAbi()
    seen = set()
    for entry in entries:
        if not isinstance(entry, dict):
            raise MalformedJson("ABI entries must be objects")
        kind = entry.get("type", "function")
        if kind in ("event", "fallback", "receive", "error"):
            continue
        if kind == "constructor":
            if abi.constructor_inputs is not None:
                raise MalformedJson("ABI declares more than one constructor")
            abi.constructor_inputs = [
                parse_type(_param_type(p)) for p in entry.get("inputs", [])
            ]
            continue
        if kind != "function":
            raise UnsupportedType(f"unsupported ABI entry type: {kind!r}")

        name = entry.get("name", "")
        if not name:
            raise MalformedJson("function entry without a name")
        inputs = tuple(
            (p.get("name", ""), parse_type(_param_type(p)))
            for p in entry.get("inputs", [])
        )
        outputs = tuple(parse_type(_param_type(p)) for p in entry.get("outputs", []))
        fn = AbiFunction(name, inputs, outputs, _mutability(entry))
        if fn.signature in seen:
            raise DuplicateSignature(f"duplicate function signature {fn.signature!r}")
        seen.add(fn.signature)
        abi.functions.append(fn)
    return abi


def _param_type(param: dict) -> str:
    typ = param.get("type")
    if not isinstance(typ, str):
        raise MalformedJson("parameter without a type")
    if typ.startswith("tuple"):
        raise UnsupportedType("tuple parameters are not supported")
    if typ.startswith(("fixed", "ufixed")):
        raise UnsupportedType("fixed-point parameters are not supported")
    return typ


def _mutability(entry: dict) -> str:
    mut = entry.get("stateMutability")
    if mut is None:
        # legacy ABIs: "constant" flag marks read-only, "payable" flag payable
        if entry.get("constant"):
            return "view"
        if entry.get("payable"):
            return "payable"
        return "nonpayable"
    if mut == "pure":
        return "view"
    if mut not in ("view", "nonpayable", "payable"):
        raise MalformedJson(f"unknown stateMutability {mut!r}")
    return mut


# ---------------------------------------------------------------------------
# Encoding. Values are plain Python: int, bool, bytes, str, list.

def _check_value(typ: AbiParamType, value) -> None:
    kind = typ.kind
    if kind == "bool":
        if not isinstance(value, bool):
            raise TypeMismatch(f"expected bool, got {type(value).__name__}")
    elif kind in ("uint", "int"):
        if isinstance(value, bool) or not isinstance(value, int):
            raise TypeMismatch(f"expected integer for {typ.canonical}")
        if kind == "uint":
            if not 0 <= value < (1 << typ.bits):
                raise ValueOutOfRange(f"{value} out of range for {typ.canonical}")
        else:
            half = 1 << (typ.bits - 1)
            if not -half <= value < half:
                raise ValueOutOfRange(f"{value} out of range for {typ.canonical}")
    elif kind == "address":
        if not isinstance(value, bytes) or len(value) != 20:
            raise TypeMismatch("expected a 20-byte address")
    elif kind == "fixed_bytes":
        if not isinstance(value, bytes) or len(value) != typ.size:
            raise TypeMismatch(f"expected exactly {typ.size} bytes")
    elif kind == "bytes":
        if not isinstance(value, bytes):
            raise TypeMismatch("expected bytes")
    elif kind == "string":
        if not isinstance(value, str):
            raise TypeMismatch("expected str")
    elif kind == "array":
        if not isinstance(value, list):
            raise TypeMismatch("expected a list")
        if typ.length is not None and len(value) != typ.length:
            raise TypeMismatch(
                f"expected {typ.length} elements, got {len(value)}")
        for elem in value:
            _check_value(typ.elem, elem)
    else:  # pragma: no cover - parse_type never builds other kinds
        raise AbiError(f"unknown kind {kind}")


def _pad_right(data: bytes) -> bytes:
    rem = len(data) % WORD
    return data if rem == 0 else data + b"\x00" * (WORD - rem)


def _encode_tail(typ: AbiParamType, value) -> bytes:
    kind = typ.kind
    if kind == "uint":
        return value.to_bytes(WORD, "big")
    if kind == "int":
        return (value & ((1 << 256) - 1)).to_bytes(WORD, "big")
    if kind == "bool":
        return (1 if value else 0).to_bytes(WORD, "big")
    if kind == "address":
        return b"\x00" * 12 + value
    if kind == "fixed_bytes":
        return value + b"\x00" * (WORD - typ.size)
    if kind in ("bytes", "string"):
        raw = value.encode("utf-8") if kind == "string" else value
        return len(raw).to_bytes(WORD, "big") + _pad_right(raw)
    if kind == "array":
        elems = _encode_block([typ.elem] * len(value), value)
        if typ.length is None:
            return len(value).to_bytes(WORD, "big") + elems
        return elems
    raise AbiError(f"unknown kind {kind}")  # pragma: no cover


def _encode_block(types, values) -> bytes:
    heads, tails = [], []
    head_size = sum(t.head_size() for t in types)
    offset = head_size
    for typ, value in zip(types, values):
        if typ.is_dynamic:
            tail = _encode_tail(typ, value)
            heads.append(offset.to_bytes(WORD, "big"))
            tails.append(tail)
            offset += len(tail)
        else:
            heads.append(_encode_tail(typ, value))
    return b"".join(heads) + b"".join(tails)


def encode_args(types, values) -> bytes:
    """Encode a typed argument vector as a 32-byte-word head/tail block."""
    if len(types) != len(values):
        raise TypeMismatch(f"expected {len(types)} arguments, got {len(values)}")
    for typ, value in zip(types, values):
        _check_value(typ, value)
    return _encode_block(list(types), list(values))


def encode_call(fn: AbiFunction, values) -> bytes:
    """selector ++ encoded arguments."""
    return fn.selector + encode_args([t for _, t in fn.inputs], values)


def encode_constructor(bytecode: bytes, types, values) -> bytes:
    """bytecode ++ encoded constructor arguments."""
    if not bytecode:
        raise EmptyBytecode("deployment bytecode must not be empty")
    return bytecode + encode_args(types, values)


# ---------------------------------------------------------------------------
# Decoding (strict).

def decode_values(types, data: bytes) -> list:
    """Exact inverse of encode_args; rejects any non-canonical padding."""
    if len(data) % WORD != 0:
        raise DataTooShort(f"data length {len(data)} is not a multiple of 32")
    values, _ = _decode_block(list(types), data)
    return values


def _word(data: bytes, pos: int) -> bytes:
    if pos + WORD > len(data):
        raise DataTooShort(f"expected a word at offset {pos}")
    return data[pos:pos + WORD]


def _decode_block(types, data: bytes) -> tuple:
    values = []
    pos = 0
    for typ in types:
        if typ.is_dynamic:
            offset = int.from_bytes(_word(data, pos), "big")
            if offset % WORD != 0 or offset >= len(data) or offset < 0:
                raise OffsetOutOfBounds(f"tail offset {offset} outside data")
            values.append(_decode_tail(typ, data, offset))
            pos += WORD
        else:
            value, used = _decode_static(typ, data, pos)
            values.append(value)
            pos += used
    return values, pos


def _decode_static(typ: AbiParamType, data: bytes, pos: int):
    kind = typ.kind
    if kind == "array":  # static array: elements inline
        elems = []
        for _ in range(typ.length):
            value, used = _decode_static(typ.elem, data, pos)
            elems.append(value)
            pos += used
        return elems, typ.length * typ.elem.head_size()
    word = _word(data, pos)
    if kind == "uint":
        value = int.from_bytes(word, "big")
        if value >> typ.bits:
            raise PaddingNotZero(f"high bits set in {typ.canonical} word")
        return value, WORD
    if kind == "int":
        raw = int.from_bytes(word, "big")
        value = raw - (1 << 256) if raw >> 255 else raw
        half = 1 << (typ.bits - 1)
        if not -half <= value < half:
            raise PaddingNotZero(f"non-canonical sign extension in {typ.canonical}")
        return value, WORD
    if kind == "bool":
        raw = int.from_bytes(word, "big")
        if raw not in (0, 1):
            raise BoolNotCanonical(f"bool word holds {raw}")
        return bool(raw), WORD
    if kind == "address":
        if word[:12] != b"\x00" * 12:
            raise PaddingNotZero("address word has nonzero left padding")
        return word[12:], WORD
    if kind == "fixed_bytes":
        if word[typ.size:] != b"\x00" * (WORD - typ.size):
            raise PaddingNotZero(f"bytes{typ.size} word has nonzero right padding")
        return word[:typ.size], WORD
    raise AbiError(f"not a static kind: {kind}")  # pragma: no cover


def _decode_tail(typ: AbiParamType, data: bytes, offset: int):
    kind = typ.kind
    if kind in ("bytes", "string"):
        length = int.from_bytes(_word(data, offset), "big")
        start = offset + WORD
        if start + length > len(data):
            raise DataTooShort("byte payload extends past end of data")
        payload = data[start:start + length]
        padded_end = start + (length + WORD - 1) // WORD * WORD
        if padded_end > len(data):
            raise DataTooShort("payload padding extends past end of data")
        if data[start + length:padded_end].strip(b"\x00"):
            raise PaddingNotZero("payload padding contains nonzero bytes")
        if kind == "string":
            try:
                return payload.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise AbiDecodeError(f"string payload is not UTF-8: {exc}") from exc
        return payload
    if kind == "array":
        if typ.length is None:
            length = int.from_bytes(_word(data, offset), "big")
            region = data[offset + WORD:]
        else:
            length = typ.length
            region = data[offset:]
        # each element occupies at least one head word; bail before allocating
        if length * WORD > len(region):
            raise DataTooShort(f"array claims {length} elements")
        values, _ = _decode_block([typ.elem] * length, region)
        return values
    raise AbiError(f"not a dynamic kind: {kind}")  # pragma: no cover


# ---------------------------------------------------------------------------
# JSON value surface: integers as decimal strings, byte strings as 0x-hex.

def zero_value(typ: AbiParamType):
    """The all-zero value of a type (what an unstubbed mock call returns)."""
    kind = typ.kind
    if kind in ("uint", "int"):
        return 0
    if kind == "bool":
        return False
    if kind == "address":
        return b"\x00" * 20
    if kind == "fixed_bytes":
        return b"\x00" * typ.size
    if kind == "bytes":
        return b""
    if kind == "string":
        return ""
    if kind == "array":
        if typ.length is None:
            return []
        return [zero_value(typ.elem) for _ in range(typ.length)]
    raise AbiError(f"unknown kind {kind}")  # pragma: no cover


def value_from_json(typ: AbiParamType, raw):
    """Convert a JSON-decoded request value into a typed ABI value."""
    kind = typ.kind
    if kind in ("uint", "int"):
        if isinstance(raw, bool):
            raise TypeMismatch(f"expected integer for {typ.canonical}")
        if isinstance(raw, int):
            return raw
        if isinstance(raw, str):
            try:
                return int(raw, 10)
            except ValueError as exc:
                raise TypeMismatch(
                    f"{raw!r} is not a decimal integer for {typ.canonical}") from exc
        raise TypeMismatch(f"expected integer for {typ.canonical}")
    if kind == "bool":
        if not isinstance(raw, bool):
            raise TypeMismatch("expected a JSON boolean")
        return raw
    if kind in ("address", "fixed_bytes", "bytes"):
        if not isinstance(raw, str):
            raise TypeMismatch(f"expected a 0x-hex string for {typ.canonical}")
        try:
            return from_hex(raw)
        except ValueError as exc:
            raise TypeMismatch(str(exc)) from exc
    if kind == "string":
        if not isinstance(raw, str):
            raise TypeMismatch("expected a JSON string")
        return raw
    if kind == "array":
        if not isinstance(raw, list):
            raise TypeMismatch(f"expected a JSON array for {typ.canonical}")
        return [value_from_json(typ.elem, item) for item in raw]
    raise AbiError(f"unknown kind {kind}")  # pragma: no cover


def value_to_json(typ: AbiParamType, value):
    """Convert a typed ABI value into its JSON wire form."""
    kind = typ.kind
    if kind in ("uint", "int"):
        return str(value)
    if kind == "bool":
        return value
    if kind in ("address", "fixed_bytes", "bytes"):
        return to_hex(value)
    if kind == "string":
        return value
    if kind == "array":
        return [value_to_json(typ.elem, item) for item in value]
    raise AbiError(f"unknown kind {kind}")  # pragma: no cover
