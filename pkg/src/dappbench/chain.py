"""Pluggable blockchain backends.

Two implementations of one interface: a JSON-RPC client for real
Ethereum-compatible nodes, and an in-process mock chain for development
and tests. The mock validates signatures and nonces exactly like a real
node, mines instantly (one transaction per block), and answers calls
from a stub table instead of executing bytecode.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass
from typing import Optional

import httpx

from .codec import from_hex, int_to_minimal_be, keccak256, rlp_encode, to_hex
from .wallet import recover_sender


class ChainError(Exception):
    """Base class for backend failures."""


class Unreachable(ChainError):
    """Node not reachable over the network."""


class ProtocolError(ChainError):
    """Response was not valid JSON-RPC."""


class NodeError(ChainError):
    """The node returned a JSON-RPC error object."""

    def __init__(self, code: int, message: str):
        super().__init__(f"node error {code}: {message}")
        self.code = code
        self.message = message


class NonceMismatch(ChainError):
    pass


class WrongChain(ChainError):
    pass


class NoSuchContract(ChainError):
    pass


@dataclass
class NetworkConfig:
    id: str
    name: str
    kind: str               # "rpc" | "mock"
    chain_id: int
    rpc_url: str = ""
    gas_price: int = 0      # consortium chains commonly run gas-free
    gas_limit_default: int = 4_000_000
    # absent -> the service-wide receipt polling defaults apply
    poll_interval: Optional[float] = None
    poll_timeout: Optional[float] = None

    def __post_init__(self):
        if self.chain_id < 1:
            raise ValueError("chain_id must be >= 1")
        if self.kind not in ("rpc", "mock"):
            raise ValueError(f"unknown network kind {self.kind!r}")
        if self.kind == "rpc" and not self.rpc_url.startswith(("http://", "https://")):
            raise ValueError("rpc networks need an explicit http(s) rpc_url")
        for value in (self.poll_interval, self.poll_timeout):
            if value is not None and value <= 0:
                raise ValueError("polling overrides must be positive")

    def to_dict(self) -> dict:
        return {"id": self.id, "name": self.name, "kind": self.kind,
                "chain_id": self.chain_id, "rpc_url": self.rpc_url,
                "gas_price": self.gas_price,
                "gas_limit_default": self.gas_limit_default,
                "poll_interval": self.poll_interval,
                "poll_timeout": self.poll_timeout}

    @classmethod
    def from_dict(cls, doc: dict) -> "NetworkConfig":
        return cls(**doc)


@dataclass(frozen=True)
class Receipt:
    tx_hash: bytes
    status: str                       # "success" | "failure"
    contract_address: Optional[bytes]  # present iff the tx was a creation
    block_number: int
    gas_used: int

    def to_json(self) -> dict:
        return {
            "tx_hash": to_hex(self.tx_hash),
            "status": self.status,
            "contract_address":
                to_hex(self.contract_address) if self.contract_address else None,
            "block_number": self.block_number,
            "gas_used": str(self.gas_used),
        }


def derive_contract_address(sender: bytes, nonce: int) -> bytes:
    """Deterministic CREATE address: keccak(rlp([sender, nonce]))[12:]."""
    return keccak256(rlp_encode([sender, int_to_minimal_be(nonce)]))[12:]


class ChainBackend:
    """The operations every backend provides."""

    def get_chain_id(self) -> int:
        raise NotImplementedError

    def get_nonce(self, address: bytes) -> int:
        raise NotImplementedError

    def send_raw(self, raw: bytes) -> bytes:
        raise NotImplementedError

    def get_receipt(self, tx_hash: bytes) -> Optional[Receipt]:
        raise NotImplementedError

    def call(self, to: bytes, data: bytes) -> bytes:
        raise NotImplementedError

    def block_number(self) -> int:
        raise NotImplementedError


# ---------------------------------------------------------------------------
# Mock chain.


@dataclass
class _Account:
    nonce: int = 0
    balance: int = 0


class MockChain(ChainBackend):
    """Deterministic in-process chain: instant mining, no EVM.

    Deployment stores bytecode verbatim; calls answer from a stub table.
    All state transitions happen under one lock, so any interleaving of
    concurrent sends is equivalent to some serial order.
    """

    MOCK_GAS_USED = 21_000

    def __init__(self, chain_id: int):
        self.chain_id = chain_id
        self._lock = threading.Lock()
        self._accounts: dict = {}
        self._code: dict = {}
        self._receipts: dict = {}
        self._stubs: dict = {}     # (address, selector) -> return bytes
        self._defaults: dict = {}  # (address, selector) -> zero-value return
        self._height = 0

    def get_chain_id(self) -> int:
        return self.chain_id

    def get_nonce(self, address: bytes) -> int:
        # instant mining means the pending nonce equals the account nonce
        with self._lock:
            account = self._accounts.get(address)
            return account.nonce if account else 0

    def block_number(self) -> int:
        with self._lock:
            return self._height

    def send_raw(self, raw: bytes) -> bytes:
        sender, tx, _sig = recover_sender(raw)  # BadSignature/MalformedRlp bubble
        tx_hash = keccak256(raw)
        with self._lock:
            if tx.chain_id != self.chain_id:
                raise WrongChain(
                    f"transaction for chain {tx.chain_id}, this is {self.chain_id}")
            account = self._accounts.setdefault(sender, _Account())
            if tx.nonce != account.nonce:
                raise NonceMismatch(
                    f"transaction nonce {tx.nonce}, account nonce {account.nonce}")

            contract_address = None
            if tx.is_creation:
                contract_address = derive_contract_address(sender, tx.nonce)
                if contract_address in self._code:
                    raise ChainError("contract address collision")
                self._code[contract_address] = tx.data

            account.nonce += 1
            self._height += 1
            self._receipts[tx_hash] = Receipt(
                tx_hash=tx_hash, status="success",
                contract_address=contract_address,
                block_number=self._height, gas_used=self.MOCK_GAS_USED)
        return tx_hash

    def get_receipt(self, tx_hash: bytes) -> Optional[Receipt]:
        with self._lock:
            return self._receipts.get(tx_hash)

    def call(self, to: bytes, data: bytes) -> bytes:
        selector = bytes(data[:4])
        with self._lock:
            if to not in self._code:
                raise NoSuchContract(f"no code at {to_hex(to)}")
            if (to, selector) in self._stubs:
                return self._stubs[(to, selector)]
            return self._defaults.get((to, selector), b"")

    # -- mock-only hooks -------------------------------------------------

    def register_stub(self, address: bytes, selector: bytes, returns: bytes) -> None:
        """Make call(address, <selector>...) answer with fixed bytes."""
        with self._lock:
            if address not in self._code:
                raise NoSuchContract(f"no code at {to_hex(address)}")
            self._stubs[(address, bytes(selector))] = returns

    def register_default_return(self, address: bytes, selector: bytes,
                                returns: bytes) -> None:
        """Default answer for a selector when no stub is registered."""
        with self._lock:
            if address not in self._code:
                raise NoSuchContract(f"no code at {to_hex(address)}")
            self._defaults[(address, bytes(selector))] = returns

    def code_at(self, address: bytes) -> Optional[bytes]:
        with self._lock:
            return self._code.get(address)


# ---------------------------------------------------------------------------
# JSON-RPC client.


def quantity_to_hex(n: int) -> str:
    """0x-prefixed minimal hex: 0 -> "0x0", 1024 -> "0x400"."""
    return hex(n)


def hex_to_quantity(text) -> int:
    if not isinstance(text, str) or not text.startswith(("0x", "0X")):
        raise ProtocolError(f"expected a 0x quantity, got {text!r}")
    try:
        return int(text, 16)
    except ValueError as exc:
        raise ProtocolError(f"bad quantity {text!r}") from exc


class JsonRpcChain(ChainBackend):
    """Client for Ethereum JSON-RPC 2.0 nodes over HTTP(S) POST."""

    def __init__(self, rpc_url: str, timeout: float = 10.0,
                 transport: Optional[httpx.BaseTransport] = None):
        self.rpc_url = rpc_url
        self._client = httpx.Client(timeout=timeout, transport=transport)
        self._ids = itertools.count(1)
        self._id_lock = threading.Lock()

    def close(self) -> None:
        self._client.close()

    def _next_id(self) -> int:
        with self._id_lock:
            return next(self._ids)

    def _rpc(self, method: str, params: list):
        request_id = self._next_id()
        payload = {"jsonrpc": "2.0", "id": request_id,
                   "method": method, "params": params}
        try:
            response = self._client.post(
                self.rpc_url, json=payload,
                headers={"content-type": "application/json"})
        except httpx.HTTPError as exc:
            raise Unreachable(f"{self.rpc_url}: {exc}") from exc
        try:
            body = response.json()
        except ValueError as exc:
            raise ProtocolError(f"non-JSON response: {response.text[:200]!r}") from exc
        if not isinstance(body, dict) or body.get("id") != request_id:
            raise ProtocolError(f"response id does not match request {request_id}")
        if "error" in body and body["error"] is not None:
            err = body["error"]
            raise NodeError(err.get("code", -1), err.get("message", "unknown"))
        if "result" not in body:
            raise ProtocolError("response carries neither result nor error")
        return body["result"]

    def get_chain_id(self) -> int:
        return hex_to_quantity(self._rpc("eth_chainId", []))

    def get_nonce(self, address: bytes) -> int:
        return hex_to_quantity(
            self._rpc("eth_getTransactionCount", [to_hex(address), "pending"]))

    def send_raw(self, raw: bytes) -> bytes:
        result = self._rpc("eth_sendRawTransaction", [to_hex(raw)])
        tx_hash = _hex_bytes(result, 32)
        expected = keccak256(raw)
        if tx_hash != expected:
            raise ProtocolError("node returned an unexpected transaction hash")
        return tx_hash

    def get_receipt(self, tx_hash: bytes) -> Optional[Receipt]:
        result = self._rpc("eth_getTransactionReceipt", [to_hex(tx_hash)])
        if result is None:
            return None
        if not isinstance(result, dict):
            raise ProtocolError("receipt is not an object")
        contract_address = result.get("contractAddress")
        return Receipt(
            tx_hash=_hex_bytes(result.get("transactionHash"), 32),
            status="success" if hex_to_quantity(result.get("status")) == 1
                   else "failure",
            contract_address=_hex_bytes(contract_address, 20)
                             if contract_address else None,
            block_number=hex_to_quantity(result.get("blockNumber")),
            gas_used=hex_to_quantity(result.get("gasUsed")),
        )

    def call(self, to: bytes, data: bytes) -> bytes:
        result = self._rpc(
            "eth_call", [{"to": to_hex(to), "data": to_hex(data)}, "latest"])
        if not isinstance(result, str):
            raise ProtocolError("eth_call result is not a hex string")
        return from_hex(result)

    def block_number(self) -> int:
        return hex_to_quantity(self._rpc("eth_blockNumber", []))


def _hex_bytes(text, expected_len: int) -> bytes:
    if not isinstance(text, str):
        raise ProtocolError(f"expected hex data, got {text!r}")
    try:
        data = from_hex(text)
    except ValueError as exc:
        raise ProtocolError(str(exc)) from exc
    if len(data) != expected_len:
        raise ProtocolError(f"expected {expected_len} bytes, got {len(data)}")
    return data
