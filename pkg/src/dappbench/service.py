"""Orchestration: the deploy / invoke / call pipelines.

Ties the other modules together: resolves authorization through the
registry, encodes call data, signs with the application's deployer key,
broadcasts through the network's backend, polls for the receipt, and —
only after a success receipt — records the new contract version.

Argument type-checking happens before any network traffic, and nonce
allocation is serialized per application so concurrent requests never
collide.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from typing import Optional

from . import abi as abi_mod
from .abi import TypeMismatch
from .chain import (
    ChainBackend,
    JsonRpcChain,
    MockChain,
    NetworkConfig,
    Receipt,
    derive_contract_address,
)
from .codec import from_hex, keccak256
from .registry import (
    Actor,
    Application,
    ContractExists,
    ContractVersion,
    Registry,
    Role,
)
from .wallet import LegacyTransaction, decrypt_key, sign_transaction

DEFAULT_POLL_INTERVAL = 0.25
DEFAULT_POLL_TIMEOUT = 30.0


class ServiceError(Exception):
    pass


class ChainIdMismatch(ServiceError):
    """Node reports a different chain id than the network declares."""


class ReceiptTimeout(ServiceError):
    pass


class TxFailed(ServiceError):
    def __init__(self, receipt: Receipt):
        super().__init__(f"transaction {receipt.tx_hash.hex()} failed")
        self.receipt = receipt


class NoSuchMethod(ServiceError):
    pass


class MethodIsView(ServiceError):
    """State-changing invoke refused for a read-only method."""


class ContractNotDeployed(ServiceError):
    pass


class InvalidBytecode(ServiceError):
    pass


@dataclass(frozen=True)
class DeployRequest:
    app_id: str
    contract_name: str
    abi_text: str
    bytecode_hex: str
    constructor_args: list
    gas_limit: Optional[int] = None


@dataclass(frozen=True)
class InvokeResult:
    tx_hash: bytes
    receipt: Receipt
    version_used: int


class Workbench:
    """The service facade the HTTP layer and the CLI talk to."""

    def __init__(self, registry: Registry, *,
                 poll_interval: float = DEFAULT_POLL_INTERVAL,
                 poll_timeout: float = DEFAULT_POLL_TIMEOUT,
                 clock=time.monotonic, sleep=time.sleep):
        self.registry = registry
        self.poll_interval = poll_interval
        self.poll_timeout = poll_timeout
        self._clock = clock
        self._sleep = sleep
        self._backends: dict = {}
        self._backends_lock = threading.Lock()
        self._app_locks: dict = {}
        self._app_locks_guard = threading.Lock()

    # -- networks ---------------------------------------------------------

    def _make_backend(self, cfg: NetworkConfig) -> ChainBackend:
        if cfg.kind == "mock":
            return MockChain(cfg.chain_id)
        return JsonRpcChain(cfg.rpc_url)

    def backend_for(self, network_id: str) -> ChainBackend:
        with self._backends_lock:
            backend = self._backends.get(network_id)
            if backend is None:
                cfg = self.registry.get_network(network_id)
                backend = self._make_backend(cfg)
                self._backends[network_id] = backend
            return backend

    def add_network(self, cfg: NetworkConfig) -> NetworkConfig:
        """Validate connectivity and chain id, then record the network."""
        backend = self._make_backend(cfg)
        reported = backend.get_chain_id()  # Unreachable/ProtocolError bubble
        if reported != cfg.chain_id:
            raise ChainIdMismatch(
                f"node reports chain id {reported}, network declares {cfg.chain_id}")
        self.registry.add_network(cfg)
        with self._backends_lock:
            self._backends[cfg.id] = backend
        return cfg

    def _app_lock(self, app_id: str) -> threading.Lock:
        with self._app_locks_guard:
            lock = self._app_locks.get(app_id)
            if lock is None:
                lock = threading.Lock()
                self._app_locks[app_id] = lock
            return lock

    # -- deployment ---------------------------------------------------------

    def deploy_contract(self, actor: Actor, request: DeployRequest) -> ContractVersion:
        app = self.registry.get_app(request.app_id)
        self.registry.require_role(app, actor, Role.EDITOR)
        if request.contract_name in app.contracts:
            raise ContractExists(request.contract_name)
        return self._deploy(app, request)

    def deploy_new_version(self, actor: Actor, request: DeployRequest) -> ContractVersion:
        app = self.registry.get_app(request.app_id)
        self.registry.require_role(app, actor, Role.EDITOR)
        self.registry.get_contract(app, request.contract_name)  # NoSuchContract
        return self._deploy(app, request)

    def _deploy(self, app: Application, request: DeployRequest) -> ContractVersion:
        if not request.contract_name:
            raise ValueError("contract name must not be empty")
        parsed = abi_mod.parse_abi_json(request.abi_text)
        try:
            bytecode = from_hex(request.bytecode_hex)
        except ValueError as exc:
            raise InvalidBytecode(str(exc)) from exc
        if not bytecode:
            raise InvalidBytecode("bytecode must not be empty")

        ctor_types = parsed.constructor_inputs or []
        if len(request.constructor_args) != len(ctor_types):
            raise TypeMismatch(
                f"constructor takes {len(ctor_types)} argument(s), "
                f"got {len(request.constructor_args)}")
        values = [abi_mod.value_from_json(t, raw)
                  for t, raw in zip(ctor_types, request.constructor_args)]
        data = abi_mod.encode_constructor(bytecode, ctor_types, values)

        cfg = self.registry.get_network(app.network)
        backend = self.backend_for(app.network)
        secret = decrypt_key(app.deployer_keystore, self.registry.master_secret())

        with self._app_lock(app.id):
            nonce = backend.get_nonce(app.deployer_address)
            tx = LegacyTransaction(
                nonce=nonce, gas_price=cfg.gas_price,
                gas_limit=request.gas_limit or cfg.gas_limit_default,
                to=None, value=0, data=data, chain_id=cfg.chain_id)
            raw = sign_transaction(tx, secret)
            tx_hash = backend.send_raw(raw)

        receipt = self.poll_receipt(backend, tx_hash, network=cfg)
        if receipt.status != "success":
            raise TxFailed(receipt)
        address = receipt.contract_address
        if address is None:
            # some nodes omit it; the CREATE rule makes it recomputable
            address = derive_contract_address(app.deployer_address, nonce)

        version = self.registry.register_version(
            app.id, request.contract_name, address=address,
            abi_text=request.abi_text, bytecode_hash=keccak256(bytecode),
            deploy_tx=tx_hash, deployer=app.deployer_address)

        if isinstance(backend, MockChain):
            self._register_mock_defaults(backend, address, parsed.functions)
        return version

    @staticmethod
    def _register_mock_defaults(backend: MockChain, address: bytes,
                                functions: list) -> None:
        """Teach the mock the zero-filled return shape of each method."""
        for fn in functions:
            if not fn.outputs:
                continue
            zeros = abi_mod.encode_args(
                list(fn.outputs), [abi_mod.zero_value(t) for t in fn.outputs])
            backend.register_default_return(address, fn.selector, zeros)

    # -- interaction ---------------------------------------------------------

    def _resolve_method(self, app: Application, contract_name: str,
                        method: str, version: Optional[int]):
        address, functions, version_used = self.registry.resolve_target(
            app, contract_name, version)
        for fn in functions:
            if fn.name == method:
                return address, fn, version_used
        raise NoSuchMethod(f"{contract_name!r} version {version_used} "
                           f"has no method {method!r}")

    @staticmethod
    def _typed_args(fn, args: list) -> list:
        if len(args) != len(fn.inputs):
            raise TypeMismatch(
                f"{fn.name!r} takes {len(fn.inputs)} argument(s), got {len(args)}")
        return [abi_mod.value_from_json(t, raw)
                for (_, t), raw in zip(fn.inputs, args)]

    def invoke(self, actor: Actor, app_id: str, contract_name: str,
               method: str, args: list,
               version: Optional[int] = None) -> InvokeResult:
        app = self.registry.get_app(app_id)
        self.registry.require_role(app, actor, Role.CALLER)
        address, fn, version_used = self._resolve_method(
            app, contract_name, method, version)
        if fn.is_view:
            raise MethodIsView(f"{method!r} is read-only; use call")

        data = abi_mod.encode_call(fn, self._typed_args(fn, args))

        cfg = self.registry.get_network(app.network)
        backend = self.backend_for(app.network)
        secret = decrypt_key(app.deployer_keystore, self.registry.master_secret())

        with self._app_lock(app.id):
            nonce = backend.get_nonce(app.deployer_address)
            tx = LegacyTransaction(
                nonce=nonce, gas_price=cfg.gas_price,
                gas_limit=cfg.gas_limit_default, to=address, value=0,
                data=data, chain_id=cfg.chain_id)
            raw = sign_transaction(tx, secret)
            tx_hash = backend.send_raw(raw)

        receipt = self.poll_receipt(backend, tx_hash, network=cfg)
        if receipt.status != "success":
            raise TxFailed(receipt)
        return InvokeResult(tx_hash=tx_hash, receipt=receipt,
                            version_used=version_used)

    def call(self, actor: Actor, app_id: str, contract_name: str,
             method: str, args: list, version: Optional[int] = None) -> tuple:
        """Read-only execution: ([(output type, value), ...], version used)."""
        app = self.registry.get_app(app_id)
        self.registry.require_role(app, actor, Role.VIEWER)
        address, fn, version_used = self._resolve_method(
            app, contract_name, method, version)
        data = abi_mod.encode_call(fn, self._typed_args(fn, args))

        backend = self.backend_for(app.network)
        returned = backend.call(address, data)
        outputs = abi_mod.decode_values(list(fn.outputs), returned)
        return list(zip(fn.outputs, outputs)), version_used

    # -- receipts ----------------------------------------------------------

    def poll_receipt(self, backend: ChainBackend, tx_hash: bytes, *,
                     network: Optional[NetworkConfig] = None) -> Receipt:
        interval = self.poll_interval
        timeout = self.poll_timeout
        if network is not None:
            interval = network.poll_interval or interval
            timeout = network.poll_timeout or timeout
        deadline = self._clock() + timeout
        while True:
            receipt = backend.get_receipt(tx_hash)
            if receipt is not None:
                return receipt
            if self._clock() >= deadline:
                raise ReceiptTimeout(
                    f"no receipt for {tx_hash.hex()} within {timeout}s")
            self._sleep(interval)
