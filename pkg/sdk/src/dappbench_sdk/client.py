"""A thin typed wrapper over the workbench REST API.

The client performs no local ABI encoding or signing; everything happens
server-side, so this SDK stays byte-for-byte consistent with the other
language clients. Integers cross the wire as decimal strings and surface
here as Python ints (arbitrary precision, never floats).

A client authenticates either with an application API key (the normal
mode for a deployed DAPP) or with a session token obtained via
``login`` (for management operations).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence

import httpx


class WorkbenchError(Exception):
    """Base error; carries the envelope's machine code and HTTP status."""

    def __init__(self, status: int, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.status = status
        self.code = code
        self.message = message


class AuthError(WorkbenchError):
    """401 or 403: missing, invalid, revoked, or insufficient credentials."""


class ValidationError(WorkbenchError):
    """409 or 422: the request conflicts with state or fails validation."""


class NotFoundError(WorkbenchError):
    """404: no such application, contract, version, method, or user."""


class ServerError(WorkbenchError):
    """5xx: chain unreachable, node error, timeout, or internal failure."""


@dataclass(frozen=True)
class Receipt:
    tx_hash: str
    status: str
    contract_address: Optional[str]
    block_number: int
    gas_used: int

    @classmethod
    def from_json(cls, doc: dict) -> "Receipt":
        return cls(tx_hash=doc["tx_hash"], status=doc["status"],
                   contract_address=doc["contract_address"],
                   block_number=int(doc["block_number"]),
                   gas_used=int(doc["gas_used"]))


@dataclass(frozen=True)
class InvokeResult:
    tx_hash: str
    receipt: Receipt
    version_used: int


def _error_for(status: int, code: str, message: str) -> WorkbenchError:
    if status in (401, 403):
        return AuthError(status, code, message)
    if status == 404:
        return NotFoundError(status, code, message)
    if status in (409, 422):
        return ValidationError(status, code, message)
    return ServerError(status, code, message)


def _encode_arg(value):
    """Python value -> JSON wire form (ints as decimal strings)."""
    if isinstance(value, bool):
        return value
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        raise TypeError("floats cannot represent chain values; use int or str")
    if isinstance(value, (bytes, bytearray)):
        return "0x" + bytes(value).hex()
    if isinstance(value, (list, tuple)):
        return [_encode_arg(v) for v in value]
    return value


def _decode_output(entry: dict):
    """Typed wire output -> Python value (decimal strings -> int)."""
    typ, value = entry["type"], entry["value"]
    base = typ.split("[", 1)[0]
    if isinstance(value, list):
        return [_decode_output({"type": typ[:typ.rindex("[")], "value": v})
                for v in value]
    if base.startswith(("uint", "int")):
        return int(value)
    return value


class WorkbenchClient:
    def __init__(self, base_url: str, *, api_key: Optional[str] = None,
                 token: Optional[str] = None, timeout: float = 30.0):
        self.base_url = base_url.rstrip("/")
        self.api_key = api_key
        self.token = token
        self._http = httpx.Client(timeout=timeout)

    def close(self) -> None:
        self._http.close()

    def __enter__(self) -> "WorkbenchClient":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    # -- plumbing -------------------------------------------------------

    def _headers(self) -> dict:
        if self.token:
            return {"Authorization": f"Bearer {self.token}"}
        if self.api_key:
            return {"X-API-Key": self.api_key}
        return {}

    def _request(self, method: str, path: str, body: Optional[dict] = None) -> dict:
        try:
            response = self._http.request(
                method, f"{self.base_url}/api/v1{path}", json=body,
                headers=self._headers())
        except httpx.HTTPError as exc:
            raise ServerError(0, "unreachable", str(exc)) from exc
        if response.status_code >= 400:
            try:
                error = response.json()["error"]
                code, message = error["code"], error["message"]
            except (ValueError, KeyError):
                code, message = "unknown", response.text
            raise _error_for(response.status_code, code, message)
        return response.json()

    # -- accounts and sessions ------------------------------------------

    def register(self, email: str, password: str) -> str:
        return self._request("POST", "/auth/register",
                             {"email": email, "password": password})["user_id"]

    def login(self, email: str, password: str) -> str:
        """Authenticate and adopt the returned session token."""
        token = self._request("POST", "/auth/login",
                              {"email": email, "password": password})["token"]
        self.token = token
        return token

    # -- networks ---------------------------------------------------------

    def add_network(self, name: str, chain_id: int, *, kind: str = "mock",
                    rpc_url: str = "", gas_price: int = 0,
                    gas_limit_default: int = 4_000_000) -> dict:
        return self._request("POST", "/networks", {
            "name": name, "kind": kind, "chain_id": chain_id,
            "rpc_url": rpc_url, "gas_price": str(gas_price),
            "gas_limit_default": gas_limit_default})["network"]

    def list_networks(self) -> list:
        return self._request("GET", "/networks")["networks"]

    # -- applications -------------------------------------------------------

    def create_app(self, name: str, network_id: str) -> dict:
        return self._request("POST", "/apps",
                             {"name": name, "network_id": network_id})

    def list_apps(self) -> list:
        return self._request("GET", "/apps")["apps"]

    def share(self, app_id: str, email: str, role: str) -> dict:
        return self._request("POST", f"/apps/{app_id}/share",
                             {"email": email, "role": role})["app"]

    def create_api_key(self, app_id: str, label: str = "") -> tuple:
        doc = self._request("POST", f"/apps/{app_id}/keys", {"label": label})
        return doc["token"], doc["key"]

    def revoke_api_key(self, app_id: str, key_id: str) -> dict:
        return self._request("DELETE", f"/apps/{app_id}/keys/{key_id}")["key"]

    # -- contracts ------------------------------------------------------------

    def deploy(self, app_id: str, name: str, abi, bytecode: str,
               constructor_args: Sequence = (), *,
               gas_limit: Optional[int] = None) -> dict:
        return self._request("POST", f"/apps/{app_id}/contracts", {
            "name": name,
            "abi": abi if isinstance(abi, str) else json.dumps(abi),
            "bytecode": bytecode,
            "constructor_args": [_encode_arg(a) for a in constructor_args],
            "gas_limit": gas_limit})

    def deploy_version(self, app_id: str, name: str, abi, bytecode: str,
                       constructor_args: Sequence = (), *,
                       gas_limit: Optional[int] = None) -> dict:
        return self._request(
            "POST", f"/apps/{app_id}/contracts/{name}/versions", {
                "abi": abi if isinstance(abi, str) else json.dumps(abi),
                "bytecode": bytecode,
                "constructor_args": [_encode_arg(a) for a in constructor_args],
                "gas_limit": gas_limit})

    def invoke(self, app_id: str, contract: str, method: str,
               args: Sequence = (), *,
               version: Optional[int] = None) -> InvokeResult:
        doc = self._request(
            "POST", f"/apps/{app_id}/contracts/{contract}/invoke", {
                "method": method, "args": [_encode_arg(a) for a in args],
                "version": version})
        return InvokeResult(tx_hash=doc["tx_hash"],
                            receipt=Receipt.from_json(doc["receipt"]),
                            version_used=doc["version_used"])

    def call(self, app_id: str, contract: str, method: str,
             args: Sequence = (), *, version: Optional[int] = None) -> list:
        doc = self._request(
            "POST", f"/apps/{app_id}/contracts/{contract}/call", {
                "method": method, "args": [_encode_arg(a) for a in args],
                "version": version})
        return [_decode_output(entry) for entry in doc["outputs"]]

    def details(self, app_id: str, contract: str) -> dict:
        return self._request("GET", f"/apps/{app_id}/contracts/{contract}")


def connect(base_url: str, api_key: Optional[str] = None, *,
            token: Optional[str] = None, timeout: float = 30.0) -> WorkbenchClient:
    """Create a client; a DAPP normally passes just its API key."""
    return WorkbenchClient(base_url, api_key=api_key, token=token,
                           timeout=timeout)
