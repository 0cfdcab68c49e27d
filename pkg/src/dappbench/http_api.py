"""REST surface: routing, authentication, and the uniform error envelope.

All routes live under /api/v1. Sessions authenticate with
``Authorization: Bearer <token>``; API keys with ``X-API-Key`` and are
accepted only on the contract-interaction routes (details, invoke, call),
where they carry caller capability for their own application.

Every non-2xx response has the body ``{"error": {"code", "message"}}``.
Integers that can exceed 2**53 (wei amounts, ABI values, gas) travel as
decimal strings.
"""

from __future__ import annotations

import json
import uuid
from typing import Optional, Union

from fastapi import Depends, FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field
from starlette.exceptions import HTTPException as StarletteHTTPException

from . import abi as abi_mod
from . import chain as chain_mod
from . import registry as registry_mod
from . import service as service_mod
from .chain import NetworkConfig
from .codec import to_hex
from .registry import Actor, Role
from .service import DeployRequest, Workbench

API_PREFIX = "/api/v1"

# (method, path, auth class) for every documented route. The authorization
# sweep in the acceptance suite and the UI contract test both key off this.
ROUTE_MANIFEST = [
    ("POST", "/api/v1/auth/register", "open"),
    ("POST", "/api/v1/auth/login", "open"),
    ("GET", "/api/v1/networks", "session"),
    ("POST", "/api/v1/networks", "session"),
    ("GET", "/api/v1/apps", "session"),
    ("POST", "/api/v1/apps", "session"),
    ("GET", "/api/v1/apps/{app_id}", "session"),
    ("POST", "/api/v1/apps/{app_id}/share", "session"),
    ("GET", "/api/v1/apps/{app_id}/keys", "session"),
    ("POST", "/api/v1/apps/{app_id}/keys", "session"),
    ("DELETE", "/api/v1/apps/{app_id}/keys/{key_id}", "session"),
    ("GET", "/api/v1/apps/{app_id}/contracts", "session"),
    ("POST", "/api/v1/apps/{app_id}/contracts", "session"),
    ("GET", "/api/v1/apps/{app_id}/contracts/{name}", "session_or_key"),
    ("POST", "/api/v1/apps/{app_id}/contracts/{name}/versions", "session"),
    ("POST", "/api/v1/apps/{app_id}/contracts/{name}/invoke", "session_or_key"),
    ("POST", "/api/v1/apps/{app_id}/contracts/{name}/call", "session_or_key"),
]


class ApiError(Exception):
    def __init__(self, http_status: int, code: str, message: str):
        super().__init__(message)
        self.http_status = http_status
        self.code = code
        self.message = message


# Every domain failure maps to exactly one (status, code) pair.
ERROR_MAP = {
    registry_mod.EmailTaken: (409, "email_taken"),
    registry_mod.WeakPassword: (422, "weak_password"),
    registry_mod.InvalidCredentials: (401, "invalid_credentials"),
    registry_mod.NotAuthorized: (403, "not_authorized"),
    registry_mod.NoSuchUser: (404, "no_such_user"),
    registry_mod.NoSuchNetwork: (404, "no_such_network"),
    registry_mod.NoSuchApp: (404, "no_such_app"),
    registry_mod.NoSuchContract: (404, "no_such_contract"),
    registry_mod.NoSuchVersion: (404, "no_such_version"),
    registry_mod.NoSuchKey: (404, "no_such_key"),
    registry_mod.AppNameTaken: (409, "app_name_taken"),
    registry_mod.ContractExists: (409, "contract_exists"),
    registry_mod.NetworkExists: (409, "network_exists"),
    registry_mod.InvalidShare: (422, "invalid_share"),
    registry_mod.AddressCollision: (409, "address_collision"),
    abi_mod.MalformedJson: (422, "abi_parse_error"),
    abi_mod.UnsupportedType: (422, "abi_parse_error"),
    abi_mod.DuplicateSignature: (422, "abi_parse_error"),
    abi_mod.TypeMismatch: (422, "type_mismatch"),
    abi_mod.ValueOutOfRange: (422, "value_out_of_range"),
    abi_mod.EmptyBytecode: (422, "invalid_bytecode"),
    abi_mod.AbiDecodeError: (502, "decode_error"),
    service_mod.InvalidBytecode: (422, "invalid_bytecode"),
    service_mod.ChainIdMismatch: (422, "chain_id_mismatch"),
    service_mod.ReceiptTimeout: (504, "receipt_timeout"),
    service_mod.TxFailed: (502, "tx_failed"),
    service_mod.NoSuchMethod: (404, "no_such_method"),
    service_mod.MethodIsView: (409, "method_is_view"),
    service_mod.ContractNotDeployed: (404, "no_such_contract"),
    chain_mod.Unreachable: (502, "chain_unreachable"),
    chain_mod.ProtocolError: (502, "chain_protocol_error"),
    chain_mod.NodeError: (502, "node_error"),
    chain_mod.NonceMismatch: (409, "nonce_mismatch"),
    chain_mod.WrongChain: (422, "wrong_chain"),
    chain_mod.NoSuchContract: (502, "no_code_at_address"),
    ValueError: (422, "invalid_request"),
}


def _envelope(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status,
                        content={"error": {"code": code, "message": message}})


# -- request bodies ----------------------------------------------------------

class RegisterBody(BaseModel):
    email: str
    password: str


class LoginBody(BaseModel):
    email: str
    password: str


class NetworkBody(BaseModel):
    name: str
    kind: str = "mock"
    chain_id: int
    rpc_url: str = ""
    gas_price: Union[int, str] = "0"
    gas_limit_default: int = 4_000_000
    poll_interval: Optional[float] = None
    poll_timeout: Optional[float] = None


class AppBody(BaseModel):
    name: str
    network_id: str


class ShareBody(BaseModel):
    email: str
    role: str


class KeyBody(BaseModel):
    label: str = ""


class DeployBody(BaseModel):
    name: str
    abi: Union[str, list]
    bytecode: str
    constructor_args: list = Field(default_factory=list)
    gas_limit: Optional[int] = None


class VersionBody(BaseModel):
    abi: Union[str, list]
    bytecode: str
    constructor_args: list = Field(default_factory=list)
    gas_limit: Optional[int] = None


class InvokeBody(BaseModel):
    method: str
    args: list = Field(default_factory=list)
    version: Optional[int] = None


# -- JSON views ---------------------------------------------------------------

def _network_json(cfg: NetworkConfig) -> dict:
    return {"id": cfg.id, "name": cfg.name, "kind": cfg.kind,
            "chain_id": cfg.chain_id, "rpc_url": cfg.rpc_url,
            "gas_price": str(cfg.gas_price),
            "gas_limit_default": cfg.gas_limit_default,
            "poll_interval": cfg.poll_interval,
            "poll_timeout": cfg.poll_timeout}


def _app_json(app) -> dict:
    return {
        "id": app.id, "name": app.name, "owner": app.owner,
        "network": app.network,
        "deployer_address": to_hex(app.deployer_address),
        "created_at": app.created_at,
        "shares": {uid: role.name.lower() for uid, role in app.shares.items()},
        "contracts": sorted(app.contracts),
    }


def _key_json(key) -> dict:
    return {"id": key.id, "application": key.application,
            "key_hash": to_hex(key.key_hash), "label": key.label,
            "created_at": key.created_at, "revoked": key.revoked}


def _method_json(fn) -> dict:
    return {
        "name": fn.name,
        "signature": fn.signature,
        "selector": to_hex(fn.selector),
        "inputs": [{"name": name, "type": typ.canonical}
                   for name, typ in fn.inputs],
        "outputs": [typ.canonical for typ in fn.outputs],
        "mutability": fn.mutability,
    }


def _version_json(version, active_version: int) -> dict:
    return {
        "version": version.version_no,
        "address": to_hex(version.address),
        "bytecode_hash": to_hex(version.bytecode_hash),
        "deploy_tx": to_hex(version.deploy_tx),
        "deployed_at": version.deployed_at,
        "deployer": to_hex(version.deployer),
        "active": version.version_no == active_version,
    }


def _abi_text(abi_field: Union[str, list]) -> str:
    return abi_field if isinstance(abi_field, str) else json.dumps(abi_field)


def _parse_wei(value: Union[int, str], name: str) -> int:
    if isinstance(value, str):
        try:
            value = int(value, 10)
        except ValueError:
            raise ValueError(f"{name} must be a decimal integer") from None
    if value < 0:
        raise ValueError(f"{name} must be non-negative")
    return value


# -- application factory -------------------------------------------------------

def create_app(workbench: Workbench, cors_origins=("*",)) -> FastAPI:
    app = FastAPI(title="dappbench", docs_url=None, redoc_url=None,
                  openapi_url=None)
    app.add_middleware(
        CORSMiddleware, allow_origins=list(cors_origins),
        allow_methods=["*"], allow_headers=["*"])
    registry = workbench.registry

    # -- error envelope ------------------------------------------------------

    @app.exception_handler(ApiError)
    async def handle_api_error(request: Request, exc: ApiError):
        return _envelope(exc.http_status, exc.code, exc.message)

    def _make_handler(status: int, code: str):
        async def handler(request: Request, exc: Exception):
            return _envelope(status, code, str(exc))
        return handler

    for exc_class, (status, code) in ERROR_MAP.items():
        app.add_exception_handler(exc_class, _make_handler(status, code))

    @app.exception_handler(RequestValidationError)
    async def handle_validation(request: Request, exc: RequestValidationError):
        return _envelope(422, "invalid_request", str(exc.errors()[:3]))

    @app.exception_handler(StarletteHTTPException)
    async def handle_http(request: Request, exc: StarletteHTTPException):
        code = {404: "not_found", 405: "method_not_allowed"}.get(
            exc.status_code, "http_error")
        return _envelope(exc.status_code, code, str(exc.detail))

    # -- authentication -------------------------------------------------------

    def _session_actor(request: Request) -> Actor:
        header = request.headers.get("authorization", "")
        if not header.lower().startswith("bearer "):
            raise ApiError(401, "unauthenticated", "missing bearer token")
        user_id = registry.resolve_session(header[7:].strip())
        if user_id is None:
            raise ApiError(401, "unauthenticated", "invalid or expired token")
        return Actor(user_id=user_id)

    def session_actor(request: Request) -> Actor:
        return _session_actor(request)

    def flexible_actor(request: Request) -> Actor:
        """Session if present, else API key (contract routes only)."""
        if request.headers.get("authorization"):
            return _session_actor(request)
        token = request.headers.get("x-api-key")
        if token:
            record = registry.verify_api_key(token)
            if record is None:
                raise ApiError(401, "unauthenticated", "unknown or revoked API key")
            return Actor(api_key_app=record.application)
        raise ApiError(401, "unauthenticated", "missing credentials")

    # -- auth routes ----------------------------------------------------------

    @app.post(f"{API_PREFIX}/auth/register", status_code=201)
    def register(body: RegisterBody):
        user = registry.create_user(body.email, body.password)
        return {"user_id": user.id}

    @app.post(f"{API_PREFIX}/auth/login")
    def login(body: LoginBody):
        return {"token": registry.authenticate(body.email, body.password)}

    # -- networks --------------------------------------------------------------

    @app.get(f"{API_PREFIX}/networks")
    def list_networks(actor: Actor = Depends(session_actor)):
        return {"networks": [_network_json(n) for n in registry.list_networks()]}

    @app.post(f"{API_PREFIX}/networks", status_code=201)
    def add_network(body: NetworkBody, actor: Actor = Depends(session_actor)):
        cfg = NetworkConfig(
            id=uuid.uuid4().hex, name=body.name, kind=body.kind,
            chain_id=body.chain_id, rpc_url=body.rpc_url,
            gas_price=_parse_wei(body.gas_price, "gas_price"),
            gas_limit_default=body.gas_limit_default,
            poll_interval=body.poll_interval, poll_timeout=body.poll_timeout)
        workbench.add_network(cfg)
        return {"network": _network_json(cfg)}

    # -- applications ------------------------------------------------------------

    @app.get(f"{API_PREFIX}/apps")
    def list_apps(actor: Actor = Depends(session_actor)):
        apps = registry.list_apps_for(actor.user_id)
        return {"apps": [_app_json(a) for a in apps]}

    @app.post(f"{API_PREFIX}/apps", status_code=201)
    def create_application(body: AppBody, actor: Actor = Depends(session_actor)):
        record = registry.create_application(actor.user_id, body.name,
                                             body.network_id)
        return {"app": _app_json(record),
                "deployer_address": to_hex(record.deployer_address)}

    @app.get(f"{API_PREFIX}/apps/{{app_id}}")
    def get_application(app_id: str, actor: Actor = Depends(session_actor)):
        record = registry.get_app(app_id)
        registry.require_role(record, actor, Role.VIEWER)
        return {"app": _app_json(record)}

    @app.post(f"{API_PREFIX}/apps/{{app_id}}/share")
    def share_application(app_id: str, body: ShareBody,
                          actor: Actor = Depends(session_actor)):
        role = Role.parse(body.role)
        record = registry.share_application(app_id, actor, body.email, role)
        return {"app": _app_json(record)}

    # -- API keys -------------------------------------------------------------------

    @app.get(f"{API_PREFIX}/apps/{{app_id}}/keys")
    def list_keys(app_id: str, actor: Actor = Depends(session_actor)):
        record = registry.get_app(app_id)
        registry.require_role(record, actor, Role.EDITOR)
        return {"keys": [_key_json(k) for k in record.api_keys]}

    @app.post(f"{API_PREFIX}/apps/{{app_id}}/keys", status_code=201)
    def create_key(app_id: str, body: KeyBody,
                   actor: Actor = Depends(session_actor)):
        token, key = registry.create_api_key(app_id, actor, body.label)
        return {"token": token, "key": _key_json(key)}

    @app.delete(f"{API_PREFIX}/apps/{{app_id}}/keys/{{key_id}}")
    def revoke_key(app_id: str, key_id: str,
                   actor: Actor = Depends(session_actor)):
        key = registry.revoke_api_key(app_id, actor, key_id)
        return {"key": _key_json(key)}

    # -- contracts ----------------------------------------------------------------

    @app.get(f"{API_PREFIX}/apps/{{app_id}}/contracts")
    def list_contracts(app_id: str, actor: Actor = Depends(session_actor)):
        record = registry.get_app(app_id)
        registry.require_role(record, actor, Role.VIEWER)
        return {"contracts": [
            {"name": c.name, "active_version": c.active_version,
             "versions": len(c.versions)}
            for c in sorted(record.contracts.values(), key=lambda c: c.name)]}

    @app.post(f"{API_PREFIX}/apps/{{app_id}}/contracts", status_code=201)
    def deploy_contract(app_id: str, body: DeployBody,
                        actor: Actor = Depends(session_actor)):
        version = workbench.deploy_contract(actor, DeployRequest(
            app_id=app_id, contract_name=body.name,
            abi_text=_abi_text(body.abi), bytecode_hex=body.bytecode,
            constructor_args=body.constructor_args, gas_limit=body.gas_limit))
        return {"contract": body.name, "version": version.version_no,
                "address": to_hex(version.address),
                "tx_hash": to_hex(version.deploy_tx)}

    @app.post(f"{API_PREFIX}/apps/{{app_id}}/contracts/{{name}}/versions",
              status_code=201)
    def deploy_version(app_id: str, name: str, body: VersionBody,
                       actor: Actor = Depends(session_actor)):
        version = workbench.deploy_new_version(actor, DeployRequest(
            app_id=app_id, contract_name=name,
            abi_text=_abi_text(body.abi), bytecode_hex=body.bytecode,
            constructor_args=body.constructor_args, gas_limit=body.gas_limit))
        return {"contract": name, "version": version.version_no,
                "address": to_hex(version.address),
                "tx_hash": to_hex(version.deploy_tx)}

    @app.get(f"{API_PREFIX}/apps/{{app_id}}/contracts/{{name}}")
    def contract_details(app_id: str, name: str,
                         actor: Actor = Depends(flexible_actor)):
        record = registry.get_app(app_id)
        details = registry.contract_details(record, name, actor)
        return {
            "name": details["name"],
            "active_version": details["active_version"],
            "methods": [_method_json(fn) for fn in details["methods"]],
            "versions": [_version_json(v, details["active_version"])
                         for v in details["versions"]],
            "accounts": [to_hex(a) for a in details["accounts"]],
        }

    @app.post(f"{API_PREFIX}/apps/{{app_id}}/contracts/{{name}}/invoke")
    def invoke(app_id: str, name: str, body: InvokeBody,
               actor: Actor = Depends(flexible_actor)):
        result = workbench.invoke(actor, app_id, name, body.method, body.args,
                                  body.version)
        return {"tx_hash": to_hex(result.tx_hash),
                "receipt": result.receipt.to_json(),
                "version_used": result.version_used}

    @app.post(f"{API_PREFIX}/apps/{{app_id}}/contracts/{{name}}/call")
    def call(app_id: str, name: str, body: InvokeBody,
             actor: Actor = Depends(flexible_actor)):
        outputs, version_used = workbench.call(actor, app_id, name, body.method,
                                               body.args, body.version)
        return {"outputs": [{"type": typ.canonical,
                             "value": abi_mod.value_to_json(typ, value)}
                            for typ, value in outputs],
                "version_used": version_used}

    return app
