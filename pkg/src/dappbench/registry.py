"""Users, applications, contracts, versions, API keys, and persistence.

The registry is the system of record. State lives in memory and is
rewritten to a single JSON snapshot on every mutation; the write is
atomic (temp file + rename) and carries a keccak checksum, so a snapshot
found on disk either loads bit-identically or is rejected outright.

Secrets never reach the snapshot in plaintext: passwords are stored as
salted scrypt hashes, API keys as keccak digests, deployer keys inside
authenticated keystores. Session tokens live only in memory.
"""

from __future__ import annotations

import enum
import hashlib
import hmac
import json
import os
import secrets
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import abi as abi_mod
from .chain import NetworkConfig
from .codec import from_hex, keccak256, to_hex
from .wallet import (
    DEFAULT_KDF_N,
    DEFAULT_KDF_P,
    DEFAULT_KDF_R,
    EncryptedKeystore,
    encrypt_key,
    generate_keypair,
)

SNAPSHOT_FORMAT_VERSION = 1
SNAPSHOT_FILENAME = "registry.json"
MASTER_SECRET_FILENAME = "secret.key"
SESSION_TTL_SECONDS = 24 * 3600
MIN_PASSWORD_LENGTH = 8


class RegistryError(Exception):
    pass


class EmailTaken(RegistryError):
    pass


class WeakPassword(RegistryError):
    pass


class InvalidCredentials(RegistryError):
    pass


class NotAuthorized(RegistryError):
    pass


class NoSuchUser(RegistryError):
    pass


class NoSuchNetwork(RegistryError):
    pass


class NoSuchApp(RegistryError):
    pass


class NoSuchContract(RegistryError):
    pass


class NoSuchVersion(RegistryError):
    pass


class NoSuchKey(RegistryError):
    pass


class AppNameTaken(RegistryError):
    pass


class ContractExists(RegistryError):
    pass


class InvalidShare(RegistryError):
    pass


class NetworkExists(RegistryError):
    pass


class AddressCollision(RegistryError):
    pass


class CorruptSnapshot(RegistryError):
    pass


class Role(enum.IntEnum):
    VIEWER = 1
    CALLER = 2
    EDITOR = 3
    OWNER = 4

    @classmethod
    def parse(cls, name: str) -> "Role":
        try:
            return cls[name.upper()]
        except KeyError:
            raise ValueError(f"unknown role {name!r}") from None


SHAREABLE_ROLES = (Role.VIEWER, Role.CALLER, Role.EDITOR)


@dataclass(frozen=True)
class Actor:
    """Whoever is performing an operation: a session user or an API key."""

    user_id: Optional[str] = None
    api_key_app: Optional[str] = None  # application id the key is bound to

    @property
    def is_api_key(self) -> bool:
        return self.api_key_app is not None


@dataclass
class User:
    id: str
    email: str
    password_hash: dict
    created_at: int


@dataclass(frozen=True)
class ContractVersion:
    version_no: int
    address: bytes
    abi_text: str
    bytecode_hash: bytes
    deploy_tx: bytes
    deployed_at: int
    deployer: bytes

    def functions(self) -> list:
        return abi_mod.parse_abi_json(self.abi_text).functions

    def to_dict(self) -> dict:
        return {
            "version_no": self.version_no,
            "address": to_hex(self.address),
            "abi_text": self.abi_text,
            "bytecode_hash": to_hex(self.bytecode_hash),
            "deploy_tx": to_hex(self.deploy_tx),
            "deployed_at": self.deployed_at,
            "deployer": to_hex(self.deployer),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ContractVersion":
        return cls(
            version_no=doc["version_no"],
            address=from_hex(doc["address"]),
            abi_text=doc["abi_text"],
            bytecode_hash=from_hex(doc["bytecode_hash"]),
            deploy_tx=from_hex(doc["deploy_tx"]),
            deployed_at=doc["deployed_at"],
            deployer=from_hex(doc["deployer"]),
        )


@dataclass
class Contract:
    id: str
    application: str
    name: str
    versions: list = field(default_factory=list)
    active_version: int = 0

    def version(self, number: int) -> ContractVersion:
        for v in self.versions:
            if v.version_no == number:
                return v
        raise NoSuchVersion(f"contract {self.name!r} has no version {number}")


@dataclass
class ApiKey:
    id: str
    application: str
    key_hash: bytes
    label: str
    created_at: int
    revoked: bool = False


@dataclass
class Application:
    id: str
    name: str
    owner: str
    network: str
    deployer_keystore: EncryptedKeystore
    deployer_address: bytes
    created_at: int
    shares: dict = field(default_factory=dict)      # user id -> Role
    contracts: dict = field(default_factory=dict)   # name -> Contract
    api_keys: list = field(default_factory=list)


def _hash_password(password: str, *, n: int, r: int, p: int) -> dict:
    salt = secrets.token_bytes(16)
    digest = hashlib.scrypt(password.encode("utf-8"), salt=salt, n=n, r=r, p=p,
                            maxmem=256 * 1024 * 1024, dklen=32)
    return {"algo": "scrypt", "n": n, "r": r, "p": p,
            "salt": to_hex(salt), "hash": to_hex(digest)}


def _verify_password(password: str, stored: dict) -> bool:
    digest = hashlib.scrypt(
        password.encode("utf-8"), salt=from_hex(stored["salt"]),
        n=stored["n"], r=stored["r"], p=stored["p"],
        maxmem=256 * 1024 * 1024, dklen=32)
    return hmac.compare_digest(digest, from_hex(stored["hash"]))


class Registry:
    """In-memory state with snapshot-per-mutation durability.

    One coarse lock serializes mutations; reads take the same lock, which
    is plenty at workbench scale. ``kdf_n/r/p`` tune both the password
    hash and the deployer keystores (tests pass lighter values).
    """

    def __init__(self, data_dir: Optional[str] = None, *,
                 clock=time.time,
                 session_ttl: float = SESSION_TTL_SECONDS,
                 kdf_n: int = DEFAULT_KDF_N, kdf_r: int = DEFAULT_KDF_R,
                 kdf_p: int = DEFAULT_KDF_P):
        self._data_dir = Path(data_dir) if data_dir is not None else None
        self._clock = clock
        self._session_ttl = session_ttl
        self._kdf = {"n": kdf_n, "r": kdf_r, "p": kdf_p}
        self._lock = threading.RLock()

        self._users: dict = {}          # id -> User
        self._users_by_email: dict = {}  # lowercased email -> id
        self._networks: dict = {}       # id -> NetworkConfig
        self._apps: dict = {}           # id -> Application
        self._keys_by_hash: dict = {}   # key hash bytes -> ApiKey
        self._sessions: dict = {}       # token -> (user_id, expires_at)

        # a fixed hash keeps authenticate() timing flat for unknown emails
        self._dummy_hash = _hash_password("dummy-password", **self._kdf)

        if self._data_dir is not None:
            self._data_dir.mkdir(parents=True, exist_ok=True)
            self._master_secret = self._load_or_create_master_secret()
            self._load_snapshot_if_present()
        else:
            self._master_secret = secrets.token_hex(32)

    # -- users and sessions -------------------------------------------------

    def create_user(self, email: str, password: str) -> User:
        if not email or "@" not in email:
            raise ValueError("email must contain '@'")
        if len(password) < MIN_PASSWORD_LENGTH:
            raise WeakPassword(
                f"password must be at least {MIN_PASSWORD_LENGTH} characters")
        with self._lock:
            if email.lower() in self._users_by_email:
                raise EmailTaken(f"email {email!r} is already registered")
            user = User(id=uuid.uuid4().hex, email=email,
                        password_hash=_hash_password(password, **self._kdf),
                        created_at=int(self._clock()))
            self._users[user.id] = user
            self._users_by_email[email.lower()] = user.id
            self._persist()
            return user

    def authenticate(self, email: str, password: str) -> str:
        """Verify credentials and mint a session token."""
        with self._lock:
            user_id = self._users_by_email.get(email.lower())
            stored = (self._users[user_id].password_hash
                      if user_id else self._dummy_hash)
        ok = _verify_password(password, stored)
        if not ok or user_id is None:
            raise InvalidCredentials("unknown email or wrong password")
        token = secrets.token_hex(32)
        with self._lock:
            self._sessions[token] = (user_id, self._clock() + self._session_ttl)
        return token

    def resolve_session(self, token: str) -> Optional[str]:
        with self._lock:
            entry = self._sessions.get(token)
            if entry is None:
                return None
            user_id, expires_at = entry
            if self._clock() >= expires_at:
                del self._sessions[token]
                return None
            return user_id

    def get_user(self, user_id: str) -> User:
        with self._lock:
            user = self._users.get(user_id)
            if user is None:
                raise NoSuchUser(user_id)
            return user

    def find_user_by_email(self, email: str) -> Optional[User]:
        with self._lock:
            user_id = self._users_by_email.get(email.lower())
            return self._users.get(user_id) if user_id else None

    # -- networks -------------------------------------------------------

    def add_network(self, cfg: NetworkConfig) -> NetworkConfig:
        with self._lock:
            if cfg.id in self._networks:
                raise NetworkExists(cfg.id)
            self._networks[cfg.id] = cfg
            self._persist()
            return cfg

    def get_network(self, network_id: str) -> NetworkConfig:
        with self._lock:
            cfg = self._networks.get(network_id)
            if cfg is None:
                raise NoSuchNetwork(network_id)
            return cfg

    def list_networks(self) -> list:
        with self._lock:
            return sorted(self._networks.values(), key=lambda n: n.name)

    # -- applications -----------------------------------------------------

    def create_application(self, owner_id: str, name: str,
                           network_id: str) -> Application:
        if not name:
            raise ValueError("application name must not be empty")
        with self._lock:
            if owner_id not in self._users:
                raise NoSuchUser(owner_id)
            if network_id not in self._networks:
                raise NoSuchNetwork(network_id)
            for app in self._apps.values():
                if app.owner == owner_id and app.name == name:
                    raise AppNameTaken(f"you already have an application {name!r}")
            secret_scalar, address = generate_keypair()
            keystore = encrypt_key(secret_scalar, self._master_secret,
                                   kdf_n=self._kdf["n"], kdf_r=self._kdf["r"],
                                   kdf_p=self._kdf["p"])
            app = Application(
                id=uuid.uuid4().hex, name=name, owner=owner_id,
                network=network_id, deployer_keystore=keystore,
                deployer_address=address, created_at=int(self._clock()))
            self._apps[app.id] = app
            self._persist()
            return app

    def get_app(self, app_id: str) -> Application:
        with self._lock:
            app = self._apps.get(app_id)
            if app is None:
                raise NoSuchApp(app_id)
            return app

    def list_apps_for(self, user_id: str) -> list:
        with self._lock:
            return sorted(
                (app for app in self._apps.values()
                 if app.owner == user_id or user_id in app.shares),
                key=lambda a: a.created_at)

    def master_secret(self) -> str:
        return self._master_secret

    # -- authorization ------------------------------------------------------

    def role_of(self, app: Application, actor: Actor) -> Optional[Role]:
        if actor.is_api_key:
            return Role.CALLER if actor.api_key_app == app.id else None
        if actor.user_id == app.owner:
            return Role.OWNER
        return app.shares.get(actor.user_id)

    def require_role(self, app: Application, actor: Actor, minimum: Role) -> Role:
        role = self.role_of(app, actor)
        if role is None or role < minimum:
            raise NotAuthorized(
                f"requires {minimum.name.lower()} access to {app.name!r}")
        return role

    def share_application(self, app_id: str, grantor: Actor,
                          grantee_email: str, role: Role) -> Application:
        if role not in SHAREABLE_ROLES:
            raise InvalidShare(f"role {role.name.lower()} cannot be granted")
        with self._lock:
            app = self.get_app(app_id)
            self.require_role(app, grantor, Role.EDITOR)
            grantee = self.find_user_by_email(grantee_email)
            if grantee is None:
                raise NoSuchUser(grantee_email)
            if grantee.id == app.owner:
                raise InvalidShare("the owner already has full access")
            app.shares[grantee.id] = role  # overwrites any prior grant
            self._persist()
            return app

    # -- API keys -----------------------------------------------------------

    def create_api_key(self, app_id: str, actor: Actor, label: str) -> tuple:
        """Returns (plaintext token, ApiKey record); token is shown once."""
        with self._lock:
            app = self.get_app(app_id)
            self.require_role(app, actor, Role.EDITOR)
            token = secrets.token_hex(32)
            record = ApiKey(id=uuid.uuid4().hex, application=app.id,
                            key_hash=keccak256(token.encode("ascii")),
                            label=label, created_at=int(self._clock()))
            app.api_keys.append(record)
            self._keys_by_hash[record.key_hash] = record
            self._persist()
            return token, record

    def verify_api_key(self, token: str) -> Optional[ApiKey]:
        with self._lock:
            record = self._keys_by_hash.get(keccak256(token.encode("ascii")))
            if record is None or record.revoked:
                return None
            return record

    def revoke_api_key(self, app_id: str, actor: Actor, key_id: str) -> ApiKey:
        with self._lock:
            app = self.get_app(app_id)
            self.require_role(app, actor, Role.EDITOR)
            for record in app.api_keys:
                if record.id == key_id:
                    record.revoked = True
                    self._persist()
                    return record
            raise NoSuchKey(key_id)

    # -- contracts and versions ----------------------------------------------

    def get_contract(self, app: Application, name: str) -> Contract:
        contract = app.contracts.get(name)
        if contract is None:
            raise NoSuchContract(f"no contract {name!r} in {app.name!r}")
        return contract

    def register_version(self, app_id: str, contract_name: str, *,
                         address: bytes, abi_text: str, bytecode_hash: bytes,
                         deploy_tx: bytes, deployer: bytes) -> ContractVersion:
        """Append an immutable version record; first call creates the contract."""
        with self._lock:
            app = self.get_app(app_id)
            network_id = app.network
            for other in self._apps.values():
                if other.network != network_id:
                    continue
                for contract in other.contracts.values():
                    for version in contract.versions:
                        if version.address == address:
                            raise AddressCollision(to_hex(address))

            contract = app.contracts.get(contract_name)
            if contract is None:
                contract = Contract(id=uuid.uuid4().hex, application=app.id,
                                    name=contract_name)
                app.contracts[contract_name] = contract
            version = ContractVersion(
                version_no=len(contract.versions) + 1,
                address=address, abi_text=abi_text,
                bytecode_hash=bytecode_hash, deploy_tx=deploy_tx,
                deployed_at=int(self._clock()), deployer=deployer)
            contract.versions.append(version)
            contract.active_version = version.version_no
            self._persist()
            return version

    def resolve_target(self, app: Application, contract_name: str,
                       version: Optional[int] = None) -> tuple:
        """(address, functions) for a version; None means the active one."""
        contract = self.get_contract(app, contract_name)
        number = contract.active_version if version is None else version
        record = contract.version(number)
        return record.address, record.functions(), number

    def contract_details(self, app: Application, contract_name: str,
                         actor: Actor) -> dict:
        self.require_role(app, actor, Role.VIEWER)
        contract = self.get_contract(app, contract_name)
        active = contract.version(contract.active_version)
        return {
            "name": contract.name,
            "active_version": contract.active_version,
            "methods": active.functions(),
            "versions": list(contract.versions),
            "accounts": [app.deployer_address],
        }

    # -- persistence ----------------------------------------------------------

    def _load_or_create_master_secret(self) -> str:
        path = self._data_dir / MASTER_SECRET_FILENAME
        if path.exists():
            return path.read_text().strip()
        secret = secrets.token_hex(32)
        path.write_text(secret + "\n")
        os.chmod(path, 0o600)
        return secret

    def to_document(self) -> dict:
        with self._lock:
            return {
                "users": [
                    {"id": u.id, "email": u.email,
                     "password_hash": u.password_hash,
                     "created_at": u.created_at}
                    for u in sorted(self._users.values(), key=lambda u: u.id)
                ],
                "networks": [n.to_dict() for n in
                             sorted(self._networks.values(), key=lambda n: n.id)],
                "apps": [self._app_to_dict(a) for a in
                         sorted(self._apps.values(), key=lambda a: a.id)],
            }

    @staticmethod
    def _app_to_dict(app: Application) -> dict:
        return {
            "id": app.id, "name": app.name, "owner": app.owner,
            "network": app.network,
            "deployer_keystore": app.deployer_keystore.to_dict(),
            "deployer_address": to_hex(app.deployer_address),
            "created_at": app.created_at,
            "shares": {uid: role.name.lower() for uid, role in
                       sorted(app.shares.items())},
            "contracts": [
                {"id": c.id, "application": c.application, "name": c.name,
                 "active_version": c.active_version,
                 "versions": [v.to_dict() for v in c.versions]}
                for c in sorted(app.contracts.values(), key=lambda c: c.name)
            ],
            "api_keys": [
                {"id": k.id, "application": k.application,
                 "key_hash": to_hex(k.key_hash), "label": k.label,
                 "created_at": k.created_at, "revoked": k.revoked}
                for k in app.api_keys
            ],
        }

    def _restore_document(self, body: dict) -> None:
        self._users = {}
        self._users_by_email = {}
        self._networks = {}
        self._apps = {}
        self._keys_by_hash = {}
        for doc in body.get("users", []):
            user = User(id=doc["id"], email=doc["email"],
                        password_hash=doc["password_hash"],
                        created_at=doc["created_at"])
            self._users[user.id] = user
            self._users_by_email[user.email.lower()] = user.id
        for doc in body.get("networks", []):
            cfg = NetworkConfig.from_dict(doc)
            self._networks[cfg.id] = cfg
        for doc in body.get("apps", []):
            app = Application(
                id=doc["id"], name=doc["name"], owner=doc["owner"],
                network=doc["network"],
                deployer_keystore=EncryptedKeystore.from_dict(
                    doc["deployer_keystore"]),
                deployer_address=from_hex(doc["deployer_address"]),
                created_at=doc["created_at"],
                shares={uid: Role.parse(name)
                        for uid, name in doc.get("shares", {}).items()},
            )
            for cdoc in doc.get("contracts", []):
                contract = Contract(
                    id=cdoc["id"], application=cdoc["application"],
                    name=cdoc["name"], active_version=cdoc["active_version"],
                    versions=[ContractVersion.from_dict(v)
                              for v in cdoc["versions"]])
                app.contracts[contract.name] = contract
            for kdoc in doc.get("api_keys", []):
                record = ApiKey(id=kdoc["id"], application=kdoc["application"],
                                key_hash=from_hex(kdoc["key_hash"]),
                                label=kdoc["label"],
                                created_at=kdoc["created_at"],
                                revoked=kdoc["revoked"])
                app.api_keys.append(record)
                self._keys_by_hash[record.key_hash] = record
            self._apps[app.id] = app

    @staticmethod
    def _canonical(body: dict) -> bytes:
        return json.dumps(body, sort_keys=True, separators=(",", ":")).encode("utf-8")

    def save_snapshot(self) -> None:
        if self._data_dir is None:
            return
        body = self.to_document()
        canonical = self._canonical(body)
        document = {
            "format_version": SNAPSHOT_FORMAT_VERSION,
            "checksum": to_hex(keccak256(canonical)),
            "body": body,
        }
        target = self._data_dir / SNAPSHOT_FILENAME
        temp = self._data_dir / (SNAPSHOT_FILENAME + ".tmp")
        with open(temp, "w", encoding="utf-8") as fh:
            json.dump(document, fh, sort_keys=True)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(temp, target)

    def load_snapshot(self) -> None:
        path = self._data_dir / SNAPSHOT_FILENAME
        try:
            with open(path, encoding="utf-8") as fh:
                document = json.load(fh)
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise CorruptSnapshot(f"snapshot is not valid JSON: {exc}") from exc
        if not isinstance(document, dict):
            raise CorruptSnapshot("snapshot is not an object")
        if document.get("format_version") != SNAPSHOT_FORMAT_VERSION:
            raise CorruptSnapshot(
                f"unsupported format_version {document.get('format_version')!r}")
        body = document.get("body")
        if not isinstance(body, dict):
            raise CorruptSnapshot("snapshot has no body")
        expected = to_hex(keccak256(self._canonical(body)))
        if document.get("checksum") != expected:
            raise CorruptSnapshot("checksum mismatch")
        with self._lock:
            self._restore_document(body)

    def _load_snapshot_if_present(self) -> None:
        if (self._data_dir / SNAPSHOT_FILENAME).exists():
            self.load_snapshot()

    def _persist(self) -> None:
        """Write the snapshot; on failure roll back to the last good state."""
        if self._data_dir is None:
            return
        try:
            self.save_snapshot()
        except Exception:
            if (self._data_dir / SNAPSHOT_FILENAME).exists():
                self.load_snapshot()
            else:
                self._restore_document({})
            raise
