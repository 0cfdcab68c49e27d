"""Command-line entry point.

``serve`` and ``init`` work on the local data directory; every other
command is a thin wrapper over the REST API, so scripts exercise exactly
the surface the SDKs use.

Exit codes: 0 success, 1 usage error, 2 authentication failure,
3 server or network error.
"""

from __future__ import annotations

import json
import os
import sys
from typing import Optional

import click
import httpx

from .codec import to_hex
from .config import load_config
from .registry import CorruptSnapshot, Registry
from .service import Workbench
from .wallet import encrypt_key, generate_keypair

EXIT_USAGE = 1
EXIT_AUTH = 2
EXIT_SERVER = 3


class CommandFailed(Exception):
    def __init__(self, exit_code: int, message: str):
        super().__init__(message)
        self.exit_code = exit_code


@click.group()
def cli():
    """Smart-contract deployment and test workbench."""


@cli.command()
@click.option("--config", "config_path", type=click.Path(exists=True),
              default=None, help="Path to a key = value config file.")
def serve(config_path: Optional[str]):
    """Run the HTTP service."""
    import uvicorn

    from .http_api import create_app

    cfg = load_config(config_path)
    try:
        registry = Registry(cfg.data_dir)
    except CorruptSnapshot as exc:
        raise CommandFailed(EXIT_SERVER, f"refusing to start: {exc}") from exc
    workbench = Workbench(registry, poll_interval=cfg.poll_interval,
                          poll_timeout=cfg.poll_timeout)
    app = create_app(workbench, cors_origins=[cfg.cors_origin])
    uvicorn.run(app, host=cfg.bind, port=cfg.port, log_level=cfg.log_level)


@cli.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--email", required=True)
@click.option("--password", required=True)
def init(config_path: Optional[str], email: str, password: str):
    """Create the first user account without going through HTTP."""
    cfg = load_config(config_path)
    try:
        registry = Registry(cfg.data_dir)
    except CorruptSnapshot as exc:
        raise CommandFailed(EXIT_SERVER, f"refusing to start: {exc}") from exc
    user = registry.create_user(email, password)
    click.echo(json.dumps({"user_id": user.id, "email": user.email}))


@cli.command()
@click.option("--passphrase", required=True,
              help="Passphrase protecting the printed keystore.")
def keygen(passphrase: str):
    """Generate a keypair and print address plus encrypted keystore."""
    secret, address = generate_keypair()
    keystore = encrypt_key(secret, passphrase)
    click.echo(json.dumps({"address": to_hex(address),
                           "keystore": keystore.to_dict()}, indent=2))


def _common_api_options(fn):
    fn = click.option("--url", required=True, help="Service base URL.")(fn)
    fn = click.option("--token", default=None, help="Session token.")(fn)
    fn = click.option("--api-key", default=None, help="Application API key.")(fn)
    fn = click.option("--json", "json_output", is_flag=True,
                      help="Print the raw JSON response.")(fn)
    return fn


def _request(method: str, url: str, path: str, *, token: Optional[str],
             api_key: Optional[str], body: Optional[dict] = None) -> dict:
    headers = {}
    if token:
        headers["Authorization"] = f"Bearer {token}"
    elif api_key:
        headers["X-API-Key"] = api_key
    try:
        response = httpx.request(method, url.rstrip("/") + path,
                                 json=body, headers=headers, timeout=30.0)
    except httpx.HTTPError as exc:
        raise CommandFailed(EXIT_SERVER, f"cannot reach {url}: {exc}") from exc
    if response.status_code in (401, 403):
        raise CommandFailed(EXIT_AUTH, response.text)
    if response.status_code >= 400:
        raise CommandFailed(EXIT_SERVER, response.text)
    return response.json()


def _emit(payload: dict, json_output: bool, human: str) -> None:
    if json_output:
        click.echo(json.dumps(payload))
    else:
        click.echo(human)


def _load_args(args_json: str) -> list:
    try:
        parsed = json.loads(args_json)
    except json.JSONDecodeError as exc:
        raise click.UsageError(f"--args is not valid JSON: {exc}") from exc
    if not isinstance(parsed, list):
        raise click.UsageError("--args must be a JSON array")
    return parsed


@cli.command()
@_common_api_options
@click.option("--app", "app_id", required=True)
@click.option("--name", required=True, help="Contract name.")
@click.option("--abi", "abi_path", required=True, type=click.Path(exists=True),
              help="Path to the ABI JSON file.")
@click.option("--bytecode", required=True,
              help="0x-hex bytecode, or a path to a file holding it.")
@click.option("--args", "args_json", default="[]",
              help="Constructor arguments as a JSON array.")
@click.option("--new-version", is_flag=True,
              help="Deploy as a new version of an existing contract.")
def deploy(url, token, api_key, json_output, app_id, name, abi_path,
           bytecode, args_json, new_version):
    """Upload a compiled artifact and deploy it."""
    with open(abi_path, encoding="utf-8") as fh:
        abi_text = fh.read()
    if os.path.exists(bytecode):
        with open(bytecode, encoding="utf-8") as fh:
            bytecode = fh.read().strip()
    body = {"abi": abi_text, "bytecode": bytecode,
            "constructor_args": _load_args(args_json)}
    if new_version:
        path = f"/api/v1/apps/{app_id}/contracts/{name}/versions"
    else:
        path = f"/api/v1/apps/{app_id}/contracts"
        body["name"] = name
    result = _request("POST", url, path, token=token, api_key=api_key, body=body)
    _emit(result, json_output,
          f"deployed {name} version {result['version']} at {result['address']}")


@cli.command()
@_common_api_options
@click.option("--app", "app_id", required=True)
@click.option("--contract", required=True)
@click.option("--method", required=True)
@click.option("--args", "args_json", default="[]")
@click.option("--version", type=int, default=None)
def invoke(url, token, api_key, json_output, app_id, contract, method,
           args_json, version):
    """Send a state-changing transaction and wait for its receipt."""
    body = {"method": method, "args": _load_args(args_json), "version": version}
    result = _request("POST", url,
                      f"/api/v1/apps/{app_id}/contracts/{contract}/invoke",
                      token=token, api_key=api_key, body=body)
    _emit(result, json_output,
          f"{method}: {result['receipt']['status']} tx {result['tx_hash']}")


@cli.command()
@_common_api_options
@click.option("--app", "app_id", required=True)
@click.option("--contract", required=True)
@click.option("--method", required=True)
@click.option("--args", "args_json", default="[]")
@click.option("--version", type=int, default=None)
def call(url, token, api_key, json_output, app_id, contract, method,
         args_json, version):
    """Execute a read-only method and print its outputs."""
    body = {"method": method, "args": _load_args(args_json), "version": version}
    result = _request("POST", url,
                      f"/api/v1/apps/{app_id}/contracts/{contract}/call",
                      token=token, api_key=api_key, body=body)
    values = [o["value"] for o in result["outputs"]]
    _emit(result, json_output, f"{method} -> {json.dumps(values)}")


@cli.command()
@_common_api_options
@click.option("--app", "app_id", required=True)
@click.option("--contract", required=True)
def details(url, token, api_key, json_output, app_id, contract):
    """Show a contract's methods, versions, and accounts."""
    result = _request("GET", url,
                      f"/api/v1/apps/{app_id}/contracts/{contract}",
                      token=token, api_key=api_key)
    lines = [f"{contract} (active version {result['active_version']})"]
    for method in result["methods"]:
        lines.append(f"  {method['signature']} [{method['mutability']}]")
    for version in result["versions"]:
        marker = "*" if version["active"] else " "
        lines.append(f"  v{version['version']}{marker} {version['address']}")
    lines.append(f"  accounts: {', '.join(result['accounts'])}")
    _emit(result, json_output, "\n".join(lines))


def main(argv: Optional[list] = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.UsageError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE
    except click.exceptions.Abort:
        return EXIT_USAGE
    except CommandFailed as exc:
        click.echo(f"error: {exc}", err=True)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
