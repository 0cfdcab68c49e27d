"""Shared fixtures: a fully wired service behind a FastAPI test client."""

import json
import threading
import time

import pytest
from fastapi.testclient import TestClient

from dappbench.http_api import create_app
from dappbench.registry import Registry
from dappbench.service import Workbench

FAST_KDF = dict(kdf_n=2 ** 8, kdf_r=8, kdf_p=1)

DEMO_ABI = [
    {"type": "function", "name": "get", "inputs": [],
     "outputs": [{"type": "uint256"}], "stateMutability": "view"},
    {"type": "function", "name": "set",
     "inputs": [{"name": "x", "type": "uint256"}], "outputs": [],
     "stateMutability": "nonpayable"},
    {"type": "function", "name": "bump", "inputs": [], "outputs": [],
     "stateMutability": "nonpayable"},
]
DEMO_ABI_TEXT = json.dumps(DEMO_ABI)
DEMO_BYTECODE = "0x6080604052600a600055"


class Harness:
    """A test client plus convenience calls for the common setup steps."""

    def __init__(self, data_dir=None, **workbench_kwargs):
        self.registry = Registry(data_dir, **FAST_KDF)
        self.workbench = Workbench(self.registry, **workbench_kwargs)
        self.app = create_app(self.workbench)
        self.client = TestClient(self.app, raise_server_exceptions=False)

    def register(self, email, password="password1"):
        return self.client.post("/api/v1/auth/register",
                                json={"email": email, "password": password})

    def login(self, email, password="password1") -> str:
        response = self.client.post("/api/v1/auth/login",
                                    json={"email": email, "password": password})
        assert response.status_code == 200, response.text
        return response.json()["token"]

    def signup(self, email, password="password1") -> str:
        assert self.register(email, password).status_code == 201
        return self.login(email, password)

    @staticmethod
    def auth(token) -> dict:
        return {"Authorization": f"Bearer {token}"}

    def add_mock_network(self, token, chain_id=1337, name="devnet") -> str:
        response = self.client.post(
            "/api/v1/networks",
            json={"name": name, "kind": "mock", "chain_id": chain_id},
            headers=self.auth(token))
        assert response.status_code == 201, response.text
        return response.json()["network"]["id"]

    def create_app_record(self, token, network_id, name="demo") -> dict:
        response = self.client.post(
            "/api/v1/apps", json={"name": name, "network_id": network_id},
            headers=self.auth(token))
        assert response.status_code == 201, response.text
        return response.json()

    def deploy_demo(self, token, app_id, name="storage") -> dict:
        response = self.client.post(
            f"/api/v1/apps/{app_id}/contracts",
            json={"name": name, "abi": DEMO_ABI, "bytecode": DEMO_BYTECODE,
                  "constructor_args": []},
            headers=self.auth(token))
        assert response.status_code == 201, response.text
        return response.json()


@pytest.fixture
def harness():
    return Harness()


class LiveServer:
    """The FastAPI app served by a real uvicorn listener on a random port."""

    def __init__(self, harness: Harness):
        import uvicorn

        self.harness = harness
        config = uvicorn.Config(harness.app, host="127.0.0.1", port=0,
                                log_level="warning")
        self._server = uvicorn.Server(config)
        self._thread = threading.Thread(target=self._server.run, daemon=True)
        self._thread.start()
        deadline = time.monotonic() + 10
        while not self._server.started:
            if time.monotonic() > deadline:
                raise RuntimeError("server did not start")
            time.sleep(0.01)
        port = self._server.servers[0].sockets[0].getsockname()[1]
        self.base_url = f"http://127.0.0.1:{port}"

    def stop(self):
        self._server.should_exit = True
        self._thread.join(timeout=10)


@pytest.fixture
def live_server():
    server = LiveServer(Harness())
    yield server
    server.stop()
