"""Boots the real service in-process; the SDK talks to it over HTTP only."""

import threading
import time

import pytest
import uvicorn

from dappbench.http_api import create_app
from dappbench.registry import Registry
from dappbench.service import Workbench

FAST_KDF = dict(kdf_n=2 ** 8, kdf_r=8, kdf_p=1)


class RunningService:
    def __init__(self, data_dir=None):
        self.data_dir = data_dir
        self.registry = Registry(data_dir, **FAST_KDF)
        self.workbench = Workbench(self.registry)
        config = uvicorn.Config(create_app(self.workbench), host="127.0.0.1",
                                port=0, log_level="warning")
        self._server = uvicorn.Server(config)
        self._thread = threading.Thread(target=self._server.run, daemon=True)
        self._thread.start()
        deadline = time.monotonic() + 10
        while not self._server.started:
            if time.monotonic() > deadline:
                raise RuntimeError("service did not start")
            time.sleep(0.01)
        port = self._server.servers[0].sockets[0].getsockname()[1]
        self.base_url = f"http://127.0.0.1:{port}"

    def stop(self):
        self._server.should_exit = True
        self._thread.join(timeout=10)


@pytest.fixture
def service():
    running = RunningService()
    yield running
    running.stop()


@pytest.fixture
def restartable_service(tmp_path):
    """Service factory bound to one data dir, for restart scenarios."""
    data_dir = str(tmp_path / "wb")
    running = {"current": RunningService(data_dir)}

    def restart():
        running["current"].stop()
        running["current"] = RunningService(data_dir)
        return running["current"]

    yield running["current"], restart
    running["current"].stop()
