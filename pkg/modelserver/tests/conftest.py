"""Fixtures: live uvicorn servers on free ports (stub and bare modes)."""

from __future__ import annotations

import socket
import threading
import time

import pytest
import uvicorn

from modelserver.server import ServerState, create_app


def _free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


class LiveServer:
    """uvicorn in a daemon thread; `url` is valid once start() returns."""

    def __init__(self, state: ServerState):
        self.port = _free_port()
        self.url = f"http://127.0.0.1:{self.port}"
        config = uvicorn.Config(
            create_app(state), host="127.0.0.1", port=self.port, log_level="error"
        )
        self.server = uvicorn.Server(config)
        self.thread = threading.Thread(target=self.server.run, daemon=True)

    def start(self) -> "LiveServer":
        self.thread.start()
        deadline = time.monotonic() + 10.0
        while not self.server.started:
            if time.monotonic() > deadline or not self.thread.is_alive():
                raise RuntimeError("server thread failed to start")
            time.sleep(0.01)
        return self

    def stop(self) -> None:
        self.server.should_exit = True
        self.thread.join(timeout=10.0)


@pytest.fixture(scope="session")
def stub_server():
    server = LiveServer(ServerState(stub=True)).start()
    yield server
    server.stop()


@pytest.fixture(scope="session")
def bare_server():
    server = LiveServer(ServerState(stub=False)).start()
    yield server
    server.stop()
