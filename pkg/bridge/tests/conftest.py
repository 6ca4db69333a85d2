"""Shared fixtures: an in-process engine client (ASGI, no sockets) and a
live uvicorn server for socket-level smoke tests."""
import asyncio
import socket
import threading
import time

import httpx
import pytest
import uvicorn

from gaussnav.service.app import create_app


class InProcessTransport(httpx.BaseTransport):
    """Synchronous httpx transport driving the engine ASGI app directly."""

    def __init__(self, app):
        self._asgi = httpx.ASGITransport(app=app)

    def handle_request(self, request):
        async def call():
            response = await self._asgi.handle_async_request(request)
            await response.aread()
            return response

        response = asyncio.run(call())
        return httpx.Response(
            status_code=response.status_code,
            headers=response.headers,
            content=response.content,
            request=request,
        )


@pytest.fixture()
def engine_app():
    return create_app()


@pytest.fixture()
def engine_client(engine_app):
    with httpx.Client(
        transport=InProcessTransport(engine_app), base_url="http://engine.local", timeout=None
    ) as client:
        yield client


@pytest.fixture(scope="module")
def live_server_url():
    with socket.socket() as probe:
        probe.bind(("127.0.0.1", 0))
        port = probe.getsockname()[1]
    config = uvicorn.Config(create_app(), host="127.0.0.1", port=port, log_level="warning")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 10.0
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("engine server did not start in time")
        time.sleep(0.02)
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=5.0)
