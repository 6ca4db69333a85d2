"""Thin command-line client for the engine service.

Verbs: eval, surface, learn, replay, serve.  By default the client talks to
an in-process instance of the service over an ASGI transport (no network,
same request/response path); point ``--server`` at a running instance to use
it instead.  Config files are posted as-is and validated server-side, so a
typo anywhere in the file is rejected with its path.
"""
from __future__ import annotations

import argparse
import asyncio
import json
import sys
from typing import Optional

import httpx
import yaml


class _InProcessTransport(httpx.BaseTransport):
    """Synchronous transport that drives an ASGI app in a private event
    loop, so the client code path is identical with and without a server."""

    def __init__(self, app) -> None:
        self._asgi = httpx.ASGITransport(app=app)

    def handle_request(self, request: httpx.Request) -> httpx.Response:
        async def call() -> httpx.Response:
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


def _load_config(path: Optional[str]) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except FileNotFoundError:
        raise SystemExit(f"error: config file not found: {path}")
    except yaml.YAMLError as exc:
        raise SystemExit(f"error: config file {path} is not valid YAML: {exc}")
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise SystemExit(f"error: config file {path} must contain a mapping at the top level")
    return data


def _client(server: Optional[str]) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server.rstrip("/"), timeout=None)
    from .service.app import create_app

    transport = _InProcessTransport(create_app())
    return httpx.Client(transport=transport, base_url="http://engine.local", timeout=None)


def _post(client: httpx.Client, path: str, payload: dict) -> dict:
    response = client.post(path, json=payload)
    if response.status_code >= 400:
        try:
            detail = response.json().get("detail", response.text)
        except Exception:
            detail = response.text
        raise SystemExit(f"error: {path} failed ({response.status_code}): {detail}")
    return response.json()


def _overrides(args) -> dict:
    out: dict = {}
    if getattr(args, "episodes", None) is not None:
        out["episodes"] = args.episodes
    if getattr(args, "seed", None) is not None:
        out["seed_base"] = args.seed
    if getattr(args, "out", None) is not None:
        out["out_dir"] = args.out
    return out


def _cmd_eval(args) -> int:
    config = _load_config(args.config)
    with _client(args.server) as client:
        body = _post(client, "/eval", {"config": config, "overrides": _overrides(args)})
    print(body["table_header"])
    print(body["table"])
    for name, path in sorted(body["files"].items()):
        print(f"{name}: {path}")
    return 0


def _cmd_surface(args) -> int:
    config = _load_config(args.config)
    with _client(args.server) as client:
        body = _post(client, "/surface", {"config": config, "overrides": _overrides(args)})
    print(
        f"surface: {body['n_points']} points, extent {body['extent']} m, "
        f"step {body['step']} m"
    )
    if body["path"]:
        print(f"file: {body['path']}")
    return 0


def _cmd_learn(args) -> int:
    config = _load_config(args.config)
    with _client(args.server) as client:
        body = _post(client, "/learn", {"config": config, "overrides": _overrides(args)})
    crossing = body["crossing_iteration"]
    print(f"iterations run: {body['iterations_run']}")
    print(f"target crossing iteration: {crossing if crossing is not None else 'not reached'}")
    print(f"best params: {json.dumps(body['best_params'], sort_keys=True)}")
    for name, path in sorted(body["files"].items()):
        print(f"{name}: {path}")
    return 0


def _cmd_replay(args) -> int:
    with _client(args.server) as client:
        body = _post(client, "/replay", {"records_path": args.records})
    print(json.dumps(body, sort_keys=True, indent=2))
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="info")
    return 0


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="gaussnav",
        description="Crowd-navigation engine client: evaluation campaigns, reward "
        "surfaces, learning campaigns, and record replay.",
    )
    parser.add_argument(
        "--server",
        default=None,
        help="base URL of a running engine service (default: run the engine in-process)",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p_eval = sub.add_parser("eval", help="run a seeded evaluation campaign")
    p_eval.add_argument("--config", default=None, help="YAML config file")
    p_eval.add_argument("--episodes", type=int, default=None, help="override episode count")
    p_eval.add_argument("--seed", type=int, default=None, help="override seed base")
    p_eval.add_argument("--out", default=None, help="output directory (on the service host)")
    p_eval.set_defaults(func=_cmd_eval)

    p_surface = sub.add_parser("surface", help="emit the penalty-surface grid")
    p_surface.add_argument("--config", default=None, help="YAML config file")
    p_surface.add_argument("--out", default=None, help="output directory (on the service host)")
    p_surface.set_defaults(func=_cmd_surface)

    p_learn = sub.add_parser("learn", help="run a learning campaign")
    p_learn.add_argument("--config", default=None, help="YAML config file")
    p_learn.add_argument("--out", default=None, help="output directory (on the service host)")
    p_learn.set_defaults(func=_cmd_learn)

    p_replay = sub.add_parser("replay", help="recompute metrics from a records file")
    p_replay.add_argument("--records", required=True, help="records.jsonl path (service host)")
    p_replay.set_defaults(func=_cmd_replay)

    p_serve = sub.add_parser("serve", help="run the engine service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8400)
    p_serve.set_defaults(func=_cmd_serve)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit:
        raise
    except httpx.HTTPError as exc:
        print(f"error: could not reach the engine service: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
