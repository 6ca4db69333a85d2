"""RL-convention environment client for the crowd-navigation engine service.

One ``CrowdNavEnv`` owns one engine-side episode context (a session) and
speaks the standard reset/step calling convention: ``reset(seed)`` returns
``(observation, info)``; ``step(action)`` returns ``(observation, reward,
terminated, truncated, info)`` where terminal goal/collision map to
``terminated`` and the time limit maps to ``truncated``.

The bridge adds no logic of its own: observations arrive already flattened
by the engine (per the versioned layout descriptor checked at construction)
and every number is passed through unchanged.
"""
from __future__ import annotations

from typing import Any, Optional, Sequence

import httpx
import numpy as np

__all__ = ["BridgeError", "CrowdNavEnv"]

SUPPORTED_LAYOUT_VERSION = 1


class BridgeError(RuntimeError):
    """Engine-side failure or bridge misuse, with the engine diagnostic."""


class CrowdNavEnv:
    """Client for one engine episode context.

    Parameters
    ----------
    base_url:
        Address of a running engine service, e.g. ``http://localhost:8400``.
    world, reward:
        Optional config mappings forwarded verbatim to the engine (the
        engine owns validation; unknown keys are rejected there).
    predictor:
        ``none``, ``const_vel`` or ``ground_truth``.
    client:
        Optional pre-built ``httpx.Client`` (overrides ``base_url``); used
        for in-process transports in tests.
    """

    def __init__(
        self,
        base_url: Optional[str] = None,
        world: Optional[dict] = None,
        reward: Optional[dict] = None,
        predictor: str = "const_vel",
        client: Optional[httpx.Client] = None,
    ):
        if client is None:
            if base_url is None:
                raise BridgeError("either base_url or client is required")
            client = httpx.Client(base_url=base_url.rstrip("/"), timeout=60.0)
            self._owns_client = True
        else:
            self._owns_client = False
        self._client = client
        self._closed = False

        body = self._post(
            "/sessions",
            {"world": world or {}, "reward": reward or {}, "predictor": predictor},
        )
        self.session_id: str = body["session_id"]
        self.layout: dict[str, Any] = body["layout"]
        self.config: dict[str, Any] = body["config"]
        if self.layout.get("version") != SUPPORTED_LAYOUT_VERSION:
            raise BridgeError(
                f"engine observation layout version {self.layout.get('version')!r} "
                f"is not supported (bridge expects {SUPPORTED_LAYOUT_VERSION})"
            )
        self.observation_size: int = self.layout["length"]
        self.action_size: int = 2

    # -- plumbing --------------------------------------------------------

    def _post(self, path: str, payload: dict) -> dict:
        if self._closed:
            raise BridgeError("environment is closed")
        try:
            response = self._client.post(path, json=payload)
        except httpx.HTTPError as exc:
            raise BridgeError(f"engine service unreachable: {exc}") from exc
        if response.status_code >= 400:
            try:
                detail = response.json().get("detail", response.text)
            except Exception:
                detail = response.text
            raise BridgeError(f"engine rejected {path} ({response.status_code}): {detail}")
        return response.json()

    def _observation(self, values: Sequence[float]) -> np.ndarray:
        array = np.asarray(values, dtype=np.float64)
        if array.shape != (self.observation_size,):
            raise BridgeError(
                f"engine returned an observation of length {array.shape}, "
                f"layout promises {self.observation_size}"
            )
        return array

    # -- RL calling convention --------------------------------------------

    def reset(self, seed: Optional[int] = None) -> tuple[np.ndarray, dict]:
        body = self._post(f"/sessions/{self.session_id}/reset", {"seed": seed})
        return self._observation(body["observation"]), body["info"]

    def step(self, action: Sequence[float]) -> tuple[np.ndarray, float, bool, bool, dict]:
        a = np.asarray(action, dtype=np.float64).reshape(-1)
        if a.shape != (2,):
            raise BridgeError(f"action must have 2 components, got shape {a.shape}")
        body = self._post(
            f"/sessions/{self.session_id}/step", {"action": [float(a[0]), float(a[1])]}
        )
        return (
            self._observation(body["observation"]),
            body["reward"],
            body["terminated"],
            body["truncated"],
            body["info"],
        )

    def close(self) -> None:
        if self._closed:
            return
        try:
            self._client.delete(f"/sessions/{self.session_id}")
        except httpx.HTTPError:
            pass  # closing a dead server is not an error
        finally:
            if self._owns_client:
                self._client.close()
            self._closed = True

    def __enter__(self) -> "CrowdNavEnv":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
