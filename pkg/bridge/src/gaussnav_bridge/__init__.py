"""RL-convention client for the crowd-navigation engine service."""

__version__ = "0.1.0"

from .env import BridgeError, CrowdNavEnv

__all__ = ["BridgeError", "CrowdNavEnv"]
