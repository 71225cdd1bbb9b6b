"""Bayesian trust model for fault-tolerant event region detection."""

import json

from ._btm import *  # noqa: F401,F403
from ._btm import Scenario


def scenario(overrides=None):
    """Build a Scenario from a dict of overrides; omitted fields keep their defaults."""
    return Scenario.from_json(json.dumps(overrides or {}))


def scenario_dict(config):
    return json.loads(config.to_json())
