"""Python access to the telecell simulator core.

Configs, inputs and metrics are plain dicts; telemetry is the .jsonl text the
command-line tool writes.
"""

import json

from . import _telecell
from ._telecell import Channel, ConfigError, OrderingError, SchemaError, SimFault

__all__ = [
    "Channel",
    "ConfigError",
    "OrderingError",
    "SchemaError",
    "Session",
    "SimFault",
    "admittance_accel",
    "canonicalize",
    "master_command",
    "metrics",
    "replay_verify",
    "run",
    "run_scenario",
    "sweep",
    "task_config",
]

admittance_accel = _telecell.admittance_accel
master_command = _telecell.master_command
schema_version = _telecell.schema_version


def canonicalize(config):
    return json.loads(_telecell.canonicalize(json.dumps(config)))


def run(config, inputs=None):
    """Headless run. `inputs` maps tick -> list of live input dicts. Returns telemetry text."""
    text = json.dumps({str(k): v for k, v in inputs.items()}) if inputs else ""
    return _telecell.run(json.dumps(config), text)


def metrics(telemetry):
    return json.loads(_telecell.metrics(telemetry))


def replay_verify(telemetry):
    return json.loads(_telecell.replay_verify(telemetry))


def run_scenario(config, overrides=None):
    """Returns (telemetry text, metrics dict)."""
    text, report = _telecell.run_scenario(json.dumps(config), json.dumps(overrides) if overrides else "")
    return text, json.loads(report)


def task_config(task):
    return json.loads(_telecell.task_config(task))


def sweep(base, axes, workers=1):
    """`axes` are "path=v1,v2" strings. Returns the summary CSV text."""
    return _telecell.sweep(json.dumps(base), list(axes), workers)


class Session:
    """Tick-by-tick session; records come back as dicts."""

    def __init__(self, config):
        self._s = _telecell.Session(json.dumps(config))

    def submit(self, event):
        self._s.submit(json.dumps(event))

    def step(self):
        return json.loads(self._s.step())

    @property
    def finished(self):
        return self._s.finished

    @property
    def ticks_done(self):
        return self._s.ticks_done

    def mode(self, arm=0):
        return self._s.mode(arm)

    def telemetry(self):
        return self._s.telemetry()
