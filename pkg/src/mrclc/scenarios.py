"""Named scenarios built from flat dotted-key parameter tables.

Each scenario is a table of defaults plus a builder; overrides use the same
keys, e.g. ``{"controller.k_w": 0.0}``.
"""

import numpy as np

from .control import ControllerConfig
from .dynamics import PlantModel, ReferenceModel, ReferenceSignal, get_basis
from .errors import UnknownKey, UnknownScenario
from .simulation import Scenario

PENDULUM_DEFAULTS = {
    "scenario.duration": 40.0,
    "scenario.h": 0.001,
    "scenario.output_period": 0.01,
    "scenario.noise": 0.0,
    "scenario.seed": 0,
    "scenario.x0": [1.0, 1.0],
    "scenario.xr0": [1.0, 1.0],
    "scenario.W0": [0.0, 0.0, 0.0],
    "scenario.derivative_source": "filter",
    "scenario.divergence_limit": 1e6,
    "plant.Lam": [[0.0, 1.0], [0.0, 0.0]],
    "plant.W_true": [1.0, -1.0, 0.5],
    "plant.basis": "inverted_pendulum",
    "reference.A_r": [[0.0, 1.0], [-1.0, -2.0]],
    "reference.b_r": 1.0,
    "reference.r_start": 20.0,
    "reference.r_end": 25.0,
    "reference.r_value": 1.0,
    "controller.k_e": [1.5, 1.3],
    "controller.Q": 10.0,
    "controller.gamma": 3.5,
    "controller.k_w": 6.0,
    "controller.c_w": 5.0,
    "controller.tau_d": 5.0,
    "controller.omega": 100.0,
    "controller.zeta": 0.7,
    "controller.sigma_eval_period": 0.05,
    "controller.stack_capacity": 10,
    "controller.stack_threshold": 1e-6,
    "controller.record_start": 0.5,
}

_STRING_KEYS = {"plant.basis", "scenario.derivative_source"}
_INT_KEYS = {"scenario.seed", "controller.stack_capacity"}


def _as_matrix(value, n):
    """Scalar q means q*I; a flat list of n*n entries is read row-major."""
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        return float(arr) * np.eye(n)
    return arr.reshape(n, n)


def build_pendulum(params, law="composite"):
    p = params
    Lam = np.asarray(p["plant.Lam"], dtype=float)
    n = Lam.shape[0]
    r_start, r_end = p["reference.r_start"], p["reference.r_end"]
    segments = ((r_start, r_end, p["reference.r_value"]),) if r_end > r_start else ()
    reference = ReferenceModel(
        A_r=_as_matrix(p["reference.A_r"], n),
        b_r=float(p["reference.b_r"]),
        signal=ReferenceSignal(segments=segments, default=0.0),
    )
    plant = PlantModel(Lam=Lam, W_true=p["plant.W_true"], basis=get_basis(p["plant.basis"]))
    controller = ControllerConfig.design(
        Lam, reference.A_r, reference.b_r,
        k_e=p["controller.k_e"],
        Q=_as_matrix(p["controller.Q"], n),
        gamma=float(p["controller.gamma"]),
        k_w=float(p["controller.k_w"]),
        c_w=float(p["controller.c_w"]),
        tau_d=float(p["controller.tau_d"]),
        omega=float(p["controller.omega"]),
        zeta=float(p["controller.zeta"]),
        sigma_eval_period=float(p["controller.sigma_eval_period"]),
        stack_capacity=int(p["controller.stack_capacity"]),
        stack_threshold=float(p["controller.stack_threshold"]),
        record_start=float(p["controller.record_start"]),
    )
    return Scenario(
        name="inverted_pendulum",
        plant=plant,
        reference=reference,
        controller=controller,
        x0=p["scenario.x0"],
        xr0=p["scenario.xr0"],
        W0=p["scenario.W0"],
        duration=float(p["scenario.duration"]),
        h=float(p["scenario.h"]),
        law=law,
        noise=float(p["scenario.noise"]),
        seed=int(p["scenario.seed"]),
        output_period=float(p["scenario.output_period"]),
        derivative_source=p["scenario.derivative_source"],
        divergence_limit=float(p["scenario.divergence_limit"]),
    )


REGISTRY = {
    "inverted_pendulum": (PENDULUM_DEFAULTS, build_pendulum),
}


def default_params(name):
    try:
        return dict(REGISTRY[name][0])
    except KeyError:
        raise UnknownScenario(f"unknown scenario {name!r}; available: {', '.join(sorted(REGISTRY))}") from None


def coerce(key, value, defaults):
    """Convert a raw override (string or number) to the type of the default at ``key``."""
    if key not in defaults:
        raise UnknownKey(f"unknown key {key!r}; valid keys: {', '.join(sorted(defaults))}")
    if not isinstance(value, str):
        return value
    if key in _STRING_KEYS:
        return value.strip()
    if key in _INT_KEYS:
        return int(value)
    default = defaults[key]
    text = value.strip().strip("[]")
    if isinstance(default, list) or "," in text:
        nums = [float(tok) for tok in text.replace(";", ",").split(",") if tok.strip()]
        if isinstance(default, list) and default and isinstance(default[0], list):
            size = len(default)
            if len(nums) == 1:
                return nums[0]
            return np.asarray(nums).reshape(size, size).tolist()
        return nums
    return float(text)


def build_scenario(name="inverted_pendulum", law="composite", overrides=None):
    defaults, builder = REGISTRY.get(name, (None, None))
    if builder is None:
        raise UnknownScenario(f"unknown scenario {name!r}; available: {', '.join(sorted(REGISTRY))}")
    params = dict(defaults)
    for key, value in (overrides or {}).items():
        params[key] = coerce(key, value, defaults)
    return builder(params, law=law)
