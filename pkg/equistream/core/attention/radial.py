from dataclasses import dataclass
from typing import Callable

import numpy as np

from equistream.core.config import RadialCfg

RadialFn = Callable[[np.ndarray], np.ndarray]

biases = {}
gates = {}


def register_bias(name: str):
    """
    Register a bias function ``b(r, r_cut)`` with the given name(decorator).

    Args:
        name(str): name of the bias
    """

    def wrapper(fn):
        biases[name] = fn
        return fn

    return wrapper


def register_gate(name: str):
    """
    Register a gate function ``phi(r, r_cut)`` with the given name(decorator).

    Args:
        name(str): name of the gate
    """

    def wrapper(fn):
        gates[name] = fn
        return fn

    return wrapper


@register_bias('zero')
def zero_bias(r: np.ndarray, r_cut: float) -> np.ndarray:
    return np.zeros_like(r)


@register_bias('distance')
def distance_bias(r: np.ndarray, r_cut: float) -> np.ndarray:
    return np.array(r, dtype=np.float64)


@register_gate('cosine')
def cosine_gate(r: np.ndarray, r_cut: float) -> np.ndarray:
    r = np.asarray(r, dtype=np.float64)
    return np.where(r < r_cut, 0.5 * (np.cos(np.pi * r / r_cut) + 1.0), 0.0)


@register_gate('one')
def unit_gate(r: np.ndarray, r_cut: float) -> np.ndarray:
    return np.ones_like(r, dtype=np.float64)


@dataclass(frozen=True)
class RadialScalars:
    """Score bias ``b(r)`` and value gate ``phi(r)``; both take an array of distances."""

    bias: RadialFn
    gate: RadialFn

    def evaluate(self, distances: np.ndarray, mask: np.ndarray):
        """Bias and gate per slot; padding slots get ``b = 0`` and ``phi = 0``."""
        b = np.where(mask, self.bias(distances), 0.0)
        phi = np.where(mask, self.gate(distances), 0.0)
        return b, phi


def create_radial(config: RadialCfg = None) -> RadialScalars:
    config = config or RadialCfg()
    if config.bias not in biases:
        raise KeyError(f'The bias {config.bias} is not registered, please register it using `@register_bias`')
    if config.gate not in gates:
        raise KeyError(f'The gate {config.gate} is not registered, please register it using `@register_gate`')
    bias_fn, gate_fn, r_cut = biases[config.bias], gates[config.gate], config.r_cut
    return RadialScalars(bias=lambda r: bias_fn(r, r_cut), gate=lambda r: gate_fn(r, r_cut))


def slot_scalars(idx, radial: RadialScalars = None):
    """``(b, phi)`` of shape ``(n_targets, K)``.

    Without distances the bias is 0 and the gate 1 on valid slots.
    """
    mask = idx.mask
    if idx.distances is None:
        return np.zeros(mask.shape), mask.astype(np.float64)
    radial = radial or create_radial()
    return radial.evaluate(idx.distances, mask)
