"""Place-cell layer: membrane dynamics, competitive field formation, traces.

A place cell integrates weighted excitation from boundary-vector cells
against feedforward inhibition (proportional to total BVC activity) and
global recurrent inhibition (proportional to total place-cell activity on
the previous step). Firing is tanh of the rectified membrane, so rates live
in [0, 1). Receptive fields are not hand-placed: they emerge because the
input weights start as a sparse random mask and then adapt by a normalizing
Hebbian rule, so each cell comes to win in the region whose boundary
signature best matches its weights.

Exponential activity traces of place and head-direction cells provide the
short temporal memory that lets the adjacency learning rule (see
`adjacency`) detect which cell was active just before which.

Integration is forward Euler with all time constants expressed in
simulation steps.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class PlasticityConfig:
    """Learning-rule constants, all time constants in simulation steps."""

    tau_w_pb: float = 60.0     # input-weight learning time constant
    alpha_pb: float = 8.0      # Hebbian normalization factor
    p_pb: float = 0.25         # probability an input synapse starts at 1
    tau_m: float = 5.0         # activity-trace time constant
    tau_w_pp: float = 8.0      # adjacency learning time constant
    dt: float = 1.0            # integration step

    def __post_init__(self):
        if min(self.tau_w_pb, self.tau_m, self.tau_w_pp) <= 0:
            raise ValueError("time constants must be > 0")
        if not 0.0 < self.p_pb <= 1.0:
            raise ValueError("p_pb must be in (0, 1]")


@dataclass
class PlaceLayer:
    """One scale's place-cell population and its input weights."""

    n_p: int
    n_b: int
    w_pb: np.ndarray                 # (n_p, n_b) BVC -> PC weights, >= 0
    tau_p: float = 1.0               # membrane time constant (steps)
    gamma_pb: float = 0.35           # feedforward inhibition gain
    gamma_pp: float = 0.02           # recurrent inhibition gain
    psi: float = 3.0                 # firing-rate gain
    membrane: np.ndarray = field(init=False)
    rates: np.ndarray = field(init=False)

    def __post_init__(self):
        self.w_pb = np.asarray(self.w_pb, dtype=float)
        if self.w_pb.shape != (self.n_p, self.n_b):
            raise ValueError("w_pb must be (n_p, n_b)")
        self.membrane = np.zeros(self.n_p)
        self.rates = np.zeros(self.n_p)

    def reset_activity(self) -> None:
        self.membrane[:] = 0.0
        self.rates[:] = 0.0


@dataclass
class TraceState:
    """Exponential traces of place-cell and head-direction activity."""

    pc: np.ndarray
    hd: np.ndarray

    @classmethod
    def zeros(cls, n_p: int, n_hd: int) -> "TraceState":
        return cls(pc=np.zeros(n_p), hd=np.zeros(n_hd))

    def reset(self) -> None:
        self.pc[:] = 0.0
        self.hd[:] = 0.0


def init_place_layer(
    n_p: int,
    n_b: int,
    config: PlasticityConfig,
    seed: int | np.random.Generator,
    **layer_kwargs,
) -> PlaceLayer:
    """Fresh layer with each input synapse set to 1 with probability p_pb."""
    if n_p < 1 or n_b < 1:
        raise ValueError("n_p and n_b must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    w = (rng.random((n_p, n_b)) < config.p_pb).astype(float)
    return PlaceLayer(n_p=n_p, n_b=n_b, w_pb=w, **layer_kwargs)


def pc_step(layer: PlaceLayer, bvc_rates: np.ndarray, dt: float = 1.0) -> np.ndarray:
    """One Euler step of the membrane; returns the new rate vector.

    The recurrent-inhibition term uses the previous step's rates (a
    Jacobi-style update), so results do not depend on cell ordering.
    """
    if not dt > 0:
        raise ValueError("dt must be > 0")
    drive = (
        layer.w_pb @ bvc_rates
        - layer.gamma_pb * bvc_rates.sum()
        - layer.gamma_pp * layer.rates.sum()
    )
    layer.membrane += (dt / layer.tau_p) * (-layer.membrane + drive)
    layer.rates = np.tanh(layer.psi * np.maximum(layer.membrane, 0.0))
    return layer.rates


def oja_update(
    layer: PlaceLayer,
    bvc_rates: np.ndarray,
    dt: float,
    config: PlasticityConfig,
) -> np.ndarray:
    """Normalizing Hebbian update of the input weights.

    dW_ij ~ v_i^p (v_j^b - v_i^p W_ij / alpha); the decay term bounds each
    weight near alpha * v_b / v_p for persistently co-active pairs. Discrete
    steps can transiently push weights negative, so entries are clamped at
    zero (excitatory synapses only).
    """
    if not dt > 0:
        raise ValueError("dt must be > 0")
    v_p = layer.rates
    hebb = np.outer(v_p, bvc_rates) - (v_p[:, None] ** 2) * layer.w_pb / config.alpha_pb
    layer.w_pb += (dt / config.tau_w_pb) * hebb
    np.maximum(layer.w_pb, 0.0, out=layer.w_pb)
    return layer.w_pb


def trace_step(
    traces: TraceState,
    pc_rates: np.ndarray,
    hd_rates: np.ndarray,
    dt: float,
    tau_m: float,
) -> TraceState:
    """Euler step of both trace vectors toward the current rates."""
    if not dt > 0:
        raise ValueError("dt must be > 0")
    traces.pc += (dt / tau_m) * (-traces.pc + pc_rates)
    traces.hd += (dt / tau_m) * (-traces.hd + hd_rates)
    return traces


def snapshot_activity(layer: PlaceLayer, step: int = 0) -> "ActivitySnapshot":
    """Immutable copy of the current rates, for the replay buffer."""
    return ActivitySnapshot(rates=layer.rates.copy(), step=step)


@dataclass(frozen=True)
class ActivitySnapshot:
    rates: np.ndarray
    step: int
