"""tiltlab: a desk-scale lab for tiltrotor hexacopter pose control.

Batched rigid-body + second-order actuator simulation, a geometric PD
baseline with minimum-norm allocation, an MLP policy trained with PPO on
the three-term tracking/posture/actuation objective, and a scenario
harness with the corresponding analysis metrics.
"""

__version__ = "0.1.0"

from ._kernels import BACKEND

__all__ = ["BACKEND", "__version__"]
