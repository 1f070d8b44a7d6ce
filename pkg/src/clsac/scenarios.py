"""Built-in MAV roll-attitude scenarios.

Lateral model of a 150 mm fixed-wing MAV, states ``[v, p, r, phi]``
(m/s, rad/s, rad/s, rad), rudder input in rad, with second-order rudder
actuator dynamics in front. Matrices are used as given, without unit
conversion.
"""

from __future__ import annotations

import numpy as np

from .adaptive import GainWeights
from .lti import StateSpace, TransferFunction, cascade
from .passivity import synthesize_pfc
from .refmodel import RefModelConfig
from .sim import CommandSpec, Scenario, SimSettings

A_LAT = np.array([
    [-3.34, 1.93, -7.55, 7.82],
    [-40.5, -2.22, 2.48, 0.0],
    [234.0, -2.84, -27.0, 0.0],
    [0.0, 1.0, 0.268, 0.0],
])
B_LAT = np.array([[-8.41], [59.7], [793.0], [0.0]])
C_LAT = np.array([[0.0, 0.0, 0.0, 1.0]])

A_ACT = np.array([[0.0, 1.0], [-2367.0, -72.22]])
B_ACT = np.array([[0.0], [2367.0]])
C_ACT = np.array([[1.0, 0.0]])

LATERAL_STATES = ("v", "p", "r", "phi")
STATE_NAMES = LATERAL_STATES + ("delta_r", "delta_r_dot")

# compensator C(s) = (4s + 40) / 10, chosen by root locus on T(s)
PFC_NUM = (4.0, 40.0)
PFC_DEN = (10.0,)

GAMMA = 10.0
SIGMA = 5.0
LV_DEFAULT = 20.0
LV_SWEEP = (10.0, 50.0, 100.0)


def lateral_model() -> StateSpace:
    return StateSpace(A_LAT, B_LAT, C_LAT)


def actuator_model() -> StateSpace:
    return StateSpace(A_ACT, B_ACT, C_ACT)


def build_augmented_plant() -> StateSpace:
    """Six-state plant: lateral dynamics driven through the rudder actuator."""
    return cascade(lateral_model(), actuator_model())


def reference_model(lv: float | None = None) -> RefModelConfig:
    return RefModelConfig([[-5.0]], [[5.0]], [[1.0]], None if lv is None else [[lv]])


def mav_scenario(name: str = "mav_clsac", lv: float | None = LV_DEFAULT,
                 command: CommandSpec | None = None, sim: SimSettings | None = None) -> Scenario:
    return Scenario(
        name=name,
        plant=lateral_model(),
        actuator=actuator_model(),
        ref=reference_model(lv),
        weights=GainWeights.uniform(GAMMA, SIGMA),
        command=command or CommandSpec("square", 0.1745, 20.0, 0.0),
        sim=sim or SimSettings(dt=1e-3, t_final=40.0),
        pfc=synthesize_pfc(TransferFunction(PFC_NUM, PFC_DEN)),
        state_names=STATE_NAMES,
    )


def default_scenarios() -> dict:
    return {
        "sac": mav_scenario("mav_sac", lv=None),
        "clsac": mav_scenario("mav_clsac", lv=LV_DEFAULT),
        "lv_sweep": [mav_scenario(f"mav_lv{int(lv)}", lv=lv) for lv in LV_SWEEP],
    }
