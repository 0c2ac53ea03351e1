from .experiments.base import ExperimentBackend
from .experiments.rsp_backend import RspBackend
from .experiments.rsm_backend import RsmProjectiveBackend, RsmPovmBackend
from .experiments.joint_backend import JointBackend, JointStrategy
from .experiments.teleport_backend import TeleportBackend
from .experiments.nogo_backend import NoGoBackend


def get_experiment_backend(name: str, **kwargs) -> ExperimentBackend:
    name = name.lower()
    if name == "rsp":
        return RspBackend(**kwargs)
    elif name == "rsm-projective":
        return RsmProjectiveBackend(**kwargs)
    elif name == "rsm-povm":
        return RsmPovmBackend(**kwargs)
    elif name == "joint":
        return JointBackend(**kwargs)
    elif name == "teleport":
        return TeleportBackend(**kwargs)
    elif name == "nogo":
        return NoGoBackend(**kwargs)
    else:
        raise ValueError(f"Unknown experiment: {name}")
