import cmath
import math
import typing as tp

from core.errors import DomainError
from core.qmath import PoincareVector, PureQubit
from protocols.joint import JointOperator, singlet_projector
from protocols.rsm import PovmSet, trine_povm

# typed unit vectors are accepted this far off the sphere
DIRECTION_TOL = 1e-6


def _split(text: str) -> tp.List[str]:
    parts = [part.strip() for part in text.split(",")]
    if len(parts) != 3:
        raise DomainError(f"expected 3 comma-separated numbers, got {text!r}")
    for part in parts:
        try:
            float(part)
        except ValueError as err:
            raise DomainError(f"cannot read {text!r} as a vector: {err}") from err
    return parts


def parse_vector(text: str) -> PoincareVector:
    """'x,y,z' -> PoincareVector."""
    return PoincareVector.from_array([float(part) for part in _split(text)])


def parse_complex(text: str) -> complex:
    """Python complex() syntax, e.g. '0.6+0.8j'."""
    try:
        value = complex(text.replace(" ", ""))
    except ValueError as err:
        raise DomainError(f"cannot read {text!r} as a complex number") from err
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise DomainError(f"amplitude must be finite, got {text!r}")
    return value


def parse_povm(text: str) -> PovmSet:
    """'trine' or 'x,y,z;x,y,z;...' with the f_mu vectors."""
    if text.strip().lower() == "trine":
        return trine_povm()
    return PovmSet(tuple(parse_vector(item) for item in text.split(";") if item.strip()))


def state_from_amplitudes(alpha: tp.Optional[float], beta: tp.Optional[complex]) -> PureQubit:
    """Fill in the missing amplitude (alpha real, >= 0) and return the canonical state."""
    if alpha is None and beta is None:
        raise DomainError("need at least one of alpha and beta")
    if alpha is None:
        alpha = math.sqrt(max(0.0, 1.0 - abs(beta) ** 2))
    if beta is None:
        beta = math.sqrt(max(0.0, 1.0 - alpha ** 2))
    return PureQubit(alpha, beta).canonical()


def state_from_angles(theta: float, phi: float = 0.0) -> PureQubit:
    """cos(theta/2)|H> + e^(i phi) sin(theta/2)|V>."""
    return PureQubit(math.cos(theta / 2), cmath.exp(1j * phi) * math.sin(theta / 2)).canonical()


def equatorial_state(phi: float) -> PureQubit:
    """(|H> + e^(i phi)|V>) / sqrt(2)."""
    return PureQubit(1 / math.sqrt(2), cmath.exp(1j * phi) / math.sqrt(2))


def joint_operator_from_flags(pi: tp.Optional[tp.Sequence[float]] = None,
                              r: tp.Optional[str] = None, s: tp.Optional[str] = None,
                              t: tp.Optional[tp.Sequence[float]] = None,
                              preset: tp.Optional[str] = None) -> JointOperator:
    """Build Pi from exactly one of: 15 numbers, (r, s, t), or a named preset."""
    given = sum(item is not None for item in (pi, preset)) + (r is not None or s is not None or t is not None)
    if given != 1:
        raise DomainError("give Pi as exactly one of --pi, --r/--s/--t or --preset")
    if preset is not None:
        if preset != "singlet":
            raise DomainError(f"unknown Pi preset {preset!r}")
        return singlet_projector()
    if pi is not None:
        return JointOperator.from_flat(pi)
    zero = "0,0,0"
    flat = list(parse_vector(r or zero).array) + list(parse_vector(s or zero).array)
    flat += list(t) if t is not None else [0.0] * 9
    return JointOperator.from_flat(flat)


def parse_direction(text: str) -> PoincareVector:
    """
    Unit vector from 'x,y,z'. Input within 1e-6 of the sphere is renormalized,
    so typed decimals such as 0.57735 are accepted.
    """
    values = [float(part) for part in _split(text)]
    norm = math.sqrt(sum(value * value for value in values))
    if abs(norm - 1.0) > DIRECTION_TOL:
        raise DomainError(f"direction {text!r} is not a unit vector (norm {norm:.6g})")
    return PoincareVector.from_array([value / norm for value in values])
