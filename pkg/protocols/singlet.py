"""Identities of the EPR singlet that remote state preparation relies on."""
import logging
import typing as tp

import numpy as np

from core import qmath
from core.engine import SINGLET_AMPLITUDES
from core.qmath import InvariantCheck, TwoQubitState, Unitary2
from protocols.nogo import universal_not_choi
from utils.rng import SeededStream

logger = logging.getLogger(__name__)


def epr_singlet() -> TwoQubitState:
    """(|H>_A|V>_B - |V>_A|H>_B) / sqrt(2)."""
    return TwoQubitState(SINGLET_AMPLITUDES)


def check_singlet_invariance(u: Unitary2) -> float:
    """1 - |<Psi-| U x U |Psi->|^2."""
    singlet = epr_singlet().amplitudes
    rotated = qmath.tensor(u, u) @ singlet
    return 1.0 - qmath.state_fidelity(singlet, rotated)


def check_evolution_deevolution(u: Unitary2) -> float:
    """1 - |overlap|^2 between (U x I)|Psi-> and (I x U^dag)|Psi->."""
    singlet = epr_singlet().amplitudes
    forward = qmath.tensor(u, qmath.IDENTITY) @ singlet
    backward = qmath.tensor(qmath.IDENTITY, u.dagger()) @ singlet
    return 1.0 - qmath.state_fidelity(forward, backward)


def check_middle_form(u: Unitary2) -> float:
    """
    Deviation of (|Psi>|Psi_perp> - |Psi_perp>|Psi>)/sqrt(2) from the singlet,
    where |Psi> = U|H> and |Psi_perp> = U|V>. Equal up to global phase only.
    """
    psi = u.matrix[:, 0]
    perp = u.matrix[:, 1]
    middle = (np.kron(psi, perp) - np.kron(perp, psi)) / np.sqrt(2)
    return 1.0 - qmath.state_fidelity(middle, epr_singlet().amplitudes)


def check_rotated_structure(u: Unitary2) -> float:
    """
    Deviation of (U^dag x I)|Psi-> from (|H>|Psi_perp> - |V>|Psi>)/sqrt(2),
    the state Alice measures in the preparation protocol.
    """
    psi = u.matrix[:, 0]
    perp = u.matrix[:, 1]
    h, v = qmath.H_STATE.vector, qmath.V_STATE.vector
    expected = (np.kron(h, perp) - np.kron(v, psi)) / np.sqrt(2)
    rotated = qmath.tensor(u.dagger(), qmath.IDENTITY) @ epr_singlet().amplitudes
    return 1.0 - qmath.state_fidelity(rotated, expected)


def check_transition_invariance(psi: qmath.PureQubit, phi: qmath.PureQubit) -> float:
    """
    |<psi|phi>|^2 - |<psi_perp|phi_perp>|^2: complementing both states is
    anti-unitary, so transition probabilities survive it.
    """
    return abs(qmath.fidelity(psi, phi) - qmath.fidelity(psi.orthogonal(), phi.orthogonal()))


def run_identity_checks(trials: int, seed: int) -> tp.List[InvariantCheck]:
    """
    Evaluate every singlet identity over `trials` seeded random SU(2) elements,
    plus the complement/transition check over random state pairs.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    stream = SeededStream(seed)
    unitaries = [qmath.random_su2(stream) for _ in range(trials)]

    checks = []
    for name, check in [
        ("singlet_invariance", check_singlet_invariance),
        ("evolution_deevolution", check_evolution_deevolution),
        ("middle_form", check_middle_form),
        ("rotated_structure", check_rotated_structure),
    ]:
        deviation = max(check(u) for u in unitaries)
        checks.append(InvariantCheck(name, trials, deviation, qmath.ATOL))
        logger.info("%s: max deviation %.3e over %d trials", name, deviation, trials)

    pairs = [(qmath.random_pure_state(stream), qmath.random_pure_state(stream))
             for _ in range(trials)]
    deviation = max(check_transition_invariance(a, b) for a, b in pairs)
    checks.append(InvariantCheck("transition_invariance", trials, deviation, qmath.ATOL))

    result = universal_not_choi()
    # the unnormalized Choi matrix of the ideal complement has minimum eigenvalue -1
    checks.append(InvariantCheck(
        "choi_negativity", 1, abs(result.min_eigenvalue + 1.0), qmath.ATOL,
        details={"min_eigenvalue": result.min_eigenvalue},
    ))
    return checks
