"""
Exact remote state preparation with one singlet and one classical bit.

Alice rotates her half of the singlet with U(alpha, beta)^dag, measures it in
{H, V} and sends the outcome. On V Bob already holds the target; on H he
holds its complement, which he can undo only for the two great-circle
ensembles (i*sigma_y on the polar circle, sigma_z on the equatorial one).
"""
import logging
import math
import typing as tp
from dataclasses import dataclass
from enum import Enum

from core import qmath
from core.engine import (
    PartyId, ProtocolTranscript, QubitHandle, ResourceLedger, Session,
    distribute_epr, new_session, send_classical_bit,
)
from core.errors import DomainError, EnsembleViolationError
from core.qmath import PureQubit, Unitary2
from utils.rng import SeededStream

logger = logging.getLogger(__name__)

# cbit value sent for each of Alice's outcomes: 1 means Bob already holds the target
BIT_TARGET_HELD = 1
BIT_COMPLEMENT_HELD = 0


class EnsembleKind(str, Enum):
    POLAR = "polar"
    EQUATORIAL = "equatorial"
    ARBITRARY = "arbitrary"


@dataclass
class RspRunResult:
    alice_outcome: int
    bob_state_before_correction: PureQubit
    bob_state_after_correction: PureQubit
    correction_applied: str
    ledger: ResourceLedger
    transcript: ProtocolTranscript
    fidelity: float


def validate_ensemble(target: PureQubit, kind: EnsembleKind) -> PureQubit:
    """Canonical form of `target`, checked against the declared ensemble."""
    canonical = target.canonical()
    if kind is EnsembleKind.POLAR and abs(canonical.aV.imag) > qmath.ROUND_TRIP_TOL:
        raise EnsembleViolationError(
            f"polar-circle states have real amplitudes, got beta = {canonical.aV}"
        )
    if kind is EnsembleKind.EQUATORIAL and abs(canonical.aH.real - 1 / math.sqrt(2)) > qmath.ROUND_TRIP_TOL:
        raise EnsembleViolationError(
            f"equatorial states have alpha = 1/sqrt(2), got alpha = {canonical.aH.real}"
        )
    return canonical


def correction_for(kind: EnsembleKind, bit: int) -> Unitary2:
    """Bob's correction given Alice's bit; identity whenever no correction exists."""
    if bit == BIT_TARGET_HELD:
        return qmath.IDENTITY
    if bit != BIT_COMPLEMENT_HELD:
        raise DomainError(f"a classical bit is 0 or 1, got {bit!r}")
    if kind is EnsembleKind.POLAR:
        return qmath.I_SIGMA_Y
    if kind is EnsembleKind.EQUATORIAL:
        return qmath.PAULI_Z
    return qmath.IDENTITY


def prepare_remote(session: Session, target: PureQubit,
                   forced_outcome: tp.Optional[int] = None) -> tp.Tuple[int, QubitHandle]:
    """
    Alice's half of the protocol: share a singlet, rotate, measure, send.
    Returns the delivered bit and Bob's photon handle.
    """
    rotation = qmath.su2_for_state(target)
    a_half, b_half = distribute_epr(session)
    session.apply_unitary(PartyId.ALICE, [a_half], rotation.dagger().matrix,
                          f"{rotation.label}^dag")
    outcome = session.measure(PartyId.ALICE, a_half, forced=forced_outcome)
    # outcome V (1) leaves Bob with the target
    bit = send_classical_bit(session, PartyId.ALICE, outcome)
    return bit, b_half


def rsp_run(target: PureQubit, kind: EnsembleKind, session: tp.Union[Session, int],
            forced_outcome: tp.Optional[int] = None) -> RspRunResult:
    if not isinstance(session, Session):
        session = new_session(session, protocol="rsp")
    kind = EnsembleKind(kind)
    target = validate_ensemble(target, kind)

    bit, b_half = prepare_remote(session, target, forced_outcome)
    before = session.local_state(PartyId.BOB, b_half)
    correction = correction_for(kind, bit)
    session.apply_correction(PartyId.BOB, b_half, correction)
    after = session.local_state(PartyId.BOB, b_half)
    session.close()

    return RspRunResult(
        alice_outcome=bit,
        bob_state_before_correction=before,
        bob_state_after_correction=after,
        correction_applied=correction.label,
        ledger=session.ledger,
        transcript=session.transcript,
        fidelity=qmath.fidelity(after, target),
    )


def rsp_average_fidelity(target: PureQubit, kind: EnsembleKind, shots: int,
                         rng: tp.Union[SeededStream, int]) -> float:
    """Monte Carlo mean of Bob's post-correction fidelity over `shots` runs."""
    if shots < 1:
        raise DomainError(f"shots must be >= 1, got {shots}")
    if not isinstance(rng, SeededStream):
        rng = SeededStream(rng)
    total = 0.0
    for _ in range(shots):
        session = Session(rng.seed, rng=rng, protocol="rsp")
        total += rsp_run(target, kind, session).fidelity
    mean = total / shots
    logger.info("rsp %s: mean fidelity %.6f over %d shots", EnsembleKind(kind).value, mean, shots)
    return mean
