"""Teleportation over the singlet, kept as the resource baseline (1 ebit, 2 cbits)."""
import typing as tp
from dataclasses import dataclass

import numpy as np

from core import qmath
from core.engine import (
    PartyId, ProtocolTranscript, ResourceLedger, Session,
    distribute_epr, new_session, send_classical_bit,
)
from core.qmath import PureQubit, Unitary2

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def bell_correction(m0: int, m1: int) -> Unitary2:
    """
    Bob's correction for Bell outcome (m0, m1) when the shared pair is the
    singlet: his photon holds (X Z) X^m1 Z^m0 |psi>, so he applies
    Z^m0 X^m1 Z X.
    """
    matrix = (np.linalg.matrix_power(qmath.SIGMA_Z, m0)
              @ np.linalg.matrix_power(qmath.SIGMA_X, m1)
              @ qmath.SIGMA_Z @ qmath.SIGMA_X)
    factors = ["Z"] * m0 + ["X"] * m1 + ["Z", "X"]
    return Unitary2(matrix, "".join(factors))


@dataclass
class TeleportResult:
    bob_state: PureQubit
    ledger: ResourceLedger
    outcome: tp.Tuple[int, int]
    correction_applied: str
    transcript: ProtocolTranscript
    fidelity: float


def teleport(psi: PureQubit, session: tp.Union[Session, int],
             forced_outcome: tp.Optional[tp.Tuple[int, int]] = None) -> TeleportResult:
    if not isinstance(session, Session):
        session = new_session(session, protocol="teleport")
    forced = forced_outcome or (None, None)

    source = session.prepare_local(PartyId.ALICE, psi, "input")
    a_half, b_half = distribute_epr(session)
    session.apply_unitary(PartyId.ALICE, [source, a_half], CNOT, "CNOT")
    session.apply_unitary(PartyId.ALICE, [source], HADAMARD, "Hadamard")
    m0 = session.measure(PartyId.ALICE, source, forced=forced[0])
    m1 = session.measure(PartyId.ALICE, a_half, forced=forced[1])
    send_classical_bit(session, PartyId.ALICE, m0)
    send_classical_bit(session, PartyId.ALICE, m1)

    correction = bell_correction(m0, m1)
    session.apply_correction(PartyId.BOB, b_half, correction)
    bob_state = session.local_state(PartyId.BOB, b_half)
    session.close()

    return TeleportResult(
        bob_state=bob_state,
        ledger=session.ledger,
        outcome=(m0, m1),
        correction_applied=correction.label,
        transcript=session.transcript,
        fidelity=qmath.fidelity(bob_state, psi),
    )
