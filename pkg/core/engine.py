"""
Two-party protocol engine.

The joint quantum state lives in the `Session`; Alice and Bob only ever hold
`QubitHandle`s to their own photons. The only way information crosses between
the parties is `send_classical_bit`, which counts every bit in the
`ResourceLedger` and records it in the `ProtocolTranscript`.
"""
import logging
import typing as tp
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from core import qmath
from core.errors import DomainError, LedgerFrozenError, LocalityError
from utils.rng import SeededStream

logger = logging.getLogger(__name__)

SINGLET_AMPLITUDES = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)


class PartyId(str, Enum):
    ALICE = "Alice"
    BOB = "Bob"

    @property
    def other(self) -> "PartyId":
        return PartyId.BOB if self is PartyId.ALICE else PartyId.ALICE


class EventKind(str, Enum):
    PREPARE = "prepare"
    LOCAL_UNITARY = "local-unitary"
    MEASUREMENT = "measurement"
    CLASSICAL_SEND = "classical-send"
    CORRECTION = "correction"


@dataclass(frozen=True)
class QubitHandle:
    index: int
    owner: PartyId
    label: str


@dataclass(frozen=True)
class TranscriptEvent:
    index: int
    party: PartyId
    action: EventKind
    payload: str
    # photons touched and who held them at the time
    subsystems: tp.Tuple[int, ...] = ()
    owners: tp.Tuple[PartyId, ...] = ()
    # classical-send events this event depends on
    reads: tp.Tuple[int, ...] = ()
    recipient: tp.Optional[PartyId] = None

    def to_line(self) -> str:
        return f"{self.index}\t{self.party.value}\t{self.action.value}\t{self.payload}"


@dataclass
class ProtocolTranscript:
    seed: int
    protocol: str = ""
    events: tp.List[TranscriptEvent] = field(default_factory=list)
    closed: bool = False

    def append(self, party: PartyId, action: EventKind, payload: str, **kwargs) -> TranscriptEvent:
        if self.closed:
            raise LedgerFrozenError("transcript is closed; the run has ended")
        event = TranscriptEvent(len(self.events), party, action, payload, **kwargs)
        self.events.append(event)
        return event

    def close(self):
        self.events = list(self.events)
        self.closed = True

    def to_text(self) -> str:
        header = f"# seed={self.seed}"
        if self.protocol:
            header += f" protocol={self.protocol}"
        return "\n".join([header] + [event.to_line() for event in self.events]) + "\n"

    def __iter__(self):
        return iter(self.events)

    def __len__(self):
        return len(self.events)


@dataclass
class ResourceLedger:
    ebits_consumed: int = 0
    cbits_alice_to_bob: int = 0
    cbits_bob_to_alice: int = 0
    frozen: bool = False

    def _check_open(self):
        if self.frozen:
            raise LedgerFrozenError("ledger is frozen; the run has ended")

    def add_ebit(self):
        self._check_open()
        self.ebits_consumed += 1

    def add_cbit(self, sender: PartyId):
        self._check_open()
        if sender is PartyId.ALICE:
            self.cbits_alice_to_bob += 1
        else:
            self.cbits_bob_to_alice += 1

    def freeze(self):
        self.frozen = True

    def as_tuple(self) -> tp.Tuple[int, int, int]:
        return (self.ebits_consumed, self.cbits_alice_to_bob, self.cbits_bob_to_alice)

    def to_dict(self) -> tp.Dict[str, int]:
        return {
            "ebits": self.ebits_consumed,
            "cbits_alice_to_bob": self.cbits_alice_to_bob,
            "cbits_bob_to_alice": self.cbits_bob_to_alice,
        }

    def __add__(self, other: "ResourceLedger") -> "ResourceLedger":
        return ResourceLedger(
            self.ebits_consumed + other.ebits_consumed,
            self.cbits_alice_to_bob + other.cbits_alice_to_bob,
            self.cbits_bob_to_alice + other.cbits_bob_to_alice,
        )


@dataclass
class ClassicalChannel:
    sender: PartyId
    recipient: PartyId
    bits_sent: int = 0

    def send(self, bit: int) -> int:
        if bit not in (0, 1):
            raise DomainError(f"a classical bit is 0 or 1, got {bit!r}")
        self.bits_sent += 1
        return int(bit)


class Session:
    """
    One run of a two-party protocol.

    Holds the joint state of every photon created in the run (at most
    `MAX_QUBITS`), the seeded stream, the ledger and the transcript.
    """
    MAX_QUBITS = 3

    def __init__(self, seed: int, rng: tp.Optional[SeededStream] = None, protocol: str = ""):
        self.seed = int(seed)
        self.rng = rng if rng is not None else SeededStream(self.seed)
        self.ledger = ResourceLedger()
        self.transcript = ProtocolTranscript(self.seed, protocol)
        self.channels = {
            PartyId.ALICE: ClassicalChannel(PartyId.ALICE, PartyId.BOB),
            PartyId.BOB: ClassicalChannel(PartyId.BOB, PartyId.ALICE),
        }
        self._state = np.ones(1, dtype=complex)
        self._owners: tp.List[PartyId] = []
        self._inbox: tp.Dict[PartyId, tp.List[int]] = {PartyId.ALICE: [], PartyId.BOB: []}
        self._pairs = 0

    @property
    def n_qubits(self) -> int:
        return len(self._owners)

    @property
    def active(self) -> bool:
        return not self.ledger.frozen

    def _add_qubits(self, amplitudes: np.ndarray, owners: tp.Sequence[PartyId]) -> tp.List[int]:
        if not self.active:
            raise LedgerFrozenError("session has ended")
        if self.n_qubits + len(owners) > self.MAX_QUBITS:
            raise DomainError(f"a session holds at most {self.MAX_QUBITS} photons")
        first = self.n_qubits
        self._state = np.kron(self._state, amplitudes)
        self._owners.extend(owners)
        return list(range(first, first + len(owners)))

    def _check_access(self, party: PartyId, handles: tp.Sequence[QubitHandle]):
        for handle in handles:
            if handle.owner is not party:
                raise LocalityError(
                    f"{party.value} cannot act on {handle.label}, held by {handle.owner.value}"
                )

    def distribute_epr(self) -> tp.Tuple[QubitHandle, QubitHandle]:
        a_index, b_index = self._add_qubits(SINGLET_AMPLITUDES, [PartyId.ALICE, PartyId.BOB])
        pair = self._pairs
        self._pairs += 1
        self.ledger.add_ebit()
        a_half = QubitHandle(a_index, PartyId.ALICE, f"A{pair}")
        b_half = QubitHandle(b_index, PartyId.BOB, f"B{pair}")
        for handle in (a_half, b_half):
            self.transcript.append(
                handle.owner, EventKind.PREPARE, f"receive singlet half {handle.label}",
                subsystems=(handle.index,), owners=(handle.owner,),
            )
        logger.debug("seed %d: distributed singlet pair %d", self.seed, pair)
        return a_half, b_half

    def prepare_local(self, party: PartyId, psi: qmath.PureQubit, label: str) -> QubitHandle:
        (index,) = self._add_qubits(psi.vector, [party])
        handle = QubitHandle(index, party, label)
        self.transcript.append(
            party, EventKind.PREPARE, f"prepare {label} = {_format_state(psi)}",
            subsystems=(index,), owners=(party,),
        )
        return handle

    def apply_unitary(self, party: PartyId, handles: tp.Sequence[QubitHandle],
                      operator: np.ndarray, label: str):
        self._check_access(party, handles)
        targets = [h.index for h in handles]
        self._state = qmath.apply_operator(self._state, operator, targets, self.n_qubits)
        self.transcript.append(
            party, EventKind.LOCAL_UNITARY,
            f"apply {label} to {','.join(h.label for h in handles)}",
            subsystems=tuple(targets), owners=tuple(h.owner for h in handles),
        )

    def measure(self, party: PartyId, handle: QubitHandle, forced: tp.Optional[int] = None) -> int:
        """{H, V} measurement; returns 0 for H and 1 for V."""
        self._check_access(party, [handle])
        p_h = qmath.branch_probability(self._state, self.n_qubits, handle.index, 0)
        outcome = qmath.draw_outcome(p_h, self.rng, forced)
        self._state = qmath.collapse(self._state, self.n_qubits, handle.index, outcome)
        self.transcript.append(
            party, EventKind.MEASUREMENT,
            f"measure {handle.label} in H/V -> {'HV'[outcome]}",
            subsystems=(handle.index,), owners=(handle.owner,),
        )
        return outcome

    def measure_effects(self, party: PartyId, handles: tp.Sequence[QubitHandle],
                        effects: tp.Sequence[np.ndarray], labels: tp.Sequence[str],
                        reads: tp.Sequence[int] = ()) -> int:
        """
        Destructive measurement with the given effects on `handles`;
        returns the index of the observed outcome.
        """
        self._check_access(party, handles)
        targets = [h.index for h in handles]
        probabilities = []
        for effect in effects:
            image = qmath.apply_operator(self._state, effect, targets, self.n_qubits)
            probabilities.append(max(0.0, float(np.vdot(self._state, image).real)))
        outcome = self.rng.choice(probabilities)
        self.transcript.append(
            party, EventKind.MEASUREMENT,
            f"measure {','.join(h.label for h in handles)} -> {labels[outcome]}",
            subsystems=tuple(targets), owners=tuple(h.owner for h in handles),
            reads=tuple(reads),
        )
        return outcome

    def send_classical_bit(self, sender: PartyId, bit: int) -> int:
        if not self.active:
            raise LedgerFrozenError("session has ended")
        delivered = self.channels[sender].send(bit)
        self.ledger.add_cbit(sender)
        event = self.transcript.append(
            sender, EventKind.CLASSICAL_SEND, f"send bit {delivered} to {sender.other.value}",
            recipient=sender.other,
        )
        self._inbox[sender.other].append(event.index)
        return delivered

    def apply_correction(self, party: PartyId, handle: QubitHandle,
                         unitary: tp.Optional[qmath.Unitary2], label: str = "",
                         reads: tp.Optional[tp.Sequence[int]] = None):
        """
        Conditional operation on `handle` that depends on received bits.

        `unitary=None` records an apparatus change that leaves the photon
        untouched. By default the correction reads every message received so far.
        """
        self._check_access(party, [handle])
        reads = tuple(self._inbox[party] if reads is None else reads)
        if not reads:
            raise LocalityError(f"{party.value} has no classical message to condition on")
        if unitary is not None:
            self._state = qmath.apply_operator(
                self._state, unitary.matrix, [handle.index], self.n_qubits
            )
            label = label or unitary.label
        self.transcript.append(
            party, EventKind.CORRECTION, f"{label} on {handle.label}",
            subsystems=(handle.index,), owners=(handle.owner,), reads=reads,
        )

    def received(self, party: PartyId) -> tp.Tuple[int, ...]:
        return tuple(self._inbox[party])

    def local_state(self, party: PartyId, handle: QubitHandle) -> qmath.PureQubit:
        """Pure state of a photon held by `party` (fails while it is entangled)."""
        self._check_access(party, [handle])
        rho = qmath.reduced_density(self._state, self.n_qubits, handle.index)
        return qmath.pure_state_of(rho)

    def close(self):
        self.ledger.freeze()
        self.transcript.close()


def _format_state(psi: qmath.PureQubit) -> str:
    return f"({psi.aH:.6g})|H> + ({psi.aV:.6g})|V>"


def new_session(seed: int, protocol: str = "", rng: tp.Optional[SeededStream] = None) -> Session:
    return Session(seed, rng=rng, protocol=protocol)


def distribute_epr(session: Session) -> tp.Tuple[QubitHandle, QubitHandle]:
    return session.distribute_epr()


def send_classical_bit(session: Session, sender: PartyId, bit: int) -> int:
    return session.send_classical_bit(sender, bit)


@dataclass
class LocalityReport:
    passed: bool
    violation: tp.Optional[TranscriptEvent] = None
    reason: str = ""


def enforce_locality(transcript: tp.Union[ProtocolTranscript, Session]) -> LocalityReport:
    """
    Check that every event touches only the acting party's photons and that
    every correction comes after the classical messages it reads.
    """
    if isinstance(transcript, Session):
        transcript = transcript.transcript
    sends: tp.Dict[int, TranscriptEvent] = {}
    for position, event in enumerate(transcript.events):
        if event.index != position:
            return LocalityReport(False, event, f"event index {event.index} out of order")
        foreign = [owner for owner in event.owners if owner is not event.party]
        if foreign:
            return LocalityReport(
                False, event,
                f"{event.party.value} acted on a photon held by {foreign[0].value}",
            )
        if event.action is EventKind.CLASSICAL_SEND:
            sends[event.index] = event
        if event.action is EventKind.CORRECTION and not event.reads:
            return LocalityReport(False, event, "correction reads no classical message")
        for read in event.reads:
            message = sends.get(read)
            if message is None:
                return LocalityReport(
                    False, event, f"event {event.index} precedes the message {read} it reads"
                )
            if message.recipient is not event.party:
                return LocalityReport(
                    False, event,
                    f"{event.party.value} read message {read} addressed to {message.recipient.value}",
                )
    return LocalityReport(True)
