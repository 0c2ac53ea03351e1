from .singlet import (
    epr_singlet, check_singlet_invariance, check_evolution_deevolution,
    check_middle_form, check_rotated_structure, check_transition_invariance,
    run_identity_checks,
)
from .rsp import EnsembleKind, RspRunResult, rsp_run, rsp_average_fidelity
from .rsm import (
    PovmSet, projective_probability, rsm_projective, rsm_povm, trine_povm,
)
from .joint import (
    JointOperator, joint_probability, joint_discrepancy, joint_equalize_known_phi,
    joint_equalize_literal, joint_sign_flip_scan, singlet_projector,
)
from .teleport import teleport
from .nogo import universal_not_choi
