"""Beam-splitter cascades for measuring overlaps of a light mode with reference states."""
from . import cat, fock, oracle, phase, polyroots, sampler, scheme
from .errors import (
    AmplitudeTooLargeForCutoff,
    DegeneratePhase,
    DesignVerificationFailed,
    FockCascadeError,
    InconsistentProbability,
    NoConvergence,
    NotAState,
    TooManyZerosForCutoff,
    VacuumOnly,
    ZeroState,
)
from .kernels import BACKEND
from .scheme import (
    BeamSplitter,
    DesignReport,
    Scheme,
    Stage,
    cascade_operator,
    design_scheme,
    efficiency_closed_form,
    efficiency_numeric,
    joint_event_probability,
    overlap_from_probability,
    stage_operator,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "AmplitudeTooLargeForCutoff",
    "BeamSplitter",
    "DegeneratePhase",
    "DesignReport",
    "DesignVerificationFailed",
    "FockCascadeError",
    "InconsistentProbability",
    "NoConvergence",
    "NotAState",
    "Scheme",
    "Stage",
    "TooManyZerosForCutoff",
    "VacuumOnly",
    "ZeroState",
    "cascade_operator",
    "cat",
    "design_scheme",
    "efficiency_closed_form",
    "efficiency_numeric",
    "fock",
    "joint_event_probability",
    "oracle",
    "overlap_from_probability",
    "phase",
    "polyroots",
    "sampler",
    "scheme",
    "stage_operator",
]
