"""Proof-of-quantumness toolkit: trapdoor claw-free functions, the interactive
protocol, simulated provers, round-1 circuits, claw extraction and the
post-selection experiment."""

from ._qadv import (
    DomainError,
    ExtractionFailed,
    InsufficientData,
    NoCrossing,
    ParseError,
    PreconditionError,
    ProtocolViolation,
    decode_frame,
    encode_frame,
    extract,
    factor_from_claw,
    is_valid_y,
    keygen,
    lemma1_bound,
    lift_key,
    optimal_theta,
    pm_of_theta,
    rabin_eval,
    rabin_invert,
    rejection_power,
    resources,
    run_protocol,
    sweep,
    threshold_of,
)

__all__ = [name for name in dir() if not name.startswith("_")]
