"""Matrix-conjugation authentication over truncated polynomial rings."""

from ._conjauth import (
    ConjauthError,
    DecodeError,
    KeyPair,
    Matrix,
    Poly,
    PublicKey,
    Ring,
    RingParams,
    SchemeParams,
    SessionTranscript,
    Verdict,
    Word,
    decode_private_key,
    det_forgery_experiment,
    determinant,
    encode_private_key,
    encode_public_key,
    evaluate_word,
    forgery_experiment,
    is_invertible,
    is_unit,
    keygen,
    linear_attack,
    linear_system_shape,
    make_ring,
    monomial_count,
    poly_inverse,
    random_matrix,
    run_session,
    trace,
    validate_params,
    verdict_frame,
)

__all__ = [name for name in dir() if not name.startswith("_")]
