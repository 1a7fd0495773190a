"""Encoders and decoders for the three transmission schemes.

Arrays are batches of blocks with the block (lattice) dimension last.  The
lattice decoders can be handed a ``genie`` value, the true pre-modulo
signal, in which case they also report per block whether the receiver's
modulo reduction failed to invert (a wrap).
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .analysis import ChannelModel, SchemeParams
from .lattice import Lattice, mod_lattice
from .sources import SourceBlock, SourceModel

WRAP_TOL = 1e-6


@dataclasses.dataclass(frozen=True, eq=False)
class ChannelInputPair:
    x1: np.ndarray
    x2: np.ndarray


@dataclasses.dataclass(frozen=True, eq=False)
class DecodeOutcome:
    estimate: np.ndarray
    # per-block flags; None unless the decoder was given the genie signal
    wrapped: np.ndarray | None = None


def uncoded_gain(src: SourceModel, ch: ChannelModel) -> float:
    return math.sqrt(ch.P / src.sigma2)


def uncoded_mmse_coefficient(src: SourceModel, ch: ChannelModel) -> float:
    """E[S3 Y] / E[Y^2] for Y = sqrt(P/sigma2) S3 + Z."""
    return 2.0 * math.sqrt(ch.P * src.sigma2) * (1.0 - src.rho) / (2.0 * ch.P * (1.0 - src.rho) + ch.N)


def encode_uncoded(block: SourceBlock, src: SourceModel, ch: ChannelModel) -> ChannelInputPair:
    g = uncoded_gain(src, ch)
    return ChannelInputPair(x1=g * block.s1, x2=-g * block.s2)


def decode_uncoded(y, src: SourceModel, ch: ChannelModel) -> DecodeOutcome:
    y = np.asarray(y, dtype=float)
    wrapped = np.zeros(y.shape[:-1], dtype=bool) if y.ndim else None
    return DecodeOutcome(estimate=uncoded_mmse_coefficient(src, ch) * y, wrapped=wrapped)


def _wrap_flags(lat: Lattice, folded, genie):
    if genie is None:
        return None
    return np.any(np.abs(folded - genie) > WRAP_TOL * lat.scale, axis=-1)


def encode_lattice_independent(block: SourceBlock, params: SchemeParams, lat: Lattice, u1, u2) -> ChannelInputPair:
    if params.gamma is None:
        raise ValueError("independent-dither encoder needs gamma")
    g = params.gamma
    return ChannelInputPair(
        x1=mod_lattice(lat, g * block.s1 - u1),
        x2=mod_lattice(lat, -g * block.s2 - u2),
    )


def decode_lattice_independent(y, params: SchemeParams, lat: Lattice, u1, u2, genie=None) -> DecodeOutcome:
    if params.alpha is None or params.k_coeff is None or params.gamma is None:
        raise ValueError("independent-dither decoder needs alpha, k_coeff and gamma")
    folded = mod_lattice(lat, params.alpha * np.asarray(y) + u1 + u2)
    estimate = (1.0 - params.k_coeff) / params.gamma * folded
    return DecodeOutcome(estimate=estimate, wrapped=_wrap_flags(lat, folded, genie))


def independent_genie(block: SourceBlock, pair: ChannelInputPair, params: SchemeParams, z):
    """gamma (s1 - s2) + Z1 with Z1 = (alpha - 1)(x1 + x2) + alpha z."""
    a = params.alpha
    return params.gamma * block.s3 + (a - 1.0) * (pair.x1 + pair.x2) + a * z


def encode_lattice_common(block: SourceBlock, lat: Lattice, u) -> ChannelInputPair:
    return ChannelInputPair(
        x1=mod_lattice(lat, block.s1 - u),
        x2=-mod_lattice(lat, block.s2 - u),
    )


def decode_lattice_common(y, lat: Lattice, u, alpha, k_coeff, genie=None, literal_dither=False) -> DecodeOutcome:
    """Decode the common-dither scheme.

    User 1 subtracts ``u`` while user 2 sends ``-(s2 - u)``, so the two dither
    terms already cancel in ``x1 + x2`` modulo the lattice and the receiver
    adds nothing back.  ``literal_dither=True`` instead adds ``u + u``, the
    independent-dither receiver applied verbatim; that variant is biased and
    kept only so it can be measured.
    """
    if alpha is None or k_coeff is None:
        raise ValueError("common-dither decoder needs alpha and k_coeff")
    arg = alpha * np.asarray(y)
    if literal_dither:
        arg = arg + 2.0 * np.asarray(u)
    folded = mod_lattice(lat, arg)
    return DecodeOutcome(estimate=(1.0 - k_coeff) * folded, wrapped=_wrap_flags(lat, folded, genie))


def common_genie(block: SourceBlock, pair: ChannelInputPair, alpha: float, z):
    """(s1 - s2) + Z1 with Z1 = (alpha - 1)(x1 + x2) + alpha z."""
    return block.s3 + (alpha - 1.0) * (pair.x1 + pair.x2) + alpha * z
