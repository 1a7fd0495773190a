"""Closed-form distortions and scheme constants.

Every function takes the source and channel parameters by value and is a
pure evaluation; nothing here touches a random stream.  Notation: ``v`` is
the variance of the source difference, ``2 sigma2 (1 - rho)``, and ``snr``
is ``P / N``.
"""

from __future__ import annotations

import dataclasses
import math

from .sources import SourceModel

SCHEMES = ("uncoded", "lattice-independent", "lattice-common")


class ThresholdError(ValueError):
    """The scaled-lattice scheme needs P/N > 1/2."""


@dataclasses.dataclass(frozen=True)
class ChannelModel:
    P: float
    N: float

    def __post_init__(self):
        for name in ("P", "N"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0):
                raise ValueError(f"{name} must be positive and finite, got {val}")

    @property
    def snr(self) -> float:
        return self.P / self.N


@dataclasses.dataclass(frozen=True)
class SchemeParams:
    scheme: str
    alpha: float | None = None
    k_coeff: float | None = None
    gamma: float | None = None
    rho_prime: float | None = None
    feasible: bool = True

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.scheme == "lattice-independent":
            missing = [f for f in ("alpha", "k_coeff", "gamma") if getattr(self, f) is None]
            if missing or self.rho_prime is not None:
                raise ValueError(f"lattice-independent params need alpha, k_coeff, gamma only; missing {missing}")
        elif self.scheme == "lattice-common":
            if self.alpha is None or self.k_coeff is None or self.rho_prime is None or self.gamma is not None:
                raise ValueError("lattice-common params need alpha, k_coeff, rho_prime and no gamma")


def _check_threshold(ch: ChannelModel):
    if not ch.P / ch.N > 0.5:
        raise ThresholdError(f"scaled-lattice scheme needs P/N > 1/2, got P/N = {ch.P / ch.N:g}")


def _check_rho_prime(rho_prime: float, allow_minus_one: bool):
    ok = -1.0 <= rho_prime <= 1.0 if allow_minus_one else -1.0 < rho_prime <= 1.0
    if not ok:
        interval = "[-1, 1]" if allow_minus_one else "(-1, 1]"
        raise ValueError(f"rho_prime must lie in {interval}, got {rho_prime}")


def distortion_lower_bound(src: SourceModel, ch: ChannelModel) -> float:
    return src.diff_variance / (1.0 + 2.0 * ch.P / ch.N)


def uncoded_distortion(src: SourceModel, ch: ChannelModel) -> float:
    return src.diff_variance / (1.0 + 2.0 * ch.P * (1.0 - src.rho) / ch.N)


def effective_noise_variance(ch: ChannelModel) -> float:
    """Per-dimension variance of the receiver's effective noise, 2PN/(2P+N)."""
    return 2.0 * ch.P * ch.N / (2.0 * ch.P + ch.N)


def lattice_gamma(src: SourceModel, ch: ChannelModel) -> float:
    """Source scaling that fills the lattice exactly: gamma^2 v + 2PN/(2P+N) = P."""
    _check_threshold(ch)
    return math.sqrt((ch.P - effective_noise_variance(ch)) / src.diff_variance)


def lattice_alpha(ch: ChannelModel) -> float:
    return 2.0 * ch.P / (2.0 * ch.P + ch.N)


def lattice_k(src: SourceModel, ch: ChannelModel, gamma: float) -> float:
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    num = 2.0 * ch.P * ch.N
    return num / (num + src.diff_variance * gamma**2 * (2.0 * ch.P + ch.N))


def lattice_distortion(src: SourceModel, ch: ChannelModel) -> float:
    _check_threshold(ch)
    return src.diff_variance / (ch.P / ch.N + 0.5)


def lattice_distortion_k_form(src: SourceModel, ch: ChannelModel) -> float:
    """D_lattice written through gamma, before substituting the value of gamma."""
    v = src.diff_variance
    g2 = lattice_gamma(src, ch) ** 2
    return v / (1.0 + v * g2 * (2.0 * ch.P + ch.N) / (2.0 * ch.P * ch.N))


def gap_bits(src: SourceModel, ch: ChannelModel) -> float:
    return math.log2(lattice_distortion(src, ch) / distortion_lower_bound(src, ch))


def common_dither_alpha(ch: ChannelModel, rho_prime: float) -> float:
    _check_rho_prime(rho_prime, allow_minus_one=True)
    a = 2.0 * ch.P * (1.0 + rho_prime)
    return a / (a + ch.N)


def common_dither_noise_variance(ch: ChannelModel, rho_prime: float) -> float:
    a = 2.0 * ch.P * (1.0 + rho_prime)
    return a * ch.N / (a + ch.N)


def common_dither_k(src: SourceModel, ch: ChannelModel, rho_prime: float) -> float:
    _check_rho_prime(rho_prime, allow_minus_one=False)
    a = 2.0 * ch.P * (1.0 + rho_prime)
    return a * ch.N / (a * ch.N + src.diff_variance * (a + ch.N))


def common_dither_distortion(src: SourceModel, ch: ChannelModel, rho_prime: float) -> float:
    _check_rho_prime(rho_prime, allow_minus_one=False)
    v = src.diff_variance
    a = 2.0 * ch.P * (1.0 + rho_prime)
    return v / (1.0 + v * (a + ch.N) / (a * ch.N))


def common_dither_feasible(src: SourceModel, ch: ChannelModel, rho_prime: float) -> bool:
    _check_rho_prime(rho_prime, allow_minus_one=False)
    return src.diff_variance + common_dither_noise_variance(ch, rho_prime) <= ch.P


def crossover_criterion(src: SourceModel, ch: ChannelModel) -> float:
    """(2 rho - 1) P/N - 1/2; positive exactly when the lattice scheme wins."""
    return (2.0 * src.rho - 1.0) * ch.P / ch.N - 0.5


def scheme_crossover(src: SourceModel, ch: ChannelModel, rtol: float = 1e-12) -> str:
    """Name of the scheme with smaller analytic distortion, or ``"tie"``."""
    d_lat = lattice_distortion(src, ch)
    d_unc = uncoded_distortion(src, ch)
    if abs(d_lat - d_unc) <= rtol * max(d_lat, d_unc):
        return "tie"
    return "lattice-independent" if d_lat < d_unc else "uncoded"


def independent_params(src: SourceModel, ch: ChannelModel) -> SchemeParams:
    gamma = lattice_gamma(src, ch)
    return SchemeParams(
        scheme="lattice-independent",
        alpha=lattice_alpha(ch),
        k_coeff=lattice_k(src, ch, gamma),
        gamma=gamma,
    )


def common_params(src: SourceModel, ch: ChannelModel, rho_prime: float) -> SchemeParams:
    return SchemeParams(
        scheme="lattice-common",
        alpha=common_dither_alpha(ch, rho_prime),
        k_coeff=common_dither_k(src, ch, rho_prime),
        rho_prime=rho_prime,
        feasible=common_dither_feasible(src, ch, rho_prime),
    )


def analytic_distortion(scheme: str, src: SourceModel, ch: ChannelModel, rho_prime: float | None = None) -> float:
    if scheme == "uncoded":
        return uncoded_distortion(src, ch)
    if scheme == "lattice-independent":
        return lattice_distortion(src, ch)
    if scheme == "lattice-common":
        if rho_prime is None:
            raise ValueError("lattice-common distortion needs rho_prime")
        return common_dither_distortion(src, ch, rho_prime)
    raise ValueError(f"unknown scheme {scheme!r}")
