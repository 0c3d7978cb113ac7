"""Shared builders for test scenarios and random coefficient profiles."""

from __future__ import annotations

import numpy as np

from blowuplab.scenario import (
    ConstantProfile,
    FixedPointScenario,
    PiecewiseLinearProfile,
    SwirlConstants,
)

ARTANH_HALF = 0.5493061443340548  # atanh(1/2) = ln(3)/2


def const(value: float) -> ConstantProfile:
    return ConstantProfile(value=value)


def pw(*knots: tuple[float, float]) -> PiecewiseLinearProfile:
    return PiecewiseLinearProfile(knots=list(knots))


def axis_even(b0=0.0, prr=None, a0=0.0, c0z=None, t_end=3.0, **kw) -> FixedPointScenario:
    if c0z is None:
        c0z = 2.0 * a0  # compatible with the derived-trace constraint
    return FixedPointScenario(
        location="axis", parity="even", swirl=SwirlConstants(b0=b0),
        a0=a0, c0z=c0z, pressure_rr=prr if prr is not None else const(0.0),
        t_end=t_end, **kw,
    )


def boundary_even(b1=0.0, b2=0.0, prr=None, a0=0.0, c0z=None, t_end=3.0, **kw) -> FixedPointScenario:
    if c0z is None:
        c0z = a0
    return FixedPointScenario(
        location="boundary", parity="even", swirl=SwirlConstants(b1=b1, b2=b2),
        a0=a0, c0z=c0z, pressure_rr=prr if prr is not None else const(0.0),
        t_end=t_end, **kw,
    )


def odd_scenario(location="boundary", b3=0.0, prr=None, pzz=None, a0=0.0, c0z=0.0, t_end=3.0):
    kwargs = {}
    if pzz is not None:
        kwargs["pressure_zz"] = pzz
    return FixedPointScenario(
        location=location, parity="odd", swirl=SwirlConstants(b3=b3),
        a0=a0, c0z=c0z, pressure_rr=prr if prr is not None else const(0.0),
        t_end=t_end, **kwargs,
    )


def random_nonneg_profile(rng: np.random.Generator, t_end: float):
    """Constant or piecewise-linear profile with values in [0, 4]."""
    if rng.random() < 0.5:
        return const(float(rng.uniform(0.0, 4.0)))
    n = int(rng.integers(2, 6))
    ts = np.sort(rng.uniform(0.0, t_end, n))
    ts[0] = 0.0
    ts = np.unique(ts)
    vals = rng.uniform(0.0, 4.0, len(ts))
    return pw(*[(float(a), float(b)) for a, b in zip(ts, vals)])


def random_nondecreasing_profile(rng: np.random.Generator, q0: float, t_end: float):
    """Piecewise-linear profile starting at q0 < 0 with nonnegative increments."""
    n = int(rng.integers(2, 6))
    ts = np.sort(rng.uniform(0.0, t_end, n))
    ts[0] = 0.0
    ts = np.unique(ts)
    increments = rng.uniform(0.0, 1.5, len(ts) - 1)
    vals = q0 + np.concatenate(([0.0], np.cumsum(increments)))
    return pw(*[(float(a), float(b)) for a, b in zip(ts, vals)])


def random_bounded_positive_profile(rng: np.random.Generator, t_end: float):
    """Profile with values in [0.3, 4]: keeps the central-force radius away
    from the singularity guard when paired with moderate angular momentum."""
    if rng.random() < 0.5:
        return const(float(rng.uniform(0.3, 4.0)))
    n = int(rng.integers(2, 6))
    ts = np.sort(rng.uniform(0.0, t_end, n))
    ts[0] = 0.0
    ts = np.unique(ts)
    vals = rng.uniform(0.3, 4.0, len(ts))
    return pw(*[(float(a), float(b)) for a, b in zip(ts, vals)])
