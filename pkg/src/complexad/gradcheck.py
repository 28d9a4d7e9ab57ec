"""Finite-difference ground truth and the pointwise holomorphicity check.

The realified Jacobian of a computation f at z collects the four blocks
of partial derivatives of (u, v) = (re f, im f) with respect to
(x, y) = (re z, im z), estimated with central differences:

    [du/dx  du/dy]
    [dv/dx  dv/dy]

Multiplying the blocks against a split tangent and mapping back via
(1, i) reproduces forward mode without touching any analytic rule;
transposing them against a split cotangent reproduces reverse mode under
either convention. The d/dzbar estimate ((du/dx - dv/dy) +
i(dv/dx + du/dy)) / 2 vanishes at points where the Cauchy-Riemann
equations hold, so its magnitude is a pointwise holomorphicity
diagnostic. All checks in this module sample a single point; none of
them certify anything globally.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import ComplexTensor, Convention, EngineError, ShapeError, astensor
from .graph import Graph, evaluate


@dataclass(frozen=True)
class RealJacobian:
    """The four real derivative blocks of a computation at one point.

    Each block is a real matrix of shape (output_size, input_size) over
    row-major flattened entries.
    """

    dxu: np.ndarray
    dyu: np.ndarray
    dxv: np.ndarray
    dyv: np.ndarray
    in_shape: tuple[int, ...]
    out_shape: tuple[int, ...]


def real_jacobian_fd(graph: Graph, z, h: float = 1e-5) -> RealJacobian:
    """Estimate the realified Jacobian blocks with central differences.

    The step ``h`` is absolute and applied per coordinate. Non-finite
    stencil evaluations raise DomainError from the evaluation itself.
    """
    if h <= 0:
        raise EngineError(f"finite-difference step must be positive, got {h}")
    zt = astensor(z)
    if zt.shape != graph.input_shape:
        raise ShapeError(
            f"input shape {zt.shape} does not match graph input shape {graph.input_shape}"
        )
    base = zt.data
    n = base.size
    out_shape = graph.output_shape
    m = int(np.prod(out_shape)) if out_shape else 1

    def probe(entry: int, delta: complex) -> np.ndarray:
        shifted = base.copy().reshape(-1)
        shifted[entry] += delta
        return evaluate(graph, ComplexTensor(shifted.reshape(base.shape))).data.reshape(-1)

    dxu = np.zeros((m, n))
    dyu = np.zeros((m, n))
    dxv = np.zeros((m, n))
    dyv = np.zeros((m, n))
    for j in range(n):
        dfx = (probe(j, h) - probe(j, -h)) / (2.0 * h)
        dfy = (probe(j, 1j * h) - probe(j, -1j * h)) / (2.0 * h)
        dxu[:, j] = dfx.real
        dxv[:, j] = dfx.imag
        dyu[:, j] = dfy.real
        dyv[:, j] = dfy.imag
    return RealJacobian(dxu, dyu, dxv, dyv, zt.shape, out_shape)


def jvp_from_real_jacobian(jac: RealJacobian, z_tangent) -> ComplexTensor:
    """Tangent push through the real blocks: (1, i) . J . (x', y')."""
    t = astensor(z_tangent)
    if t.shape != jac.in_shape:
        raise ShapeError(f"tangent shape {t.shape} does not match input shape {jac.in_shape}")
    x, y = t.data.real.reshape(-1), t.data.imag.reshape(-1)
    u = jac.dxu @ x + jac.dyu @ y
    v = jac.dxv @ x + jac.dyv @ y
    return ComplexTensor((u + 1j * v).reshape(jac.out_shape))


def vjp_from_real_jacobian(
    jac: RealJacobian, out_cotangent, convention: Convention = Convention.PLUS
) -> ComplexTensor:
    """Cotangent pull through the transposed real blocks.

    The seed splits as (re c, s * im c) and the result joins as
    xbar + i * s * ybar, with s = +1 for PLUS and -1 for MINUS.
    """
    c = astensor(out_cotangent)
    if c.shape != jac.out_shape:
        raise ShapeError(
            f"cotangent shape {c.shape} does not match output shape {jac.out_shape}"
        )
    s = 1.0 if convention is Convention.PLUS else -1.0
    ubar = c.data.real.reshape(-1)
    vbar = s * c.data.imag.reshape(-1)
    xbar = jac.dxu.T @ ubar + jac.dxv.T @ vbar
    ybar = jac.dyu.T @ ubar + jac.dyv.T @ vbar
    return ComplexTensor((xbar + 1j * s * ybar).reshape(jac.in_shape))


def dzbar_fd(graph: Graph, z, h: float = 1e-5) -> np.ndarray:
    """Finite-difference estimate of the d/dzbar operator at ``z``."""
    jac = real_jacobian_fd(graph, z, h)
    return ((jac.dxu - jac.dyv) + 1j * (jac.dxv + jac.dyu)) / 2.0


class HolomorphicityReport(NamedTuple):
    is_holomorphic: bool
    dzbar_norm: float


def holomorphicity_check(
    graph: Graph, z, tol: float = 1e-6, h: float = 1e-5
) -> HolomorphicityReport:
    """Decide whether d/dzbar vanishes at the single point ``z``.

    ``dzbar_norm`` is the maximum entry modulus of the finite-difference
    d/dzbar estimate. The verdict holds at this point only; a computation
    can be holomorphic at one point and not at another.
    """
    if tol <= 0:
        raise EngineError(f"tolerance must be positive, got {tol}")
    norm = float(np.max(np.abs(dzbar_fd(graph, z, h))))
    return HolomorphicityReport(norm <= tol, norm)


def relative_error(a, b) -> float:
    """Max-entry relative deviation between two tensors.

    The denominator is the larger of the two max-entry magnitudes; when
    both are below 1e-12 the absolute deviation is returned instead.
    """
    aa = astensor(a).data
    bb = astensor(b).data
    if aa.shape != bb.shape:
        raise ShapeError(f"cannot compare shapes {aa.shape} and {bb.shape}")
    diff = float(np.max(np.abs(aa - bb))) if aa.size else 0.0
    scale = max(
        float(np.max(np.abs(aa))) if aa.size else 0.0,
        float(np.max(np.abs(bb))) if bb.size else 0.0,
    )
    if scale < 1e-12:
        return diff
    return diff / scale
