"""Forward-mode differentiation.

A primitive's output tangent is ``dz @ t + dzbar @ conj(t)``, summed over
input slots, where (dz, dzbar) is the primitive's derivative pair at the
primal point and t the slot's incoming tangent. Propagating (primal,
tangent) pairs node by node yields, at the output, the realified Jacobian
of the whole computation applied to (re t, im t) and mapped back to C via
(1, i). The map t -> output tangent is additive and homogeneous under
*real* scalars; it is complex-linear exactly when every primitive on the
path is holomorphic, in which case it is the classical derivative action.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    ComplexTensor,
    DomainError,
    EngineError,
    ShapeError,
    WirtingerPair,
    astensor,
)
from .graph import CONST, INPUT, Graph, node_error
from .primitives import Primitive


@dataclass(frozen=True)
class Dual:
    """A (primal, tangent) pair; both components share one shape."""

    primal: ComplexTensor
    tangent: ComplexTensor

    def __post_init__(self) -> None:
        if self.primal.shape != self.tangent.shape:
            raise ShapeError(
                f"primal shape {self.primal.shape} != tangent shape {self.tangent.shape}"
            )


def push_primitive(primitive: Primitive, inputs: Sequence[Dual], param=None) -> Dual:
    """Propagate duals through one primitive application."""
    primals = [d.primal for d in inputs]
    out = primitive.eval(primals, param=param)
    tangent = np.zeros(out.shape, dtype=np.complex128)
    for k, dual in enumerate(inputs):
        pair = primitive.wirtinger_rule(primals, k, param=param)
        tangent = tangent + pair.apply_tangent(dual.tangent, out.shape).data
    return Dual(out, ComplexTensor(tangent))


def jvp(graph: Graph, z, z_tangent) -> tuple[ComplexTensor, ComplexTensor]:
    """Evaluate the graph and push a tangent through it.

    Returns ``(value, output_tangent)``.
    """
    zt = astensor(z)
    tt = astensor(z_tangent)
    if zt.shape != graph.input_shape:
        raise ShapeError(
            f"input shape {zt.shape} does not match graph input shape {graph.input_shape}"
        )
    if tt.shape != zt.shape:
        raise ShapeError(f"tangent shape {tt.shape} does not match input shape {zt.shape}")
    duals: list[Dual] = []
    for node_id, node in enumerate(graph.nodes):
        if node.kind == INPUT:
            duals.append(Dual(zt, tt))
        elif node.kind == CONST:
            zero = ComplexTensor(np.zeros(node.shape, dtype=np.complex128))
            duals.append(Dual(node.value, zero))
        else:
            primitive = graph.registry.get(node.op)
            try:
                duals.append(
                    push_primitive(primitive, [duals[a] for a in node.args], param=node.param)
                )
            except (DomainError, ShapeError) as exc:
                raise node_error(exc, node_id, node.op) from exc
    out = duals[graph.output_id]
    return out.primal, out.tangent


def wirtinger_of(graph: Graph, z) -> WirtingerPair:
    """Derivative pair of a scalar-input, scalar-output graph at ``z``.

    Recovered from two pushes: with tangents 1 and i, the pair is
    ``((t1 - i*ti)/2, (t1 + i*ti)/2)``.
    """
    if graph.input_shape != () or graph.output_shape != ():
        raise EngineError(
            "wirtinger_of needs a scalar-input, scalar-output graph; shapes are "
            f"{graph.input_shape} -> {graph.output_shape}"
        )
    _, t1 = jvp(graph, z, 1.0)
    _, ti = jvp(graph, z, 1.0j)
    a, b = t1.item(), ti.item()
    return WirtingerPair.from_scalars((a - 1j * b) / 2.0, (a + 1j * b) / 2.0)
