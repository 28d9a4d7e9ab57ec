"""Reverse-mode differentiation over a recorded tape.

The per-node backward rule: given the node's output cotangent c, input
slot k receives ``conj(dz_k).T @ c + dzbar_k.T @ conj(c)`` where
(dz_k, dzbar_k) is the slot's derivative pair at the saved primals.
Sweeping a recorded tape in reverse with this rule and summing
contributions across fan-out computes, for a seed cotangent equal to c,
the transpose of the realified Jacobian applied to the split of c,
mapped back to complex values. That is the PLUS convention; the MINUS
convention is served by conjugating both the seed and the result.

The backward result pairs with forward mode through the identity

    Re <c, jvp(z, t)> = Re <vjp(z, c), t>

for every tangent t and seed c, with the inner product conjugate-linear
in its first argument.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    ComplexTensor,
    Convention,
    DomainError,
    EngineError,
    ShapeError,
    astensor,
)
from .graph import CONST, INPUT, Graph, node_error
from .primitives import Primitive


@dataclass(frozen=True)
class TapeNode:
    """One recorded primitive application.

    ``parent_ids`` index graph nodes; the saved primals are sufficient to
    evaluate derivative rules without recomputation.
    """

    id: int
    op: str
    param: object
    parent_ids: tuple[int, ...]
    primal_inputs: tuple[ComplexTensor, ...]
    primal_output: ComplexTensor


@dataclass(frozen=True)
class Tape:
    """A completed forward recording; immutable, reusable for many sweeps."""

    graph: Graph
    nodes: tuple[TapeNode, ...]
    input_value: ComplexTensor
    output_value: ComplexTensor

    @property
    def input_id(self) -> int:
        return self.graph.input_id

    @property
    def output_id(self) -> int:
        return self.graph.output_id


def record(graph: Graph, z) -> tuple[ComplexTensor, Tape]:
    """Evaluate the graph, recording every primitive application."""
    zt = astensor(z)
    if zt.shape != graph.input_shape:
        raise ShapeError(
            f"input shape {zt.shape} does not match graph input shape {graph.input_shape}"
        )
    values: list[ComplexTensor] = []
    recorded: list[TapeNode] = []
    for node_id, node in enumerate(graph.nodes):
        if node.kind == INPUT:
            values.append(zt)
        elif node.kind == CONST:
            values.append(node.value)
        else:
            primitive = graph.registry.get(node.op)
            inputs = tuple(values[a] for a in node.args)
            try:
                out = primitive.eval(inputs, param=node.param)
            except (DomainError, ShapeError) as exc:
                raise node_error(exc, node_id, node.op) from exc
            recorded.append(TapeNode(node_id, node.op, node.param, node.args, inputs, out))
            values.append(out)
    output = values[graph.output_id]
    return output, Tape(graph, tuple(recorded), zt, output)


def replay(tape: Tape) -> ComplexTensor:
    """Re-run the recorded applications; reproduces the value bit for bit."""
    values: dict[int, ComplexTensor] = {tape.graph.input_id: tape.input_value}
    for node_id, node in enumerate(tape.graph.nodes):
        if node.kind == CONST:
            values[node_id] = node.value
    for entry in tape.nodes:
        primitive = tape.graph.registry.get(entry.op)
        inputs = [values[a] for a in entry.parent_ids]
        values[entry.id] = primitive.eval(inputs, param=entry.param)
    return values[tape.output_id]


def pull_node(
    primitive: Primitive,
    primal_inputs: Sequence[ComplexTensor],
    out_cotangent,
    param=None,
) -> tuple[ComplexTensor, ...]:
    """Backward rule of one primitive under the PLUS convention.

    Returns one cotangent per input slot:
    ``conj(dz_k).T @ c + dzbar_k.T @ conj(c)``.
    """
    primals = [astensor(v) for v in primal_inputs]
    cot = astensor(out_cotangent)
    results = []
    for k, primal in enumerate(primals):
        pair = primitive.wirtinger_rule(primals, k, param=param)
        results.append(pair.pull_cotangent(cot, primal.shape))
    return tuple(results)


def _sweep(tape: Tape, seed: ComplexTensor) -> ComplexTensor:
    graph = tape.graph
    in_shape = graph.input_shape
    if not np.any(seed.data):
        return ComplexTensor(np.zeros(in_shape, dtype=np.complex128))
    acc: dict[int, np.ndarray] = {tape.output_id: seed.data.astype(np.complex128)}
    for entry in reversed(tape.nodes):
        cot = acc.pop(entry.id, None)
        if cot is None or not np.any(cot):
            continue
        primitive = graph.registry.get(entry.op)
        for k, parent in enumerate(entry.parent_ids):
            if graph.nodes[parent].kind == CONST:
                continue
            pair = primitive.wirtinger_rule(entry.primal_inputs, k, param=entry.param)
            xi = pair.pull_cotangent(ComplexTensor(cot), entry.primal_inputs[k].shape)
            if parent in acc:
                acc[parent] = acc[parent] + xi.data
            else:
                acc[parent] = xi.data
    result = acc.get(graph.input_id)
    if result is None:
        result = np.zeros(in_shape, dtype=np.complex128)
    return ComplexTensor(result)


def backward(tape: Tape, out_cotangent, convention: Convention = Convention.PLUS) -> ComplexTensor:
    """Sweep a recorded tape with a seed cotangent.

    The MINUS result is ``conj(backward_plus(conj(seed)))`` exactly.
    """
    seed = astensor(out_cotangent)
    if seed.shape != tape.output_value.shape:
        raise ShapeError(
            f"seed shape {seed.shape} does not match output shape {tape.output_value.shape}"
        )
    if convention is Convention.MINUS:
        return _sweep(tape, seed.conj()).conj()
    return _sweep(tape, seed)


def vjp(graph: Graph, z, out_cotangent, convention: Convention = Convention.PLUS) -> ComplexTensor:
    """Record the graph at ``z`` and pull the seed cotangent back to the input."""
    _, tape = record(graph, z)
    return backward(tape, out_cotangent, convention)


def grad(graph: Graph, z, convention: Convention = Convention.PLUS) -> ComplexTensor:
    """Input cotangent for the unit seed; requires a scalar output."""
    if graph.output_shape != ():
        raise EngineError(
            f"grad needs a scalar-output graph, output shape is {graph.output_shape}"
        )
    return vjp(graph, z, 1.0, convention)
