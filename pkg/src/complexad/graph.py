"""Computation graphs over the primitive registry.

A graph is a topologically ordered tuple of nodes with exactly one free
input; constants are embedded as nodes. The same structure is walked by
plain evaluation, forward-mode differentiation, and tape recording.
Graphs are immutable once built and safe to share between threads.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import ComplexTensor, DomainError, EngineError, ShapeError, astensor
from .primitives import Registry, builtin_registry

INPUT = "input"
CONST = "const"
APPLY = "apply"


@dataclass(frozen=True)
class Node:
    kind: str
    shape: tuple[int, ...]
    op: str | None = None
    args: tuple[int, ...] = ()
    value: ComplexTensor | None = None
    param: object = None


@dataclass(frozen=True)
class Graph:
    registry: Registry
    nodes: tuple[Node, ...]
    input_id: int
    output_id: int

    @property
    def input_shape(self) -> tuple[int, ...]:
        return self.nodes[self.input_id].shape

    @property
    def output_shape(self) -> tuple[int, ...]:
        return self.nodes[self.output_id].shape

    def is_holomorphic(self) -> bool:
        """True when every applied primitive has a vanishing d/dzbar block."""
        return all(
            self.registry.get(node.op).holomorphic
            for node in self.nodes
            if node.kind == APPLY
        )


class GraphBuilder:
    """Programmatic construction of a graph over a registry.

    Methods return node ids to be passed as arguments of later nodes;
    :meth:`build` freezes the structure. Exactly one input is allowed.
    """

    def __init__(self, registry: Registry | None = None) -> None:
        self._registry = registry if registry is not None else builtin_registry()
        self._nodes: list[Node] = []
        self._input_id: int | None = None

    def input(self, shape: tuple[int, ...] = ()) -> int:
        if self._input_id is not None:
            raise EngineError("graph already has an input")
        self._input_id = len(self._nodes)
        self._nodes.append(Node(INPUT, tuple(shape)))
        return self._input_id

    def const(self, value) -> int:
        tensor = astensor(value)
        self._nodes.append(Node(CONST, tensor.shape, value=tensor))
        return len(self._nodes) - 1

    def apply(self, op: str, *args: int, param=None) -> int:
        primitive = self._registry.get(op)
        param = primitive.check_param(param)
        for arg in args:
            if not 0 <= arg < len(self._nodes):
                raise EngineError(f"argument id {arg} does not name an earlier node")
        shapes = [self._nodes[a].shape for a in args]
        out_shape = primitive.output_shape(shapes, param)
        self._nodes.append(Node(APPLY, out_shape, op=op, args=tuple(args), param=param))
        return len(self._nodes) - 1

    def build(self, output_id: int | None = None) -> Graph:
        if self._input_id is None:
            raise EngineError("graph has no input; declare one with input()")
        if output_id is None:
            output_id = len(self._nodes) - 1
        if not 0 <= output_id < len(self._nodes):
            raise EngineError(f"output id {output_id} does not name a node")
        return Graph(self._registry, tuple(self._nodes), self._input_id, output_id)


def node_error(exc: EngineError, node_id: int, op: str) -> EngineError:
    """Rewrap an error with the identity of the node that raised it."""
    return type(exc)(f"at node {node_id} ({op}): {exc}")


def evaluate(graph: Graph, z) -> ComplexTensor:
    """Evaluate the graph at the input value ``z``."""
    zt = astensor(z)
    if zt.shape != graph.input_shape:
        raise ShapeError(
            f"input shape {zt.shape} does not match graph input shape {graph.input_shape}"
        )
    values: list[ComplexTensor] = []
    for node_id, node in enumerate(graph.nodes):
        if node.kind == INPUT:
            values.append(zt)
        elif node.kind == CONST:
            values.append(node.value)
        else:
            primitive = graph.registry.get(node.op)
            inputs = [values[a] for a in node.args]
            try:
                values.append(primitive.eval(inputs, param=node.param))
            except (DomainError, ShapeError) as exc:
                raise node_error(exc, node_id, node.op) from exc
    return values[graph.output_id]
