"""Registry of differentiable primitives.

Each primitive bundles evaluation with, for every input slot, an analytic
rule producing the derivative pair (d/dz, d/dzbar) at the primal point.
The pair is returned as dense matrices over row-major flattened entries
(see :class:`~complexad.core.WirtingerPair`). Derivative pairs treat z and
conj(z) as independent variables, so for example:

======== ===========================  ==========================
name     d/dz                         d/dzbar
======== ===========================  ==========================
add      (I, I)                       0
sub      (I, -I)                      0
neg      -I                           0
mul      (diag v, diag u)             0
div      (diag 1/v, diag -u/v^2)      0
scale c  c I                          0
powi k   diag(k z^(k-1))              0
conj     0                            I
re       I/2                          I/2
im       -i/2 I                       +i/2 I
abs2     diag(conj z)                 diag(z)
exp      diag(exp z)                  0
log      diag(1/z)                    0
sin      diag(cos z)                  0
cos      diag(-sin z)                 0
dot      (b^T, a^T)                   0
hdot     (0, conj(a)^T)               (b^T, 0)
matvec   (d/dA block, A)              0
sum      ones row                     0
======== ===========================  ==========================

A primitive whose d/dzbar blocks are identically zero for all slots is
holomorphic; this is exactly the set for which forward tangent
propagation is complex-linear. ``div`` and ``log`` raise
:class:`~complexad.core.DomainError` at zero instead of returning
infinities, and any non-finite result surfaces as an error.

:func:`wirtinger_by_definition` realizes the defining formulas
``d/dz = (d/dx - i d/dy)/2`` and ``d/dzbar = (d/dx + i d/dy)/2`` with
central differences, giving an independent check of every analytic rule.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from types import MappingProxyType
from typing import Callable, Mapping, Sequence

import numpy as np

from .core import (
    ComplexTensor,
    DomainError,
    EngineError,
    ShapeError,
    WirtingerPair,
    astensor,
)

Shape = tuple[int, ...]


@dataclass(frozen=True)
class Primitive:
    """A differentiable operation with analytic derivative rules.

    ``eval_fn`` and ``rule_fn`` are pure functions over raw complex128
    arrays; the public :meth:`eval` and :meth:`wirtinger_rule` wrappers
    validate arity, parameters, and shapes, and wrap results in
    :class:`ComplexTensor` (which surfaces non-finite values).
    """

    name: str
    arity: int
    shape_rule: Callable[[tuple[Shape, ...], object], Shape]
    eval_fn: Callable[[tuple[np.ndarray, ...], object], np.ndarray]
    rule_fn: Callable[[tuple[np.ndarray, ...], int, object], WirtingerPair]
    holomorphic: bool
    param_kind: str | None = None  # None, "int" (powi), or "complex" (scale)

    def check_param(self, param) -> object:
        if self.param_kind is None:
            if param is not None:
                raise EngineError(f"{self.name} takes no parameter")
            return None
        if param is None:
            raise EngineError(f"{self.name} requires a parameter")
        if self.param_kind == "int":
            if isinstance(param, bool) or not isinstance(param, int):
                raise EngineError(f"{self.name} parameter must be an integer")
            return param
        value = complex(param)
        if not (np.isfinite(value.real) and np.isfinite(value.imag)):
            raise DomainError(f"{self.name} parameter must be finite")
        return value

    def output_shape(self, input_shapes: Sequence[Shape], param=None) -> Shape:
        if len(input_shapes) != self.arity:
            raise ShapeError(
                f"{self.name} takes {self.arity} input(s), got {len(input_shapes)}"
            )
        return self.shape_rule(tuple(input_shapes), param)

    def eval(self, inputs: Sequence[ComplexTensor], param=None) -> ComplexTensor:
        param = self.check_param(param)
        tensors = [astensor(v) for v in inputs]
        self.output_shape([t.shape for t in tensors], param)
        result = self.eval_fn(tuple(t.data for t in tensors), param)
        return ComplexTensor(result)

    def wirtinger_rule(
        self, inputs: Sequence[ComplexTensor], input_index: int, param=None
    ) -> WirtingerPair:
        param = self.check_param(param)
        tensors = [astensor(v) for v in inputs]
        if not 0 <= input_index < self.arity:
            raise EngineError(
                f"{self.name} has no input slot {input_index} (arity {self.arity})"
            )
        self.output_shape([t.shape for t in tensors], param)
        return self.rule_fn(tuple(t.data for t in tensors), input_index, param)


class Registry:
    """Immutable name -> Primitive mapping."""

    def __init__(self, primitives: Sequence[Primitive]) -> None:
        table: dict[str, Primitive] = {}
        for prim in primitives:
            if prim.name in table:
                raise EngineError(f"duplicate primitive name {prim.name!r}")
            table[prim.name] = prim
        self._table: Mapping[str, Primitive] = MappingProxyType(table)

    def get(self, name: str) -> Primitive:
        try:
            return self._table[name]
        except KeyError:
            raise EngineError(f"unknown primitive {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._table

    def names(self) -> tuple[str, ...]:
        return tuple(self._table)


# shape rules

def _shape_same(shapes, param):
    a, b = shapes
    if a != b:
        raise ShapeError(f"elementwise operands must share a shape, got {a} and {b}")
    return a


def _shape_unary(shapes, param):
    return shapes[0]


def _shape_vector_pair(shapes, param):
    a, b = shapes
    if len(a) != 1 or a != b:
        raise ShapeError(f"expected two vectors of equal length, got {a} and {b}")
    return ()


def _shape_matvec(shapes, param):
    mat, vec = shapes
    if len(mat) != 2 or len(vec) != 1 or mat[1] != vec[0]:
        raise ShapeError(f"matvec needs (m, n) matrix and (n,) vector, got {mat} and {vec}")
    return (mat[0],)


def _shape_sum(shapes, param):
    if len(shapes[0]) != 1:
        raise ShapeError(f"sum expects a vector, got shape {shapes[0]}")
    return ()


# evaluation

def _eval_div(arrays, param):
    num, den = arrays
    if np.any(den == 0):
        raise DomainError("division by zero")
    return num / den


def _eval_log(arrays, param):
    (z,) = arrays
    if np.any(z == 0):
        raise DomainError("log of zero")
    return np.log(z)


def _eval_powi(arrays, param):
    (z,) = arrays
    if param < 0 and np.any(z == 0):
        raise DomainError(f"zero raised to negative power {param}")
    return z ** param


# derivative rules; `arrays` holds the primal inputs, `k` the input slot

def _rule_add(arrays, k, param):
    return WirtingerPair.elementwise(np.ones_like(arrays[k]))


def _rule_sub(arrays, k, param):
    sign = 1.0 if k == 0 else -1.0
    return WirtingerPair.elementwise(sign * np.ones_like(arrays[k]))


def _rule_neg(arrays, k, param):
    return WirtingerPair.elementwise(-np.ones_like(arrays[0]))


def _rule_mul(arrays, k, param):
    other = arrays[1 - k]
    return WirtingerPair.elementwise(other)


def _rule_div(arrays, k, param):
    num, den = arrays
    if np.any(den == 0):
        raise DomainError("division by zero")
    if k == 0:
        return WirtingerPair.elementwise(1.0 / den)
    return WirtingerPair.elementwise(-num / (den * den))


def _rule_scale(arrays, k, param):
    return WirtingerPair.elementwise(np.full_like(arrays[0], param))


def _rule_powi(arrays, k, param):
    (z,) = arrays
    if param == 0:
        return WirtingerPair.elementwise(np.zeros_like(z))
    if param < 1 and np.any(z == 0):
        raise DomainError(f"derivative of z**{param} undefined at zero")
    return WirtingerPair.elementwise(param * z ** (param - 1))


def _rule_conj(arrays, k, param):
    ones = np.ones_like(arrays[0])
    return WirtingerPair.elementwise(np.zeros_like(arrays[0]), ones)


def _rule_re(arrays, k, param):
    half = np.full_like(arrays[0], 0.5)
    return WirtingerPair.elementwise(half, half)


def _rule_im(arrays, k, param):
    half_i = np.full_like(arrays[0], 0.5j)
    return WirtingerPair.elementwise(-half_i, half_i)


def _rule_abs2(arrays, k, param):
    (z,) = arrays
    return WirtingerPair.elementwise(np.conj(z), z)


def _rule_exp(arrays, k, param):
    return WirtingerPair.elementwise(np.exp(arrays[0]))


def _rule_log(arrays, k, param):
    (z,) = arrays
    if np.any(z == 0):
        raise DomainError("derivative of log undefined at zero")
    return WirtingerPair.elementwise(1.0 / z)


def _rule_sin(arrays, k, param):
    return WirtingerPair.elementwise(np.cos(arrays[0]))


def _rule_cos(arrays, k, param):
    return WirtingerPair.elementwise(-np.sin(arrays[0]))


def _rule_dot(arrays, k, param):
    other = arrays[1 - k]
    row = other.reshape(1, -1)
    return WirtingerPair(ComplexTensor(row), ComplexTensor(np.zeros_like(row)))


def _rule_hdot(arrays, k, param):
    a, b = arrays
    if k == 0:
        row = b.reshape(1, -1)
        return WirtingerPair(ComplexTensor(np.zeros_like(row)), ComplexTensor(row))
    row = np.conj(a).reshape(1, -1)
    return WirtingerPair(ComplexTensor(row), ComplexTensor(np.zeros_like(row)))


def _rule_matvec(arrays, k, param):
    mat, vec = arrays
    m, n = mat.shape
    if k == 1:
        return WirtingerPair(ComplexTensor(mat), ComplexTensor(np.zeros_like(mat)))
    # d(A z)_i / dA_(i, l) = z_l over row-major flattened A entries
    jac = np.kron(np.eye(m), vec.reshape(1, n))
    return WirtingerPair(ComplexTensor(jac), ComplexTensor(np.zeros_like(jac)))


def _rule_sum(arrays, k, param):
    row = np.ones((1, arrays[0].size), dtype=np.complex128)
    return WirtingerPair(ComplexTensor(row), ComplexTensor(np.zeros_like(row)))


_BUILTINS = (
    Primitive("add", 2, _shape_same, lambda a, p: a[0] + a[1], _rule_add, True),
    Primitive("sub", 2, _shape_same, lambda a, p: a[0] - a[1], _rule_sub, True),
    Primitive("neg", 1, _shape_unary, lambda a, p: -a[0], _rule_neg, True),
    Primitive("mul", 2, _shape_same, lambda a, p: a[0] * a[1], _rule_mul, True),
    Primitive("div", 2, _shape_same, _eval_div, _rule_div, True),
    Primitive("scale", 1, _shape_unary, lambda a, p: p * a[0], _rule_scale, True, "complex"),
    Primitive("powi", 1, _shape_unary, _eval_powi, _rule_powi, True, "int"),
    Primitive("conj", 1, _shape_unary, lambda a, p: np.conj(a[0]), _rule_conj, False),
    Primitive("re", 1, _shape_unary, lambda a, p: a[0].real + 0j, _rule_re, False),
    Primitive("im", 1, _shape_unary, lambda a, p: a[0].imag + 0j, _rule_im, False),
    Primitive("abs2", 1, _shape_unary, lambda a, p: a[0] * np.conj(a[0]), _rule_abs2, False),
    Primitive("exp", 1, _shape_unary, lambda a, p: np.exp(a[0]), _rule_exp, True),
    Primitive("log", 1, _shape_unary, _eval_log, _rule_log, True),
    Primitive("sin", 1, _shape_unary, lambda a, p: np.sin(a[0]), _rule_sin, True),
    Primitive("cos", 1, _shape_unary, lambda a, p: np.cos(a[0]), _rule_cos, True),
    Primitive("dot", 2, _shape_vector_pair, lambda a, p: np.dot(a[0], a[1]), _rule_dot, True),
    Primitive("hdot", 2, _shape_vector_pair, lambda a, p: np.dot(np.conj(a[0]), a[1]), _rule_hdot, False),
    Primitive("matvec", 2, _shape_matvec, lambda a, p: a[0] @ a[1], _rule_matvec, True),
    Primitive("sum", 1, _shape_sum, lambda a, p: np.sum(a[0]), _rule_sum, True),
)


@lru_cache(maxsize=1)
def builtin_registry() -> Registry:
    """The registry of built-in primitives listed in the module docstring."""
    return Registry(_BUILTINS)


def wirtinger_by_definition(
    primitive: Primitive,
    inputs: Sequence[ComplexTensor],
    input_index: int,
    h: float = 1e-5,
    param=None,
) -> WirtingerPair:
    """Estimate a primitive's derivative pair from its defining formulas.

    Central differences with step ``h`` along the real and imaginary
    coordinate of each entry of the selected input give d/dx and d/dy;
    the pair is then ((d/dx - i d/dy)/2, (d/dx + i d/dy)/2). Completely
    independent of the analytic rules, so it serves as their oracle.
    """
    if h <= 0:
        raise EngineError(f"finite-difference step must be positive, got {h}")
    param = primitive.check_param(param)
    tensors = [astensor(v) for v in inputs]
    out_shape = primitive.output_shape([t.shape for t in tensors], param)
    base = tensors[input_index].data
    n = base.size
    m = int(np.prod(out_shape)) if out_shape else 1

    def eval_with(entry: int, delta: complex) -> np.ndarray:
        probe = base.copy().reshape(-1)
        probe[entry] += delta
        probed = list(tensors)
        probed[input_index] = ComplexTensor(probe.reshape(base.shape))
        return primitive.eval(probed, param=param).data.reshape(-1)

    dx = np.zeros((m, n), dtype=np.complex128)
    dy = np.zeros((m, n), dtype=np.complex128)
    for j in range(n):
        dx[:, j] = (eval_with(j, h) - eval_with(j, -h)) / (2.0 * h)
        dy[:, j] = (eval_with(j, 1j * h) - eval_with(j, -1j * h)) / (2.0 * h)
    return WirtingerPair(
        ComplexTensor((dx - 1j * dy) / 2.0),
        ComplexTensor((dx + 1j * dy) / 2.0),
    )
