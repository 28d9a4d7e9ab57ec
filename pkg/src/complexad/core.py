"""Complex tensor values, inner products, and gradient conventions.

This package differentiates computations built from complex primitives by
working in the realified picture: a complex tensor is a pair of real
tensors (its real and imaginary parts), derivatives are taken there, and
results are mapped back to complex numbers. This module holds the value
types shared by every other module:

* :class:`ComplexTensor` -- an immutable complex scalar, vector, or matrix.
* :class:`WirtingerPair` -- the pair of derivative operators
  (d/dz, d/dzbar) of one primitive with respect to one of its inputs.
* :class:`Convention` -- the sign choice made when mapping reverse-mode
  cotangents back to complex values.

It also implements the complex literal text format used by the CLI and by
CSV matrix files.
"""

from __future__ import annotations

import enum
import re as _regex
from dataclasses import dataclass
from typing import Iterator

import numpy as np


class EngineError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(EngineError):
    """Operands do not conform to an operation's arity or shape rule."""


class DomainError(EngineError):
    """Evaluation left an operation's domain or produced non-finite values."""


class LiteralError(EngineError):
    """A complex literal, vector, or CSV matrix failed to parse."""


class Convention(enum.Enum):
    """Sign convention for mapping reverse-mode cotangents back to C.

    PLUS treats the reverse pass as the adjoint of the forward pass, so
    gradients of holomorphic functions come out conjugated: the gradient
    of z**2/2 at z is conj(z). This matches PyTorch and TensorFlow.
    MINUS is the literal transpose; the same gradient comes out as z,
    matching JAX. The two are interchangeable: the MINUS cotangent equals
    the conjugate of the PLUS cotangent computed for a conjugated seed.
    """

    PLUS = "plus"
    MINUS = "minus"

    @classmethod
    def from_name(cls, name: str) -> "Convention":
        try:
            return cls(name.lower())
        except ValueError:
            raise EngineError(
                f"unknown convention {name!r}; expected 'plus' or 'minus'"
            ) from None


class ComplexTensor:
    """An immutable complex tensor of rank 0, 1, or 2.

    Entries are stored as a read-only complex128 array. Construction
    rejects non-finite entries so NaN and infinity surface at the point
    where they are produced instead of propagating silently.
    """

    __slots__ = ("_data",)

    def __init__(self, data) -> None:
        if isinstance(data, ComplexTensor):
            self._data = data._data
            return
        arr = np.array(data, dtype=np.complex128)
        if arr.ndim > 2:
            raise ShapeError(f"rank {arr.ndim} tensor not supported (max rank 2)")
        if not np.all(np.isfinite(arr)):
            raise DomainError("non-finite value (NaN or infinity)")
        arr.setflags(write=False)
        self._data = arr

    @property
    def data(self) -> np.ndarray:
        """The underlying read-only complex128 array."""
        return self._data

    @property
    def shape(self) -> tuple[int, ...]:
        return self._data.shape

    @property
    def rank(self) -> int:
        return self._data.ndim

    @property
    def size(self) -> int:
        return self._data.size

    def item(self) -> complex:
        if self._data.size != 1:
            raise ShapeError(f"item() needs a single entry, shape is {self.shape}")
        return complex(self._data.reshape(())[()])

    def conj(self) -> "ComplexTensor":
        return ComplexTensor(np.conj(self._data))

    def __iter__(self) -> Iterator[complex]:
        return (complex(v) for v in self._data.ravel())

    def __eq__(self, other) -> bool:
        if not isinstance(other, ComplexTensor):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self._data, other._data))

    __hash__ = None  # value equality, unhashable like numpy arrays

    def __repr__(self) -> str:
        if self.rank == 0:
            return f"ComplexTensor({format_complex(self.item())})"
        return f"ComplexTensor(shape={self.shape}, data={self._data.tolist()!r})"


def astensor(value) -> ComplexTensor:
    """Coerce a complex number, nested sequence, or array to a ComplexTensor."""
    if isinstance(value, ComplexTensor):
        return value
    return ComplexTensor(value)


def split_reim(z) -> tuple[np.ndarray, np.ndarray]:
    """Split a complex tensor into its real and imaginary parts.

    Returns two real float64 arrays of the same shape as ``z``.
    """
    arr = astensor(z).data
    return arr.real.copy(), arr.imag.copy()


def join_reim(x, y) -> ComplexTensor:
    """Combine real and imaginary parts into a complex tensor.

    Exact inverse of :func:`split_reim`: ``join_reim(*split_reim(z)) == z``
    holds bit for bit.
    """
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.shape != ya.shape:
        raise ShapeError(f"real part shape {xa.shape} != imaginary part shape {ya.shape}")
    return ComplexTensor(xa + 1j * ya)


def hermitian_inner(a, b) -> complex:
    """Inner product sum(conj(a[k]) * b[k]) over scalars or vectors.

    Conjugate-linear in the first argument and linear in the second.
    """
    ta, tb = astensor(a), astensor(b)
    if ta.rank > 1 or tb.rank > 1:
        raise ShapeError("hermitian_inner is defined for scalars and vectors only")
    if ta.shape != tb.shape:
        raise ShapeError(f"shape mismatch: {ta.shape} vs {tb.shape}")
    return complex(np.vdot(ta.data.ravel(), tb.data.ravel()))


def conjugate(z) -> ComplexTensor:
    """Entrywise complex conjugate."""
    return astensor(z).conj()


@dataclass(frozen=True)
class WirtingerPair:
    """The derivative pair (d/dz, d/dzbar) of one output w.r.t. one input.

    Both operators are stored as dense matrices of shape
    ``(output_size, input_size)`` over row-major flattened entries, so
    elementwise rules appear as diagonal matrices and scalar rules as
    1x1 matrices. Applying the pair to an input tangent t gives the
    output tangent ``dz @ t + dzbar @ conj(t)``; pulling an output
    cotangent c back gives ``conj(dz).T @ c + dzbar.T @ conj(c)``.
    """

    dz: ComplexTensor
    dzbar: ComplexTensor

    def __post_init__(self) -> None:
        if self.dz.rank != 2 or self.dzbar.rank != 2:
            raise ShapeError("derivative operators must be rank-2 matrices")
        if self.dz.shape != self.dzbar.shape:
            raise ShapeError(
                f"dz shape {self.dz.shape} != dzbar shape {self.dzbar.shape}"
            )

    @classmethod
    def from_scalars(cls, dz: complex, dzbar: complex) -> "WirtingerPair":
        return cls(ComplexTensor([[dz]]), ComplexTensor([[dzbar]]))

    @classmethod
    def elementwise(cls, dz_entries, dzbar_entries=None) -> "WirtingerPair":
        """Diagonal pair for an entrywise rule; dzbar defaults to zero."""
        dz_flat = np.asarray(dz_entries, dtype=np.complex128).ravel()
        dz_mat = np.diag(dz_flat)
        if dzbar_entries is None:
            dzbar_mat = np.zeros_like(dz_mat)
        else:
            dzbar_mat = np.diag(np.asarray(dzbar_entries, dtype=np.complex128).ravel())
        return cls(ComplexTensor(dz_mat), ComplexTensor(dzbar_mat))

    @property
    def output_size(self) -> int:
        return self.dz.shape[0]

    @property
    def input_size(self) -> int:
        return self.dz.shape[1]

    def apply_tangent(self, tangent, out_shape: tuple[int, ...]) -> ComplexTensor:
        """Forward-mode action: ``dz @ t + dzbar @ conj(t)``."""
        t = astensor(tangent).data.ravel()
        if t.size != self.input_size:
            raise ShapeError(f"tangent has {t.size} entries, rule expects {self.input_size}")
        out = self.dz.data @ t + self.dzbar.data @ np.conj(t)
        return ComplexTensor(out.reshape(out_shape))

    def pull_cotangent(self, out_cotangent, in_shape: tuple[int, ...]) -> ComplexTensor:
        """Reverse-mode action: ``conj(dz).T @ c + dzbar.T @ conj(c)``.

        Transposes are plain (non-conjugating); the conjugation pattern is
        what makes the pairing identity with :meth:`apply_tangent` hold.
        """
        c = astensor(out_cotangent).data.ravel()
        if c.size != self.output_size:
            raise ShapeError(
                f"cotangent has {c.size} entries, rule expects {self.output_size}"
            )
        xi = np.conj(self.dz.data).T @ c + self.dzbar.data.T @ np.conj(c)
        return ComplexTensor(xi.reshape(in_shape))

    def conj_pair(self) -> "WirtingerPair":
        """The pair of ``conj(f)`` given the pair of ``f``: swap and conjugate."""
        return WirtingerPair(self.dzbar.conj(), self.dz.conj())


# Complex literal text format: `a`, `bi`, `a+bi`, `a-bi`, with `i` alone
# meaning `1i`. Decimal separator is `.` regardless of locale; spaces are
# allowed around signs.

_FLOAT = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_REAL_RE = _regex.compile(rf"^([+-]?{_FLOAT})$")
_IMAG_RE = _regex.compile(rf"^([+-]?{_FLOAT}|[+-]?)i$")
_BOTH_RE = _regex.compile(rf"^([+-]?{_FLOAT})([+-](?:{_FLOAT})?)i$")


def _sign_to_one(text: str) -> float:
    if text in ("", "+"):
        return 1.0
    if text == "-":
        return -1.0
    return float(text)


def parse_complex(text: str) -> complex:
    """Parse a complex literal such as ``2``, ``-3i``, ``1+2i``, or ``i``."""
    compact = "".join(text.split())
    if not compact:
        raise LiteralError("empty complex literal")
    m = _REAL_RE.match(compact)
    if m:
        return complex(float(m.group(1)), 0.0)
    m = _IMAG_RE.match(compact)
    if m:
        return complex(0.0, _sign_to_one(m.group(1)))
    m = _BOTH_RE.match(compact)
    if m:
        return complex(float(m.group(1)), _sign_to_one(m.group(2)))
    raise LiteralError(
        f"malformed complex literal {text!r}; expected forms like 2, -3i, 1+2i, 1-0.5i"
    )


def _format_float(x: float) -> str:
    if x == 0.0:
        x = 0.0  # normalize -0.0
    if float(x).is_integer() and abs(x) < 1e16:
        return str(int(x))
    return repr(float(x))


def format_complex(value) -> str:
    """Shortest text form: ``0``, ``2``, ``-3i``, ``1+2i``."""
    z = complex(value)
    real, imag = z.real, z.imag
    if imag == 0.0:
        return _format_float(real)
    if real == 0.0:
        return _format_float(imag) + "i"
    sign = "+" if imag > 0 else "-"
    return f"{_format_float(real)}{sign}{_format_float(abs(imag))}i"


def format_complex_full(value) -> str:
    """Like :func:`format_complex` but keeps an explicit real part whenever
    an imaginary part is present, e.g. ``0+1i`` rather than ``1i``."""
    z = complex(value)
    real, imag = z.real, z.imag
    if imag == 0.0:
        return _format_float(real)
    sign = "+" if imag > 0 else "-"
    return f"{_format_float(real)}{sign}{_format_float(abs(imag))}i"
