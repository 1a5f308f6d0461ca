"""Groups, characters, trigonometric polynomials and grid samples.

Every analytic module works on a :class:`SampledFunction`: a finite list of
complex values with probability weights. Grid samples of a trigonometric
polynomial and Monte Carlo samples share that one representation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import AliasError, DomainError

DEFAULT_GRID = 1024


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % d for d in range(2, math.isqrt(p) + 1))


@dataclass(frozen=True)
class GroupSpec:
    """Ambient group. ``kind`` is one of integers, cyclic, prime_power, torus.

    ``torus`` is the circle discretized at ``M`` equally weighted atoms
    ``t_j = 2*pi*j/M``; its frequencies are signed integers like ``integers``.
    """

    kind: str
    M: int | None = None
    p: int | None = None
    N: int | None = None

    def __post_init__(self):
        if self.kind in ("cyclic", "torus"):
            if self.M is None or self.M < 2:
                raise DomainError(f"{self.kind} group needs M >= 2, got {self.M}")
        elif self.kind == "prime_power":
            if self.p is None or not _is_prime(self.p):
                raise DomainError(f"p must be prime, got {self.p}")
            if self.N is None or self.N < 1:
                raise DomainError(f"N must be >= 1, got {self.N}")
        elif self.kind != "integers":
            raise DomainError(f"unknown group kind {self.kind!r}")

    @classmethod
    def integers(cls) -> "GroupSpec":
        return cls("integers")

    @classmethod
    def cyclic(cls, M: int) -> "GroupSpec":
        return cls("cyclic", M=M)

    @classmethod
    def prime_power(cls, p: int, N: int) -> "GroupSpec":
        return cls("prime_power", p=p, N=N)

    @classmethod
    def torus(cls, M: int = DEFAULT_GRID) -> "GroupSpec":
        return cls("torus", M=M)

    @classmethod
    def parse(cls, text: str) -> "GroupSpec":
        """Parse ``integers``, ``cyclic:64``, ``torus:1024`` or ``prime_power:2:5``."""
        parts = text.strip().lower().split(":")
        try:
            if parts[0] in ("integers", "z"):
                return cls.integers()
            if parts[0] in ("cyclic", "torus"):
                return cls(parts[0], M=int(parts[1]))
            if parts[0] in ("prime_power", "primepower", "gf"):
                return cls.prime_power(int(parts[1]), int(parts[2]))
        except (IndexError, ValueError) as exc:
            raise DomainError(f"cannot parse group {text!r}") from exc
        raise DomainError(f"cannot parse group {text!r}")

    @property
    def is_vector(self) -> bool:
        return self.kind == "prime_power"

    @property
    def modulus(self) -> int | None:
        """Modulus of scalar arithmetic (``None`` for signed integer frequencies)."""
        if self.kind == "cyclic":
            return self.M
        if self.kind == "prime_power":
            return self.p
        return None

    @property
    def order(self) -> int | None:
        if self.kind == "cyclic":
            return self.M
        if self.kind == "prime_power":
            return self.p**self.N
        return None

    def canonical(self, element) -> int | tuple[int, ...]:
        """Reduce an element to its canonical representative."""
        if self.kind == "prime_power":
            coords = tuple(int(c) % self.p for c in np.atleast_1d(element))
            if len(coords) != self.N:
                raise DomainError(f"expected {self.N} coordinates, got {len(coords)}")
            return coords
        if np.ndim(element) != 0:
            element = np.asarray(element).reshape(-1)
            if element.size != 1:
                raise DomainError(f"expected a scalar frequency, got {element!r}")
            element = element[0]
        value = int(element)
        if self.kind == "cyclic":
            return value % self.M
        return value

    def is_zero(self, element) -> bool:
        if self.kind == "prime_power":
            return not any(element)
        return element == 0

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        for key in ("M", "p", "N"):
            if getattr(self, key) is not None:
                out[key] = getattr(self, key)
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "GroupSpec":
        return cls(data["kind"], M=data.get("M"), p=data.get("p"), N=data.get("N"))


@dataclass(frozen=True)
class FreqSet:
    """A finite set of nonzero group elements, kept in insertion order."""

    group: GroupSpec
    elements: tuple

    def __post_init__(self):
        canon = tuple(self.group.canonical(e) for e in self.elements)
        if len(set(canon)) != len(canon):
            raise DomainError("frequency set has duplicate elements")
        if any(self.group.is_zero(e) for e in canon):
            raise DomainError("frequency set may not contain the zero element")
        object.__setattr__(self, "elements", canon)

    @classmethod
    def of(cls, elements: Iterable, group: GroupSpec | None = None) -> "FreqSet":
        return cls(group or GroupSpec.integers(), tuple(elements))

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def subset(self, indices: Iterable[int]) -> "FreqSet":
        return FreqSet(self.group, tuple(self.elements[i] for i in indices))

    def to_json(self) -> list:
        return [list(e) if isinstance(e, tuple) else [e] for e in self.elements]

    @classmethod
    def from_json(cls, data, group: GroupSpec | None = None) -> "FreqSet":
        group = group or GroupSpec.integers()
        if isinstance(data, Mapping):
            group = GroupSpec.from_json(data["group"]) if "group" in data else group
            data = data["elements"]
        elems = []
        for item in data:
            if isinstance(item, (list, tuple)) and not group.is_vector:
                if len(item) != 1:
                    raise DomainError(f"scalar group expects length-1 vectors, got {item}")
                item = item[0]
            elems.append(item)
        return cls(group, tuple(elems))


@dataclass(frozen=True)
class TrigPoly:
    """Finitely supported coefficient map on a torus, integer or cyclic dual."""

    group: GroupSpec
    coeffs: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.group.kind == "prime_power":
            raise DomainError("TrigPoly lives on torus, integer or cyclic groups")
        canon: dict = {}
        for k, c in self.coeffs.items():
            key = self.group.canonical(k)
            canon[key] = canon.get(key, 0) + complex(c)
        object.__setattr__(self, "coeffs", canon)

    @classmethod
    def of(cls, coeffs: Mapping, group: GroupSpec | None = None) -> "TrigPoly":
        return cls(group or GroupSpec.integers(), dict(coeffs))

    def max_abs_freq(self) -> int:
        return max((abs(k) for k in self.coeffs), default=0)

    def coefficient(self, k) -> complex:
        return self.coeffs.get(self.group.canonical(k), 0j)

    def to_json(self) -> dict:
        return {
            "group": self.group.to_json(),
            "coeffs": [[k, c.real, c.imag] for k, c in sorted(self.coeffs.items())],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "TrigPoly":
        group = GroupSpec.from_json(data.get("group", {"kind": "integers"}))
        coeffs: dict = {}
        for row in data["coeffs"]:
            k, re = row[0], row[1]
            im = row[2] if len(row) > 2 else 0.0
            coeffs[k] = coeffs.get(k, 0) + complex(re, im)
        return cls(group, coeffs)

    def dumps(self) -> str:
        return json.dumps(self.to_json())


class SampledFunction:
    """Complex values on weighted atoms of a finite probability space."""

    __slots__ = ("values", "weights")

    def __init__(self, values, weights=None):
        values = np.array(values, dtype=complex).reshape(-1)
        if values.size == 0:
            raise DomainError("a sampled function needs at least one atom")
        if weights is None:
            weights = np.full(values.size, 1.0 / values.size)
        else:
            weights = np.array(weights, dtype=float).reshape(-1)
            if weights.shape != values.shape:
                raise DomainError("values and weights differ in length")
            if np.any(weights < 0):
                raise DomainError("weights must be nonnegative")
            if abs(weights.sum() - 1.0) > 1e-12:
                raise DomainError(f"weights sum to {weights.sum()!r}, not 1")
        values.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)

    def __setattr__(self, name, value):
        raise AttributeError("SampledFunction is immutable")

    def __len__(self) -> int:
        return self.values.size

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.values.imag == 0))

    def mean(self) -> complex:
        return complex(np.dot(self.weights, self.values))

    def map(self, fn) -> "SampledFunction":
        return SampledFunction(fn(self.values), self.weights)

    def real(self) -> "SampledFunction":
        return SampledFunction(self.values.real, self.weights)

    def imag(self) -> "SampledFunction":
        return SampledFunction(self.values.imag, self.weights)

    def __add__(self, other):
        if isinstance(other, SampledFunction):
            return SampledFunction(self.values + other.values, self.weights)
        return SampledFunction(self.values + other, self.weights)

    def __sub__(self, other):
        if isinstance(other, SampledFunction):
            return SampledFunction(self.values - other.values, self.weights)
        return SampledFunction(self.values - other, self.weights)

    def __mul__(self, scalar):
        if isinstance(scalar, SampledFunction):
            return SampledFunction(self.values * scalar.values, self.weights)
        return SampledFunction(self.values * scalar, self.weights)

    __rmul__ = __mul__

    def roll(self, shift: int) -> "SampledFunction":
        """Grid translation ``t -> f(t + t_shift)``."""
        return SampledFunction(np.roll(self.values, -shift), np.roll(self.weights, -shift))


def torus_atoms(M: int) -> np.ndarray:
    return 2 * np.pi * np.arange(M) / M


def synth_eval(poly: TrigPoly, M: int = DEFAULT_GRID) -> SampledFunction:
    """Evaluate ``sum_k c_k e^{ikt}`` at ``t_j = 2 pi j / M`` by one inverse FFT.

    Cyclic(M0) polynomials are lifted to the grid through ``j -> j mod M0``,
    which needs ``M0 | M``.
    """
    if M < 2:
        raise DomainError(f"grid size must be >= 2, got {M}")
    spectrum = np.zeros(M, dtype=complex)
    if poly.group.kind == "cyclic":
        M0 = poly.group.M
        if M % M0:
            raise AliasError(f"grid {M} is not a multiple of the cyclic order {M0}")
        step = M // M0
        for k, c in poly.coeffs.items():
            spectrum[(k * step) % M] += c
    else:
        top = poly.max_abs_freq()
        if M < 2 * top + 1:
            raise AliasError(f"grid {M} aliases frequency {top}; need M >= {2 * top + 1}")
        for k, c in poly.coeffs.items():
            spectrum[k % M] += c
    return SampledFunction(np.fft.ifft(spectrum) * M)


def character(k: int, M: int = DEFAULT_GRID) -> SampledFunction:
    return synth_eval(TrigPoly.of({k: 1}), M)


def lp_norm(f: SampledFunction, p: float) -> float:
    """``(sum_j w_j |f_j|^p)^(1/p)``, or the max modulus when ``p`` is infinite."""
    if not p >= 1:
        raise DomainError(f"L_p norm needs p >= 1 or p = inf, got {p}")
    mod = np.abs(f.values)
    if math.isinf(p):
        return float(mod[f.weights > 0].max())
    top = mod.max()
    if top == 0:
        return 0.0
    # scale out the max so large p cannot overflow
    return float(top * np.dot(f.weights, (mod / top) ** p) ** (1.0 / p))


def fejer_poly(N: int) -> TrigPoly:
    """Fejer kernel with coefficients ``(1 - |k|/N)^+``."""
    if N < 1:
        raise DomainError(f"Fejer kernel needs N >= 1, got {N}")
    return TrigPoly.of({k: 1 - abs(k) / N for k in range(-N + 1, N)})


def freqset_poly(freqs: FreqSet | Sequence[int], coeffs=None) -> TrigPoly:
    """``sum_k a_k e^{i n_k t}`` over a scalar frequency set."""
    if isinstance(freqs, FreqSet):
        group = freqs.group if freqs.group.kind != "prime_power" else None
        elements = freqs.elements
    else:
        group, elements = None, tuple(freqs)
    if group is None:
        group = GroupSpec.integers()
    if coeffs is None:
        coeffs = np.ones(len(elements))
    return TrigPoly(group, dict(zip(elements, coeffs)))


def next_pow2(n: int) -> int:
    return 1 << max(1, int(n - 1).bit_length())


def alias_free_grid(max_freq: int, minimum: int = 2) -> int:
    """Smallest power-of-two grid ``M`` with ``M >= 2*max_freq + 1``."""
    return max(minimum, next_pow2(2 * max_freq + 1))
