"""Random circuits of product tensors and the instances that show the rank
bounds and the symmetric non-rank inequality are tight.

Every object produced here is re-verified with the matroid and tensor code
before it is returned; nothing is trusted from the construction.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field as dc_field
from itertools import product
from math import prod
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .errors import GenerationFailure, ParameterError
from .field import Field, GF
from .linalg import kron_vec, nullspace, rank_rows
from .matroid import is_circuit
from .tensor import (
    DimTable,
    ProductFamily,
    ProductTensor,
    SymmetricFamily,
    _k_rank_vectors,
    family_sum,
    k_rank_profile,
    symmetric_lift,
)

__all__ = [
    "CircuitSpec",
    "SharpnessInstance",
    "find_circuit",
    "circuit_relation",
    "embed_family",
    "build_sharpness_tensor_instance",
    "build_sharpness_symmetric_instance",
    "DEFAULT_FIELD",
]

DEFAULT_FIELD = GF(101)


@dataclass(frozen=True)
class CircuitSpec:
    """A circuit of n = sum_j (d_j - 1) + 2 product tensors with per-mode dims d_j."""

    target_dims: Tuple[int, ...]
    target_n: Optional[int] = None
    symmetric: bool = False
    require_k_rank: bool = False

    def __post_init__(self) -> None:
        dims = tuple(int(d) for d in self.target_dims)
        if len(dims) < 2 or any(d < 1 for d in dims):
            raise ParameterError("a circuit spec needs at least two modes of positive dimension")
        n = sum(d - 1 for d in dims) + 2
        if self.target_n is not None and self.target_n != n:
            raise ParameterError(f"target_n={self.target_n} must equal sum(d_j - 1) + 2 = {n}")
        if self.symmetric and len(set(dims)) != 1:
            raise ParameterError("symmetric circuits need equal mode dimensions")
        object.__setattr__(self, "target_dims", dims)
        object.__setattr__(self, "target_n", n)

    @property
    def n(self) -> int:
        return self.target_n  # type: ignore[return-value]


@dataclass(frozen=True)
class SharpnessInstance:
    """Two families whose weighted sums agree exactly."""

    E: Any
    F: Any
    relation: str
    params: Dict[str, Any] = dc_field(default_factory=dict)

    def verify(self) -> bool:
        return _lift_sum(self.E) == _lift_sum(self.F)


def _lift_sum(X) -> Tuple:
    if isinstance(X, SymmetricFamily):
        X = symmetric_lift(X)
    return family_sum(X)


# ---------------------------------------------------------------- circuits


def _moment(t, degree: int, field: Field) -> Tuple:
    return tuple(field(t) ** k if field.is_rational else pow(t, k, field.p) for k in range(degree + 1))


def _random_invertible(rng: random.Random, d: int, field: Field) -> List[List]:
    while True:
        g = [[field.random_element(rng, bound=9) for _ in range(d)] for _ in range(d)]
        if rank_rows(g, field) == d:
            return g


def _apply(g: List[List], v: Sequence, field: Field) -> Tuple:
    return tuple(_dot(row, v, field) for row in g)


def _moment_candidate(spec: CircuitSpec, field: Field, rng: random.Random) -> Optional[ProductFamily]:
    n = spec.n
    if field.p is not None and field.p < n:
        return None
    pool = range(field.p) if field.p is not None else range(-4 * n, 4 * n + 1)
    ts = rng.sample(list(pool), n)
    if spec.symmetric:
        g = _random_invertible(rng, spec.target_dims[0], field)
        gs = [g] * len(spec.target_dims)
    else:
        gs = [_random_invertible(rng, d, field) for d in spec.target_dims]
    tensors = []
    for t in ts:
        factors = tuple(_apply(g, _moment(t, d - 1, field), field) for g, d in zip(gs, spec.target_dims))
        coeff = field.one if spec.symmetric else field.random_element(rng, bound=9, nonzero=True)
        tensors.append(ProductTensor(factors, coeff))
    return ProductFamily(field, spec.target_dims, tuple(tensors))


def _random_factor(rng: random.Random, d: int, field: Field) -> Tuple:
    while True:
        v = field.random_vector(rng, d, bound=9)
        if any(v):
            return v


def _section_candidate(spec: CircuitSpec, field: Field, rng: random.Random,
                       max_candidates: int) -> Optional[ProductFamily]:
    """n-1 random product tensors, then a product tensor in their span."""
    dims = spec.target_dims
    n = spec.n
    m = len(dims)
    if spec.symmetric:
        base = [_random_factor(rng, dims[0], field) for _ in range(n - 1)]
        tensors = [ProductTensor((v,) * m) for v in base]
    else:
        tensors = [ProductTensor(tuple(_random_factor(rng, d, field) for d in dims)) for _ in range(n - 1)]
    W = [kron_vec(list(t.factors), field) for t in tensors]
    if rank_rows(W, field) != n - 1:
        return None
    # annihilator rows a with a . w = 0 for every w in W
    A = nullspace(W, field, prod(dims))
    s = max(range(m), key=lambda j: dims[j]) if not spec.symmetric else 0
    others = [j for j in range(m) if j != s]
    if spec.symmetric:
        space = _points(dims[0], field, rng, max_candidates)
        for v in space:
            x = kron_vec([v] * m, field)
            if all(_dot(row, x, field) == field.zero for row in A):
                cand = ProductTensor((v,) * m)
                return ProductFamily(field, dims, tuple(tensors) + (cand,))
        return None
    per_mode = [_points(dims[j], field, rng, max_candidates) for j in others]
    count = 0
    for combo in product(*per_mode):
        count += 1
        if count > max_candidates:
            return None
        # linear conditions on the mode-s factor y: A (u (x) y) = 0
        cols = []
        for k in range(dims[s]):
            e = [field.zero] * dims[s]
            e[k] = field.one
            fs = list(combo)
            fs.insert(s, tuple(e))
            x = kron_vec(fs, field)
            cols.append([_dot(row, x, field) for row in A])
        mat = [[cols[k][i] for k in range(dims[s])] for i in range(len(A))]
        ker = nullspace(mat, field, dims[s])
        if not ker:
            continue
        y = ker[0]
        fs = list(combo)
        fs.insert(s, y)
        return ProductFamily(field, dims, tuple(tensors) + (ProductTensor(tuple(fs)),))
    return None


def _dot(a: Sequence, b: Sequence, field: Field):
    return sum((field.mul(x, y) for x, y in zip(a, b)), field.zero)


def _points(d: int, field: Field, rng: random.Random, cap: int) -> List[Tuple]:
    """Projective points of F^d in random order (random sample when too many)."""
    if field.p is not None and (field.p**d - 1) // (field.p - 1) <= cap:
        pts = []
        for lead in range(d):
            for tail in product(range(field.p), repeat=d - lead - 1):
                pts.append((0,) * lead + (1,) + tail)
        rng.shuffle(pts)
        return pts
    return [_random_factor(rng, d, field) for _ in range(min(cap, 2000))]


def _meets_spec(F: ProductFamily, spec: CircuitSpec) -> bool:
    if F.n != spec.n or not is_circuit(F.assembled_list()):
        return False
    dims = DimTable(F).full_dims()
    if any(d < t for d, t in zip(dims, spec.target_dims)):
        return False
    if spec.require_k_rank:
        k = k_rank_profile(F).per_mode
        if tuple(k) != tuple(dims):
            return False
    if spec.symmetric and any(len(set(t.factors)) != 1 for t in F.tensors):
        return False
    return True


def find_circuit(spec: CircuitSpec, field: Field = DEFAULT_FIELD, attempts: int = 50,
                 rng: Optional[random.Random] = None, strategy: str = "moment",
                 max_candidates: int = 20_000) -> Optional[ProductFamily]:
    """Randomized search for a circuit meeting ``spec``; None when attempts run out.

    ``strategy="moment"`` draws the tensors from a product of moment curves
    under random per-mode changes of basis (works for every spec when the
    field has at least n elements).  ``strategy="section"`` draws n - 1
    random product tensors and scans for a product tensor in their span,
    which only succeeds for small specs.
    """
    rng = rng or random.Random(0)
    if strategy not in ("moment", "section"):
        raise ParameterError(f"unknown strategy {strategy!r}")
    for _ in range(attempts):
        if strategy == "moment":
            cand = _moment_candidate(spec, field, rng)
        else:
            cand = _section_candidate(spec, field, rng, max_candidates)
        if cand is not None and _meets_spec(cand, spec):
            return cand
    return None


def _find_or_fail(spec: CircuitSpec, field: Field, rng: random.Random, attempts: int = 50) -> ProductFamily:
    C = find_circuit(spec, field, attempts, rng)
    if C is None:
        raise GenerationFailure(f"no circuit found for dims {spec.target_dims}", attempts)
    return C


def circuit_relation(C: ProductFamily) -> Tuple:
    """Nonzero alpha with sum_a alpha_a x_a = 0 (unique up to scale for a circuit)."""
    ker = nullspace([list(col) for col in zip(*C.assembled)], C.field, C.n)
    if len(ker) != 1:
        raise ParameterError("family is not a circuit")
    return ker[0]


def embed_family(F: ProductFamily, mode_dims: Sequence[int]) -> ProductFamily:
    """Pad every factor with zeros up to ``mode_dims``."""
    if len(mode_dims) != F.m or any(a < b for a, b in zip(mode_dims, F.mode_dims)):
        raise ParameterError("target dims must cover the family's dims")
    z = F.field.zero
    tensors = tuple(
        ProductTensor(tuple(tuple(f) + (z,) * (d - len(f)) for f, d in zip(t.factors, mode_dims)), t.coeff)
        for t in F.tensors
    )
    return ProductFamily(F.field, tuple(mode_dims), tensors, F.name)


# ---------------------------------------------------------------- sharpness, tensor rank


def build_sharpness_tensor_instance(k: Sequence[int], d: Sequence[int], i: int, n: int,
                                    field: Field = DEFAULT_FIELD, rng: Optional[random.Random] = None,
                                    circuit: Optional[ProductFamily] = None, attempts: int = 50) -> SharpnessInstance:
    """E with k-ranks k, dims d and n members whose weighted sum equals a sum of
    2(d_i - k_i) + lambda - n product tensors, lambda = sum(k_j - 1) + 2."""
    rng = rng or random.Random(0)
    k, d = tuple(k), tuple(d)
    m = len(k)
    if len(d) != m or m < 2 or not 0 <= i < m:
        raise ParameterError("k and d need one entry per mode and i must name a mode")
    if any(not 1 <= kj <= dj for kj, dj in zip(k, d)):
        raise ParameterError("need 1 <= k_j <= d_j")
    gaps = [dj - kj for kj, dj in zip(k, d)]
    g = gaps[i]
    lam = sum(kj - 1 for kj in k) + 2
    mu = max(gaps[a] + gaps[b] for a in range(m) for b in range(m) if a != b)
    if mu != 2 * g:
        raise ParameterError(f"need mu = 2(d_i - k_i); mu={mu}, 2(d_i - k_i)={2 * g}")
    if not max(k) + g + 1 <= n <= g + lam:
        raise ParameterError(f"need {max(k) + g + 1} <= n <= {g + lam}")
    total = sum(kj - 1 for kj in k)
    if any(kj > total - (kj - 1) + 1 for kj in k):
        raise ParameterError("k-ranks are not balanced")
    if circuit is None:
        circuit = _find_or_fail(CircuitSpec(k, require_k_rank=True), field, rng, attempts)
    elif circuit.n != lam or not is_circuit(circuit.assembled_list()):
        raise ParameterError("supplied circuit has the wrong size or is not a circuit")
    circuit = embed_family(circuit.with_unit_coeffs(), d)
    alpha = circuit_relation(circuit)
    f = field
    for _ in range(attempts):
        extras = tuple(ProductTensor(tuple(_random_factor(rng, dj, f) for dj in d)) for _ in range(g))
        allx = circuit.tensors + extras
        full = ProductFamily(f, d, allx)
        if DimTable(full).full_dims() != d or tuple(k_rank_profile(full).per_mode) != k:
            continue
        head = n - g
        E = ProductFamily(f, d, tuple(ProductTensor(t.factors, alpha[a]) for a, t in enumerate(circuit.tensors[:head]))
                          + extras, "sharp_tensor_E")
        F = ProductFamily(f, d, tuple(ProductTensor(t.factors, f.neg(alpha[head + a]))
                                      for a, t in enumerate(circuit.tensors[head:])) + extras, "sharp_tensor_F")
        if DimTable(E).full_dims() != d or tuple(k_rank_profile(E).per_mode) != k:
            continue
        inst = SharpnessInstance(
            E, F, "sum(E) == sum(F)",
            {"n": n, "m": m, "d": list(d), "k": list(k), "lambda": lam, "mu": mu, "i": i,
             "F_size": 2 * g + lam - n},
        )
        if not inst.verify():
            raise AssertionError("sharpness relation failed to verify")
        return inst
    raise GenerationFailure("could not extend the circuit to the requested dims and k-ranks", attempts)


# ---------------------------------------------------------------- sharpness, symmetric


def _symmetric_circuit_d2(m: int, field: Field, rng: random.Random, attempts: int = 50) -> ProductFamily:
    return _find_or_fail(CircuitSpec((2,) * m, symmetric=True, require_k_rank=True), field, rng, attempts)


def build_sharpness_symmetric_instance(m: int, d: int, n: int, r: int, field: Field = DEFAULT_FIELD,
                                       rng: Optional[random.Random] = None, k: Optional[int] = None,
                                       attempts: int = 50) -> SharpnessInstance:
    """Symmetric families E (n vectors, span d, k-rank >= 2) and F (r vectors)
    with equal weighted sums of m-th powers and n + r = m + 2d - 2.

    With ``k`` in 3..d-1 the near-sharp variant is built instead: n = d + 1,
    r = m + d - 1, and E gains the vector v_{m+1} + ... + v_{m+k}, which brings
    its k-rank down to k; the measured k-rank is recorded in ``params``.
    """
    rng = rng or random.Random(0)
    if field.p is not None and field.p <= m:
        raise ParameterError(f"characteristic must be 0 or exceed m={m}")
    if m < 2 or d < 2:
        raise ParameterError("need m >= 2 and d >= 2")
    near = k is not None
    if near:
        if not 3 <= k <= d - 1:
            raise ParameterError(f"near-sharp variant needs 3 <= k <= d - 1, got k={k}")
        if (n, r) != (d + 1, m + d - 1):
            raise ParameterError(f"near-sharp variant needs n = d + 1 = {d + 1} and r = m + d - 1 = {m + d - 1}")
    else:
        if n < d or r < d - 2 or n + r != m + 2 * d - 2:
            raise ParameterError("need n >= d, r >= d - 2 and n + r = m + 2d - 2")
    f = field
    C = _symmetric_circuit_d2(m, f, rng, attempts)
    alpha = circuit_relation(C)
    circ = [tuple(t.factors[0]) + (f.zero,) * (d - 2) for t in C.tensors]
    for _ in range(attempts):
        extras = [_random_factor(rng, d, f) for _ in range(d - 2)]
        allv = circ + extras
        if rank_rows(allv, f) != d or _k_rank_vectors(allv, f) < 2:
            continue
        one = f.one
        if not near:
            head = n - d + 2
            Ev = circ[:head] + extras
            Ec = list(alpha[:head]) + [one] * (d - 2)
            Fv = circ[head:] + extras
            Fc = [f.neg(a) for a in alpha[head:]] + [one] * (d - 2)
        else:
            total = tuple(sum(col, f.zero) for col in zip(*allv[m:m + k]))
            if not any(total):
                continue
            Ev = allv[m:m + d] + [total]
            Ec = [alpha[m], alpha[m + 1]] + [one] * (d - 2) + [one]
            Fv = circ[:m] + extras + [total]
            Fc = [f.neg(a) for a in alpha[:m]] + [one] * (d - 2) + [one]
        E = SymmetricFamily(f, tuple(Ev), tuple(Ec), m, "sharp_symmetric_E")
        F = SymmetricFamily(f, tuple(Fv), tuple(Fc), m, "sharp_symmetric_F")
        if E.d != d or E.k < 2:
            continue
        if near and E.k != k:
            continue
        params = {"m": m, "d": d, "n": E.n, "r": F.n, "k": E.k, "near_sharp": near,
                  "n_plus_r": E.n + F.n, "bound": m + 2 * d - 2}
        inst = SharpnessInstance(E, F, "sum of alpha_a v_a^m over E == sum over F", params)
        if not inst.verify():
            raise AssertionError("symmetric sharpness relation failed to verify")
        return inst
    raise GenerationFailure("could not complete the symmetric circuit to the requested span", attempts)

