"""Product tensors, families of them, and the dimension data read off them.

Mode and tensor indices are 0-based throughout.  A tensor in
F^{d_1} (x) ... (x) F^{d_m} is stored as its flattened coordinate vector with
the last index running fastest.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import cached_property
from itertools import combinations
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .errors import ParameterError
from .field import Field
from .linalg import VectorList, coordinatize, kron_vec, rank_rows
from .subsets import mask_of

__all__ = [
    "ProductTensor",
    "ProductFamily",
    "SymmetricFamily",
    "DimTable",
    "KRankProfile",
    "assemble",
    "family_sum",
    "matricize",
    "flattening_rank",
    "flattening_ranks",
    "dim_query",
    "k_rank",
    "k_rank_profile",
    "grouped_factors",
    "mode_group",
    "symmetric_lift",
    "canonical_form",
    "projective_equal",
    "canonical_multiset",
]

Subset = Union[int, Iterable[int]]


@dataclass(frozen=True)
class ProductTensor:
    """coeff * factors[0] (x) ... (x) factors[m-1] with every factor nonzero."""

    factors: Tuple[Tuple, ...]
    coeff: object = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "factors", tuple(tuple(f) for f in self.factors))
        if not self.factors:
            raise ParameterError("a product tensor needs at least one factor")
        for j, f in enumerate(self.factors):
            if not any(f):
                raise ParameterError(f"factor {j} is the zero vector")
        if self.coeff == 0:
            raise ParameterError("coefficient must be nonzero")

    @property
    def m(self) -> int:
        return len(self.factors)

    @property
    def dims(self) -> Tuple[int, ...]:
        return tuple(len(f) for f in self.factors)

    def over(self, field: Field) -> "ProductTensor":
        return ProductTensor(tuple(field.vector(f) for f in self.factors), field(self.coeff))


@dataclass(frozen=True)
class ProductFamily:
    """Ordered multiset {x_a} of product tensors sharing mode dimensions."""

    field: Field
    mode_dims: Tuple[int, ...]
    tensors: Tuple[ProductTensor, ...]
    name: Optional[str] = dc_field(default=None, compare=False)

    def __post_init__(self) -> None:
        dims = tuple(int(d) for d in self.mode_dims)
        object.__setattr__(self, "mode_dims", dims)
        if len(dims) < 2:
            raise ParameterError("a family needs at least two modes")
        if any(d < 1 for d in dims):
            raise ParameterError("mode dimensions must be positive")
        if not self.tensors:
            raise ParameterError("a family needs at least one tensor")
        coerced = []
        for a, t in enumerate(self.tensors):
            if t.dims != dims:
                raise ParameterError(f"tensor {a} has mode dims {t.dims}, expected {dims}")
            try:
                coerced.append(t.over(self.field))
            except ParameterError as exc:
                raise ParameterError(f"tensor {a}: {exc} over {self.field}") from exc
        object.__setattr__(self, "tensors", tuple(coerced))

    @classmethod
    def from_factors(
        cls,
        field: Field,
        tensors: Sequence[Sequence[Sequence]],
        coeffs: Optional[Sequence] = None,
        mode_dims: Optional[Sequence[int]] = None,
        name: Optional[str] = None,
    ) -> "ProductFamily":
        """Build from nested lists ``tensors[a][j]`` = factor vector."""
        if coeffs is None:
            coeffs = [1] * len(tensors)
        if len(coeffs) != len(tensors):
            raise ParameterError("one coefficient per tensor required")
        built = []
        for a, (facs, c) in enumerate(zip(tensors, coeffs)):
            try:
                built.append(ProductTensor(tuple(field.vector(f) for f in facs), field(c)))
            except ParameterError as exc:
                raise ParameterError(f"tensor {a}: {exc}") from exc
        if mode_dims is None:
            if not built:
                raise ParameterError("a family needs at least one tensor")
            mode_dims = built[0].dims
        return cls(field, tuple(mode_dims), tuple(built), name)

    @property
    def n(self) -> int:
        return len(self.tensors)

    @property
    def m(self) -> int:
        return len(self.mode_dims)

    @property
    def total_dim(self) -> int:
        out = 1
        for d in self.mode_dims:
            out *= d
        return out

    def factors(self, j: int) -> List[Tuple]:
        """Mode-j factors x_{a,j} for a in order."""
        return [t.factors[j] for t in self.tensors]

    def factor_list(self, j: int) -> VectorList:
        return VectorList(self.field, self.mode_dims[j], tuple(self.factors(j)))

    @cached_property
    def assembled(self) -> Tuple[Tuple, ...]:
        return tuple(assemble(t, self.field) for t in self.tensors)

    def assembled_list(self) -> VectorList:
        return VectorList(self.field, self.total_dim, self.assembled)

    def subfamily(self, indices: Iterable[int]) -> "ProductFamily":
        idx = list(indices)
        return ProductFamily(self.field, self.mode_dims, tuple(self.tensors[i] for i in idx))

    def with_unit_coeffs(self) -> "ProductFamily":
        """Fold each coefficient into the first factor."""
        f = self.field
        out = []
        for t in self.tensors:
            first = tuple(f.mul(t.coeff, x) for x in t.factors[0])
            out.append(ProductTensor((first,) + t.factors[1:], f.one))
        return ProductFamily(f, self.mode_dims, tuple(out), self.name)

    def over(self, field: Field) -> "ProductFamily":
        """The same family with every scalar mapped into ``field``."""
        return ProductFamily(field, self.mode_dims, self.tensors, self.name)


def assemble(x: ProductTensor, field: Optional[Field] = None) -> Tuple:
    """Coordinate vector coeff * kron(factors)."""
    v = kron_vec(x.factors, field)
    if x.coeff == 1:
        return v
    if field is not None and field.p is not None:
        return tuple(x.coeff * a % field.p for a in v)
    return tuple(x.coeff * a for a in v)


def family_sum(F: ProductFamily) -> Tuple:
    f = F.field
    total = [f.zero] * F.total_dim
    for v in F.assembled:
        total = [f.add(a, b) for a, b in zip(total, v)]
    return tuple(total)


# ---------------------------------------------------------------- flattenings


def _strides(mode_dims: Sequence[int]) -> List[int]:
    strides = [1] * len(mode_dims)
    for j in range(len(mode_dims) - 2, -1, -1):
        strides[j] = strides[j + 1] * mode_dims[j + 1]
    return strides


def matricize(v: Sequence, mode_dims: Sequence[int], rows_modes: Iterable[int]) -> List[List]:
    """Matrix with rows indexed by the modes in ``rows_modes`` (ascending),
    columns by the remaining modes (ascending), both last-index-fastest."""
    mode_dims = list(mode_dims)
    total = 1
    for d in mode_dims:
        total *= d
    if len(v) != total:
        raise ParameterError(f"vector length {len(v)} does not match mode dims {mode_dims}")
    rset = sorted(set(rows_modes))
    cset = [j for j in range(len(mode_dims)) if j not in rset]
    strides = _strides(mode_dims)

    def offsets(modes: List[int]) -> List[int]:
        offs = [0]
        for j in modes:
            offs = [o + i * strides[j] for o in offs for i in range(mode_dims[j])]
        return offs

    roffs = offsets(rset)
    coffs = offsets(cset)
    return [[v[r + c] for c in coffs] for r in roffs]


def flattening_rank(v: Sequence, mode_dims: Sequence[int], j: int, field: Field) -> int:
    """Rank of the mode-j matricization (dim_j x prod of the other dims)."""
    if not 0 <= j < len(mode_dims):
        raise ParameterError(f"mode {j} out of range")
    return rank_rows(matricize(v, mode_dims, [j]), field)


def flattening_ranks(v: Sequence, mode_dims: Sequence[int], field: Field) -> Tuple[int, ...]:
    return tuple(flattening_rank(v, mode_dims, j, field) for j in range(len(mode_dims)))


# ---------------------------------------------------------------- dim tables


def grouped_factors(F: ProductFamily, J: Iterable[int]) -> List[Tuple]:
    """Vectors (x)_{j in J} x_{a,j}, J in ascending order, for every a."""
    modes = sorted(set(J))
    if not modes or any(not 0 <= j < F.m for j in modes):
        raise ParameterError(f"invalid mode subset {modes}")
    if len(modes) == 1:
        return F.factors(modes[0])
    return [kron_vec([t.factors[j] for j in modes], F.field) for t in F.tensors]


class DimTable:
    """Memoized d_J^S = dim span{(x)_{j in J} x_{a,j} : a in S}.

    Subsets are accepted as bitmasks or iterables of indices.  Concurrent use
    may compute an entry twice; both computations give the same value.
    """

    def __init__(self, family: ProductFamily):
        self.family = family
        self._cache: Dict[Tuple[int, int], int] = {}
        self._vectors: Dict[int, List[Tuple]] = {}

    def _vecs(self, jmask: int) -> List[Tuple]:
        vecs = self._vectors.get(jmask)
        if vecs is None:
            vecs = grouped_factors(self.family, [j for j in range(self.family.m) if jmask >> j & 1])
            self._vectors[jmask] = vecs
        return vecs

    def dim(self, S: Subset, J: Subset) -> int:
        smask = S if isinstance(S, int) else mask_of(S)
        jmask = J if isinstance(J, int) else mask_of(J)
        if smask <= 0 or smask >> self.family.n:
            raise ParameterError("S must be a nonempty subset of the tensor indices")
        if jmask <= 0 or jmask >> self.family.m:
            raise ParameterError("J must be a nonempty subset of the modes")
        key = (smask, jmask)
        val = self._cache.get(key)
        if val is None:
            vecs = self._vecs(jmask)
            val = rank_rows([vecs[a] for a in range(self.family.n) if smask >> a & 1], self.family.field)
            self._cache[key] = val
        return val

    def mode_dims(self, S: Subset) -> Tuple[int, ...]:
        """(d_1^S, ..., d_m^S)."""
        return tuple(self.dim(S, 1 << j) for j in range(self.family.m))

    def full_dims(self) -> Tuple[int, ...]:
        return self.mode_dims((1 << self.family.n) - 1)


def dim_query(T: DimTable, S: Subset, J: Subset) -> int:
    return T.dim(S, J)


# ---------------------------------------------------------------- k-ranks


def _k_rank_vectors(vectors: Sequence[Sequence], field: Field) -> int:
    n = len(vectors)
    if n == 0:
        raise ParameterError("k-rank of an empty list")
    if any(not any(v) for v in vectors):
        raise ParameterError("k-rank undefined for a list containing the zero vector")
    _, coords = coordinatize(list(vectors), field)
    r = len(coords[0])
    for k in range(2, r + 1):
        for sub in combinations(coords, k):
            if rank_rows(sub, field) < k:
                return k - 1
    return r


def k_rank(V: VectorList) -> int:
    """Largest k such that every k vectors are linearly independent."""
    return _k_rank_vectors(V.vectors, V.field)


@dataclass(frozen=True)
class KRankProfile:
    per_mode: Tuple[int, ...]
    grouped: Dict[Tuple[int, ...], int] = dc_field(default_factory=dict)


def k_rank_profile(F: ProductFamily, groups: Iterable[Iterable[int]] = ()) -> KRankProfile:
    per_mode = tuple(_k_rank_vectors(F.factors(j), F.field) for j in range(F.m))
    grouped = {}
    for J in groups:
        key = tuple(sorted(set(J)))
        grouped[key] = _k_rank_vectors(grouped_factors(F, key), F.field)
    return KRankProfile(per_mode, grouped)


def mode_group(F: ProductFamily, partition: Sequence[Iterable[int]]) -> ProductFamily:
    """Regroup modes: block J_i becomes one mode carrying (x)_{j in J_i} x_{a,j}."""
    blocks = [tuple(sorted(set(b))) for b in partition]
    seen = sorted(j for b in blocks for j in b)
    if any(not b for b in blocks) or seen != list(range(F.m)):
        raise ParameterError(f"{partition} is not a partition of the {F.m} modes")
    if len(blocks) < 2:
        raise ParameterError("grouping into a single mode does not give a family")
    dims = []
    for b in blocks:
        d = 1
        for j in b:
            d *= F.mode_dims[j]
        dims.append(d)
    cols = [grouped_factors(F, b) for b in blocks]
    tensors = tuple(
        ProductTensor(tuple(cols[i][a] for i in range(len(blocks))), t.coeff) for a, t in enumerate(F.tensors)
    )
    return ProductFamily(F.field, tuple(dims), tensors)


# ---------------------------------------------------------------- symmetric


@dataclass(frozen=True)
class SymmetricFamily:
    """sum_a alpha_a v_a^{(x) m} over a field of characteristic 0 or > m."""

    field: Field
    base_vectors: Tuple[Tuple, ...]
    coeffs: Tuple
    m: int
    name: Optional[str] = dc_field(default=None, compare=False)

    def __post_init__(self) -> None:
        f = self.field
        if self.m < 2:
            raise ParameterError("symmetric power m must be at least 2")
        if f.p is not None and f.p <= self.m:
            raise ParameterError(f"characteristic {f.p} must be 0 or exceed m={self.m}")
        vecs = tuple(f.vector(v) for v in self.base_vectors)
        if not vecs:
            raise ParameterError("a symmetric family needs at least one vector")
        dim = len(vecs[0])
        for a, v in enumerate(vecs):
            if len(v) != dim:
                raise ParameterError(f"base vector {a} has length {len(v)}, expected {dim}")
            if not any(v):
                raise ParameterError(f"base vector {a} is the zero vector")
        coeffs = tuple(f(c) for c in self.coeffs)
        if len(coeffs) != len(vecs):
            raise ParameterError("one coefficient per base vector required")
        if any(c == 0 for c in coeffs):
            raise ParameterError("coefficients must be nonzero")
        object.__setattr__(self, "base_vectors", vecs)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def n(self) -> int:
        return len(self.base_vectors)

    @property
    def dim(self) -> int:
        return len(self.base_vectors[0])

    @cached_property
    def d(self) -> int:
        return rank_rows(self.base_vectors, self.field)

    @cached_property
    def k(self) -> int:
        return _k_rank_vectors(self.base_vectors, self.field)


def symmetric_lift(S: SymmetricFamily) -> ProductFamily:
    tensors = tuple(ProductTensor((v,) * S.m, c) for v, c in zip(S.base_vectors, S.coeffs))
    return ProductFamily(S.field, (S.dim,) * S.m, tensors, S.name)


# ---------------------------------------------------------------- canonical forms


def canonical_form(x: ProductTensor, field: Field) -> ProductTensor:
    """Each factor scaled to first nonzero entry 1, scalars folded into coeff."""
    coeff = field(x.coeff)
    factors = []
    for fac in x.factors:
        fac = field.vector(fac)
        lead = next(c for c in fac if c != 0)
        inv = field.inv(lead)
        factors.append(tuple(field.mul(inv, c) for c in fac))
        coeff = field.mul(coeff, lead)
    return ProductTensor(tuple(factors), coeff)


def _key(x: ProductTensor) -> Tuple:
    return (x.factors, x.coeff)


def projective_equal(x: ProductTensor, y: ProductTensor, field: Field) -> bool:
    """True iff x and y are the same tensor (coefficients included)."""
    if x.dims != y.dims:
        raise ParameterError("tensors have different mode dimensions")
    return _key(canonical_form(x, field)) == _key(canonical_form(y, field))


def canonical_multiset(F: ProductFamily) -> Tuple:
    """Sorted canonical keys; equal iff the families agree as multisets."""
    return tuple(sorted(_key(canonical_form(t, F.field)) for t in F.tensors))
