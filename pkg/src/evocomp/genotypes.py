"""Genotype representations, their search spaces, samplers and distances.

Four families are supported: fixed-length bit-strings, real-valued vectors
(optionally carrying self-adaptive mutation step sizes), permutations of
``0..n-1`` and parse trees over a declared primitive set.  Genotype values are
immutable once built, so they can be shared freely between individuals and
worker threads.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "BitString",
    "RealVector",
    "SelfAdaptiveRealVector",
    "Permutation",
    "ParseTree",
    "PrimitiveSet",
    "BitStringSpace",
    "RealVectorSpace",
    "SelfAdaptiveSpace",
    "PermutationSpace",
    "TreeSpace",
    "sample_uniform",
    "random_tree",
    "distance",
    "evaluate_tree",
    "protected_div",
    "render",
]


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


class BitString:
    """Fixed-length sequence of 0/1 bits."""

    __slots__ = ("bits",)
    kind = "bits"

    def __init__(self, bits: Sequence[int] | np.ndarray | str):
        if isinstance(bits, str):
            bits = [int(c) for c in bits]
        arr = np.array(bits, dtype=np.uint8)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("a bit-string needs at least one bit")
        if np.any(arr > 1):
            raise ValueError("bit-string entries must be 0 or 1")
        self.bits = _frozen(arr)

    @classmethod
    def _wrap(cls, arr: np.ndarray) -> BitString:
        obj = cls.__new__(cls)
        obj.bits = _frozen(arr.astype(np.uint8, copy=False))
        return obj

    def __len__(self) -> int:
        return self.bits.size

    def __eq__(self, other: object) -> bool:
        return isinstance(other, BitString) and np.array_equal(self.bits, other.bits)

    def __hash__(self) -> int:
        return hash(self.bits.tobytes())

    def __str__(self) -> str:
        return "".join("1" if b else "0" for b in self.bits)

    def __repr__(self) -> str:
        return f"BitString('{self}')"


class RealVector:
    """Vector of reals, optionally confined to per-component closed intervals.

    ``bounds`` is a ``(low, high)`` pair of arrays; infinite entries mean the
    component is unbounded on that side.
    """

    __slots__ = ("values", "bounds")
    kind = "real"

    def __init__(self, values, bounds: tuple[np.ndarray, np.ndarray] | None = None):
        arr = np.array(values, dtype=float)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("a real vector needs at least one component")
        if bounds is not None:
            low = _frozen(np.broadcast_to(np.asarray(bounds[0], dtype=float), arr.shape).copy())
            high = _frozen(np.broadcast_to(np.asarray(bounds[1], dtype=float), arr.shape).copy())
            if np.any(low > high):
                raise ValueError("lower bound exceeds upper bound")
            if np.any(arr < low) or np.any(arr > high):
                raise ValueError("component outside its bounds")
            bounds = (low, high)
        self.values = _frozen(arr)
        self.bounds = bounds

    @classmethod
    def _wrap(cls, values: np.ndarray, bounds) -> RealVector:
        obj = cls.__new__(cls)
        obj.values = _frozen(values)
        obj.bounds = bounds
        return obj

    def __len__(self) -> int:
        return self.values.size

    def __eq__(self, other: object) -> bool:
        return type(other) is type(self) and np.array_equal(self.values, other.values)

    def __hash__(self) -> int:
        return hash(self.values.tobytes())

    def __str__(self) -> str:
        return "[" + ", ".join(f"{v:.9g}" for v in self.values) + "]"

    def __repr__(self) -> str:
        return f"RealVector({self})"


class SelfAdaptiveRealVector(RealVector):
    """Real vector carrying one positive mutation step size per component."""

    __slots__ = ("sigmas",)

    def __init__(self, values, sigmas, bounds=None):
        super().__init__(values, bounds)
        sig = np.array(sigmas, dtype=float)
        if sig.shape != self.values.shape:
            raise ValueError("sigmas must match values in length")
        if np.any(~(sig > 0)):
            raise ValueError("every sigma must be positive")
        self.sigmas = _frozen(sig)

    @classmethod
    def _wrap(cls, values, bounds, sigmas=None) -> SelfAdaptiveRealVector:
        obj = cls.__new__(cls)
        obj.values = _frozen(values)
        obj.bounds = bounds
        obj.sigmas = _frozen(sigmas)
        return obj

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, SelfAdaptiveRealVector)
            and np.array_equal(self.values, other.values)
            and np.array_equal(self.sigmas, other.sigmas)
        )

    def __hash__(self) -> int:
        return hash((self.values.tobytes(), self.sigmas.tobytes()))

    def __repr__(self) -> str:
        sig = ", ".join(f"{s:.9g}" for s in self.sigmas)
        return f"SelfAdaptiveRealVector({self}, sigmas=[{sig}])"


class Permutation:
    """An ordering of the integers ``0..n-1``, each exactly once."""

    __slots__ = ("order",)
    kind = "perm"

    def __init__(self, order: Sequence[int] | np.ndarray):
        arr = np.array(order, dtype=np.int64)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("a permutation needs at least one element")
        if not np.array_equal(np.sort(arr), np.arange(arr.size)):
            raise ValueError(f"not a permutation of 0..{arr.size - 1}: {arr.tolist()}")
        self.order = _frozen(arr)

    @classmethod
    def _wrap(cls, arr: np.ndarray) -> Permutation:
        obj = cls.__new__(cls)
        obj.order = _frozen(arr)
        return obj

    def __len__(self) -> int:
        return self.order.size

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Permutation) and np.array_equal(self.order, other.order)

    def __hash__(self) -> int:
        return hash(self.order.tobytes())

    def __str__(self) -> str:
        return " ".join(str(i) for i in self.order)

    def __repr__(self) -> str:
        return f"Permutation({self.order.tolist()})"


# --------------------------------------------------------------------------
# Parse trees
# --------------------------------------------------------------------------


def protected_div(a, b):
    """Division returning 1 wherever ``|b| < 1e-9``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    small = np.abs(b) < 1e-9
    with np.errstate(all="ignore"):
        out = a / np.where(small, 1.0, b)
    return np.where(small, 1.0, out)


@dataclass(frozen=True)
class PrimitiveSet:
    """Functions (name -> (arity, vectorised callable)) plus terminals.

    Terminals are variable names (strings) and numeric constants.
    """

    functions: dict[str, tuple[int, Callable]] = field(default_factory=dict)
    variables: tuple[str, ...] = ()
    constants: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "constants", tuple(float(c) for c in self.constants))
        for name, (arity, _) in self.functions.items():
            if arity < 1:
                raise ValueError(f"function {name!r} must have arity >= 1")
            if name in self.variables:
                raise ValueError(f"symbol {name!r} is both a function and a variable")

    @classmethod
    def arithmetic(cls, variables=("x",), constants=(1.0,)) -> PrimitiveSet:
        """``+ - * /`` (protected division) over the given terminals."""
        return cls(
            functions={
                "+": (2, np.add),
                "-": (2, np.subtract),
                "*": (2, np.multiply),
                "/": (2, protected_div),
            },
            variables=tuple(variables),
            constants=tuple(constants),
        )

    @property
    def terminals(self) -> tuple:
        return self.variables + self.constants

    @property
    def function_names(self) -> tuple[str, ...]:
        return tuple(self.functions)

    def arity(self, symbol) -> int:
        if isinstance(symbol, str) and symbol in self.functions:
            return self.functions[symbol][0]
        return 0

    def contains(self, symbol) -> bool:
        if isinstance(symbol, str):
            return symbol in self.functions or symbol in self.variables
        return float(symbol) in self.constants

    def validate(self) -> None:
        if not self.terminals:
            raise ValueError("primitive set needs at least one terminal")


class ParseTree:
    """Immutable expression tree node.

    ``symbol`` is a function name, a variable name or a float constant.
    ``size`` (node count) and ``depth`` (edges on the longest root-leaf path)
    are computed once at construction.
    """

    __slots__ = ("symbol", "children", "size", "depth", "_hash")
    kind = "tree"

    def __init__(self, symbol, children: Sequence[ParseTree] = ()):
        self.symbol = symbol if isinstance(symbol, str) else float(symbol)
        self.children = tuple(children)
        self.size = 1 + sum(c.size for c in self.children)
        self.depth = 1 + max(c.depth for c in self.children) if self.children else 0
        self._hash = None

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, ParseTree):
            return False
        if self.size != other.size or self.symbol != other.symbol:
            return False
        return self.children == other.children

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.symbol, self.children))
        return self._hash

    def __str__(self) -> str:
        label = self.symbol if isinstance(self.symbol, str) else format(self.symbol, ".9g")
        if not self.children:
            return label
        return "(" + " ".join([label] + [str(c) for c in self.children]) + ")"

    def __repr__(self) -> str:
        return f"ParseTree('{self}')"

    # -- traversal helpers used by the tree operators ------------------------

    def nodes(self) -> list[tuple[tuple[int, ...], ParseTree]]:
        """All ``(path, subtree)`` pairs in preorder."""
        out = []
        stack = [((), self)]
        while stack:
            path, node = stack.pop()
            out.append((path, node))
            for i in range(len(node.children) - 1, -1, -1):
                stack.append((path + (i,), node.children[i]))
        return out

    def subtree(self, path: Sequence[int]) -> ParseTree:
        node = self
        for i in path:
            node = node.children[i]
        return node

    def replace(self, path: Sequence[int], new: ParseTree) -> ParseTree:
        """Copy of this tree with the subtree at ``path`` swapped for ``new``."""
        if not path:
            return new
        i = path[0]
        kids = list(self.children)
        kids[i] = kids[i].replace(path[1:], new)
        return ParseTree(self.symbol, kids)

    def is_valid(self, primitives: PrimitiveSet, max_depth: int | None = None) -> bool:
        if max_depth is not None and self.depth > max_depth:
            return False
        for _, node in self.nodes():
            if not primitives.contains(node.symbol):
                return False
            if primitives.arity(node.symbol) != len(node.children):
                return False
        return True

    @classmethod
    def parse(cls, text: str, primitives: PrimitiveSet | None = None) -> ParseTree:
        """Read a parenthesised prefix expression such as ``(+ x (* x x))``."""
        tokens = re.findall(r"\(|\)|[^\s()]+", text)
        pos = 0

        def atom(tok):
            if primitives is not None and isinstance(tok, str) and (
                tok in primitives.functions or tok in primitives.variables
            ):
                return tok
            try:
                return float(tok)
            except ValueError:
                return tok

        def read():
            nonlocal pos
            if pos >= len(tokens):
                raise ValueError(f"unexpected end of expression: {text!r}")
            tok = tokens[pos]
            pos += 1
            if tok == "(":
                head = atom(tokens[pos])
                pos += 1
                kids = []
                while pos < len(tokens) and tokens[pos] != ")":
                    kids.append(read())
                if pos >= len(tokens):
                    raise ValueError(f"unbalanced parentheses: {text!r}")
                pos += 1
                return cls(head, kids)
            if tok == ")":
                raise ValueError(f"unexpected ')' in {text!r}")
            return cls(atom(tok))

        tree = read()
        if pos != len(tokens):
            raise ValueError(f"trailing tokens in {text!r}")
        if primitives is not None and not tree.is_valid(primitives):
            raise ValueError(f"expression {text!r} does not fit the primitive set")
        return tree


def evaluate_tree(tree: ParseTree, primitives: PrimitiveSet, env: dict[str, np.ndarray]):
    """Vectorised evaluation of ``tree`` with variables bound by ``env``."""
    sym = tree.symbol
    if not tree.children:
        if isinstance(sym, str):
            return env[sym]
        return sym
    fn = primitives.functions[sym][1]
    return fn(*(evaluate_tree(c, primitives, env) for c in tree.children))


def random_tree(
    primitives: PrimitiveSet,
    max_depth: int,
    method: str,
    rng: np.random.Generator,
    min_depth: int = 2,
) -> ParseTree:
    """Random tree by the ``full``, ``grow`` or ``ramped`` method.

    ``full`` puts terminals only at ``max_depth``; ``grow`` picks uniformly
    among all primitives above ``max_depth`` so branches may stop early.
    ``ramped`` draws a depth in ``min_depth..max_depth`` and one of the two
    methods for every call, which over a population gives ramped
    half-and-half.
    """
    primitives.validate()
    if max_depth < 0:
        raise ValueError("max_depth must be >= 0")
    if method == "ramped":
        lo = min(min_depth, max_depth)
        max_depth = int(rng.integers(lo, max_depth + 1))
        method = "full" if rng.random() < 0.5 else "grow"
    if method not in ("full", "grow"):
        raise ValueError(f"unknown tree method {method!r}")

    funcs = primitives.function_names
    terms = primitives.terminals
    n_all = len(funcs) + len(terms)

    def build(depth: int) -> ParseTree:
        if depth >= max_depth or not funcs:
            return ParseTree(terms[int(rng.integers(len(terms)))])
        if method == "full":
            name = funcs[int(rng.integers(len(funcs)))]
        else:
            k = int(rng.integers(n_all))
            if k >= len(funcs):
                return ParseTree(terms[k - len(funcs)])
            name = funcs[k]
        arity = primitives.functions[name][0]
        return ParseTree(name, [build(depth + 1) for _ in range(arity)])

    return build(0)


# --------------------------------------------------------------------------
# Search spaces
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class BitStringSpace:
    length: int
    kind = "bits"

    def __post_init__(self):
        if self.length < 1:
            raise ValueError("bit-string length must be >= 1")

    def sample(self, rng: np.random.Generator) -> BitString:
        return BitString._wrap(rng.integers(0, 2, size=self.length, dtype=np.uint8))

    def check(self, g) -> None:
        if not isinstance(g, BitString):
            raise TypeError(f"expected a BitString, got {type(g).__name__}")
        if len(g) != self.length:
            raise ValueError(f"bit-string length {len(g)} != {self.length}")


@dataclass(frozen=True)
class RealVectorSpace:
    """Box of real vectors.

    ``low``/``high`` are the hard bounds applied by mutation (clip policy) and
    may be infinite.  ``init_low``/``init_high`` give the sampling box for the
    initial population; they default to the hard bounds and must be finite.
    """

    low: tuple[float, ...]
    high: tuple[float, ...]
    init_low: tuple[float, ...] | None = None
    init_high: tuple[float, ...] | None = None
    kind = "real"

    def __post_init__(self):
        low = tuple(float(v) for v in self.low)
        high = tuple(float(v) for v in self.high)
        if len(low) != len(high) or not low:
            raise ValueError("low and high must be non-empty and equally long")
        if any(a > b for a, b in zip(low, high)):
            raise ValueError("lower bound exceeds upper bound")
        object.__setattr__(self, "low", low)
        object.__setattr__(self, "high", high)
        for name in ("init_low", "init_high"):
            v = getattr(self, name)
            if v is not None:
                v = tuple(float(x) for x in v)
                if len(v) != len(low):
                    raise ValueError(f"{name} has the wrong dimension")
                object.__setattr__(self, name, v)

    @classmethod
    def box(cls, n: int, low: float, high: float, init_low=None, init_high=None) -> RealVectorSpace:
        return cls(
            (low,) * n,
            (high,) * n,
            None if init_low is None else (init_low,) * n,
            None if init_high is None else (init_high,) * n,
        )

    @property
    def dimension(self) -> int:
        return len(self.low)

    @property
    def bounds(self):
        low = np.array(self.low)
        high = np.array(self.high)
        if np.all(np.isinf(low)) and np.all(np.isinf(high)):
            return None
        return _frozen(low), _frozen(high)

    def init_box(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.array(self.init_low if self.init_low is not None else self.low)
        hi = np.array(self.init_high if self.init_high is not None else self.high)
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError(
                "uniform sampling needs finite initialization bounds on an unbounded real domain"
            )
        if self.init_low is not None or self.init_high is not None:
            if np.any(lo < np.array(self.low)) or np.any(hi > np.array(self.high)):
                raise ValueError("initialization box must lie inside the hard bounds")
        return lo, hi

    def sample(self, rng: np.random.Generator) -> RealVector:
        lo, hi = self.init_box()
        return RealVector._wrap(rng.uniform(lo, hi), self.bounds)

    def self_adaptive(self, sigma0=None) -> SelfAdaptiveSpace:
        return SelfAdaptiveSpace(self, sigma0)

    def check(self, g) -> None:
        if not isinstance(g, RealVector):
            raise TypeError(f"expected a RealVector, got {type(g).__name__}")
        if len(g) != self.dimension:
            raise ValueError(f"vector dimension {len(g)} != {self.dimension}")
        if np.any(g.values < np.array(self.low)) or np.any(g.values > np.array(self.high)):
            raise ValueError("vector component outside the problem bounds")


@dataclass(frozen=True)
class SelfAdaptiveSpace:
    """Real box whose genotypes carry step sizes initialised to ``sigma0``.

    ``sigma0`` may be a scalar, a per-component sequence or ``None``; the
    default is 10% of each component's initialization width.
    """

    base: RealVectorSpace
    sigma0: float | tuple[float, ...] | None = None
    kind = "real"

    @property
    def dimension(self) -> int:
        return self.base.dimension

    def initial_sigmas(self) -> np.ndarray:
        if self.sigma0 is None:
            lo, hi = self.base.init_box()
            return 0.1 * (hi - lo)
        sig = np.broadcast_to(np.asarray(self.sigma0, dtype=float), (self.dimension,)).copy()
        if np.any(~(sig > 0)):
            raise ValueError("sigma0 must be positive")
        return sig

    def sample(self, rng: np.random.Generator) -> SelfAdaptiveRealVector:
        lo, hi = self.base.init_box()
        values = rng.uniform(lo, hi)
        return SelfAdaptiveRealVector._wrap(values, self.base.bounds, self.initial_sigmas())

    def lift(self, g: RealVector) -> SelfAdaptiveRealVector:
        """Attach initial step sizes to a plain real vector (used for inoculants)."""
        if isinstance(g, SelfAdaptiveRealVector):
            return g
        return SelfAdaptiveRealVector._wrap(g.values.copy(), self.base.bounds, self.initial_sigmas())

    def check(self, g) -> None:
        self.base.check(g)


@dataclass(frozen=True)
class PermutationSpace:
    n: int
    kind = "perm"

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("permutation size must be >= 1")

    def sample(self, rng: np.random.Generator) -> Permutation:
        # Generator.permutation is a Fisher-Yates shuffle
        return Permutation._wrap(rng.permutation(self.n))

    def check(self, g) -> None:
        if not isinstance(g, Permutation):
            raise TypeError(f"expected a Permutation, got {type(g).__name__}")
        if len(g) != self.n:
            raise ValueError(f"permutation size {len(g)} != {self.n}")


@dataclass(frozen=True)
class TreeSpace:
    primitives: PrimitiveSet
    max_depth: int = 17
    init_depth: tuple[int, int] = (2, 6)
    init_method: str = "ramped"
    kind = "tree"

    def __post_init__(self):
        self.primitives.validate()
        lo, hi = self.init_depth
        if not (0 <= lo <= hi <= self.max_depth):
            raise ValueError("need 0 <= init_depth[0] <= init_depth[1] <= max_depth")

    def sample(self, rng: np.random.Generator) -> ParseTree:
        lo, hi = self.init_depth
        return random_tree(self.primitives, hi, self.init_method, rng, min_depth=lo)

    def check(self, g) -> None:
        if not isinstance(g, ParseTree):
            raise TypeError(f"expected a ParseTree, got {type(g).__name__}")
        if not g.is_valid(self.primitives, self.max_depth):
            raise ValueError(f"tree {g} violates the primitive set or max depth {self.max_depth}")


def sample_uniform(space, rng: np.random.Generator):
    """Draw one genotype from ``space`` as uniformly as the space allows."""
    return space.sample(rng)


# --------------------------------------------------------------------------
# Distances
# --------------------------------------------------------------------------


def _tree_distance(a: ParseTree, b: ParseTree) -> int:
    if a is b:
        return 0
    cost = 0 if a.symbol == b.symbol else 1
    if len(a.children) == len(b.children):
        return cost + sum(_tree_distance(x, y) for x, y in zip(a.children, b.children))
    # no aligned children: every descendant on both sides counts
    return cost + (a.size - 1) + (b.size - 1)


def distance(a, b) -> float:
    """Genotype distance used by diversity measurement and fitness sharing.

    Hamming count for bit-strings, Euclidean distance over the object values
    for real vectors (step sizes ignored), number of differing positions for
    permutations, and for trees the number of nodes that differ when both
    trees are walked in lockstep (mismatched symbols count once, unalignable
    subtrees count every node on both sides).
    """
    if a.kind != b.kind:
        raise TypeError(f"cannot compare {a.kind} genotype with {b.kind}")
    if isinstance(a, BitString):
        if len(a) != len(b):
            raise ValueError("bit-string lengths differ")
        return float(np.count_nonzero(a.bits != b.bits))
    if isinstance(a, RealVector):
        if len(a) != len(b):
            raise ValueError("vector dimensions differ")
        return float(math.sqrt(float(np.sum((a.values - b.values) ** 2))))
    if isinstance(a, Permutation):
        if len(a) != len(b):
            raise ValueError("permutation sizes differ")
        return float(np.count_nonzero(a.order != b.order))
    if isinstance(a, ParseTree):
        return float(_tree_distance(a, b))
    raise TypeError(f"unsupported genotype {type(a).__name__}")


def render(g) -> str:
    """Text form used in logs and result files."""
    return str(g)
