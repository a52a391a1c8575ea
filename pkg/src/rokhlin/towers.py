"""First-return-time partitions and Rokhlin tower systems.

Everything here is exact clopen combinatorics: a tower system over a base set
``Y`` consists of bases ``T_0 .. T_m`` with heights ``r_0 <= .. <= r_m`` whose
levels ``h^j(T_l^0)`` tile the space.  Two constructions are provided: the
``standard`` variant takes each base to be the exact return-time fiber, the
``full`` variant takes ``T_l = Y \\cap h^{-r_l}(Y)``.  Both share the same
interiors ``T_l^0`` and the same heights.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import BoundSearchExceeded
from .subshift import ClopenSet, SubstitutionSystem, Window

VARIANTS = ("standard", "full")

# Extra window width used when checking partition identities, on top of the
# provable requirement |Y.window| + 2 r_m; guards off-by-one regressions.
WINDOW_SLACK = 4


@dataclass(frozen=True)
class ReturnProfile:
    """Partition of ``Y`` into clopen fibers of the first return time."""

    Y: ClopenSet
    bound: int
    levels: tuple  # ordered (return_time, piece) pairs, times strictly increasing

    @property
    def times(self):
        return tuple(r for r, _ in self.levels)

    def piece(self, r: int) -> ClopenSet:
        for time, piece in self.levels:
            if time == r:
                return piece
        raise KeyError(r)


def return_time_bound(Y: ClopenSet, depth: int | None = None) -> int:
    """Least ``R`` such that every point enters ``Y`` within ``R`` forward steps."""
    if Y.is_empty():
        raise ValueError("Y must be nonempty")
    system = Y.system
    if depth is None:
        depth = system.depth
    full = system.full_set()
    union = Y.shift(-1)
    for r in range(1, depth + 1):
        if union == full:
            return r
        union = union | Y.shift(-(r + 1))
    raise BoundSearchExceeded(
        f"no forward-return bound within depth {depth}; "
        "the base set is too thin for the configured enumeration depth")


def return_profile(Y: ClopenSet, depth: int | None = None) -> ReturnProfile:
    bound = return_time_bound(Y, depth)
    remaining = Y
    levels = []
    for r in range(1, bound + 1):
        if remaining.is_empty():
            break
        piece = remaining & Y.shift(-r)
        if not piece.is_empty():
            levels.append((r, piece))
            remaining = remaining - piece
    return ReturnProfile(Y=Y, bound=bound, levels=tuple(levels))


class RokhlinSystem:
    """Tower bases with heights; interiors and boundaries are derived.

    ``D_l = T_l \\cap (T_0 \\cup .. \\cup T_{l-1})`` and ``T_l^0 = T_l - D_l``.
    The constructor accepts arbitrary data so that the verifier can be run
    against hand-built (possibly invalid) systems.
    """

    def __init__(self, system: SubstitutionSystem, variant: str, Y: ClopenSet,
                 bases, heights):
        if variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        if len(bases) != len(heights) or not bases:
            raise ValueError("need equally many bases and heights, at least one")
        self.system = system
        self.variant = variant
        self.Y = Y
        self.bases = tuple(bases)
        self.heights = tuple(int(r) for r in heights)
        boundaries = []
        interiors = []
        seen = system.empty_set()
        for T in self.bases:
            D = T & seen
            boundaries.append(D)
            interiors.append(T - D)
            seen = seen | T
        self.boundaries = tuple(boundaries)
        self.interiors = tuple(interiors)

    @property
    def m(self) -> int:
        return len(self.bases) - 1

    def level(self, l: int, j: int) -> ClopenSet:
        """The ``j``-th level ``h^j(T_l^0)`` of the ``l``-th tower."""
        return self.interiors[l].shift(j)

    def tower_union(self, l: int) -> ClopenSet:
        """``X_l``: the union of all levels of towers ``0 .. l`` (closed bases)."""
        out = self.system.empty_set()
        for i in range(l + 1):
            for j in range(self.heights[i]):
                out = out | self.bases[i].shift(j)
        return out

    def verification_window(self) -> Window:
        w = self.Y.window
        for T in self.bases:
            w = w.hull(T.window)
        r = max(self.heights)
        pad = r + WINDOW_SLACK // 2
        return Window(w.lo - pad, w.hi + pad)

    def to_json(self) -> dict:
        return {
            "variant": self.variant,
            "Y": self.Y.to_json(),
            "m": self.m,
            "heights": list(self.heights),
            "bases": [T.to_json() for T in self.bases],
            "interiors": [T.to_json() for T in self.interiors],
            "boundaries": [D.to_json() for D in self.boundaries],
        }

    def __repr__(self):
        return f"RokhlinSystem({self.variant}, heights={list(self.heights)})"


def build_towers(Y: ClopenSet, variant: str = "full",
                 depth: int | None = None) -> RokhlinSystem:
    """Tower system over ``Y``: heights are the exact range of the return time."""
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    profile = return_profile(Y, depth)
    heights = profile.times
    if variant == "standard":
        bases = [piece for _, piece in profile.levels]
    else:
        bases = [Y & Y.shift(-r) for r in heights]
    return RokhlinSystem(Y.system, variant, Y, bases, heights)


@dataclass(frozen=True)
class AxiomReport:
    conditions: dict
    irredundant: bool

    @property
    def passed(self) -> bool:
        return all(self.conditions.values())

    def to_json(self) -> dict:
        return {"conditions": dict(self.conditions),
                "irredundant": self.irredundant,
                "passed": self.passed}


def verify_rokhlin_axioms(S: RokhlinSystem,
                          depth: int | None = None) -> AxiomReport:
    """Check the five tower-system conditions plus irredundancy, exactly.

    Conditions: (1) the bases cover ``Y``; (2) heights nondecreasing;
    (3) ``h^{r_l}(T_l)`` back inside ``Y``; (4) on each interior the return
    time equals the height; (5) each height is attained on its base.
    Irredundancy (interiors dense in bases, here: equal as clopen sets) is
    reported separately; the full variant legitimately fails it whenever a
    boundary is nonempty.
    """
    profile = return_profile(S.Y, depth)
    conditions = {}
    union = S.system.empty_set()
    for T in S.bases:
        union = union | T
    conditions["bases-cover-Y"] = union == S.Y
    conditions["heights-nondecreasing"] = all(
        a <= b for a, b in zip(S.heights, S.heights[1:]))
    conditions["tops-return-to-Y"] = all(
        T.shift(r).issubset(S.Y) for T, r in zip(S.bases, S.heights))

    def fiber(r):
        try:
            return profile.piece(r)
        except KeyError:
            return S.system.empty_set()

    conditions["interior-return-time-exact"] = all(
        T0.issubset(fiber(r)) for T0, r in zip(S.interiors, S.heights))
    conditions["height-attained-on-base"] = all(
        (T.is_empty() and r in profile.times) or not (T & fiber(r)).is_empty()
        for T, r in zip(S.bases, S.heights))
    irredundant = all(not T0.is_empty() and T0 == T
                      for T0, T in zip(S.interiors, S.bases))
    return AxiomReport(conditions=conditions, irredundant=irredundant)


def _disjoint_union(system, pieces, window):
    """Word sets of the pieces on ``window`` if pairwise disjoint, else None."""
    seen = set()
    total = 0
    for piece in pieces:
        words = piece.words_on(window)
        total += len(words)
        seen |= words
    if len(seen) != total:
        return None
    return frozenset(seen)


@dataclass(frozen=True)
class PartitionReport:
    identities: dict
    window: Window

    @property
    def passed(self) -> bool:
        return all(self.identities.values())

    def to_json(self) -> dict:
        return {"identities": dict(self.identities),
                "window": self.window.to_json(),
                "passed": self.passed}


def partition_identities(S: RokhlinSystem) -> PartitionReport:
    """Verify the level-partition identities of a tower system, exactly.

    Disjointness and coverage are both checked over a window wide enough to
    carry every set involved (base windows padded by the maximal height plus
    slack).
    """
    system = S.system
    window = S.verification_window()
    full_words = system.language(window.length)
    rm = max(S.heights)
    identities = {}

    def check(name, pieces, target):
        union = _disjoint_union(system, pieces, window)
        identities[name] = union is not None and union == target.words_on(window)

    check("interiors-partition-Y", S.interiors, S.Y)

    levels = [S.level(l, j)
              for l in range(S.m + 1) for j in range(S.heights[l])]
    union = _disjoint_union(system, levels, window)
    identities["levels-partition-X"] = union is not None and union == full_words

    check("tops-partition-Y",
          [S.interiors[l].shift(S.heights[l]) for l in range(S.m + 1)], S.Y)

    ok_fwd = True
    for n in range(rm + 1):
        target = system.empty_set()
        for j in range(n):
            target = target | S.Y.shift(j)
        pieces = [S.level(l, j) for l in range(S.m + 1)
                  for j in range(min(n, S.heights[l]))]
        union = _disjoint_union(system, pieces, window)
        ok_fwd = ok_fwd and union is not None and union == target.words_on(window)
    identities["forward-union-partition"] = ok_fwd

    ok_bwd = True
    for n in range(1, rm + 1):
        target = system.empty_set()
        for j in range(1, n + 1):
            target = target | S.Y.shift(-j)
        pieces = [S.interiors[l].shift(S.heights[l] - j)
                  for l in range(S.m + 1)
                  for j in range(1, min(n, S.heights[l]) + 1)]
        union = _disjoint_union(system, pieces, window)
        ok_bwd = ok_bwd and union is not None and union == target.words_on(window)
    identities["backward-union-partition"] = ok_bwd

    fwd = system.empty_set()
    for n in range(rm):
        fwd = fwd | S.Y.shift(n)
    identities["orbit-of-Y-covers-X"] = fwd == system.full_set()

    complement_pieces = [S.level(l, j) for l in range(S.m + 1)
                         for j in range(1, S.heights[l])]
    union = _disjoint_union(system, complement_pieces, window)
    identities["complement-partition"] = (
        union is not None
        and union == (system.full_set() - S.Y).words_on(window))

    return PartitionReport(identities=identities, window=window)


@dataclass(frozen=True)
class AdmissiblePath:
    """An ordered composition of a height into lower heights, with the clopen
    set of boundary points that traverse exactly that sequence of towers."""

    l: int
    mu: tuple
    path_set: ClopenSet

    def to_json(self) -> dict:
        return {"l": self.l, "mu": list(self.mu), "set": self.path_set.to_json()}


def admissible_sequences(S: RokhlinSystem, l: int) -> list:
    """All paths for tower ``l``, in lexicographic order of the index sequence.

    A path ``mu`` is a sequence over ``{0 .. l-1}`` whose heights sum to
    ``r_l``; its set is ``T_l`` intersected with the pulled-back bases along
    the partial sums.  Many path sets are legitimately empty.
    """
    if not (0 <= l <= S.m):
        raise ValueError(f"tower index {l} out of range")
    target = S.heights[l]
    paths = []

    def extend(mu, total):
        if total == target:
            paths.append(tuple(mu))
            return
        for i in range(l):
            if total + S.heights[i] <= target:
                mu.append(i)
                extend(mu, total + S.heights[i])
                mu.pop()

    extend([], 0)
    out = []
    for mu in sorted(paths):
        piece = S.bases[l]
        partial = 0
        for idx in mu:
            piece = piece & S.bases[idx].shift(-partial)
            partial += S.heights[idx]
        out.append(AdmissiblePath(l=l, mu=mu, path_set=piece))
    return out


def boundary_path_cover(S: RokhlinSystem, l: int) -> bool:
    """Exact structural checks for level ``l`` of the decomposition.

    Verifies that the path sets cover the boundary ``D_l``, that the levels of
    towers ``0..l`` tile their union ``X_l``, that distinct levels of tower
    ``l`` only meet inside ``X_{l-1}`` and never meet interior levels, that a
    base point whose level enters ``X_{l-1}`` lies on the boundary, and that
    ``D_l = T_l \\cap X_{l-1}``.
    """
    system = S.system
    window = S.verification_window()
    D = S.boundaries[l]
    paths = admissible_sequences(S, l)
    cover = system.empty_set()
    for path in paths:
        if not path.path_set.issubset(D):
            return False
        cover = cover | path.path_set
    if cover != D:
        return False

    X_prev = S.tower_union(l - 1) if l > 0 else system.empty_set()
    X_l = S.tower_union(l)
    levels = [S.level(i, j) for i in range(l + 1) for j in range(S.heights[i])]
    union = _disjoint_union(system, levels, window)
    if union is None or union != X_l.words_on(window):
        return False

    T, r = S.bases[l], S.heights[l]
    for j1 in range(r):
        for j2 in range(r):
            if j1 == j2:
                continue
            overlap = T.shift(j1) & T.shift(j2)
            if not overlap.issubset(X_prev):
                return False
            if not (T.shift(j1) & S.interiors[l].shift(j2)).is_empty():
                return False
    for j in range(r):
        entering = T & X_prev.shift(-j)
        if not entering.issubset(D):
            return False
    return D == (T & X_prev)
