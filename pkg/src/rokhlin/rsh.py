"""Stage algebras, gluing maps, constructive lifting, approximating systems.

The tower system induces an iterated-pullback presentation: stage ``l``
consists of tuples ``(b_0, .., b_l)`` of matrix functions over the tower
bases such that on every path set ``T_{l,mu}`` the top component equals the
block-diagonal of the earlier components read along the path.  ``lift``
inverts the symbolic evaluation: it rebuilds a formal series from any stage
tuple, diagonal by diagonal, extending by zero off the tower levels.

An approximating system replaces each base by its projection onto the
coordinates ``[n1, n2 + r_l]`` when the underlying set is a product over
``[n1, n2]``; the index-shift maps on projections commute with the dynamics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .crossed import (
    CylinderFunction,
    FormalElement,
    gamma_component,
    gamma_symbolic,
    in_ob_subalgebra,
    injectivity_check,
    sample_subalgebra_element,
    _unit_disc,
)
from .errors import NotInStageAlgebra, NotProductWindowSet, PathMismatch
from .matrixfn import MatrixCylinderFunction
from .subshift import ClopenSet, PointWindow, Window
from .towers import AdmissiblePath, RokhlinSystem, admissible_sequences

STAGE_TOL = 1e-12


@dataclass(frozen=True)
class StageElement:
    """Tuple of matrix functions over the tower bases ``T_0 .. T_l``."""

    components: tuple

    @property
    def level(self) -> int:
        return len(self.components) - 1

    @classmethod
    def identity(cls, S: RokhlinSystem, level: int | None = None) -> "StageElement":
        if level is None:
            level = S.m
        return cls(tuple(MatrixCylinderFunction.identity(S.bases[i], S.heights[i])
                         for i in range(level + 1)))

    @classmethod
    def zero(cls, S: RokhlinSystem, level: int | None = None) -> "StageElement":
        if level is None:
            level = S.m
        return cls(tuple(MatrixCylinderFunction.zero(S.bases[i], S.heights[i])
                         for i in range(level + 1)))

    def truncate(self, level: int) -> "StageElement":
        return StageElement(self.components[: level + 1])

    def equal_exact(self, other: "StageElement") -> bool:
        if self.level != other.level:
            return False
        return all(a.allclose(b, atol=0.0)
                   for a, b in zip(self.components, other.components))

    def allclose(self, other: "StageElement", atol: float = STAGE_TOL) -> bool:
        if self.level != other.level:
            return False
        return all(a.allclose(b, atol=atol)
                   for a, b in zip(self.components, other.components))


def stage_from_gamma(a: FormalElement, S: RokhlinSystem,
                     level: int | None = None) -> StageElement:
    return StageElement(tuple(gamma_symbolic(a, S, level)))


# -- gluing maps ------------------------------------------------------------------


def _partial_sums(S: RokhlinSystem, mu):
    sums = [0]
    for idx in mu:
        sums.append(sums[-1] + S.heights[idx])
    return sums


def beta_path(S: RokhlinSystem, l: int, path: AdmissiblePath, b: StageElement,
              x: PointWindow) -> np.ndarray:
    """Block-diagonal gluing value at a point of the path set.

    Block ``s`` is the component indexed by ``mu(s)`` evaluated along the
    orbit at the partial sum of the earlier heights; the blocks fill an
    ``r_l x r_l`` matrix because the heights along the path sum to ``r_l``.
    """
    if b.level < l - 1:
        raise ValueError("need components for every tower below the path level")
    if not path.path_set.contains_point(x):
        raise PathMismatch(f"point is not in the path set of mu={path.mu}")
    r = S.heights[l]
    out = np.zeros((r, r), dtype=complex)
    offset = 0
    for s, idx in enumerate(path.mu):
        p = _partial_sums(S, path.mu)[s]
        block = b.components[idx].value_at(x.apply_shift(p))
        size = S.heights[idx]
        out[offset : offset + size, offset : offset + size] = block
        offset += size
    return out


def _path_eval_window(S: RokhlinSystem, l: int, path: AdmissiblePath,
                      b: StageElement, extra: Window | None = None) -> Window:
    w = path.path_set.window
    sums = _partial_sums(S, path.mu)
    for s, idx in enumerate(path.mu):
        w = w.hull(b.components[idx].window.shift(sums[s]))
    if extra is not None:
        w = w.hull(extra)
    return w


def _beta_values_on(S, l, path, b, window):
    """Gluing values for every word of the path set, keyed by window word."""
    sums = _partial_sums(S, path.mu)
    r = S.heights[l]
    out = {}
    for w in path.path_set.words_on(window):
        M = np.zeros((r, r), dtype=complex)
        offset = 0
        for s, idx in enumerate(path.mu):
            block = b.components[idx].value(w, window.shift(-sums[s]))
            size = S.heights[idx]
            M[offset : offset + size, offset : offset + size] = block
            offset += size
        out[w] = M
    return out


def stage_violations(S: RokhlinSystem, b: StageElement, atol: float = STAGE_TOL):
    """All gluing violations ``(level, mu, word)``, lowest level first."""
    violations = []
    for l in range(1, b.level + 1):
        comp = b.components[l]
        for path in admissible_sequences(S, l):
            if path.path_set.is_empty():
                continue
            window = _path_eval_window(S, l, path, b, extra=comp.window)
            glued = _beta_values_on(S, l, path, b, window)
            for w, M in glued.items():
                if not np.allclose(comp.value(w, window), M, rtol=0.0, atol=atol):
                    violations.append((l, path.mu, w))
    return violations


def in_stage_algebra(S: RokhlinSystem, b: StageElement,
                     atol: float = STAGE_TOL) -> bool:
    """Whether all gluing conditions hold at every word of every path set."""
    for i, comp in enumerate(b.components):
        if comp.size != S.heights[i]:
            raise ValueError(f"component {i} has size {comp.size}, "
                             f"expected {S.heights[i]}")
    return not stage_violations(S, b, atol)


def beta_boundary(S: RokhlinSystem, l: int, b: StageElement,
                  atol: float = STAGE_TOL) -> MatrixCylinderFunction:
    """The glued boundary function on ``D_l``.

    Well defined because every boundary word lies on at least one path set and
    overlapping paths give the same matrix for stage-algebra inputs; raises
    with the offending ``(mu, nu, word)`` when the input is not one.
    """
    if b.level < l - 1:
        raise ValueError("need components for every tower below the boundary level")
    if not in_stage_algebra(S, b.truncate(l - 1), atol):
        raise NotInStageAlgebra(
            "components below the boundary level violate their own gluing",
            violation=stage_violations(S, b.truncate(l - 1), atol)[0])
    D = S.boundaries[l]
    paths = [p for p in admissible_sequences(S, l) if not p.path_set.is_empty()]
    window = D.window
    for path in paths:
        window = _path_eval_window(S, l, path, b, extra=window)
    values = {}
    origin = {}
    for path in paths:
        glued = _beta_values_on(S, l, path, b, window)
        for w, M in glued.items():
            if w in values:
                if not np.allclose(values[w], M, rtol=0.0, atol=atol):
                    raise NotInStageAlgebra(
                        f"paths {origin[w]} and {path.mu} disagree at {w!r}",
                        violation=(l, (origin[w], path.mu), w))
            else:
                values[w] = M
                origin[w] = path.mu
    expected = D.words_on(window)
    missing = expected - set(values)
    if missing:
        raise AssertionError(f"boundary words not covered by any path: {missing}")
    values = {w: values[w] for w in expected}
    return MatrixCylinderFunction(D, window, S.heights[l], values)


# -- constructive lifting ------------------------------------------------------------


def _lift_single_tower(S: RokhlinSystem, l: int,
                       c: MatrixCylinderFunction) -> FormalElement:
    """Series supported off the lower towers whose evaluation has top
    component ``c`` and zero components below.

    Walks the diagonals of ``c``: degree ``n`` collects the entries
    ``(j, j - n)`` as one coefficient, placed on the level sets ``h^j`` of the
    base and extended by zero.  Upper diagonals ride on the adjoint of the
    same construction applied to the conjugate transpose.
    """
    system = S.system
    r = S.heights[l]
    T = S.bases[l]
    X_prev = S.tower_union(l - 1) if l > 0 else system.empty_set()
    if l > 0:
        boundary = c.restrict(S.boundaries[l])
        if not boundary.is_zero():
            raise NotInStageAlgebra(
                "top component does not vanish on the boundary")

    window = X_prev.window if not X_prev.is_empty() else T.window
    for j in range(r):
        window = window.hull(T.window.shift(-j)).hull(c.window.shift(-j))
    level_words = {}
    for j in range(r):
        level_words[j] = T.shift(j).words_on(window)
    prev_words = X_prev.words_on(window) if not X_prev.is_empty() else frozenset()

    def diagonal_coefficient(matrix_at, n):
        values = {}
        for w in system.language(window.length):
            if w in prev_words:
                continue
            hits = [j for j in range(n, r) if w in level_words[j]]
            if not hits:
                continue
            assert len(hits) == 1, "distinct levels overlap outside lower towers"
            j = hits[0]
            base_point = PointWindow(system, window, w).apply_shift(-j)
            value = matrix_at(base_point)[j, j - n]
            if value != 0:
                values[w] = value
        if not values:
            return None
        return CylinderFunction(system, window, values)

    terms = {}
    for n in range(r):
        f = diagonal_coefficient(c.value_at, n)
        if f is not None:
            terms[n] = f
    upper = c.conjugate_transpose()
    for n in range(1, r):
        f = diagonal_coefficient(upper.value_at, n)
        if f is not None:
            g = f.conj().compose_shift(n)
            terms[-n] = terms[-n] + g if -n in terms else g
    return FormalElement(system, terms)


def lift(S: RokhlinSystem, b: StageElement) -> FormalElement:
    """A series in the orbit-breaking subalgebra whose evaluation is ``b``.

    Proceeds by induction on the level: lift the lower components, subtract
    their evaluation from the top component (the difference vanishes on the
    boundary), and lift the remainder over the top tower alone.
    """
    if not in_stage_algebra(S, b):
        violation = stage_violations(S, b)[0]
        raise NotInStageAlgebra(
            f"gluing violated at level {violation[0]}, mu={violation[1]}, "
            f"word {violation[2]!r}", violation=violation)
    a = _lift_single_tower(S, 0, b.components[0])
    for l in range(1, b.level + 1):
        residue = b.components[l] - gamma_component(a, S, l)
        a = a + _lift_single_tower(S, l, residue)
    if not in_ob_subalgebra(a, S.Y):
        raise AssertionError("lift left the orbit-breaking subalgebra")
    return a


# -- stage-element sampling -----------------------------------------------------------


def _stage_windows(S: RokhlinSystem):
    """Per-level tabulation windows wide enough for every gluing evaluation."""
    base = S.Y.window
    for T in S.bases:
        base = base.hull(T.window)
    windows = []
    pad = 0
    for i, r in enumerate(S.heights):
        if i > 0:
            pad += r
        windows.append(Window(base.lo, base.hi + pad))
    return windows


def _repair_gluing(S: RokhlinSystem, components):
    """Overwrite each component on its path sets with the glued value."""
    out = [components[0]]
    for l in range(1, len(components)):
        comp = components[l]
        window = comp.window
        staged = StageElement(tuple(out))
        values = dict(comp.values_on(window))
        for path in admissible_sequences(S, l):
            if path.path_set.is_empty():
                continue
            glued = _beta_values_on(S, l, path, staged, window)
            for w, M in glued.items():
                values[w] = M
        out.append(MatrixCylinderFunction(comp.base, window, comp.size, values))
    return StageElement(tuple(out))


def sample_stage_element(S: RokhlinSystem, rng,
                         level: int | None = None) -> StageElement:
    """Random stage-algebra element: free values repaired into the gluing."""
    if level is None:
        level = S.m
    windows = _stage_windows(S)
    components = []
    for i in range(level + 1):
        r = S.heights[i]
        values = {}
        for w in sorted(S.bases[i].words_on(windows[i])):
            M = np.array([[_unit_disc(rng) for _ in range(r)] for _ in range(r)])
            values[w] = M
        components.append(MatrixCylinderFunction(
            S.bases[i], windows[i], r, values))
    return _repair_gluing(S, components)


def stage_basis_elements(S: RokhlinSystem, level: int | None = None):
    """Matrix-unit-times-word-indicator generators, repaired into the gluing."""
    if level is None:
        level = S.m
    windows = _stage_windows(S)
    for i in range(level + 1):
        r = S.heights[i]
        for word in sorted(S.bases[i].words_on(windows[i])):
            for j in range(r):
                for k in range(r):
                    unit = np.zeros((r, r), dtype=complex)
                    unit[j, k] = 1.0
                    components = []
                    for ii in range(level + 1):
                        rr = S.heights[ii]
                        values = {w: (unit if ii == i and w == word
                                      else np.zeros((rr, rr)))
                                  for w in S.bases[ii].words_on(windows[ii])}
                        components.append(MatrixCylinderFunction(
                            S.bases[ii], windows[ii], rr, values))
                    yield _repair_gluing(S, components)


# -- pullback verification ------------------------------------------------------------


@dataclass(frozen=True)
class PullbackReport:
    """Sampled evidence that each stage is the pullback it claims to be."""

    boundary_compatible: bool
    pairs_glue_back: bool
    lift_round_trip: bool
    injective_on_samples: bool
    samples: int

    @property
    def passed(self) -> bool:
        return (self.boundary_compatible and self.pairs_glue_back
                and self.lift_round_trip and self.injective_on_samples)

    def to_json(self) -> dict:
        return {"boundary_compatible": self.boundary_compatible,
                "pairs_glue_back": self.pairs_glue_back,
                "lift_round_trip": self.lift_round_trip,
                "injective_on_samples": self.injective_on_samples,
                "samples": self.samples, "passed": self.passed}


def pullback_isomorphism_check(S: RokhlinSystem, samples: int = 100,
                               seed: int = 0,
                               basis_limit: int | None = None) -> PullbackReport:
    """Four sampled checks: stage tuples restrict compatibly to boundaries,
    pullback pairs glue back, lifting inverts the evaluation exactly, and
    nonzero subalgebra elements evaluate nonzero.

    The matrix-unit basis is included in full by default; ``basis_limit``
    thins it to an evenly spaced subset for systems whose bases carry many
    words.
    """
    rng = np.random.default_rng(seed)
    pool = []
    basis = list(stage_basis_elements(S))
    if basis_limit is not None and len(basis) > basis_limit:
        stride = len(basis) / basis_limit
        basis = [basis[int(i * stride)] for i in range(basis_limit)]
    pool.extend(basis)
    while len(pool) < max(samples, len(basis)):
        if rng.uniform() < 0.5:
            a = sample_subalgebra_element(S.system, S.Y, rng,
                                          max(S.heights) + 1)
            pool.append(stage_from_gamma(a, S))
        else:
            pool.append(sample_stage_element(S, rng))

    boundary_ok = True
    for b in pool:
        for l in range(1, S.m + 1):
            if S.boundaries[l].is_empty():
                continue
            rho = b.components[l].restrict(S.boundaries[l])
            glued = beta_boundary(S, l, b)
            if not rho.allclose(glued, atol=STAGE_TOL):
                boundary_ok = False

    pairs_ok = True
    for _ in range(min(samples, 20)):
        lower = sample_stage_element(S, rng, level=S.m - 1) if S.m > 0 else None
        if lower is None:
            break
        l = S.m
        windows = _stage_windows(S)
        r = S.heights[l]
        values = {w: np.array([[_unit_disc(rng) for _ in range(r)]
                               for _ in range(r)])
                  for w in sorted(S.bases[l].words_on(windows[l]))}
        top = MatrixCylinderFunction(S.bases[l], windows[l], r, values)
        candidate = _repair_gluing(S, (*lower.components, top))
        if not in_stage_algebra(S, candidate):
            pairs_ok = False

    lift_ok = True
    for b in pool:
        a = lift(S, b)
        if not (in_ob_subalgebra(a, S.Y)
                and stage_from_gamma(a, S).equal_exact(b)):
            lift_ok = False

    inject_ok = True
    for _ in range(min(samples, 25)):
        a = sample_subalgebra_element(S.system, S.Y, rng, max(S.heights) + 1)
        if a.is_zero():
            continue
        if not injectivity_check(S, a):
            inject_ok = False

    return PullbackReport(boundary_compatible=boundary_ok,
                          pairs_glue_back=pairs_ok,
                          lift_round_trip=lift_ok,
                          injective_on_samples=inject_ok,
                          samples=len(pool))


# -- approximating systems ---------------------------------------------------------------


@dataclass(frozen=True)
class ApproximatingSystem:
    """Projections of the tower bases onto ``[n1, n2 + r_l]``.

    ``spaces[l]`` is the word set of the ``l``-th projected base over
    ``proj_windows[l]``; ``path_images[(l, mu)]`` the projection of the path
    set; ``image_spaces[(l, mu, s)]`` the image of the index-shift map, a
    subset of ``spaces[mu[s]]``.  ``checks`` records the exact verification
    of the projection/path/diagram conditions.
    """

    S: RokhlinSystem
    window: Window
    proj_windows: tuple
    spaces: tuple
    path_images: dict
    image_spaces: dict
    checks: dict

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def shift_image(self, l: int, mu, s: int, word: str) -> str:
        """The index-shift map on projected words: substring at offset the
        partial sum of the first ``s - 1`` heights along the path."""
        sums = _partial_sums(self.S, mu)
        offset = sums[s - 1]
        width = self.window.length + self.S.heights[mu[s - 1]]
        return word[offset : offset + width]

    def to_json(self) -> dict:
        return {
            "window": self.window.to_json(),
            "spaces": [{"window": w.to_json(), "count": len(z)}
                       for w, z in zip(self.proj_windows, self.spaces)],
            "path_images": [{"l": l, "mu": list(mu), "count": len(words)}
                            for (l, mu), words in sorted(self.path_images.items())],
            "checks": dict(self.checks),
        }


def _product_letter_sets(Y: ClopenSet, window: Window):
    words = Y.words_on(window)
    if not words:
        raise NotProductWindowSet("the base set is empty on the given window")
    letters = [frozenset(w[k] for w in words) for k in range(window.length)]
    return letters


def build_approximating_system(S: RokhlinSystem,
                               window: Window) -> ApproximatingSystem:
    """Project the towers of a product-window base onto finite windows.

    Requires the base set to be exactly the product of its per-coordinate
    letter sets over ``window``; every projection, preimage, containment, and
    diagram condition is then checked word by word and recorded.
    """
    system = S.system
    Y = S.Y
    if not window.contains(Y.window):
        raise NotProductWindowSet(
            "the base set constrains coordinates outside the declared window")
    letters = _product_letter_sets(Y, window)
    if Y != system.from_letter_sets(window, letters):
        raise NotProductWindowSet(
            "the base set is not a product of per-coordinate constraints")

    proj_windows = tuple(Window(window.lo, window.hi + r) for r in S.heights)
    spaces = tuple(S.bases[l].words_on(proj_windows[l])
                   for l in range(S.m + 1))
    checks = {}
    checks["projection-preimage-is-base"] = all(
        ClopenSet(system, proj_windows[l], spaces[l]) == S.bases[l]
        for l in range(S.m + 1))

    path_images = {}
    image_spaces = {}
    paths_ok = True
    containment_ok = True
    diagram_ok = True
    for l in range(1, S.m + 1):
        for path in admissible_sequences(S, l):
            mu = path.mu
            image = path.path_set.words_on(proj_windows[l]) \
                if not path.path_set.is_empty() else frozenset()
            path_images[(l, mu)] = image
            preimage = ClopenSet(system, proj_windows[l], image) & S.bases[l] \
                if image else system.empty_set()
            if not (preimage == path.path_set):
                paths_ok = False
            sums = _partial_sums(S, mu)
            for s in range(1, len(mu) + 1):
                width = window.length + S.heights[mu[s - 1]]
                shifted = frozenset(w[sums[s - 1] : sums[s - 1] + width]
                                    for w in image)
                image_spaces[(l, mu, s)] = shifted
                if not shifted <= spaces[mu[s - 1]]:
                    containment_ok = False
                big = proj_windows[l]
                for w in path.path_set.words_on(big) if image else ():
                    x = PointWindow(system, big, w)
                    lhs = x.apply_shift(sums[s - 1]).word_on(proj_windows[mu[s - 1]])
                    rhs = w[sums[s - 1] : sums[s - 1] + width]
                    if lhs != rhs:
                        diagram_ok = False
    checks["path-preimage-matches"] = paths_ok
    checks["images-inside-projected-bases"] = containment_ok
    checks["diagram-commutes"] = diagram_ok
    return ApproximatingSystem(S=S, window=window, proj_windows=proj_windows,
                               spaces=spaces, path_images=path_images,
                               image_spaces=image_spaces, checks=checks)


@dataclass(frozen=True)
class PhiRangeResult:
    ok: bool
    reason: str
    preimage: tuple | None

    def __bool__(self):
        return self.ok


def phi_range_check(S: RokhlinSystem, A: ApproximatingSystem,
                    a: FormalElement, atol: float = STAGE_TOL) -> PhiRangeResult:
    """Whether the symbolic evaluation of ``a`` factors through the projections.

    Each component must be constant on fibers of the restriction to
    ``[n1, n2 + r_l]``; when it is, the factored tables are returned and
    re-checked against the projected gluing conditions.
    """
    comps = gamma_symbolic(a, S)
    tables = []
    for l, comp in enumerate(comps):
        I = A.proj_windows[l]
        V = comp.window.hull(I)
        big = comp.values_on(V)
        off = I.lo - V.lo
        table: dict = {}
        for w, M in big.items():
            key = w[off : off + I.length]
            if key in table:
                if not np.allclose(table[key], M, rtol=0.0, atol=atol):
                    return PhiRangeResult(
                        ok=False,
                        reason=f"component {l} depends on coordinates outside "
                               f"[{I.lo}, {I.hi}]",
                        preimage=None)
            else:
                table[key] = M
        tables.append(table)

    for l in range(1, S.m + 1):
        for path in admissible_sequences(S, l):
            mu = path.mu
            image = A.path_images.get((l, mu), frozenset())
            for z in image:
                blocks = []
                for s in range(1, len(mu) + 1):
                    blocks.append(tables[mu[s - 1]][A.shift_image(l, mu, s, z)])
                r = S.heights[l]
                M = np.zeros((r, r), dtype=complex)
                offset = 0
                for block in blocks:
                    size = block.shape[0]
                    M[offset : offset + size, offset : offset + size] = block
                    offset += size
                if not np.allclose(tables[l][z], M, rtol=0.0, atol=atol):
                    return PhiRangeResult(
                        ok=False,
                        reason=f"projected gluing fails at level {l}, "
                               f"mu={list(mu)}, word {z!r}",
                        preimage=None)
    return PhiRangeResult(ok=True, reason="", preimage=tuple(tables))
