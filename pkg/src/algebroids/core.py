"""Lie algebroid presentations over a single chart and their graded calculus.

A presentation is a frame e_1..e_r, an anchor matrix (row i = the vector
field rho(e_i) in coordinates) and structure functions C^k_ij for i < j.
Forms and multivectors are stored on strictly increasing index tuples, so
antisymmetry is structural.  The differential, interior products, the
Schouten–Gerstenhaber bracket and Lie derivatives of top forms are all
computed exactly in the scalar-function ring.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Optional, Sequence, Union

from .report import CheckReport
from .symexpr import Chart, ScalarFn, point_chart

Rational = Union[int, Fraction]


class AlgebroidError(Exception):
    pass


class DegreeMismatch(AlgebroidError):
    pass


class AlgebroidPresentation:
    """A Lie algebroid over one chart, given by anchor and structure functions."""

    def __init__(
        self,
        name: str,
        chart: Chart,
        frame: Sequence[str],
        anchor: Sequence[Sequence[ScalarFn]],
        structure: Mapping[tuple[int, int], Mapping[int, ScalarFn]] | None = None,
        coframe: Optional[Sequence[str]] = None,
    ):
        self.name = name
        self.chart = chart
        self.frame = tuple(frame)
        if len(set(self.frame)) != len(self.frame):
            raise AlgebroidError(f"duplicate frame names in {name!r}")
        if len(anchor) != len(self.frame):
            raise AlgebroidError("anchor must have one row per frame section")
        rows = []
        for row in anchor:
            if len(row) != chart.dim:
                raise AlgebroidError("anchor row length must equal chart dimension")
            rows.append(tuple(row))
        self.anchor = tuple(rows)
        struct: dict[tuple[int, int], dict[int, ScalarFn]] = {}
        for (i, j), comps in (structure or {}).items():
            if not (0 <= i < j < self.rank):
                raise AlgebroidError(f"structure key ({i},{j}) must satisfy i < j < rank")
            entries = {k: f for k, f in comps.items() if not f.is_zero()}
            if entries:
                struct[(i, j)] = entries
        self.structure = struct
        self.coframe = tuple(coframe) if coframe else tuple(f + "*" for f in self.frame)

    @property
    def rank(self) -> int:
        return len(self.frame)

    def __eq__(self, other) -> bool:
        if not isinstance(other, AlgebroidPresentation):
            return NotImplemented
        return (
            self.chart == other.chart
            and self.frame == other.frame
            and self.anchor == other.anchor
            and self.structure == other.structure
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"AlgebroidPresentation({self.name!r}, rank {self.rank} over {self.chart.name})"

    # -- structure access ------------------------------------------------

    def c(self, i: int, j: int, k: int) -> ScalarFn:
        """Structure function C^k_ij with antisymmetry in (i, j)."""
        if i == j:
            return self.chart.zero()
        if i > j:
            return -self.c(j, i, k)
        return self.structure.get((i, j), {}).get(k, self.chart.zero())

    def bracket_frame(self, i: int, j: int) -> dict[int, ScalarFn]:
        """[e_i, e_j] as a sparse coefficient map."""
        if i == j:
            return {}
        if i < j:
            return dict(self.structure.get((i, j), {}))
        return {k: -f for k, f in self.structure.get((j, i), {}).items()}

    def rho(self, i: int) -> tuple[ScalarFn, ...]:
        return self.anchor[i]

    def rho_apply(self, i: int, f: ScalarFn) -> ScalarFn:
        """The vector field rho(e_i) applied to a function."""
        out = self.chart.zero()
        for comp, coord in zip(self.anchor[i], self.chart.coords):
            if not comp.is_zero():
                out = out + comp * f.partial(coord)
        return out

    def rho_section(self, coeffs: Sequence[ScalarFn]) -> tuple[ScalarFn, ...]:
        """Anchor of a section given by frame coefficients."""
        comps = [self.chart.zero() for _ in range(self.chart.dim)]
        for i, g in enumerate(coeffs):
            if g.is_zero():
                continue
            for k, a in enumerate(self.anchor[i]):
                comps[k] = comps[k] + g * a
        return tuple(comps)

    def section_bracket(
        self, x: Sequence[ScalarFn], y: Sequence[ScalarFn]
    ) -> list[ScalarFn]:
        """Bracket of two sections written in the frame (Leibniz expansion)."""
        out = [self.chart.zero() for _ in range(self.rank)]
        rx = self.rho_section(x)
        ry = self.rho_section(y)
        for i, f in enumerate(x):
            if f.is_zero():
                continue
            for j, g in enumerate(y):
                if g.is_zero():
                    continue
                for k, cf in self.bracket_frame(i, j).items():
                    out[k] = out[k] + f * g * cf
        for j, g in enumerate(y):
            out[j] = out[j] + _vf_apply(rx, g, self.chart)
        for i, f in enumerate(x):
            out[i] = out[i] - _vf_apply(ry, f, self.chart)
        return out


def _vf_apply(vf: Sequence[ScalarFn], f: ScalarFn, chart: Chart) -> ScalarFn:
    out = chart.zero()
    for comp, coord in zip(vf, chart.coords):
        if not comp.is_zero():
            out = out + comp * f.partial(coord)
    return out


def vector_field_bracket(
    chart: Chart, u: Sequence[ScalarFn], v: Sequence[ScalarFn]
) -> list[ScalarFn]:
    """[u, v] of coordinate vector fields on a chart."""
    return [
        _vf_apply(u, v[k], chart) - _vf_apply(v, u[k], chart) for k in range(chart.dim)
    ]


# ---------------------------------------------------------------------------
# alternating coefficient tables
# ---------------------------------------------------------------------------


def _sort_indices(idxs: Sequence[int]) -> Optional[tuple[int, tuple[int, ...]]]:
    """Sign and sorted tuple, or None when an index repeats."""
    if len(set(idxs)) != len(idxs):
        return None
    order = sorted(range(len(idxs)), key=lambda t: idxs[t])
    sign = 1
    seen = list(idxs)
    # count inversions
    inv = 0
    for a in range(len(seen)):
        for b in range(a + 1, len(seen)):
            if seen[a] > seen[b]:
                inv += 1
    sign = -1 if inv % 2 else 1
    del order
    return sign, tuple(sorted(idxs))


class _AltTable:
    """Shared implementation of forms and multivectors on a frame."""

    kind = "table"

    def __init__(
        self,
        algebroid: AlgebroidPresentation,
        degree: int,
        comps: Mapping[tuple[int, ...], ScalarFn] | None = None,
    ):
        self.algebroid = algebroid
        self.degree = degree
        table: dict[tuple[int, ...], ScalarFn] = {}
        for key, f in (comps or {}).items():
            key = tuple(key)
            if len(key) != degree or any(
                not (0 <= k < algebroid.rank) for k in key
            ):
                raise AlgebroidError(f"bad index tuple {key} for degree {degree}")
            if list(key) != sorted(set(key)):
                raise AlgebroidError(f"index tuple {key} must be strictly increasing")
            if not f.is_zero():
                table[key] = f
        self.comps = dict(sorted(table.items()))

    def _like(self, comps) -> "_AltTable":
        return type(self)(self.algebroid, self.degree, comps)

    def is_zero(self) -> bool:
        return not self.comps

    def component(self, idxs: Sequence[int]) -> ScalarFn:
        """Signed component for an arbitrary index tuple."""
        res = _sort_indices(idxs)
        if res is None:
            return self.algebroid.chart.zero()
        sign, key = res
        f = self.comps.get(key)
        if f is None:
            return self.algebroid.chart.zero()
        return f if sign > 0 else -f

    def _check_compat(self, other: "_AltTable") -> None:
        if type(self) is not type(other) or self.algebroid != other.algebroid:
            raise AlgebroidError("operands live on different algebroids")

    def __add__(self, other):
        self._check_compat(other)
        if self.degree != other.degree:
            # formal degrees of zero elements are irrelevant
            if self.is_zero():
                return other
            if other.is_zero():
                return self
            raise DegreeMismatch("cannot add different degrees")
        out = dict(self.comps)
        for key, f in other.comps.items():
            out[key] = out.get(key, self.algebroid.chart.zero()) + f
        return self._like(out)

    def __neg__(self):
        return self._like({k: -f for k, f in self.comps.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, f: Union[ScalarFn, Rational]) -> "_AltTable":
        if not isinstance(f, ScalarFn):
            f = self.algebroid.chart.const(f)
        return self._like({k: f * g for k, g in self.comps.items()})

    def wedge(self, other: "_AltTable") -> "_AltTable":
        self._check_compat(other)
        acc: dict[tuple[int, ...], ScalarFn] = {}
        zero = self.algebroid.chart.zero()
        for k1, f1 in self.comps.items():
            for k2, f2 in other.comps.items():
                res = _sort_indices(k1 + k2)
                if res is None:
                    continue
                sign, key = res
                term = f1 * f2
                if sign < 0:
                    term = -term
                acc[key] = acc.get(key, zero) + term
        return type(self)(self.algebroid, self.degree + other.degree, acc)

    def __eq__(self, other) -> bool:
        if not isinstance(other, _AltTable):
            return NotImplemented
        return (
            type(self) is type(other)
            and self.algebroid == other.algebroid
            and self.degree == other.degree
            and self.comps == other.comps
        )

    __hash__ = None

    def _names(self) -> Sequence[str]:
        raise NotImplementedError

    def __str__(self) -> str:
        if not self.comps:
            return "0"
        names = self._names()
        parts = []
        for key, f in self.comps.items():
            basis = "^".join(names[k] for k in key) if key else "1"
            coeff = str(f)
            if coeff == "1" and key:
                parts.append(basis)
            elif any(s in coeff for s in (" + ", " - ")):
                parts.append(f"({coeff})*{basis}" if key else f"({coeff})")
            else:
                parts.append(f"{coeff}*{basis}" if key else coeff)
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.algebroid.name}, deg {self.degree}: {self})"


class FormField(_AltTable):
    """A differential form on the algebroid, in the coframe."""

    kind = "form"

    def _names(self) -> Sequence[str]:
        return self.algebroid.coframe


class Multivector(_AltTable):
    """A multivector field on the algebroid, in the frame."""

    kind = "multivector"

    def _names(self) -> Sequence[str]:
        return self.algebroid.frame


def zero_form(a: AlgebroidPresentation, degree: int) -> FormField:
    return FormField(a, degree, {})


def function_form(a: AlgebroidPresentation, f: ScalarFn) -> FormField:
    return FormField(a, 0, {(): f})


def one_form(a: AlgebroidPresentation, comps: Sequence[ScalarFn]) -> FormField:
    return FormField(a, 1, {(i,): f for i, f in enumerate(comps)})


def coframe_form(a: AlgebroidPresentation, k: int) -> FormField:
    return FormField(a, 1, {(k,): a.chart.one()})


def frame_vector(a: AlgebroidPresentation, i: int) -> Multivector:
    return Multivector(a, 1, {(i,): a.chart.one()})


def section_vector(a: AlgebroidPresentation, coeffs: Sequence[ScalarFn]) -> Multivector:
    return Multivector(a, 1, {(i,): f for i, f in enumerate(coeffs)})


def top_multivector(a: AlgebroidPresentation, coeff: ScalarFn) -> Multivector:
    return Multivector(a, a.rank, {tuple(range(a.rank)): coeff})


def top_form(a: AlgebroidPresentation, coeff: ScalarFn) -> FormField:
    return FormField(a, a.rank, {tuple(range(a.rank)): coeff})


# ---------------------------------------------------------------------------
# calculus
# ---------------------------------------------------------------------------


def d_A(alpha: FormField) -> FormField:
    """The Lie algebroid differential, expanded on frame tuples."""
    a = alpha.algebroid
    k = alpha.degree
    zero = a.chart.zero()
    out: dict[tuple[int, ...], ScalarFn] = {}
    from itertools import combinations

    for key in combinations(range(a.rank), k + 1):
        total = zero
        for t in range(k + 1):
            rest = key[:t] + key[t + 1 :]
            val = alpha.component(rest)
            if not val.is_zero():
                term = a.rho_apply(key[t], val)
                total = total + (term if t % 2 == 0 else -term)
        for s in range(k + 1):
            for t in range(s + 1, k + 1):
                rest = tuple(x for u, x in enumerate(key) if u not in (s, t))
                for m, cf in a.bracket_frame(key[s], key[t]).items():
                    val = alpha.component((m,) + rest)
                    if val.is_zero():
                        continue
                    term = cf * val
                    total = total + (term if (s + t) % 2 == 0 else -term)
        if not total.is_zero():
            out[key] = total
    return FormField(a, k + 1, out)


def _contract_once(idx: int, table: dict, zero: ScalarFn) -> dict:
    out: dict[tuple[int, ...], ScalarFn] = {}
    for key, f in table.items():
        if idx in key:
            t = key.index(idx)
            newkey = key[:t] + key[t + 1 :]
            term = f if t % 2 == 0 else -f
            acc = out.get(newkey)
            out[newkey] = term if acc is None else acc + term
    return out


def interior(p: Multivector, alpha: FormField) -> FormField:
    """Contraction of a multivector into a form.

    For decomposables the first factor is inserted first, so that
    contracting e_1^e_2 into e^1^e^2 gives +1.
    """
    if p.algebroid != alpha.algebroid:
        raise AlgebroidError("operands live on different algebroids")
    if p.degree > alpha.degree:
        raise DegreeMismatch(
            f"cannot contract degree {p.degree} into degree {alpha.degree}"
        )
    a = alpha.algebroid
    zero = a.chart.zero()
    result: dict[tuple[int, ...], ScalarFn] = {}
    for pkey, g in p.comps.items():
        table = dict(alpha.comps)
        for idx in pkey:
            table = _contract_once(idx, table, zero)
        for key, f in table.items():
            acc = result.get(key, zero)
            result[key] = acc + g * f
    return FormField(a, alpha.degree - p.degree, result)


def interior_form(alpha: FormField, p: Multivector) -> Multivector:
    """Contraction of a form into a multivector (same ordering convention)."""
    if p.algebroid != alpha.algebroid:
        raise AlgebroidError("operands live on different algebroids")
    if alpha.degree > p.degree:
        raise DegreeMismatch(
            f"cannot contract degree {alpha.degree} into degree {p.degree}"
        )
    a = alpha.algebroid
    zero = a.chart.zero()
    result: dict[tuple[int, ...], ScalarFn] = {}
    for akey, g in alpha.comps.items():
        table = dict(p.comps)
        for idx in akey:
            table = _contract_once(idx, table, zero)
        for key, f in table.items():
            acc = result.get(key, zero)
            result[key] = acc + g * f
    return Multivector(a, p.degree - alpha.degree, result)


def pairing(alpha: FormField, p: Multivector) -> ScalarFn:
    """Full pairing of a degree-k form with a degree-k multivector."""
    if alpha.degree != p.degree:
        raise DegreeMismatch("pairing requires equal degrees")
    out = alpha.algebroid.chart.zero()
    for key, f in p.comps.items():
        g = alpha.comps.get(key)
        if g is not None:
            out = out + f * g
    return out


def schouten(p: Multivector, q: Multivector) -> Multivector:
    """Schouten–Gerstenhaber bracket of multivectors.

    Degree-1 elements act as Lie derivatives; the convention satisfies
    [P,Q] = -(-1)^{(p-1)(q-1)} [Q,P] and the graded Jacobi identity.
    """
    if p.algebroid != q.algebroid:
        raise AlgebroidError("operands live on different algebroids")
    a = p.algebroid
    zero = a.chart.zero()
    deg = p.degree + q.degree - 1
    if deg < 0:
        return Multivector(a, 0, {})
    acc: dict[tuple[int, ...], ScalarFn] = {}

    def add(idxs: tuple[int, ...], f: ScalarFn) -> None:
        if f.is_zero():
            return
        res = _sort_indices(idxs)
        if res is None:
            return
        sgn, key = res
        term = f if sgn > 0 else -f
        cur = acc.get(key)
        acc[key] = term if cur is None else cur + term

    for ikey, f in p.comps.items():
        pd = len(ikey)
        for jkey, g in q.comps.items():
            qd = len(jkey)
            sign3 = -1 if ((pd - 1) * (qd - 1)) % 2 else 1
            # [e_I, g] ^ e_J   (anchor of P-factors applied to g)
            for s in range(pd):
                df = a.rho_apply(ikey[s], g)
                if df.is_zero():
                    continue
                term = f * df
                if (pd - 1 - s) % 2:
                    term = -term
                add(ikey[:s] + ikey[s + 1 :] + jkey, term)
            # f g [e_I, e_J]  (frame brackets)
            for s in range(pd):
                for t in range(qd):
                    for m, cf in a.bracket_frame(ikey[s], jkey[t]).items():
                        term = f * g * cf
                        if (s + t) % 2:  # (-1)^{(s+1)+(t+1)} = (-1)^{s+t}
                            term = -term
                        add(
                            (m,)
                            + ikey[:s]
                            + ikey[s + 1 :]
                            + jkey[:t]
                            + jkey[t + 1 :],
                            term,
                        )
            # -(-1)^{(p-1)(q-1)} g [e_J, f] ^ e_I
            for t in range(qd):
                df = a.rho_apply(jkey[t], f)
                if df.is_zero():
                    continue
                term = g * df
                if (qd - 1 - t) % 2:
                    term = -term
                term = term if sign3 < 0 else -term  # overall -sign3
                add(jkey[:t] + jkey[t + 1 :] + ikey, term)
    return Multivector(a, deg, acc)


def lie_top(
    v: Sequence[ScalarFn], mu: FormField
) -> FormField:
    """Lie derivative of a top-degree form on a tangent presentation.

    For mu = g dx_1^..^dx_n and v = sum v_i d/dx_i this is
    (sum_i d(g v_i)/dx_i) dx_1^..^dx_n.
    """
    a = mu.algebroid
    chart = a.chart
    if mu.degree != chart.dim or a.rank != chart.dim:
        raise DegreeMismatch("lie_top expects a top form on a tangent presentation")
    key = tuple(range(chart.dim))
    g = mu.comps.get(key, chart.zero())
    total = chart.zero()
    for i, coord in enumerate(chart.coords):
        total = total + (g * v[i]).partial(coord)
    return FormField(a, mu.degree, {key: total})


def divergence(chart: Chart, v: Sequence[ScalarFn]) -> ScalarFn:
    out = chart.zero()
    for comp, coord in zip(v, chart.coords):
        out = out + comp.partial(coord)
    return out


# ---------------------------------------------------------------------------
# stock presentations
# ---------------------------------------------------------------------------


def tangent_algebroid(chart: Chart, name: Optional[str] = None) -> AlgebroidPresentation:
    """The tangent algebroid of a chart: identity anchor, zero brackets."""
    frame = tuple("d/d" + c for c in chart.coords)
    coframe = tuple("d" + c for c in chart.coords)
    anchor = [
        [chart.one() if i == k else chart.zero() for k in range(chart.dim)]
        for i in range(chart.dim)
    ]
    return AlgebroidPresentation(
        name or ("T" + chart.name), chart, frame, anchor, {}, coframe
    )


def zero_algebroid(chart: Chart, name: Optional[str] = None) -> AlgebroidPresentation:
    return AlgebroidPresentation(name or ("0_" + chart.name), chart, (), (), {})


def lie_algebra_presentation(
    name: str,
    frame: Sequence[str],
    brackets: Mapping[tuple[int, int], Mapping[int, Rational]],
    chart: Optional[Chart] = None,
) -> AlgebroidPresentation:
    """A Lie algebra as an algebroid over a point (or a totally intransitive
    bundle with constant structure over any chart)."""
    chart = chart or point_chart()
    anchor = [[chart.zero() for _ in range(chart.dim)] for _ in frame]
    structure = {
        key: {k: chart.const(v) for k, v in comps.items()}
        for key, comps in brackets.items()
    }
    return AlgebroidPresentation(name, chart, frame, anchor, structure)


def derivation_algebroid(
    chart: Chart, bundle_frame: Sequence[str], name: Optional[str] = None
) -> AlgebroidPresentation:
    """Derivations of a framed bundle: coordinate fields plus gl(m) matrices.

    Frame: d/dx_1..d/dx_n, then E_<t><s> acting by E_ts eps_s = eps_t.
    """
    m = len(bundle_frame)
    n = chart.dim
    frame = ["d/d" + c for c in chart.coords]
    for t in range(m):
        for s in range(m):
            frame.append(f"E[{bundle_frame[t]},{bundle_frame[s]}]")
    anchor = []
    for i in range(n):
        anchor.append([chart.one() if k == i else chart.zero() for k in range(n)])
    for _ in range(m * m):
        anchor.append([chart.zero() for _ in range(n)])
    idx = lambda t, s: n + t * m + s
    structure: dict[tuple[int, int], dict[int, ScalarFn]] = {}
    for t in range(m):
        for s in range(m):
            for u in range(m):
                for v in range(m):
                    i, j = idx(t, s), idx(u, v)
                    if i >= j:
                        continue
                    comps: dict[int, ScalarFn] = {}
                    # [E_ts, E_uv] = delta_su E_tv - delta_vt E_us
                    if s == u:
                        k = idx(t, v)
                        comps[k] = comps.get(k, chart.zero()) + chart.one()
                    if v == t:
                        k = idx(u, s)
                        comps[k] = comps.get(k, chart.zero()) - chart.one()
                    comps = {k: f for k, f in comps.items() if not f.is_zero()}
                    if comps:
                        structure[(i, j)] = comps
    return AlgebroidPresentation(
        name or f"D({chart.name})", chart, frame, anchor, structure
    )


def same_presentation(a: AlgebroidPresentation, b: AlgebroidPresentation) -> bool:
    """Structural equality ignoring names (frame order must match)."""
    return (
        a.chart == b.chart
        and a.rank == b.rank
        and a.anchor == b.anchor
        and a.structure == b.structure
    )


# ---------------------------------------------------------------------------
# axiom verification
# ---------------------------------------------------------------------------


def jacobiator(a: AlgebroidPresentation, i: int, j: int, k: int) -> list[ScalarFn]:
    """Brute-force Jacobi defect of frame sections, in frame coefficients."""
    def bracket_vec(x: Sequence[ScalarFn], y: Sequence[ScalarFn]) -> list[ScalarFn]:
        return a.section_bracket(x, y)

    e = lambda t: [
        a.chart.one() if u == t else a.chart.zero() for u in range(a.rank)
    ]
    total = [a.chart.zero() for _ in range(a.rank)]
    for x, y, z in ((i, j, k), (j, k, i), (k, i, j)):
        inner = bracket_vec(e(x), e(y))
        outer = bracket_vec(inner, e(z))
        total = [acc + val for acc, val in zip(total, outer)]
    return total


def check_axioms(a: AlgebroidPresentation) -> CheckReport:
    """d^2 = 0 on coordinate functions and coframe, anchor homomorphism."""
    rep = CheckReport(f"axioms of {a.name}")
    for coord in a.chart.coords:
        f = function_form(a, a.chart.coord(coord))
        res = d_A(d_A(f))
        rep.add(f"d(d {coord}) = 0", res.is_zero(), "" if res.is_zero() else str(res))
    for k in range(a.rank):
        res = d_A(d_A(coframe_form(a, k)))
        rep.add(
            f"d(d {a.coframe[k]}) = 0", res.is_zero(), "" if res.is_zero() else str(res)
        )
    for i in range(a.rank):
        for j in range(i + 1, a.rank):
            lhs = a.rho_section(
                [
                    a.bracket_frame(i, j).get(k, a.chart.zero())
                    for k in range(a.rank)
                ]
            )
            rhs = vector_field_bracket(a.chart, a.anchor[i], a.anchor[j])
            for l, coord in enumerate(a.chart.coords):
                res = lhs[l] - rhs[l]
                rep.add(
                    f"anchor([{a.frame[i]},{a.frame[j]}]) . {coord}",
                    res.is_zero(),
                    "" if res.is_zero() else str(res),
                )
    return rep
