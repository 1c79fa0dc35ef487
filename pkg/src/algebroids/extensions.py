"""Extensions of algebroids over a fixed base and their line representations.

Given an exact sequence of base-preserving morphisms (kernel totally
intransitive and fiberwise unimodular), the bracket of the total algebroid
acts on the kernel; the trace of that action on the kernel's top power
descends to the quotient, and the characteristic cocycle of the descended
representation pulls back to the relative modular cocycle of the quotient
map.  This module builds those representations, verifies the identity at
cochain level under compatible trivializations (class level otherwise),
extends it to constant-rank morphisms through a quotient representation on
the cokernel top power, and applies the machinery to regular Poisson
bivectors on the cotangent algebroid.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .cohomology import AnsatzSpace, classify, cohomologous
from .core import (
    AlgebroidPresentation,
    FormField,
    Multivector,
    d_A,
    frame_vector,
    interior,
    interior_form,
    one_form,
    schouten,
    section_vector,
    tangent_algebroid,
    top_form,
    top_multivector,
)
from .morphisms import (
    Morphism,
    Trivialization,
    base_preserving_morphism,
    check_morphism,
    compose,
    pullback_form,
    relative_modular,
)
from .ratlinalg import FrameSolveFailure, float_rank, unit_pivot_solve
from .report import CheckReport
from .reps import (
    LineSection,
    Representation,
    canonical_sections,
    char_cocycle,
    check_flat,
    modular_cocycle,
)
from .symexpr import ScalarFn


class ExtensionError(Exception):
    pass


class ImageClosureFailure(ExtensionError):
    pass


class UnimodularityFailure(ExtensionError):
    pass


class LiftSolveFailure(ExtensionError):
    pass


class NotPoisson(ExtensionError):
    def __init__(self, residual: Multivector):
        super().__init__(f"bracket square of the bivector is nonzero: {residual}")
        self.residual = residual


@dataclass
class ExtensionPresentation:
    """kernel -> total -> quotient over one chart, with a kernel-invariant
    trivializing section of the kernel's top power."""

    kernel: AlgebroidPresentation
    total: AlgebroidPresentation
    quotient: AlgebroidPresentation
    incl: Morphism  # kernel -> total
    proj: Morphism  # total -> quotient
    lam: LineSection  # section of top(kernel), coefficient on the chart

    @property
    def chart(self):
        return self.total.chart


def check_extension(ext: ExtensionPresentation, seed: int = 0, samples: int = 50) -> CheckReport:
    rep = CheckReport("extension data")
    c, a, b = ext.kernel, ext.total, ext.quotient
    rep.add(
        "kernel totally intransitive",
        all(f.is_zero() for row in c.anchor for f in row),
    )
    rep.add("rank additivity", a.rank == b.rank + c.rank)
    rep.merge(check_morphism(ext.incl), prefix="incl: ")
    rep.merge(check_morphism(ext.proj), prefix="proj: ")
    comp = compose(ext.proj, ext.incl)
    rep.add(
        "projection kills the kernel",
        all(f.is_zero() for row in comp.fiber for f in row),
    )
    rng = random.Random(seed)
    chart = a.chart
    inj_ok, surj_ok = True, True
    for _ in range(samples):
        pt = [Fraction(rng.randint(-50, 50), rng.randint(1, 11)) for _ in chart.coords]
        irank = float_rank([[f.evaluate(pt) for f in row] for row in ext.incl.fiber]) if c.rank else 0
        prank = float_rank([[f.evaluate(pt) for f in row] for row in ext.proj.fiber]) if b.rank else 0
        inj_ok = inj_ok and irank == c.rank
        surj_ok = surj_ok and prank == b.rank
    rep.add("kernel map pointwise injective", inj_ok, f"sampled at {samples} points")
    rep.add("projection pointwise surjective", surj_ok, f"sampled at {samples} points")
    if c.rank:
        topk = top_multivector(c, ext.lam.coefficient)
        for s in range(c.rank):
            res = schouten(frame_vector(c, s), topk)
            res_c = res.comps.get(tuple(range(c.rank)), chart.zero())
            rep.add(
                f"kernel-invariant section: [{c.frame[s]}, lam] = 0",
                res_c.is_zero(),
                "" if res_c.is_zero() else str(res_c),
            )
    return rep


def adjoint_rep(ext: ExtensionPresentation) -> Representation:
    """Action of the total algebroid on the kernel through the bracket.

    Coefficients solved from [e_j, incl(k_s)] expanded in the image of the
    inclusion; exactness of the data makes the image closed under these
    brackets, and failure to re-expand raises ImageClosureFailure.
    """
    c, a = ext.kernel, ext.total
    chart = a.chart
    if c.rank == 0:
        return Representation(a, (), [[] for _ in range(a.rank)], "adj")
    rows = [[ext.incl.fiber[u][s] for s in range(c.rank)] for u in range(a.rank)]
    rhs_cols = []
    for j in range(a.rank):
        e_j = [chart.one() if u == j else chart.zero() for u in range(a.rank)]
        for s in range(c.rank):
            ik = [ext.incl.fiber[u][s] for u in range(a.rank)]
            rhs_cols.append(a.section_bracket(e_j, ik))
    try:
        sols = unit_pivot_solve(rows, rhs_cols)
    except FrameSolveFailure as e:
        raise ImageClosureFailure(str(e)) from e
    mats = []
    idx = 0
    for j in range(a.rank):
        mat = [[chart.zero() for _ in range(c.rank)] for _ in range(c.rank)]
        for s in range(c.rank):
            col = sols[idx]
            idx += 1
            for t in range(c.rank):
                mat[t][s] = col[t]
        mats.append(mat)
    d = Representation(a, c.frame, mats, "adj")
    flat = check_flat(d)
    if not flat.passed:
        raise ImageClosureFailure("adjoint action is not flat; extension data inconsistent")
    return d


def _trace(mat: Sequence[Sequence[ScalarFn]], chart) -> ScalarFn:
    out = chart.zero()
    for s in range(len(mat)):
        out = out + mat[s][s]
    return out


def top_rep(ext: ExtensionPresentation, adj: Optional[Representation] = None) -> Representation:
    """Induced line representation on the kernel's top power.

    Raises UnimodularityFailure unless the action along kernel directions
    kills the invariant section.
    """
    a = ext.total
    chart = a.chart
    adj = adj or adjoint_rep(ext)
    traces = [_trace(adj.mats[j], chart) for j in range(a.rank)]
    lam = ext.lam.coefficient
    for s in range(ext.kernel.rank):
        res = chart.zero()
        for u in range(a.rank):
            iu = ext.incl.fiber[u][s]
            if not iu.is_zero():
                res = res + iu * (a.rho_apply(u, lam) + lam * traces[u])
        if not res.is_zero():
            raise UnimodularityFailure(
                f"action along kernel direction {ext.kernel.frame[s]} does not "
                f"kill the invariant section: {res}"
            )
    mats = [[[traces[j]]] for j in range(a.rank)]
    d = Representation(a, ("K",), mats, "D^K")
    flat = check_flat(d)
    if not flat.passed:
        raise ExtensionError("top-power representation is not flat")
    return d


def induced_rep(
    ext: ExtensionPresentation,
    lifts: Optional[Sequence[Sequence[ScalarFn]]] = None,
    topk: Optional[Representation] = None,
) -> Representation:
    """Descend the top-power representation to the quotient through lifts.

    ``lifts`` is a rank_total x rank_quotient matrix with proj . lifts = id;
    solved automatically when a unit-pivot solve exists.  The result does
    not depend on the lift (certified by the kernel vanishing in top_rep).
    """
    a, b = ext.total, ext.quotient
    chart = a.chart
    topk = topk or top_rep(ext)
    if lifts is None:
        rows = [list(r) for r in ext.proj.fiber]
        rhs = [
            [chart.one() if u == t else chart.zero() for u in range(b.rank)]
            for t in range(b.rank)
        ]
        try:
            sols = unit_pivot_solve(rows, rhs, full_column_rank=False)
        except FrameSolveFailure as e:
            raise LiftSolveFailure(str(e)) from e
        lifts = [[sols[t][u] for t in range(b.rank)] for u in range(a.rank)]
    else:
        for t in range(b.rank):
            for t2 in range(b.rank):
                val = chart.zero()
                for u in range(a.rank):
                    val = val + ext.proj.fiber[t][u] * lifts[u][t2]
                want = chart.one() if t == t2 else chart.zero()
                if val != want:
                    raise LiftSolveFailure(
                        f"lift check failed at ({t},{t2}): proj(lift) = {val}"
                    )
    lam = ext.lam.coefficient
    lam_inv = lam.unit_inverse()
    coeffs = []
    for t in range(b.rank):
        eta = chart.zero()
        for u in range(a.rank):
            lu = lifts[u][t]
            if not lu.is_zero():
                eta = eta + lu * (
                    topk.mats[u][0][0] + a.rho_apply(u, lam) * lam_inv
                )
        # coefficient on the top-kernel frame rather than on lam itself
        coeffs.append(eta - b.rho_apply(t, lam) * lam_inv)
    d = Representation(b, ("K",), [[[c]] for c in coeffs], "D^{B,K}")
    flat = check_flat(d)
    if not flat.passed:
        raise ExtensionError("descended representation is not flat")
    return d


def _lie_derivative_top(b: AlgebroidPresentation, y: Multivector, mu: FormField) -> FormField:
    """Lie derivative of a top form on the presentation along a section."""
    return d_A(interior(y, mu))


def _image_multivector(ext: ExtensionPresentation) -> Multivector:
    """Wedge of the inclusion's columns: the kernel top power inside the total."""
    a = ext.total
    out = Multivector(a, 0, {(): a.chart.one()})
    for s in range(ext.kernel.rank):
        col = section_vector(a, [ext.incl.fiber[u][s] for u in range(a.rank)])
        out = out.wedge(col)
    return out


def rational_multiple(x, y) -> Optional[Fraction]:
    """q with x = q*y exactly, if such a rational exists (None otherwise)."""
    if y.is_zero():
        return Fraction(0) if x.is_zero() else None
    key, g = next(iter(y.comps.items()))
    tk, tq = next(iter(g.terms.items()))
    f = x.comps.get(key)
    if f is None:
        q = Fraction(0)
    else:
        q = f.terms.get(tk, Fraction(0)) / tq
    diff = x - y.scale(q)
    return q if diff.is_zero() else None


def verify_extension_identity(
    ext: ExtensionPresentation,
    omega_total: Optional[Multivector] = None,
    mu_quotient: Optional[FormField] = None,
    ansatz: Optional[AnsatzSpace] = None,
    seed: int = 0,
) -> CheckReport:
    """Cochain identity between the relative modular cocycle of the quotient
    map and the pull-back of the descended characteristic cocycle.

    omega_total trivializes the total top power, mu_quotient the top of the
    quotient coframe.  When the contraction of omega_total by the pulled-back
    mu_quotient is a rational multiple of the included invariant section, the
    identity holds exactly; otherwise it is checked up to an exact form in
    the ansatz.
    """
    a, b, c = ext.total, ext.quotient, ext.kernel
    chart = a.chart
    rep = CheckReport("extension modular identity")
    omega = omega_total if omega_total is not None else top_multivector(a, chart.one())
    mu = mu_quotient if mu_quotient is not None else top_form(b, chart.one())
    s_omega = omega.comps.get(tuple(range(a.rank)), chart.zero())
    s_mu = mu.comps.get(tuple(range(b.rank)), chart.zero())
    s_omega_inv = s_omega.unit_inverse()
    s_mu_inv = s_mu.unit_inverse()
    theta_comps = []
    for j in range(a.rank):
        br = schouten(frame_vector(a, j), omega)
        t1 = br.comps.get(tuple(range(a.rank)), chart.zero()) * s_omega_inv
        y = section_vector(b, [ext.proj.fiber[t][j] for t in range(b.rank)])
        lie = _lie_derivative_top(b, y, mu)
        t2 = lie.comps.get(tuple(range(b.rank)), chart.zero()) * s_mu_inv
        theta_comps.append(t1 + t2)
    theta = one_form(a, theta_comps)
    res = d_A(theta)
    rep.add("theta closed", res.is_zero(), "" if res.is_zero() else str(res))
    adj = adjoint_rep(ext)
    topk = top_rep(ext, adj)
    dbk = induced_rep(ext, topk=topk)
    eta = char_cocycle(dbk, ext.lam)
    pulled = pullback_form(ext.proj, eta)
    # compatibility: contraction of omega by the pulled-back mu against the
    # included invariant section
    mu_up = pullback_form(ext.proj, mu)
    contracted = interior_form(mu_up, omega)
    target = _image_multivector(ext).scale(ext.lam.coefficient)
    q = rational_multiple(contracted, target)
    compatible = q is not None and q != 0
    rep.add(
        "sections compatible (rational multiple)",
        True,
        f"multiple {q}" if compatible else "not proportional; class-level check",
    )
    residual = theta - pulled
    if compatible:
        rep.add(
            "cochain identity theta = proj^*(eta)",
            residual.is_zero(),
            "" if residual.is_zero() else str(residual),
        )
    else:
        space = ansatz or AnsatzSpace(chart)
        verdict = cohomologous(theta, pulled, space, seed=seed)
        rep.add(
            "class identity theta ~ proj^*(eta)",
            verdict.verdict == "cohomologous",
            verdict.verdict,
        )
    rep.data["theta"] = theta
    rep.data["eta"] = eta
    return rep


def quotient_top_rep(
    b_in_ambient: Morphism,
    complement: Sequence[Sequence[ScalarFn]],
) -> Representation:
    """Representation of a subalgebroid on the top power of its cokernel.

    b_in_ambient includes the subalgebroid into the ambient presentation;
    ``complement`` columns complete its image to a frame.  The action is
    bracket-then-project onto the complement block.
    """
    b = b_in_ambient.source
    amb = b_in_ambient.target
    chart = amb.chart
    v = len(complement[0]) if complement else 0
    if b.rank + v != amb.rank:
        raise ExtensionError("image frame plus complement must span the ambient frame")
    rows = [
        [b_in_ambient.fiber[u][t] for t in range(b.rank)]
        + [complement[u][cc] for cc in range(v)]
        for u in range(amb.rank)
    ]
    rhs_cols = []
    for t in range(b.rank):
        bt = [b_in_ambient.fiber[u][t] for u in range(amb.rank)]
        for cc in range(v):
            wc = [complement[u][cc] for u in range(amb.rank)]
            rhs_cols.append(amb.section_bracket(bt, wc))
    sols = unit_pivot_solve(rows, rhs_cols) if rhs_cols else []
    mats = []
    idx = 0
    for t in range(b.rank):
        mat = [[chart.zero() for _ in range(v)] for _ in range(v)]
        for cc in range(v):
            col = sols[idx]
            idx += 1
            for dd in range(v):
                mat[dd][cc] = col[b.rank + dd]
        mats.append(mat)
    traces = [_trace(m, chart) for m in mats] if v else [chart.zero()] * b.rank
    d = Representation(b, ("Q",), [[[t]] for t in traces], "D^{B,Q}")
    flat = check_flat(d)
    if not flat.passed:
        raise ExtensionError("cokernel top representation is not flat")
    return d


def verify_constant_rank_identity(
    phi: Morphism,
    ext: ExtensionPresentation,
    b_in_ambient: Morphism,
    complement: Sequence[Sequence[ScalarFn]],
    ansatz: Optional[AnsatzSpace] = None,
    seed: int = 0,
) -> CheckReport:
    """Relative modular cocycle of a constant-rank base-preserving morphism
    against the two characteristic cocycles of its image algebroid.

    phi factors through the extension's quotient (phi = inclusion o proj);
    the identity compares the relative cocycle of phi with the pull-back of
    char(kernel top) - char(cokernel top), and the intermediate identity
    compares the restriction of the ambient modular cocycle with the image
    one plus the cokernel characteristic cocycle.
    """
    rep = CheckReport(f"constant-rank modular identity for {phi.name}")
    a = ext.total
    amb = b_in_ambient.target
    b = ext.quotient
    chart = a.chart
    recomposed = compose(b_in_ambient, ext.proj)
    ok = recomposed.fiber == phi.fiber and tuple(recomposed.basemap) == tuple(phi.basemap)
    rep.add("morphism factors through the image", ok)
    space = ansatz or AnsatzSpace(chart)
    dq = quotient_top_rep(b_in_ambient, complement)
    eta_q = char_cocycle(dq, LineSection(chart.one()))
    eta_k = char_cocycle(induced_rep(ext), ext.lam)
    mod_phi = relative_modular(
        phi, Trivialization(*canonical_sections(a)), Trivialization(*canonical_sections(amb))
    )
    rhs = pullback_form(ext.proj, eta_k - eta_q)
    residual = mod_phi - rhs
    if residual.is_zero():
        rep.add("main identity exact at cochain level", True)
    else:
        verdict = cohomologous(mod_phi, rhs, space, seed=seed)
        rep.add(
            "main identity up to an exact form",
            verdict.verdict == "cohomologous",
            verdict.verdict,
        )
    mod_amb = modular_cocycle(amb, *canonical_sections(amb))
    mod_b = modular_cocycle(b, *canonical_sections(b))
    inter = pullback_form(b_in_ambient, mod_amb) - mod_b - eta_q
    if inter.is_zero():
        rep.add("intermediate identity exact at cochain level", True)
    else:
        verdict = cohomologous(
            pullback_form(b_in_ambient, mod_amb) - mod_b, eta_q, space, seed=seed
        )
        rep.add(
            "intermediate identity up to an exact form",
            verdict.verdict == "cohomologous",
            verdict.verdict,
        )
    rep.data["eta_k"] = eta_k
    rep.data["eta_q"] = eta_q
    rep.data["mod_phi"] = mod_phi
    return rep


# ---------------------------------------------------------------------------
# regular Poisson structures on the cotangent algebroid
# ---------------------------------------------------------------------------


def cotangent_algebroid(
    pi: Multivector, name: Optional[str] = None
) -> AlgebroidPresentation:
    """The cotangent algebroid of a Poisson bivector on a tangent presentation.

    Frame d<coord>; anchor is the bivector pairing; brackets are the Koszul
    brackets of coordinate coframes, with structure functions the partials
    of the bivector components.  Raises NotPoisson when the bracket square
    of the bivector is nonzero.
    """
    tm = pi.algebroid
    chart = tm.chart
    if pi.degree != 2 or tm.rank != chart.dim:
        raise ExtensionError("expected a bivector on a tangent presentation")
    res = schouten(pi, pi)
    if not res.is_zero():
        raise NotPoisson(res)
    n = chart.dim

    def entry(i, j):
        if i == j:
            return chart.zero()
        if i < j:
            return pi.comps.get((i, j), chart.zero())
        return -pi.comps.get((j, i), chart.zero())

    frame = tuple("d" + c for c in chart.coords)
    anchor = [[entry(i, j) for j in range(n)] for i in range(n)]
    structure: dict[tuple[int, int], dict[int, ScalarFn]] = {}
    for i in range(n):
        for j in range(i + 1, n):
            comps = {}
            pij = entry(i, j)
            for k, coord in enumerate(chart.coords):
                d = pij.partial(coord)
                if not d.is_zero():
                    comps[k] = d
            if comps:
                structure[(i, j)] = comps
    return AlgebroidPresentation(
        name or f"T*({chart.name})", chart, frame, anchor, structure
    )


def subalgebroid_from_vector_fields(
    name: str, chart, columns: Sequence[Sequence[ScalarFn]]
) -> tuple[AlgebroidPresentation, Morphism]:
    """An involutive family of vector fields as a presentation plus its
    inclusion into the tangent algebroid; brackets re-expanded by unit
    pivots (FrameSolveFailure when the family is not visibly involutive)."""
    tm = tangent_algebroid(chart)
    n = chart.dim
    r = len(columns[0]) if columns else 0
    rows = [[columns[k][t] for t in range(r)] for k in range(n)]
    rhs = []
    for s in range(r):
        for t in range(s + 1, r):
            xs = [columns[k][s] for k in range(n)]
            yt = [columns[k][t] for k in range(n)]
            rhs.append(tm.section_bracket(xs, yt))
    sols = unit_pivot_solve(rows, rhs) if rhs else []
    structure = {}
    idx = 0
    for s in range(r):
        for t in range(s + 1, r):
            col = sols[idx]
            idx += 1
            comps = {k: f for k, f in enumerate(col) if not f.is_zero()}
            if comps:
                structure[(s, t)] = comps
    anchor = [[columns[k][t] for k in range(n)] for t in range(r)]
    pres = AlgebroidPresentation(name, chart, tuple(f"b{t+1}" for t in range(r)), anchor, structure)
    incl = base_preserving_morphism(f"{name}_in_T", pres, tm, [list(col) for col in columns])
    return pres, incl


def regular_poisson_kit(
    pi: Multivector,
    image_columns: Sequence[Sequence[ScalarFn]],
    kernel_columns: Sequence[Sequence[ScalarFn]],
    lam_coeff: Optional[ScalarFn] = None,
    seed: int = 0,
):
    """Assemble the extension data of a regular bivector: the cotangent
    algebroid, the image subalgebroid of the map induced by the bivector,
    the kernel with its inclusion, and the factored anchor morphism."""
    tm = pi.algebroid
    chart = tm.chart
    apres = cotangent_algebroid(pi)
    bpres, b_in_tm = subalgebroid_from_vector_fields("B", chart, image_columns)
    sharp = base_preserving_morphism(
        "sharp", apres, tm, [[apres.anchor[i][j] for i in range(apres.rank)] for j in range(chart.dim)]
    )
    # factor the induced map through the image
    rows = [list(r) for r in b_in_tm.fiber]
    rhs_cols = [
        [sharp.fiber[j][i] for j in range(chart.dim)] for i in range(apres.rank)
    ]
    sols = unit_pivot_solve(rows, rhs_cols)
    sharp_b = base_preserving_morphism(
        "sharp_B", apres, bpres, [[sols[i][t] for i in range(apres.rank)] for t in range(bpres.rank)]
    )
    # kernel presentation: totally intransitive, brackets re-expanded
    r_c = len(kernel_columns[0]) if kernel_columns else 0
    rows_k = [[kernel_columns[u][s] for s in range(r_c)] for u in range(apres.rank)]
    rhs_k = []
    for s in range(r_c):
        for t in range(s + 1, r_c):
            xs = [kernel_columns[u][s] for u in range(apres.rank)]
            yt = [kernel_columns[u][t] for u in range(apres.rank)]
            rhs_k.append(apres.section_bracket(xs, yt))
    sols_k = unit_pivot_solve(rows_k, rhs_k) if rhs_k else []
    structure_k = {}
    idx = 0
    for s in range(r_c):
        for t in range(s + 1, r_c):
            col = sols_k[idx]
            idx += 1
            comps = {w: f for w, f in enumerate(col) if not f.is_zero()}
            if comps:
                structure_k[(s, t)] = comps
    cpres = AlgebroidPresentation(
        "C",
        chart,
        tuple(f"k{s+1}" for s in range(r_c)),
        [[chart.zero()] * chart.dim for _ in range(r_c)],
        structure_k,
    )
    incl = base_preserving_morphism(
        "C_in_A", cpres, apres, [[kernel_columns[u][s] for s in range(r_c)] for u in range(apres.rank)]
    )
    lam = LineSection(lam_coeff if lam_coeff is not None else chart.one())
    ext = ExtensionPresentation(cpres, apres, bpres, incl, sharp_b, lam)
    return apres, bpres, b_in_tm, sharp, sharp_b, ext


def verify_regular_poisson(
    pi: Multivector,
    image_columns: Sequence[Sequence[ScalarFn]],
    kernel_columns: Sequence[Sequence[ScalarFn]],
    complement_columns: Sequence[Sequence[ScalarFn]],
    lam_coeff: Optional[ScalarFn] = None,
    ansatz: Optional[AnsatzSpace] = None,
    seed: int = 0,
) -> CheckReport:
    """The two modular identities of a regular bivector, the duality between
    the kernel-top and cokernel-top representations, and the invariant
    transverse volume criterion, each decided exactly or in the ansatz."""
    rep = CheckReport("regular Poisson identities")
    tm = pi.algebroid
    chart = tm.chart
    apres, bpres, b_in_tm, sharp, sharp_b, ext = regular_poisson_kit(
        pi, image_columns, kernel_columns, lam_coeff, seed
    )
    rng = random.Random(seed)
    ranks = set()
    for _ in range(50):
        pt = [Fraction(rng.randint(-40, 40), rng.randint(1, 9)) for _ in chart.coords]
        ranks.add(float_rank([[f.evaluate(pt) for f in row] for row in sharp.fiber]))
    rep.add(
        "constant rank (sampled)",
        ranks == {bpres.rank},
        f"sampled ranks {sorted(ranks)}, image rank {bpres.rank}",
    )
    extrep = check_extension(ext, seed=seed)
    rep.add("extension data valid", extrep.passed)
    space = ansatz or AnsatzSpace(chart)
    eta_k = char_cocycle(induced_rep(ext), ext.lam)
    mod_sharp = relative_modular(
        sharp, Trivialization(*canonical_sections(apres)), Trivialization(*canonical_sections(tm))
    )
    mod_sharp_b = relative_modular(
        sharp_b, Trivialization(*canonical_sections(apres)), Trivialization(*canonical_sections(bpres))
    )
    pulled = pullback_form(sharp_b, eta_k)
    res1 = mod_sharp_b - pulled
    if res1.is_zero():
        rep.add("image identity exact at cochain level", True)
    else:
        v = cohomologous(mod_sharp_b, pulled, space, seed=seed)
        rep.add("image identity up to an exact form", v.verdict == "cohomologous", v.verdict)
    res2 = mod_sharp - pulled.scale(2)
    if res2.is_zero():
        rep.add("doubling identity exact at cochain level", True)
    else:
        v = cohomologous(mod_sharp, pulled.scale(2), space, seed=seed)
        rep.add("doubling identity up to an exact form", v.verdict == "cohomologous", v.verdict)
    # duality of the cokernel-top representation with the kernel-top one
    dq = quotient_top_rep(b_in_tm, complement_columns)
    eta_q = char_cocycle(dq, LineSection(chart.one()))
    dual_res = eta_q + eta_k
    if dual_res.is_zero():
        rep.add("cokernel rep dual to kernel rep (exact)", True)
    else:
        v = cohomologous(eta_q, -eta_k, space, seed=seed)
        rep.add("cokernel rep dual to kernel rep (class)", v.verdict == "cohomologous", v.verdict)
    # invariant transverse volume criterion
    unimodular = classify(mod_sharp, space, seed=seed)
    transverse = classify(eta_q, space, seed=seed)
    agree = (unimodular.status == "exact") == (transverse.status == "exact")
    rep.add(
        "unimodular iff invariant transverse volume (in ansatz)",
        agree,
        f"modular: {unimodular.status}, transverse volume: {transverse.status}",
    )
    rep.data["mod_sharp"] = mod_sharp
    rep.data["eta_k"] = eta_k
    rep.data["eta_q"] = eta_q
    rep.data["cotangent"] = apres
    rep.data["image"] = bpres
    rep.data["sharp_b"] = sharp_b
    return rep
