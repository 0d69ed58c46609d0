"""Hochschild homology transfer ``HH(S) -> HH(R)`` along ``φ: R -> S`` over Q.

Two routes are computed at window level and composed on homology:

* ALT: ``HH(S) -γ-> HH(S, End_R(M)) <-μ- HH(R, ∨M) -ev-> HH(R)``
* ZIGZAG: ``HH(S) -ν-> HH(S, End_R(M)) <-β- HH(S, B(M,R,∨M)) ≅ HH(R, B(∨M,S,M)) -F-> HH(R)``

``M`` is a strict finite model of ``S`` as an ``R``-module with unit ``u``.
Backward maps are inverted on homology only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from rht.dgmod import HomModule, build_module_model, dual, ring_module, unit_map_nu
from rht.errors import NotInvertible, QuasiIsoDefect, RhtError, ValidationError
from rht.exactlin import ONE, SparseMatrix, fmt, invert_homology_iso, rank, vadd
from rht.gca import CdgaMorphism, GroupAction, Presentation, check_group_action, check_morphism, point
from rht.hochschild import BarModule, HochschildComplex, hh_functorial, hochschild_of_ring, rotate_coefficients

ROUTES = ("alt", "zigzag", "both")


class RouteMismatch(RhtError):
    """The two routes produced different matrices."""


def _sgn(e) -> int:
    return -1 if e % 2 else 1


@dataclass
class TransferJob:
    phi: CdgaMorphism
    max_degree: int
    route: str = "alt"
    length_cutoff: int | None = None
    action_S: GroupAction | None = None
    action_R: GroupAction | None = None
    name: str = ""

    def __post_init__(self):
        if self.route not in ROUTES:
            raise ValidationError(f"unknown route {self.route!r}")
        if self.max_degree < 0:
            raise ValidationError("max degree must be non-negative")
        if not self.name:
            self.name = self.phi.name

    @property
    def R(self) -> Presentation:
        return self.phi.source

    @property
    def S(self) -> Presentation:
        return self.phi.target


@dataclass
class DegreeEntry:
    n: int
    src_basis: list
    tgt_basis: list
    matrix: SparseMatrix
    certified: bool


@dataclass
class TransferReport:
    job: str
    route: str
    degrees: list
    diagnostics: dict = field(default_factory=dict)
    equivariance: list = field(default_factory=list)
    source_window: HochschildComplex | None = None
    target_window: HochschildComplex | None = None
    route_matrices: dict = field(default_factory=dict)

    def matrix(self, n) -> SparseMatrix:
        for e in self.degrees:
            if e.n == n:
                return e.matrix
        raise KeyError(n)

    def apply_to_chain(self, n, chain_elem) -> dict:
        """Transfer of the class of a cycle given as ``{chain: coeff}`` in ``HH(S)``."""
        src = self.source_window
        c = src.homology(n).project(src.vector(chain_elem, n))
        return self.matrix(n).apply({i: v for i, v in enumerate(c) if v})

    def target_coords(self, n, chain_elem) -> dict:
        tgt = self.target_window
        c = tgt.homology(n).project(tgt.vector(chain_elem, n))
        return {i: v for i, v in enumerate(c) if v}


# ---------------------------------------------------------------------------
# validation and setup


def validate_job(job: TransferJob):
    cutoff = job.max_degree + 1
    rep = check_morphism(job.phi, cutoff)
    if not rep.passed:
        f = rep.failures[0]
        raise ValidationError(f"{job.phi.name}: {f['what']} {f['detail']}".strip())
    if (job.action_S is None) != (job.action_R is None):
        raise ValidationError("equivariant jobs need actions on both source and target")
    if job.action_S is not None:
        validate_actions(job.phi, job.action_S, job.action_R, cutoff)


def validate_actions(phi: CdgaMorphism, act_S: GroupAction, act_R: GroupAction, cutoff: int):
    """Both actions are valid and ``g_S ∘ φ = φ ∘ g_R`` on generators of ``R``."""
    if act_S.presentation is not phi.target or act_R.presentation is not phi.source:
        raise ValidationError("actions must act on the target and source of the map")
    for a in (act_S, act_R):
        rep = check_group_action(a, cutoff)
        if not rep.passed:
            raise ValidationError(f"{rep.subject}: {rep.failures[0]['what']}")
    if set(act_S.automorphisms) != set(act_R.automorphisms):
        raise ValidationError("actions on source and target must name the same group generators")
    R = phi.source
    for g in act_S.automorphisms:
        gS, gR = act_S.automorphisms[g], act_R.automorphisms[g]
        for i in range(R.ngens):
            x = {R.gen(i): ONE}
            lhs = gS.apply(phi.apply(x))
            rhs = phi.apply(gR.apply(x))
            if lhs != rhs:
                raise ValidationError(
                    f"generator {g} is not compatible with {phi.name} at {R.gen_names[i]}"
                )


class _Setup:
    def __init__(self, job: TransferJob):
        self.job = job
        hi = job.max_degree + 1
        self.hi = hi
        self.model = build_module_model(job.phi, hi)
        self.M = self.model.module
        self.u = self.model.unit
        self.End = HomModule(self.M, self.M, name=f"End({self.M.name})")
        self.nu = unit_map_nu(self.model)
        self.nu.End = self.End
        self.D = dual(self.M)
        self.C1 = HochschildComplex(job.S, ring_module(job.S), hi, job.length_cutoff, name=f"HH({job.S.name})")
        self.C2 = HochschildComplex(job.S, self.End, hi, job.length_cutoff, name=f"HH({job.S.name},End)")
        self.C4 = HochschildComplex(job.R, ring_module(job.R), hi, job.length_cutoff, name=f"HH({job.R.name})")
        self.stamps = sorted(set(self.C1.stamps) | set(self.C4.stamps))

    def gamma(self):
        nu = self.nu
        return hh_functorial(self.C1, self.C2, None, lambda x: nu.apply_mono(x[0]), name="gamma")


def _homology_map(cm, n):
    return cm.on_homology(n)


def _invert(m: SparseMatrix, what, n):
    try:
        return invert_homology_iso(m)
    except NotInvertible as e:
        raise QuasiIsoDefect(f"{what} is not a homology isomorphism in degree {n}: {e}") from None


def _degrees(job):
    return range(0, job.max_degree + 1)


# ---------------------------------------------------------------------------
# routes


def _alt_matrices(st: _Setup) -> dict:
    job = st.job
    R, S = job.R, job.S
    M, D, End, u = st.M, st.D, st.End, st.u
    C3 = HochschildComplex(R, D, st.hi, job.length_cutoff, name=f"HH({R.name},∨M)")
    gamma = st.gamma()

    def mu_coeff(f):
        vals = []
        for k in range(M.rank):
            fv = D.evaluate({f: ONE}, M.gen_elem(k))
            img: dict = {}
            for (r, _z), c in fv.items():
                vadd(img, M.rmul(r, u), c)
            vals.append(img)
        return End.from_values(vals)

    mu = hh_functorial(C3, st.C2, job.phi, mu_coeff, name="mu")

    def ev_coeff(f):
        return D.evaluate({f: ONE}, u)

    ev = hh_functorial(C3, st.C4, None, ev_coeff, name="ev")
    out = {}
    for n in _degrees(job):
        g = _homology_map(gamma, n)
        m = _invert(_homology_map(mu, n), "mu", n)
        e = _homology_map(ev, n)
        out[n] = e @ (m @ g)
    st.diag_alt = {"windows": [w.name for w in (st.C1, st.C2, C3, st.C4)]}
    return out


def _zigzag_matrices(st: _Setup) -> dict:
    job = st.job
    R, S = job.R, job.S
    M, D, End = st.M, st.D, st.End
    if R.nbase or S.nbase:
        raise ValidationError("the bar route needs the ground field as base")
    X3 = BarModule(M, R, D, job.length_cutoff, name="B(M,R,∨M)")
    X4 = BarModule(D, S, M, job.length_cutoff, name="B(∨M,S,M)")
    D3 = HochschildComplex(S, X3, st.hi, job.length_cutoff, name=f"HH({S.name},B(M,R,∨M))")
    D4 = HochschildComplex(R, X4, st.hi, job.length_cutoff, name=f"HH({R.name},B(∨M,S,M))")
    nu = st.gamma()

    def beta_coeff(c):
        m, w, f = c
        if w:
            return {}
        md = M.degree(m)
        vals = []
        for k in range(M.rank):
            fv = D.evaluate({f: ONE}, M.gen_elem(k))
            img: dict = {}
            for (r, _z), cc in fv.items():
                vadd(img, M.rmul(r, {m: ONE}), cc * _sgn(md * R.mono_degree(r)))
            vals.append(img)
        return End.from_values(vals)

    beta = hh_functorial(D3, st.C2, None, beta_coeff, name="beta")
    rho = rotate_coefficients(D3, D4)

    def F_coeff(c):
        f, w, m = c
        if w:
            return {}
        return D.evaluate({f: ONE}, {m: ONE})

    F = hh_functorial(D4, st.C4, None, F_coeff, name="F")
    out = {}
    for n in _degrees(job):
        a = _homology_map(nu, n)
        b = _invert(_homology_map(beta, n), "beta", n)
        r = _homology_map(rho, n)
        f = _homology_map(F, n)
        out[n] = f @ (r @ (b @ a))
    st.diag_zigzag = {"windows": [w.name for w in (st.C1, st.C2, D3, D4, st.C4)]}
    return out


def _report(st: _Setup, route, mats) -> TransferReport:
    job = st.job
    degrees = []
    for n in _degrees(job):
        degrees.append(
            DegreeEntry(
                n,
                st.C1.homology_labels(n),
                st.C4.homology_labels(n),
                mats[n],
                n <= min(st.C1.validity, st.C4.validity),
            )
        )
    res = st.model.resolution
    diag = {
        "model": st.model.kind,
        "resolution": res.flag,
        "module_rank": st.M.rank,
        "module_generators": [f"{nm}:{d}" for nm, d in zip(st.M.gen_names, st.M.degs)],
        "stamps": st.stamps,
    }
    return TransferReport(job.name, route, degrees, diag, source_window=st.C1, target_window=st.C4)


def _run(job: TransferJob, routes) -> tuple:
    validate_job(job)
    st = _Setup(job)
    mats = {}
    for r in routes:
        mats[r] = _alt_matrices(st) if r == "alt" else _zigzag_matrices(st)
    return st, mats


def transfer_alt(job: TransferJob) -> TransferReport:
    st, mats = _run(job, ["alt"])
    return _finish(st, "alt", mats)


def transfer_zigzag(job: TransferJob) -> TransferReport:
    st, mats = _run(job, ["zigzag"])
    return _finish(st, "zigzag", mats)


def run_transfer(job: TransferJob) -> TransferReport:
    routes = ["alt", "zigzag"] if job.route == "both" else [job.route]
    st, mats = _run(job, routes)
    if len(routes) == 2:
        bad = [n for n in _degrees(job) if mats["alt"][n] != mats["zigzag"][n]]
        if bad:
            raise RouteMismatch(f"routes disagree in degrees {bad}")
    rep = _finish(st, job.route, mats)
    return rep


def _finish(st, route, mats) -> TransferReport:
    first = mats["alt"] if "alt" in mats else mats["zigzag"]
    rep = _report(st, route, first)
    rep.route_matrices = mats
    if len(mats) == 2:
        rep.diagnostics["route_agreement"] = True
    job = st.job
    if job.action_S is not None:
        rep.equivariance = check_equivariance(rep, job.action_S, job.action_R)
    return rep


# ---------------------------------------------------------------------------
# Euler characteristic and equivariance


def euler_characteristic(R: Presentation, max_degree: int, length_cutoff=None) -> TransferReport:
    """Transfer along the unit ``Q -> R``: a row ``HH(R) -> HH(Q) = Q`` per degree."""
    k = point()
    iota = CdgaMorphism(k, R, {}, name=f"unit_{R.name}")
    rep = transfer_alt(TransferJob(iota, max_degree, "alt", length_cutoff, name=f"euler {R.name}"))
    unit = ((R.unit, 0), ())
    c = rep.source_window.index(0).get(unit)
    value = None
    if c is not None:
        coords = rep.apply_to_chain(0, {unit: ONE})
        value = coords.get(0, 0) if coords else 0
    rep.diagnostics["euler"] = fmt(value if value is not None else 0)
    return rep


def betti_alternating_sum(R: Presentation, top: int) -> int:
    """``Σ (-1)^i dim H^i(R)`` for ``i ≤ top`` from ranks of the differential alone."""
    total = 0
    for i in range(0, top + 1):
        dim = len(R.basis(i))
        r_out = rank(R.d_matrix(i)) if dim else 0
        r_in = rank(R.d_matrix(i - 1)) if i > 0 and R.basis(i - 1) else 0
        total += _sgn(i) * (dim - r_out - r_in)
    return total


def hh_automorphism(window: HochschildComplex, g: CdgaMorphism):
    """Chain map ``HH(A) -> HH(A)`` induced by an automorphism ``g`` of ``A``."""
    return hh_functorial(window, window, g, lambda x: {(m, 0): c for m, c in g.apply_mono(x[0]).items()}, name=g.name)


def check_equivariance(report: TransferReport, act_S: GroupAction, act_R: GroupAction) -> list:
    """Per generator and degree: does ``T A_S = A_R T`` hold exactly."""
    rows = []
    src, tgt = report.source_window, report.target_window
    for g in sorted(act_S.automorphisms):
        aS = hh_automorphism(src, act_S.automorphisms[g])
        aR = hh_automorphism(tgt, act_R.automorphisms[g])
        for e in report.degrees:
            if not e.certified:
                continue
            n = e.n
            T = e.matrix
            ok = T @ _homology_map(aS, n) == _homology_map(aR, n) @ T
            rows.append({"generator": g, "n": n, "passed": ok})
    return rows
