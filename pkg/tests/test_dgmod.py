import pytest

from rht.dgmod import (
    HomModule,
    SemifreeModule,
    biduality_map,
    build_module_model,
    dual,
    hom_from_tensor,
    ring_module,
    scalar_ext_compare,
    semifree_resolution,
    tensor_over_R,
    unit_map_nu,
)
from rht.errors import InfiniteRank, UnsupportedModel, ValidationError
from rht.exactlin import ONE
from rht.gca import CdgaMorphism, Presentation, point


def example():
    R = Presentation("R", [("x", 4)])
    S = Presentation("S", [("y", 2)])
    return R, S, CdgaMorphism(R, S, {"x": S.poly("y^2")}, name="phi")


def test_resolution_of_the_example_is_rank_two_and_finite():
    R, S, phi = example()
    res = semifree_resolution(phi, 12)
    assert res.flag == "FINITE"
    assert sorted(res.module.degs) == [0, 2]
    assert res.module.is_minimal() and res.module.is_triangular()
    for n in range(13):
        q = res.q_matrix(n)
        assert q.rows == q.cols


def test_example_model_and_dual_action():
    R, S, phi = example()
    model = build_module_model(phi, 12)
    assert model.kind == "free"
    M = model.module
    D = dual(M)
    y = S.gen("y")
    names = {g: D.gen_names[g] for g in range(D.rank)}
    by_name = {v: k for k, v in names.items()}
    dual_y, dual_1 = by_name["∨y"], by_name["∨1"]
    # ∨y · y = ∨1 and ∨1 · y = x ∨y
    assert D.act_right(S, (R.unit, dual_y), y) == {(R.unit, dual_1): ONE}
    assert D.act_right(S, (R.unit, dual_1), y) == {(R.gen("x"), dual_y): ONE}


def test_unit_map_formulas():
    R, S, phi = example()
    model = build_module_model(phi, 12)
    nu = unit_map_nu(model)
    E = nu.End
    assert E.elem_str(nu.apply_mono(S.unit)) in ("y⊗∨y + 1⊗∨1", "1⊗∨1 + y⊗∨y")
    assert set(E.elem_str(nu.apply_mono(S.gen("y"))).split(" + ")) == {"x·1⊗∨y", "y⊗∨1"}
    assert nu.check(8).passed


def test_sphere_model_is_a_truncation():
    S2 = Presentation("S2", [("y", 2), ("z", 3)], {"z": {(2, 0): 1}})
    iota = CdgaMorphism(point(), S2, [], name="i")
    model = build_module_model(iota, 10)
    assert model.kind == "truncated"
    assert sorted(model.module.degs) == [0, 2]
    assert model.module.check_action(S2).passed


def test_nonzero_module_differential():
    R = Presentation("R", [("x", 4)])
    E = Presentation("E", [("x", 4), ("z", 3)], {"z": {(1, 0): 1}})
    f = CdgaMorphism(R, E, {"x": E.poly("x")})
    model = build_module_model(f, 12)
    M = model.module
    assert model.kind == "free" and M.rank == 2
    z = M.gen_names.index("z")
    assert M.d((R.unit, z)) == {(R.gen("x"), M.gen_names.index("1")): ONE}
    assert M.check_d_squared().passed


def test_unsupported_and_infinite_cases():
    R = Presentation("R", [("x", 2)])
    Q = point()
    with pytest.raises(UnsupportedModel):
        build_module_model(CdgaMorphism(R, Q, {"x": {}}), 8)
    S = Presentation("S", [("y", 2)])
    with pytest.raises(InfiniteRank):
        build_module_model(CdgaMorphism(Q, S, []), 8)


def test_comparison_maps_are_isomorphisms():
    R, S, phi = example()
    M = build_module_model(phi, 12).module
    E = Presentation("E", [("x", 4), ("z", 3)], {"z": {(1, 0): 1}})
    N = build_module_model(CdgaMorphism(R, E, {"x": E.poly("x")}), 12).module
    for P in (M, N):
        bm, _DD = biduality_map(P)
        assert bm.check_chain_map().passed and bm.is_isomorphism()
        h = hom_from_tensor(P, M)
        assert h.check_chain_map().passed and h.is_isomorphism()
        sc = scalar_ext_compare(P, N)
        assert sc.check_chain_map().passed and sc.is_isomorphism()


def test_hom_and_tensor_differentials_square_to_zero():
    R = Presentation("R", [("x", 4)])
    E = Presentation("E", [("x", 4), ("z", 3)], {"z": {(1, 0): 1}})
    N = build_module_model(CdgaMorphism(R, E, {"x": E.poly("x")}), 12).module
    for X in (HomModule(N, N), tensor_over_R(N, N), dual(N)):
        assert X.check_d_squared(12).passed


def test_semifree_module_guards():
    R = Presentation("R", [("x", 4)])
    with pytest.raises(ValidationError):
        # differential must only hit earlier generators
        SemifreeModule(R, [("a", 0), ("b", 3)], {0: {(R.gen("x"), 1): 1}})
    A = ring_module(R)
    assert A.is_ring and A.basis(8) == ((R.gen("x", 2), 0),)
