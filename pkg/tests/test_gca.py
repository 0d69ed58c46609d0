import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import graded_basis_count, koszul_by_transpositions
from rht.errors import DegreeError, ValidationError
from rht.exactlin import ONE
from rht.gca import (
    CdgaMorphism,
    GroupAction,
    Presentation,
    augmentation,
    check_d_squared,
    check_group_action,
    check_morphism,
    koszul_sign,
    koszul_sign_bubble,
    point,
)


def s2_model():
    return Presentation("S2", [("y", 2), ("z", 3)], {"z": {(2, 0): 1}})


def mixed():
    # y^2 = dz, y^3 = dw: a cdga with several odd generators
    return Presentation("T", [("y", 2), ("z", 3), ("w", 5)], {"z": {(2, 0, 0): 1}, "w": {(3, 0, 0): 1}})


@st.composite
def degrees_and_perm(draw):
    n = draw(st.integers(0, 6))
    degs = draw(st.lists(st.integers(1, 5), min_size=n, max_size=n))
    perm = draw(st.permutations(list(range(n))))
    return degs, perm


@given(degrees_and_perm())
def test_koszul_sign_oracles(dp):
    degs, perm = dp
    s = koszul_sign(degs, perm)
    assert s == koszul_sign_bubble(degs, perm) == koszul_by_transpositions(degs, perm)


@given(st.lists(st.integers(1, 6), min_size=1, max_size=4), st.integers(0, 14))
def test_basis_count_generating_function(degs, n):
    P = Presentation("P", [(f"g{i}", d) for i, d in enumerate(degs)], {})
    assert len(P.basis(n)) == graded_basis_count(degs, n)


def monos(P, top=9):
    return [m for n in range(top + 1) for m in P.basis(n)]


def test_graded_commutative_and_associative():
    P = mixed()
    ms = monos(P, 8)
    for a in ms:
        for b in ms:
            ab = P.multiply({a: ONE}, {b: ONE})
            ba = P.multiply({b: ONE}, {a: ONE})
            sgn = -1 if (P.mono_degree(a) * P.mono_degree(b)) % 2 else 1
            assert ab == {m: sgn * c for m, c in ba.items()}
    for a in ms[:8]:
        for b in ms[:8]:
            for c in ms[:8]:
                left = P.multiply(P.multiply({a: ONE}, {b: ONE}), {c: ONE})
                right = P.multiply({a: ONE}, P.multiply({b: ONE}, {c: ONE}))
                assert left == right


def test_leibniz_and_d_squared():
    P = mixed()
    ms = monos(P, 10)
    for a in ms:
        for b in ms[:12]:
            ab = P.multiply({a: ONE}, {b: ONE})
            lhs = P.apply_d(ab)
            sgn = -1 if P.mono_degree(a) % 2 else 1
            rhs = P.multiply(P.d_mono(a), {b: ONE})
            for m, c in P.multiply({a: ONE}, P.d_mono(b)).items():
                rhs[m] = rhs.get(m, 0) + sgn * c
            rhs = {m: c for m, c in rhs.items() if c}
            assert lhs == rhs
    assert check_d_squared(P, 14).passed


def test_odd_square_vanishes():
    P = mixed()
    z = P.gen("z")
    assert P.mul_mono(z, z) is None


def test_degree_and_homogeneity_guards():
    with pytest.raises(DegreeError):
        Presentation("A", [("y", 2)], {"y": {(1,): 1}})
    with pytest.raises(DegreeError):
        Presentation("A", [("y", 0)], {})
    with pytest.raises(ValidationError):
        Presentation("A", [("y", 2), ("y", 4)], {})


def test_nonzero_d_squared_is_reported():
    # d w = z is not closed under d since d z = y^2
    P = Presentation("B", [("y", 2), ("z", 3), ("w", 2)], {"z": {(2, 0, 0): 1}, "w": {(0, 1, 0): 1}})
    assert not check_d_squared(P, 6).passed


def test_morphism_checks():
    R = Presentation("R", [("x", 4)], {})
    S = Presentation("S", [("y", 2)], {})
    phi = CdgaMorphism(R, S, {"x": {(2,): 1}}, name="phi")
    assert check_morphism(phi, 10).passed
    assert phi.apply({(3,): ONE}) == {(6,): ONE}
    bad = CdgaMorphism(R, S, {"x": {(1,): 1}}, name="bad")
    assert not check_morphism(bad, 10).passed
    # compatibility with d: z -> 0 is fine, y -> y needs dz -> 0
    S2 = s2_model()
    Q = Presentation("Q", [("y", 2)], {})
    f = CdgaMorphism(S2, Q, {"y": {(1,): 1}, "z": {}}, name="f")
    assert not check_morphism(f, 6).passed


def test_compose_and_identity():
    R = Presentation("R", [("x", 4)], {})
    S = Presentation("S", [("y", 2)], {})
    phi = CdgaMorphism(R, S, {"x": {(2,): 1}})
    idS = CdgaMorphism.identity(S)
    assert idS.compose(phi).apply({(1,): ONE}) == phi.apply({(1,): ONE})
    eps = augmentation(S)
    assert eps.apply({(0,): ONE, (1,): ONE}) == {(): ONE}
    assert point().basis(0) == ((),)


def test_group_action_checks():
    S = Presentation("S", [("y", 2)], {})
    g = CdgaMorphism(S, S, {"y": {(1,): -1}}, name="g")
    A = GroupAction("c2", S, {"g": g}, [[("g", 2)]])
    assert check_group_action(A, 10).passed
    B = GroupAction("c3?", S, {"g": g}, [[("g", 3)]])
    assert not check_group_action(B, 10).passed
    assert A.apply_word([("g", -1)], {(1,): ONE}) == {(1,): -ONE}
    doubling = CdgaMorphism(S, S, {"y": {(1,): 2}}, name="h")
    C = GroupAction("free", S, {"h": doubling}, [])
    assert check_group_action(C, 6).passed
    assert C.apply_word([("h", -1)], {(1,): ONE}) == {(1,): ONE / 2}
    zero = CdgaMorphism(S, S, {"y": {}}, name="z")
    assert not check_group_action(GroupAction("bad", S, {"z": zero}, []), 4).passed
