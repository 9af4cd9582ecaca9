import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from glw import linalg
from glw.cmodule import (
    cokernel,
    direct_sum,
    format_module,
    full_subfunctor,
    identity_nat,
    image,
    kernel,
    nat_hom,
    nat_space,
    parse_module,
    quotient,
    random_module,
    random_nat,
    random_submodule,
    representable,
    sub_generated,
    sub_join,
    sub_meet,
    submodule_lattice,
    validate_module,
    yoneda_element,
    zero_module,
    zero_nat,
    zero_subfunctor,
)
from glw.errors import ModuleError

seeds = st.integers(0, 2**16)


def test_zero_module_is_valid(dual):
    module = parse_module("module over d.gcat\n", dual)
    assert module.is_zero()


def test_hand_written_representable(w5, w5_rep_v2):
    rep = representable(w5, "v2")
    assert w5_rep_v2.dim_vector() == (0, 1, 2, 1, 0)
    for arrow in w5.arrows:
        assert np.array_equal(w5_rep_v2.action[arrow.name], rep.action[arrow.name])


def test_violated_relation_is_named(dual):
    with pytest.raises(ModuleError, match="relation e.e violated"):
        parse_module("module over d.gcat\nspace o dim 1\nmap e = [[1]]\n", dual)


def test_module_parse_errors(dual):
    with pytest.raises(ModuleError, match="unknown object"):
        parse_module("space q dim 1\n", dual)
    with pytest.raises(ModuleError, match="line 2"):
        parse_module("space o dim 1\nmap e = [[0]\n", dual)
    with pytest.raises(ModuleError, match="expected a 1x1 matrix"):
        parse_module("space o dim 1\nmap e = [[0, 0]]\n", dual)


def test_format_round_trip(w5, w5_rep_v2):
    again = parse_module(format_module(w5_rep_v2, "w5.gcat"), w5)
    assert again.dims == w5_rep_v2.dims
    for arrow in w5.arrows:
        assert np.array_equal(again.action[arrow.name], w5_rep_v2.action[arrow.name])


def test_representables(w5, dual, point):
    assert representable(w5, "v2").dim_vector() == (0, 1, 2, 1, 0)
    assert representable(point, "pt").dim_vector() == (1,)
    assert representable(dual, "o").action["e"].tolist() == [[0, 0], [1, 0]]


def test_yoneda_unit_is_identity(w5):
    rep = representable(w5, "v2")
    eta = yoneda_element(rep, "v2", [1, 0])
    assert eta.is_natural()
    assert eta.equals(identity_nat(rep))


def test_yoneda_of_zero(w5):
    rep = representable(w5, "v2")
    assert yoneda_element(rep, "v2", [0, 0]).is_zero()


def test_yoneda_of_loop(w5):
    rep = representable(w5, "v2")
    eta = yoneda_element(rep, "v2", [0, 1])
    assert eta.at("v2").tolist() == [[0, 0], [1, 0]]


@settings(max_examples=15)
@given(seeds)
def test_yoneda_dimension(w5, seed):
    cat = w5
    module = random_module(cat, np.random.default_rng(seed), dmax=2)
    for c in cat.objects:
        assert nat_space(representable(cat, c), module).dim == module.dims[c]


def test_nat_from_zero(w5, w5_rep_v2):
    assert nat_hom(zero_module(w5), w5_rep_v2) == []


def test_dual_endomorphisms(dual):
    rep = representable(dual, "o")
    basis = nat_hom(rep, rep)
    assert len(basis) == 2
    assert all(eta.is_natural() for eta in basis)


def test_kernel_and_image_of_identity(w5_rep_v2):
    ident = identity_nat(w5_rep_v2)
    assert kernel(ident).is_zero()
    assert image(ident).is_full()
    assert kernel(zero_nat(w5_rep_v2, w5_rep_v2)).is_full()


@settings(max_examples=15)
@given(seeds)
def test_rank_nullity_on_random_maps(w5, seed):
    cat = w5
    rng = np.random.default_rng(seed)
    source, target = random_module(cat, rng, dmax=2), random_module(cat, rng, dmax=2)
    f = random_nat(source, target, rng)
    assert f.is_natural()
    ker, im = kernel(f), image(f)
    for i, c in enumerate(cat.objects):
        assert ker.spaces[i].dim + im.spaces[i].dim == source.dims[c]


def test_generated_subfunctors(w5):
    rep = representable(w5, "v2")
    assert sub_generated(rep, []).is_zero()
    assert sub_generated(rep, [("v2", [1, 0])]).is_full()
    assert sub_generated(rep, [("v2", [0, 1])]).dim_vector() == (0, 0, 1, 0, 0)


def test_quotients(w5):
    rep = representable(w5, "v2")
    same, projection = quotient(rep, zero_subfunctor(rep))
    assert same.dim_vector() == rep.dim_vector()
    assert projection.equals(identity_nat(rep))
    assert quotient(rep, full_subfunctor(rep))[0].is_zero()
    loop = sub_generated(rep, [("v2", [0, 1])])
    quot, projection = quotient(rep, loop)
    assert quot.dim_vector() == (0, 1, 1, 1, 0)
    assert projection.is_natural()
    assert kernel(projection) == loop
    validate_module(quot)


def test_meet_and_join(w5):
    rep = representable(w5, "v2")
    beta = sub_generated(rep, [("v1", [1])])
    alpha = sub_generated(rep, [("v3", [1])])
    loop = sub_generated(rep, [("v2", [0, 1])])
    assert beta.dim_vector() == (0, 1, 0, 0, 0)
    assert alpha.dim_vector() == (0, 0, 1, 1, 0)
    assert sub_meet(beta, alpha).is_zero()
    assert sub_join(beta, loop).dim_vector() == (0, 1, 1, 0, 0)
    assert sub_meet(beta, full_subfunctor(rep)) == beta
    assert sub_join(beta, zero_subfunctor(rep)) == beta


@settings(max_examples=15)
@given(seeds)
def test_quotient_kernel_round_trip(w5, seed):
    cat = w5
    rng = np.random.default_rng(seed)
    module = random_module(cat, rng, dmax=3)
    sub = random_submodule(module, rng)
    assert sub.is_closed()
    quot, projection = quotient(module, sub)
    validate_module(quot)
    assert projection.is_natural()
    assert kernel(projection) == sub


def test_submodule_lattice_of_representable(w5, dual, point):
    assert len(submodule_lattice(representable(w5, "v2"))) == 7
    assert len(submodule_lattice(representable(dual, "o"))) == 3
    assert len(submodule_lattice(representable(point, "pt"))) == 2


def test_direct_sum_and_cokernel(w5):
    rep = representable(w5, "v2")
    total = direct_sum([rep, rep])
    validate_module(total)
    assert total.dim_vector() == (0, 2, 4, 2, 0)
    loop = yoneda_element(rep, "v2", [0, 1])
    coker, projection = cokernel(loop)
    assert coker.dim_vector() == (0, 1, 1, 1, 0)
    assert projection.is_surjective()


@settings(max_examples=20)
@given(seeds)
def test_random_modules_are_valid(dual, seed):
    cat = dual
    module = random_module(cat, np.random.default_rng(seed), dmax=3)
    validate_module(module)
    assert max(module.dim_vector()) <= 3
    assert linalg.is_zero(module.evaluate_path("o", ("e", "e")))
