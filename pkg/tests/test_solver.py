import warnings

import numpy as np
import pytest

from homoglab import (
    ArityError,
    CellProblemSpec,
    FieldModel,
    PhaseSet,
    SizeError,
    discretize,
    energy,
    instantiate,
    solve,
    solve_exhaustive,
    solve_multiphase,
    solve_two_phase,
)
from homoglab.cell import discretize_box, pure_jump_labeling
from homoglab.solver import quantized_energy

E2 = (0.0, 1.0)
THREE = PhaseSet([[0.0], [1.0], [2.5]])


def small_instance(seed, shape=(5, 6), phases=None, nu=E2):
    f = instantiate(FieldModel.checkerboard(), seed)
    kw = {} if phases is None else {"phases": phases}
    return discretize_box((0, -shape[1] / 4), (shape[0] / 2, shape[1] / 4), nu, f, 0.5, **kw)


def _recursive_min(inst):
    """Independent enumerator: depth-first over free cells, float energies."""
    free = list(inst.free)
    lab = inst.pins.copy()
    best = [np.inf]

    def rec(k):
        if k == len(free):
            best[0] = min(best[0], energy(lab, inst))
            return
        for p in range(inst.n_phases):
            lab[free[k]] = p
            rec(k + 1)

    rec(0)
    return best[0]


def test_constant_flat_cut():
    f = instantiate(FieldModel.constant(1.0), 0)
    res = solve_two_phase(discretize(CellProblemSpec(4, 4, E2, f, h=1.0)))
    assert res.value == 4.0
    assert res.exact


def test_stripe_instance(stripe_table):
    # weights 1.8 on slab 0 and 1.1 on slab 1, 2 elsewhere
    f = stripe_table({0: 1.8, 1: 1.1})
    inst = discretize(CellProblemSpec(4, 4, E2, f, h=1.0))
    res = solve_two_phase(inst)
    assert res.value == solve_exhaustive(inst).value
    # the side collar columns force their interface onto the 1.8 layer,
    # and moving the two free columns up costs two 1.1 side facets
    assert res.value == pytest.approx(4 * 1.8)
    # with a finer grid and a wider box the cut does follow the cheap slab
    inst = discretize(CellProblemSpec(16, 4, E2, f, h=0.5))
    res = solve_two_phase(inst)
    y = inst.facet_mid[:, 1]
    horiz = np.abs(inst.facet_normal[:, 1]) == 1.0
    cut = res.labeling[inst.facet_cells[:, 0]] != res.labeling[inst.facet_cells[:, 1]]
    cheap = (y > 0) & (y <= 1)
    assert (cut & horiz & cheap).sum() == 30 and (cut & horiz & ~cheap).sum() == 2
    # 2 collar columns on the 1.8 layer, 30 free columns on 1.1, 2 side steps at 1.1
    assert res.value == pytest.approx(0.5 * (2 * 1.8 + 30 * 1.1 + 2 * 1.1))


@pytest.mark.parametrize("seed", range(40))
def test_two_phase_matches_exhaustive(seed):
    inst = small_instance(seed)  # 3 x 4 = 12 free cells
    assert inst.free.size == 12
    a, b = solve_two_phase(inst), solve_exhaustive(inst)
    assert quantized_energy(a.labeling, inst) == quantized_energy(b.labeling, inst)
    assert a.value == b.value


def test_exhaustive_single_cell():
    f = instantiate(FieldModel.constant(1.0), 0)
    inst = discretize_box((0, -1.5), (1, 1.5), E2, f, 1.0)
    # cells: a-pin, free, b-pin stacked along nu
    inst.pins[:] = [0, -1, 1]
    inst.cost[0, 0, 1] = inst.cost[0, 1, 0] = 1.0
    inst.cost[1, 0, 1] = inst.cost[1, 1, 0] = 2.0
    res = solve_exhaustive(inst)
    assert res.value == 1.0
    assert res.labeling.tolist() == [0, 1, 1]
    assert solve_two_phase(inst).value == 1.0


def test_exhaustive_no_free_cells():
    f = instantiate(FieldModel.checkerboard(), 3)
    inst = discretize(CellProblemSpec(2, 2, E2, f, h=1.0))
    assert inst.free.size == 0
    assert solve_exhaustive(inst).value == energy(inst.pins, inst)


def test_exhaustive_three_phase_recursive():
    for seed in range(5):
        inst = small_instance(seed, shape=(4, 4), phases=THREE)
        assert inst.free.size == 4
        assert solve_exhaustive(inst).value == pytest.approx(_recursive_min(inst), rel=1e-12)


def test_exhaustive_size_error():
    f = instantiate(FieldModel.constant(), 0)
    with pytest.raises(SizeError):
        solve_exhaustive(discretize(CellProblemSpec(8, 8, E2, f, h=0.5)))


def test_arity_errors():
    inst = small_instance(0, phases=THREE)
    with pytest.raises(ArityError):
        solve_two_phase(inst)
    with pytest.raises(ArityError):
        solve_multiphase(small_instance(0))


def test_relabeling_invariance():
    for seed in range(10):
        f = instantiate(FieldModel.checkerboard(), seed)
        nu = np.array([0.6, 0.8])
        v1 = solve_two_phase(discretize(CellProblemSpec(8, 4, nu, f, h=0.5, a=0, b=1))).value
        v2 = solve_two_phase(discretize(CellProblemSpec(8, 4, -nu, f, h=0.5, a=1, b=0))).value
        assert v1 == pytest.approx(v2, rel=1e-12)


def test_monotone_under_cost_increase():
    r = np.random.default_rng(0)
    for seed in range(20):
        f = instantiate(FieldModel.checkerboard(), seed)
        inst = discretize(CellProblemSpec(6, 4, E2, f, h=0.5))
        base = solve_two_phase(inst).value
        k = r.integers(inst.n_facets)
        inst.cost[k] *= 1.0 + r.random()
        assert solve_two_phase(inst).value >= base


def test_value_is_energy_of_labeling():
    f = instantiate(FieldModel.checkerboard(), 5)
    inst = discretize(CellProblemSpec(16, 8, (0.6, 0.8), f, h=0.5))
    res = solve_two_phase(inst)
    assert res.value == energy(res.labeling, inst)
    assert res.value <= energy(pure_jump_labeling(inst), inst)
    assert res.quantization_error == inst.n_facets / 2**32


@pytest.mark.parametrize("seed", range(50))
def test_multiphase_against_exhaustive(seed):
    inst = small_instance(seed, shape=(4, 5), phases=THREE)
    assert inst.free.size <= 12
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        heur = solve_multiphase(inst)
    exact = solve_exhaustive(inst)
    assert heur.value >= exact.value - 1e-12
    assert heur.value <= 1.1 * exact.value
    assert all(x >= y for x, y in zip(heur.history, heur.history[1:]))
    assert not heur.exact


def test_multiphase_dominated_phase():
    # the third phase is never pinned and every cost involving it is huge
    for seed in range(5):
        inst = small_instance(seed, phases=THREE)
        inst.cost[:, 2, :] = inst.cost[:, :, 2] = 100.0
        inst.cost[:, 2, 2] = 0.0
        two = small_instance(seed)
        assert solve_multiphase(inst).value == pytest.approx(solve_two_phase(two).value, rel=1e-12)


def test_multiphase_constant_flat():
    for d in (2, 3):
        f = instantiate(FieldModel.constant(1.3, d=d), 0)
        nu = (0.0,) * (d - 1) + (1.0,)
        res = solve(discretize(CellProblemSpec(4, 4, nu, f, h=1.0, phases=THREE)))
        assert res.value == pytest.approx(1.3 * 4 ** (d - 1), rel=1e-12)


def test_nonmetric_flag():
    inst = small_instance(1, shape=(4, 4), phases=THREE)
    inst.cost[:, 0, 2] = inst.cost[:, 2, 0] = 10.0
    with pytest.warns(UserWarning):
        res = solve_multiphase(inst)
    assert res.nonmetric
