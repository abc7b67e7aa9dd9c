import numpy as np
import pytest

from helmdd.coarse import build_focs, build_hocs, galerkin
from helmdd.decomposition import extend, extend_max, partition
from helmdd.discretization import Grid, assemble
from helmdd.gmres import GmresConfig, gmres
from helmdd.linalg import factorize, solve
from helmdd.schwarz import SchwarzPreconditioner


def make_instance(n, k, problem, p, coarse_kind, ratio, overlap="max"):
    grid = Grid(n, "dirichlet" if problem == "MP1" else "sommerfeld")
    prob = assemble(grid, k, problem)
    part = partition(grid, p)
    dec = extend_max(part) if overlap == "max" else extend(part, overlap)
    builder = build_focs if coarse_kind == "FOCS" else build_hocs
    cs = galerkin(builder(grid, ratio), prob.A)
    return prob, dec, cs


def dense_preconditioner(kind, A, dec, cs, weights_before_solve=False):
    """Assemble the preconditioner as an explicit dense matrix."""
    Ad = A.toarray()
    R0 = cs.r0.toarray().astype(Ad.dtype)
    C = R0.T @ np.linalg.solve(R0 @ Ad @ R0.T, R0)
    n = Ad.shape[0]
    local = np.zeros_like(Ad)
    for idx, w in zip(dec.index_sets, dec.weights):
        Ri = np.zeros((len(idx), n), dtype=Ad.dtype)
        Ri[np.arange(len(idx)), idx] = 1.0
        inv = np.linalg.inv(Ri @ Ad @ Ri.T)
        if kind == "AS2":
            local += Ri.T @ inv @ Ri
        elif weights_before_solve:
            local += Ri.T @ inv @ np.diag(w) @ Ri
        else:
            local += Ri.T @ np.diag(w) @ inv @ Ri
    if kind in ("AS2", "SAS2"):
        return C + local
    P0 = np.eye(n, dtype=Ad.dtype) - Ad @ C
    return C + local @ P0


ORACLE_INSTANCES = [
    (9, 2.0, "MP1", 2, "FOCS", 4),
    (9, 2.0, "MP1", 4, "HOCS", 2),
    (9, 3.0, "MP2", 2, "HOCS", 4),
    (13, 5.0, "MP2", 3, "FOCS", 4),
    (13, 5.0, "MP2", 3, "HOCS", 4),
]


@pytest.mark.parametrize("kind", ["AS2", "SAS2", "SHS2"])
@pytest.mark.parametrize("n,k,problem,p,ck,ratio", ORACLE_INSTANCES)
def test_apply_matches_dense_oracle(kind, n, k, problem, p, ck, ratio):
    prob, dec, cs = make_instance(n, k, problem, p, ck, ratio)
    assert prob.A.shape[0] <= 200
    M = SchwarzPreconditioner(kind, prob.A, dec, cs)
    dense = dense_preconditioner(kind, prob.A, dec, cs)
    got = np.column_stack([M.apply(e) for e in np.eye(prob.A.shape[0], dtype=prob.A.dtype)])
    assert np.abs(got - dense).max() < 1e-11 * np.abs(dense).max()


def test_zero_maps_to_zero():
    prob, dec, cs = make_instance(9, 2.0, "MP1", 2, "FOCS", 4)
    M = SchwarzPreconditioner("AS2", prob.A, dec, cs)
    assert np.all(M.apply(np.zeros(49)) == 0.0)


def test_linearity():
    prob, dec, cs = make_instance(9, 3.0, "MP2", 2, "HOCS", 4)
    M = SchwarzPreconditioner("SHS2", prob.A, dec, cs)
    rng = np.random.default_rng(0)
    x = rng.standard_normal(81) + 1j * rng.standard_normal(81)
    y = rng.standard_normal(81) + 1j * rng.standard_normal(81)
    a, b = 0.7 - 0.2j, -1.3 + 0.5j
    lhs = M.apply(a * x + b * y)
    rhs = a * M.apply(x) + b * M.apply(y)
    assert np.abs(lhs - rhs).max() < 1e-13 * np.abs(rhs).max()


def test_as2_is_symmetric_for_real_symmetric_matrix():
    prob, dec, cs = make_instance(9, 2.0, "MP1", 2, "FOCS", 4)
    dense = dense_preconditioner("AS2", prob.A, dec, cs)
    assert np.abs(dense - dense.T).max() < 1e-12 * np.abs(dense).max()


def test_degenerate_single_domain_full_coarse_is_twice_inverse():
    grid = Grid(9, "dirichlet")
    prob = assemble(grid, 2.0, "MP1")
    dec = extend(partition(grid, 1), 0)
    cs = galerkin(build_focs(grid, 1), prob.A)  # ratio 1: coarse space = full space
    M = SchwarzPreconditioner("AS2", prob.A, dec, cs)
    rng = np.random.default_rng(1)
    x = rng.standard_normal(49)
    expected = 2.0 * solve(factorize(prob.A), x)
    assert np.abs(M.apply(x) - expected).max() < 1e-10 * np.abs(expected).max()


def test_no_overlap_makes_scaled_equal_plain():
    grid = Grid(9, "dirichlet")
    prob = assemble(grid, 2.0, "MP1")
    dec = extend(partition(grid, 2), 0)
    cs = galerkin(build_focs(grid, 4), prob.A)
    rng = np.random.default_rng(2)
    x = rng.standard_normal(49)
    plain = SchwarzPreconditioner("AS2", prob.A, dec, cs).apply(x)
    scaled = SchwarzPreconditioner("SAS2", prob.A, dec, cs).apply(x)
    assert np.abs(plain - scaled).max() < 1e-15 * np.abs(plain).max()


def test_full_coarse_space_makes_hybrid_exact():
    grid = Grid(9, "dirichlet")
    prob = assemble(grid, 2.0, "MP1")
    dec = extend_max(partition(grid, 2))
    cs = galerkin(build_focs(grid, 1), prob.A)
    M = SchwarzPreconditioner("SHS2", prob.A, dec, cs)
    rng = np.random.default_rng(3)
    x = rng.standard_normal(49)
    exact = solve(factorize(prob.A), x)
    assert np.abs(M.apply(x) - exact).max() < 1e-9 * np.abs(exact).max()
    report = gmres(prob.A, M, prob.f, GmresConfig())
    assert report.converged and report.iterations == 1


def test_coarse_deflation_annihilates_coarse_residual():
    prob, dec, cs = make_instance(17, 5.0, "MP1", 4, "HOCS", 4)
    from helmdd.coarse import coarse_correct

    rng = np.random.default_rng(4)
    x = rng.standard_normal(prob.A.shape[0])
    deflated = x - prob.A @ coarse_correct(cs, x)
    assert np.linalg.norm(cs.r0 @ deflated) < 1e-9 * np.linalg.norm(cs.r0 @ x)


@pytest.mark.parametrize("kind", ["AS2", "SAS2", "SHS2"])
def test_rescaling_coarse_operator_changes_nothing(kind):
    from dataclasses import replace

    prob, dec, cs = make_instance(13, 5.0, "MP2", 3, "HOCS", 4)
    scaled = galerkin(
        replace(cs, r0=(3.0 * cs.r0).tocsr(), a0=None, a0_factorization=None), prob.A
    )
    rng = np.random.default_rng(5)
    x = rng.standard_normal(prob.A.shape[0]) + 1j * rng.standard_normal(prob.A.shape[0])
    a = SchwarzPreconditioner(kind, prob.A, dec, cs).apply(x)
    b = SchwarzPreconditioner(kind, prob.A, dec, scaled).apply(x)
    assert np.abs(a - b).max() < 1e-12 * np.abs(a).max()


@pytest.mark.parametrize("kind", ["AS2", "SAS2", "SHS2"])
def test_subdomain_order_independence(kind):
    from dataclasses import replace as dreplace

    prob, dec, cs = make_instance(17, 5.0, "MP1", 4, "HOCS", 4)
    rng = np.random.default_rng(6)
    perm = rng.permutation(dec.num_subdomains)
    shuffled = dreplace(
        dec,
        index_sets=[dec.index_sets[i] for i in perm],
        weights=[dec.weights[i] for i in perm],
    )
    x = rng.standard_normal(prob.A.shape[0])
    a = SchwarzPreconditioner(kind, prob.A, dec, cs).apply(x)
    b = SchwarzPreconditioner(kind, prob.A, shuffled, cs).apply(x)
    assert np.abs(a - b).max() < 1e-13 * np.abs(a).max()


def test_weight_placement_switch():
    prob, dec, cs = make_instance(9, 2.0, "MP1", 2, "FOCS", 4)
    M_after = SchwarzPreconditioner("SAS2", prob.A, dec, cs)
    M_before = SchwarzPreconditioner("SAS2", prob.A, dec, cs, weights_before_solve=True)
    dense_after = dense_preconditioner("SAS2", prob.A, dec, cs)
    dense_before = dense_preconditioner("SAS2", prob.A, dec, cs, weights_before_solve=True)
    eye = np.eye(49)
    got_after = np.column_stack([M_after.apply(e) for e in eye])
    got_before = np.column_stack([M_before.apply(e) for e in eye])
    assert np.abs(got_after - dense_after).max() < 1e-11 * np.abs(dense_after).max()
    assert np.abs(got_before - dense_before).max() < 1e-11 * np.abs(dense_before).max()
    # the two placements are genuinely different operators in the overlap
    assert np.abs(dense_after - dense_before).max() > 1e-6


def test_unknown_kind_rejected():
    prob, dec, cs = make_instance(9, 2.0, "MP1", 2, "FOCS", 4)
    with pytest.raises(ValueError):
        SchwarzPreconditioner("RAS", prob.A, dec, cs)


def test_dimension_mismatch_rejected():
    prob, dec, cs = make_instance(9, 2.0, "MP1", 2, "FOCS", 4)
    M = SchwarzPreconditioner("AS2", prob.A, dec, cs)
    with pytest.raises(ValueError):
        M.apply(np.ones(50))
