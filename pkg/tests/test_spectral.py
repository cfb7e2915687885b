import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kinavg.errors import ConfigurationError, NumericError
from kinavg.spectral import (PHYSICAL, X_FOURIER, XV_FOURIER, GridSpec, SpectralField, apply_symbol,
                             bessel_symbol, build_dyadic_partition, bump, commutator_lower_bound,
                             eval_commutator_symbol, eval_m0, from_function, get_symbol, load_field,
                             plateau, random_bandlimited, riesz_symbol, save_field, transform)

GRIDS = [GridSpec(1, 1, 32, 32), GridSpec(1, 1, 16, 64, L_x=2.0, L_v=5.0), GridSpec(2, 2, 8, 8),
         GridSpec(2, 1, 16, 16), GridSpec(1, 2, 16, 8)]


@pytest.mark.parametrize("bad", [dict(N_x=12), dict(N_v=2), dict(n_x=3), dict(L_v=0), dict(dt=-1)])
def test_grid_validation(bad):
    with pytest.raises(ConfigurationError):
        GridSpec(**bad)


def test_grid_lattices():
    g = GridSpec(1, 1, 16, 32, L_x=2.0, L_v=4.0)
    assert g.shape == (16, 32)
    assert g.x_axis[g.N_x // 2] == 0.0
    assert np.isclose(g.dxi, np.pi / 2)
    assert np.allclose(np.sort(np.abs(g.xi_axis))[-1], g.N_x / 2 * g.dxi)
    assert g.nyquist_mask().sum() == 16 + 32 - 1


def test_single_mode_transform():
    g = GridSpec(1, 1, 32, 16)
    k = 3
    f = from_function(g, lambda xs, vs: np.exp(1j * k * xs[0]) + 0 * vs[0])
    F = transform(f, X_FOURIER).data
    idx = np.argmin(np.abs(g.xi_axis - k))
    # unitary transform of e^{ikx} on [-pi, pi): sqrt(2 pi) at xi = k, zero elsewhere
    assert np.allclose(F[idx], np.sqrt(2 * np.pi))
    mask = np.ones(g.N_x, bool)
    mask[idx] = False
    assert np.abs(F[mask]).max() < 1e-12


def test_gaussian_transform_matches_closed_form():
    g = GridSpec(1, 1, 4, 128, L_v=12.0)
    f = from_function(g, lambda xs, vs: np.exp(-vs[0] ** 2 / 2) + 0 * xs[0])
    zeta = g.zeta_axis
    # unitary transform of exp(-v^2/2) is exp(-zeta^2/2), and the x-Fourier step scales by N_x h/sqrt(2pi)
    expect = np.exp(-zeta ** 2 / 2)
    row = transform(f, XV_FOURIER).data[0] / (g.N_x * g.h_x / np.sqrt(2 * np.pi))
    assert np.allclose(row, expect, atol=1e-12)


@pytest.mark.parametrize("grid", GRIDS, ids=str)
def test_parseval_across_representations(grid):
    f = random_bandlimited(grid, np.random.default_rng(1))
    n = [transform(f, r).l2_norm_sq() for r in (PHYSICAL, X_FOURIER, XV_FOURIER)]
    assert np.allclose(n, n[0], rtol=1e-12)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2 ** 31), gi=st.integers(0, len(GRIDS) - 1),
       path=st.permutations([PHYSICAL, X_FOURIER, XV_FOURIER]))
def test_transform_round_trip(seed, gi, path):
    grid = GRIDS[gi]
    rng = np.random.default_rng(seed)
    f = SpectralField(grid, rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape))
    g = f
    for rep in path:
        g = transform(g, rep)
    back = transform(g, PHYSICAL)
    assert np.allclose(back.data, f.data, atol=1e-12)


@pytest.mark.parametrize("grid", GRIDS, ids=str)
def test_commutator_symbol_dominates_lower_bound(grid):
    xi, zeta = grid.xi_vectors(), grid.zeta_vectors()
    sym = eval_commutator_symbol(xi, zeta)
    low = commutator_lower_bound(xi, zeta)
    assert np.count_nonzero(sym < low) == 0


def test_commutator_symbol_is_gradient_of_m0():
    rng = np.random.default_rng(0)
    xi = rng.standard_normal((200, 2))
    zeta = rng.standard_normal((200, 2)) * 3
    h = 1e-6
    grad = np.stack([(eval_m0(xi, zeta + h * e) - eval_m0(xi, zeta - h * e)) / (2 * h) for e in np.eye(2)], -1)
    fd = np.sum(xi * grad, axis=-1)
    assert np.allclose(eval_commutator_symbol(xi, zeta), fd, rtol=1e-6, atol=1e-8)


def test_symbol_values():
    assert eval_m0(np.array([2.0]), np.array([0.0])) == 0.0
    assert np.isclose(eval_m0(np.array([-1.0]), np.array([1.0])), -1 / np.sqrt(2))
    assert eval_commutator_symbol(np.array([0.0]), np.array([5.0])) == 0.0
    assert np.isclose(eval_commutator_symbol(np.array([3.0]), np.array([0.0])), 3.0)
    assert np.isclose(bessel_symbol(np.array([np.sqrt(3.0)]), 2), 0.25)
    assert np.all(riesz_symbol(np.zeros((4, 2))) == 0)
    with pytest.raises(ConfigurationError):
        bessel_symbol(np.array([1.0]), -1)
    with pytest.raises(ConfigurationError):
        get_symbol("nope")


def test_m0_bounded():
    g = GRIDS[2]
    assert np.abs(eval_m0(g.xi_vectors(), g.zeta_vectors())).max() <= 1.0


def test_apply_symbol_zeroes_nyquist():
    g = GridSpec(1, 1, 16, 16)
    f = from_function(g, lambda xs, vs: np.cos(8 * xs[0]) * np.exp(-vs[0] ** 2))
    out = apply_symbol(f, "identity")
    assert np.abs(out.data).max() < 1e-12
    out = apply_symbol(f, "bessel", (2.0,))
    assert out.rep == PHYSICAL


def test_frac_laplacian_second_derivative():
    g = GridSpec(1, 1, 8, 64, L_v=np.pi)
    f = from_function(g, lambda xs, vs: np.sin(3 * vs[0]) + 0 * xs[0])
    out = apply_symbol(f, "frac_laplacian", (2.0,))
    assert np.allclose(out.data, 9 * f.data, atol=1e-12)


def test_apply_symbol_rejects_non_finite():
    from kinavg.spectral.symbols import MultiplierSymbol, XI
    bad = MultiplierSymbol("bad", XI, lambda xi, z, p: 1.0 / np.linalg.norm(xi, axis=-1))
    with pytest.raises(NumericError), np.errstate(divide="ignore"):
        apply_symbol(random_bandlimited(GRIDS[0], np.random.default_rng(0)), bad)


def test_dyadic_bump_support_and_telescoping():
    r = np.linspace(0, 5, 2001)
    b = bump(r)
    assert np.all(b[(r <= 0.5) | (r >= 2)] == 0)
    assert np.all(b >= 0)
    total = sum(bump(r / 2.0 ** k) for k in range(0, 8)) + plateau(2 * r)
    assert np.allclose(total, 1.0, atol=1e-15)


@pytest.mark.parametrize("grid", [GridSpec(1, 1, 64, 8), GridSpec(2, 1, 32, 8), GridSpec(1, 1, 256, 8, L_x=0.5)],
                         ids=str)
def test_partition_sums_to_one(grid):
    part = build_dyadic_partition(grid)
    total = sum(part.weights)
    high = (~grid.xi_nyquist_mask()) & (grid.abs_xi(full=False) >= 1)
    assert np.allclose(total[high], 1.0, atol=1e-14)
    assert np.all(total[~high] == 0)
    assert np.all(part.low_mask == ((~grid.xi_nyquist_mask()) & (grid.abs_xi(full=False) < 1)))


def test_partition_needs_three_octaves():
    with pytest.raises(ConfigurationError):
        build_dyadic_partition(GridSpec(1, 1, 8, 8))


def test_field_io_round_trip(tmp_path):
    g = GridSpec(2, 1, 8, 16, L_x=1.5, L_v=3.0)
    f = transform(random_bandlimited(g, np.random.default_rng(3)), X_FOURIER).replace(t=0.25)
    p = save_field(tmp_path / "f.bin", f)
    back = load_field(p)
    assert back.grid.shape == g.shape and back.rep == X_FOURIER and back.t == 0.25
    assert np.array_equal(back.data, f.data)
    assert (tmp_path / "f.bin.json").exists()
    p.write_bytes(p.read_bytes()[:-16])
    with pytest.raises(ConfigurationError):
        load_field(p)
    (tmp_path / "junk.bin").write_bytes(b"xx")
    with pytest.raises(ConfigurationError):
        load_field(tmp_path / "junk.bin")


def test_field_shape_checked():
    with pytest.raises(ConfigurationError):
        SpectralField(GRIDS[0], np.zeros((4, 4)))
    with pytest.raises(ConfigurationError):
        SpectralField(GRIDS[0], np.zeros(GRIDS[0].shape), rep="polar")
