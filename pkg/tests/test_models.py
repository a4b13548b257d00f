import math

import numpy as np
import pytest

from cecluster.linalg import Moments, moments_of, sym_eigenvalues
from cecluster.models import (
    Family,
    FamilySpec,
    cross_entropy,
    fitted_covariance,
    gaussian_density,
    pack_families,
)


def random_pd_moments(rng, dim):
    pts = rng.normal(size=(dim + 5 + int(rng.integers(0, 30)), dim))
    pts = pts @ (rng.normal(size=(dim, dim)) + np.eye(dim)) + rng.normal(size=dim) * 3.0
    return moments_of(pts)


ALL = FamilySpec.all()
SPH = FamilySpec.spherical()
DIAG = FamilySpec.diagonal()


class TestSpecConstruction:
    def test_names_round_trip(self):
        for name in ["all", "spherical", "diagonal"]:
            assert FamilySpec.from_name(name).name == name
        assert FamilySpec.from_name("fixedr", 0.01).name == "fixedr"
        assert FamilySpec.from_name("covariance", np.eye(2)).name == "covariance"
        assert FamilySpec.from_name("eigenvalues", [1.0, 2.0]).name == "eigenvalues"
        # alias used by mixed-model call sites
        assert FamilySpec.from_name("eigen", [1.0, 2.0]).kind is Family.FIXED_EIGENVALUES

    def test_unknown_name(self):
        with pytest.raises(ValueError, match="unknown model type"):
            FamilySpec.from_name("banana")

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            FamilySpec.fixed_radius(0.0)
        with pytest.raises(ValueError):
            FamilySpec.fixed_radius(-1.0)
        with pytest.raises(ValueError, match="positive definite"):
            FamilySpec.fixed_covariance(np.zeros((2, 2)))
        with pytest.raises(ValueError, match="positive"):
            FamilySpec.fixed_eigenvalues([1.0, -2.0])
        with pytest.raises(ValueError, match="takes no parameter"):
            FamilySpec.from_name("all", 3.0)

    def test_lambdas_stored_ascending(self):
        spec = FamilySpec.fixed_eigenvalues([9000.0, 8.0])
        assert np.array_equal(spec.lambdas, [8.0, 9000.0])

    def test_dimension_mismatch_rejected(self):
        spec = FamilySpec.fixed_eigenvalues([1.0, 2.0, 3.0])
        m = moments_of(np.random.default_rng(0).normal(size=(10, 2)))
        with pytest.raises(ValueError, match="dimension"):
            cross_entropy(spec, m)

    def test_equality_by_kind_and_parameters(self):
        assert FamilySpec.all() == FamilySpec.all()
        assert FamilySpec.fixed_radius(2.0) == FamilySpec.fixed_radius(2.0)
        assert FamilySpec.fixed_radius(2.0) != FamilySpec.fixed_radius(3.0)
        assert FamilySpec.all() != FamilySpec.spherical()


class TestCrossEntropy:
    def test_unit_variance_1d(self):
        m = Moments(10, np.zeros(1), np.array([[1.0]]))
        assert cross_entropy(ALL, m) == pytest.approx(0.5 * math.log(2 * math.pi * math.e), abs=1e-12)
        assert cross_entropy(ALL, m) == pytest.approx(1.418939, abs=1e-6)

    def test_fixed_radius_at_mean_trace_equals_spherical(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            dim = int(rng.integers(1, 6))
            m = random_pd_moments(rng, dim)
            r = float(np.trace(m.cov)) / dim
            got = cross_entropy(FamilySpec.fixed_radius(r), m)
            want = cross_entropy(SPH, m)
            assert got == pytest.approx(want, rel=1e-12, abs=1e-12)

    def test_fixed_covariance_at_scatter_equals_all(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            dim = int(rng.integers(1, 6))
            m = random_pd_moments(rng, dim)
            got = cross_entropy(FamilySpec.fixed_covariance(m.cov), m)
            want = cross_entropy(ALL, m)
            assert got == pytest.approx(want, rel=1e-12, abs=1e-10)

    def test_fixed_eigenvalues_at_scatter_spectrum_equals_all(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            dim = int(rng.integers(1, 6))
            m = random_pd_moments(rng, dim)
            lam = sym_eigenvalues(m.cov)
            got = cross_entropy(FamilySpec.fixed_eigenvalues(lam), m)
            want = cross_entropy(ALL, m)
            assert got == pytest.approx(want, rel=1e-10, abs=1e-10)

    def test_diagonal_dominates_all(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            m = random_pd_moments(rng, int(rng.integers(1, 6)))
            assert cross_entropy(DIAG, m) >= cross_entropy(ALL, m) - 1e-10

    def test_all_is_global_minimum(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            dim = int(rng.integers(1, 5))
            m = random_pd_moments(rng, dim)
            base = cross_entropy(ALL, m)
            others = [
                SPH,
                DIAG,
                FamilySpec.fixed_radius(float(rng.uniform(0.1, 10.0))),
                FamilySpec.fixed_covariance(random_pd_moments(rng, dim).cov + np.eye(dim)),
                FamilySpec.fixed_eigenvalues(np.sort(rng.uniform(0.1, 10.0, size=dim))),
            ]
            for spec in others:
                assert cross_entropy(spec, m) >= base - 1e-10

    def test_family_optimum_equals_fixed_covariance_at_fit(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            dim = int(rng.integers(1, 5))
            m = random_pd_moments(rng, dim)
            for spec in [
                ALL,
                SPH,
                DIAG,
                FamilySpec.fixed_radius(0.5),
                FamilySpec.fixed_eigenvalues(np.sort(rng.uniform(0.5, 5.0, size=dim))),
            ]:
                fit = fitted_covariance(spec, m)
                if sym_eigenvalues(fit).min() <= 1e-12:
                    continue
                via_fixed = cross_entropy(FamilySpec.fixed_covariance(fit), m)
                assert cross_entropy(spec, m) == pytest.approx(via_fixed, rel=1e-10, abs=1e-10)

    def test_translation_invariance(self):
        rng = np.random.default_rng(7)
        pts = rng.normal(size=(40, 3))
        shifted = pts + np.array([100.0, -40.0, 7.0])
        for spec in [ALL, SPH, DIAG, FamilySpec.fixed_radius(1.0)]:
            a = cross_entropy(spec, moments_of(pts))
            b = cross_entropy(spec, moments_of(shifted))
            assert a == pytest.approx(b, rel=1e-9, abs=1e-9)

    def test_degeneracy_sentinels(self):
        flat = moments_of(np.array([[1.0, 2.0], [1.0, 2.0], [1.0, 2.0]]))
        assert cross_entropy(ALL, flat) == math.inf
        assert cross_entropy(SPH, flat) == math.inf
        assert cross_entropy(DIAG, flat) == math.inf
        # collinear but not constant: determinant and one diagonal entry vanish
        line = moments_of(np.array([[0.0, 1.0], [1.0, 1.0], [2.0, 1.0]]))
        assert cross_entropy(ALL, line) == math.inf
        assert cross_entropy(DIAG, line) == math.inf
        assert cross_entropy(SPH, line) < math.inf
        # fixed-parameter families stay finite on degenerate scatter
        assert cross_entropy(FamilySpec.fixed_radius(1.0), flat) < math.inf
        assert cross_entropy(FamilySpec.fixed_covariance(np.eye(2)), flat) < math.inf
        assert cross_entropy(FamilySpec.fixed_eigenvalues([1.0, 2.0]), flat) < math.inf

    def test_empty_sample_rejected(self):
        with pytest.raises(ValueError):
            cross_entropy(ALL, Moments.empty(2))


class TestFittedCovariance:
    def test_spherical_averages_trace(self):
        m = Moments(5, np.zeros(2), np.diag([1.0, 3.0]))
        assert np.allclose(fitted_covariance(SPH, m), np.diag([2.0, 2.0]))

    def test_fixed_radius_ignores_data(self):
        rng = np.random.default_rng(8)
        spec = FamilySpec.fixed_radius(0.01)
        for _ in range(5):
            m = random_pd_moments(rng, 2)
            assert np.array_equal(fitted_covariance(spec, m), 0.01 * np.eye(2))

    def test_all_returns_scatter_verbatim(self):
        rng = np.random.default_rng(9)
        m = random_pd_moments(rng, 3)
        assert np.array_equal(fitted_covariance(ALL, m), m.cov)

    def test_diagonal_zeroes_off_diagonal(self):
        rng = np.random.default_rng(10)
        m = random_pd_moments(rng, 3)
        fit = fitted_covariance(DIAG, m)
        assert np.array_equal(np.diagonal(fit), np.diagonal(m.cov))
        assert np.all(fit[~np.eye(3, dtype=bool)] == 0.0)

    def test_fixed_eigenvalues_spectrum_and_basis(self):
        rng = np.random.default_rng(11)
        lam = np.array([0.5, 2.0, 7.0])
        spec = FamilySpec.fixed_eigenvalues(lam)
        for _ in range(20):
            m = random_pd_moments(rng, 3)
            fit = fitted_covariance(spec, m)
            assert np.allclose(sym_eigenvalues(fit), lam, rtol=1e-10, atol=1e-10)
            # commutes with the scatter: same eigenbasis
            assert np.allclose(fit @ m.cov, m.cov @ fit, atol=1e-8 * abs(m.cov).max())


class TestGaussianDensity:
    def test_standard_normal_peaks(self):
        assert gaussian_density(np.zeros(1), np.eye(1), np.zeros(1)) == pytest.approx(
            1.0 / math.sqrt(2 * math.pi), abs=1e-12
        )
        assert gaussian_density(np.zeros(2), np.eye(2), np.zeros(2)) == pytest.approx(
            1.0 / (2 * math.pi), abs=1e-12
        )

    def test_singular_covariance_raises(self):
        with pytest.raises(ValueError, match="singular"):
            gaussian_density(np.zeros(2), np.zeros((2, 2)), np.zeros(2))

    def test_quadrature_normalization_3d(self):
        rng = np.random.default_rng(12)
        a = rng.normal(size=(3, 3))
        cov = a @ a.T + 0.5 * np.eye(3)
        mean = rng.normal(size=3)
        top = math.sqrt(sym_eigenvalues(cov)[-1])
        grid = np.linspace(-5.5 * top, 5.5 * top, 45)
        h = grid[1] - grid[0]
        total = 0.0
        for x in grid:
            for y in grid:
                for z in grid:
                    total += gaussian_density(mean, cov, mean + np.array([x, y, z]))
        assert total * h**3 == pytest.approx(1.0, abs=1e-3)


class TestPackFamilies:
    def kernel_style(self, kind, const, coeff, isig, ilam, cov):
        # mirrors how the sweep kernels consume the packed constants
        if kind == 0:
            return const + 0.5 * math.log(np.linalg.det(cov))
        if kind == 1:
            return const + coeff * math.log(np.trace(cov))
        if kind == 2:
            return const + coeff * np.trace(cov)
        if kind == 3:
            return const + 0.5 * np.log(np.diagonal(cov)).sum()
        if kind == 4:
            return const + 0.5 * (isig * cov).sum()
        return const + 0.5 * (sym_eigenvalues(cov) * ilam).sum()

    def test_packed_constants_reproduce_cross_entropy(self):
        rng = np.random.default_rng(13)
        dim = 3
        families = [
            ALL,
            SPH,
            FamilySpec.fixed_radius(0.7),
            DIAG,
            FamilySpec.fixed_covariance(np.diag([1.0, 2.0, 3.0])),
            FamilySpec.fixed_eigenvalues([0.5, 1.5, 4.0]),
        ]
        pack = pack_families(families, dim)
        assert list(pack["kind"]) == [0, 1, 2, 3, 4, 5]
        for _ in range(50):
            m = random_pd_moments(rng, dim)
            for i, spec in enumerate(families):
                got = self.kernel_style(
                    pack["kind"][i], pack["const"][i], pack["coeff"][i], pack["isig"][i], pack["ilam"][i], m.cov
                )
                assert got == pytest.approx(cross_entropy(spec, m), rel=1e-12, abs=1e-12)

    def test_pack_checks_dimensions(self):
        with pytest.raises(ValueError, match="dimension"):
            pack_families([FamilySpec.fixed_eigenvalues([1.0, 2.0])], 3)
