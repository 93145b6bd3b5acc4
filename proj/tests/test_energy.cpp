#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "fraclap/energy.hpp"

using namespace fraclap;

namespace {

std::shared_ptr<const SierpinskiModel> sierpinski() { return std::make_shared<SierpinskiModel>(0); }
std::shared_ptr<const HalfLineWeightModel> halfline() { return std::make_shared<HalfLineWeightModel>(0); }

CellFunction random_function(const DyadicTree& t, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    CellFunction f(t);
    for (int i = 0; i < t.leafCount(); ++i) f[i] = u(rng);
    return f;
}

CellFunction ker_function(const HaarSystem& sys, double lambda, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    HaarDecomposition d;
    d.topScalingCoeff = 0.0;
    d.waveletCoeffs.assign(static_cast<std::size_t>(sys.waveletCount()), 0.0);
    for (int id : ker_pilambda_basis(sys, lambda)) d.waveletCoeffs[static_cast<std::size_t>(id)] = u(rng);
    return haar_inverse(sys, d);
}

// brute-force metric-kernel double loop, the independent oracle for the
// quadrature path
double brute_force_metric_energy(const DyadicTree& t, const CellFunction& f, double s) {
    double gamma = *t.model().ahlforsExponent();
    double total = 0.0;
    for (int a = 0; a < t.leafCount(); ++a)
        for (int b = 0; b < t.leafCount(); ++b) {
            if (a == b) continue;
            double d = t.model().distance(t.leaf(a).rep, t.leaf(b).rep);
            double diff = f[a] - f[b];
            total += diff * diff * std::pow(d, -(gamma + 2.0 * s)) * t.leaf(a).measure * t.leaf(b).measure;
        }
    return total;
}

}  // namespace

TEST_CASE("kernel parameters validate against the model") {
    auto s = sierpinski();
    auto h = halfline();
    CHECK_NOTHROW(KernelParams::metric(0.9).validate(*s));
    CHECK_THROWS_AS(KernelParams::metric(0.9).validate(*h), std::invalid_argument);
    CHECK_THROWS_AS(KernelParams::metric(1.5).validate(*s), std::invalid_argument);
    CHECK_THROWS_AS(KernelParams::dyadic(0.0).validate(*s), std::invalid_argument);
    CHECK_NOTHROW(KernelParams::dyadic(0.5).validate(*h));
}

TEST_CASE("constant functions carry no energy") {
    DyadicTree t = build_tree(sierpinski(), 3);
    CellFunction c(t, 4.2);
    CHECK(energy_quadrature(t, c, KernelParams::dyadic(0.5)) == 0.0);
    CHECK(energy_quadrature(t, c, KernelParams::metric(0.7)) == 0.0);
    HaarSystem sys = build_haar_system(t);
    CHECK(energy_haar(sys, c, 0.5) < 1e-28);
}

TEST_CASE("a single wavelet carries dyadic energy mu(Q)^-2sigma") {
    DyadicTree t = build_tree(sierpinski(), 2);
    HaarSystem sys = build_haar_system(t);
    for (int id = 0; id < sys.waveletCount(); ++id) {
        CellFunction h = sys.waveletAsCellFunction(id);
        double expected = 1.0 / sys.baseCubeMeasure(id);  // sigma = 1/2
        CHECK(energy_quadrature(t, h, KernelParams::dyadic(0.5)) ==
              doctest::Approx(expected).epsilon(1e-12));
        CHECK(energy_haar(sys, h, 0.5) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("metric quadrature equals the brute-force double loop") {
    DyadicTree t = build_tree(sierpinski(), 3);
    HaarSystem sys = build_haar_system(t);
    // indicator of cube [1] minus its mean
    CellFunction f(t);
    for (int i = 0; i < t.leafCount(); ++i) f[i] = t.ancestorIndex(i, 1) == 0 ? 1.0 : 0.0;
    double mean = f.mean();
    for (int i = 0; i < t.leafCount(); ++i) f[i] -= mean;

    double fast = energy_quadrature(t, f, KernelParams::metric(0.9));
    double slow = brute_force_metric_energy(t, f, 0.9);
    CHECK(fast > 0.0);
    CHECK(fast == doctest::Approx(slow).epsilon(1e-12));

    std::mt19937_64 rng(12);
    CellFunction g = random_function(t, rng);
    CHECK(energy_quadrature(t, g, KernelParams::metric(0.4)) ==
          doctest::Approx(brute_force_metric_energy(t, g, 0.4)).epsilon(1e-12));
}

TEST_CASE("worker count never changes pair-sum results") {
    DyadicTree t = build_tree(sierpinski(), 3);
    std::mt19937_64 rng(13);
    CellFunction f = random_function(t, rng);
    for (const KernelParams& p : {KernelParams::metric(0.8), KernelParams::dyadic(0.3)}) {
        double one = energy_quadrature(t, f, p, 1);
        CHECK(energy_quadrature(t, f, p, 4) == doctest::Approx(one).epsilon(1e-14));
        // bit-reproducible for a fixed worker count
        CHECK(energy_quadrature(t, f, p, 3) == energy_quadrature(t, f, p, 3));
        CellFunction d1 = apply_D2s(t, f, p, 1);
        CellFunction d4 = apply_D2s(t, f, p, 4);
        for (int i = 0; i < t.leafCount(); ++i) CHECK(d1[i] == d4[i]);
    }
}

TEST_CASE("dyadic quadrature equals the Haar sum on random functions") {
    std::mt19937_64 rng(14);
    for (int model = 0; model < 2; ++model) {
        DyadicTree t = model == 0 ? build_tree(sierpinski(), 4) : build_tree(halfline(), 6);
        HaarSystem sys = build_haar_system(t);
        for (double sigma : {0.2, 0.5, 0.8}) {
            for (int k = 0; k < 20; ++k) {
                CellFunction f = random_function(t, rng);
                double quad = energy_quadrature(t, f, KernelParams::dyadic(sigma));
                double haar = energy_haar(sys, f, sigma);
                CHECK(std::abs(quad - haar) / haar < 1e-8);
            }
        }
    }
}

TEST_CASE("the assembled pair-form matrix reproduces the literal pair sums") {
    DyadicTree t = build_tree(sierpinski(), 3);
    std::mt19937_64 rng(18);
    for (const KernelParams& p : {KernelParams::metric(0.9), KernelParams::dyadic(0.5)}) {
        PairFormMatrix A(t, p, 2);
        for (int k = 0; k < 5; ++k) {
            CellFunction u = random_function(t, rng);
            CellFunction v = random_function(t, rng);
            CHECK(A.form(u.values(), u.values()) ==
                  doctest::Approx(energy_quadrature(t, u, p)).epsilon(1e-12));
            CHECK(A.form(u.values(), v.values()) ==
                  doctest::Approx(bilinear_form(t, u, v, p)).epsilon(1e-12));
            // applySparse against a dense row product
            std::vector<int> idx = {0, 7, 20};
            std::vector<double> val = {1.5, -2.0, 0.25};
            std::vector<double> out = A.applySparse(idx, val);
            for (int a = 0; a < t.leafCount(); a += 5) {
                double expected = 0.0;
                for (std::size_t j = 0; j < idx.size(); ++j) expected += A.at(a, idx[j]) * val[j];
                CHECK(out[static_cast<std::size_t>(a)] == doctest::Approx(expected).epsilon(1e-14));
            }
        }
    }
}

TEST_CASE("the ball-measure kernel energy is comparable to the distance form") {
    DyadicTree t = build_tree(sierpinski(), 4);
    double gamma = *t.model().ahlforsExponent();
    double sigma = 0.3;
    std::mt19937_64 rng(19);
    for (int k = 0; k < 10; ++k) {
        CellFunction f = random_function(t, rng);
        double ball = energy_ball_measure_kernel(t, f, sigma);
        double dist = energy_quadrature(t, f, KernelParams::metric(gamma * sigma));
        CHECK(ball > 0.0);
        double ratio = ball / dist;
        CHECK(ratio > 1e-2);
        CHECK(ratio < 1e2);
    }
    CellFunction c(t, 1.0);
    CHECK(energy_ball_measure_kernel(t, c, sigma) == 0.0);

    DyadicTree h = build_tree(halfline(), 4);
    CHECK_THROWS_AS(energy_ball_measure_kernel(h, CellFunction(h, 1.0), sigma), std::invalid_argument);
}

TEST_CASE("the energy report combines the two norms") {
    EnergyReport r = make_energy_report(4.0, 9.0);
    CHECK(r.sobolevNorm == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(r.energyValue == 4.0);
    CHECK(r.l2NormSq == 9.0);
}

TEST_CASE("bilinear form is symmetric, matches the energy, and is Cauchy-Schwarz bounded") {
    DyadicTree t = build_tree(sierpinski(), 3);
    std::mt19937_64 rng(15);
    for (const KernelParams& p : {KernelParams::metric(0.9), KernelParams::dyadic(0.5)}) {
        for (int k = 0; k < 20; ++k) {
            CellFunction u = random_function(t, rng);
            CellFunction v = random_function(t, rng);
            double buv = bilinear_form(t, u, v, p);
            double bvu = bilinear_form(t, v, u, p);
            double eu = energy_quadrature(t, u, p);
            double ev = energy_quadrature(t, v, p);
            CHECK(buv == doctest::Approx(bvu).epsilon(1e-12));
            CHECK(bilinear_form(t, u, u, p) == doctest::Approx(eu).epsilon(1e-12));
            CHECK(buv * buv <= eu * ev * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("distinct wavelets are bilinearly orthogonal under the dyadic kernel") {
    // includes nested base cubes, where a pointwise power of delta would leave
    // cross terms; the hierarchical kernel diagonalizes exactly
    for (int model = 0; model < 2; ++model) {
        DyadicTree t = model == 0 ? build_tree(sierpinski(), 3) : build_tree(halfline(), 4);
        HaarSystem sys = build_haar_system(t);
        KernelParams p = KernelParams::dyadic(0.4);
        std::vector<int> ids = {0, 1, static_cast<int>(sys.waveletCount() / 2), sys.waveletCount() - 1};
        for (int i : ids)
            for (int j : ids) {
                if (i == j) continue;
                CellFunction hi = sys.waveletAsCellFunction(i);
                CellFunction hj = sys.waveletAsCellFunction(j);
                double diag = energy_quadrature(t, hi, p);
                CHECK(std::abs(bilinear_form(t, hi, hj, p)) < 1e-10 * diag);
            }
    }
}

TEST_CASE("the operator row sums satisfy a hand-computed 3-cell case") {
    DyadicTree t = build_tree(sierpinski(), 1);
    CellFunction u(t);
    u[0] = 2.0 / 3.0;
    u[1] = -1.0 / 3.0;
    u[2] = -1.0 / 3.0;  // indicator of cell 1 minus its mean

    double s = 0.9;
    double gamma = *t.model().ahlforsExponent();
    double mu = 1.0 / 3.0;
    double d12 = 0.5, d13 = 0.5, d23 = std::sqrt(0.5);
    // check the geometry the hand sum relies on
    CHECK(t.model().distance(t.leaf(0).rep, t.leaf(1).rep) == doctest::Approx(d12).epsilon(1e-15));
    CHECK(t.model().distance(t.leaf(0).rep, t.leaf(2).rep) == doctest::Approx(d13).epsilon(1e-15));
    CHECK(t.model().distance(t.leaf(1).rep, t.leaf(2).rep) == doctest::Approx(d23).epsilon(1e-15));

    auto k = [&](double d) { return std::pow(d, -(gamma + 2.0 * s)); };
    CellFunction out = apply_D2s(t, u, KernelParams::metric(s));
    CHECK(out[0] == doctest::Approx((u[0] - u[1]) * k(d12) * mu + (u[0] - u[2]) * k(d13) * mu).epsilon(1e-14));
    CHECK(out[1] == doctest::Approx((u[1] - u[0]) * k(d12) * mu + (u[1] - u[2]) * k(d23) * mu).epsilon(1e-14));
    CHECK(out[2] == doctest::Approx((u[2] - u[0]) * k(d13) * mu + (u[2] - u[1]) * k(d23) * mu).epsilon(1e-14));

    CellFunction c(t, 7.0);
    CellFunction zero = apply_D2s(t, c, KernelParams::metric(s));
    for (int i = 0; i < 3; ++i) CHECK(zero[i] == 0.0);
}

TEST_CASE("the discrete duality identity holds for both kernels") {
    DyadicTree t = build_tree(sierpinski(), 3);
    std::mt19937_64 rng(16);
    for (const KernelParams& p : {KernelParams::metric(0.9), KernelParams::dyadic(0.5)}) {
        for (int k = 0; k < 30; ++k) {
            CellFunction u = random_function(t, rng);
            CellFunction v = random_function(t, rng);
            double b = bilinear_form(t, u, v, p);
            double dual = 2.0 * apply_D2s(t, u, p).innerProduct(v);
            CHECK(std::abs(b - dual) <= 1e-12 * std::max(std::abs(b), std::abs(dual)));
        }
    }
}

TEST_CASE("coercivity holds with constant one on the small-cube subspace") {
    DyadicTree t = build_tree(sierpinski(), 4);
    HaarSystem sys = build_haar_system(t);

    // equality edge: one wavelet whose cube measure equals lambda
    double lambda = t.cube(1, 0).measure;
    std::vector<int> levelOne = ker_pilambda_basis(sys, lambda);
    int edgeId = -1;
    for (int id : levelOne)
        if (sys.wavelet(id).level == 1) { edgeId = id; break; }
    REQUIRE(edgeId >= 0);
    CellFunction h = sys.waveletAsCellFunction(edgeId);
    CoercivityReport edge = coercivity_check(sys, h, lambda, 0.5);
    CHECK(edge.pass);
    CHECK(edge.energy == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(edge.bound == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(edge.energy >= edge.bound);

    CellFunction zero(t);
    CoercivityReport z = coercivity_check(sys, zero, lambda, 0.5);
    CHECK(z.pass);
    CHECK(z.energy == 0.0);
    CHECK(z.bound == 0.0);

    std::mt19937_64 rng(17);
    for (int k = 0; k < 100; ++k) {
        CellFunction f = ker_function(sys, 1.0 / 9.0, rng);
        CoercivityReport r = coercivity_check(sys, f, 1.0 / 9.0, 0.4);
        CHECK(r.pass);
        CHECK(r.energy >= r.bound);
    }

    // a function with coarse content is rejected, naming the coefficient
    CellFunction coarse = sys.waveletAsCellFunction(0);  // level-0 wavelet
    CHECK_THROWS_WITH_AS(coercivity_check(sys, coarse, 1.0 / 9.0, 0.4),
                         doctest::Contains("outside the coercivity subspace"), std::invalid_argument);
}

TEST_CASE("power integral ratios stay banded and respect the domain") {
    DyadicTree t = build_tree(sierpinski(), 6);
    Address x;
    for (int i = 0; i < 6; ++i) x = x.child(1);
    std::vector<double> rList = {0.5, 0.25, 0.125};
    for (double s : {0.2, 0.5}) {
        auto rows = power_integral_ratios(t, x, s, rList);
        double lo = 1e300, hi = 0.0;
        for (const auto& row : rows) {
            lo = std::min(lo, row.ratioLocal);
            hi = std::max(hi, row.ratioLocal);
            CHECK(row.ratioLocal > 0.0);
            CHECK(row.ratioTail > 0.0);
        }
        CHECK(hi / lo < 10.0);
    }

    CHECK_THROWS_WITH_AS(power_integral_ratios(t, x, 0.5, {1e-6}), doctest::Contains("resolvable range"),
                         std::invalid_argument);
    DyadicTree h = build_tree(halfline(), 4);
    Address hx = h.leaf(0).address;
    CHECK_THROWS_AS(power_integral_ratios(h, hx, 0.5, {0.25}), std::invalid_argument);
    CHECK_THROWS_AS(power_integral_ratios(t, x, -0.1, {0.25}), std::invalid_argument);
}

TEST_CASE("Hoelder seminorms detect flatness and unit-slope profiles") {
    DyadicTree t = build_tree(sierpinski(), 4);
    CellFunction c(t, 3.0);
    CHECK(holder_seminorm(t, c, 0.7, 1 << 20) == 0.0);

    // f = d(., p)^beta probed at the representative of leaf 0
    double beta = 0.7;
    Point p = t.leaf(0).rep;
    CellFunction f(t);
    for (int i = 0; i < t.leafCount(); ++i) f[i] = std::pow(t.model().distance(t.leaf(i).rep, p), beta);
    double exhaustive = holder_seminorm(t, f, beta, 1 << 20);
    CHECK(exhaustive == doctest::Approx(1.0).epsilon(2.0));  // within a factor 3
    CHECK(exhaustive >= 1.0 - 1e-12);

    double sampled = holder_seminorm(t, f, beta, 2000, 4);
    CHECK(sampled <= exhaustive * (1.0 + 1e-12));
    CHECK(sampled > 0.0);
}

TEST_CASE("compactly supported Hoelder cones have stable energy under refinement") {
    DyadicTree t = build_tree(sierpinski(), 4);
    LipschitzGrowthReport rep = lipschitz_energy_growth(t, 1.0, 0.5);
    CHECK_FALSE(rep.degenerate);
    CHECK(rep.energyCoarse > 0.0);
    CHECK(rep.pass);
    CHECK(rep.growthFactor < 1.25);

    CHECK_THROWS_AS(lipschitz_energy_growth(t, 0.6, 0.9), std::invalid_argument);
    CHECK_THROWS_AS(lipschitz_energy_growth(t, 0.6, 0.6), std::invalid_argument);
    DyadicTree h = build_tree(halfline(), 4);
    CHECK_THROWS_AS(lipschitz_energy_growth(h, 1.0, 0.5), std::invalid_argument);
}
