#ifndef FRACLAP_ENERGY_HPP
#define FRACLAP_ENERGY_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fraclap/dyadic.hpp"
#include "fraclap/haar.hpp"

namespace fraclap {

enum class KernelMode { metric, dyadic };

std::string to_string(KernelMode mode);

/// Parameters of the nonlocal pair kernel.
///   metric: k(a,b) = d(rep_a, rep_b)^-(gamma+2s), Ahlfors models only.
///   dyadic: the hierarchical kernel k(a,b) = sum over cubes Q containing both
///   leaves of (mu(Q)^-2sigma - mu(parent Q)^-2sigma) / (2 mu(Q)), top term
///   mu(top)^-(1+2sigma)/2. This kernel is comparable to delta(a,b)^-(1+2sigma)
///   and is the unique pair kernel whose energy form is diagonalized by the
///   Haar system with eigenvalues mu(Q(h))^-2sigma.
struct KernelParams {
    KernelMode mode = KernelMode::dyadic;
    double s = 0.5;      // metric smoothness, 0 < s < 1
    double sigma = 0.5;  // dyadic smoothness, 0 < sigma < 1

    static KernelParams metric(double s) { return {KernelMode::metric, s, 0.0}; }
    static KernelParams dyadic(double sigma) { return {KernelMode::dyadic, 0.0, sigma}; }

    void validate(const SpaceModel& model) const;
};

/// Evaluates the pair kernel between distinct leaves; immutable and pure.
class PairKernel {
public:
    PairKernel(const DyadicTree& t, const KernelParams& p);

    const DyadicTree& tree() const { return *tree_; }
    const KernelParams& params() const { return params_; }

    double value(int leafA, int leafB) const {
        return params_.mode == KernelMode::metric ? metricValue(leafA, leafB)
                                                  : cumulative_[static_cast<std::size_t>(meetFlat(leafA, leafB))];
    }

private:
    double metricValue(int a, int b) const {
        double dx = repX_[static_cast<std::size_t>(a)] - repX_[static_cast<std::size_t>(b)];
        double dy = repY_[static_cast<std::size_t>(a)] - repY_[static_cast<std::size_t>(b)];
        return std::pow(dx * dx + dy * dy, halfExponent_);
    }
    int meetFlat(int a, int b) const;

    const DyadicTree* tree_;
    KernelParams params_;
    std::vector<double> repX_, repY_;
    double halfExponent_ = 0.0;
    std::vector<double> cumulative_;  // flat per-cube table, level offsets below
    std::vector<int> levelOffset_;
    int branching_ = 0;
};

/// Dense symmetric matrix A with B(u,v) = 2 u^T A v and D u = (A u) ./ mu.
/// Row-major, built once per (tree, params); assembly parallelizes over rows
/// and is deterministic for any worker count.
class PairFormMatrix {
public:
    PairFormMatrix(const DyadicTree& t, const KernelParams& p, int workers = 1);

    int size() const { return n_; }
    double at(int a, int b) const { return a_[static_cast<std::size_t>(a) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(b)]; }
    const DyadicTree& tree() const { return *tree_; }

    /// 2 u^T A v (= the bilinear form).
    double form(const std::vector<double>& u, const std::vector<double>& v) const;
    /// Dense A x for a sparse vector given by (indices, values).
    std::vector<double> applySparse(const std::vector<int>& idx, const std::vector<double>& val) const;

private:
    const DyadicTree* tree_;
    int n_;
    std::vector<double> a_;
};

struct EnergyReport {
    double energyValue = 0.0;
    double l2NormSq = 0.0;
    double sobolevNorm = 0.0;  // sqrt(l2NormSq) + sqrt(energyValue)
};

EnergyReport make_energy_report(double energyValue, double l2NormSq);

/// Double sum over ordered pairs of distinct leaves of
/// (f_a - f_b)^2 k(a,b) mu_a mu_b.
double energy_quadrature(const DyadicTree& t, const CellFunction& f, const KernelParams& p, int workers = 1);

/// sum over wavelets of <f,h>^2 mu(Q(h))^-2sigma; the top scaling coefficient
/// carries no dyadic energy.
double energy_haar(const HaarSystem& sys, const CellFunction& f, double sigma);
double energy_haar(const HaarSystem& sys, const HaarDecomposition& d, double sigma);

/// Comparison diagnostic: the energy with the literal ball-measure kernel
/// mu(B(a, d(a,b)))^-(1+2sigma) in place of the distance power. O(N^2 log N)
/// via per-leaf sorted distance prefix sums; Ahlfors models only.
double energy_ball_measure_kernel(const DyadicTree& t, const CellFunction& f, double sigma);

/// Ordered-pair double sum of (u_a - u_b)(v_a - v_b) k(a,b) mu_a mu_b;
/// symmetric, with bilinear_form(u,u) = energy_quadrature(u).
double bilinear_form(const DyadicTree& t, const CellFunction& u, const CellFunction& v,
                     const KernelParams& p, int workers = 1);

/// Pointwise Euler-Lagrange operator: (D u)(a) = sum_{b != a} (u_a - u_b) k(a,b) mu_b.
/// Satisfies the exact discrete identity B(u,v) = 2 <D u, v>_L2.
CellFunction apply_D2s(const DyadicTree& t, const CellFunction& u, const KernelParams& p, int workers = 1);

struct CoercivityReport {
    double energy = 0.0;      // dyadic energy of f
    double bound = 0.0;       // lambda^-2sigma ||f||^2
    double l2NormSq = 0.0;
    bool pass = false;
    double metricEnergy = -1.0;  // metric-kernel energy at s = sigma*gamma; -1 when unavailable
    double metricRatio = -1.0;   // metricEnergy / l2NormSq
};

/// Checks the exact small-resolution coercivity chain: f must have zero top
/// scaling coefficient and no wavelet content on cubes of measure > lambda;
/// then energy >= lambda^-2sigma ||f||^2 holds term by term with constant 1.
CoercivityReport coercivity_check(const HaarSystem& sys, const CellFunction& f, double lambda, double sigma);

struct PowerIntegralRow {
    double r = 0.0;
    double ratioLocal = 0.0;  // (sum over cells in B(x,r) of d^-(gamma-s) mu) / r^s
    double ratioTail = 0.0;   // (sum over cells with d >= r of d^-(gamma+s) mu) / r^-s
};

/// Local and tail power-of-distance integrals around leaf x, normalized by the
/// powers of r they should be comparable to. The x cell itself is excluded.
/// Tail sums truncate at the window boundary. Requires an Ahlfors model; s >= 0.
std::vector<PowerIntegralRow> power_integral_ratios(const DyadicTree& t, const Address& x, double s,
                                                    const std::vector<double>& rList);

/// max over sampled distinct leaf pairs of |f_a - f_b| / d(rep_a, rep_b)^beta.
/// Exhaustive when nSamples covers all pairs; otherwise seeded sampling.
double holder_seminorm(const DyadicTree& t, const CellFunction& f, double beta, int nSamples,
                       std::uint64_t seed = 1);

struct LipschitzGrowthReport {
    double beta = 0.0;
    double s = 0.0;
    int coarseLevel = 0;
    int fineLevel = 0;
    double energyCoarse = 0.0;
    double energyFine = 0.0;
    double growthFactor = 0.0;  // energyFine / energyCoarse
    bool degenerate = false;    // test function vanished on the window
    bool pass = false;          // growth below 25 percent
};

/// Energy of the compactly supported Hoelder cone u = clamp(1 - d(.,c)/R, 0, 1)^beta
/// at the tree's resolution and two levels finer; requires s < beta on an
/// Ahlfors model.
LipschitzGrowthReport lipschitz_energy_growth(const DyadicTree& t, double beta, double s, int workers = 1);

}  // namespace fraclap

#endif
