#include "fraclap/energy.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>

namespace fraclap {

namespace {

int clamp_workers(int workers, int n) {
    if (workers < 1) workers = 1;
    return std::min(workers, std::max(1, n));
}

// Partitions rows [0, n) into contiguous chunks, one partial sum per chunk,
// combined in chunk order so the result is reproducible per worker count.
template <typename RowSum>
double chunked_sum(int n, int workers, RowSum rowSum) {
    workers = clamp_workers(workers, n);
    if (workers == 1) {
        double s = 0.0;
        for (int a = 0; a < n; ++a) s += rowSum(a);
        return s;
    }
    std::vector<double> partial(static_cast<std::size_t>(workers), 0.0);
    std::vector<std::thread> pool;
    int chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        int begin = w * chunk, end = std::min(n, begin + chunk);
        pool.emplace_back([&, begin, end, w] {
            double s = 0.0;
            for (int a = begin; a < end; ++a) s += rowSum(a);
            partial[static_cast<std::size_t>(w)] = s;
        });
    }
    for (auto& th : pool) th.join();
    double s = 0.0;
    for (double p : partial) s += p;
    return s;
}

template <typename RowFn>
void parallel_rows(int n, int workers, RowFn rowFn) {
    workers = clamp_workers(workers, n);
    if (workers == 1) {
        for (int a = 0; a < n; ++a) rowFn(a);
        return;
    }
    std::vector<std::thread> pool;
    int chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        int begin = w * chunk, end = std::min(n, begin + chunk);
        pool.emplace_back([&, begin, end] {
            for (int a = begin; a < end; ++a) rowFn(a);
        });
    }
    for (auto& th : pool) th.join();
}

void check_function(const DyadicTree& t, const CellFunction& f) {
    if (!f.attached() || !f.tree().sameTree(t)) throw std::invalid_argument("function built on a different tree");
}

}  // namespace

std::string to_string(KernelMode mode) { return mode == KernelMode::metric ? "metric" : "dyadic"; }

void KernelParams::validate(const SpaceModel& model) const {
    if (mode == KernelMode::metric) {
        if (!model.ahlforsExponent())
            throw std::invalid_argument("metric kernel needs an Ahlfors exponent; the " + model.name() +
                                        " model has none");
        if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("metric smoothness s must lie in (0,1)");
    } else {
        if (!(sigma > 0.0 && sigma < 1.0)) throw std::invalid_argument("dyadic smoothness sigma must lie in (0,1)");
    }
}

PairKernel::PairKernel(const DyadicTree& t, const KernelParams& p) : tree_(&t), params_(p) {
    p.validate(t.model());
    branching_ = t.model().maxBranching();
    int n = t.leafCount();
    repX_.resize(static_cast<std::size_t>(n));
    repY_.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        repX_[static_cast<std::size_t>(i)] = t.leaf(i).rep.x;
        repY_[static_cast<std::size_t>(i)] = t.leaf(i).rep.y;
    }
    if (p.mode == KernelMode::metric) {
        halfExponent_ = -0.5 * (*t.model().ahlforsExponent() + 2.0 * p.s);
        return;
    }
    // cumulative hierarchical coefficients K_Q = sum over ancestors Q' >= Q of
    // (mu(Q')^-2s - mu(parent Q')^-2s) / (2 mu(Q')), top term mu^-2s/(2 mu)
    double e = -2.0 * p.sigma;
    levelOffset_.resize(static_cast<std::size_t>(t.maxLevel()) + 1);
    int total = 0;
    for (int j = 0; j <= t.maxLevel(); ++j) {
        levelOffset_[static_cast<std::size_t>(j)] = total;
        total += t.cubeCount(j);
    }
    cumulative_.resize(static_cast<std::size_t>(total));
    double muTop = t.cube(0, 0).measure;
    cumulative_[0] = std::pow(muTop, e) / (2.0 * muTop);
    for (int j = 1; j <= t.maxLevel(); ++j) {
        for (int i = 0; i < t.cubeCount(j); ++i) {
            const auto& q = t.cube(j, i);
            double muParent = t.cube(j - 1, q.parent).measure;
            double own = (std::pow(q.measure, e) - std::pow(muParent, e)) / (2.0 * q.measure);
            cumulative_[static_cast<std::size_t>(levelOffset_[static_cast<std::size_t>(j)] + i)] =
                cumulative_[static_cast<std::size_t>(levelOffset_[static_cast<std::size_t>(j) - 1] + q.parent)] + own;
        }
    }
}

int PairKernel::meetFlat(int a, int b) const {
    int j = tree_->maxLevel();
    while (a != b) {
        a /= branching_;
        b /= branching_;
        --j;
    }
    return levelOffset_[static_cast<std::size_t>(j)] + a;
}

PairFormMatrix::PairFormMatrix(const DyadicTree& t, const KernelParams& p, int workers) : tree_(&t) {
    PairKernel kernel(t, p);
    n_ = t.leafCount();
    a_.assign(static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_), 0.0);
    std::vector<double> mu(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) mu[static_cast<std::size_t>(i)] = t.leaf(i).measure;
    parallel_rows(n_, workers, [&](int a) {
        double diag = 0.0;
        std::size_t row = static_cast<std::size_t>(a) * static_cast<std::size_t>(n_);
        for (int b = 0; b < n_; ++b) {
            if (b == a) continue;
            double k = kernel.value(a, b) * mu[static_cast<std::size_t>(b)];
            a_[row + static_cast<std::size_t>(b)] = -k * mu[static_cast<std::size_t>(a)];
            diag += k;
        }
        a_[row + static_cast<std::size_t>(a)] = diag * mu[static_cast<std::size_t>(a)];
    });
}

double PairFormMatrix::form(const std::vector<double>& u, const std::vector<double>& v) const {
    double s = 0.0;
    for (int a = 0; a < n_; ++a) {
        std::size_t row = static_cast<std::size_t>(a) * static_cast<std::size_t>(n_);
        double rv = 0.0;
        for (int b = 0; b < n_; ++b) rv += a_[row + static_cast<std::size_t>(b)] * v[static_cast<std::size_t>(b)];
        s += u[static_cast<std::size_t>(a)] * rv;
    }
    return 2.0 * s;
}

std::vector<double> PairFormMatrix::applySparse(const std::vector<int>& idx, const std::vector<double>& val) const {
    std::vector<double> out(static_cast<std::size_t>(n_), 0.0);
    for (std::size_t j = 0; j < idx.size(); ++j) {
        double v = val[j];
        std::size_t col = static_cast<std::size_t>(idx[j]);
        for (int a = 0; a < n_; ++a)
            out[static_cast<std::size_t>(a)] += a_[static_cast<std::size_t>(a) * static_cast<std::size_t>(n_) + col] * v;
    }
    return out;
}

EnergyReport make_energy_report(double energyValue, double l2NormSq) {
    EnergyReport r;
    r.energyValue = energyValue;
    r.l2NormSq = l2NormSq;
    r.sobolevNorm = std::sqrt(l2NormSq) + std::sqrt(energyValue);
    return r;
}

double energy_quadrature(const DyadicTree& t, const CellFunction& f, const KernelParams& p, int workers) {
    check_function(t, f);
    PairKernel kernel(t, p);
    int n = t.leafCount();
    return chunked_sum(n, workers, [&](int a) {
        double fa = f[a], mua = t.leaf(a).measure, s = 0.0;
        for (int b = 0; b < n; ++b) {
            if (b == a) continue;
            double d = fa - f[b];
            s += d * d * kernel.value(a, b) * mua * t.leaf(b).measure;
        }
        return s;
    });
}

double energy_haar(const HaarSystem& sys, const HaarDecomposition& d, double sigma) {
    if (!(sigma > 0.0 && sigma < 1.0)) throw std::invalid_argument("dyadic smoothness sigma must lie in (0,1)");
    double e = 0.0;
    for (int id = 0; id < sys.waveletCount(); ++id) {
        double c = d.waveletCoeffs[static_cast<std::size_t>(id)];
        e += c * c * std::pow(sys.baseCubeMeasure(id), -2.0 * sigma);
    }
    return e;
}

double energy_haar(const HaarSystem& sys, const CellFunction& f, double sigma) {
    return energy_haar(sys, haar_forward(sys, f), sigma);
}

double energy_ball_measure_kernel(const DyadicTree& t, const CellFunction& f, double sigma) {
    check_function(t, f);
    if (!t.model().ahlforsExponent())
        throw std::invalid_argument("ball-measure kernel needs an Ahlfors exponent; the " + t.model().name() +
                                    " model has none");
    if (!(sigma > 0.0 && sigma < 1.0)) throw std::invalid_argument("smoothness sigma must lie in (0,1)");
    const SpaceModel& model = t.model();
    int n = t.leafCount();
    double e = -(1.0 + 2.0 * sigma);

    double total = 0.0;
    std::vector<std::pair<double, double>> byDistance(static_cast<std::size_t>(n));
    std::vector<double> prefix(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b)
            byDistance[static_cast<std::size_t>(b)] = {model.distance(t.leaf(a).rep, t.leaf(b).rep),
                                                       t.leaf(b).measure};
        std::sort(byDistance.begin(), byDistance.end());
        double run = 0.0;
        for (int k = 0; k < n; ++k) {
            run += byDistance[static_cast<std::size_t>(k)].second;
            prefix[static_cast<std::size_t>(k)] = run;
        }
        // mu(B(a, r)) with the open ball: measures of leaves strictly closer than r
        auto ballMeasure = [&](double r) {
            auto it = std::lower_bound(byDistance.begin(), byDistance.end(), std::make_pair(r, 0.0));
            std::size_t idx = static_cast<std::size_t>(it - byDistance.begin());
            return idx == 0 ? 0.0 : prefix[idx - 1];
        };
        double fa = f[a], mua = t.leaf(a).measure;
        for (int b = 0; b < n; ++b) {
            if (b == a) continue;
            double d = model.distance(t.leaf(a).rep, t.leaf(b).rep);
            double diff = fa - f[b];
            total += diff * diff * std::pow(ballMeasure(d), e) * mua * t.leaf(b).measure;
        }
    }
    return total;
}

double bilinear_form(const DyadicTree& t, const CellFunction& u, const CellFunction& v,
                     const KernelParams& p, int workers) {
    check_function(t, u);
    check_function(t, v);
    PairKernel kernel(t, p);
    int n = t.leafCount();
    return chunked_sum(n, workers, [&](int a) {
        double ua = u[a], va = v[a], mua = t.leaf(a).measure, s = 0.0;
        for (int b = 0; b < n; ++b) {
            if (b == a) continue;
            s += (ua - u[b]) * (va - v[b]) * kernel.value(a, b) * mua * t.leaf(b).measure;
        }
        return s;
    });
}

CellFunction apply_D2s(const DyadicTree& t, const CellFunction& u, const KernelParams& p, int workers) {
    check_function(t, u);
    PairKernel kernel(t, p);
    int n = t.leafCount();
    CellFunction out(t);
    parallel_rows(n, workers, [&](int a) {
        double ua = u[a], s = 0.0;
        for (int b = 0; b < n; ++b) {
            if (b == a) continue;
            s += (ua - u[b]) * kernel.value(a, b) * t.leaf(b).measure;
        }
        out[a] = s;
    });
    return out;
}

CoercivityReport coercivity_check(const HaarSystem& sys, const CellFunction& f, double lambda, double sigma) {
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    if (!(sigma > 0.0 && sigma < 1.0)) throw std::invalid_argument("dyadic smoothness sigma must lie in (0,1)");
    HaarDecomposition d = haar_forward(sys, f);

    double total = d.topScalingCoeff * d.topScalingCoeff;
    for (double c : d.waveletCoeffs) total += c * c;
    double precTol = 1e-10 * std::sqrt(total);

    if (std::abs(d.topScalingCoeff) > precTol)
        throw std::invalid_argument("function is outside the coercivity subspace: top scaling coefficient " +
                                    std::to_string(d.topScalingCoeff) + " is nonzero");
    for (int id = 0; id < sys.waveletCount(); ++id) {
        double c = d.waveletCoeffs[static_cast<std::size_t>(id)];
        if (sys.baseCubeMeasure(id) > lambda && std::abs(c) > precTol) {
            const auto& h = sys.wavelet(id);
            throw std::invalid_argument(
                "function is outside the coercivity subspace: coefficient " + std::to_string(c) +
                " on cube level " + std::to_string(h.level) + " index " + std::to_string(h.cubeIndex) +
                " (measure " + std::to_string(sys.baseCubeMeasure(id)) + " > lambda)");
        }
    }

    CoercivityReport r;
    double kLambda = std::pow(lambda, -2.0 * sigma);
    double slack = 0.0;
    for (int id = 0; id < sys.waveletCount(); ++id) {
        if (sys.baseCubeMeasure(id) > lambda) continue;
        double c = d.waveletCoeffs[static_cast<std::size_t>(id)];
        double kMu = std::pow(sys.baseCubeMeasure(id), -2.0 * sigma);
        r.energy += c * c * kMu;
        r.l2NormSq += c * c;
        slack += c * c * (kMu - kLambda);
    }
    r.bound = kLambda * r.l2NormSq;
    r.pass = slack >= 0.0;

    const SpaceModel& model = sys.tree().model();
    if (auto gamma = model.ahlforsExponent()) {
        double s = sigma * *gamma;
        if (s > 0.0 && s < 1.0) {
            r.metricEnergy = energy_quadrature(sys.tree(), f, KernelParams::metric(s));
            r.metricRatio = r.l2NormSq > 0.0 ? r.metricEnergy / r.l2NormSq : 0.0;
        }
    }
    return r;
}

std::vector<PowerIntegralRow> power_integral_ratios(const DyadicTree& t, const Address& x, double s,
                                                    const std::vector<double>& rList) {
    const SpaceModel& model = t.model();
    auto gammaOpt = model.ahlforsExponent();
    if (!gammaOpt)
        throw std::invalid_argument("power integral ratios need an Ahlfors exponent; the " + model.name() +
                                    " model has none");
    if (s < 0.0) throw std::invalid_argument("power offset s must be >= 0");
    double gamma = *gammaOpt;
    int xi = t.leafIndexOf(x);
    double rMin = model.cellDiameter(t.leaf(xi).address);
    double rMax = model.topDiameter();

    std::vector<PowerIntegralRow> rows;
    for (double r : rList) {
        if (r < rMin || r > rMax)
            throw std::invalid_argument("radius " + std::to_string(r) + " outside resolvable range [" +
                                        std::to_string(rMin) + ", " + std::to_string(rMax) + "]");
        PowerIntegralRow row;
        row.r = r;
        double local = 0.0, tail = 0.0;
        for (int b = 0; b < t.leafCount(); ++b) {
            if (b == xi) continue;  // d = 0 singularity is the quadrature error
            double d = model.distance(t.leaf(xi).rep, t.leaf(b).rep);
            if (d < r) local += std::pow(d, -(gamma - s)) * t.leaf(b).measure;
            else tail += std::pow(d, -(gamma + s)) * t.leaf(b).measure;
        }
        row.ratioLocal = local / std::pow(r, s);
        row.ratioTail = tail * std::pow(r, s);
        rows.push_back(row);
    }
    return rows;
}

double holder_seminorm(const DyadicTree& t, const CellFunction& f, double beta, int nSamples,
                       std::uint64_t seed) {
    check_function(t, f);
    if (!(beta > 0.0)) throw std::invalid_argument("Hoelder exponent must be positive");
    const SpaceModel& model = t.model();
    int n = t.leafCount();
    long long allPairs = static_cast<long long>(n) * (n - 1) / 2;
    double worst = 0.0;
    if (nSamples >= allPairs) {
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b) {
                double d = model.distance(t.leaf(a).rep, t.leaf(b).rep);
                worst = std::max(worst, std::abs(f[a] - f[b]) / std::pow(d, beta));
            }
        return worst;
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, n - 1);
    for (int k = 0; k < nSamples; ++k) {
        int a = pick(rng), b = pick(rng);
        if (a == b) continue;
        double d = model.distance(t.leaf(a).rep, t.leaf(b).rep);
        worst = std::max(worst, std::abs(f[a] - f[b]) / std::pow(d, beta));
    }
    return worst;
}

LipschitzGrowthReport lipschitz_energy_growth(const DyadicTree& t, double beta, double s, int workers) {
    const SpaceModel& model = t.model();
    if (!model.ahlforsExponent())
        throw std::invalid_argument("energy growth check needs an Ahlfors exponent; the " + model.name() +
                                    " model has none");
    if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("Hoelder exponent must lie in (0,1]");
    if (!(s > 0.0 && s < beta))
        throw std::invalid_argument("finite energy needs 0 < s < beta; got s = " + std::to_string(s) +
                                    ", beta = " + std::to_string(beta));

    Point center = model.representativePoint(Address());
    double radius = 0.25 * model.topDiameter();
    auto cone = [&](const DyadicTree& tree) {
        CellFunction u(tree);
        for (int i = 0; i < tree.leafCount(); ++i) {
            double d = model.distance(tree.leaf(i).rep, center);
            double v = std::clamp(1.0 - d / radius, 0.0, 1.0);
            u[i] = std::pow(v, beta);
        }
        return u;
    };

    LipschitzGrowthReport rep;
    rep.beta = beta;
    rep.s = s;
    rep.coarseLevel = t.maxLevel();
    rep.fineLevel = t.maxLevel() + 2;

    KernelParams p = KernelParams::metric(s);
    CellFunction uCoarse = cone(t);
    rep.energyCoarse = energy_quadrature(t, uCoarse, p, workers);

    DyadicTree fine(t.modelPtr(), rep.fineLevel);
    CellFunction uFine = cone(fine);
    rep.energyFine = energy_quadrature(fine, uFine, p, workers);

    rep.degenerate = rep.energyCoarse == 0.0 && rep.energyFine == 0.0;
    rep.growthFactor = rep.energyCoarse > 0.0 ? rep.energyFine / rep.energyCoarse : 0.0;
    rep.pass = !rep.degenerate && rep.energyCoarse > 0.0 && rep.energyFine < 1.25 * rep.energyCoarse;
    return rep;
}

}  // namespace fraclap
