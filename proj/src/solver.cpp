#include "fraclap/solver.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fraclap {

namespace {

// sparse leaf representation of a wavelet: the leaves below its base cube
void wavelet_support(const HaarSystem& sys, int id, std::vector<int>& idx, std::vector<double>& val) {
    const DyadicTree& t = sys.tree();
    const auto& h = sys.wavelet(id);
    int span = 1;
    for (int k = h.level; k < t.maxLevel(); ++k) span *= t.model().maxBranching();
    int lo = h.cubeIndex * span;
    idx.clear();
    val.clear();
    idx.reserve(static_cast<std::size_t>(span));
    val.reserve(static_cast<std::size_t>(span));
    for (int i = lo; i < lo + span; ++i) {
        idx.push_back(i);
        val.push_back(sys.waveletValueOnLeaf(id, i));
    }
}

// Cholesky sweep used for the SPD validation; returns false and the offending
// pivot when the matrix is not positive definite.
bool cholesky_pivots(const std::vector<double>& gram, int n, double& smallestPivot, int& badIndex) {
    Eigen::MatrixXd L = Eigen::Map<const Eigen::MatrixXd>(gram.data(), n, n);
    smallestPivot = 0.0;
    badIndex = -1;
    for (int j = 0; j < n; ++j) {
        double d = L(j, j);
        for (int k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
        if (!(d > 0.0)) {
            smallestPivot = d;
            badIndex = j;
            return false;
        }
        double root = std::sqrt(d);
        L(j, j) = root;
        if (j == 0 || root < smallestPivot) smallestPivot = root;
        for (int i = j + 1; i < n; ++i) {
            double s = L(i, j);
            for (int k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
            L(i, j) = s / root;
        }
    }
    return true;
}

std::vector<double> conjugate_gradient(const GalerkinProblem& p, const std::vector<double>& rhs,
                                       const SolveOptions& opts) {
    int n = p.dim;
    Eigen::Map<const Eigen::MatrixXd> G(p.gram.data(), n, n);
    Eigen::Map<const Eigen::VectorXd> b(rhs.data(), n);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    if (!opts.initialGuess.empty()) {
        if (static_cast<int>(opts.initialGuess.size()) != n)
            throw std::invalid_argument("initial guess length does not match basis size");
        x = Eigen::Map<const Eigen::VectorXd>(opts.initialGuess.data(), n);
    }
    Eigen::VectorXd r = b - G * x;
    Eigen::VectorXd d = r;
    double target = opts.tolerance * std::max(1.0, b.lpNorm<Eigen::Infinity>());
    int cap = opts.maxIterations > 0 ? opts.maxIterations : 10 * n + 100;
    std::vector<double> history;
    double rr = r.squaredNorm();
    for (int it = 0; it < cap; ++it) {
        history.push_back(r.lpNorm<Eigen::Infinity>());
        if (history.back() <= target) return std::vector<double>(x.data(), x.data() + n);
        Eigen::VectorXd Gd = G * d;
        double alpha = rr / d.dot(Gd);
        x += alpha * d;
        r -= alpha * Gd;
        double rrNew = r.squaredNorm();
        d = r + (rrNew / rr) * d;
        rr = rrNew;
    }
    if (r.lpNorm<Eigen::Infinity>() <= target) return std::vector<double>(x.data(), x.data() + n);
    std::ostringstream msg;
    msg << "conjugate gradient failed to reach residual " << target << " within " << cap
        << " iterations; trailing residuals:";
    for (std::size_t k = history.size() > 10 ? history.size() - 10 : 0; k < history.size(); ++k)
        msg << " " << history[k];
    throw std::runtime_error(msg.str());
}

WeakSolution finish_solution(const GalerkinProblem& p, std::vector<double> coeffs,
                             const std::vector<double>& rhs) {
    WeakSolution sol;
    sol.coefficients = std::move(coeffs);

    int n = p.dim;
    Eigen::Map<const Eigen::MatrixXd> G(p.gram.data(), n, n);
    Eigen::Map<const Eigen::VectorXd> c(sol.coefficients.data(), n);
    Eigen::Map<const Eigen::VectorXd> b(rhs.data(), n);
    sol.residualNorm = (G * c - b).lpNorm<Eigen::Infinity>();

    HaarDecomposition d;
    d.topScalingCoeff = 0.0;
    d.waveletCoeffs.assign(static_cast<std::size_t>(p.sys->waveletCount()), 0.0);
    for (int i = 0; i < n; ++i)
        d.waveletCoeffs[static_cast<std::size_t>(p.basis[static_cast<std::size_t>(i)])] =
            sol.coefficients[static_cast<std::size_t>(i)];
    sol.asCellFunction = haar_inverse(*p.sys, d);
    return sol;
}

}  // namespace

GalerkinProblem assemble(const HaarSystem& sys, const KernelParams& params, double lambda, int workers) {
    const DyadicTree& t = sys.tree();
    params.validate(t.model());
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");

    GalerkinProblem p;
    p.tree = &t;
    p.sys = &sys;
    p.params = params;
    p.lambda = lambda;
    p.basis = ker_pilambda_basis(sys, lambda);
    p.dim = static_cast<int>(p.basis.size());
    if (p.dim == 0)
        throw std::invalid_argument("coercivity basis is empty: no wavelet cube has measure <= lambda = " +
                                    std::to_string(lambda));

    p.gram.assign(static_cast<std::size_t>(p.dim) * static_cast<std::size_t>(p.dim), 0.0);
    if (params.mode == KernelMode::dyadic) {
        for (int i = 0; i < p.dim; ++i)
            p.gram[static_cast<std::size_t>(i) * static_cast<std::size_t>(p.dim) + static_cast<std::size_t>(i)] =
                std::pow(sys.baseCubeMeasure(p.basis[static_cast<std::size_t>(i)]), -2.0 * params.sigma);
    } else {
        PairFormMatrix A(t, params, workers);
        std::vector<std::vector<int>> idx(static_cast<std::size_t>(p.dim));
        std::vector<std::vector<double>> val(static_cast<std::size_t>(p.dim));
        for (int i = 0; i < p.dim; ++i)
            wavelet_support(sys, p.basis[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(i)],
                            val[static_cast<std::size_t>(i)]);
        for (int j = 0; j < p.dim; ++j) {
            std::vector<double> w = A.applySparse(idx[static_cast<std::size_t>(j)], val[static_cast<std::size_t>(j)]);
            for (int i = 0; i < p.dim; ++i) {
                double s = 0.0;
                const auto& ii = idx[static_cast<std::size_t>(i)];
                const auto& vv = val[static_cast<std::size_t>(i)];
                for (std::size_t k = 0; k < ii.size(); ++k)
                    s += vv[k] * w[static_cast<std::size_t>(ii[k])];
                p.gram[static_cast<std::size_t>(i) * static_cast<std::size_t>(p.dim) + static_cast<std::size_t>(j)] =
                    2.0 * s;
            }
        }
    }

    int badIndex = -1;
    if (!cholesky_pivots(p.gram, p.dim, p.smallestPivot, badIndex))
        throw std::runtime_error("Gram matrix is not positive definite: pivot " + std::to_string(p.smallestPivot) +
                                 " at basis index " + std::to_string(badIndex));
    return p;
}

WeakSolution lax_milgram_solve(const GalerkinProblem& p, const std::vector<double>& rhs,
                               const SolveOptions& opts) {
    if (static_cast<int>(rhs.size()) != p.dim)
        throw std::invalid_argument("right-hand side length does not match basis size");
    SolveMethod method = opts.method;
    if (method == SolveMethod::automatic)
        method = p.dim <= 2000 ? SolveMethod::direct : SolveMethod::conjugateGradient;
    std::vector<double> coeffs;
    if (method == SolveMethod::direct) {
        Eigen::Map<const Eigen::MatrixXd> G(p.gram.data(), p.dim, p.dim);
        Eigen::Map<const Eigen::VectorXd> b(rhs.data(), p.dim);
        Eigen::LLT<Eigen::MatrixXd> llt(G);
        if (llt.info() != Eigen::Success) {
            double pivot = 0.0;
            int badIndex = -1;
            cholesky_pivots(p.gram, p.dim, pivot, badIndex);
            throw std::runtime_error("Cholesky factorization failed: pivot " + std::to_string(pivot) +
                                     " at basis index " + std::to_string(badIndex));
        }
        Eigen::VectorXd c = llt.solve(b);
        coeffs.assign(c.data(), c.data() + p.dim);
    } else {
        coeffs = conjugate_gradient(p, rhs, opts);
    }
    return finish_solution(p, std::move(coeffs), rhs);
}

WeakSolution green_function(const GalerkinProblem& p, const Address& x, const SolveOptions& opts) {
    const DyadicTree& t = *p.tree;
    if (p.params.mode == KernelMode::metric) {
        double gamma = *t.model().ahlforsExponent();
        if (!(p.params.s > 0.5 * gamma))
            throw std::invalid_argument("point evaluation needs s > gamma/2 = " + std::to_string(0.5 * gamma) +
                                        "; got s = " + std::to_string(p.params.s));
    }
    int leafIndex = t.leafIndexOf(x);
    std::vector<double> rhs(static_cast<std::size_t>(p.dim));
    for (int i = 0; i < p.dim; ++i)
        rhs[static_cast<std::size_t>(i)] = p.sys->waveletValueOnLeaf(p.basis[static_cast<std::size_t>(i)], leafIndex);
    return lax_milgram_solve(p, rhs, opts);
}

CellFunction dyadic_green_closed_form(const HaarSystem& sys, const Address& x, double sigma, double lambda) {
    if (!(sigma > 0.0 && sigma < 1.0)) throw std::invalid_argument("dyadic smoothness sigma must lie in (0,1)");
    const DyadicTree& t = sys.tree();
    int leafIndex = t.leafIndexOf(x);
    HaarDecomposition d;
    d.topScalingCoeff = 0.0;
    d.waveletCoeffs.assign(static_cast<std::size_t>(sys.waveletCount()), 0.0);
    for (int id : ker_pilambda_basis(sys, lambda))
        d.waveletCoeffs[static_cast<std::size_t>(id)] =
            std::pow(sys.baseCubeMeasure(id), 2.0 * sigma) * sys.waveletValueOnLeaf(id, leafIndex);
    return haar_inverse(sys, d);
}

WeakSolution weak_solve(const GalerkinProblem& p, const CellFunction& f, const SolveOptions& opts) {
    HaarDecomposition d = haar_forward(*p.sys, f);
    std::vector<double> rhs(static_cast<std::size_t>(p.dim));
    for (int i = 0; i < p.dim; ++i)
        rhs[static_cast<std::size_t>(i)] = d.waveletCoeffs[static_cast<std::size_t>(p.basis[static_cast<std::size_t>(i)])];
    return lax_milgram_solve(p, rhs, opts);
}

}  // namespace fraclap
