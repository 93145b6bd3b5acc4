#ifndef FRACLAP_SOLVER_HPP
#define FRACLAP_SOLVER_HPP

#include <vector>

#include "fraclap/energy.hpp"

namespace fraclap {

/// Galerkin problem for the bilinear form B on the span of the Haar wavelets
/// with base-cube measure <= lambda (top scaling coefficient identically zero).
/// In dyadic mode the Gram matrix is the exact diagonal mu(Q(h))^-2sigma.
struct GalerkinProblem {
    const DyadicTree* tree = nullptr;
    const HaarSystem* sys = nullptr;
    KernelParams params;
    double lambda = 0.0;
    std::vector<int> basis;  // wavelet ids, level-major order
    int dim = 0;
    std::vector<double> gram;  // row-major dim x dim, gram[i*dim+j] = B(h_i, h_j)
    double smallestPivot = 0.0;

    double gramAt(int i, int j) const { return gram[static_cast<std::size_t>(i) * static_cast<std::size_t>(dim) + static_cast<std::size_t>(j)]; }
};

/// automatic: direct factorization up to 2000 basis functions, conjugate
/// gradients above.
enum class SolveMethod { automatic, direct, conjugateGradient };

struct SolveOptions {
    double tolerance = 1e-8;
    SolveMethod method = SolveMethod::automatic;
    int maxIterations = 0;  // 0 = automatic cap
    std::vector<double> initialGuess;  // conjugate gradient only; empty = zero
};

struct WeakSolution {
    std::vector<double> coefficients;  // per basis wavelet
    CellFunction asCellFunction;       // reconstruction, zero top scaling coefficient
    double residualNorm = 0.0;         // max over basis v of |B(u, v) - rhs_v|
};

/// Builds basis and Gram matrix; validates symmetry by construction and
/// positive definiteness by a Cholesky sweep (the offending pivot is reported
/// on failure). Empty coercivity basis is rejected.
GalerkinProblem assemble(const HaarSystem& sys, const KernelParams& params, double lambda, int workers = 1);

/// Solves G c = rhs by Cholesky or conjugate gradients and reconstructs the
/// leaf-level function.
WeakSolution lax_milgram_solve(const GalerkinProblem& p, const std::vector<double>& rhs,
                               const SolveOptions& opts = {});

/// Weak solution reproducing point evaluation at leaf x: rhs_v = v(x).
/// Metric mode requires s > gamma/2 for point evaluation to be admissible.
WeakSolution green_function(const GalerkinProblem& p, const Address& x, const SolveOptions& opts = {});

/// sum over basis wavelets of mu(Q(h))^2sigma h(x) h(.), the closed-form
/// dyadic-mode Green function implied by the diagonal Gram matrix.
CellFunction dyadic_green_closed_form(const HaarSystem& sys, const Address& x, double sigma, double lambda);

/// Weak solution of the source problem: rhs_v = <f, v>_L2.
WeakSolution weak_solve(const GalerkinProblem& p, const CellFunction& f, const SolveOptions& opts = {});

}  // namespace fraclap

#endif
