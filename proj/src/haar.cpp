#include "fraclap/haar.hpp"

#include <cmath>
#include <stdexcept>

namespace fraclap {

namespace {

// Per-cube Gram-Schmidt over {chi_Q/sqrt(mu(Q))} followed by the indicators of
// the first childCount-1 children, keeping the scaling vector first. Vectors
// live in child-value space with the mu-weighted inner product.
std::vector<std::vector<double>> cube_wavelets(const std::vector<double>& childMeasures) {
    int k = static_cast<int>(childMeasures.size());
    double muQ = 0.0;
    for (double m : childMeasures) muQ += m;

    auto dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (int i = 0; i < k; ++i) s += a[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(i)] * childMeasures[static_cast<std::size_t>(i)];
        return s;
    };

    std::vector<std::vector<double>> basis;
    basis.push_back(std::vector<double>(static_cast<std::size_t>(k), 1.0 / std::sqrt(muQ)));

    std::vector<std::vector<double>> out;
    for (int c = 0; c < k - 1; ++c) {
        std::vector<double> v(static_cast<std::size_t>(k), 0.0);
        v[static_cast<std::size_t>(c)] = 1.0;
        for (const auto& b : basis) {
            double proj = dot(v, b);
            for (int i = 0; i < k; ++i) v[static_cast<std::size_t>(i)] -= proj * b[static_cast<std::size_t>(i)];
        }
        double norm = std::sqrt(dot(v, v));
        for (auto& x : v) x /= norm;
        out.push_back(v);
        basis.push_back(std::move(v));
    }
    return out;
}

}  // namespace

HaarSystem::HaarSystem(const DyadicTree& tree) : tree_(&tree) {
    topScalingValue_ = 1.0 / std::sqrt(tree.model().topMeasure());
    firstWaveletOfCube_.resize(static_cast<std::size_t>(tree.maxLevel()));
    for (int j = 0; j < tree.maxLevel(); ++j) {
        auto& first = firstWaveletOfCube_[static_cast<std::size_t>(j)];
        first.assign(static_cast<std::size_t>(tree.cubeCount(j)), -1);
        for (int i = 0; i < tree.cubeCount(j); ++i) {
            const auto& q = tree.cube(j, i);
            if (q.childCount < 2) continue;
            std::vector<double> childMeasures(static_cast<std::size_t>(q.childCount));
            for (int c = 0; c < q.childCount; ++c)
                childMeasures[static_cast<std::size_t>(c)] = tree.cube(j + 1, q.firstChild + c).measure;
            auto vals = cube_wavelets(childMeasures);
            first[static_cast<std::size_t>(i)] = static_cast<int>(wavelets_.size());
            for (int l = 0; l < static_cast<int>(vals.size()); ++l) {
                HaarWavelet h;
                h.level = j;
                h.cubeIndex = i;
                h.indexInCube = l;
                h.childValues = std::move(vals[static_cast<std::size_t>(l)]);
                wavelets_.push_back(std::move(h));
            }
        }
    }
}

std::vector<int> HaarSystem::waveletsOfCube(int level, int cubeIndex) const {
    std::vector<int> ids;
    int first = firstWaveletOfCube_[static_cast<std::size_t>(level)][static_cast<std::size_t>(cubeIndex)];
    if (first < 0) return ids;
    int n = tree_->cube(level, cubeIndex).childCount - 1;
    for (int l = 0; l < n; ++l) ids.push_back(first + l);
    return ids;
}

double HaarSystem::waveletValueOnLeaf(int id, int leafIndex) const {
    const auto& h = wavelets_[static_cast<std::size_t>(id)];
    if (tree_->ancestorIndex(leafIndex, h.level) != h.cubeIndex) return 0.0;
    int childIdx = tree_->ancestorIndex(leafIndex, h.level + 1) - tree_->cube(h.level, h.cubeIndex).firstChild;
    return h.childValues[static_cast<std::size_t>(childIdx)];
}

CellFunction HaarSystem::waveletAsCellFunction(int id) const {
    CellFunction f(*tree_);
    for (int i = 0; i < tree_->leafCount(); ++i) f[i] = waveletValueOnLeaf(id, i);
    return f;
}

HaarSystem build_haar_system(const DyadicTree& t) { return HaarSystem(t); }

HaarDecomposition haar_forward(const HaarSystem& sys, const CellFunction& f) {
    const DyadicTree& t = sys.tree();
    if (!f.attached() || !f.tree().sameTree(t)) throw std::invalid_argument("function built on a different tree");

    // bottom-up cube integrals of f
    int J = t.maxLevel();
    std::vector<std::vector<double>> integral(static_cast<std::size_t>(J) + 1);
    integral[static_cast<std::size_t>(J)].resize(static_cast<std::size_t>(t.leafCount()));
    for (int i = 0; i < t.leafCount(); ++i)
        integral[static_cast<std::size_t>(J)][static_cast<std::size_t>(i)] = f[i] * t.leaf(i).measure;
    for (int j = J - 1; j >= 0; --j) {
        auto& row = integral[static_cast<std::size_t>(j)];
        row.assign(static_cast<std::size_t>(t.cubeCount(j)), 0.0);
        for (int i = 0; i < t.cubeCount(j); ++i) {
            const auto& q = t.cube(j, i);
            for (int c = 0; c < q.childCount; ++c)
                row[static_cast<std::size_t>(i)] += integral[static_cast<std::size_t>(j) + 1][static_cast<std::size_t>(q.firstChild + c)];
        }
    }

    HaarDecomposition d;
    d.topScalingCoeff = sys.topScalingValue() * integral[0][0];
    d.waveletCoeffs.resize(static_cast<std::size_t>(sys.waveletCount()));
    for (int id = 0; id < sys.waveletCount(); ++id) {
        const auto& h = sys.wavelet(id);
        const auto& q = t.cube(h.level, h.cubeIndex);
        double c = 0.0;
        for (int k = 0; k < q.childCount; ++k)
            c += h.childValues[static_cast<std::size_t>(k)] *
                 integral[static_cast<std::size_t>(h.level) + 1][static_cast<std::size_t>(q.firstChild + k)];
        d.waveletCoeffs[static_cast<std::size_t>(id)] = c;
    }
    return d;
}

CellFunction haar_inverse(const HaarSystem& sys, const HaarDecomposition& d) {
    const DyadicTree& t = sys.tree();
    if (static_cast<int>(d.waveletCoeffs.size()) != sys.waveletCount())
        throw std::out_of_range("coefficient vector length does not match the wavelet count");

    // top-down sweep: each cube carries the running constant of the scaling
    // part plus every wavelet based above it; ids are level-major
    int J = t.maxLevel();
    std::vector<double> cur(1, d.topScalingCoeff * sys.topScalingValue());
    int id = 0;
    for (int j = 0; j < J; ++j) {
        std::vector<double> next(static_cast<std::size_t>(t.cubeCount(j + 1)), 0.0);
        for (int i = 0; i < t.cubeCount(j); ++i) {
            const auto& q = t.cube(j, i);
            for (int c = 0; c < q.childCount; ++c)
                next[static_cast<std::size_t>(q.firstChild + c)] = cur[static_cast<std::size_t>(i)];
        }
        for (; id < sys.waveletCount() && sys.wavelet(id).level == j; ++id) {
            double c = d.waveletCoeffs[static_cast<std::size_t>(id)];
            if (c == 0.0) continue;
            const auto& h = sys.wavelet(id);
            const auto& q = t.cube(j, h.cubeIndex);
            for (int k = 0; k < q.childCount; ++k)
                next[static_cast<std::size_t>(q.firstChild + k)] += c * h.childValues[static_cast<std::size_t>(k)];
        }
        cur = std::move(next);
    }
    CellFunction f(t);
    for (int i = 0; i < t.leafCount(); ++i) f[i] = cur[static_cast<std::size_t>(i)];
    return f;
}

CellFunction project_Pj(const HaarSystem& sys, const CellFunction& f, int j) {
    const DyadicTree& t = sys.tree();
    if (!f.attached() || !f.tree().sameTree(t)) throw std::invalid_argument("function built on a different tree");
    if (j < 0 || j > t.maxLevel()) throw std::invalid_argument("projection level outside 0..J");
    if (j == t.maxLevel()) return f;

    std::vector<double> sum(static_cast<std::size_t>(t.cubeCount(j)), 0.0);
    for (int i = 0; i < t.leafCount(); ++i)
        sum[static_cast<std::size_t>(t.ancestorIndex(i, j))] += f[i] * t.leaf(i).measure;
    CellFunction out(t);
    for (int i = 0; i < t.leafCount(); ++i) {
        int anc = t.ancestorIndex(i, j);
        out[i] = sum[static_cast<std::size_t>(anc)] / t.cube(j, anc).measure;
    }
    return out;
}

CellFunction project_Pilambda(const HaarSystem& sys, const CellFunction& f, double lambda) {
    if (!(lambda > 0)) throw std::invalid_argument("lambda must be positive");
    HaarDecomposition d = haar_forward(sys, f);
    d.topScalingCoeff = 0.0;
    for (int id = 0; id < sys.waveletCount(); ++id)
        if (!(sys.baseCubeMeasure(id) > lambda)) d.waveletCoeffs[static_cast<std::size_t>(id)] = 0.0;
    return haar_inverse(sys, d);
}

std::vector<int> ker_pilambda_basis(const HaarSystem& sys, double lambda) {
    if (!(lambda > 0)) throw std::invalid_argument("lambda must be positive");
    std::vector<int> ids;
    for (int id = 0; id < sys.waveletCount(); ++id)
        if (sys.baseCubeMeasure(id) <= lambda) ids.push_back(id);
    return ids;
}

std::pair<CellFunction, CellFunction> sierpinski_reference_wavelets(const DyadicTree& t, int j, int l) {
    if (t.model().maxBranching() != 3 || !t.model().ahlforsExponent())
        throw std::invalid_argument("reference ternary wavelets require the Sierpinski model");
    if (j < 0 || j + 1 > t.maxLevel()) throw std::invalid_argument("cube level must satisfy j+1 <= J");
    if (l < 0 || l >= t.cubeCount(j)) throw std::invalid_argument("cube index out of range");

    double pre = std::pow(3.0, 0.5 * j);
    double c1 = 4.0 / std::sqrt(42.0) * pre;
    double c2 = 3.0 / std::sqrt(14.0) * pre;
    double v1[3] = {c1 * 1.0, c1 * 0.25, c1 * -1.25};
    double v2[3] = {c2 * -2.0 / 3.0, c2 * 1.0, c2 * -1.0 / 3.0};

    const auto& q = t.cube(j, l);
    CellFunction f1(t), f2(t);
    for (int i = 0; i < t.leafCount(); ++i) {
        if (t.ancestorIndex(i, j) != l) continue;
        int child = t.ancestorIndex(i, j + 1) - q.firstChild;
        f1[i] = v1[child];
        f2[i] = v2[child];
    }
    return {std::move(f1), std::move(f2)};
}

}  // namespace fraclap
