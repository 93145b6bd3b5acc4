#include "fraclap/dyadic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace fraclap {

DyadicTree::DyadicTree(std::shared_ptr<const SpaceModel> model, int maxLevel, std::size_t leafCap)
    : model_(std::move(model)), maxLevel_(maxLevel) {
    if (!model_) throw std::invalid_argument("null space model");
    if (maxLevel_ < 0) throw std::invalid_argument("tree depth must be >= 0");
    branching_ = model_->branching(Address());

    std::size_t leaves = 1;
    for (int j = 0; j < maxLevel_; ++j) {
        leaves *= static_cast<std::size_t>(branching_);
        if (leaves > leafCap)
            throw std::runtime_error("leaf count at level " + std::to_string(maxLevel_) +
                                     " exceeds the configured cap of " + std::to_string(leafCap) + " cells");
    }

    levels_.resize(static_cast<std::size_t>(maxLevel_) + 1);
    Cube top;
    top.address = Address();
    top.measure = model_->cellMeasure(top.address);
    top.rep = model_->representativePoint(top.address);
    levels_[0].push_back(std::move(top));

    for (int j = 0; j < maxLevel_; ++j) {
        auto& parents = levels_[static_cast<std::size_t>(j)];
        auto& next = levels_[static_cast<std::size_t>(j) + 1];
        next.reserve(parents.size() * static_cast<std::size_t>(branching_));
        for (std::size_t p = 0; p < parents.size(); ++p) {
            parents[p].firstChild = static_cast<int>(next.size());
            parents[p].childCount = model_->branching(parents[p].address);
            for (int c = 1; c <= parents[p].childCount; ++c) {
                Cube q;
                q.address = parents[p].address.child(c);
                q.measure = model_->cellMeasure(q.address);
                q.parent = static_cast<int>(p);
                q.rep = model_->representativePoint(q.address);
                next.push_back(std::move(q));
            }
        }
    }
}

int DyadicTree::totalCubeCount() const {
    int n = 0;
    for (const auto& lvl : levels_) n += static_cast<int>(lvl.size());
    return n;
}

int DyadicTree::indexOf(const Address& a) const {
    if (a.level() > maxLevel_) throw std::invalid_argument("address deeper than the tree");
    model_->validateAddress(a);
    int idx = 0;
    for (int i = 0; i < a.level(); ++i) idx = idx * branching_ + (a.digit(i) - 1);
    return idx;
}

int DyadicTree::leafIndexOf(const Address& a) const {
    if (a.level() != maxLevel_) throw std::invalid_argument("not a leaf address");
    return indexOf(a);
}

int DyadicTree::ancestorIndex(int leafIndex, int level) const {
    int idx = leafIndex;
    for (int j = maxLevel_; j > level; --j) idx /= branching_;
    return idx;
}

CellFunction::CellFunction(const DyadicTree& tree, std::vector<double> values)
    : tree_(&tree), values_(std::move(values)) {
    if (static_cast<int>(values_.size()) != tree.leafCount())
        throw std::invalid_argument("value vector length does not match leaf count");
}

double CellFunction::integral() const {
    double s = 0.0;
    for (int i = 0; i < size(); ++i) s += values_[static_cast<std::size_t>(i)] * tree_->leaf(i).measure;
    return s;
}

double CellFunction::l2NormSq() const {
    double s = 0.0;
    for (int i = 0; i < size(); ++i) {
        double v = values_[static_cast<std::size_t>(i)];
        s += v * v * tree_->leaf(i).measure;
    }
    return s;
}

double CellFunction::innerProduct(const CellFunction& other) const {
    if (!tree_->sameTree(other.tree())) throw std::invalid_argument("functions live on different trees");
    double s = 0.0;
    for (int i = 0; i < size(); ++i)
        s += values_[static_cast<std::size_t>(i)] * other.values_[static_cast<std::size_t>(i)] * tree_->leaf(i).measure;
    return s;
}

double CellFunction::mean() const { return integral() / tree_->model().topMeasure(); }

CellFunction& CellFunction::operator+=(const CellFunction& other) {
    if (!tree_->sameTree(other.tree())) throw std::invalid_argument("functions live on different trees");
    for (int i = 0; i < size(); ++i) values_[static_cast<std::size_t>(i)] += other.values_[static_cast<std::size_t>(i)];
    return *this;
}

CellFunction& CellFunction::operator-=(const CellFunction& other) {
    if (!tree_->sameTree(other.tree())) throw std::invalid_argument("functions live on different trees");
    for (int i = 0; i < size(); ++i) values_[static_cast<std::size_t>(i)] -= other.values_[static_cast<std::size_t>(i)];
    return *this;
}

CellFunction& CellFunction::operator*=(double c) {
    for (auto& v : values_) v *= c;
    return *this;
}

DyadicTree build_tree(std::shared_ptr<const SpaceModel> model, int maxLevel, std::size_t leafCap) {
    return DyadicTree(std::move(model), maxLevel, leafCap);
}

Address smallest_common_cube(const DyadicTree& t, const Address& a, const Address& b) {
    if (a.level() != t.maxLevel() || b.level() != t.maxLevel())
        throw std::invalid_argument("smallest_common_cube expects leaf addresses");
    t.model().validateAddress(a);
    t.model().validateAddress(b);
    return common_prefix(a, b);
}

double dyadic_distance(const DyadicTree& t, const Address& a, const Address& b) {
    if (a == b) return 0.0;
    return t.model().cellMeasure(smallest_common_cube(t, a, b));
}

int meet_level(const DyadicTree& t, int leafA, int leafB) {
    int b = t.model().maxBranching();
    int j = t.maxLevel();
    while (leafA != leafB) {
        leafA /= b;
        leafB /= b;
        --j;
    }
    return j;
}

double dyadic_distance(const DyadicTree& t, int leafA, int leafB) {
    if (leafA == leafB) return 0.0;
    int j = meet_level(t, leafA, leafB);
    return t.cube(j, t.ancestorIndex(leafA, j)).measure;
}

double ball_measure(const DyadicTree& t, int leafIndex, double r) {
    const auto& model = t.model();
    Point center = t.leaf(leafIndex).rep;
    double s = 0.0;
    for (int i = 0; i < t.leafCount(); ++i)
        if (model.distance(center, t.leaf(i).rep) < r || i == leafIndex) s += t.leaf(i).measure;
    return s;
}

double ball_measure(const DyadicTree& t, const Address& x, double r) {
    return ball_measure(t, t.leafIndexOf(x), r);
}

ChristReport verify_christ_properties(const DyadicTree& t) {
    ChristReport report;
    const auto& model = t.model();
    double nu = t.scaleRatio();
    double muTop = model.topMeasure();
    int maxB = model.maxBranching();

    for (int j = 0; j <= t.maxLevel(); ++j) {
        double levelSum = 0.0;
        ChristReport::LevelBand band;
        band.level = j;
        band.diamRatioMin = band.diamRatioMax = model.cellDiameter(t.cube(j, 0).address) / std::pow(nu, j);
        for (int i = 0; i < t.cubeCount(j); ++i) {
            const auto& q = t.cube(j, i);
            levelSum += q.measure;
            double ratio = model.cellDiameter(q.address) / std::pow(nu, j);
            band.diamRatioMin = std::min(band.diamRatioMin, ratio);
            band.diamRatioMax = std::max(band.diamRatioMax, ratio);
            if (j > 0 && (q.parent < 0 || q.parent >= t.cubeCount(j - 1))) report.uniqueParent = false;
            if (j < t.maxLevel() && (q.childCount < 1 || q.childCount > maxB))
                report.offspringCountInRange = false;
        }
        report.maxPartitionDefect = std::max(report.maxPartitionDefect, std::abs(levelSum - muTop));
        report.bands.push_back(band);
    }

    // (D5) every child's range sits inside its parent's range; (D7) nested or
    // disjoint follows from the prefix structure, asserted here on leaf pairs
    // against ancestor cubes of mixed levels.
    for (int j = 1; j <= t.maxLevel(); ++j) {
        for (int i = 0; i < t.cubeCount(j); ++i) {
            const auto& q = t.cube(j, i);
            const auto& p = t.cube(j - 1, q.parent);
            if (!p.address.isPrefixOf(q.address)) report.uniqueParent = false;
        }
    }
    for (int i = 0; i < t.leafCount(); ++i) {
        const Address& leafAddr = t.leaf(i).address;
        for (int j = 0; j < t.maxLevel(); ++j) {
            const Address anc = leafAddr.prefix(j);
            int idx = t.ancestorIndex(i, j);
            if (!(t.cube(j, idx).address == anc)) report.nestedOrDisjoint = false;
        }
    }

    // empirical eccentricity per level: inscribed over circumscribed ball radius,
    // balls probed at leaf representative points
    for (int j = 1; j < t.maxLevel(); ++j) {
        auto& band = report.bands[static_cast<std::size_t>(j)];
        int step = std::max(1, t.cubeCount(j) / 16);
        int span = 1;  // leaves per cube at level j
        for (int k = j; k < t.maxLevel(); ++k) span *= model.maxBranching();
        double eccMin = std::numeric_limits<double>::infinity();
        double eccMax = 0.0;
        for (int i = 0; i < t.cubeCount(j); i += step) {
            int lo = i * span, hi = lo + span;
            double rIn = 0.0;
            double rOut = std::numeric_limits<double>::infinity();
            for (int a = lo; a < hi; ++a) {
                double nearestOutside = std::numeric_limits<double>::infinity();
                double farthestInside = 0.0;
                for (int b = 0; b < t.leafCount(); ++b) {
                    double d = model.distance(t.leaf(a).rep, t.leaf(b).rep);
                    if (b >= lo && b < hi) farthestInside = std::max(farthestInside, d);
                    else nearestOutside = std::min(nearestOutside, d);
                }
                rIn = std::max(rIn, nearestOutside);
                rOut = std::min(rOut, farthestInside);
            }
            double ecc = (rOut > 0 && std::isfinite(rOut)) ? rIn / rOut : 0.0;
            eccMin = std::min(eccMin, ecc);
            eccMax = std::max(eccMax, ecc);
        }
        band.eccentricityMin = std::isfinite(eccMin) ? eccMin : 0.0;
        band.eccentricityMax = eccMax;
    }
    return report;
}

double compare_measure_ball_delta(const DyadicTree& t, int nSamples, std::uint64_t seed) {
    if (nSamples < 1) throw std::invalid_argument("need at least one sample");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, t.leafCount() - 1);
    const auto& model = t.model();
    double worst = 0.0;
    for (int s = 0; s < nSamples; ++s) {
        int a = pick(rng), b = pick(rng);
        if (a == b) continue;  // delta = 0 on the diagonal
        double d = model.distance(t.leaf(a).rep, t.leaf(b).rep);
        double ratio = ball_measure(t, a, d) / dyadic_distance(t, a, b);
        worst = std::max(worst, ratio);
    }
    return worst;
}

}  // namespace fraclap
