#ifndef FRACLAP_DYADIC_HPP
#define FRACLAP_DYADIC_HPP

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "fraclap/geometry.hpp"

namespace fraclap {

struct CubeRef {
    int level = 0;
    int index = 0;  // position within the level, address order
    friend bool operator==(const CubeRef& a, const CubeRef& b) {
        return a.level == b.level && a.index == b.index;
    }
};

/// Truncated nested cube family over a SpaceModel, levels 0..maxLevel.
/// Immutable after build; all queries are pure and thread-safe.
class DyadicTree {
public:
    struct Cube {
        Address address;
        double measure = 0.0;
        int parent = -1;  // index within the previous level
        int firstChild = -1;
        int childCount = 0;
        Point rep;
    };

    static constexpr std::size_t defaultLeafCap = 1u << 20;

    DyadicTree(std::shared_ptr<const SpaceModel> model, int maxLevel,
               std::size_t leafCap = defaultLeafCap);

    const SpaceModel& model() const { return *model_; }
    std::shared_ptr<const SpaceModel> modelPtr() const { return model_; }
    int maxLevel() const { return maxLevel_; }
    double scaleRatio() const { return model_->scaleRatio(); }

    int cubeCount(int level) const { return static_cast<int>(levels_[static_cast<std::size_t>(level)].size()); }
    int totalCubeCount() const;
    int leafCount() const { return cubeCount(maxLevel_); }
    const Cube& cube(int level, int index) const { return levels_[static_cast<std::size_t>(level)][static_cast<std::size_t>(index)]; }
    const Cube& cube(const CubeRef& r) const { return cube(r.level, r.index); }
    const Cube& leaf(int index) const { return cube(maxLevel_, index); }
    const std::vector<Cube>& level(int j) const { return levels_[static_cast<std::size_t>(j)]; }

    /// Index of a cube within its level; throws when the address is invalid.
    int indexOf(const Address& a) const;
    int leafIndexOf(const Address& a) const;
    /// Level-j ancestor index of a leaf (j <= maxLevel).
    int ancestorIndex(int leafIndex, int level) const;

    bool sameTree(const DyadicTree& other) const { return this == &other; }

private:
    std::shared_ptr<const SpaceModel> model_;
    int maxLevel_;
    std::vector<std::vector<Cube>> levels_;
    int branching_;  // uniform for both concrete models
};

/// Piecewise-constant function at the tree's leaf resolution, one value per leaf.
class CellFunction {
public:
    CellFunction() = default;
    explicit CellFunction(const DyadicTree& tree, double fill = 0.0)
        : tree_(&tree), values_(static_cast<std::size_t>(tree.leafCount()), fill) {}
    CellFunction(const DyadicTree& tree, std::vector<double> values);

    const DyadicTree& tree() const { return *tree_; }
    bool attached() const { return tree_ != nullptr; }
    int size() const { return static_cast<int>(values_.size()); }
    double operator[](int i) const { return values_[static_cast<std::size_t>(i)]; }
    double& operator[](int i) { return values_[static_cast<std::size_t>(i)]; }
    const std::vector<double>& values() const { return values_; }

    double integral() const;
    double l2NormSq() const;
    double innerProduct(const CellFunction& other) const;
    /// mu-weighted mean over the top cube.
    double mean() const;

    CellFunction& operator+=(const CellFunction& other);
    CellFunction& operator-=(const CellFunction& other);
    CellFunction& operator*=(double c);

private:
    const DyadicTree* tree_ = nullptr;
    std::vector<double> values_;
};

DyadicTree build_tree(std::shared_ptr<const SpaceModel> model, int maxLevel,
                      std::size_t leafCap = DyadicTree::defaultLeafCap);

/// Longest common prefix of two leaf addresses (the smallest cube holding both).
Address smallest_common_cube(const DyadicTree& t, const Address& a, const Address& b);

/// 0 on the diagonal, else the measure of the smallest common cube.
double dyadic_distance(const DyadicTree& t, const Address& a, const Address& b);
/// Same, by leaf index.
double dyadic_distance(const DyadicTree& t, int leafA, int leafB);

/// Level of the smallest common cube of two leaves.
int meet_level(const DyadicTree& t, int leafA, int leafB);

/// Sum of measures of leaves whose representative point lies within distance r
/// of the leaf's representative point (r = 0 keeps only the leaf itself).
double ball_measure(const DyadicTree& t, int leafIndex, double r);
double ball_measure(const DyadicTree& t, const Address& x, double r);

struct ChristReport {
    struct LevelBand {
        int level = 0;
        double diamRatioMin = 0.0;  // diameter / nu^level
        double diamRatioMax = 0.0;
        double eccentricityMin = 0.0;  // inscribed/circumscribed ball radius ratio
        double eccentricityMax = 0.0;
    };
    std::vector<LevelBand> bands;
    bool uniqueParent = true;          // (D5)
    bool offspringCountInRange = true; // (D6)
    bool nestedOrDisjoint = true;      // (D7), sampled pairs
    double maxPartitionDefect = 0.0;   // (D4), |sum of level measures - mu(top)|
    bool pass() const {
        return uniqueParent && offspringCountInRange && nestedOrDisjoint && maxPartitionDefect < 1e-12;
    }
};

/// Structural and metric checks of the cube family; failures are reported,
/// never thrown.
ChristReport verify_christ_properties(const DyadicTree& t);

/// Empirical constant in mu(B(x, d(x,y))) <= C delta(x,y): max ratio over
/// sampled distinct leaf pairs. Deterministic for a given seed.
double compare_measure_ball_delta(const DyadicTree& t, int nSamples, std::uint64_t seed = 1);

}  // namespace fraclap

#endif
