#ifndef FRACLAP_GEOMETRY_HPP
#define FRACLAP_GEOMETRY_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fraclap {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Path in the subdivision tree: one 1-based child digit per level.
class Address {
public:
    Address() = default;
    explicit Address(std::vector<std::uint8_t> digits) : digits_(std::move(digits)) {}

    int level() const { return static_cast<int>(digits_.size()); }
    const std::vector<std::uint8_t>& digits() const { return digits_; }
    std::uint8_t digit(int i) const { return digits_[static_cast<std::size_t>(i)]; }
    bool isTop() const { return digits_.empty(); }

    Address child(int childIndex) const {
        Address a(*this);
        a.digits_.push_back(static_cast<std::uint8_t>(childIndex));
        return a;
    }
    Address parent() const {
        if (digits_.empty()) throw std::invalid_argument("top cube has no parent");
        Address a(*this);
        a.digits_.pop_back();
        return a;
    }
    Address prefix(int len) const {
        return Address(std::vector<std::uint8_t>(digits_.begin(), digits_.begin() + len));
    }
    bool isPrefixOf(const Address& other) const {
        if (level() > other.level()) return false;
        for (int i = 0; i < level(); ++i)
            if (digits_[static_cast<std::size_t>(i)] != other.digits_[static_cast<std::size_t>(i)]) return false;
        return true;
    }

    friend bool operator==(const Address& a, const Address& b) { return a.digits_ == b.digits_; }
    friend bool operator!=(const Address& a, const Address& b) { return !(a == b); }

private:
    std::vector<std::uint8_t> digits_;
};

/// Longest common prefix of two addresses.
Address common_prefix(const Address& a, const Address& b);

/// Affine contractions of the Sierpinski iterated function system.
/// F1 = p/2, F2 = (1/2,0) + p/2, F3 = (0,1/2) + p/2. Exact on dyadic rationals.
Point ifs_map(int childIndex, const Point& p);

/// A concrete space of homogeneous type, truncated to one top cube.
/// Immutable; all queries are pure and thread-safe.
class SpaceModel {
public:
    virtual ~SpaceModel() = default;

    virtual std::string name() const = 0;
    /// Offspring count of the cube at `a` under the subdivision rule.
    virtual int branching(const Address& a) const = 0;
    virtual int maxBranching() const = 0;
    virtual double cellMeasure(const Address& a) const = 0;
    virtual Point representativePoint(const Address& a) const = 0;
    /// Exact sup of distances between points of the cell (closed form).
    virtual double cellDiameter(const Address& a) const = 0;
    virtual double distance(const Point& p, const Point& q) const = 0;
    /// Ahlfors regularity exponent, absent when ball measures follow no single power law.
    virtual std::optional<double> ahlforsExponent() const = 0;
    virtual int windowExponent() const = 0;

    /// Both concrete models carry genuine metrics.
    double quasiMetricConstant() const { return 1.0; }
    /// Scale ratio nu of the cube family.
    double scaleRatio() const { return 0.5; }

    double topMeasure() const { return cellMeasure(Address()); }
    double topDiameter() const { return cellDiameter(Address()); }

    virtual std::string formatAddress(const Address& a) const = 0;
    virtual Address parseAddress(const std::string& text) const = 0;

    /// Throws std::invalid_argument when a digit is out of range.
    void validateAddress(const Address& a) const;
};

/// Truncated Sierpinski gasket scaled by 2^windowExponent, Hausdorff measure
/// normalized so the top cube has measure 1. Cells at level j measure 3^-j.
class SierpinskiModel final : public SpaceModel {
public:
    explicit SierpinskiModel(int windowExponent = 0);

    std::string name() const override { return "sierpinski"; }
    int branching(const Address&) const override { return 3; }
    int maxBranching() const override { return 3; }
    double cellMeasure(const Address& a) const override;
    Point representativePoint(const Address& a) const override;
    double cellDiameter(const Address& a) const override;
    double distance(const Point& p, const Point& q) const override;
    std::optional<double> ahlforsExponent() const override { return gamma_; }
    int windowExponent() const override { return m0_; }

    std::string formatAddress(const Address& a) const override;
    Address parseAddress(const std::string& text) const override;

    /// Lower-left corner of the cell triangle in integer units of 2^-level
    /// (window scale excluded). Exact for levels up to 62.
    void cornerUnits(const Address& a, long long& ax, long long& ay) const;

    /// Exact containment of a cell's representative point in the closed
    /// triangle of another cell, decided in integer arithmetic.
    bool triangleContainsRepresentative(const Address& cell, const Address& pointCell) const;

    double gamma() const { return gamma_; }

private:
    int m0_;
    double gamma_;
    double scale_;
};

/// Half line with weight x^-1/2, window [0, 2^windowExponent), binary interval
/// subdivision. mu(I) = 2(sqrt(b) - sqrt(a)) in closed form; no Ahlfors exponent.
class HalfLineWeightModel final : public SpaceModel {
public:
    explicit HalfLineWeightModel(int windowExponent = 0);

    std::string name() const override { return "halfline"; }
    int branching(const Address&) const override { return 2; }
    int maxBranching() const override { return 2; }
    double cellMeasure(const Address& a) const override;
    Point representativePoint(const Address& a) const override;
    double cellDiameter(const Address& a) const override;
    double distance(const Point& p, const Point& q) const override;
    std::optional<double> ahlforsExponent() const override { return std::nullopt; }
    int windowExponent() const override { return m0_; }

    std::string formatAddress(const Address& a) const override;
    Address parseAddress(const std::string& text) const override;

    /// Interval index k of the cell at its own level (0-based, left to right).
    long long intervalIndex(const Address& a) const;
    /// Cell endpoints [a, b).
    void intervalEndpoints(const Address& a, double& lo, double& hi) const;

    static constexpr double weightExponent = -0.5;

private:
    int m0_;
    double window_;
};

/// mu(B(x, r)) / r^gamma with the ball measured by summing level-J cells whose
/// representative point lies within distance r of x's representative point.
/// x must be a level-J address; r must lie in [diam(level-J cell), diam(top)].
double ahlfors_ratio(const SpaceModel& model, const Address& x, double r);

}  // namespace fraclap

#endif
