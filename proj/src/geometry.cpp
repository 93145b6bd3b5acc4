#include "fraclap/geometry.hpp"

#include <cmath>
#include <functional>

namespace fraclap {

namespace {

double pow2d(int e) { return std::ldexp(1.0, e); }

long long ipow3(int e) {
    long long v = 1;
    for (int i = 0; i < e; ++i) v *= 3;
    return v;
}

}  // namespace

Address common_prefix(const Address& a, const Address& b) {
    int n = std::min(a.level(), b.level());
    int len = 0;
    while (len < n && a.digit(len) == b.digit(len)) ++len;
    return a.prefix(len);
}

Point ifs_map(int childIndex, const Point& p) {
    switch (childIndex) {
        case 1: return {0.5 * p.x, 0.5 * p.y};
        case 2: return {0.5 + 0.5 * p.x, 0.5 * p.y};
        case 3: return {0.5 * p.x, 0.5 + 0.5 * p.y};
        default: throw std::invalid_argument("ifs_map: child index must be 1, 2 or 3");
    }
}

void SpaceModel::validateAddress(const Address& a) const {
    for (int i = 0; i < a.level(); ++i) {
        int d = a.digit(i);
        int b = branching(a.prefix(i));
        if (d < 1 || d > b)
            throw std::invalid_argument("address digit " + std::to_string(d) + " at position " +
                                        std::to_string(i) + " outside 1.." + std::to_string(b));
    }
}

// ---------------------------------------------------------------------------
// SierpinskiModel

SierpinskiModel::SierpinskiModel(int windowExponent)
    : m0_(windowExponent), gamma_(std::log(3.0) / std::log(2.0)), scale_(pow2d(windowExponent)) {
    if (windowExponent < 0) throw std::invalid_argument("window exponent must be >= 0");
}

double SierpinskiModel::cellMeasure(const Address& a) const {
    if (a.level() > 38) throw std::invalid_argument("cell level too deep for exact ternary measure");
    return 1.0 / static_cast<double>(ipow3(a.level()));
}

void SierpinskiModel::cornerUnits(const Address& a, long long& ax, long long& ay) const {
    // corner accumulates 2^(j-i) per digit; exact in 64-bit for j <= 62
    ax = 0;
    ay = 0;
    int j = a.level();
    for (int i = 0; i < j; ++i) {
        long long u = 1LL << (j - 1 - i);
        if (a.digit(i) == 2) ax += u;
        else if (a.digit(i) == 3) ay += u;
    }
}

Point SierpinskiModel::representativePoint(const Address& a) const {
    validateAddress(a);
    long long ax, ay;
    cornerUnits(a, ax, ay);
    // centroid (corner + (1/3, 1/3) cell lengths), exact rational (3c+1)/(3*2^j)
    double den = 3.0 * pow2d(a.level());
    return {scale_ * (3.0 * static_cast<double>(ax) + 1.0) / den,
            scale_ * (3.0 * static_cast<double>(ay) + 1.0) / den};
}

double SierpinskiModel::cellDiameter(const Address& a) const {
    // hypotenuse of the cell triangle; the far corners belong to the cell
    return std::sqrt(2.0) * scale_ * pow2d(-a.level());
}

double SierpinskiModel::distance(const Point& p, const Point& q) const {
    return std::hypot(p.x - q.x, p.y - q.y);
}

std::string SierpinskiModel::formatAddress(const Address& a) const {
    std::string s = std::to_string(a.level()) + ":";
    for (int i = 0; i < a.level(); ++i) s += static_cast<char>('0' + a.digit(i));
    return s;
}

Address SierpinskiModel::parseAddress(const std::string& text) const {
    auto colon = text.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("address must look like 'level:digits'");
    int level = std::stoi(text.substr(0, colon));
    std::string digits = text.substr(colon + 1);
    if (static_cast<int>(digits.size()) != level)
        throw std::invalid_argument("address '" + text + "': digit count does not match level");
    std::vector<std::uint8_t> d;
    d.reserve(digits.size());
    for (char c : digits) {
        if (c < '1' || c > '3') throw std::invalid_argument("address digit must be 1..3");
        d.push_back(static_cast<std::uint8_t>(c - '0'));
    }
    return Address(std::move(d));
}

bool SierpinskiModel::triangleContainsRepresentative(const Address& cell, const Address& pointCell) const {
    // Representative of pointCell is ((3bx+1)/(3*2^jp), (3by+1)/(3*2^jp)); the
    // cell triangle at level jc has corner (ax, ay)/2^jc and leg 2^-jc.
    // All comparisons are exact in 64-bit integers for jc + jp <= 60.
    long long ax, ay, bx, by;
    cornerUnits(cell, ax, ay);
    cornerUnits(pointCell, bx, by);
    int jc = cell.level(), jp = pointCell.level();
    long long px = 3 * bx + 1, py = 3 * by + 1;  // over 3*2^jp
    long long lhsx = px << jc, lhsy = py << jc;  // over 3*2^(jp+jc)
    long long cx = 3 * ax, cy = 3 * ay;          // over 3*2^jc
    long long rhsx = cx << jp, rhsy = cy << jp;
    if (lhsx < rhsx || lhsy < rhsy) return false;
    long long diag = (3 * (ax + ay + 1)) << jp;
    return lhsx + lhsy <= diag;
}

// ---------------------------------------------------------------------------
// HalfLineWeightModel

HalfLineWeightModel::HalfLineWeightModel(int windowExponent)
    : m0_(windowExponent), window_(pow2d(windowExponent)) {
    if (windowExponent < 0) throw std::invalid_argument("window exponent must be >= 0");
}

long long HalfLineWeightModel::intervalIndex(const Address& a) const {
    long long k = 0;
    for (int i = 0; i < a.level(); ++i) k = 2 * k + (a.digit(i) - 1);
    return k;
}

void HalfLineWeightModel::intervalEndpoints(const Address& a, double& lo, double& hi) const {
    double len = window_ * pow2d(-a.level());
    long long k = intervalIndex(a);
    lo = static_cast<double>(k) * len;
    hi = static_cast<double>(k + 1) * len;
}

double HalfLineWeightModel::cellMeasure(const Address& a) const {
    validateAddress(a);
    double lo, hi;
    intervalEndpoints(a, lo, hi);
    // primitive of x^-1/2 is 2 sqrt(x)
    return 2.0 * std::sqrt(hi) - 2.0 * std::sqrt(lo);
}

Point HalfLineWeightModel::representativePoint(const Address& a) const {
    validateAddress(a);
    double lo, hi;
    intervalEndpoints(a, lo, hi);
    return {0.5 * (lo + hi), 0.0};
}

double HalfLineWeightModel::cellDiameter(const Address& a) const {
    return window_ * pow2d(-a.level());
}

double HalfLineWeightModel::distance(const Point& p, const Point& q) const {
    return std::abs(p.x - q.x);
}

std::string HalfLineWeightModel::formatAddress(const Address& a) const {
    return std::to_string(a.level()) + ":" + (a.level() == 0 ? "" : std::to_string(intervalIndex(a)));
}

Address HalfLineWeightModel::parseAddress(const std::string& text) const {
    auto colon = text.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("address must look like 'level:index'");
    int level = std::stoi(text.substr(0, colon));
    std::string rest = text.substr(colon + 1);
    long long k = 0;
    if (level > 0) {
        k = std::stoll(rest);
        if (k < 0 || k >= (1LL << level))
            throw std::invalid_argument("interval index " + rest + " outside 0..2^level-1");
    } else if (!rest.empty()) {
        throw std::invalid_argument("top interval is '0:'");
    }
    std::vector<std::uint8_t> d(static_cast<std::size_t>(level));
    for (int i = level - 1; i >= 0; --i) {
        d[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>((k & 1) + 1);
        k >>= 1;
    }
    return Address(std::move(d));
}

// ---------------------------------------------------------------------------

double ahlfors_ratio(const SpaceModel& model, const Address& x, double r) {
    auto gamma = model.ahlforsExponent();
    if (!gamma)
        throw std::invalid_argument(model.name() + " model has no Ahlfors exponent; ball/r^gamma ratio undefined");
    int levelJ = x.level();
    Address top;
    double rMin = model.cellDiameter(x);
    double rMax = model.cellDiameter(top);
    if (r < rMin || r > rMax)
        throw std::invalid_argument("radius " + std::to_string(r) + " outside resolvable range [" +
                                    std::to_string(rMin) + ", " + std::to_string(rMax) + "]");
    Point center = model.representativePoint(x);
    double ball = 0.0;
    std::function<void(const Address&)> walk = [&](const Address& a) {
        if (a.level() == levelJ) {
            if (model.distance(center, model.representativePoint(a)) < r) ball += model.cellMeasure(a);
            return;
        }
        for (int c = 1; c <= model.branching(a); ++c) walk(a.child(c));
    };
    walk(top);
    return ball / std::pow(r, *gamma);
}

}  // namespace fraclap
