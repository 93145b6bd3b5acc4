#ifndef FRACLAP_HAAR_HPP
#define FRACLAP_HAAR_HPP

#include <utility>
#include <vector>

#include "fraclap/dyadic.hpp"

namespace fraclap {

/// One Haar wavelet: supported in its base cube, constant on each offspring,
/// zero mean and unit L2 norm.
struct HaarWavelet {
    int level = 0;        // level of the base cube
    int cubeIndex = 0;    // base cube's index within its level
    int indexInCube = 0;  // l within the cube's wavelet set
    std::vector<double> childValues;
};

/// All Haar wavelets of a tree (base cubes at levels 0..J-1) plus the explicit
/// top scaling function chi_top / sqrt(mu(top)). Wavelet ids are positions in a
/// level-major, address-ordered enumeration, stable across runs.
class HaarSystem {
public:
    explicit HaarSystem(const DyadicTree& tree);

    const DyadicTree& tree() const { return *tree_; }
    int waveletCount() const { return static_cast<int>(wavelets_.size()); }
    const HaarWavelet& wavelet(int id) const { return wavelets_[static_cast<std::size_t>(id)]; }
    const std::vector<HaarWavelet>& wavelets() const { return wavelets_; }
    double topScalingValue() const { return topScalingValue_; }
    double baseCubeMeasure(int id) const {
        const auto& h = wavelets_[static_cast<std::size_t>(id)];
        return tree_->cube(h.level, h.cubeIndex).measure;
    }
    /// Ids of the wavelets based at a given cube.
    std::vector<int> waveletsOfCube(int level, int cubeIndex) const;

    /// The wavelet as a function value on one leaf: its child value over the
    /// offspring containing the leaf, 0 outside the base cube.
    double waveletValueOnLeaf(int id, int leafIndex) const;
    CellFunction waveletAsCellFunction(int id) const;

private:
    const DyadicTree* tree_;
    std::vector<HaarWavelet> wavelets_;
    std::vector<std::vector<int>> firstWaveletOfCube_;  // per level, per cube; -1 when none
    double topScalingValue_;
};

struct HaarDecomposition {
    double topScalingCoeff = 0.0;
    std::vector<double> waveletCoeffs;  // indexed by wavelet id
};

HaarSystem build_haar_system(const DyadicTree& t);

/// Coefficients <f,h> for every wavelet plus the top scaling coefficient,
/// computed by one bottom-up pass over cube integrals.
HaarDecomposition haar_forward(const HaarSystem& sys, const CellFunction& f);

/// Reconstruction sum c0 * scaling + sum_h c_h h by one top-down pass.
CellFunction haar_inverse(const HaarSystem& sys, const HaarDecomposition& d);

/// mu-weighted average of f on each level-j cube.
CellFunction project_Pj(const HaarSystem& sys, const CellFunction& f, int j);

/// Orthogonal projection onto the span of wavelets with mu(Q(h)) > lambda;
/// the top scaling component is dropped.
CellFunction project_Pilambda(const HaarSystem& sys, const CellFunction& f, double lambda);

/// Ids of all wavelets with mu(Q(h)) <= lambda (the coercivity subspace basis,
/// top scaling coefficient forced to zero). May be empty.
std::vector<int> ker_pilambda_basis(const HaarSystem& sys, double lambda);

/// The two explicit ternary wavelets on cube (level j, index l), child values
/// 4/sqrt(42) 3^(j/2) (1, 1/4, -5/4) and 3/sqrt(14) 3^(j/2) (-2/3, 1, -1/3),
/// realized at leaf resolution. Mutually orthogonal with zero mean; squared
/// norm 1/3 under the unit top-cube normalization.
std::pair<CellFunction, CellFunction> sierpinski_reference_wavelets(const DyadicTree& t, int j, int l);

}  // namespace fraclap

#endif
