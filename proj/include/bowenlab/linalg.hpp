#pragma once

#include <vector>

#include "bowenlab/errors.hpp"
#include "bowenlab/types.hpp"

namespace bowenlab {

// Orthonormality is maintained to this tolerance everywhere a frame is updated.
inline constexpr double kOrthoTol = 1e-12;

/// A linear subspace of R^n held as an orthonormal basis (columns).
class Subspace {
public:
    Subspace() = default;
    // Orthonormalizes the given spanning columns (modified Gram-Schmidt).
    // Throws domain_error if the columns are rank-deficient.
    Subspace(int ambient_dim, const Mat& spanning);

    int ambient_dim() const { return static_cast<int>(basis_.rows()); }
    int rank() const { return static_cast<int>(basis_.cols()); }
    const Mat& basis() const { return basis_; }

    // Orthogonal projection of v onto the subspace, as coefficients in the basis.
    Vec coords(const Vec& v) const { return basis_.transpose() * v; }
    // Embeds coefficient vector back into R^n.
    Vec embed(const Vec& c) const { return basis_ * c; }

    double orthonormality_defect() const;

private:
    Mat basis_;
};

// Modified Gram-Schmidt. Returns the orthonormalized columns; throws
// domain_error when a column drops below `rank_tol` after projection.
Mat gram_schmidt(const Mat& columns, double rank_tol = 1e-13);

// Largest principal angle between two subspaces of equal rank, in radians.
// Computed from the singular values of A^T B, clamped to [-1,1] before acos.
double subspace_angle(const Subspace& a, const Subspace& b);

// sqrt(det(G^T G)) for the matrix G stacking the given vectors as columns.
// Zero iff the vectors are linearly dependent. Throws domain_error on an empty
// list and dimension_error on mixed lengths.
double gram_volume(const std::vector<Vec>& vectors);

/// An ordered product of square matrices (a Jacobian cocycle along an orbit).
struct CocycleProduct {
    std::vector<Mat> factors; // left-to-right: value = factors[0] * factors[1] * ...
    Mat value;
    double log_norm = 0.0;   // ln of the operator norm of value
    double log_conorm = 0.0; // ln of m(value) = 1/||value^{-1}||

    static CocycleProduct from_factors(std::vector<Mat> factors);
};

// Operator norm (largest singular value) and conorm (smallest singular value)
// of a small dense matrix.
double operator_norm(const Mat& m);
double conorm(const Mat& m);

} // namespace bowenlab
