#include "bowenlab/linalg.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

namespace bowenlab {

Mat gram_schmidt(const Mat& columns, double rank_tol) {
    Mat q = columns;
    const int n = static_cast<int>(q.cols());
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < j; ++i)
            q.col(j) -= q.col(i).dot(q.col(j)) * q.col(i);
        const double nrm = q.col(j).norm();
        if (nrm < rank_tol)
            throw domain_error("gram_schmidt: rank-deficient spanning set");
        q.col(j) /= nrm;
        // Second pass for columns that lost orthogonality to round-off.
        for (int i = 0; i < j; ++i)
            q.col(j) -= q.col(i).dot(q.col(j)) * q.col(i);
        q.col(j) /= q.col(j).norm();
    }
    return q;
}

Subspace::Subspace(int ambient_dim, const Mat& spanning) {
    if (spanning.rows() != ambient_dim)
        throw dimension_error("Subspace: spanning vectors do not match ambient_dim");
    if (spanning.cols() < 1 || spanning.cols() > spanning.rows())
        throw dimension_error("Subspace: rank must satisfy 1 <= rank <= ambient_dim");
    basis_ = gram_schmidt(spanning);
}

double Subspace::orthonormality_defect() const {
    Mat g = basis_.transpose() * basis_;
    g -= Mat::Identity(g.rows(), g.cols());
    return g.cwiseAbs().maxCoeff();
}

double subspace_angle(const Subspace& a, const Subspace& b) {
    if (a.ambient_dim() != b.ambient_dim() || a.rank() != b.rank())
        throw dimension_error("subspace_angle: rank or ambient dimension mismatch");
    Mat m = a.basis().transpose() * b.basis();
    Eigen::JacobiSVD<Mat> svd(m);
    // Smallest singular value = cosine of the largest principal angle.
    double c = svd.singularValues().minCoeff();
    c = std::clamp(c, -1.0, 1.0);
    return std::acos(c);
}

double gram_volume(const std::vector<Vec>& vectors) {
    if (vectors.empty())
        throw domain_error("gram_volume: empty vector list");
    const auto n = vectors.front().size();
    for (const Vec& v : vectors)
        if (v.size() != n)
            throw dimension_error("gram_volume: vectors of mixed length");
    if (static_cast<Eigen::Index>(vectors.size()) > n)
        throw dimension_error("gram_volume: more vectors than ambient dimension");
    Mat g(n, static_cast<Eigen::Index>(vectors.size()));
    for (std::size_t j = 0; j < vectors.size(); ++j) g.col(static_cast<Eigen::Index>(j)) = vectors[j];
    Mat gtg = g.transpose() * g;
    const double det = gtg.determinant();
    return det <= 0.0 ? 0.0 : std::sqrt(det);
}

double operator_norm(const Mat& m) {
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues().maxCoeff();
}

double conorm(const Mat& m) {
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues().minCoeff();
}

CocycleProduct CocycleProduct::from_factors(std::vector<Mat> factors) {
    CocycleProduct c;
    if (factors.empty())
        throw domain_error("CocycleProduct: no factors");
    Mat v = factors.front();
    for (std::size_t i = 1; i < factors.size(); ++i) v = v * factors[i];
    c.factors = std::move(factors);
    c.value = v;
    c.log_norm = std::log(operator_norm(v));
    c.log_conorm = std::log(conorm(v));
    return c;
}

} // namespace bowenlab
