#pragma once

// glibc's <resolv.h> (reachable through socket headers) leaks an object-like
// `_res` macro that corrupts Eigen's function declarations.
#ifdef _res
#undef _res
#endif

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <algorithm>
#include <vector>

#include "tarkit/error.hpp"
#include "tarkit/tfidf.hpp"

namespace tarkit {

/// Projects sparse tf-idf vectors onto the top right-singular directions of a
/// fitted document-term matrix. Inner products between projections of matrix
/// rows match the originals when the rank covers the matrix rank.
class SvdProjector {
  public:
    SvdProjector() = default;

    size_t rank() const { return static_cast<size_t>(basis_.cols()); }
    size_t input_dim() const { return static_cast<size_t>(basis_.rows()); }
    bool fitted() const { return basis_.size() > 0; }

    /// basis_^T x for a sparse input vector.
    std::vector<double> project(const SparseVector& x) const {
        if (!fitted()) fail("svd projector is not fitted");
        Eigen::VectorXd out = Eigen::VectorXd::Zero(basis_.cols());
        for (const auto& [col, value] : x) {
            if (col >= basis_.rows()) fail("svd projection input exceeds fitted dimension");
            out += value * basis_.row(col).transpose();
        }
        return {out.data(), out.data() + out.size()};
    }

    const Eigen::MatrixXd& basis() const { return basis_; }

    /// Truncated SVD of `rows` (documents × vocabulary), via the eigensystem
    /// of the smaller Gram matrix. Directions with numerically zero singular
    /// values project to zero.
    static SvdProjector fit(const std::vector<SparseVector>& rows, size_t n_columns,
                            size_t rank) {
        if (rank == 0) fail("svd rank must be positive");
        if (rank > std::min(rows.size(), n_columns))
            fail("svd rank " + std::to_string(rank) + " exceeds matrix dimensions " +
                 std::to_string(rows.size()) + "x" + std::to_string(n_columns));

        Eigen::SparseMatrix<double> a(static_cast<Eigen::Index>(rows.size()),
                                      static_cast<Eigen::Index>(n_columns));
        {
            std::vector<Eigen::Triplet<double>> triplets;
            for (size_t i = 0; i < rows.size(); ++i)
                for (const auto& [col, value] : rows[i]) {
                    if (col >= n_columns) fail("svd input column out of range");
                    triplets.emplace_back(static_cast<Eigen::Index>(i),
                                          static_cast<Eigen::Index>(col), value);
                }
            a.setFromTriplets(triplets.begin(), triplets.end());
        }

        SvdProjector p;
        const bool rows_smaller = rows.size() <= n_columns;
        Eigen::MatrixXd gram = rows_smaller ? Eigen::MatrixXd(a * a.transpose())
                                            : Eigen::MatrixXd(a.transpose() * a);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
        if (eig.info() != Eigen::Success) fail("svd eigendecomposition failed");

        // Eigenvalues come back ascending; take the top `rank`.
        Eigen::Index n = gram.rows();
        double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
        double tol = scale * 1e-12;
        p.basis_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_columns),
                                         static_cast<Eigen::Index>(rank));
        for (size_t j = 0; j < rank; ++j) {
            Eigen::Index src = n - 1 - static_cast<Eigen::Index>(j);
            double lambda = eig.eigenvalues()(src);
            if (lambda <= tol) continue;  // null direction: keep zero column
            double sigma = std::sqrt(lambda);
            if (rows_smaller) {
                // v = A^T u / sigma
                p.basis_.col(static_cast<Eigen::Index>(j)) =
                    (a.transpose() * eig.eigenvectors().col(src)) / sigma;
            } else {
                p.basis_.col(static_cast<Eigen::Index>(j)) = eig.eigenvectors().col(src);
            }
        }
        return p;
    }

  private:
    Eigen::MatrixXd basis_;  // vocabulary × rank, columns orthonormal (or zero)
};

}  // namespace tarkit
