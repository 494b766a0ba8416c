#pragma once

#include "hjb/errors.hpp"
#include "hjb/grid.hpp"
#include "hjb/operator.hpp"

#include <Eigen/SparseLU>

#include <vector>

namespace hjb::detail {

using ColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

/// Sparse LU that keeps its symbolic analysis while the pattern is unchanged.
class LinearSolver {
public:
    void factor(const ColMatrix& a, const char* context) {
        if (!analyzed_ || a.rows() != rows_ || a.nonZeros() != nnz_ ||
            !std::equal(a.outerIndexPtr(), a.outerIndexPtr() + a.outerSize() + 1, outer_.begin()) ||
            !std::equal(a.innerIndexPtr(), a.innerIndexPtr() + a.nonZeros(), inner_.begin())) {
            lu_.analyzePattern(a);
            rows_ = a.rows();
            nnz_ = a.nonZeros();
            outer_.assign(a.outerIndexPtr(), a.outerIndexPtr() + a.outerSize() + 1);
            inner_.assign(a.innerIndexPtr(), a.innerIndexPtr() + a.nonZeros());
            analyzed_ = true;
        }
        lu_.factorize(a);
        if (lu_.info() != Eigen::Success) {
            throw LinearSolveFailure(std::string(context) + ": sparse factorization failed (" + lu_.lastErrorMessage() + ")");
        }
    }

    void factor(const SparseMatrix& a, const char* context) {
        ColMatrix c = a;
        c.makeCompressed();
        factor(c, context);
    }

    Vector solve(const Vector& b, const char* context) {
        Vector x = lu_.solve(b);
        if (lu_.info() != Eigen::Success || !x.allFinite()) {
            throw LinearSolveFailure(std::string(context) + ": sparse solve failed");
        }
        return x;
    }

private:
    Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>> lu_;
    bool analyzed_ = false;
    Eigen::Index rows_ = 0;
    Eigen::Index nnz_ = 0;
    std::vector<int> outer_;
    std::vector<int> inner_;
};

/// Adds `diag` to the (always stored) diagonal of a copy of `a`.
inline SparseMatrix add_diagonal(SparseMatrix a, const Vector& diag) {
    for (Eigen::Index r = 0; r < a.outerSize(); ++r) a.coeffRef(r, r) += diag[r];
    return a;
}

inline SparseMatrix add_diagonal(SparseMatrix a, double shift) {
    for (Eigen::Index r = 0; r < a.outerSize(); ++r) a.coeffRef(r, r) += shift;
    return a;
}

}  // namespace hjb::detail
