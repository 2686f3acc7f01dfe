#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <vector>

namespace ffdshell {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using SpMat = Eigen::SparseMatrix<double>;
using RowSpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;
using TripletList = std::vector<Triplet>;

/// Kronecker product of two sparse matrices.
SpMat kron(const SpMat& a, const SpMat& b);

/// a (x) I_n, i.e. every scalar entry expanded into an n x n diagonal block.
SpMat expand_components(const SpMat& a, int n);

/// Copy `block` into `out` at (row0, col0).
void append_block(TripletList& out, const SpMat& block, int row0, int col0);

/// Identity-like selection of the given global indices (rows = indices.size()).
SpMat selection_matrix(const std::vector<int>& indices, int ncols);

}  // namespace ffdshell
