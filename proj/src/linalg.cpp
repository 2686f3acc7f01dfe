#include "ffdshell/linalg.hpp"

namespace ffdshell {

SpMat kron(const SpMat& a, const SpMat& b) {
  TripletList trips;
  trips.reserve(static_cast<std::size_t>(a.nonZeros()) * b.nonZeros());
  for (int ka = 0; ka < a.outerSize(); ++ka)
    for (SpMat::InnerIterator ia(a, ka); ia; ++ia)
      for (int kb = 0; kb < b.outerSize(); ++kb)
        for (SpMat::InnerIterator ib(b, kb); ib; ++ib)
          trips.emplace_back(ia.row() * b.rows() + ib.row(), ia.col() * b.cols() + ib.col(),
                             ia.value() * ib.value());
  SpMat out(a.rows() * b.rows(), a.cols() * b.cols());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

SpMat expand_components(const SpMat& a, int n) {
  TripletList trips;
  trips.reserve(static_cast<std::size_t>(a.nonZeros()) * n);
  for (int k = 0; k < a.outerSize(); ++k)
    for (SpMat::InnerIterator it(a, k); it; ++it)
      for (int c = 0; c < n; ++c) trips.emplace_back(it.row() * n + c, it.col() * n + c, it.value());
  SpMat out(a.rows() * n, a.cols() * n);
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

void append_block(TripletList& out, const SpMat& block, int row0, int col0) {
  for (int k = 0; k < block.outerSize(); ++k)
    for (SpMat::InnerIterator it(block, k); it; ++it)
      out.emplace_back(row0 + it.row(), col0 + it.col(), it.value());
}

SpMat selection_matrix(const std::vector<int>& indices, int ncols) {
  TripletList trips;
  for (std::size_t r = 0; r < indices.size(); ++r) trips.emplace_back(static_cast<int>(r), indices[r], 1.0);
  SpMat out(static_cast<int>(indices.size()), ncols);
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

}  // namespace ffdshell
