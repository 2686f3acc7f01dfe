#pragma once

// Small 3-vector helpers usable with double and ad::Dual scalars.

#include <array>

#include "ffdshell/dual.hpp"

namespace ffdshell::ad {

template <class S>
using V3 = std::array<S, 3>;

template <class S>
V3<S> load3(const S* q, int offset) {
  return {q[offset], q[offset + 1], q[offset + 2]};
}

template <class S>
S dot(const V3<S>& a, const V3<S>& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

template <class S>
V3<S> cross(const V3<S>& a, const V3<S>& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

template <class S>
V3<S> sub(const V3<S>& a, const V3<S>& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

template <class S>
V3<S> add(const V3<S>& a, const V3<S>& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}

template <class S, class C>
V3<S> scale(const V3<S>& a, const C& c) {
  return {a[0] * c, a[1] * c, a[2] * c};
}

template <class S>
S norm(const V3<S>& a) {
  using std::sqrt;
  return sqrt(dot(a, a));
}

template <class S>
V3<S> unit(const V3<S>& a) {
  const S n = norm(a);
  return {a[0] / n, a[1] / n, a[2] / n};
}

}  // namespace ffdshell::ad
