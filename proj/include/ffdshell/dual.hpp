#pragma once

// Forward-mode automatic differentiation with a fixed number of directions.
// Nesting Dual<Dual<double, N>, M> yields second derivatives; this is how
// all element-level tangents and cross partials in the library are formed.

#include <array>
#include <cmath>
#include <type_traits>

namespace ffdshell::ad {

template <class T, int N>
struct Dual {
  T v{};
  std::array<T, N> d{};

  Dual() { d.fill(T(0.0)); }
  Dual(double c) : v(c) { d.fill(T(0.0)); }  // NOLINT(google-explicit-constructor)
  template <class U = T, std::enable_if_t<!std::is_same_v<U, double>, int> = 0>
  Dual(const T& c) : v(c) {  // NOLINT(google-explicit-constructor)
    d.fill(T(0.0));
  }

  Dual& operator+=(const Dual& o) {
    v += o.v;
    for (int i = 0; i < N; ++i) d[i] += o.d[i];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    for (int i = 0; i < N; ++i) d[i] -= o.d[i];
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    for (int i = 0; i < N; ++i) d[i] = d[i] * o.v + v * o.d[i];
    v *= o.v;
    return *this;
  }
  Dual& operator*=(double c) {
    v *= c;
    for (int i = 0; i < N; ++i) d[i] *= c;
    return *this;
  }
};

template <class S>
struct is_dual : std::false_type {};
template <class T, int N>
struct is_dual<Dual<T, N>> : std::true_type {};

inline double value(double x) { return x; }
template <class T, int N>
double value(const Dual<T, N>& x) {
  return value(x.v);
}

template <class T, int N>
Dual<T, N> operator-(const Dual<T, N>& a) {
  Dual<T, N> r;
  r.v = -a.v;
  for (int i = 0; i < N; ++i) r.d[i] = -a.d[i];
  return r;
}

template <class T, int N>
Dual<T, N> operator+(Dual<T, N> a, const Dual<T, N>& b) {
  a += b;
  return a;
}
template <class T, int N>
Dual<T, N> operator-(Dual<T, N> a, const Dual<T, N>& b) {
  a -= b;
  return a;
}
template <class T, int N>
Dual<T, N> operator*(const Dual<T, N>& a, const Dual<T, N>& b) {
  Dual<T, N> r;
  r.v = a.v * b.v;
  for (int i = 0; i < N; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
  return r;
}
template <class T, int N>
Dual<T, N> operator/(const Dual<T, N>& a, const Dual<T, N>& b) {
  Dual<T, N> r;
  const T inv = T(1.0) / b.v;
  r.v = a.v * inv;
  for (int i = 0; i < N; ++i) r.d[i] = (a.d[i] - r.v * b.d[i]) * inv;
  return r;
}

template <class T, int N>
Dual<T, N> operator+(Dual<T, N> a, double c) {
  a.v += c;
  return a;
}
template <class T, int N>
Dual<T, N> operator+(double c, Dual<T, N> a) {
  a.v += c;
  return a;
}
template <class T, int N>
Dual<T, N> operator-(Dual<T, N> a, double c) {
  a.v -= c;
  return a;
}
template <class T, int N>
Dual<T, N> operator-(double c, const Dual<T, N>& a) {
  Dual<T, N> r = -a;
  r.v += c;
  return r;
}
template <class T, int N>
Dual<T, N> operator*(Dual<T, N> a, double c) {
  a *= c;
  return a;
}
template <class T, int N>
Dual<T, N> operator*(double c, Dual<T, N> a) {
  a *= c;
  return a;
}
template <class T, int N>
Dual<T, N> operator/(Dual<T, N> a, double c) {
  a *= 1.0 / c;
  return a;
}
template <class T, int N>
Dual<T, N> operator/(double c, const Dual<T, N>& b) {
  return Dual<T, N>(c) / b;
}

using std::sqrt;
template <class T, int N>
Dual<T, N> sqrt(const Dual<T, N>& a) {
  Dual<T, N> r;
  r.v = sqrt(a.v);
  const T half_inv = 0.5 / r.v;
  for (int i = 0; i < N; ++i) r.d[i] = a.d[i] * half_inv;
  return r;
}

// Sign-following absolute value; derivative taken from the active branch.
inline double abs_value(double x) { return std::abs(x); }
template <class T, int N>
Dual<T, N> abs_value(const Dual<T, N>& a) {
  return value(a) < 0.0 ? -a : a;
}

/// Value and gradient of f with respect to the entries of q listed in `in`.
template <int NIn, std::size_t NQ, class F>
double gradient(F&& f, const std::array<double, NQ>& q, const std::array<int, NIn>& in,
                double* grad) {
  using S = Dual<double, NIn>;
  std::array<S, NQ> x;
  for (std::size_t i = 0; i < NQ; ++i) x[i] = S(q[i]);
  for (int k = 0; k < NIn; ++k) x[in[k]].d[k] = 1.0;
  const S r = f(x.data());
  for (int k = 0; k < NIn; ++k) grad[k] = r.d[k];
  return r.v;
}

/// Value, gradient over `in`, and the (NOut x NIn) block of second derivatives
/// d2f / dq[out[a]] dq[in[b]], row-major in `hess`.
template <int NIn, int NOut, std::size_t NQ, class F>
double hessian_block(F&& f, const std::array<double, NQ>& q, const std::array<int, NIn>& in,
                     const std::array<int, NOut>& out, double* grad, double* hess) {
  using Inner = Dual<double, NIn>;
  using S = Dual<Inner, NOut>;
  std::array<S, NQ> x;
  for (std::size_t i = 0; i < NQ; ++i) x[i] = S(q[i]);
  for (int k = 0; k < NIn; ++k) x[in[k]].v.d[k] = 1.0;
  for (int a = 0; a < NOut; ++a) x[out[a]].d[a].v = 1.0;
  const S r = f(x.data());
  for (int k = 0; k < NIn; ++k) grad[k] = r.v.d[k];
  for (int a = 0; a < NOut; ++a)
    for (int k = 0; k < NIn; ++k) hess[a * NIn + k] = r.d[a].d[k];
  return r.v.v;
}

/// Vector-valued f (NF outputs): values and Jacobian rows over `in`.
template <int NF, int NIn, std::size_t NQ, class F>
void jacobian(F&& f, const std::array<double, NQ>& q, const std::array<int, NIn>& in,
              double* val, double* jac) {
  using S = Dual<double, NIn>;
  std::array<S, NQ> x;
  for (std::size_t i = 0; i < NQ; ++i) x[i] = S(q[i]);
  for (int k = 0; k < NIn; ++k) x[in[k]].d[k] = 1.0;
  const std::array<S, NF> r = f(x.data());
  for (int c = 0; c < NF; ++c) {
    val[c] = r[c].v;
    for (int k = 0; k < NIn; ++k) jac[c * NIn + k] = r[c].d[k];
  }
}

template <int N>
constexpr std::array<int, N> iota_indices(int start = 0) {
  std::array<int, N> r{};
  for (int i = 0; i < N; ++i) r[i] = start + i;
  return r;
}

}  // namespace ffdshell::ad
