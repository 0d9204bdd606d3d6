#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <type_traits>
#include <vector>

namespace tofsi {

// The forward pipeline is generic over the scalar so the complex-step
// derivative oracle can run the exact production code path. S is double or
// std::complex<double>.

template <class S>
struct is_complex_scalar : std::false_type {};
template <class T>
struct is_complex_scalar<std::complex<T>> : std::true_type {};

template <class S>
inline constexpr bool is_complex_v = is_complex_scalar<S>::value;

inline double real_part(double v) { return v; }
inline double real_part(const std::complex<double>& v) { return v.real(); }
inline double imag_part(double) { return 0.0; }
inline double imag_part(const std::complex<double>& v) { return v.imag(); }

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const std::complex<double>& v) { return std::abs(v); }

// l2 norms of the real and imaginary components, tracked separately: in a
// complex-step run the imaginary part carries the derivative information and
// converges on its own (much smaller) scale.
struct SplitNorm {
  double re = 0.0;
  double im = 0.0;
  double combined() const { return std::sqrt(re * re + im * im); }
};

template <class S>
SplitNorm split_norm(std::span<const S> v) {
  double sre = 0.0, sim = 0.0;
  for (const S& x : v) {
    const double r = real_part(x), i = imag_part(x);
    sre += r * r;
    sim += i * i;
  }
  return {std::sqrt(sre), std::sqrt(sim)};
}

template <class S>
SplitNorm split_norm(const std::vector<S>& v) {
  return split_norm(std::span<const S>(v));
}

template <class To, class From>
std::vector<To> scalar_cast(const std::vector<From>& v) {
  std::vector<To> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = To(v[i]);
  return out;
}

}  // namespace tofsi
