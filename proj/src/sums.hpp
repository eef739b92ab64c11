#pragma once

// Scaled log-domain sums shared by the transform and quantisation code.

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "ultraloc/numerics.hpp"

namespace ultraloc::detail {

using cd = std::complex<double>;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

// Trapezoid weights in log form for an n-point grid.
inline double log_trap_weight(std::size_t k, std::size_t n, double log_dx) {
  return (k == 0 || k + 1 == n) ? log_dx + std::log(0.5) : log_dx;
}

// Relative terms a_k = exp(lm_k - top) e^{i ph_k} for an active index range.
struct Scaled {
  double top = kNegInf;
  std::size_t lo = 0, hi = 0;  // active range [lo, hi)
  std::vector<cd> a;
  std::size_t n_terms = 0;
};

inline Scaled rescale(std::span<const LogComplex> terms, double drop = 60.0) {
  Scaled s;
  s.n_terms = terms.size();
  for (const auto& t : terms) s.top = std::max(s.top, t.logmag);
  if (s.top == kNegInf) return s;
  s.lo = terms.size();
  for (std::size_t k = 0; k < terms.size(); ++k) {
    if (terms[k].logmag >= s.top - drop) {
      s.lo = std::min(s.lo, k);
      s.hi = k + 1;
    }
  }
  s.a.resize(s.hi - s.lo);
  for (std::size_t k = s.lo; k < s.hi; ++k) {
    const auto& t = terms[k];
    s.a[k - s.lo] = t.is_zero() ? cd(0.0) : std::polar(std::exp(t.logmag - s.top), t.phase);
  }
  return s;
}

// sum_k a_k e^{i omega coord_k}, coord_k = c0 + k dc, by rotation recurrence.
inline cd phased_sum(const Scaled& s, double omega, double c0, double dc) {
  if (s.a.empty()) return 0.0;
  const double start = c0 + static_cast<double>(s.lo) * dc;
  cd rot = std::polar(1.0, omega * start);
  const cd step = std::polar(1.0, omega * dc);
  cd acc = 0.0;
  for (std::size_t k = 0; k < s.a.size(); ++k) {
    if ((k & 63) == 0) rot = std::polar(1.0, omega * (start + static_cast<double>(k) * dc));
    acc += s.a[k] * rot;
    rot *= step;
  }
  return acc;
}

inline LogComplex finish(const Scaled& s, cd acc) { return finish_scaled_sum(s.top, acc, s.n_terms).value; }

inline bool boundary_warning(const SampledFunction& f) {
  const double top = f.max_logmag();
  if (top == kNegInf) return false;
  return std::max(f[0].logmag, f[f.size() - 1].logmag) - top > std::log(1e-14);
}

}  // namespace ultraloc::detail
