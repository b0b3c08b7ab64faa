#pragma once

// Circular correlation, circular convolution and involution over real
// vectors, with a direct O(d^2) route and an FFT route of exact length d.
//
//   ccorr:  c_k = sum_i a_i * b_{(k + i) mod d}
//   cconv:  c_k = sum_i a_i * b_{(k - i) mod d}
//   involution: abar_i = a_{(-i) mod d}
//
// Correlation is computed in the frequency domain as
// F^-1(conj(F(a)) . F(b)), convolution as F^-1(F(a) . F(b)).

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "hole/error.hpp"

namespace hole {

using DenseVector = std::vector<double>;
using Spectrum = std::vector<std::complex<double>>;

enum class Backend { Naive, Fft };

inline DenseVector delta(std::size_t d) {
  DenseVector v(d, 0.0);
  if (d > 0) v[0] = 1.0;
  return v;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  // Four partial sums; the compiler vectorizes this without -ffast-math.
  const std::size_t n = a.size();
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

inline double squared_norm(std::span<const double> a) { return dot(a, a); }

namespace detail {

inline void require_same_length(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "lengths " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  if (a.empty()) throw Error(ErrorCode::DimensionMismatch, "vectors must have length >= 1");
}

inline void require_finite(std::span<const double> a) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i])) {
      throw Error(ErrorCode::NonFinite, "entry " + std::to_string(i) + " is not finite");
    }
  }
}

// The FFTW planner is not reentrant; executing an existing plan is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace detail

// Direct evaluation. No argument checking; out must not alias a or b.
inline void ccorr_naive(std::span<const double> a, std::span<const double> b,
                        std::span<double> out) {
  const std::size_t d = a.size();
  for (std::size_t k = 0; k < d; ++k) {
    double acc = 0.0;
    std::size_t j = k;
    for (std::size_t i = 0; i < d; ++i) {
      acc += a[i] * b[j];
      if (++j == d) j = 0;
    }
    out[k] = acc;
  }
}

// Terms a_i b_j and a_j b_i are summed as one pair, visited by the smaller
// index, so cconv(a, b) and cconv(b, a) are bit-identical.
inline void cconv_naive(std::span<const double> a, std::span<const double> b,
                        std::span<double> out) {
  const std::size_t d = a.size();
  for (std::size_t k = 0; k < d; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const std::size_t j = (k + d - i) % d;
      if (i < j) {
        acc += a[i] * b[j] + a[j] * b[i];
      } else if (i == j) {
        acc += a[i] * b[i];
      }
    }
    out[k] = acc;
  }
}

inline void involution_into(std::span<const double> a, std::span<double> out) {
  const std::size_t d = a.size();
  if (d == 0) return;
  out[0] = a[0];
  for (std::size_t i = 1; i < d; ++i) out[i] = a[d - i];
}

// Reusable FFT plans and workspace, cached per transform length. Not
// shareable across threads; use one per worker (see thread_fft_context()).
class FftContext {
 public:
  FftContext() = default;
  FftContext(const FftContext&) = delete;
  FftContext& operator=(const FftContext&) = delete;
  FftContext(FftContext&&) = default;
  FftContext& operator=(FftContext&&) = default;

  static std::size_t spectrum_size(std::size_t d) { return d / 2 + 1; }

  // Unnormalized forward real-to-complex transform of x into spec.
  void forward(std::span<const double> x, Spectrum& spec) {
    Plan& p = plan_for(x.size());
    std::copy(x.begin(), x.end(), p.real);
    fftw_execute(p.r2c);
    const std::size_t m = spectrum_size(x.size());
    spec.resize(m);
    const auto* c = reinterpret_cast<const std::complex<double>*>(p.freq);
    std::copy(c, c + m, spec.begin());
  }

  // Inverse transform scaled by 1/d, so inverse(forward(x)) == x.
  void inverse(const Spectrum& spec, std::span<double> out) {
    const std::size_t d = out.size();
    Plan& p = plan_for(d);
    auto* c = reinterpret_cast<std::complex<double>*>(p.freq);
    std::copy(spec.begin(), spec.begin() + static_cast<std::ptrdiff_t>(spectrum_size(d)), c);
    fftw_execute(p.c2r);
    const double scale = 1.0 / static_cast<double>(d);
    for (std::size_t i = 0; i < d; ++i) out[i] = p.real[i] * scale;
  }

  void ccorr(std::span<const double> a, std::span<const double> b, std::span<double> out) {
    forward(a, spec_a_);
    forward(b, spec_b_);
    for (std::size_t i = 0; i < spec_a_.size(); ++i) spec_a_[i] = std::conj(spec_a_[i]) * spec_b_[i];
    inverse(spec_a_, out);
  }

  void cconv(std::span<const double> a, std::span<const double> b, std::span<double> out) {
    forward(a, spec_a_);
    forward(b, spec_b_);
    for (std::size_t i = 0; i < spec_a_.size(); ++i) spec_a_[i] *= spec_b_[i];
    inverse(spec_a_, out);
  }

 private:
  struct Plan {
    std::size_t d = 0;
    double* real = nullptr;
    fftw_complex* freq = nullptr;
    fftw_plan r2c = nullptr;
    fftw_plan c2r = nullptr;

    explicit Plan(std::size_t n) : d(n) {
      std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
      real = fftw_alloc_real(n);
      freq = fftw_alloc_complex(spectrum_size(n));
      const int len = static_cast<int>(n);
      r2c = fftw_plan_dft_r2c_1d(len, real, freq, FFTW_ESTIMATE);
      c2r = fftw_plan_dft_c2r_1d(len, freq, real, FFTW_ESTIMATE);
    }
    Plan(const Plan&) = delete;
    Plan& operator=(const Plan&) = delete;
    ~Plan() {
      std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
      fftw_destroy_plan(r2c);
      fftw_destroy_plan(c2r);
      fftw_free(real);
      fftw_free(freq);
    }
  };

  Plan& plan_for(std::size_t d) {
    if (last_ != nullptr && last_->d == d) return *last_;
    auto it = plans_.find(d);
    if (it == plans_.end()) it = plans_.emplace(d, std::make_unique<Plan>(d)).first;
    last_ = it->second.get();
    return *last_;
  }

  std::unordered_map<std::size_t, std::unique_ptr<Plan>> plans_;
  Plan* last_ = nullptr;
  Spectrum spec_a_, spec_b_;
};

inline FftContext& thread_fft_context() {
  thread_local FftContext ctx;
  return ctx;
}

// Checked entry points.

inline DenseVector ccorr(std::span<const double> a, std::span<const double> b,
                         Backend backend = Backend::Fft) {
  detail::require_same_length(a, b);
  detail::require_finite(a);
  detail::require_finite(b);
  DenseVector out(a.size());
  if (backend == Backend::Naive) {
    ccorr_naive(a, b, out);
  } else {
    thread_fft_context().ccorr(a, b, out);
  }
  return out;
}

inline DenseVector cconv(std::span<const double> a, std::span<const double> b,
                         Backend backend = Backend::Fft) {
  detail::require_same_length(a, b);
  detail::require_finite(a);
  detail::require_finite(b);
  DenseVector out(a.size());
  if (backend == Backend::Naive) {
    cconv_naive(a, b, out);
  } else {
    thread_fft_context().cconv(a, b, out);
  }
  return out;
}

inline DenseVector involution(std::span<const double> a) {
  if (a.empty()) throw Error(ErrorCode::DimensionMismatch, "vectors must have length >= 1");
  detail::require_finite(a);
  DenseVector out(a.size());
  involution_into(a, out);
  return out;
}

}  // namespace hole
