#pragma once

// Reference implementations used only by tests. They follow the textbook
// definitions as literally as possible and share no code with the library.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;

inline std::size_t wrap(long long i, std::size_t d) {
  const long long n = static_cast<long long>(d);
  return static_cast<std::size_t>(((i % n) + n) % n);
}

// c_k = sum_i a_i b_{(k+i) mod d}, accumulated in long double.
inline Vec ccorr(const Vec& a, const Vec& b) {
  const std::size_t d = a.size();
  Vec c(d);
  for (std::size_t k = 0; k < d; ++k) {
    long double s = 0;
    for (std::size_t i = 0; i < d; ++i) s += static_cast<long double>(a[i]) * b[wrap(static_cast<long long>(k + i), d)];
    c[k] = static_cast<double>(s);
  }
  return c;
}

// c_k = sum_i a_i b_{(k-i) mod d}.
inline Vec cconv(const Vec& a, const Vec& b) {
  const std::size_t d = a.size();
  Vec c(d);
  for (std::size_t k = 0; k < d; ++k) {
    long double s = 0;
    for (std::size_t i = 0; i < d; ++i) {
      s += static_cast<long double>(a[i]) * b[wrap(static_cast<long long>(k) - static_cast<long long>(i), d)];
    }
    c[k] = static_cast<double>(s);
  }
  return c;
}

// Correlation through an O(d^2) discrete Fourier transform in long double:
// F^-1(conj(F a) * F b).
inline Vec ccorr_dft(const Vec& a, const Vec& b) {
  using C = std::complex<long double>;
  const std::size_t d = a.size();
  std::vector<C> fa(d), fb(d);
  const long double tau = 2.0L * std::numbers::pi_v<long double>;
  for (std::size_t k = 0; k < d; ++k) {
    for (std::size_t n = 0; n < d; ++n) {
      const C w = std::polar(1.0L, -tau * static_cast<long double>(k * n % d) / static_cast<long double>(d));
      fa[k] += static_cast<long double>(a[n]) * w;
      fb[k] += static_cast<long double>(b[n]) * w;
    }
  }
  Vec out(d);
  for (std::size_t n = 0; n < d; ++n) {
    C s = 0;
    for (std::size_t k = 0; k < d; ++k) {
      s += std::conj(fa[k]) * fb[k] *
           std::polar(1.0L, tau * static_cast<long double>(k * n % d) / static_cast<long double>(d));
    }
    out[n] = static_cast<double>(s.real() / static_cast<long double>(d));
  }
  return out;
}

inline double dot(const Vec& a, const Vec& b) {
  long double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long double>(a[i]) * b[i];
  return static_cast<double>(s);
}

inline double max_abs(const Vec& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// max_i |x_i - y_i| / max(max|y|, tiny)
inline double rel_err(const Vec& x, const Vec& y) {
  double m = 0;
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  return m / std::max(max_abs(y), 1e-300);
}

// ||x - y|| / max(||x||, ||y||, tiny)
inline double norm_rel_err(const Vec& x, const Vec& y) {
  long double diff = 0, nx = 0, ny = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    diff += (static_cast<long double>(x[i]) - y[i]) * (static_cast<long double>(x[i]) - y[i]);
    nx += static_cast<long double>(x[i]) * x[i];
    ny += static_cast<long double>(y[i]) * y[i];
  }
  const long double den = std::max({std::sqrt(nx), std::sqrt(ny), 1e-300L});
  return static_cast<double>(std::sqrt(diff) / den);
}

// Central finite differences of f at x with step h.
inline Vec numeric_gradient(const std::function<double(const Vec&)>& f, Vec x, double h = 1e-5) {
  Vec g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + h;
    const double up = f(x);
    x[i] = orig - h;
    const double down = f(x);
    x[i] = orig;
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

// Rank of scores[truth] by enumeration over the kept candidates:
// 1 + #strictly greater + #ties / 2.
inline double brute_rank(const Vec& scores, std::size_t truth, const std::function<bool(std::size_t)>& keep) {
  double rank = 1.0;
  for (std::size_t e = 0; e < scores.size(); ++e) {
    if (e == truth || !keep(e)) continue;
    if (scores[e] > scores[truth]) rank += 1.0;
    if (scores[e] == scores[truth]) rank += 0.5;
  }
  return rank;
}

// Average precision from the explicit precision/recall sequence: walk the
// list in descending-score order (stable) and add precision * delta-recall.
inline double average_precision(const Vec& scores, const std::vector<int>& labels) {
  std::vector<std::size_t> idx(scores.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return scores[x] > scores[y]; });
  double total = 0;
  for (int l : labels) total += l;
  double tp = 0, prev_recall = 0, ap = 0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    tp += labels[idx[k]];
    const double precision = tp / static_cast<double>(k + 1);
    const double recall = tp / total;
    ap += precision * (recall - prev_recall);
    prev_recall = recall;
  }
  return ap;
}

// log(1 + exp(x)) in long double.
inline double softplus(double x) {
  return static_cast<double>(std::log1p(std::exp(static_cast<long double>(x))));
}

}  // namespace oracle
