// Copyright 2026 The hlmetro Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Scalar-generic numerical helpers: Gauss-Legendre rules, Chebyshev
// interpolation, truncated power series and least-squares lines.

#include <cmath>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace hlm {

// Nodes and weights on [-1, 1] by Newton iteration on P_n.
template <typename T = double>
std::pair<std::vector<T>, std::vector<T>> gauss_legendre(int n) {
  std::vector<T> x(n), w(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    T z = std::cos(std::numbers::pi_v<T> * (i + T(0.75)) / (n + T(0.5)));
    T dp = 0;
    for (int it = 0; it < 100; ++it) {
      T p0 = 1, p1 = z;
      for (int k = 2; k <= n; ++k) {
        T p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1;
      dp = n * (z * p1 - p0) / (z * z - 1);
      T dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 4 * std::numeric_limits<T>::epsilon()) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2 / ((1 - z * z) * dp * dp);
  }
  return {x, w};
}

// Composite rule with `panels` equal panels of `order` nodes each.
template <typename F, typename T = double>
auto integrate_gl(F&& f, T a, T b, int panels, int order = 16) {
  static thread_local std::vector<std::pair<int, std::pair<std::vector<T>, std::vector<T>>>> cache;
  const std::pair<std::vector<T>, std::vector<T>>* rule = nullptr;
  for (const auto& [k, r] : cache)
    if (k == order) rule = &r;
  if (!rule) {
    cache.emplace_back(order, gauss_legendre<T>(order));
    rule = &cache.back().second;
  }
  const T h = (b - a) / panels;
  decltype(f(a)) acc = f(a) * T(0);
  for (int p = 0; p < panels; ++p) {
    const T mid = a + (p + T(0.5)) * h;
    for (int k = 0; k < order; ++k) acc += rule->second[k] * (h / 2) * f(mid + (h / 2) * rule->first[k]);
  }
  return acc;
}

// Chebyshev interpolant of f on [a, b] from n first-kind nodes.
template <typename T = double>
struct Chebyshev {
  T a = 0, b = 1;
  std::vector<T> c;

  T operator()(T x) const {
    const T u = (2 * x - a - b) / (b - a);
    T b1 = 0, b2 = 0;
    for (int k = static_cast<int>(c.size()) - 1; k >= 1; --k) {
      T t = 2 * u * b1 - b2 + c[k];
      b2 = b1;
      b1 = t;
    }
    return u * b1 - b2 + c[0];
  }

  // Antiderivative vanishing at x0.
  Chebyshev integral(T x0) const {
    const int n = static_cast<int>(c.size());
    Chebyshev r{a, b, std::vector<T>(n + 1, T(0))};
    const T s = (b - a) / 4;
    for (int k = 1; k <= n; ++k) {
      const T prev = c[k - 1] * (k - 1 == 0 ? 2 : 1);
      const T next = k + 1 < n ? c[k + 1] : T(0);
      r.c[k] = s * (prev - next) / k;
    }
    r.c[0] -= r(x0);
    return r;
  }
};

template <typename F, typename T = double>
Chebyshev<T> chebyshev_fit(F&& f, T a, T b, int n) {
  std::vector<T> fx(n);
  for (int j = 0; j < n; ++j) {
    const T u = std::cos(std::numbers::pi_v<T> * (j + T(0.5)) / n);
    fx[j] = f((a + b) / 2 + (b - a) / 2 * u);
  }
  Chebyshev<T> ch{a, b, std::vector<T>(n)};
  for (int k = 0; k < n; ++k) {
    T s = 0;
    for (int j = 0; j < n; ++j) s += fx[j] * std::cos(std::numbers::pi_v<T> * k * (j + T(0.5)) / n);
    ch.c[k] = s * (k == 0 ? T(1) : T(2)) / n;
  }
  return ch;
}

// Truncated power series in lambda; index m holds the lambda^m coefficient.
template <typename T>
std::vector<T> series_mul(const std::vector<T>& a, const std::vector<T>& b, std::size_t len) {
  std::vector<T> r(len, T(0));
  for (std::size_t i = 0; i < std::min(len, a.size()); ++i)
    for (std::size_t j = 0; i + j < len && j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

// a / b, requires b[0] != 0.
template <typename T, typename S>
std::vector<T> series_div(const std::vector<T>& a, const std::vector<S>& b, std::size_t len) {
  std::vector<T> r(len, a.empty() ? T() : a[0] * S(0));
  for (std::size_t m = 0; m < len; ++m) {
    T acc = m < a.size() ? a[m] : r[0] * S(0);
    for (std::size_t k = 1; k <= m && k < b.size(); ++k) acc -= b[k] * r[m - k];
    r[m] = acc / b[0];
  }
  return r;
}

// log(a) for a[0] = 1, from d log a = a' / a.
template <typename T>
std::vector<T> series_log(const std::vector<T>& a, std::size_t len) {
  std::vector<T> da(len, T(0));
  for (std::size_t m = 1; m < std::min(len, a.size()); ++m) da[m - 1] = T(m) * a[m];
  std::vector<T> q = series_div(da, a, len);
  std::vector<T> r(len, T(0));
  for (std::size_t m = 1; m < len; ++m) r[m] = q[m - 1] / T(m);
  return r;
}

template <typename T>
std::vector<T> series_exp(const std::vector<T>& a, std::size_t len) {
  // e' = a' e with a[0] = 0
  std::vector<T> e(len, T(0));
  e[0] = T(1);
  for (std::size_t m = 1; m < len; ++m) {
    T acc = T(0);
    for (std::size_t k = 1; k <= m && k < a.size(); ++k) acc += T(k) * a[k] * e[m - k];
    e[m] = acc / T(m);
  }
  return e;
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double slope_stderr = 0.0;
};

template <typename T = double>
LineFit fit_line(const std::vector<T>& x, const std::vector<T>& y) {
  LineFit f;
  const std::size_t m = x.size();
  if (m < 2) return f;
  Eigen::MatrixXd A(m, 2);
  Eigen::VectorXd b(m);
  for (std::size_t k = 0; k < m; ++k) {
    A(k, 0) = static_cast<double>(x[k]);
    A(k, 1) = 1.0;
    b[k] = static_cast<double>(y[k]);
  }
  Eigen::Vector2d c = A.colPivHouseholderQr().solve(b);
  f.slope = c[0];
  f.intercept = c[1];
  const double ss_tot = (b.array() - b.mean()).square().sum();
  const double ss_res = (A * c - b).squaredNorm();
  f.r2 = ss_tot > 0 ? 1 - ss_res / ss_tot : 1.0;
  if (m > 2) {
    const double sxx = (A.col(0).array() - A.col(0).mean()).square().sum();
    f.slope_stderr = std::sqrt(ss_res / (m - 2) / sxx);
  }
  return f;
}

}  // namespace hlm
