#pragma once
// Independent reference implementations used only by tests and the
// acceptance binary. Deliberately written without sharing code with src/.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace oracle {

/// Dense Gaussian elimination with partial pivoting. Solves A x = b in place.
inline std::vector<double> solve(std::vector<std::vector<double>> A, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
    std::swap(A[col], A[piv]);
    std::swap(b[col], b[piv]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = A[r][col] / A[col][col];
      for (std::size_t c = col; c < n; ++c) A[r][c] -= f * A[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double acc = b[i];
    for (std::size_t c = i + 1; c < n; ++c) acc -= A[i][c] * x[c];
    x[i] = acc / A[i][i];
  }
  return x;
}

/// k-th derivative of t^p.
inline double mono(int p, int k, double t) {
  if (k > p) return 0.0;
  double coef = 1.0;
  for (int i = 0; i < k; ++i) coef *= (p - i);
  return coef * std::pow(t, p - k);
}

/// Full 6x6 boundary solve for a quintic.
inline std::vector<double> quintic(const double s0[3], const double s1[3], double T) {
  std::vector<std::vector<double>> A(6, std::vector<double>(6));
  std::vector<double> b(6);
  for (int k = 0; k < 3; ++k) {
    for (int p = 0; p < 6; ++p) {
      A[k][p] = mono(p, k, 0.0);
      A[3 + k][p] = mono(p, k, T);
    }
    b[k] = s0[k];
    b[3 + k] = s1[k];
  }
  return solve(A, b);
}

/// Full 5x5 boundary solve for a velocity-keeping quartic.
inline std::vector<double> quartic(const double s0[3], const double s1[2], double T) {
  std::vector<std::vector<double>> A(5, std::vector<double>(5));
  std::vector<double> b(5);
  for (int k = 0; k < 3; ++k) {
    for (int p = 0; p < 5; ++p) A[k][p] = mono(p, k, 0.0);
    b[k] = s0[k];
  }
  for (int k = 0; k < 2; ++k) {
    for (int p = 0; p < 5; ++p) A[3 + k][p] = mono(p, k + 1, T);
    b[3 + k] = s1[k];
  }
  return solve(A, b);
}

inline double eval(const std::vector<double>& c, int k, double t) {
  double acc = 0.0;
  for (std::size_t p = 0; p < c.size(); ++p) acc += c[p] * mono(static_cast<int>(p), k, t);
  return acc;
}

/// Intelligent Driver Model written directly from the textbook formula.
inline double idm(double v, double v_lead, double gap, double v0, double T, double a, double b,
                  double delta, double s0) {
  const double s_star = s0 + std::max(0.0, v * T + v * (v - v_lead) / (2.0 * std::sqrt(a * b)));
  return a * (1.0 - std::pow(v / v0, delta) - (s_star / gap) * (s_star / gap));
}

}  // namespace oracle
