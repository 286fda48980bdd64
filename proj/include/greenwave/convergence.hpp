#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "greenwave/rng.hpp"

namespace greenwave {

// Finite MDP with fixed (policy-resolved) transition matrix. p is row-major
// n x n, each row a probability distribution.
struct MdpSpec {
  std::size_t n = 0;
  std::vector<double> p;
  std::vector<double> r;
  double lambda = 0.0;
};

inline void validate_mdp(const MdpSpec& m) {
  if (m.n == 0) throw std::invalid_argument("mdp: empty state space");
  if (m.p.size() != m.n * m.n) throw std::invalid_argument("mdp: transition matrix shape");
  if (m.r.size() != m.n) throw std::invalid_argument("mdp: reward vector shape");
  if (!(m.lambda >= 0.0 && m.lambda < 1.0))
    throw std::invalid_argument("mdp: discount must lie in [0, 1)");
  for (std::size_t i = 0; i < m.n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < m.n; ++j) {
      const double v = m.p[i * m.n + j];
      if (v < 0.0) throw std::invalid_argument("mdp: negative transition probability");
      row += v;
    }
    if (std::fabs(row - 1.0) > 1e-12)
      throw std::invalid_argument("mdp: row " + std::to_string(i) + " sums to " +
                                  std::to_string(row) + ", not 1");
  }
}

// T(u) = R + lambda * P u
inline std::vector<double> bellman_apply(const MdpSpec& m, const std::vector<double>& u) {
  if (u.size() != m.n) throw std::invalid_argument("bellman_apply: vector shape");
  std::vector<double> out(m.n);
  for (std::size_t i = 0; i < m.n; ++i) {
    double acc = 0.0;
    const double* row = m.p.data() + i * m.n;
    for (std::size_t j = 0; j < m.n; ++j) acc += row[j] * u[j];
    out[i] = m.r[i] + m.lambda * acc;
  }
  return out;
}

inline double sup_metric(const std::vector<double>& u, const std::vector<double>& v) {
  if (u.size() != v.size()) throw std::invalid_argument("sup_metric: shape mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) d = std::max(d, std::fabs(u[i] - v[i]));
  return d;
}

// d(Tu, Tv) / d(u, v); undefined at u = v.
inline double contraction_factor(const MdpSpec& m, const std::vector<double>& u,
                                 const std::vector<double>& v) {
  const double base = sup_metric(u, v);
  if (base == 0.0)
    throw std::invalid_argument("contraction_factor: u and v coincide");
  return sup_metric(bellman_apply(m, u), bellman_apply(m, v)) / base;
}

struct GershgorinDisc {
  double center = 0.0;
  double radius = 0.0;
};

struct GershgorinResult {
  std::vector<GershgorinDisc> discs;
  double bound = 0.0;  // max over rows of |center| + radius
};

// Row discs of a square matrix a (row-major n x n). Every eigenvalue lies in
// the union of the discs, so `bound` dominates the spectral radius.
inline GershgorinResult gershgorin(const std::vector<double>& a, std::size_t n) {
  if (a.size() != n * n) throw std::invalid_argument("gershgorin: matrix shape");
  GershgorinResult res;
  res.discs.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double rad = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) rad += std::fabs(a[i * n + j]);
    res.discs[i] = {a[i * n + i], rad};
    res.bound = std::max(res.bound, std::fabs(a[i * n + i]) + rad);
  }
  return res;
}

struct FixedPointResult {
  std::vector<double> value;      // direct solve of (I - lambda P) V = R
  std::size_t iterations = 0;     // value-iteration sweeps until step < tol
  bool iteration_converged = false;
  double iterate_gap = 0.0;       // sup distance of final iterate from direct solve
  bool decay_geometric = true;    // d_{k+1} <= lambda * d_k + slack throughout
  double worst_decay_excess = 0.0;
};

// Gaussian elimination with partial pivoting on (I - lambda P).
inline std::vector<double> solve_linear_fixed_point(const MdpSpec& m) {
  const std::size_t n = m.n;
  std::vector<double> a(n * n);
  std::vector<double> rhs = m.r;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      a[i * n + j] = (i == j ? 1.0 : 0.0) - m.lambda * m.p[i * n + j];
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t i = col + 1; i < n; ++i)
      if (std::fabs(a[i * n + col]) > std::fabs(a[piv * n + col])) piv = i;
    if (std::fabs(a[piv * n + col]) < 1e-300)
      throw std::runtime_error("fixed point: singular system");
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a[piv * n + j], a[col * n + j]);
      std::swap(rhs[piv], rhs[col]);
    }
    for (std::size_t i = col + 1; i < n; ++i) {
      const double f = a[i * n + col] / a[col * n + col];
      if (f == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) a[i * n + j] -= f * a[col * n + j];
      rhs[i] -= f * rhs[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double acc = rhs[i];
    for (std::size_t j = i + 1; j < n; ++j) acc -= a[i * n + j] * x[j];
    x[i] = acc / a[i * n + i];
  }
  return x;
}

// Direct solve plus value iteration from zero; the iteration's distance to
// the solved value must shrink by at least the discount each sweep.
inline FixedPointResult solve_fixed_point(const MdpSpec& m) {
  validate_mdp(m);
  FixedPointResult res;
  res.value = solve_linear_fixed_point(m);

  const double step_tol = 1e-12;
  const std::size_t max_iters = 100000;
  std::vector<double> u(m.n, 0.0);
  double dist = sup_metric(u, res.value);
  for (std::size_t k = 0; k < max_iters; ++k) {
    std::vector<double> next = bellman_apply(m, u);
    const double step = sup_metric(next, u);
    const double next_dist = sup_metric(next, res.value);
    if (dist > 0.0) {
      const double allowed = m.lambda * dist + 1e-12;
      if (next_dist > allowed) {
        res.decay_geometric = false;
        res.worst_decay_excess = std::max(res.worst_decay_excess, next_dist - allowed);
      }
    }
    u = std::move(next);
    dist = next_dist;
    res.iterations = k + 1;
    if (step < step_tol) {
      res.iteration_converged = true;
      break;
    }
  }
  res.iterate_gap = dist;
  return res;
}

// Random row-stochastic matrix: rows are normalized unit exponentials, i.e.
// flat-Dirichlet rows. zero_diag removes self loops before normalizing.
inline MdpSpec random_mdp(std::size_t n, double lambda, bool zero_diag, Rng& rng) {
  if (n < 2 && zero_diag)
    throw std::invalid_argument("random_mdp: zero diagonal needs n >= 2");
  MdpSpec m;
  m.n = n;
  m.lambda = lambda;
  m.p.assign(n * n, 0.0);
  m.r.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (zero_diag && j == i) continue;
      const double g = rng.exponential();
      m.p[i * n + j] = g;
      total += g;
    }
    for (std::size_t j = 0; j < n; ++j) m.p[i * n + j] /= total;
    m.r[i] = rng.uniform(-1.0, 1.0);
  }
  validate_mdp(m);
  return m;
}

struct CertificationCase {
  std::size_t case_id = 0;
  std::size_t n = 0;
  double lambda = 0.0;
  bool zero_diag = false;
  double contraction = 0.0;
  bool contraction_ok = false;
  double gershgorin_bound = 0.0;
  bool gershgorin_ok = false;
  std::size_t iterations = 0;
  bool decay_ok = false;
  double fixed_point_residual = 0.0;
  bool fixed_point_ok = false;
  bool pass = false;
};

struct CertificationReport {
  std::vector<CertificationCase> cases;
  bool all_pass = true;
};

struct CertifyOptions {
  std::size_t case_count = 500;
  std::size_t max_states = 20;
  std::vector<double> lambdas = {0.5, 0.9, 0.99};
  std::uint64_t seed = 20260817;
  std::size_t probe_pairs = 8;  // random (u, v) pairs per MDP
};

// For each sampled MDP: measured contraction factor must not exceed the
// discount, the Gershgorin bound of P must not exceed 1, value iteration
// must decay geometrically, and its limit must match the direct solve.
inline CertificationReport certify_contraction(const CertifyOptions& opt) {
  CertificationReport report;
  Rng rng(derive_seed(opt.seed, 0xce27));
  for (std::size_t c = 0; c < opt.case_count; ++c) {
    CertificationCase row;
    row.case_id = c;
    row.n = 2 + rng.below(opt.max_states - 1);  // 2 .. max_states
    row.lambda = opt.lambdas[c % opt.lambdas.size()];
    row.zero_diag = (rng.below(4) == 0);
    MdpSpec mdp = random_mdp(row.n, row.lambda, row.zero_diag, rng);

    double worst = 0.0;
    for (std::size_t p = 0; p < opt.probe_pairs; ++p) {
      std::vector<double> u(row.n), v(row.n);
      for (std::size_t i = 0; i < row.n; ++i) {
        u[i] = rng.uniform(-10.0, 10.0);
        v[i] = rng.uniform(-10.0, 10.0);
      }
      if (sup_metric(u, v) == 0.0) continue;
      worst = std::max(worst, contraction_factor(mdp, u, v));
    }
    row.contraction = worst;
    row.contraction_ok = worst <= row.lambda + 1e-12;

    row.gershgorin_bound = gershgorin(mdp.p, mdp.n).bound;
    row.gershgorin_ok = row.gershgorin_bound <= 1.0 + 1e-10;

    FixedPointResult fp = solve_fixed_point(mdp);
    row.iterations = fp.iterations;
    row.decay_ok = fp.decay_geometric;
    row.fixed_point_residual = fp.iterate_gap;
    row.fixed_point_ok = fp.iteration_converged && fp.iterate_gap <= 1e-10;

    row.pass = row.contraction_ok && row.gershgorin_ok && row.decay_ok && row.fixed_point_ok;
    report.all_pass = report.all_pass && row.pass;
    report.cases.push_back(row);
  }
  return report;
}

}  // namespace greenwave
