#pragma once

#include <gsl/gsl_errno.h>
#include <gsl/gsl_min.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracmart/operator.hpp"
#include "fracmart/parallel.hpp"
#include "fracmart/rng.hpp"
#include "fracmart/special_functions.hpp"

namespace fracmart {

/// Result of scanning a lemma for its implicit constant.
struct ScanReport {
  std::string lemma;
  double p = 0.0;
  double constant = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::vector<double> extremal_point;  // sample where the constant was attained
};

/// Result of checking a lemma at a fixed constant on a fresh sample.
struct ValidationReport {
  std::size_t samples = 0;
  std::size_t violations = 0;
  double threshold = 0.0;    // constant the samples were compared against
  double worst_ratio = 0.0;  // largest (or smallest, for lower bounds) ratio seen
  std::vector<double> worst_point;
};

namespace detail {

struct ShardExtreme {
  double value = -std::numeric_limits<double>::infinity();
  std::vector<double> point;
  std::size_t count = 0;  // samples whose value exceeded the threshold
};

// Maximum of draw(rng, point) over `samples` draws. Shard s uses its own
// stream derive_seed(seed, s), so the result is independent of `threads`.
// A NaN return means "skip this draw".
template <class Draw>
ShardExtreme sharded_max(std::size_t samples, std::uint64_t seed, unsigned threads, Draw draw,
                         double threshold = std::numeric_limits<double>::infinity()) {
  const std::size_t shards = (samples + kShardSize - 1) / kShardSize;
  std::vector<ShardExtreme> part(shards);
  parallel_for(shards, threads, [&](std::size_t s) {
    Rng rng(derive_seed(seed, s));
    std::vector<double> pt;
    ShardExtreme& out = part[s];
    const std::size_t n = std::min(kShardSize, samples - s * kShardSize);
    for (std::size_t i = 0; i < n; ++i) {
      pt.clear();
      const double v = draw(rng, pt);
      if (std::isnan(v)) continue;
      if (v > threshold) ++out.count;
      if (v > out.value) {
        out.value = v;
        out.point = pt;
      }
    }
  });
  ShardExtreme total;
  for (auto& s : part) {
    total.count += s.count;
    if (s.value > total.value) {
      total.value = s.value;
      total.point = std::move(s.point);
    }
  }
  return total;
}

// Nonnegative magnitudes mixing the bulk, many orders of magnitude, and the
// breakpoints 0, 1, 2 where the piecewise formulas switch.
inline double sample_magnitude(Rng& rng) {
  const double u = rng.uniform();
  if (u < 0.35) return rng.uniform(0.0, 4.0);
  if (u < 0.70) return rng.log_uniform(1e-6, 1e6);
  if (u < 0.85) return 1.0 + rng.normal() * std::pow(10.0, -rng.uniform(1.0, 8.0));
  static constexpr double kSpecial[] = {0.0, 1.0, 2.0, 0.5};
  return kSpecial[rng.index(4)];
}

inline double sample_real(Rng& rng) { return rng.sign() * std::abs(sample_magnitude(rng)); }

// Nonnegative weights: bulk, sparse (some exact zeros) and near a coordinate vector.
inline void sample_weights(Rng& rng, std::span<double> z) {
  const int m = static_cast<int>(z.size());
  const double u = rng.uniform();
  if (u < 0.4) {
    for (double& v : z) v = rng.exponential();
  } else if (u < 0.6) {
    for (double& v : z) v = rng.bernoulli(0.5) ? 0.0 : rng.exponential();
  } else if (u < 0.9) {
    const int j = rng.index(m);
    const double eps = std::pow(10.0, -rng.uniform(0.0, 9.0));
    for (int i = 0; i < m; ++i) z[i] = (i == j) ? 1.0 : (rng.bernoulli(0.3) ? 0.0 : eps * rng.uniform());
  } else {
    for (double& v : z) v = rng.log_uniform(1e-4, 1e4);
  }
  const double scale = rng.log_uniform(1e-3, 1e3);
  for (double& v : z) v *= scale;
}

// x_j with |x_j| <= z_j; a third of the coordinates sit on the boundary.
inline void sample_admissible_x(Rng& rng, std::span<const double> z, std::span<double> x) {
  for (std::size_t j = 0; j < z.size(); ++j) {
    const double u = rng.uniform();
    const double t = u < 0.33 ? rng.sign() : (u < 0.4 ? 0.0 : rng.uniform(-1.0, 1.0));
    x[j] = t * z[j];
  }
}

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
};

// Minimizes f from x0 with the GSL simplex method.
inline NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f, std::vector<double> x0,
                                    double step, int max_iter = 2000) {
  const std::size_t n = x0.size();
  struct Ctx {
    const std::function<double(std::span<const double>)>* f;
    std::size_t n;
  } ctx{&f, n};
  gsl_multimin_function fn;
  fn.n = n;
  fn.params = &ctx;
  fn.f = [](const gsl_vector* v, void* params) -> double {
    auto* c = static_cast<Ctx*>(params);
    std::vector<double> x(c->n);
    for (std::size_t i = 0; i < c->n; ++i) x[i] = gsl_vector_get(v, i);
    const double r = (*c->f)(x);
    return std::isfinite(r) ? r : 1e300;
  };
  gsl_vector* x = gsl_vector_alloc(n);
  gsl_vector* ss = gsl_vector_alloc(n);
  for (std::size_t i = 0; i < n; ++i) gsl_vector_set(x, i, x0[i]);
  gsl_vector_set_all(ss, step);
  gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n);
  gsl_multimin_fminimizer_set(s, &fn, x, ss);
  for (int it = 0; it < max_iter; ++it) {
    if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), 1e-13) == GSL_SUCCESS) break;
  }
  NelderMeadResult r;
  r.x.resize(n);
  for (std::size_t i = 0; i < n; ++i) r.x[i] = gsl_vector_get(s->x, i);
  r.value = s->fval;
  gsl_multimin_fminimizer_free(s);
  gsl_vector_free(ss);
  gsl_vector_free(x);
  return r;
}

inline void require_p_in_one_two(double p, const char* who) {
  if (!(p > 1.0 && p <= 2.0)) throw std::domain_error(std::string(who) + ": p must lie in (1, 2]");
}

}  // namespace detail

// ---------------------------------------------------------------- θ lemma

inline double theta_lemma_ratio(double a, double b, double p) {
  const double tb = theta(b, p);
  if (tb == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return std::abs(theta_increment(a, b, p)) / tb;
}

namespace detail {
inline double draw_theta_pair(Rng& rng, double p, std::vector<double>& pt) {
  const double b = sample_real(rng);
  double a = 0.0;
  const double u = rng.uniform();
  if (u < 0.3) {
    a = sample_real(rng);
  } else if (u < 0.45) {
    a = rng.sign() * (1.0 + rng.normal() * std::pow(10.0, -rng.uniform(0.0, 6.0)));  // |a| ≈ 1
  } else if (u < 0.6) {
    a = rng.sign() * 2.0 * std::abs(b) * (1.0 + rng.normal() * 1e-3);  // |a| ≈ 2|b|
  } else if (u < 0.7) {
    a = -b * (1.0 + rng.normal() * 1e-6);  // a + b ≈ 0
  } else if (u < 0.75) {
    a = 0.0;
  } else {
    a = b * rng.log_uniform(1e-4, 1e4) * rng.sign();
  }
  pt = {a, b};
  return theta_lemma_ratio(a, b, p);
}
}  // namespace detail

/// Empirical sup of |θ(a+b) - θ(a)| / θ(b).
inline ScanReport theta_lemma_constant(double p, std::size_t samples, std::uint64_t seed,
                                       unsigned threads = 1) {
  detail::require_p_in_one_two(p, "theta_lemma_constant");
  auto ext = detail::sharded_max(samples, seed, threads,
                                 [p](Rng& rng, std::vector<double>& pt) { return detail::draw_theta_pair(rng, p, pt); });
  return ScanReport{"theta", p, ext.value, samples, seed, ext.point};
}

inline ValidationReport validate_theta_lemma(double p, double K, std::size_t samples, std::uint64_t seed,
                                             unsigned threads = 1) {
  detail::require_p_in_one_two(p, "validate_theta_lemma");
  const double thr = K * (1.0 + 1e-12);
  auto ext = detail::sharded_max(
      samples, seed, threads, [p](Rng& rng, std::vector<double>& pt) { return detail::draw_theta_pair(rng, p, pt); },
      thr);
  return ValidationReport{samples, ext.count, thr, ext.value, ext.point};
}

// ---------------------------------------------------------------- ε lemma

/// (|a+b|^{p-1} - (1+ε)|a|^{p-1}) / |b|^{p-1}; any C_ε must dominate it.
inline double epsilon_lemma_ratio(double a, double b, double p, double eps) {
  if (b == 0.0) return std::numeric_limits<double>::quiet_NaN();
  const double q = p - 1.0;
  return (std::pow(std::abs(a + b), q) - (1.0 + eps) * std::pow(std::abs(a), q)) / std::pow(std::abs(b), q);
}

namespace detail {
inline double draw_epsilon_pair(Rng& rng, double p, double eps, std::vector<double>& pt) {
  const double b = sample_real(rng);
  const double u = rng.uniform();
  double a = 0.0;
  if (u < 0.4) {
    a = sample_real(rng);
  } else if (u < 0.8) {
    a = b * rng.log_uniform(1e-3, 1e4) * (rng.bernoulli(0.8) ? 1.0 : -1.0);
  } else if (u < 0.9) {
    a = 0.0;
  } else {
    a = -b * (1.0 + rng.normal() * 1e-3);
  }
  pt = {a, b};
  return epsilon_lemma_ratio(a, b, p, eps);
}
}  // namespace detail

/// Scanned C_ε with a one-dimensional refinement. By homogeneity and symmetry
/// it suffices to maximise f(s) = (s+1)^{p-1} - (1+ε)s^{p-1} over s >= 0.
inline ScanReport epsilon_constant(double p, double eps, std::size_t samples, std::uint64_t seed,
                                   unsigned threads = 1) {
  if (!(p >= 1.0)) throw std::domain_error("epsilon_constant: p must be >= 1");
  if (!(eps > 0.0)) throw std::domain_error("epsilon_constant: eps must be > 0");
  auto ext = detail::sharded_max(samples, seed, threads, [p, eps](Rng& rng, std::vector<double>& pt) {
    return detail::draw_epsilon_pair(rng, p, eps, pt);
  });
  ScanReport r{"epsilon", p, ext.value, samples, seed, ext.point};
  auto f = [p, eps](double s) { return epsilon_lemma_ratio(s, 1.0, p, eps); };
  if (f(0.0) >= r.constant) {
    r.constant = f(0.0);
    r.extremal_point = {0.0, 1.0};
  }
  if (!r.extremal_point.empty() && r.extremal_point[1] != 0.0) {
    const double s0 = r.extremal_point[0] / r.extremal_point[1];
    if (s0 > 0.0) {
      gsl_function F;
      F.function = [](double s, void* params) -> double {
        auto* fp = static_cast<decltype(f)*>(params);
        return -(*fp)(s);
      };
      F.params = &f;
      double lo = 0.0;
      double hi = std::max(4.0 * s0, 1.0);
      while (hi < 1e12 && f(hi) >= f(s0)) hi *= 4.0;
      if (f(s0) > f(lo) && f(s0) > f(hi)) {
        gsl_error_handler_t* old = gsl_set_error_handler_off();
        gsl_min_fminimizer* mz = gsl_min_fminimizer_alloc(gsl_min_fminimizer_brent);
        if (gsl_min_fminimizer_set(mz, &F, s0, lo, hi) == GSL_SUCCESS) {
          for (int it = 0; it < 200; ++it) {
            if (gsl_min_fminimizer_iterate(mz) != GSL_SUCCESS) break;
            const double a = gsl_min_fminimizer_x_lower(mz);
            const double b = gsl_min_fminimizer_x_upper(mz);
            if (gsl_min_test_interval(a, b, 0.0, 1e-15) == GSL_SUCCESS) break;
          }
          const double s = gsl_min_fminimizer_x_minimum(mz);
          if (f(s) > r.constant) {
            r.constant = f(s);
            r.extremal_point = {s, 1.0};
          }
        }
        gsl_min_fminimizer_free(mz);
        gsl_set_error_handler(old);
      }
    }
  }
  return r;
}

inline ValidationReport validate_epsilon_lemma(double p, double eps, double C, std::size_t samples,
                                               std::uint64_t seed, unsigned threads = 1) {
  const double thr = C * (1.0 + 1e-12);
  auto ext = detail::sharded_max(
      samples, seed, threads,
      [p, eps](Rng& rng, std::vector<double>& pt) { return detail::draw_epsilon_pair(rng, p, eps, pt); }, thr);
  return ValidationReport{samples, ext.count, thr, ext.value, ext.point};
}

// ---------------------------------------------------------------- three-point estimate

namespace detail {
inline double draw_slavin(Rng& rng, std::vector<double>& pt, bool& holds) {
  double z[3];
  double x[3];
  sample_weights(rng, z);
  if (rng.bernoulli(0.2)) z[rng.index(3)] = 0.0;
  sample_admissible_x(rng, z, x);
  const SlavinResult s = slavin_check(x, z);
  holds = s.holds;
  pt = {x[0], x[1], x[2], z[0], z[1], z[2]};
  if (s.rhs == 0.0) return s.lhs == 0.0 ? std::numeric_limits<double>::quiet_NaN() : std::numeric_limits<double>::infinity();
  return 2.0 * s.lhs / s.rhs;
}
}  // namespace detail

/// Empirical best constant K in lhs <= K (z1z2 + z1z3 + z2z3) plus the number of
/// samples violating the stated constant 2.
inline ValidationReport validate_slavin(std::size_t samples, std::uint64_t seed, unsigned threads = 1) {
  // Failed checks map to +inf, so only they exceed the threshold.
  auto ext = detail::sharded_max(
      samples, seed, threads,
      [](Rng& rng, std::vector<double>& pt) {
        bool holds = true;
        const double v = detail::draw_slavin(rng, pt, holds);
        return holds ? v : std::numeric_limits<double>::infinity();
      },
      std::numeric_limits<double>::max());
  return ValidationReport{samples, ext.count, 2.0, ext.value, ext.point};
}

inline ScanReport slavin_constant(std::size_t samples, std::uint64_t seed, unsigned threads = 1) {
  auto v = validate_slavin(samples, seed, threads);
  return ScanReport{"slavin", 2.0, v.worst_ratio, samples, seed, v.worst_point};
}

// ---------------------------------------------------------------- Ψ

struct PsiNonnegReport {
  std::size_t samples = 0;
  std::size_t violations = 0;
  double min_value = 0.0;
  double max_rel_error = 0.0;  // against the textbook formula where it is well conditioned
};

inline PsiNonnegReport check_psi_nonnegative(int m, double p, std::size_t samples, std::uint64_t seed,
                                             unsigned threads = 1) {
  const std::size_t shards = (samples + kShardSize - 1) / kShardSize;
  std::vector<PsiNonnegReport> part(shards);
  parallel_for(shards, threads, [&](std::size_t s) {
    Rng rng(derive_seed(seed, s));
    std::vector<double> z(m);
    PsiNonnegReport& out = part[s];
    out.min_value = std::numeric_limits<double>::infinity();
    const std::size_t n = std::min(kShardSize, samples - s * kShardSize);
    for (std::size_t i = 0; i < n; ++i) {
      detail::sample_weights(rng, z);
      const double v = psi(z, p);
      ++out.samples;
      if (!(v >= 0.0)) ++out.violations;
      out.min_value = std::min(out.min_value, v);
      double S = 0.0;
      double Sp = 0.0;
      for (double t : z) {
        S += t;
        Sp += std::pow(t, p);
      }
      const double naive = std::pow(S, p) - Sp;
      if (naive > 1e-6 * std::pow(S, p)) out.max_rel_error = std::max(out.max_rel_error, std::abs(v - naive) / naive);
    }
  });
  PsiNonnegReport r;
  r.min_value = std::numeric_limits<double>::infinity();
  for (const auto& s : part) {
    r.samples += s.samples;
    r.violations += s.violations;
    r.min_value = std::min(r.min_value, s.min_value);
    r.max_rel_error = std::max(r.max_rel_error, s.max_rel_error);
  }
  return r;
}

namespace detail {

// Point of the sphere Σ z^p = 1 obtained from free coordinates u (i != j) by
// solving for z_j, pulled back radially into |z - e_j| <= radius.
inline bool psi_local_point(std::span<const double> u, int j, double p, double radius, std::vector<double>& z) {
  const int m = static_cast<int>(u.size()) + 1;
  auto build = [&](double t) {
    z.assign(m, 0.0);
    double rest = 0.0;
    int k = 0;
    for (int i = 0; i < m; ++i) {
      if (i == j) continue;
      z[i] = t * std::abs(u[k++]);
      rest += std::pow(z[i], p);
    }
    if (rest >= 1.0) return std::numeric_limits<double>::infinity();
    z[j] = std::pow(1.0 - rest, 1.0 / p);
    double d = (z[j] - 1.0) * (z[j] - 1.0);
    for (int i = 0; i < m; ++i)
      if (i != j) d += z[i] * z[i];
    return std::sqrt(d);
  };
  double dist = build(1.0);
  if (dist <= radius) return dist > 0.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (build(mid) <= radius ? lo : hi) = mid;
  }
  dist = build(lo);
  return dist > 0.0 && dist <= radius;
}

inline double psi_local_ratio(std::span<const double> z, int j, double p) {
  double d = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double e = static_cast<int>(i) == j ? z[i] - 1.0 : z[i];
    d += e * e;
  }
  return psi(z, p) / std::sqrt(d);
}

}  // namespace detail

/// Smallest ratio Ψ(z⃗)/|z⃗ - e_j| on the sphere Σz^p = 1 within `radius` of
/// some e_j: a seeded scan followed by simplex refinement of the best points.
inline ScanReport psi_local_constant(int m, double p, std::size_t samples, std::uint64_t seed,
                                     double radius = 0.1, unsigned threads = 1) {
  if (m < 2) throw std::invalid_argument("psi_local_constant: m must be >= 2");
  auto draw = [=](Rng& rng, std::vector<double>& pt) {
    const int j = rng.index(m);
    std::vector<double> u(m - 1);
    const double r = radius * (rng.bernoulli(0.5) ? rng.uniform() : std::pow(10.0, -rng.uniform(0.0, 6.0)));
    for (double& v : u) v = rng.bernoulli(0.3) ? 0.0 : rng.exponential();
    double n = 0.0;
    for (double v : u) n += v * v;
    if (n == 0.0) u[rng.index(m - 1)] = 1.0, n = 1.0;
    for (double& v : u) v *= r / std::sqrt(n);
    std::vector<double> z;
    if (!detail::psi_local_point(u, j, p, radius, z)) return std::numeric_limits<double>::quiet_NaN();
    pt = z;
    pt.push_back(static_cast<double>(j));
    return -detail::psi_local_ratio(z, j, p);
  };
  auto ext = detail::sharded_max(samples, seed, threads, draw);
  ScanReport rep{"psi-local", p, -ext.value, samples, seed, ext.point};
  if (ext.point.empty()) return rep;
  const int j = static_cast<int>(ext.point.back());
  std::vector<double> u0;
  for (int i = 0; i < m; ++i)
    if (i != j) u0.push_back(ext.point[i]);
  auto objective = [&](std::span<const double> u) {
    std::vector<double> z;
    if (!detail::psi_local_point(u, j, p, radius, z)) return 1e300;
    return detail::psi_local_ratio(z, j, p);
  };
  const auto nm = detail::nelder_mead(objective, u0, 0.01);
  if (nm.value < rep.constant) {
    std::vector<double> z;
    detail::psi_local_point(nm.x, j, p, radius, z);
    rep.constant = nm.value;
    rep.extremal_point = z;
    rep.extremal_point.push_back(static_cast<double>(j));
  }
  return rep;
}

/// Counts fresh samples with Ψ(z⃗) < c|z⃗ - e_j|.
inline ValidationReport validate_psi_local(int m, double p, double c, std::size_t samples, std::uint64_t seed,
                                           double radius = 0.1, unsigned threads = 1) {
  auto draw = [=](Rng& rng, std::vector<double>& pt) {
    const int j = rng.index(m);
    std::vector<double> u(m - 1);
    for (double& v : u) v = rng.bernoulli(0.3) ? 0.0 : rng.uniform(0.0, radius) * std::pow(10.0, -rng.uniform(0.0, 4.0));
    std::vector<double> z;
    if (!detail::psi_local_point(u, j, p, radius, z)) return std::numeric_limits<double>::quiet_NaN();
    pt = z;
    return -detail::psi_local_ratio(z, j, p);
  };
  auto ext = detail::sharded_max(samples, seed, threads, draw, -c);
  return ValidationReport{samples, ext.count, c, -ext.value, ext.point};
}

// ---------------------------------------------------------------- I₂ estimate

/// Σ_j ℳ_p((T[x⃗])_j, z_j) for the split (x_j, z_j); x⃗ is the deviation vector.
inline double i2_lhs(const Operator& T, std::span<const double> x, std::span<const double> z, double p) {
  const int m = T.m();
  const int ell = T.ell();
  std::vector<double> tx(static_cast<std::size_t>(m) * ell);
  T.apply_deviation_into(x, tx);
  double out = 0.0;
  for (int j = 0; j < m; ++j) out += m_p(std::span<const double>(tx).subspan(static_cast<std::size_t>(j) * ell, ell), z[j], p);
  return out;
}

namespace detail {
inline double draw_i2(const Operator& T, double p, bool triangle, Rng& rng, std::vector<double>& pt) {
  const int m = T.m();
  std::vector<double> z(m);
  std::vector<double> x(m);
  sample_weights(rng, z);
  sample_admissible_x(rng, z, x);
  pt = x;
  pt.insert(pt.end(), z.begin(), z.end());
  const double lhs = i2_lhs(T, x, z, p);
  double rhs = 0.0;
  if (triangle) {
    for (int i = 0; i < m; ++i)
      for (int k = i + 1; k < m; ++k) rhs += z[i] * z[k];
  } else {
    rhs = psi(z, p);
  }
  if (rhs == 0.0) {
    double S = 0.0;
    for (double v : z) S += v;
    return lhs <= 1e-12 * std::pow(S, p) ? std::numeric_limits<double>::quiet_NaN()
                                         : std::numeric_limits<double>::infinity();
  }
  return lhs / rhs;
}
}  // namespace detail

/// Empirical K in Σ_j ℳ_p((T[x⃗])_j, z_j) <= K Ψ(z⃗). With `triangle` the right
/// side is Σ_{i<k} z_i z_k instead (the p = 2 form).
inline ScanReport i2_constant(const Operator& T, double p, std::size_t samples, std::uint64_t seed,
                              bool triangle = false, unsigned threads = 1) {
  auto ext = detail::sharded_max(samples, seed, threads, [&](Rng& rng, std::vector<double>& pt) {
    return detail::draw_i2(T, p, triangle, rng, pt);
  });
  return ScanReport{triangle ? "i2-triangle" : "i2", p, ext.value, samples, seed, ext.point};
}

inline ValidationReport validate_i2(const Operator& T, double p, double K, std::size_t samples, std::uint64_t seed,
                                    bool triangle = false, unsigned threads = 1) {
  const double thr = K * (1.0 + 1e-12);
  auto ext = detail::sharded_max(
      samples, seed, threads,
      [&](Rng& rng, std::vector<double>& pt) { return detail::draw_i2(T, p, triangle, rng, pt); }, thr);
  return ValidationReport{samples, ext.count, thr, ext.value, ext.point};
}

// ---------------------------------------------------------------- ℳ_p Lipschitz

namespace detail {
inline double draw_mp_pair(double p, double radius, Rng& rng, std::vector<double>& pt) {
  // First point uniform in the half disc {z >= 0, y² + z² <= radius²}.
  double y1 = 0.0;
  double z1 = 0.0;
  do {
    y1 = rng.uniform(-radius, radius);
    z1 = rng.uniform(0.0, radius);
  } while (y1 * y1 + z1 * z1 > radius * radius);
  if (rng.bernoulli(0.2)) z1 = std::abs(y1) * (1.0 + rng.normal() * 1e-3);  // near the switch |y| = z
  const double h = std::pow(10.0, -rng.uniform(1.0, 8.0));
  const double ang = rng.uniform(0.0, 6.283185307179586);
  double y2 = y1 + h * std::cos(ang);
  double z2 = std::max(0.0, z1 + h * std::sin(ang));
  if (y2 * y2 + z2 * z2 > radius * radius || z1 * z1 + y1 * y1 > radius * radius)
    return std::numeric_limits<double>::quiet_NaN();
  const double d = std::hypot(y2 - y1, z2 - z1);
  if (d == 0.0) return std::numeric_limits<double>::quiet_NaN();
  pt = {y1, z1, y2, z2};
  return std::abs(m_p(y2, z2, p) - m_p(y1, z1, p)) / d;
}
}  // namespace detail

/// Empirical Lipschitz constant of ℳ_p (ℓ = 1) on the half ball of `radius`.
inline ScanReport mp_lipschitz_constant(double p, std::size_t samples, std::uint64_t seed, double radius = 2.0,
                                        unsigned threads = 1) {
  detail::require_p_in_one_two(p, "mp_lipschitz_constant");
  auto ext = detail::sharded_max(samples, seed, threads, [&](Rng& rng, std::vector<double>& pt) {
    return detail::draw_mp_pair(p, radius, rng, pt);
  });
  return ScanReport{"mp-lipschitz", p, ext.value, samples, seed, ext.point};
}

}  // namespace fracmart
