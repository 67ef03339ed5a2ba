#pragma once
// Converse bounds on group testing success probability, all reported through
// a common result type carrying the raw formula value, its clamp to [0,1],
// and a validity flag (a failed validity condition yields the vacuous bound 1).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "gtbounds/channels.hpp"
#include "gtbounds/numerics.hpp"
#include "gtbounds/sources.hpp"

namespace gtb {

struct BoundResult {
  std::string name;
  std::vector<std::pair<std::string, double>> params;  // echo of inputs
  double raw = 0.0;          // formula value; may exceed 1 or be infinite
  double log2_raw = kNegInf;
  bool valid = true;
  std::string invalid_reason;

  // Comparisons and figures always consume the clamped value.
  double clamped() const {
    if (!valid) return 1.0;
    return std::min(1.0, std::max(0.0, raw));
  }

  double param(const std::string& key) const {
    for (const auto& [k, v] : params) {
      if (k == key) return v;
    }
    throw std::out_of_range("BoundResult: no param " + key);
  }
};

namespace detail {

inline BoundResult from_log2_raw(std::string name,
                                 std::vector<std::pair<std::string, double>> params,
                                 double log2_raw) {
  BoundResult r;
  r.name = std::move(name);
  r.params = std::move(params);
  r.log2_raw = log2_raw;
  r.raw = std::exp2(log2_raw);
  return r;
}

inline BoundResult vacuous(std::string name,
                           std::vector<std::pair<std::string, double>> params,
                           std::string reason) {
  BoundResult r;
  r.name = std::move(name);
  r.params = std::move(params);
  r.raw = kPosInf;
  r.log2_raw = kPosInf;
  r.valid = false;
  r.invalid_reason = std::move(reason);
  return r;
}

}  // namespace detail

// P(suc) <= 2^T / C(N,K) for noiseless group testing with K defectives among
// N items, adaptive or not.
inline BoundResult bja_bound(std::uint64_t T, std::uint64_t N, std::uint64_t K) {
  CombinatorialUniform{N, K}.validate();
  return detail::from_log2_raw(
      "bja",
      {{"T", static_cast<double>(T)}, {"N", static_cast<double>(N)}, {"K", static_cast<double>(K)}},
      static_cast<double>(T) - log2_choose(N, K));
}

// Fano-style counting bounds: T over the source entropy in bits.
inline BoundResult fano_comb_bound(std::uint64_t T, std::uint64_t N, std::uint64_t K) {
  CombinatorialUniform{N, K}.validate();
  std::vector<std::pair<std::string, double>> params{
      {"T", static_cast<double>(T)}, {"N", static_cast<double>(N)}, {"K", static_cast<double>(K)}};
  const double den = log2_choose(N, K);
  if (den == 0.0) return detail::vacuous("fano-comb", std::move(params), "C(N,K) = 1");
  BoundResult r;
  r.name = "fano-comb";
  r.params = std::move(params);
  r.raw = static_cast<double>(T) / den;
  r.log2_raw = std::log2(r.raw);
  return r;
}

inline BoundResult fano_prob_bound(std::uint64_t T, std::uint64_t N, double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("fano_prob_bound: requires 0 < p < 1");
  std::vector<std::pair<std::string, double>> params{
      {"T", static_cast<double>(T)}, {"N", static_cast<double>(N)}, {"p", p}};
  const double den = static_cast<double>(N) * binary_entropy(p);
  if (den == 0.0) return detail::vacuous("fano-prob", std::move(params), "N*h(p) = 0");
  BoundResult r;
  r.name = "fano-prob";
  r.params = std::move(params);
  r.raw = static_cast<double>(T) / den;
  r.log2_raw = std::log2(r.raw);
  return r;
}

// Fano bound with the tests discounted to their BSC capacity: T(1-h(p)) bits
// of evidence against log2 C(N,K) bits of uncertainty.
inline BoundResult fano_comb_bsc_bound(std::uint64_t T, std::uint64_t N, std::uint64_t K, double p) {
  CombinatorialUniform{N, K}.validate();
  const double cap = capacity_bsc(p);
  std::vector<std::pair<std::string, double>> params{{"T", static_cast<double>(T)},
                                                     {"N", static_cast<double>(N)},
                                                     {"K", static_cast<double>(K)},
                                                     {"p", p}};
  const double den = log2_choose(N, K);
  if (den == 0.0) return detail::vacuous("fano-comb-bsc", std::move(params), "C(N,K) = 1");
  BoundResult r;
  r.name = "fano-comb-bsc";
  r.params = std::move(params);
  r.raw = static_cast<double>(T) * cap / den;
  r.log2_raw = std::log2(r.raw);
  return r;
}

// P(suc) <= curP(2^T) for any noiseless algorithm, adaptive or non-adaptive
// (the non-adaptive counting antecedent yields the same number; one operation
// serves both).
inline BoundResult noiseless_converse(const SourceModel& src, std::uint64_t T) {
  BoundResult r;
  r.name = "noiseless-converse";
  r.params = {{"T", static_cast<double>(T)}, {"N", static_cast<double>(item_count(src))}};
  r.raw = top_mass(src, TopCount::pow2(T));
  r.log2_raw = std::log2(r.raw);
  return r;
}

// curP(2^T) for an i.i.d. Bernoulli(p) source, via the exact level/slack
// decomposition of the Hamming ball holding the 2^T most likely vectors.
inline BoundResult iid_curp_bound(std::uint64_t N, double p, std::uint64_t T) {
  if (!(p > 0.0 && p <= 0.5)) throw std::domain_error("iid_curp_bound: requires 0 < p <= 1/2");
  BoundResult r;
  r.name = "curp-iid";
  r.params = {{"N", static_cast<double>(N)}, {"p", p}, {"T", static_cast<double>(T)}};
  r.raw = top_mass(IIDBernoulli{N, p}, TopCount::pow2(T));
  r.log2_raw = std::log2(r.raw);
  return r;
}

// Gaussian approximation to the i.i.d. curP curve: for a standard normal
// quantile y, the pair (T(y), Phi(y)) with L(y) = Np + y*sqrt(Np(1-p)) and
// T(y) = N h(L(y)/N).
struct GaussianCurpPoint {
  double T_of_y = 0.0;
  double approx = 0.0;
};

inline GaussianCurpPoint gaussian_approx_curp(std::uint64_t N, double p, double y) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("gaussian_approx_curp: requires 0 < p < 1");
  const double Nd = static_cast<double>(N);
  const double L = Nd * p + y * std::sqrt(Nd * p * (1.0 - p));
  if (!(L >= 0.0 && L <= Nd)) {
    throw std::domain_error("gaussian_approx_curp: L(y) outside [0, N]");
  }
  return {Nd * binary_entropy(L / Nd), std_normal_cdf(y)};
}

// Bernstein-type converse for independent non-identical Bernoulli(p_i)
// sources. Internals are in natural logarithms: with zeta_i = ln((1-p_i)/p_i),
//   L = sum p_i(1-p_i) zeta_i^2,  M = max (1-p_i) zeta_i,
//   c* = max_{R in [T,N]} prod_{i<=R-L*} (1-p_i) * prod_{R-L*<i<=R} p_i
// over the R most probable items at level L* = l_star(R,T), and
//   t = ln c* + sum h_nat(p_i).
// The bound exp(-t^2/(4L)) requires 0 <= t <= L/M; outside that range the
// result is flagged invalid and clamps to the vacuous 1.
inline BoundResult nonidentical_bound(const NonIdenticalBernoulli& src, std::uint64_t T) {
  src.validate();
  BoundResult r;
  r.name = "nonidentical";
  r.params = {{"N", static_cast<double>(src.N())}, {"T", static_cast<double>(T)}};

  // Items with p_i = 0 are deterministically clean: they contribute nothing
  // to L, M, h(U), or any admissible product, so they are dropped up front.
  std::vector<double> p;
  p.reserve(src.p.size());
  for (double pi : src.p) {
    if (pi > 0.0) p.push_back(pi);
  }
  const std::uint64_t n = p.size();

  double L = 0.0, M = 0.0, hsum = 0.0;
  for (double pi : p) {
    const double zeta = std::log((1.0 - pi) / pi);
    L += pi * (1.0 - pi) * zeta * zeta;
    M = std::max(M, (1.0 - pi) * zeta);
    hsum += binary_entropy_nat(pi);
  }
  if (M == 0.0) {
    // All p_i = 1/2: the source is uniform and zeta degenerates; the uniform
    // counting bound applies instead.
    r.raw = kPosInf;
    r.log2_raw = kPosInf;
    r.valid = false;
    r.invalid_reason = "all p_i = 1/2 (M = 0); use the uniform counting bound";
    return r;
  }
  if (T > n) {
    r.raw = kPosInf;
    r.log2_raw = kPosInf;
    r.valid = false;
    r.invalid_reason = "2^T exceeds the source support";
    return r;
  }

  std::vector<double> lnp(n + 1, 0.0), lnq(n + 1, 0.0);
  for (std::uint64_t i = 0; i < n; ++i) {
    lnp[i + 1] = lnp[i] + std::log(p[i]);
    lnq[i + 1] = lnq[i] + std::log(1.0 - p[i]);
  }
  double ln_cstar = -kPosInf;
  for (std::uint64_t R = T; R <= n; ++R) {
    const LStarResult ls = l_star(R, T);
    const std::uint64_t lvl = ls.l_star;
    const double v = lnq[R - lvl] + (lnp[R] - lnp[R - lvl]);
    ln_cstar = std::max(ln_cstar, v);
  }

  const double t = ln_cstar + hsum;
  const double exponent_nat = -t * t / (4.0 * L);
  r.raw = std::exp(exponent_nat);
  r.log2_raw = exponent_nat * kInvLn2;
  r.params.emplace_back("t", t);
  if (t < 0.0) {
    r.valid = false;
    r.invalid_reason = "t < 0: 2^T already covers the typical mass";
  } else if (t > L / M) {
    r.valid = false;
    r.invalid_reason = "t > L/M: outside the Bernstein validity range";
  }
  return r;
}

inline BoundResult nonidentical_bound(std::vector<double> p_list, std::uint64_t T) {
  return nonidentical_bound(make_non_identical(std::move(p_list)), T);
}

// --- Neyman-Pearson machinery for the BSC bounds ------------------------------

// Randomized threshold test on Bin(T, 1/2) hitting a type-II target exactly:
// the unique (d*, lambda) with cdf(d*-1) < target <= cdf(d*) and
// lambda = (target - cdf(d*-1)) / pmf(d*). d* = T+1 would encode "accept
// always"; it cannot arise for targets <= 1. When the target lands exactly on
// a cdf value the convention is lambda = 1 at that d* (equivalent to
// lambda = 0 at d*+1).
struct NPThreshold {
  std::uint64_t d_star = 0;
  double lambda = 0.0;
  double achieved_type2 = 0.0;        // linear scale; underflows for very deep targets
  double log2_achieved_type2 = kNegInf;
};

inline NPThreshold np_threshold(std::uint64_t T, double log2_target) {
  if (std::isnan(log2_target) || log2_target > 0.0) {
    throw std::domain_error("np_threshold: target must be a probability (log2_target <= 0)");
  }
  NPThreshold out;
  if (log2_target == kNegInf) return out;  // target 0: d* = 0, lambda = 0

  // All comparisons run against target * 2^T = 2^rhs with exact cumulative
  // binomial sums S_d = sum_{i<=d} C(T,i); floating log2 is 1 ulp shy of
  // exact on e.g. T=3, target=1/2, which would misplace d* on tie cases.
  const double rhs = static_cast<double>(T) + log2_target;
  const bool integral_rhs = rhs >= 0.0 && std::nearbyint(rhs) == rhs &&
                            rhs <= static_cast<double>(T);

  bigint c = 1;  // C(T, d)
  bigint S = 1;  // S_d
  bigint S_prev = 0;
  std::uint64_t d = 0;
  if (integral_rhs) {
    const bigint m_target = bigint(1) << static_cast<unsigned>(rhs);
    while (S < m_target) {
      c = c * (T - d) / (d + 1);
      S_prev = S;
      S += c;
      ++d;
    }
    out.d_star = d;
    out.lambda = boost::multiprecision::cpp_rational(m_target - S_prev, c).convert_to<double>();
    // Exact identity: cdf(d-1) + lambda pmf(d) = m_target / 2^T = target.
    out.log2_achieved_type2 = log2_target;
    out.achieved_type2 = std::exp2(log2_target);
    return out;
  }

  if (rhs < 0.0) {
    // target below cdf(0) = 2^-T: d* = 0, lambda = target * 2^T.
    out.lambda = std::exp2(rhs);
    out.log2_achieved_type2 = log2_target;
    out.achieved_type2 = std::exp2(log2_target);
    return out;
  }

  while (log2_bigint(S) < rhs) {
    c = c * (T - d) / (d + 1);
    S_prev = S;
    S += c;
    ++d;
  }
  out.d_star = d;
  const double lc = log2_bigint(c);
  double lambda = std::exp2(rhs - lc);
  double log2_below = kNegInf;
  if (d > 0) {
    log2_below = log2_bigint(S_prev);
    lambda -= std::exp2(log2_below - lc);
  }
  out.lambda = std::min(1.0, std::max(0.0, lambda));
  const double l2_cdf_below = log2_below - static_cast<double>(T);
  const double l2_lambda_term =
      out.lambda > 0.0 ? std::log2(out.lambda) + lc - static_cast<double>(T) : kNegInf;
  out.log2_achieved_type2 = log2_sum_exp(l2_cdf_below, l2_lambda_term);
  out.achieved_type2 = std::exp2(out.log2_achieved_type2);
  return out;
}

// Non-adaptive BSC converse: the NP test calibrated to type-II level 1/M,
// evaluated under the true Bin(T,p) statistics,
//   raw = P(Bin(T,p) <= d*-1) + lambda P(Bin(T,p) = d*).
inline BoundResult bsc_nonadaptive_bound(std::uint64_t T, double log2_M, double p) {
  if (!(p >= 0.0 && p < 0.5)) throw std::domain_error("bsc_nonadaptive_bound: requires 0 <= p < 1/2");
  if (!(log2_M >= 0.0)) throw std::domain_error("bsc_nonadaptive_bound: log2_M must be >= 0");
  const NPThreshold th = np_threshold(T, -log2_M);
  BoundResult r;
  r.name = "bsc-nonadaptive";
  r.params = {{"T", static_cast<double>(T)},
              {"log2_M", log2_M},
              {"p", p},
              {"d_star", static_cast<double>(th.d_star)},
              {"lambda", th.lambda}};
  const BinomialSpec spec{T, p};
  r.raw = binom_tail(spec, static_cast<std::int64_t>(th.d_star) - 1, TailMode::CdfUpToD) +
          th.lambda * binom_tail(spec, static_cast<std::int64_t>(th.d_star), TailMode::PmfAtD);
  r.log2_raw = std::log2(r.raw);
  return r;
}

struct AdaptiveNoisyConfig {
  std::uint64_t T = 0;
  double log2_M = 0.0;
  double p = 0.0;

  void validate() const {
    if (!(p >= 0.0 && p < 0.5)) throw std::domain_error("AdaptiveNoisyConfig: p outside [0, 1/2)");
    if (!(log2_M >= 0.0)) throw std::domain_error("AdaptiveNoisyConfig: log2_M must be >= 0");
  }
};

// Adaptive BSC converse. For each threshold d* the success probability splits
// into a typical-set term and a tail term, all in bits:
//   raw(d*) = 2^{T C - (d* - Tp) log2((1-p)/p) - log2_M} + P(Bin(T,p) <= d*),
// with C = 1 - h(p); the bound is the minimum over d* in {0..T} (the
// objective is not guaranteed unimodal, so the scan is exhaustive). The
// minimizing d* is echoed in params.
inline BoundResult bsc_adaptive_bound(const AdaptiveNoisyConfig& cfg) {
  cfg.validate();
  BoundResult r;
  r.name = "bsc-adaptive";
  const double Td = static_cast<double>(cfg.T);
  double best = kPosInf;
  std::uint64_t best_d = 0;
  if (cfg.p == 0.0) {
    // Limit convention: the typical-set term vanishes for d* >= 1 while the
    // noiseless tail P(Bin(T,0) <= d*) is already 1, so the bound is 1.
    best = cfg.T >= 1 ? 1.0 : std::exp2(Td - cfg.log2_M) + 1.0;
    best_d = cfg.T >= 1 ? 1 : 0;
  } else {
    const double cap = capacity_bsc(cfg.p);
    const double lr = std::log2((1.0 - cfg.p) / cfg.p);
    const BinomialSpec spec{cfg.T, cfg.p};
    for (std::uint64_t d = 0; d <= cfg.T; ++d) {
      const double exponent =
          Td * cap - (static_cast<double>(d) - Td * cfg.p) * lr - cfg.log2_M;
      const double v =
          std::exp2(exponent) + binom_tail(spec, static_cast<std::int64_t>(d), TailMode::CdfUpToD);
      if (v < best) {
        best = v;
        best_d = d;
      }
    }
  }
  r.params = {{"T", Td},
              {"log2_M", cfg.log2_M},
              {"p", cfg.p},
              {"d_star", static_cast<double>(best_d)}};
  r.raw = best;
  r.log2_raw = std::log2(best);
  return r;
}

// Smallest T whose clamped bound reaches the target, by exponential-then-
// binary search; requires the supplied family to be nondecreasing in T.
inline std::uint64_t min_tests_for_target(const std::function<double(std::uint64_t)>& clamped_bound,
                                          double target, std::uint64_t t_cap = 1000000) {
  if (!(target >= 0.0 && target <= 1.0)) {
    throw std::domain_error("min_tests_for_target: target outside [0,1]");
  }
  if (target == 0.0) return 0;
  if (clamped_bound(0) >= target) return 0;
  std::uint64_t lo = 0, hi = 1;
  while (clamped_bound(hi) < target) {
    lo = hi;
    if (hi >= t_cap) {
      throw std::runtime_error("min_tests_for_target: target not reached by the T cap");
    }
    hi = std::min(hi * 2, t_cap);
  }
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (clamped_bound(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

}  // namespace gtb
