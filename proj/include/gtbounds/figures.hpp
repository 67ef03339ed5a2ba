#pragma once
// Plot-ready CSV data for the five standard figures. Everything here is
// deterministic: fixed grids, seeded simulation substreams, and 12
// significant-digit formatting, so a rerun is byte-identical.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gtbounds/bounds.hpp"
#include "gtbounds/simulator.hpp"

namespace gtb {

enum class FigureId {
  BscNonadaptive,     // np vs fano over T at (N,K,p) = (500,10,0.11)
  Rates,              // achievable-rate proxy log2C(N,K)/T_min over an N grid
  NoiselessAdaptive,  // counting + fano bounds vs empirical splitting
  Bernoulli,          // iid curP, its entropy bound, and the gaussian curve
  BscAdaptive,        // adaptive vs nonadaptive vs fano over T
};

inline FigureId parse_figure_id(const std::string& s) {
  if (s == "fig1-bsc-nonadaptive" || s == "fig1") return FigureId::BscNonadaptive;
  if (s == "fig2-rates" || s == "fig2") return FigureId::Rates;
  if (s == "fig3-noiseless-adaptive" || s == "fig3") return FigureId::NoiselessAdaptive;
  if (s == "fig4-bernoulli" || s == "fig4") return FigureId::Bernoulli;
  if (s == "fig5-bsc-adaptive" || s == "fig5") return FigureId::BscAdaptive;
  throw std::invalid_argument("unknown figure id: " + s);
}

struct FigureOptions {
  std::optional<std::uint64_t> t_min;
  std::optional<std::uint64_t> t_max;
  std::uint64_t trials = 1000;  // simulation columns only
  std::uint64_t seed = 0;
};

namespace detail {

inline std::string fmt12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::pair<std::uint64_t, std::uint64_t> t_range(const FigureOptions& opt,
                                                       std::uint64_t def_lo,
                                                       std::uint64_t def_hi) {
  const std::uint64_t lo = opt.t_min.value_or(def_lo);
  const std::uint64_t hi = opt.t_max.value_or(def_hi);
  if (lo > hi) throw std::invalid_argument("figure: empty T range");
  return {lo, hi};
}

}  // namespace detail

// Phi(y) at the y whose gaussian curve N h(L(y)/N) passes through T, with the
// mean level L(y) = Np + y sqrt(Np(1-p)) restricted to the lower branch
// L in [0, N/2]. Bisection; deterministic.
inline double gaussian_approx_at_T(std::uint64_t N, double p, double T) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("gaussian_approx_at_T: requires 0 < p < 1");
  const double Nd = static_cast<double>(N);
  if (T >= Nd) return 1.0;
  double lo = 0.0, hi = Nd / 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (Nd * binary_entropy(mid / Nd) < T) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double L = 0.5 * (lo + hi);
  const double y = (L - Nd * p) / std::sqrt(Nd * p * (1.0 - p));
  return std_normal_cdf(y);
}

namespace detail {

inline std::string fig_bsc_nonadaptive(const FigureOptions& opt) {
  const auto [t_lo, t_hi] = t_range(opt, 70, 165);
  const double log2M = log2_choose(500, 10);
  std::ostringstream os;
  os << "T,np_bound,fano_bound\n";
  for (std::uint64_t T = t_lo; T <= t_hi; ++T) {
    os << T << ',' << fmt12(bsc_nonadaptive_bound(T, log2M, 0.11).clamped()) << ','
       << fmt12(fano_comb_bsc_bound(T, 500, 10, 0.11).clamped()) << '\n';
  }
  return os.str();
}

inline std::string fig_rates(const FigureOptions&) {
  std::ostringstream os;
  os << "N,K,T_min,rate\n";
  for (std::uint64_t N : {100ull, 200ull, 500ull, 1000ull, 2000ull, 5000ull}) {
    const std::uint64_t K =
        static_cast<std::uint64_t>(std::ceil(std::pow(static_cast<double>(N), 0.63)));
    const double log2M = log2_choose(N, K);
    const std::uint64_t T_min = min_tests_for_target(
        [&](std::uint64_t T) { return bsc_nonadaptive_bound(T, log2M, 0.11).clamped(); }, 0.999);
    os << N << ',' << K << ',' << T_min << ',' << fmt12(log2M / static_cast<double>(T_min))
       << '\n';
  }
  return os.str();
}

inline std::string fig_noiseless_adaptive(const FigureOptions& opt) {
  if (opt.trials < 1) throw std::invalid_argument("figure: trials must be >= 1");
  std::ostringstream os;
  os << "N,K,T,bja_bound,fano_bound,empirical_split,wilson_halfwidth\n";
  const std::pair<std::uint64_t, std::uint64_t> configs[] = {{10, 500}, {30, 9699}};
  for (const auto& [K, N] : configs) {
    const double l2c = log2_choose(N, K);
    const auto [t_lo, t_hi] = t_range(opt, static_cast<std::uint64_t>(std::floor(0.8 * l2c)),
                                      static_cast<std::uint64_t>(std::ceil(1.3 * l2c)));
    // tests_needed is budget-independent, so each trial fills every T at once;
    // the result is identical to running monte_carlo separately per T.
    std::vector<std::uint64_t> successes(t_hi - t_lo + 1, 0);
    const SourceModel src{CombinatorialUniform{N, K}};
    for (std::uint64_t trial = 0; trial < opt.trials; ++trial) {
      RandomStream stream = RandomStream::for_trial(opt.seed, trial);
      const auto u = sample_defectivity(src, stream);
      const std::uint64_t needed = split_tests_needed(u);
      for (std::uint64_t T = std::max(t_lo, needed); T <= t_hi; ++T) {
        ++successes[T - t_lo];
      }
    }
    for (std::uint64_t T = t_lo; T <= t_hi; ++T) {
      const std::uint64_t s = successes[T - t_lo];
      os << N << ',' << K << ',' << T << ',' << fmt12(bja_bound(T, N, K).clamped()) << ','
         << fmt12(fano_comb_bound(T, N, K).clamped()) << ','
         << fmt12(static_cast<double>(s) / static_cast<double>(opt.trials)) << ','
         << fmt12(wilson_halfwidth(s, opt.trials)) << '\n';
    }
  }
  return os.str();
}

inline std::string fig_bernoulli(const FigureOptions& opt) {
  const auto [t_lo, t_hi] = t_range(opt, 0, 100);
  std::ostringstream os;
  os << "T,curp_bound,fano_li,gaussian_approx\n";
  for (std::uint64_t T = t_lo; T <= t_hi; ++T) {
    os << T << ',' << fmt12(iid_curp_bound(500, 0.02, T).clamped()) << ','
       << fmt12(fano_prob_bound(T, 500, 0.02).clamped()) << ','
       << fmt12(gaussian_approx_at_T(500, 0.02, static_cast<double>(T))) << '\n';
  }
  return os.str();
}

inline std::string fig_bsc_adaptive(const FigureOptions& opt) {
  const auto [t_lo, t_hi] = t_range(opt, 70, 165);
  const double log2M = log2_choose(500, 10);
  std::ostringstream os;
  os << "T,adaptive_bound,np_bound,fano_bound\n";
  for (std::uint64_t T = t_lo; T <= t_hi; ++T) {
    os << T << ',' << fmt12(bsc_adaptive_bound({T, log2M, 0.11}).clamped()) << ','
       << fmt12(bsc_nonadaptive_bound(T, log2M, 0.11).clamped()) << ','
       << fmt12(fano_comb_bsc_bound(T, 500, 10, 0.11).clamped()) << '\n';
  }
  return os.str();
}

}  // namespace detail

inline std::string figure_csv(FigureId id, const FigureOptions& opt = {}) {
  switch (id) {
    case FigureId::BscNonadaptive:
      return detail::fig_bsc_nonadaptive(opt);
    case FigureId::Rates:
      return detail::fig_rates(opt);
    case FigureId::NoiselessAdaptive:
      return detail::fig_noiseless_adaptive(opt);
    case FigureId::Bernoulli:
      return detail::fig_bernoulli(opt);
    case FigureId::BscAdaptive:
      return detail::fig_bsc_adaptive(opt);
  }
  throw std::logic_error("figure_csv: unreachable");
}

}  // namespace gtb
