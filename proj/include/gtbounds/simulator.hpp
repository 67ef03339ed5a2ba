#pragma once
// Concrete group testing algorithms and a seeded Monte Carlo harness. The
// empirical curves produced here are the baselines that must sit below every
// applicable converse bound.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <variant>
#include <vector>

#include "gtbounds/channels.hpp"
#include "gtbounds/rng.hpp"
#include "gtbounds/sources.hpp"

namespace gtb {

struct AdaptiveBinarySplit {};

struct NonAdaptiveBernoulliCOMP {
  double design_density = 0.5;  // i.i.d. Bernoulli design matrix entries

  void validate() const {
    if (!(design_density >= 0.0 && design_density <= 1.0)) {
      throw std::domain_error("NonAdaptiveBernoulliCOMP: design_density outside [0,1]");
    }
  }
};

using Algorithm = std::variant<AdaptiveBinarySplit, NonAdaptiveBernoulliCOMP>;

struct SimConfig {
  SourceModel source;
  Channel channel;
  Algorithm algorithm;
  std::uint64_t T_budget = 0;
  std::uint64_t trials = 1;
  std::uint64_t seed = 0;

  void validate() const {
    gtb::validate(source);
    gtb::validate(channel);
    if (trials < 1) throw std::domain_error("SimConfig: trials must be >= 1");
    if (std::holds_alternative<AdaptiveBinarySplit>(algorithm) &&
        !std::holds_alternative<Noiseless>(channel)) {
      // The split algorithm's correctness argument is noiseless.
      throw std::domain_error("SimConfig: AdaptiveBinarySplit requires the noiseless channel");
    }
    if (const auto* comp = std::get_if<NonAdaptiveBernoulliCOMP>(&algorithm)) comp->validate();
  }
};

struct SimOutcome {
  std::uint64_t successes = 0;
  std::uint64_t trials = 0;
  double empirical_p = 0.0;
  double wilson_halfwidth = 0.0;
};

// Half-width of the 95% Wilson score interval; the interval
// center +- halfwidth always stays inside [0,1].
inline double wilson_halfwidth(std::uint64_t successes, std::uint64_t trials) {
  if (trials == 0) throw std::domain_error("wilson_halfwidth: trials must be >= 1");
  const double z = 1.96;
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  const double z2n = z * z / n;
  return z * std::sqrt(phat * (1.0 - phat) / n + z * z / (4.0 * n * n)) / (1.0 + z2n);
}

inline double wilson_center(std::uint64_t successes, std::uint64_t trials) {
  const double z = 1.96;
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  const double z2n = z * z / n;
  return (phat + z2n / 2.0) / (1.0 + z2n);
}

// --- defectivity sampling ------------------------------------------------------

// One defectivity vector drawn from the source. Draw counts per trial are
// fixed by the model (K for combinatorial, N for the Bernoulli and Markov
// families, 1 for enumerated), keeping substreams reproducible.
inline std::vector<std::uint8_t> sample_defectivity(const SourceModel& src, RandomStream& stream) {
  return std::visit(
      [&stream](const auto& s) -> std::vector<std::uint8_t> {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, CombinatorialUniform>) {
          std::vector<std::uint32_t> idx(s.N);
          std::iota(idx.begin(), idx.end(), 0u);
          std::vector<std::uint8_t> u(s.N, 0);
          for (std::uint64_t j = 0; j < s.K; ++j) {
            const std::uint64_t pick = j + stream.next_below(s.N - j);
            std::swap(idx[j], idx[pick]);
            u[idx[j]] = 1;
          }
          return u;
        } else if constexpr (std::is_same_v<S, IIDBernoulli>) {
          std::vector<std::uint8_t> u(s.N);
          for (auto& b : u) b = stream.next_bernoulli(s.p) ? 1 : 0;
          return u;
        } else if constexpr (std::is_same_v<S, NonIdenticalBernoulli>) {
          std::vector<std::uint8_t> u(s.N());
          for (std::size_t i = 0; i < u.size(); ++i) {
            u[i] = stream.next_bernoulli(s.p[i]) ? 1 : 0;
          }
          return u;
        } else if constexpr (std::is_same_v<S, Enumerated>) {
          const double r = stream.next_unit();
          double acc = 0.0;
          std::uint32_t mask = s.pmf.empty() ? 0 : s.pmf.back().first;
          for (const auto& [m, prob] : s.pmf) {
            acc += prob;
            if (r < acc) {
              mask = m;
              break;
            }
          }
          std::vector<std::uint8_t> u(s.N);
          for (unsigned j = 0; j < s.N; ++j) u[j] = (mask >> j) & 1u;
          return u;
        } else {
          static_assert(std::is_same_v<S, TwoStateMarkov>);
          std::vector<std::uint8_t> u(s.N);
          std::uint8_t state = stream.next_bernoulli(s.initial[1]) ? 1 : 0;
          u[0] = state;
          for (unsigned j = 1; j < s.N; ++j) {
            state = stream.next_bernoulli(s.transition[state][1]) ? 1 : 0;
            u[j] = state;
          }
          return u;
        }
      },
      src);
}

// --- adaptive binary splitting -------------------------------------------------

// Noiseless test count for repeated binary splitting on u: sweep the
// remaining candidates (1 test); on a positive, binary-search the candidate
// vector for one defective (ceil(log2 size) tests), remove it, repeat. The
// count includes the final confirming negative sweep and is independent of
// any budget. At most K(ceil(log2 N)+1)+1 tests for K defectives.
inline std::uint64_t split_tests_needed(const std::vector<std::uint8_t>& u) {
  std::vector<std::uint32_t> cand(u.size());
  std::iota(cand.begin(), cand.end(), 0u);
  std::uint64_t defectives_left = 0;
  for (std::uint8_t b : u) defectives_left += b;

  std::uint64_t tests = 0;
  for (;;) {
    ++tests;  // sweep of the remaining candidate set
    if (defectives_left == 0) return tests;
    // Halving invariant: cand[lo, hi) contains at least one defective.
    std::size_t lo = 0, hi = cand.size();
    while (hi - lo > 1) {
      const std::size_t mid = lo + (hi - lo) / 2;
      ++tests;  // test the pool cand[lo, mid)
      bool positive = false;
      for (std::size_t i = lo; i < mid; ++i) {
        if (u[cand[i]]) {
          positive = true;
          break;
        }
      }
      if (positive) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    cand.erase(cand.begin() + static_cast<std::ptrdiff_t>(lo));
    --defectives_left;
  }
}

struct SplitResult {
  bool success = false;
  std::uint64_t tests_used = 0;
};

inline SplitResult run_adaptive_binary_split(const std::vector<std::uint8_t>& u,
                                             std::uint64_t T_budget) {
  const std::uint64_t needed = split_tests_needed(u);
  return {needed <= T_budget, std::min(needed, T_budget)};
}

// --- non-adaptive COMP ----------------------------------------------------------

// COMP on an explicit design: items of any negative test are cleared, the
// declared defective set is everything never cleared, success is exact-set
// recovery. Each test consumes exactly one output draw from the stream.
inline bool run_comp_design(const std::vector<std::uint8_t>& u,
                            const std::vector<std::vector<std::uint8_t>>& design,
                            const Channel& channel, RandomStream& stream) {
  const std::size_t N = u.size();
  std::vector<std::uint8_t> cleared(N, 0);
  for (const auto& row : design) {
    if (row.size() != N) throw std::invalid_argument("run_comp_design: row width != N");
    std::uint64_t k = 0;
    for (std::size_t i = 0; i < N; ++i) k += static_cast<std::uint64_t>(row[i] & u[i]);
    const bool y = sample_output(channel, k, stream);
    if (!y) {
      for (std::size_t i = 0; i < N; ++i) {
        if (row[i]) cleared[i] = 1;
      }
    }
  }
  for (std::size_t i = 0; i < N; ++i) {
    const bool declared = cleared[i] == 0;
    if (declared != (u[i] != 0)) return false;
  }
  return true;
}

inline bool run_comp(const std::vector<std::uint8_t>& u, double design_density,
                     std::uint64_t T_budget, const Channel& channel, RandomStream& stream) {
  NonAdaptiveBernoulliCOMP{design_density}.validate();
  const std::size_t N = u.size();
  std::vector<std::uint8_t> cleared(N, 0);
  std::vector<std::uint8_t> row(N);
  for (std::uint64_t t = 0; t < T_budget; ++t) {
    std::uint64_t k = 0;
    for (std::size_t i = 0; i < N; ++i) {
      row[i] = stream.next_bernoulli(design_density) ? 1 : 0;
      k += static_cast<std::uint64_t>(row[i] & u[i]);
    }
    const bool y = sample_output(channel, k, stream);
    if (!y) {
      for (std::size_t i = 0; i < N; ++i) {
        if (row[i]) cleared[i] = 1;
      }
    }
  }
  for (std::size_t i = 0; i < N; ++i) {
    const bool declared = cleared[i] == 0;
    if (declared != (u[i] != 0)) return false;
  }
  return true;
}

// --- Monte Carlo harness --------------------------------------------------------

namespace detail {

inline bool run_one_trial(const SimConfig& cfg, std::uint64_t trial) {
  RandomStream stream = RandomStream::for_trial(cfg.seed, trial);
  const std::vector<std::uint8_t> u = sample_defectivity(cfg.source, stream);
  return std::visit(
      [&](const auto& alg) -> bool {
        using A = std::decay_t<decltype(alg)>;
        if constexpr (std::is_same_v<A, AdaptiveBinarySplit>) {
          return run_adaptive_binary_split(u, cfg.T_budget).success;
        } else {
          return run_comp(u, alg.design_density, cfg.T_budget, cfg.channel, stream);
        }
      },
      cfg.algorithm);
}

inline SimOutcome outcome_from_counts(std::uint64_t successes, std::uint64_t trials) {
  SimOutcome out;
  out.successes = successes;
  out.trials = trials;
  out.empirical_p = static_cast<double>(successes) / static_cast<double>(trials);
  out.wilson_halfwidth = wilson_halfwidth(successes, trials);
  return out;
}

}  // namespace detail

// Every trial runs on its own substream keyed by (seed, trial index), so the
// aggregate is independent of execution order and worker count.
inline SimOutcome monte_carlo(const SimConfig& cfg) {
  cfg.validate();
  std::uint64_t successes = 0;
  for (std::uint64_t trial = 0; trial < cfg.trials; ++trial) {
    successes += detail::run_one_trial(cfg, trial) ? 1 : 0;
  }
  return detail::outcome_from_counts(successes, cfg.trials);
}

inline SimOutcome monte_carlo_parallel(const SimConfig& cfg, unsigned workers) {
  cfg.validate();
  if (workers == 0) throw std::domain_error("monte_carlo_parallel: workers must be >= 1");
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, cfg.trials));
  std::vector<std::uint64_t> counts(workers, 0);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&cfg, &counts, w, workers]() {
      const std::uint64_t lo = cfg.trials * w / workers;
      const std::uint64_t hi = cfg.trials * (w + 1) / workers;
      std::uint64_t local = 0;
      for (std::uint64_t trial = lo; trial < hi; ++trial) {
        local += detail::run_one_trial(cfg, trial) ? 1 : 0;
      }
      counts[w] = local;
    });
  }
  for (auto& th : pool) th.join();
  std::uint64_t successes = 0;
  for (std::uint64_t c : counts) successes += c;
  return detail::outcome_from_counts(successes, cfg.trials);
}

}  // namespace gtb
