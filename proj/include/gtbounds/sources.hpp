#pragma once
// Defectivity-vector models: entropy H(U) and the top-mass functional
// curP(m) = sum of the m largest outcome probabilities.
//
// m is routinely 2^T for T in the hundreds, so it is carried either as an
// exact big integer or as the exponent T itself; the combinatorial and
// i.i.d. paths never materialize 2^T in linear scale.

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "gtbounds/numerics.hpp"

namespace gtb {

// Raised when an exact enumeration is requested beyond the 2^24-state cap;
// callers should fall back to the analytic bound for the same model.
struct UnsupportedExactError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CombinatorialUniform {
  std::uint64_t N = 0;
  std::uint64_t K = 0;

  void validate() const {
    if (K > N) throw std::domain_error("CombinatorialUniform: K > N");
  }
};

struct IIDBernoulli {
  std::uint64_t N = 0;
  double p = 0.0;

  void validate() const {
    // The converse machinery assumes p <= 1/2 (most-likely vectors are the
    // sparsest); larger p is rejected rather than silently reflected.
    if (!(p >= 0.0 && p <= 0.5)) throw std::domain_error("IIDBernoulli: p outside [0, 1/2]");
  }
};

struct NonIdenticalBernoulli {
  std::vector<double> p;     // sorted nonincreasing, each in [0, 1/2]
  std::vector<double> zeta;  // ln((1-p_i)/p_i) >= 0; +inf where p_i = 0

  std::uint64_t N() const { return p.size(); }

  void validate() const {
    if (p.empty()) throw std::domain_error("NonIdenticalBernoulli: empty p list");
    if (zeta.size() != p.size()) throw std::domain_error("NonIdenticalBernoulli: zeta/p size mismatch");
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (!(p[i] >= 0.0 && p[i] <= 0.5)) {
        throw std::domain_error("NonIdenticalBernoulli: p outside [0, 1/2]");
      }
      if (i > 0 && p[i] > p[i - 1]) {
        throw std::domain_error("NonIdenticalBernoulli: p not sorted nonincreasing");
      }
    }
  }
};

inline NonIdenticalBernoulli make_non_identical(std::vector<double> p) {
  NonIdenticalBernoulli src;
  src.zeta.reserve(p.size());
  for (double pi : p) {
    src.zeta.push_back(pi > 0.0 ? std::log((1.0 - pi) / pi) : kPosInf);
  }
  src.p = std::move(p);
  src.validate();
  return src;
}

struct Enumerated {
  unsigned N = 0;
  // (bitmask, probability); bit j of the mask is item j. Entries with zero
  // probability may be listed or omitted.
  std::vector<std::pair<std::uint32_t, double>> pmf;

  void validate() const {
    if (N == 0 || N > 24) throw std::domain_error("Enumerated: N must be in [1, 24]");
    long double sum = 0.0L;
    for (const auto& [mask, prob] : pmf) {
      if (N < 32 && (mask >> N) != 0) throw std::domain_error("Enumerated: mask exceeds N bits");
      if (!(prob >= 0.0)) throw std::domain_error("Enumerated: negative probability");
      sum += prob;
    }
    if (std::abs(static_cast<double>(sum) - 1.0) > 1e-12) {
      throw std::domain_error("Enumerated: pmf does not sum to 1");
    }
    std::vector<std::uint32_t> masks;
    masks.reserve(pmf.size());
    for (const auto& e : pmf) masks.push_back(e.first);
    std::sort(masks.begin(), masks.end());
    if (std::adjacent_find(masks.begin(), masks.end()) != masks.end()) {
      throw std::domain_error("Enumerated: duplicate outcome");
    }
  }
};

struct TwoStateMarkov {
  unsigned N = 0;
  std::array<double, 2> initial{1.0, 0.0};                  // P(U_1 = 0), P(U_1 = 1)
  std::array<std::array<double, 2>, 2> transition{{{1.0, 0.0}, {0.0, 1.0}}};

  void validate() const {
    if (N == 0 || N > 24) throw std::domain_error("TwoStateMarkov: N must be in [1, 24]");
    auto check_row = [](const std::array<double, 2>& r, const char* what) {
      if (!(r[0] >= 0.0 && r[1] >= 0.0) || std::abs(r[0] + r[1] - 1.0) > 1e-12) {
        throw std::domain_error(std::string("TwoStateMarkov: ") + what + " is not a distribution");
      }
    };
    check_row(initial, "initial");
    check_row(transition[0], "transition row 0");
    check_row(transition[1], "transition row 1");
  }
};

using SourceModel =
    std::variant<CombinatorialUniform, IIDBernoulli, NonIdenticalBernoulli, Enumerated, TwoStateMarkov>;

inline void validate(const SourceModel& src) {
  std::visit([](const auto& s) { s.validate(); }, src);
}

inline std::uint64_t item_count(const SourceModel& src) {
  return std::visit(
      [](const auto& s) -> std::uint64_t {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, NonIdenticalBernoulli>) {
          return s.N();
        } else {
          return s.N;
        }
      },
      src);
}

// --- L* machinery -----------------------------------------------------------

// Level l_star and slack of the smallest Hamming ball holding m vectors:
//   sum_{i < l_star} C(N,i) < m <= sum_{i <= l_star} C(N,i),
//   slack_s = m - sum_{i < l_star} C(N,i), 1 <= slack_s <= C(N, l_star).
struct LStarResult {
  std::uint64_t l_star = 0;
  bigint slack_s = 1;
  bool saturated = false;

  double log2_slack() const { return log2_bigint(slack_s); }
};

inline LStarResult l_star_count(std::uint64_t N, const bigint& m) {
  if (m < 1) throw std::domain_error("l_star: m must be >= 1");
  if (m > (bigint(1) << N)) return {N, bigint(1), true};
  bigint c = 1;  // C(N, L) at loop head
  bigint cum = 1;
  for (std::uint64_t L = 0;; ++L) {
    if (cum >= m) return {L, m - (cum - c), false};
    c = c * (N - L) / (L + 1);
    cum += c;
  }
}

inline LStarResult l_star(std::uint64_t N, std::uint64_t T) {
  if (T > N) return {N, bigint(1), true};  // every vector already included
  return l_star_count(N, bigint(1) << T);
}

// --- top-mass count argument -------------------------------------------------

// Count m for top_mass: exact integer, or the exponent T standing for 2^T.
struct TopCount {
  bool is_pow2 = false;
  std::uint64_t t_exponent = 0;
  bigint exact_m = 0;

  static TopCount pow2(std::uint64_t t) {
    TopCount c;
    c.is_pow2 = true;
    c.t_exponent = t;
    return c;
  }
  static TopCount exact(bigint m) {
    if (m < 0) throw std::domain_error("TopCount: m < 0");
    TopCount c;
    c.exact_m = std::move(m);
    return c;
  }

  bool is_zero() const { return !is_pow2 && exact_m == 0; }
  // m >= 2^e ?
  bool at_least_pow2(std::uint64_t e) const {
    if (is_pow2) return t_exponent >= e;
    return exact_m >= (bigint(1) << e);
  }
  double log2_m() const {
    if (is_pow2) return static_cast<double>(t_exponent);
    if (exact_m == 0) return kNegInf;
    return log2_bigint(exact_m);
  }
};

namespace detail {

// Full pmf over 2^N masks for an independent-bit source; bit i of the mask
// is item i. Doubling construction, O(2^N) time and space.
inline std::vector<double> independent_path_probs(const std::vector<double>& p) {
  std::vector<double> probs{1.0};
  for (double pi : p) {
    const std::size_t n = probs.size();
    std::vector<double> next(n * 2);
    for (std::size_t j = 0; j < n; ++j) {
      next[j] = probs[j] * (1.0 - pi);
      next[j | n] = probs[j] * pi;
    }
    probs.swap(next);
  }
  return probs;
}

inline std::vector<double> markov_path_probs(const TwoStateMarkov& src) {
  std::vector<double> probs{src.initial[0], src.initial[1]};
  for (unsigned t = 1; t < src.N; ++t) {
    const std::size_t n = probs.size();
    std::vector<double> next(n * 2);
    for (std::size_t j = 0; j < n; ++j) {
      const unsigned prev = static_cast<unsigned>(j >> (t - 1)) & 1u;
      next[j] = probs[j] * src.transition[prev][0];
      next[j | n] = probs[j] * src.transition[prev][1];
    }
    probs.swap(next);
  }
  return probs;
}

// Sum of the m largest values. Ties at the cut boundary cannot change the
// sum, so an arbitrary tie order is fine.
inline double top_of_values(std::vector<double> vals, const TopCount& m) {
  const std::uint64_t support = vals.size();
  if (m.is_zero()) return 0.0;
  std::uint64_t m64 = 0;
  if (m.is_pow2) {
    if (m.t_exponent >= 63 || (std::uint64_t{1} << m.t_exponent) >= support) return 1.0;
    m64 = std::uint64_t{1} << m.t_exponent;
  } else {
    if (m.exact_m >= support) return 1.0;
    m64 = m.exact_m.convert_to<std::uint64_t>();
  }
  std::nth_element(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(m64), vals.end(),
                   std::greater<double>());
  double sum = 0.0, comp = 0.0;  // Kahan
  for (std::uint64_t i = 0; i < m64; ++i) {
    const double y = vals[i] - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return std::min(1.0, sum);
}

// curP(m) for an i.i.d. source: the top m vectors fill Hamming balls by
// weight, so curP(m) = sum_{i < L*} C(N,i) p^i (1-p)^{N-i} + s p^L* (1-p)^{N-L*}
// with (L*, s) from the exact level/slack computation. Evaluated in log
// domain; valid for all 0 < p <= 1/2 including the equiprobable p = 1/2 case
// (where it collapses to m / 2^N).
inline double top_mass_iid(std::uint64_t N, double p, const TopCount& m) {
  if (m.is_zero()) return 0.0;
  if (p == 0.0) return 1.0;  // point mass on the all-zero vector; m >= 1
  if (m.at_least_pow2(N)) return 1.0;
  const LStarResult ls = m.is_pow2 ? l_star(N, m.t_exponent) : l_star_count(N, m.exact_m);
  const double lp = std::log2(p), lq = std::log2(1.0 - p);
  double acc = kNegInf;
  for (std::uint64_t i = 0; i < ls.l_star; ++i) {
    acc = log2_sum_exp(acc, log2_choose(N, i) + static_cast<double>(i) * lp +
                                static_cast<double>(N - i) * lq);
  }
  acc = log2_sum_exp(acc, ls.log2_slack() + static_cast<double>(ls.l_star) * lp +
                              static_cast<double>(N - ls.l_star) * lq);
  return std::min(1.0, std::exp2(acc));
}

}  // namespace detail

// Source entropy H(U) in bits.
inline double entropy(const SourceModel& src) {
  validate(src);
  return std::visit(
      [](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, CombinatorialUniform>) {
          return log2_choose(s.N, s.K);
        } else if constexpr (std::is_same_v<S, IIDBernoulli>) {
          return static_cast<double>(s.N) * binary_entropy(s.p);
        } else if constexpr (std::is_same_v<S, NonIdenticalBernoulli>) {
          double sum = 0.0;
          for (double pi : s.p) sum += binary_entropy(pi);
          return sum;
        } else if constexpr (std::is_same_v<S, Enumerated>) {
          double sum = 0.0;
          for (const auto& [mask, prob] : s.pmf) {
            if (prob > 0.0) sum -= prob * std::log2(prob);
          }
          return sum;
        } else {
          double sum = 0.0;
          for (double prob : detail::markov_path_probs(s)) {
            if (prob > 0.0) sum -= prob * std::log2(prob);
          }
          return sum;
        }
      },
      src);
}

// curP(m): total probability of the m most likely defectivity vectors.
inline double top_mass(const SourceModel& src, const TopCount& m) {
  validate(src);
  return std::visit(
      [&m](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, CombinatorialUniform>) {
          // min(1, m / C(N,K)) in log domain.
          if (m.is_zero()) return 0.0;
          const double diff = m.log2_m() - log2_choose(s.N, s.K);
          return diff >= 0.0 ? 1.0 : std::exp2(diff);
        } else if constexpr (std::is_same_v<S, IIDBernoulli>) {
          return detail::top_mass_iid(s.N, s.p, m);
        } else if constexpr (std::is_same_v<S, NonIdenticalBernoulli>) {
          if (s.N() > 24) {
            throw UnsupportedExactError(
                "NonIdenticalBernoulli top_mass: exact enumeration capped at N = 24; "
                "use the analytic converse bound for larger N");
          }
          return detail::top_of_values(detail::independent_path_probs(s.p), m);
        } else if constexpr (std::is_same_v<S, Enumerated>) {
          std::vector<double> vals;
          vals.reserve(s.pmf.size());
          for (const auto& e : s.pmf) vals.push_back(e.second);
          return detail::top_of_values(std::move(vals), m);
        } else {
          return detail::top_of_values(detail::markov_path_probs(s), m);
        }
      },
      src);
}

// --- enumerated-source text format -------------------------------------------
// One outcome per line: a binary string of length N, then its probability.
// The leftmost character is item 0. Blank lines and '#' comments are ignored.

inline Enumerated load_enumerated(std::istream& in) {
  Enumerated src;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    std::string pattern;
    if (!(row >> pattern)) continue;  // blank
    double prob = 0.0;
    if (!(row >> prob)) {
      throw std::runtime_error("enumerated source line " + std::to_string(lineno) +
                               ": missing probability");
    }
    std::string extra;
    if (row >> extra) {
      throw std::runtime_error("enumerated source line " + std::to_string(lineno) +
                               ": trailing tokens");
    }
    if (pattern.empty() || pattern.size() > 24 ||
        pattern.find_first_not_of("01") != std::string::npos) {
      throw std::runtime_error("enumerated source line " + std::to_string(lineno) +
                               ": pattern must be a binary string of length 1..24");
    }
    if (src.N == 0) {
      src.N = static_cast<unsigned>(pattern.size());
    } else if (pattern.size() != src.N) {
      throw std::runtime_error("enumerated source line " + std::to_string(lineno) +
                               ": inconsistent pattern length");
    }
    std::uint32_t mask = 0;
    for (std::size_t j = 0; j < pattern.size(); ++j) {
      if (pattern[j] == '1') mask |= (1u << j);
    }
    src.pmf.emplace_back(mask, prob);
  }
  if (src.pmf.empty()) throw std::runtime_error("enumerated source: no outcomes");
  src.validate();
  return src;
}

inline Enumerated load_enumerated_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open enumerated source file: " + path);
  return load_enumerated(in);
}

// Plain probability list: one value per line, '#' comments and blank lines
// skipped. Range constraints are left to the consuming model.
inline std::vector<double> load_probability_list(std::istream& in) {
  std::vector<double> p;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    double v = 0.0;
    if (!(row >> v)) {
      std::string token;
      std::istringstream recheck(line);
      if (recheck >> token) {
        throw std::runtime_error("probability list line " + std::to_string(lineno) +
                                 ": not a number");
      }
      continue;  // blank line
    }
    std::string extra;
    if (row >> extra) {
      throw std::runtime_error("probability list line " + std::to_string(lineno) +
                               ": trailing tokens");
    }
    p.push_back(v);
  }
  if (p.empty()) throw std::runtime_error("probability list: no values");
  return p;
}

inline std::vector<double> load_probability_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open probability list file: " + path);
  return load_probability_list(in);
}

}  // namespace gtb
