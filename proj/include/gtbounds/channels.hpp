#pragma once
// Only-Defects-Matter observation channels: the binary test outcome depends
// on the pool only through its defective count k, via P(y|k).

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "gtbounds/numerics.hpp"
#include "gtbounds/rng.hpp"

namespace gtb {

struct Noiseless {
  void validate() const {}
};

// Symmetric flip of the noiseless indicator: collapses through x = 1{k >= 1},
// P(y|k) = p when y != x, 1-p when y = x.
struct BSC {
  double p = 0.0;

  void validate() const {
    if (!(p >= 0.0 && p < 0.5)) throw std::domain_error("BSC: p outside [0, 1/2)");
  }
};

// P(0|k) = (1-u)^k: each defective item in the pool is independently diluted
// away with probability u.
struct Dilution {
  double u = 0.0;

  void validate() const {
    if (!(u >= 0.0 && u <= 1.0)) throw std::domain_error("Dilution: u outside [0,1]");
  }
};

struct GenericODM {
  std::uint64_t k_max = 0;
  std::vector<std::array<double, 2>> table;  // table[k] = {P(0|k), P(1|k)}, k = 0..k_max

  void validate() const {
    if (table.size() != k_max + 1) throw std::domain_error("GenericODM: table size != k_max + 1");
    for (const auto& row : table) {
      if (!(row[0] >= 0.0 && row[1] >= 0.0) || std::abs(row[0] + row[1] - 1.0) > 1e-12) {
        throw std::domain_error("GenericODM: row is not a distribution");
      }
    }
  }
};

using Channel = std::variant<Noiseless, BSC, Dilution, GenericODM>;

inline void validate(const Channel& ch) {
  std::visit([](const auto& c) { c.validate(); }, ch);
}

// P(y | k). Defined for every k except GenericODM, whose table ends at k_max.
inline double transition_prob(const Channel& ch, std::uint64_t k, int y) {
  if (y != 0 && y != 1) throw std::domain_error("transition_prob: y must be 0 or 1");
  return std::visit(
      [k, y](const auto& c) -> double {
        using C = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<C, Noiseless>) {
          const int x = k >= 1 ? 1 : 0;
          return y == x ? 1.0 : 0.0;
        } else if constexpr (std::is_same_v<C, BSC>) {
          const int x = k >= 1 ? 1 : 0;
          return y == x ? 1.0 - c.p : c.p;
        } else if constexpr (std::is_same_v<C, Dilution>) {
          const double p0 = std::pow(1.0 - c.u, static_cast<double>(k));
          return y == 0 ? p0 : 1.0 - p0;
        } else {
          if (k > c.k_max) throw std::domain_error("GenericODM: k exceeds k_max");
          return c.table[k][y];
        }
      },
      ch);
}

// Shannon capacity 1 - h(p) of the collapsed binary symmetric channel, bits.
inline double capacity_bsc(double p) {
  if (!(p >= 0.0 && p <= 0.5)) throw std::domain_error("capacity_bsc: p outside [0, 1/2]");
  return 1.0 - binary_entropy(p);
}

// Draw y ~ P(.|k). Consumes exactly one uniform draw regardless of channel,
// so downstream draws stay aligned across channel choices.
inline int sample_output(const Channel& ch, std::uint64_t k, RandomStream& stream) {
  const double p1 = transition_prob(ch, k, 1);
  return stream.next_unit() < p1 ? 1 : 0;
}

// --- ODM table text format ----------------------------------------------------
// One line per k starting at k = 0: `P(0|k) P(1|k)`. Blank lines and '#'
// comments are ignored.

inline GenericODM load_odm_table(std::istream& in) {
  GenericODM ch;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    double p0 = 0.0, p1 = 0.0;
    if (!(row >> p0)) continue;  // blank
    if (!(row >> p1)) {
      throw std::runtime_error("odm table line " + std::to_string(lineno) + ": expected two columns");
    }
    std::string extra;
    if (row >> extra) {
      throw std::runtime_error("odm table line " + std::to_string(lineno) + ": trailing tokens");
    }
    ch.table.push_back({p0, p1});
  }
  if (ch.table.empty()) throw std::runtime_error("odm table: no rows");
  ch.k_max = ch.table.size() - 1;
  ch.validate();
  return ch;
}

inline GenericODM load_odm_table_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open odm table file: " + path);
  return load_odm_table(in);
}

}  // namespace gtb
