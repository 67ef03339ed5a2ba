// gtbounds: evaluate group testing converse bounds, sweep them over T,
// reproduce the standard figure datasets, and run seeded simulations.
// Exit codes: 0 success, 2 usage error, 3 numeric/validity/file error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gtbounds/bounds.hpp"
#include "gtbounds/figures.hpp"
#include "gtbounds/simulator.hpp"

namespace {

using gtb::BoundResult;
using gtb::detail::fmt12;

struct GlobalOpts {
  std::string format = "csv";
  std::string out;
  std::uint64_t seed = 0;
  std::uint64_t trials = 1000;
};

void emit(const std::string& text, const GlobalOpts& g) {
  if (g.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(g.out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output path: " + g.out);
  f << text;
  f.flush();
  if (!f) throw std::runtime_error("write failed: " + g.out);
}

void emit_bound(const BoundResult& r, const GlobalOpts& g) {
  if (g.format == "json") {
    nlohmann::ordered_json j;
    j["name"] = r.name;
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.params) params[k] = v;
    j["params"] = params;
    if (std::isfinite(r.raw)) {
      j["raw"] = r.raw;
      j["log2_raw"] = r.log2_raw;
    } else {
      j["raw"] = r.raw > 0 ? "inf" : "-inf";
      j["log2_raw"] = r.log2_raw > 0 ? "inf" : "-inf";
    }
    j["clamped"] = r.clamped();
    j["valid"] = r.valid;
    if (!r.valid) j["invalid_reason"] = r.invalid_reason;
    emit(j.dump(2) + "\n", g);
    return;
  }
  std::ostringstream os;
  os << "name,params,raw,log2_raw,clamped,valid,invalid_reason\n" << r.name << ',';
  for (std::size_t i = 0; i < r.params.size(); ++i) {
    os << (i ? ";" : "") << r.params[i].first << '=' << fmt12(r.params[i].second);
  }
  os << ',' << fmt12(r.raw) << ',' << fmt12(r.log2_raw) << ',' << fmt12(r.clamped()) << ','
     << (r.valid ? 1 : 0) << ',' << r.invalid_reason << '\n';
  emit(os.str(), g);
}

struct FamilyParams {
  std::uint64_t T = 0;
  std::uint64_t t_from = 0;
  std::uint64_t t_to = 0;
  std::uint64_t N = 0;
  std::uint64_t K = 0;
  double p = 0.0;
  double log2_m = -1.0;
  std::string p_file;
  std::string enum_file;
  CLI::Option* log2m_opt = nullptr;
  CLI::Option* n_opt = nullptr;
  CLI::Option* k_opt = nullptr;
  CLI::Option* p_opt = nullptr;
  CLI::Option* enum_opt = nullptr;
};

double resolve_log2m(const FamilyParams& prm) {
  if (prm.log2m_opt->count() > 0) {
    if (prm.log2_m < 0) throw CLI::ValidationError("--log2-m", "must be >= 0");
    return prm.log2_m;
  }
  if (prm.n_opt->count() == 0 || prm.k_opt->count() == 0) {
    throw CLI::RequiredError("either --log2-m or both --N and --K");
  }
  return gtb::log2_choose(prm.N, prm.K);
}

// One evaluator shared by `bound` (single T) and `sweep` (T range).
std::function<BoundResult(std::uint64_t)> make_family(const std::string& name,
                                                      const FamilyParams& prm) {
  if (name == "bja") {
    return [prm](std::uint64_t T) { return gtb::bja_bound(T, prm.N, prm.K); };
  }
  if (name == "fano-comb") {
    return [prm](std::uint64_t T) { return gtb::fano_comb_bound(T, prm.N, prm.K); };
  }
  if (name == "fano-prob") {
    return [prm](std::uint64_t T) { return gtb::fano_prob_bound(T, prm.N, prm.p); };
  }
  if (name == "fano-comb-bsc") {
    return [prm](std::uint64_t T) { return gtb::fano_comb_bsc_bound(T, prm.N, prm.K, prm.p); };
  }
  if (name == "curp-iid") {
    return [prm](std::uint64_t T) { return gtb::iid_curp_bound(prm.N, prm.p, T); };
  }
  if (name == "nonidentical") {
    std::vector<double> ps = gtb::load_probability_list_file(prm.p_file);
    std::sort(ps.begin(), ps.end(), std::greater<>());
    return [ps](std::uint64_t T) { return gtb::nonidentical_bound(ps, T); };
  }
  if (name == "bsc-nonadaptive") {
    const double l2m = resolve_log2m(prm);
    return [prm, l2m](std::uint64_t T) { return gtb::bsc_nonadaptive_bound(T, l2m, prm.p); };
  }
  if (name == "bsc-adaptive") {
    const double l2m = resolve_log2m(prm);
    return [prm, l2m](std::uint64_t T) { return gtb::bsc_adaptive_bound({T, l2m, prm.p}); };
  }
  if (name == "noiseless-converse") {
    gtb::SourceModel src = gtb::CombinatorialUniform{prm.N, prm.K};
    if (prm.enum_opt->count() > 0) {
      src = gtb::load_enumerated_file(prm.enum_file);
    } else if (prm.p_opt->count() > 0) {
      if (prm.n_opt->count() == 0) throw CLI::RequiredError("--N");
      src = gtb::IIDBernoulli{prm.N, prm.p};
    } else if (prm.n_opt->count() == 0 || prm.k_opt->count() == 0) {
      throw CLI::RequiredError("--enum-file, or --N with --K or --p");
    }
    return [src](std::uint64_t T) { return gtb::noiseless_converse(src, T); };
  }
  throw std::logic_error("unknown family " + name);
}

// Flag layout per family; shared between bound and sweep registration.
void add_family_flags(CLI::App* c, const std::shared_ptr<FamilyParams>& prm,
                      const std::string& name) {
  prm->n_opt = c->add_option("--N", prm->N, "number of items");
  prm->k_opt = c->add_option("--K", prm->K, "number of defectives");
  prm->p_opt = c->add_option("--p", prm->p, "per-item / crossover probability");
  if (name == "bja" || name == "fano-comb") {
    prm->n_opt->required();
    prm->k_opt->required();
  } else if (name == "fano-prob" || name == "curp-iid") {
    prm->n_opt->required();
    prm->p_opt->required();
  } else if (name == "fano-comb-bsc") {
    prm->n_opt->required();
    prm->k_opt->required();
    prm->p_opt->required();
  } else if (name == "bsc-nonadaptive" || name == "bsc-adaptive") {
    prm->p_opt->required();
    prm->log2m_opt =
        c->add_option("--log2-m", prm->log2_m, "log2 of the message count (else C(N,K))");
  } else if (name == "nonidentical") {
    c->add_option("--p-file", prm->p_file, "file with one probability per line")->required();
  } else if (name == "noiseless-converse") {
    prm->enum_opt = c->add_option("--enum-file", prm->enum_file, "enumerated source file");
  }
}

const std::vector<std::pair<std::string, std::string>> kFamilies = {
    {"bja", "counting bound 2^T / C(N,K)"},
    {"fano-comb", "T / log2 C(N,K)"},
    {"fano-prob", "T / (N h(p))"},
    {"fano-comb-bsc", "T (1 - h(p)) / log2 C(N,K)"},
    {"curp-iid", "top-2^T mass of an iid Bernoulli source"},
    {"noiseless-converse", "top-2^T mass of any supported source"},
    {"nonidentical", "Bernstein bound for independent non-identical items"},
    {"bsc-nonadaptive", "randomized-threshold converse on a BSC"},
    {"bsc-adaptive", "adaptive converse on a BSC"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"group testing converse bound toolkit"};
  app.fallthrough();
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--format", g.format, "output format for single records")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  app.add_option("--out", g.out, "write output to this path instead of stdout");
  app.add_option("--seed", g.seed, "simulation seed")->capture_default_str();
  app.add_option("--trials", g.trials, "simulation trial count")->capture_default_str();

  // --- bound ------------------------------------------------------------------
  auto* bound = app.add_subcommand("bound", "evaluate one bound at a single point");
  bound->fallthrough();
  bound->require_subcommand(1);
  for (const auto& [name, desc] : kFamilies) {
    auto prm = std::make_shared<FamilyParams>();
    auto* c = bound->add_subcommand(name, desc);
    c->fallthrough();
    c->add_option("--T", prm->T, "number of tests")->required();
    add_family_flags(c, prm, name);
    const std::string fam = name;
    c->callback([prm, fam, &g] { emit_bound(make_family(fam, *prm)(prm->T), g); });
  }
  {
    // Gaussian approximation point: parameterized by the quantile y, not T.
    auto prm = std::make_shared<FamilyParams>();
    auto* c = bound->add_subcommand("gaussian-curp", "gaussian approximation of the iid curve");
    c->fallthrough();
    c->add_option("--N", prm->N, "number of items")->required();
    c->add_option("--p", prm->p, "per-item probability")->required();
    auto y = std::make_shared<double>(0.0);
    c->add_option("--y", *y, "standard normal quantile")->required();
    c->callback([prm, y, &g] {
      const gtb::GaussianCurpPoint pt = gtb::gaussian_approx_curp(prm->N, prm->p, *y);
      BoundResult r;
      r.name = "gaussian-curp";
      r.params = {{"N", double(prm->N)}, {"p", prm->p}, {"y", *y}, {"T_of_y", pt.T_of_y}};
      r.raw = pt.approx;
      r.log2_raw = std::log2(pt.approx);
      emit_bound(r, g);
    });
  }

  // --- sweep ------------------------------------------------------------------
  auto* sweep = app.add_subcommand("sweep", "evaluate one bound over a T range (CSV)");
  sweep->fallthrough();
  sweep->require_subcommand(1);
  for (const auto& [name, desc] : kFamilies) {
    auto prm = std::make_shared<FamilyParams>();
    auto* c = sweep->add_subcommand(name, desc);
    c->fallthrough();
    c->add_option("--t-from", prm->t_from, "first T")->required();
    c->add_option("--t-to", prm->t_to, "last T (inclusive)")->required();
    add_family_flags(c, prm, name);
    const std::string fam = name;
    c->callback([prm, fam, &g] {
      if (prm->t_from > prm->t_to) throw CLI::ValidationError("sweep", "empty T range");
      const auto family = make_family(fam, *prm);
      std::ostringstream os;
      os << "T,raw,clamped,valid\n";
      for (std::uint64_t T = prm->t_from; T <= prm->t_to; ++T) {
        const BoundResult r = family(T);
        os << T << ',' << fmt12(r.raw) << ',' << fmt12(r.clamped()) << ',' << (r.valid ? 1 : 0)
           << '\n';
      }
      emit(os.str(), g);
    });
  }

  // --- figure -----------------------------------------------------------------
  {
    auto* c = app.add_subcommand("figure", "emit one figure dataset as CSV");
    c->fallthrough();
    auto id = std::make_shared<std::string>();
    auto t_min = std::make_shared<std::optional<std::uint64_t>>();
    auto t_max = std::make_shared<std::optional<std::uint64_t>>();
    c->add_option("id", *id, "figure id")
        ->required()
        ->check(CLI::IsMember({"fig1-bsc-nonadaptive", "fig2-rates", "fig3-noiseless-adaptive",
                               "fig4-bernoulli", "fig5-bsc-adaptive", "fig1", "fig2", "fig3",
                               "fig4", "fig5"}));
    c->add_option("--t-min", *t_min, "override the first T of the grid");
    c->add_option("--t-max", *t_max, "override the last T of the grid");
    c->callback([id, t_min, t_max, &g] {
      gtb::FigureOptions opt;
      opt.t_min = *t_min;
      opt.t_max = *t_max;
      opt.trials = g.trials;
      opt.seed = g.seed;
      emit(gtb::figure_csv(gtb::parse_figure_id(*id), opt), g);
    });
  }

  // --- simulate ---------------------------------------------------------------
  {
    auto* c = app.add_subcommand("simulate", "Monte Carlo success probability of an algorithm");
    c->fallthrough();
    struct SimArgs {
      std::string source = "comb";
      std::string channel = "noiseless";
      std::string algorithm = "split";
      std::uint64_t N = 0, K = 0, T = 0;
      double p = 0.0, noise = 0.0, density = 0.5;
    };
    auto a = std::make_shared<SimArgs>();
    c->add_option("--source", a->source)->check(CLI::IsMember({"comb", "iid"}))->capture_default_str();
    c->add_option("--N", a->N, "number of items")->required();
    c->add_option("--K", a->K, "number of defectives (comb source)");
    c->add_option("--p", a->p, "per-item probability (iid source)");
    c->add_option("--channel", a->channel)
        ->check(CLI::IsMember({"noiseless", "bsc", "dilution"}))
        ->capture_default_str();
    c->add_option("--noise", a->noise, "crossover / dilution parameter");
    c->add_option("--algorithm", a->algorithm)
        ->check(CLI::IsMember({"split", "comp"}))
        ->capture_default_str();
    c->add_option("--density", a->density, "COMP design density")->capture_default_str();
    c->add_option("--T", a->T, "test budget")->required();
    c->callback([a, &g] {
      gtb::SimConfig cfg;
      if (a->source == "comb") {
        cfg.source = gtb::CombinatorialUniform{a->N, a->K};
      } else {
        cfg.source = gtb::IIDBernoulli{a->N, a->p};
      }
      if (a->channel == "noiseless") {
        cfg.channel = gtb::Noiseless{};
      } else if (a->channel == "bsc") {
        cfg.channel = gtb::BSC{a->noise};
      } else {
        cfg.channel = gtb::Dilution{a->noise};
      }
      if (a->algorithm == "split") {
        cfg.algorithm = gtb::AdaptiveBinarySplit{};
      } else {
        cfg.algorithm = gtb::NonAdaptiveBernoulliCOMP{a->density};
      }
      cfg.T_budget = a->T;
      cfg.trials = g.trials;
      cfg.seed = g.seed;
      const gtb::SimOutcome out = gtb::monte_carlo(cfg);
      if (g.format == "json") {
        nlohmann::ordered_json j;
        j["successes"] = out.successes;
        j["trials"] = out.trials;
        j["empirical_p"] = out.empirical_p;
        j["wilson_halfwidth"] = out.wilson_halfwidth;
        emit(j.dump(2) + "\n", g);
      } else {
        std::ostringstream os;
        os << "successes,trials,empirical_p,wilson_halfwidth\n"
           << out.successes << ',' << out.trials << ',' << fmt12(out.empirical_p) << ','
           << fmt12(out.wilson_halfwidth) << '\n';
        emit(os.str(), g);
      }
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
