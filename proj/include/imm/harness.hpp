#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "imm/information.hpp"
#include "imm/io.hpp"
#include "imm/market.hpp"
#include "imm/portfolios.hpp"
#include "imm/quadrature.hpp"
#include "imm/rng.hpp"
#include "imm/sde.hpp"
#include "imm/stats.hpp"

namespace imm {

inline constexpr std::uint64_t kReferenceSeed = 1;
inline constexpr double kKsLevel = 0.01;
inline constexpr double kMomentTolerance = 0.02;

struct Check {
  std::string name;
  std::string scenario;
  std::uint64_t seed = 0;
  bool passed = false;
  Json metrics = Json::object();
};

struct SuiteResult {
  std::string name;
  int criterion = 0;
  std::string title;
  std::vector<Check> checks;
  double seconds = 0.0;
  std::string error;  // set when the suite threw

  bool passed() const {
    if (!error.empty() || checks.empty()) return false;
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
  }

  // First failing check, for the one-line summary.
  std::string first_failure() const {
    if (!error.empty()) return error;
    for (const auto& c : checks) {
      if (!c.passed) return c.name + " [" + c.scenario + ", seed " + std::to_string(c.seed) + "]";
    }
    return "";
  }

  Json to_json() const {
    Json j;
    j["suite"] = name;
    j["criterion"] = criterion;
    j["title"] = title;
    j["passed"] = passed();
    j["seconds"] = seconds;
    if (!error.empty()) j["error"] = error;
    Json cs = Json::array();
    for (const auto& c : checks) {
      cs.push_back(Json{{"name", c.name}, {"scenario", c.scenario}, {"seed", c.seed},
                        {"passed", c.passed}, {"metrics", c.metrics}});
    }
    j["checks"] = cs;
    return j;
  }
};

struct HarnessOptions {
  std::uint64_t seed = kReferenceSeed;
  std::size_t workers = default_workers();
};

namespace detail {

inline Json ks_json(const KsResult& ks) {
  return Json{{"statistic", ks.statistic}, {"p_value", ks.p_value}, {"n", ks.n}, {"m", ks.m},
              {"reference", ks.reference}};
}

inline MarketConfig info_config(std::size_t n, ActivitySpec activity, double horizon, double dt,
                                std::size_t paths, std::uint64_t seed) {
  MarketConfig cfg;
  cfg.n = n;
  cfg.risk_premium_factors.assign(n, 1.0 / static_cast<double>(n));
  cfg.activity = {{activity}, true};
  cfg.interest_rate = ConstantRate{0.03};
  cfg.net_risk_adjusted_return = 0.05;
  cfg.horizon = horizon;
  cfg.grid_step = dt;
  cfg.paths = paths;
  cfg.seed = seed;
  return cfg;
}

inline std::string index_set(const std::vector<std::size_t>& s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i] + 1);
  }
  return out + "}";
}

inline const CirActivity kTestActivity{1.0, 2.0, 1.0, 0.5};

}  // namespace detail

// ---------------------------------------------------------------- suites

inline SuiteResult conservation_suite(const HarnessOptions& opt) {
  SuiteResult r{"conservation", 1, "risk premium factors sum to one; atom GOP weights equal omega", {}};
  RngStream rng(opt.seed, 0);
  std::size_t accepted = 0, rejected_ok = 0, bad_accept = 0, weight_mismatch = 0;
  double worst_sum = 0.0;
  for (int trial = 0; trial < 4000; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 40.0);
    MarketConfig cfg;
    cfg.n = n;
    const bool info = trial % 4 == 0;
    cfg.mode = info ? Mode::info_minimizing : Mode::general_stationary;
    std::vector<double> w(n);
    if (info) {
      w.assign(n, 1.0 / static_cast<double>(n));
    } else {
      double s = 0.0;
      for (auto& x : w) s += (x = -std::log(rng.uniform()));
      for (auto& x : w) x /= s;
      cfg.initial_values = std::vector<double>(n, 1.0);
    }
    const bool perturb = trial % 3 == 0;
    if (perturb) w[n - 1] += (rng.uniform() < 0.5 ? -1.0 : 1.0) * 1e-9;
    cfg.risk_premium_factors = w;
    const bool ok = validate_config(cfg).ok();
    const double sum = std::accumulate(w.begin(), w.end(), 0.0);
    if (ok) {
      ++accepted;
      worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
      if (perturb) ++bad_accept;
      const auto gop = atom_gop_weights(cfg);
      if (gop.weights != cfg.risk_premium_factors || gop.includes_savings) ++weight_mismatch;
    } else if (perturb) {
      ++rejected_ok;
    }
  }
  r.checks.push_back({"accepted configs sum to one within 1e-12", "4000 random configs, n in 1..40",
                      opt.seed, worst_sum <= kSumTolerance && bad_accept == 0,
                      Json{{"accepted", accepted}, {"worst_abs_sum_error", worst_sum},
                           {"perturbed_accepted", bad_accept}, {"perturbed_rejected", rejected_ok}}});
  r.checks.push_back({"atom GOP weights equal omega", "4000 random configs, n in 1..40", opt.seed,
                      weight_mismatch == 0 && accepted > 0, Json{{"mismatches", weight_mismatch}}});
  return r;
}

inline SuiteResult stationary_suite(const HarnessOptions& opt) {
  SuiteResult r{"stationary", 2, "normalized atoms follow Gamma(2 omega, 2)", {}};
  for (std::size_t n : {1u, 2u, 5u}) {
    const std::size_t paths = 100;
    const double dt = kDecorrelationInterval;
    const double horizon = dt * std::ceil(1e5 / static_cast<double>(paths * n));
    const auto cfg = detail::info_config(n, ConstantActivity{1.0}, horizon, dt, paths, opt.seed + 200 + n);
    const auto t = stationary_law_test(cfg, kDecorrelationInterval, opt.workers);
    const std::string sc = "n=" + std::to_string(n) + ", a=1, exact transitions";
    const double target = 1.0 / static_cast<double>(n);
    r.checks.push_back({"KS vs Gamma(2/n, 2)", sc, cfg.seed, !t.ks.rejects(kKsLevel) && t.samples >= 100000,
                        detail::ks_json(t.ks)});
    r.checks.push_back({"sample mean within 2% of 1/n", sc, cfg.seed,
                        std::abs(t.sample_mean / target - 1.0) <= kMomentTolerance,
                        Json{{"mean", t.sample_mean}, {"target", target}, {"samples", t.samples}}});
  }
  return r;
}

inline SuiteResult selfinfo_suite(const HarnessOptions& opt) {
  SuiteResult r{"selfinfo", 3, "self-information closed form against quadrature", {}};
  for (double w : {0.25, 0.5, 1.0, 2.0}) {
    const GammaLaw law = GammaLaw::stationary(w);
    const auto q = integrate_half_line(
        [&](double y) {
          const double lp = law.log_pdf(y);
          return std::exp(lp) * lp;
        },
        10.0 * law.mean());
    const double cf = self_information(w);
    r.checks.push_back({"closed form vs integral of p ln p", "omega=" + format_double(w), opt.seed,
                        std::abs(cf - q.value) <= 1e-8,
                        Json{{"closed_form", cf}, {"quadrature", q.value}, {"quadrature_error", q.error}}});
  }
  const double half = self_information(0.5);
  const double exact = std::log(2.0) - 1.0;
  r.checks.push_back({"omega=1/2 equals ln 2 - 1", "omega=0.5", opt.seed, std::abs(half - exact) <= 1e-15,
                      Json{{"value", half}, {"exact", exact}}});
  return r;
}

inline SuiteResult kl_suite(const HarnessOptions& opt) {
  SuiteResult r{"kl", 4, "Monte Carlo KL divergence matches the closed form (n=1)", {}};
  std::uint64_t cell = 0;
  for (double a : {0.05, 0.2, 1.0}) {
    for (double lh : {-0.5, 0.0, 0.05, 0.5}) {
      const double horizon = 50.0 / a;
      auto cfg = detail::info_config(1, ConstantActivity{a}, horizon, horizon / 1000.0, 10000,
                                     opt.seed + 400 + cell++);
      cfg.net_risk_adjusted_return = lh;
      const auto mc = kl_divergence_monte_carlo(cfg, 0.99, opt.workers);
      const double cf = kl_divergence_closed_form(lh, omega_bar_exact(1), a);
      const double rel = mc.estimate / cf - 1.0;
      r.checks.push_back({"relative error within 2%",
                          "a=" + format_double(a) + ", lambda_hat=" + format_double(lh), cfg.seed,
                          std::abs(rel) <= kMomentTolerance,
                          Json{{"monte_carlo", mc.estimate}, {"standard_error", mc.standard_error},
                               {"closed_form", cf}, {"relative_error", rel}}});
    }
  }
  return r;
}

inline SuiteResult additivity_suite(const HarnessOptions& opt) {
  SuiteResult r{"additivity", 5, "sums of normalized atoms are square-root processes of summed dimension", {}};
  struct Scenario {
    std::size_t n;
    std::vector<std::size_t> a, b;
  };
  const std::vector<Scenario> scenarios{{2, {0}, {1}}, {4, {0}, {1}}, {5, {0, 1}, {2, 3, 4}}};
  std::uint64_t idx = 0;
  for (const auto& s : scenarios) {
    const auto cfg = detail::info_config(s.n, detail::kTestActivity, 1.0, 0.01, 20000, opt.seed + 500 + idx++);
    const auto ks = additivity_test(cfg, s.a, s.b, opt.workers);
    r.checks.push_back({"two-sample KS", "n=" + std::to_string(s.n) + ", A=" + detail::index_set(s.a) +
                                             ", B=" + detail::index_set(s.b),
                        cfg.seed, !ks.rejects(kKsLevel), detail::ks_json(ks)});
  }
  return r;
}

inline SuiteResult dimension_suite(const HarnessOptions& opt) {
  SuiteResult r{"dimension", 6, "normalized AP and atom GOP are dimension-four processes", {}};
  for (std::size_t n : {2u, 5u}) {
    const auto cfg = detail::info_config(n, ConstantActivity{1.0}, 500.0, 0.01, 100, opt.seed + 600 + n);
    const std::string sc = "n=" + std::to_string(n) + ", a=1, dt=0.01, T=500";
    const auto ap = ap_dimension_test(cfg, kDecorrelationInterval, opt.workers);
    r.checks.push_back({"AP: KS vs Gamma(2, 2)", sc, cfg.seed, !ap.ks.rejects(kKsLevel),
                        detail::ks_json(ap.ks)});
    const auto gop = gop_dimension_test(cfg, kDecorrelationInterval, opt.workers);
    auto m = detail::ks_json(gop.ks);
    m["sample_mean"] = gop.sample_mean;
    r.checks.push_back({"atom GOP: KS vs Gamma(2, 2)", sc, cfg.seed, !gop.ks.rejects(kKsLevel), m});
    r.checks.push_back({"atom GOP: time average within 2% of 1", sc, cfg.seed,
                        std::abs(gop.clock_average - 1.0) <= kMomentTolerance,
                        Json{{"time_average", gop.clock_average}}});
  }
  return r;
}

inline SuiteResult mvp_suite(const HarnessOptions& opt) {
  SuiteResult r{"mvp", 7, "MVP equals AP; MVP volatility below atom GOP volatility", {}};
  for (std::size_t n : {1u, 2u, 5u, 20u}) {
    const auto cfg = detail::info_config(n, CirActivity{0.2, 20.0, 0.2, 0.5}, 20.0, 0.01, 50, opt.seed + 700 + n);
    struct Row {
      double max_dev = 0.0;
      std::size_t points = 0, le = 0, strict = 0;
      double worst_identity = 0.0;
    };
    const auto rows = map_paths(
        cfg,
        [&](const MarketPath& p, std::size_t) {
          Row row;
          const auto dev = mvp_equals_ap_check(cfg, p);
          row.max_dev = *std::max_element(dev.begin(), dev.end());
          const auto mvp = portfolio_path(MvpRule{}, cfg, p);
          const auto gop = atom_gop_path(cfg, p);
          for (std::size_t i = 0; i < p.points(); ++i) {
            const double sm = mvp.squared_volatility[i];
            const double sg = gop.portfolio.squared_volatility[i];
            ++row.points;
            if (sm <= sg) ++row.le;
            if (sm < sg) ++row.strict;
            double ysum = 0.0;
            for (std::size_t k = 0; k < n; ++k) ysum += p.normalized[k][i];
            row.worst_identity = std::max(row.worst_identity, std::abs(sm * ysum / p.activity[i] - 1.0));
          }
          return row;
        },
        opt.workers);
    Row tot;
    for (const auto& row : rows) {
      tot.max_dev = std::max(tot.max_dev, row.max_dev);
      tot.points += row.points;
      tot.le += row.le;
      tot.strict += row.strict;
      tot.worst_identity = std::max(tot.worst_identity, row.worst_identity);
    }
    const std::string sc = "n=" + std::to_string(n) + ", CIR activity, 50 paths";
    r.checks.push_back({"max weight deviation <= 1e-10", sc, cfg.seed, tot.max_dev <= 1e-10,
                        Json{{"max_deviation", tot.max_dev}}});
    const bool vol_ok = n == 1 ? tot.le == tot.points : tot.strict == tot.points;
    r.checks.push_back({n == 1 ? "sigma_MVP^2 <= sigma_star^2 at every point"
                               : "sigma_MVP^2 < sigma_star^2 at every point",
                        sc, cfg.seed, vol_ok,
                        Json{{"points", tot.points}, {"le", tot.le}, {"strict", tot.strict},
                             {"mvp_variance_identity_rel_error", tot.worst_identity}}});
  }
  return r;
}

inline SuiteResult scaling_suite(const HarnessOptions& opt) {
  SuiteResult r{"scaling", 8, "scaled denominated dimension-4 values are squared Bessel", {}};
  const std::vector<std::size_t> atoms{0, 1};
  std::uint64_t idx = 0;
  for (double c : {0.5, 2.0}) {
    const auto cfg = detail::info_config(2, detail::kTestActivity, 4.0, 0.005, 20000, opt.seed + 800 + idx++);
    const auto ks = scaling_test(cfg, atoms, c, 0.5, opt.workers);
    r.checks.push_back({"two-sample KS", "n=2, A={1,2}, u=0.5, c=" + format_double(c), cfg.seed,
                        !ks.rejects(kKsLevel), detail::ks_json(ks)});
  }
  return r;
}

inline SuiteResult phi_suite(const HarnessOptions& opt) {
  SuiteResult r{"phi", 9, "only phi(y)=y yields a gamma stationary law", {}};
  const std::vector<VolatilityFunction> cands{{{1.0}}, {{0.0, 1.0}}, {{0.0, 0.0, 1.0}}, {{1.0, 1.0}}};
  const std::vector<std::string> names{"1", "y", "y^2", "1+y"};
  const auto sel = phi_identity_selector(cands, 0.5, 1e-6);
  Json d = Json::object();
  for (std::size_t i = 0; i < cands.size(); ++i) {
    d[names[i]] = std::isfinite(sel.distances[i]) ? Json(sel.distances[i]) : Json("inf");
  }
  const std::string sc = "omega=0.5, candidates {1, y, y^2, 1+y}";
  r.checks.push_back({"selected phi(y)=y", sc, opt.seed, sel.selected && *sel.selected == 1,
                      Json{{"distances", d}}});
  bool others = true;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (i != 1 && !(sel.distances[i] > 1e-3)) others = false;
  }
  r.checks.push_back({"distance(y) < 1e-6, others > 1e-3", sc, opt.seed, sel.distances[1] < 1e-6 && others,
                      Json{{"distances", d}}});
  return r;
}

inline SuiteResult lambda_suite(const HarnessOptions& opt) {
  SuiteResult r{"lambda", 10, "implied net risk-adjusted return from realized growth", {}};
  double prev_se = std::numeric_limits<double>::infinity();
  std::uint64_t idx = 0;
  for (double horizon : {50.0, 200.0, 500.0}) {
    const auto cfg = detail::info_config(1, ConstantActivity{0.2}, horizon, 0.05, 1000, opt.seed + 1000 + idx++);
    const auto g = growth_report(cfg, opt.workers);
    const double err = g.implied_lambda_hat.mean - g.configured_lambda_hat;
    const double se = g.implied_lambda_hat.standard_error;
    const std::string sc = "n=1, a=0.2, lambda_hat=0.05, T=" + format_double(horizon);
    Json m{{"implied", g.implied_lambda_hat.mean}, {"standard_error", se}, {"error", err}};
    r.checks.push_back({"error within 3 SE, SE shrinking", sc, cfg.seed,
                        std::abs(err) <= 3.0 * se && se < prev_se, m});
    if (horizon == 500.0) {
      r.checks.push_back({"within 0.01 at T=500", sc, cfg.seed, std::abs(err) <= 0.01, m});
    }
    prev_se = se;
  }
  {
    const auto cfg = detail::info_config(3, CirActivity{0.2, 2.0, 0.2, 0.5}, 500.0, 0.05, 1000, opt.seed + 1010);
    const auto g = growth_report(cfg, opt.workers);
    const double err = g.implied_lambda_hat.mean - g.configured_lambda_hat;
    r.checks.push_back({"within 0.01 at T=500", "n=3, CIR activity, lambda_hat=0.05, T=500", cfg.seed,
                        std::abs(err) <= 0.01,
                        Json{{"implied", g.implied_lambda_hat.mean},
                             {"standard_error", g.implied_lambda_hat.standard_error}}});
  }
  {
    const auto cfg = detail::info_config(2, ConstantActivity{1e-4}, 500.0, 0.5, 200, opt.seed + 1020);
    const auto g = growth_report(cfg, opt.workers);
    const double r0 = 0.03;
    const double worst = std::max({std::abs(g.savings.mean - r0), std::abs(g.ap.mean - r0),
                                   std::abs(g.mvp.mean - r0), std::abs(g.atom_gop.mean - r0),
                                   std::abs(g.extended_gop.mean - r0)});
    r.checks.push_back({"a -> 0: all growth rates within 1e-3 of r", "n=2, a=1e-4, r=0.03, T=500", cfg.seed,
                        worst <= 1e-3,
                        Json{{"savings", g.savings.mean}, {"ap", g.ap.mean}, {"mvp", g.mvp.mean},
                             {"atom_gop", g.atom_gop.mean}, {"extended_gop", g.extended_gop.mean},
                             {"worst_abs_deviation", worst}}});
  }
  return r;
}

// AP log-returns over the grid step, pooled over paths.
inline std::vector<double> ap_log_returns(const MarketConfig& cfg, std::size_t workers = default_workers()) {
  const auto per = map_paths(
      cfg, [&](const MarketPath& p, std::size_t) { return portfolio_path(ApRule{}, cfg, p).log_increment; },
      workers);
  std::vector<double> out;
  for (const auto& v : per) out.insert(out.end(), v.begin(), v.end());
  return out;
}

inline MarketConfig student_t_config(std::uint64_t seed) {
  auto cfg = detail::info_config(20, CirActivity{0.2, 20.0, 0.2, 0.5}, 100.0, 1.0 / 52.0, 100, seed);
  return cfg;
}

inline SuiteResult student_t_suite(const HarnessOptions& opt) {
  SuiteResult r{"student_t", 11, "AP log-returns have Student-t tails with df in [3, 6]", {}};
  for (std::uint64_t s = 0; s < 3; ++s) {
    const auto cfg = student_t_config(opt.seed + s);
    const auto f = student_t_fit(ap_log_returns(cfg, opt.workers), cfg.grid_step);
    r.checks.push_back({"fitted df in [3, 6]", "n=20, CIR activity, weekly returns, 100 paths x 100 years",
                        cfg.seed, f.df >= 3.0 && f.df <= 6.0 && f.converged,
                        Json{{"df", f.df}, {"df_se", f.df_se}, {"location", f.location}, {"scale", f.scale},
                             {"observations", f.observations}}});
  }
  return r;
}

// Streams every trajectory table into the writer, in path order.
inline void write_trajectories(const MarketConfig& cfg, TrajectoryWriter& w,
                               std::size_t workers = default_workers()) {
  require_valid(cfg);
  w.header(cfg.n);
  constexpr std::size_t kBatch = 64;
  for (std::size_t start = 0; start < cfg.paths; start += kBatch) {
    const std::size_t count = std::min(kBatch, cfg.paths - start);
    const auto batch =
        parallel_map(count, [&](std::size_t i) { return simulate_path(cfg, start + i); }, workers);
    for (std::size_t i = 0; i < count; ++i) w.path(cfg, batch[i], start + i);
  }
}

// All outputs of a run as strings: the four tables and a summary.
inline std::vector<std::string> run_outputs(const MarketConfig& cfg, std::size_t workers) {
  std::ostringstream a, p, act, c;
  TrajectoryWriter w{a, p, act, c};
  write_trajectories(cfg, w, workers);
  const auto kl = kl_divergence_monte_carlo(cfg, 0.99, workers);
  const auto g = growth_report(cfg, workers);
  const Json summary{{"kl", kl.estimate}, {"kl_se", kl.standard_error}, {"ap_growth", g.ap.mean},
                     {"implied_lambda_hat", g.implied_lambda_hat.mean}};
  return {a.str(), p.str(), act.str(), c.str(), summary.dump()};
}

inline SuiteResult determinism_suite(const HarnessOptions& opt) {
  SuiteResult r{"determinism", 12, "identical seeds give byte-identical outputs for any worker count", {}};
  auto cfg = detail::info_config(3, detail::kTestActivity, 5.0, 0.05, 40, opt.seed + 1200);
  cfg.interest_rate = MeanRevertingRate{0.03, 0.5, 0.03, 0.05};
  const auto ref = run_outputs(cfg, 1);
  for (std::size_t w : {4u, 8u}) {
    const auto other = run_outputs(cfg, w);
    std::size_t bytes = 0;
    for (const auto& s : ref) bytes += s.size();
    r.checks.push_back({"outputs identical to 1 worker", "n=3, CIR activity and rate, workers=" + std::to_string(w),
                        cfg.seed, other == ref, Json{{"bytes", bytes}}});
  }
  return r;
}

// ---------------------------------------------------------------- registry

struct SuiteEntry {
  const char* name;
  std::function<SuiteResult(const HarnessOptions&)> run;
};

inline const std::vector<SuiteEntry>& suite_registry() {
  static const std::vector<SuiteEntry> r{
      {"conservation", conservation_suite}, {"stationary", stationary_suite}, {"selfinfo", selfinfo_suite},
      {"kl", kl_suite},                     {"additivity", additivity_suite}, {"dimension", dimension_suite},
      {"mvp", mvp_suite},                   {"scaling", scaling_suite},       {"phi", phi_suite},
      {"lambda", lambda_suite},             {"student_t", student_t_suite},   {"determinism", determinism_suite},
  };
  return r;
}

// Parses "mvp,additivity" or "all"; throws InputError on unknown names.
inline std::vector<std::string> parse_suite_list(const std::string& list) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(list);
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(' '));
    item.erase(item.find_last_not_of(' ') + 1);
    if (item.empty()) continue;
    if (item == "all") {
      for (const auto& e : suite_registry()) out.emplace_back(e.name);
      continue;
    }
    if (item == "gop") item = "dimension";
    const auto& reg = suite_registry();
    if (std::none_of(reg.begin(), reg.end(), [&](const SuiteEntry& e) { return item == e.name; })) {
      throw InputError("unknown suite '" + item + "'");
    }
    if (std::find(out.begin(), out.end(), item) == out.end()) out.push_back(item);
  }
  if (out.empty()) throw InputError("empty suite list");
  return out;
}

inline SuiteResult run_suite(const std::string& name, const HarnessOptions& opt) {
  const auto& reg = suite_registry();
  for (std::size_t idx = 0; idx < reg.size(); ++idx) {
    const auto& e = reg[idx];
    if (name != e.name) continue;
    const auto t0 = std::chrono::steady_clock::now();
    SuiteResult r;
    try {
      r = e.run(opt);
    } catch (const std::exception& ex) {
      r.name = name;
      r.criterion = static_cast<int>(idx + 1);
      r.error = ex.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
  }
  throw InputError("unknown suite '" + name + "'");
}

inline Json validation_report(const std::vector<SuiteResult>& results, const HarnessOptions& opt) {
  Json j;
  j["version"] = kVersion;
  j["seed"] = opt.seed;
  j["passed"] = std::all_of(results.begin(), results.end(), [](const SuiteResult& r) { return r.passed(); });
  Json s = Json::array();
  for (const auto& r : results) s.push_back(r.to_json());
  j["suites"] = s;
  return j;
}

}  // namespace imm
