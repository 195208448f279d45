#pragma once

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "imm/harness.hpp"
#include "imm/information.hpp"
#include "imm/io.hpp"
#include "imm/stats.hpp"

namespace imm::cli {

enum ExitCode : int { kOk = 0, kInvalidInput = 1, kIoFailure = 2, kTestFailure = 3 };

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
  std::optional<double> dt;
  std::optional<double> horizon;

  void apply(MarketConfig& cfg) const {
    if (seed) cfg.seed = *seed;
    if (paths) cfg.paths = *paths;
    if (dt) cfg.grid_step = *dt;
    if (horizon) cfg.horizon = *horizon;
  }
};

namespace detail {

inline MarketConfig load_checked(const std::string& path, const Overrides& o) {
  if (path.empty()) throw InputError("--config is required");
  MarketConfig cfg = load_config(path);
  o.apply(cfg);
  const auto report = validate_config(cfg);
  if (!report.ok()) {
    std::string msg = "invalid config '" + path + "':";
    for (const auto& v : report.violations) msg += "\n  " + v;
    throw InputError(msg);
  }
  return cfg;
}

// Runs fn, mapping exceptions to exit codes.
template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const OutputError& e) {
    err << "error: " << e.what() << '\n';
    return kIoFailure;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  }
}

inline Json kl_json(const KlEstimate& k) {
  Json j{{"estimate", k.estimate}, {"standard_error", k.standard_error}, {"samples", k.samples}};
  j["flag"] = k.flag;
  if (k.heavy_tailed) j["truncation_quantile"] = k.truncation_quantile;
  return j;
}

}  // namespace detail

inline Json info_json(const InfoReport& r) {
  Json j;
  j["self_information"] = r.self_information;
  j["total_self_information"] = r.total_self_information;
  j["log_means"] = r.log_means;
  j["mean_activity"] = r.mean_activity;
  j["lambda_hat"] = r.lambda_hat;
  if (r.kl_closed_form) {
    j["kl"] = Json{{"value", *r.kl_closed_form}, {"method", "closed_form"}, {"flag", ""}};
  } else {
    j["kl"] = Json{{"value", r.kl_monte_carlo.estimate}, {"method", "monte_carlo"},
                   {"flag", r.kl_monte_carlo.flag}};
  }
  j["kl_monte_carlo"] = detail::kl_json(r.kl_monte_carlo);
  Json ob;
  if (r.omega_bar.exact) ob["exact"] = *r.omega_bar.exact;
  ob["median"] = r.omega_bar.median;
  ob["truncated_mean"] = r.omega_bar.truncated_mean;
  ob["truncation_quantile"] = r.omega_bar.truncation_quantile;
  if (!r.omega_bar.exact) ob["flag"] = "truncated";
  j["omega_bar"] = ob;
  return j;
}

inline int simulate(const std::string& config_path, const std::string& out_dir, const Overrides& o,
                    std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const MarketConfig cfg = detail::load_checked(config_path, o);
    const std::filesystem::path dir(out_dir.empty() ? "." : out_dir);
    ensure_directory(dir);
    RunManifest m;
    m.config = cfg;
    m.command = "simulate";
    m.started = utc_timestamp(std::chrono::system_clock::now());
    m.warnings = grid_warnings(cfg);
    for (const auto& w : m.warnings) err << "warning: " << w << '\n';

    const std::vector<std::string> names{"atoms.csv", "portfolios.csv", "activities.csv", "clocks.csv"};
    std::vector<std::ofstream> files;
    for (const auto& n : names) {
      files.emplace_back(dir / n, std::ios::binary | std::ios::trunc);
      if (!files.back()) throw OutputError("cannot write '" + (dir / n).string() + "'");
    }
    TrajectoryWriter w{files[0], files[1], files[2], files[3]};
    write_trajectories(cfg, w);
    for (std::size_t i = 0; i < files.size(); ++i) {
      files[i].close();
      if (!files[i]) throw OutputError("write failed for '" + (dir / names[i]).string() + "'");
    }
    m.outputs = names;
    m.finished = utc_timestamp(std::chrono::system_clock::now());
    write_text_file(dir / "manifest.json", m.to_json().dump(2) + "\n");
    out << "wrote " << cfg.paths << " paths to " << dir.string() << '\n';
    return int{kOk};
  });
}

inline int validate(const std::string& config_path, const std::string& out_dir, const std::string& suites,
                    const Overrides& o, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    HarnessOptions opt;
    if (!config_path.empty()) opt.seed = detail::load_checked(config_path, o).seed;
    if (o.seed) opt.seed = *o.seed;
    const auto names = parse_suite_list(suites.empty() ? "all" : suites);
    std::vector<SuiteResult> results;
    for (const auto& n : names) {
      results.push_back(run_suite(n, opt));
      const auto& r = results.back();
      out << (r.passed() ? "PASS " : "FAIL ") << r.name;
      if (!r.passed()) out << ": " << r.first_failure();
      out << '\n';
    }
    const Json report = validation_report(results, opt);
    const std::filesystem::path dir(out_dir.empty() ? "." : out_dir);
    ensure_directory(dir);
    write_text_file(dir / "validation_report.json", report.dump(2) + "\n");
    return report["passed"].get<bool>() ? int{kOk} : int{kTestFailure};
  });
}

inline int info(const std::string& config_path, const std::string& out_dir, const Overrides& o,
                std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const MarketConfig cfg = detail::load_checked(config_path, o);
    const auto paths = simulate_market(cfg).paths;
    const Json j = info_json(info_report(cfg, paths));
    out << j.dump(2) << '\n';
    if (!out_dir.empty()) {
      ensure_directory(out_dir);
      write_text_file(std::filesystem::path(out_dir) / "info_report.json", j.dump(2) + "\n");
    }
    return int{kOk};
  });
}

// Fits a Student-t law to log-returns from a file, or to AP log-returns
// simulated from a config (horizon = grid step).
inline int fit(const std::string& returns_path, const std::string& config_path, double horizon,
               const std::string& out_dir, const Overrides& o, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    std::vector<double> x;
    if (!returns_path.empty()) {
      x = read_returns(returns_path);
    } else {
      const MarketConfig cfg = detail::load_checked(config_path, o);
      x = ap_log_returns(cfg);
      horizon = cfg.grid_step;
    }
    if (x.size() < kStudentTMinObservations) {
      throw InputError("need at least " + std::to_string(kStudentTMinObservations) + " returns, got " +
                       std::to_string(x.size()));
    }
    const auto f = student_t_fit(x, horizon);
    const Json j{{"df", f.df}, {"df_se", f.df_se}, {"location", f.location}, {"location_se", f.location_se},
                 {"scale", f.scale}, {"scale_se", f.scale_se}, {"log_likelihood", f.log_likelihood},
                 {"observations", f.observations}, {"horizon", f.horizon}, {"converged", f.converged},
                 {"at_boundary", f.at_boundary}};
    out << "df = " << format_double(f.df) << " (se " << format_double(f.df_se) << ")\n";
    if (!out_dir.empty()) {
      ensure_directory(out_dir);
      write_text_file(std::filesystem::path(out_dir) / "fit.json", j.dump(2) + "\n");
    }
    return int{kOk};
  });
}

}  // namespace imm::cli
