#pragma once

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "imm/market.hpp"
#include "imm/portfolios.hpp"

namespace imm {

inline constexpr const char* kVersion = "0.1.0";

using Json = nlohmann::ordered_json;

// Thrown for unreadable or malformed input; the CLI maps it to exit code 1.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when output cannot be written; exit code 2.
struct OutputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- numbers

// Shortest representation that parses back to the same double.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw InputError("not a number: '" + std::string(s) + "'");
  }
  return v;
}

// ---------------------------------------------------------------- config

namespace detail {

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

inline Json square_root_json(double x0, double speed, double level, double vol, const char* x0_key) {
  return Json{{"model", "cir"}, {x0_key, x0}, {"speed", speed}, {"level", level}, {"vol", vol}};
}

inline ActivitySpec activity_from_json(const Json& j) {
  const std::string model = get_or<std::string>(j, "model", "constant");
  if (model == "constant") return ConstantActivity{j.at("a0").get<double>()};
  if (model == "cir") {
    return CirActivity{j.at("a0").get<double>(), j.at("speed").get<double>(),
                       j.at("level").get<double>(), j.at("vol").get<double>()};
  }
  throw InputError("unknown activity model '" + model + "'");
}

inline Json activity_to_json(const ActivitySpec& s) {
  if (const auto* c = std::get_if<ConstantActivity>(&s)) return Json{{"model", "constant"}, {"a0", c->a0}};
  const auto& c = std::get<CirActivity>(s);
  return square_root_json(c.a0, c.speed, c.level, c.vol, "a0");
}

}  // namespace detail

inline MarketConfig config_from_json(const Json& j) {
  try {
    MarketConfig cfg;
    cfg.n = j.at("n").get<std::size_t>();
    if (j.contains("risk_premium_factors")) {
      cfg.risk_premium_factors = j.at("risk_premium_factors").get<std::vector<double>>();
    } else {
      cfg.risk_premium_factors.assign(cfg.n, 1.0 / static_cast<double>(cfg.n));
    }
    const std::string mode = detail::get_or<std::string>(j, "mode", "info_minimizing");
    if (mode == "info_minimizing") {
      cfg.mode = Mode::info_minimizing;
    } else if (mode == "general_stationary") {
      cfg.mode = Mode::general_stationary;
    } else {
      throw InputError("unknown mode '" + mode + "'");
    }
    if (j.contains("volatility_function")) {
      cfg.volatility_function.coefficients =
          j.at("volatility_function").at("coefficients").get<std::vector<double>>();
    }
    if (j.contains("interest_rate")) {
      const auto& r = j.at("interest_rate");
      const std::string model = detail::get_or<std::string>(r, "model", "constant");
      if (model == "constant") {
        cfg.interest_rate = ConstantRate{r.at("r0").get<double>()};
      } else if (model == "mean_reverting") {
        cfg.interest_rate = MeanRevertingRate{r.at("r0").get<double>(), r.at("speed").get<double>(),
                                              r.at("level").get<double>(), r.at("vol").get<double>()};
      } else {
        throw InputError("unknown interest rate model '" + model + "'");
      }
    }
    if (j.contains("activity")) {
      const auto& a = j.at("activity");
      cfg.activity.shared_across_atoms = detail::get_or<bool>(a, "shared_across_atoms", true);
      cfg.activity.atoms.clear();
      if (a.contains("atoms")) {
        for (const auto& s : a.at("atoms")) cfg.activity.atoms.push_back(detail::activity_from_json(s));
      } else {
        cfg.activity.atoms.push_back(detail::activity_from_json(a));
      }
    }
    cfg.net_risk_adjusted_return = detail::get_or<double>(j, "net_risk_adjusted_return", 0.0);
    if (j.contains("initial_values")) {
      const auto& iv = j.at("initial_values");
      if (iv.is_string()) {
        if (iv.get<std::string>() != "sample_stationary") {
          throw InputError("initial_values must be an array or \"sample_stationary\"");
        }
        cfg.initial_values = SampleStationary{};
      } else {
        cfg.initial_values = iv.get<std::vector<double>>();
      }
    }
    cfg.horizon = j.at("horizon").get<double>();
    cfg.grid_step = j.at("grid_step").get<double>();
    cfg.paths = detail::get_or<std::size_t>(j, "paths", 1);
    cfg.seed = detail::get_or<std::uint64_t>(j, "seed", 0);
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed config: ") + e.what());
  }
}

inline Json config_to_json(const MarketConfig& cfg) {
  Json j;
  j["n"] = cfg.n;
  j["risk_premium_factors"] = cfg.risk_premium_factors;
  j["mode"] = cfg.mode == Mode::info_minimizing ? "info_minimizing" : "general_stationary";
  j["volatility_function"] = Json{{"coefficients", cfg.volatility_function.coefficients}};
  if (const auto* c = std::get_if<ConstantRate>(&cfg.interest_rate)) {
    j["interest_rate"] = Json{{"model", "constant"}, {"r0", c->r0}};
  } else {
    const auto& m = std::get<MeanRevertingRate>(cfg.interest_rate);
    auto r = detail::square_root_json(m.r0, m.speed, m.level, m.vol, "r0");
    r["model"] = "mean_reverting";
    j["interest_rate"] = r;
  }
  Json act;
  act["shared_across_atoms"] = cfg.activity.shared_across_atoms;
  act["atoms"] = Json::array();
  for (const auto& s : cfg.activity.atoms) act["atoms"].push_back(detail::activity_to_json(s));
  j["activity"] = act;
  j["net_risk_adjusted_return"] = cfg.net_risk_adjusted_return;
  if (const auto* v = std::get_if<std::vector<double>>(&cfg.initial_values)) {
    j["initial_values"] = *v;
  } else {
    j["initial_values"] = "sample_stationary";
  }
  j["horizon"] = cfg.horizon;
  j["grid_step"] = cfg.grid_step;
  j["paths"] = cfg.paths;
  j["seed"] = cfg.seed;
  return j;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline MarketConfig load_config(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("cannot parse config '" + path.string() + "': " + e.what());
  }
  return config_from_json(j);
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw OutputError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw OutputError("write failed for '" + path.string() + "'");
}

inline void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw OutputError("cannot create output directory '" + dir.string() + "'");
  }
}

// ---------------------------------------------------------------- CSV

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

inline void write_csv_row(std::ostream& out, const std::vector<double>& row) {
  for (std::size_t c = 0; c < row.size(); ++c) {
    if (c) out << ',';
    out << format_double(row[c]);
  }
  out << '\n';
}

inline void write_csv_header(std::ostream& out, const std::vector<std::string>& header) {
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c) out << ',';
    out << header[c];
  }
  out << '\n';
}

inline void write_csv(std::ostream& out, const Table& t) {
  write_csv_header(out, t.header);
  for (const auto& r : t.rows) write_csv_row(out, r);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline Table read_csv(std::istream& in) {
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty table");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  t.header = split_csv_line(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != t.header.size()) {
      throw InputError("line " + std::to_string(lineno) + ": expected " +
                       std::to_string(t.header.size()) + " columns");
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_double(c));
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline Table read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read '" + path.string() + "'");
  return read_csv(in);
}

// One value per line; a non-numeric first line is taken as a header. If the
// file has several columns the last one is used.
inline std::vector<double> read_returns(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read '" + path.string() + "'");
  std::vector<double> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    try {
      out.push_back(parse_double(cells.back()));
    } catch (const InputError&) {
      if (lineno == 1) continue;
      throw InputError("returns file line " + std::to_string(lineno) + ": not a number");
    }
    if (!std::isfinite(out.back())) {
      throw InputError("returns file line " + std::to_string(lineno) + ": non-finite value");
    }
  }
  if (out.empty()) throw InputError("returns file '" + path.string() + "' has no data");
  return out;
}

// ---------------------------------------------------------------- trajectories

inline std::vector<std::string> atom_columns(std::size_t n) {
  std::vector<std::string> h{"path", "t"};
  for (const char* sym : {"Y^", "A^", "beta^"}) {
    for (std::size_t k = 1; k <= n; ++k) h.push_back(sym + std::to_string(k));
  }
  return h;
}

inline std::vector<std::string> portfolio_columns() {
  return {"path", "t", "S_AP", "S_MVP", "S_star", "S_star_star", "Y_star", "Z_t", "sigma2_MVP", "sigma2_star"};
}

inline std::vector<std::string> activity_columns() {
  return {"path", "t", "r_t", "a_t", "lambda_star", "A^0", "B"};
}

inline std::vector<std::string> clock_columns(std::size_t n) {
  std::vector<std::string> h{"path", "t"};
  for (std::size_t k = 1; k <= n; ++k) h.push_back("tau^" + std::to_string(k));
  h.emplace_back("tau_star");
  return h;
}

// Appends the rows of one path to the four trajectory tables.
struct TrajectoryWriter {
  std::ostream& atoms;
  std::ostream& portfolios;
  std::ostream& activities;
  std::ostream& clocks;

  void header(std::size_t n) {
    write_csv_header(atoms, atom_columns(n));
    write_csv_header(portfolios, portfolio_columns());
    write_csv_header(activities, activity_columns());
    write_csv_header(clocks, clock_columns(n));
  }

  void path(const MarketConfig& cfg, const MarketPath& p, std::size_t index) {
    const std::size_t n = p.atoms();
    const PortfolioPath ap = portfolio_path(ApRule{}, cfg, p);
    const PortfolioPath mvp = portfolio_path(MvpRule{}, cfg, p);
    const PortfolioPath ext = portfolio_path(ExtendedGopRule{}, cfg, p);
    const AtomGopPath gop = atom_gop_path(cfg, p);
    std::vector<double> row;
    for (std::size_t i = 0; i < p.points(); ++i) {
      const double t = static_cast<double>(i) * cfg.grid_step;
      const double pi = static_cast<double>(index);
      row.assign({pi, t});
      for (std::size_t k = 0; k < n; ++k) row.push_back(p.normalized[k][i]);
      for (std::size_t k = 0; k < n; ++k) row.push_back(p.atom_value(k, i));
      for (std::size_t k = 0; k < n; ++k) row.push_back(p.volatility[k][i]);
      write_csv_row(atoms, row);

      row.assign({pi, t, ap.value(i), mvp.value(i), gop.portfolio.value(i), ext.value(i),
                  gop.normalized[i], gop.variance_factor[i], mvp.squared_volatility[i],
                  gop.portfolio.squared_volatility[i]});
      write_csv_row(portfolios, row);

      row.assign({pi, t, p.rate[i], p.activity[i], p.risk_adjusted_return[i], p.savings(i), p.basis(i)});
      write_csv_row(activities, row);

      row.assign({pi, t});
      for (std::size_t k = 0; k < n; ++k) row.push_back(p.clock[k][i]);
      row.push_back(gop.clock[i]);
      write_csv_row(clocks, row);
    }
  }
};

// ---------------------------------------------------------------- manifest

inline std::string utc_timestamp(std::chrono::system_clock::time_point tp) {
  const std::time_t t = std::chrono::system_clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

struct RunManifest {
  MarketConfig config;
  std::string version = kVersion;
  std::string command;
  std::string started;
  std::string finished;
  std::vector<std::string> outputs;
  std::vector<std::string> warnings;

  Json to_json() const {
    Json j;
    j["version"] = version;
    j["command"] = command;
    j["seed"] = config.seed;
    j["started"] = started;
    j["finished"] = finished;
    j["config"] = config_to_json(config);
    j["outputs"] = outputs;
    j["warnings"] = warnings;
    return j;
  }

  static RunManifest from_json(const Json& j) {
    RunManifest m;
    m.version = j.at("version").get<std::string>();
    m.command = j.value("command", "");
    m.started = j.value("started", "");
    m.finished = j.value("finished", "");
    m.config = config_from_json(j.at("config"));
    m.outputs = j.value("outputs", std::vector<std::string>{});
    m.warnings = j.value("warnings", std::vector<std::string>{});
    return m;
  }
};

}  // namespace imm
