#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sslb/analytic.hpp"
#include "sslb/cache.hpp"
#include "sslb/decomposition.hpp"
#include "sslb/errors.hpp"
#include "sslb/prime_table.hpp"
#include "sslb/semiprime.hpp"
#include "sslb/version.hpp"

namespace sslb {

using json = nlohmann::json;

// Multiplicative sweep: start, start*step, ... up to stop.
struct SweepSpec {
  double start = 0, stop = 0, step = 0;
  bool active() const { return step != 0; }
  std::vector<double> values() const {
    if (!(start > 0 && step > 1.0 && stop >= start))
      throw DomainError("sweep: need start > 0, stop >= start, step > 1");
    std::vector<double> out;
    for (double v = start; v <= stop * (1.0 + 1e-12); v *= step) out.push_back(v);
    return out;
  }
};

struct ExperimentConfig {
  std::string command;
  DecompositionParams params;
  std::vector<std::uint64_t> x_list;  // verify / theta-scan
  double X = 0;                       // lemma21 window base
  SweepSpec X_sweep;
  double y = 0;  // lemma22 interval length
  SweepSpec x_sweep, y_sweep;
  double Q = 0;  // bv / mertens
  SweepSpec Q_sweep;
  bool bv_prime_only = false;
  double assert_max = 0;      // lemma21: 0 disables
  bool lemma22_assert = true; // factor-2 slack check
  std::uint64_t cache_limit = 0;  // sieve-cache
  std::uint64_t limit_override = 0;
  std::string cache_path;
  unsigned workers = 1;
  std::string format = "json";
  std::string out_path;
  std::string plot_path;
  std::uint64_t seed = 0;

  void validate_common() const {
    if (workers < 1) throw DomainError("config: workers must be >= 1");
    if (format != "json" && format != "csv")
      throw DomainError("config: format must be json or csv");
  }
};

namespace detail {

inline std::string format_g15(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.15g", v);
  return buf;
}

inline json finite_or_string(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

inline void write_text_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw ResourceError("cannot open " + tmp + " for writing");
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!os) throw ResourceError("write failed for " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw ResourceError("cannot move " + tmp + " to " + path);
  }
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline void flatten_csv(const json& node, const std::string& prefix, std::string& out) {
  if (node.is_object()) {
    for (auto it = node.begin(); it != node.end(); ++it)
      flatten_csv(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
  } else if (node.is_array()) {
    std::size_t idx = 0;
    for (const auto& v : node) flatten_csv(v, prefix + "." + std::to_string(idx++), out);
  } else {
    out += csv_escape(prefix);
    out += ',';
    if (node.is_number_float())
      out += format_g15(node.get<double>());
    else if (node.is_string())
      out += csv_escape(node.get<std::string>());
    else
      out += node.dump();
    out += '\n';
  }
}

}  // namespace detail

// Report documents: one top-level JSON object, snake_case keys, manifest
// under "manifest". CSV output is the same document flattened to
// dotted-key,value rows with 15 significant digits.
inline void emit_report(const json& doc, const ExperimentConfig& cfg) {
  std::string text;
  if (cfg.format == "json") {
    text = doc.dump(2);
    text += '\n';
  } else {
    text = "key,value\n";
    detail::flatten_csv(doc, "", text);
  }
  if (cfg.out_path.empty())
    std::cout << text;
  else
    detail::write_text_atomic(cfg.out_path, text);
}

// Two-column whitespace-separated data file, one (parameter, value) row each.
inline void emit_plot(const std::vector<std::pair<double, double>>& rows,
                      const ExperimentConfig& cfg) {
  if (cfg.plot_path.empty()) return;
  std::string text;
  for (const auto& [p, v] : rows) {
    text += detail::format_g15(p);
    text += ' ';
    text += detail::format_g15(v);
    text += '\n';
  }
  detail::write_text_atomic(cfg.plot_path, text);
}

struct TableHandle {
  PrimeTable table;
  std::uint64_t limit = 0;
  bool cache_hit = false;
};

// The sieve is sized to cover every n + a the run can touch; an explicit
// limit override below that is a configuration error.
inline TableHandle acquire_table(const ExperimentConfig& cfg, std::uint64_t needed) {
  std::uint64_t limit = std::max<std::uint64_t>(needed, 4);
  if (cfg.limit_override) {
    if (cfg.limit_override < needed)
      throw DomainError("config: --limit " + std::to_string(cfg.limit_override) +
                        " is below the required " + std::to_string(needed));
    limit = cfg.limit_override;
  }
  PrimeTable::SieveOptions opt;
  opt.workers = cfg.workers;

  std::string path = cfg.cache_path;
  if (path.empty()) {
    if (const char* dir = std::getenv("SSLB_CACHE_DIR"); dir && *dir)
      path = std::string(dir) + "/sslb_spf_" + std::to_string(limit) + ".cache";
  }
  TableHandle th;
  th.limit = limit;
  if (path.empty())
    th.table = PrimeTable::sieve(limit, opt);
  else
    th.table = cached_sieve(path, limit, opt, &th.cache_hit);
  return th;
}

inline json config_to_json(const ExperimentConfig& cfg) {
  auto sweep_json = [](const SweepSpec& s) -> json {
    if (!s.active()) return nullptr;
    return json{{"start", s.start}, {"stop", s.stop}, {"step", s.step}};
  };
  return json{
      {"command", cfg.command},
      {"x", cfg.params.x},
      {"a", cfg.params.a},
      {"theta", cfg.params.theta},
      {"epsilon", cfg.params.epsilon},
      {"bv_exponent", cfg.params.bv_exponent},
      {"bv_exponent_c2", cfg.params.bv_exponent_c2},
      {"r", cfg.params.r},
      {"q_override", cfg.params.q_override ? json(*cfg.params.q_override) : json(nullptr)},
      {"allow_exploratory", cfg.params.allow_exploratory},
      {"x_list", cfg.x_list},
      {"x_window", cfg.X},
      {"x_window_sweep", sweep_json(cfg.X_sweep)},
      {"y", cfg.y},
      {"x_sweep", sweep_json(cfg.x_sweep)},
      {"y_sweep", sweep_json(cfg.y_sweep)},
      {"q_max", cfg.Q},
      {"q_sweep", sweep_json(cfg.Q_sweep)},
      {"prime_moduli_only", cfg.bv_prime_only},
      {"assert_max", cfg.assert_max},
      {"lemma22_assert", cfg.lemma22_assert},
      {"cache_build_limit", cfg.cache_limit},
      {"limit_override", cfg.limit_override},
      {"cache_path", cfg.cache_path},
      {"workers", cfg.workers},
      {"format", cfg.format},
      {"out", cfg.out_path},
      {"plot", cfg.plot_path},
      {"seed", cfg.seed},
  };
}

inline json make_manifest(const ExperimentConfig& cfg, const TableHandle& th,
                          double seconds) {
  return json{{"tool_version", kVersion},
              {"config", config_to_json(cfg)},
              {"duration_seconds", seconds},
              {"table_limit", th.limit},
              {"cache_hit", th.cache_hit}};
}

inline json report_to_json(const DecompositionReport& rep) {
  const auto& p = rep.params;
  json params{{"x", p.x},
              {"a", p.a},
              {"theta", p.theta},
              {"epsilon", p.epsilon},
              {"bv_exponent", p.bv_exponent},
              {"bv_exponent_c2", p.bv_exponent_c2},
              {"r", p.r},
              {"q_override", p.q_override ? json(*p.q_override) : json(nullptr)},
              {"allow_exploratory", p.allow_exploratory}};
  json buckets;
  static const char* keys[kNumBuckets] = {"a", "b", "c1", "c2", "c3", "c4", "c5", "residual"};
  for (int k = 0; k < kNumBuckets; ++k)
    buckets[keys[k]] = json{{"sum", rep.sums[k]}, {"count", rep.counts[k]}};
  json ratios;
  for (const auto& [name, v] : rep.ratios) ratios[name] = detail::finite_or_string(v);
  return json{{"params", params},
              {"log_r", rep.logR},
              {"buckets", buckets},
              {"c2_split", json{{"bv_sum", rep.c2_bv},
                                {"bv_count", rep.c2_bv_count},
                                {"bt_sum", rep.c2_bt},
                                {"bt_count", rep.c2_bt_count}}},
              {"q_used", rep.Q_used},
              {"q_floor", rep.Q_floor},
              {"max_pplus", rep.max_pplus},
              {"theta_star", rep.theta_star},
              {"semiprime_count", rep.semiprime_count},
              {"skipped_terms", rep.skipped_terms},
              {"incidence_count", rep.incidence_count},
              {"empty_range", rep.empty_range},
              {"asymptotic_ratios", ratios}};
}

namespace detail {

class Stopwatch {
 public:
  Stopwatch() : t0_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_;
};

inline std::uint64_t abs64(std::int64_t a) {
  return a == std::numeric_limits<std::int64_t>::min()
             ? static_cast<std::uint64_t>(a) // two's complement magnitude
             : static_cast<std::uint64_t>(a < 0 ? -a : a);
}

}  // namespace detail

inline int cmd_decompose(const ExperimentConfig& cfg) {
  cfg.validate_common();
  cfg.params.validate();
  detail::Stopwatch sw;
  auto th = acquire_table(cfg, cfg.params.x + detail::abs64(cfg.params.a));
  auto rep = classify_incidences(cfg.params, th.table, cfg.workers);
  json doc = report_to_json(rep);
  doc["manifest"] = make_manifest(cfg, th, sw.seconds());
  emit_report(doc, cfg);
  return 0;
}

inline int cmd_verify_theorem(const ExperimentConfig& cfg) {
  cfg.validate_common();
  if (cfg.x_list.empty()) throw DomainError("verify: at least one --x is required");
  if (!(cfg.params.theta > 0.0 && cfg.params.theta < 1.0))
    throw DomainError("verify: theta must lie in (0, 1)");
  detail::Stopwatch sw;
  std::uint64_t max_x = *std::max_element(cfg.x_list.begin(), cfg.x_list.end());
  auto th = acquire_table(cfg, max_x + detail::abs64(cfg.params.a));
  auto rows = theta_scan(cfg.x_list, cfg.params.a, cfg.params.theta, th.table, cfg.workers);
  bool all_pass = true;
  json jrows = json::array();
  for (const auto& r : rows) {
    all_pass = all_pass && r.pass;
    jrows.push_back(json{{"x", r.x},
                         {"max_pplus", r.max_pplus},
                         {"theta_star", r.theta_star},
                         {"pass", r.pass}});
  }
  json doc{{"a", cfg.params.a},
           {"theta", cfg.params.theta},
           {"rows", jrows},
           {"all_pass", all_pass}};
  doc["manifest"] = make_manifest(cfg, th, sw.seconds());
  emit_report(doc, cfg);
  return all_pass ? 0 : 4;
}

inline int cmd_theta_scan(const ExperimentConfig& cfg) {
  cfg.validate_common();
  if (cfg.x_list.empty()) throw DomainError("theta-scan: at least one --x is required");
  detail::Stopwatch sw;
  std::uint64_t max_x = *std::max_element(cfg.x_list.begin(), cfg.x_list.end());
  auto th = acquire_table(cfg, max_x + detail::abs64(cfg.params.a));
  auto rows = theta_scan(cfg.x_list, cfg.params.a, cfg.params.theta, th.table, cfg.workers);
  json jrows = json::array();
  std::vector<std::pair<double, double>> plot;
  for (const auto& r : rows) {
    jrows.push_back(
        json{{"x", r.x}, {"max_pplus", r.max_pplus}, {"theta_star", r.theta_star}});
    plot.emplace_back(static_cast<double>(r.x), r.theta_star);
  }
  json doc{{"a", cfg.params.a}, {"rows", jrows}};
  doc["manifest"] = make_manifest(cfg, th, sw.seconds());
  emit_report(doc, cfg);
  emit_plot(plot, cfg);
  return 0;
}

inline int cmd_lemma21(const ExperimentConfig& cfg) {
  cfg.validate_common();
  if (cfg.params.x < 4) throw DomainError("lemma21: --x must be >= 4");
  std::vector<double> Xs = cfg.X_sweep.active() ? cfg.X_sweep.values()
                                                : std::vector<double>{cfg.X};
  if (Xs.empty() || Xs[0] <= 0) throw DomainError("lemma21: --X must be positive");
  detail::Stopwatch sw;
  auto th = acquire_table(cfg, cfg.params.x + detail::abs64(cfg.params.a));
  json jrows = json::array();
  std::vector<std::pair<double, double>> plot;
  bool violated = false;
  for (double X : Xs) {
    auto rep = hooley_V(static_cast<double>(cfg.params.x), X, cfg.params.r, cfg.params.a,
                        th.table);
    jrows.push_back(json{{"x_window", rep.X},
                         {"value", rep.value},
                         {"bound_ratio", rep.bound_ratio},
                         {"out_of_window", rep.out_of_window}});
    plot.emplace_back(X, rep.bound_ratio);
    if (cfg.assert_max > 0 && rep.bound_ratio >= cfg.assert_max) violated = true;
  }
  json doc{{"x", cfg.params.x}, {"a", cfg.params.a}, {"r", cfg.params.r}, {"rows", jrows}};
  doc["manifest"] = make_manifest(cfg, th, sw.seconds());
  emit_report(doc, cfg);
  emit_plot(plot, cfg);
  return violated ? 4 : 0;
}

inline int cmd_lemma22(const ExperimentConfig& cfg) {
  cfg.validate_common();
  std::vector<double> xs = cfg.x_sweep.active()
                               ? cfg.x_sweep.values()
                               : std::vector<double>{static_cast<double>(cfg.params.x)};
  std::vector<double> ys = cfg.y_sweep.active() ? cfg.y_sweep.values()
                                                : std::vector<double>{cfg.y};
  if (ys.empty() || ys[0] < 3) throw DomainError("lemma22: --y must be >= 3");
  detail::Stopwatch sw;
  double max_x = *std::max_element(xs.begin(), xs.end());
  double max_y = *std::max_element(ys.begin(), ys.end());
  auto th = acquire_table(cfg, static_cast<std::uint64_t>(max_x + max_y) + 1);
  json jrows = json::array();
  std::vector<std::pair<double, double>> plot;
  bool violated = false;
  bool param_is_y = cfg.y_sweep.active() && !cfg.x_sweep.active();
  for (double x : xs) {
    for (double y : ys) {
      auto rep = count_semiprimes_interval(x, y, th.table);
      jrows.push_back(json{{"x", rep.x},
                           {"y", rep.y},
                           {"count", rep.count},
                           {"hensley_bound", rep.hensley_bound},
                           {"ratio", rep.ratio}});
      plot.emplace_back(param_is_y ? y : x, rep.ratio);
      if (cfg.lemma22_assert && !(rep.ratio < 2.0)) violated = true;
    }
  }
  json doc{{"rows", jrows}};
  doc["manifest"] = make_manifest(cfg, th, sw.seconds());
  emit_report(doc, cfg);
  emit_plot(plot, cfg);
  return violated ? 4 : 0;
}

inline int cmd_bv(const ExperimentConfig& cfg) {
  cfg.validate_common();
  if (cfg.params.x < 4) throw DomainError("bv: --x must be >= 4");
  std::vector<double> Qs = cfg.Q_sweep.active() ? cfg.Q_sweep.values()
                                                : std::vector<double>{cfg.Q};
  if (Qs.empty() || Qs[0] <= 0) throw DomainError("bv: --Q must be positive");
  detail::Stopwatch sw;
  auto th = acquire_table(cfg, cfg.params.x);
  double x = static_cast<double>(cfg.params.x);
  double norm = std::pow(std::log(x), cfg.params.bv_exponent) / x;
  json jrows = json::array();
  std::vector<std::pair<double, double>> plot;
  for (double Q : Qs) {
    double d = bv_discrepancy(x, Q, th.table, cfg.bv_prime_only);
    jrows.push_back(json{{"q_max", Q}, {"discrepancy", d}, {"normalized", d * norm}});
    plot.emplace_back(Q, d * norm);
  }
  json doc{{"x", cfg.params.x},
           {"bv_exponent", cfg.params.bv_exponent},
           {"prime_moduli_only", cfg.bv_prime_only},
           {"rows", jrows}};
  doc["manifest"] = make_manifest(cfg, th, sw.seconds());
  emit_report(doc, cfg);
  emit_plot(plot, cfg);
  return 0;
}

inline int cmd_mertens(const ExperimentConfig& cfg) {
  cfg.validate_common();
  std::vector<double> Qs = cfg.Q_sweep.active() ? cfg.Q_sweep.values()
                                                : std::vector<double>{cfg.Q};
  if (Qs.empty() || Qs[0] <= 0) throw DomainError("mertens: --Q must be positive");
  detail::Stopwatch sw;
  double max_Q = *std::max_element(Qs.begin(), Qs.end());
  auto th = acquire_table(cfg, static_cast<std::uint64_t>(max_Q));
  json jrows = json::array();
  std::vector<std::pair<double, double>> plot;
  for (double Q : Qs) {
    double v = mertens_weighted_sum(Q, th.table);
    double dev = v - std::log(Q);
    jrows.push_back(json{{"q_max", Q}, {"value", v}, {"deviation", dev}});
    plot.emplace_back(Q, dev);
  }
  json doc{{"rows", jrows}};
  doc["manifest"] = make_manifest(cfg, th, sw.seconds());
  emit_report(doc, cfg);
  emit_plot(plot, cfg);
  return 0;
}

inline int cmd_sieve_cache(const ExperimentConfig& cfg) {
  cfg.validate_common();
  if (cfg.cache_limit < 2) throw DomainError("sieve-cache: --limit must be >= 2");
  std::string path = cfg.cache_path;
  if (path.empty()) {
    if (const char* dir = std::getenv("SSLB_CACHE_DIR"); dir && *dir)
      path = std::string(dir) + "/sslb_spf_" + std::to_string(cfg.cache_limit) + ".cache";
  }
  if (path.empty())
    throw DomainError("sieve-cache: --cache PATH or SSLB_CACHE_DIR is required");
  detail::Stopwatch sw;
  PrimeTable::SieveOptions opt;
  opt.workers = cfg.workers;
  PrimeTable table = PrimeTable::sieve(cfg.cache_limit, opt);
  write_sieve_cache(path, table);
  auto back = try_read_sieve_cache(path, cfg.cache_limit);
  if (!back || back->spf_table() != table.spf_table())
    throw ResourceError("sieve-cache: readback verification failed for " + path);
  TableHandle th{std::move(table), cfg.cache_limit, false};
  json doc{{"limit", cfg.cache_limit},
           {"prime_count", th.table.primes().size()},
           {"path", path},
           {"bytes", std::filesystem::file_size(path)}};
  doc["manifest"] = make_manifest(cfg, th, sw.seconds());
  emit_report(doc, cfg);
  return 0;
}

}  // namespace sslb
