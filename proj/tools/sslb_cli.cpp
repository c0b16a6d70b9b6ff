// Command-line front end. Exit codes: 0 ok, 1 config error, 2 resource
// error, 3 internal invariant violation, 4 check failure.

#include <cstdio>
#include <exception>
#include <new>
#include <string>

#include <CLI11.hpp>

#include "sslb/sslb.hpp"

namespace {

void add_common_flags(CLI::App* cmd, sslb::ExperimentConfig& cfg) {
  cmd->add_option("--format", cfg.format, "Output format: json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--out", cfg.out_path, "Write the report to PATH (atomic)");
  cmd->add_option("--workers", cfg.workers, "Worker thread count")->check(CLI::PositiveNumber);
  cmd->add_option("--cache", cfg.cache_path,
                  "Sieve cache file (default: derived from SSLB_CACHE_DIR)");
  cmd->add_option("--limit", cfg.limit_override,
                  "Sieve limit override (must cover x + |a|)");
  cmd->add_option("--seed", cfg.seed, "Random seed for sampled cross-checks");
}

void add_plot_flag(CLI::App* cmd, sslb::ExperimentConfig& cfg) {
  cmd->add_option("--plot", cfg.plot_path,
                  "Write two-column (parameter, ratio) plot data to PATH");
}

void add_sweep_flags(CLI::App* cmd, const std::string& name, sslb::SweepSpec& sweep,
                     const std::string& what) {
  cmd->add_option("--" + name + "-sweep", [&sweep](const CLI::results_t& res) {
        sweep.start = std::stod(res.at(0));
        sweep.stop = std::stod(res.at(1));
        sweep.step = std::stod(res.at(2));
        return true;
      },
      "Sweep " + what + " as START STOP MULT-STEP")
      ->expected(3);
}

int dispatch(int argc, char** argv) {
  sslb::ExperimentConfig cfg;
  CLI::App app{"Empirical decomposition of the largest-prime-factor bound for shifted semiprimes"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(sslb::kVersion));

  auto* dec = app.add_subcommand("decompose",
                                 "Exact bucket decomposition of log R at one x");
  dec->add_option("--x", cfg.params.x, "Upper limit for semiprimes")->required();
  dec->add_option("--a", cfg.params.a, "Shift a (nonzero)");
  dec->add_option("--theta", cfg.params.theta, "Exponent theta");
  dec->add_option("--epsilon", cfg.params.epsilon, "Epsilon in (0, 0.01]");
  dec->add_option("--bv-exponent", cfg.params.bv_exponent, "B in Q = x^{1/4}(log x)^{-B}");
  dec->add_option("--bv-exponent-c2", cfg.params.bv_exponent_c2,
                  "B in Q1 = sqrt(x/p1)(log(x/p1))^{-B}");
  dec->add_option("--r", cfg.params.r, "Subdivision ratio (reporting only)");
  double qov = 0;
  auto* qov_opt = dec->add_option("--q-override", qov, "Replace the computed Q");
  dec->add_flag("--allow-exploratory", cfg.params.allow_exploratory,
                "Permit theta outside (0.6, 0.625)");
  add_common_flags(dec, cfg);

  auto* ver = app.add_subcommand("verify", "Check max P+(n+a) > x^theta per x");
  ver->add_option("--x", cfg.x_list, "Semiprime limits (repeatable)");
  ver->add_option("--a", cfg.params.a, "Shift a (nonzero)");
  ver->add_option("--theta", cfg.params.theta, "Exponent theta in (0, 1)");
  add_common_flags(ver, cfg);

  auto* scan = app.add_subcommand("theta-scan", "Report theta_star = log(max P+)/log x per x");
  scan->add_option("--x", cfg.x_list, "Semiprime limits (repeatable)");
  scan->add_option("--a", cfg.params.a, "Shift a (nonzero)");
  add_common_flags(scan, cfg);
  add_plot_flag(scan, cfg);

  auto* l21 = app.add_subcommand("lemma21", "V(X) window sum and its bound ratio");
  l21->add_option("--x", cfg.params.x, "Prime-count limit x")->required();
  l21->add_option("--X", cfg.X, "Window base X of (X, rX]");
  add_sweep_flags(l21, "X", cfg.X_sweep, "the window base X");
  l21->add_option("--r", cfg.params.r, "Window ratio r in (1, 2)");
  l21->add_option("--a", cfg.params.a, "Residue shift a (nonzero)");
  l21->add_option("--assert-max", cfg.assert_max,
                  "Exit 4 if any bound_ratio reaches this value (0 disables)");
  add_common_flags(l21, cfg);
  add_plot_flag(l21, cfg);

  auto* l22 = app.add_subcommand("lemma22", "Short-interval semiprime count vs the 2y log log y / log y majorant");
  l22->add_option("--x", cfg.params.x, "Interval start");
  add_sweep_flags(l22, "x", cfg.x_sweep, "the interval start x");
  l22->add_option("--y", cfg.y, "Interval length (>= 3)");
  add_sweep_flags(l22, "y", cfg.y_sweep, "the interval length y");
  l22->add_flag("!--no-assert", cfg.lemma22_assert, "Disable the ratio < 2 check");
  add_common_flags(l22, cfg);
  add_plot_flag(l22, cfg);

  auto* bv = app.add_subcommand("bv", "Bombieri-Vinogradov discrepancy sum over moduli q <= Q");
  bv->add_option("--x", cfg.params.x, "Prime-count limit x")->required();
  bv->add_option("--Q", cfg.Q, "Modulus limit Q");
  add_sweep_flags(bv, "Q", cfg.Q_sweep, "the modulus limit Q");
  bv->add_option("--bv-exponent", cfg.params.bv_exponent,
                 "A in the (log x)^A / x normalization");
  bv->add_flag("--prime-only", cfg.bv_prime_only, "Restrict moduli to primes");
  add_common_flags(bv, cfg);
  add_plot_flag(bv, cfg);

  auto* mer = app.add_subcommand("mertens", "Weighted prime-power sum log q / phi(q^s) over q^s <= Q");
  mer->add_option("--Q", cfg.Q, "Prime-power limit Q");
  add_sweep_flags(mer, "Q", cfg.Q_sweep, "the prime-power limit Q");
  add_common_flags(mer, cfg);
  add_plot_flag(mer, cfg);

  auto* sc = app.add_subcommand("sieve-cache", "Build and verify a sieve cache file");
  sc->add_option("--limit", cfg.cache_limit, "Sieve limit to build")->required();
  sc->add_option("--cache", cfg.cache_path, "Cache file path");
  sc->add_option("--workers", cfg.workers, "Worker thread count")->check(CLI::PositiveNumber);
  sc->add_option("--format", cfg.format, "Output format: json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  sc->add_option("--out", cfg.out_path, "Write the report to PATH (atomic)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  if (*qov_opt) cfg.params.q_override = qov;
  CLI::App* sub = app.get_subcommands().front();
  cfg.command = sub->get_name();

  if (sub == dec) return sslb::cmd_decompose(cfg);
  if (sub == ver) return sslb::cmd_verify_theorem(cfg);
  if (sub == scan) return sslb::cmd_theta_scan(cfg);
  if (sub == l21) return sslb::cmd_lemma21(cfg);
  if (sub == l22) return sslb::cmd_lemma22(cfg);
  if (sub == bv) return sslb::cmd_bv(cfg);
  if (sub == mer) return sslb::cmd_mertens(cfg);
  return sslb::cmd_sieve_cache(cfg);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const sslb::InvariantError& e) {
    std::fprintf(stderr, "invariant violation: %s\n", e.what());
    return 3;
  } catch (const sslb::ResourceError& e) {
    std::fprintf(stderr, "resource error: %s\n", e.what());
    return 2;
  } catch (const std::bad_alloc&) {
    std::fprintf(stderr, "resource error: allocation failed\n");
    return 2;
  } catch (const sslb::DomainError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const sslb::RangeError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
