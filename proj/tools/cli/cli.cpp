#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mellin_deconv/errors.hpp"
#include "mellin_deconv/experiments.hpp"
#include "mellin_deconv/selection.hpp"
#include "run_config.hpp"

namespace mellin_deconv::cli {

using nlohmann::json;

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path);
  return out;
}

void write_json(const std::string& path, const json& doc) {
  auto out = open_output(path);
  out << doc.dump(2) << '\n';
}

std::string trimmed(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// One positive value per line. Blank lines are skipped; the first nonblank
// line may be a header.
Sample read_sample(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open input file " + path);
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  bool seen_content = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trimmed(line);
    if (t.empty()) continue;
    double v = 0.0;
    const auto* end = t.data() + t.size();
    const auto [ptr, ec] = std::from_chars(t.data(), end, v);
    const bool numeric = ec == std::errc{} && ptr == end;
    if (!numeric) {
      if (!seen_content) {
        seen_content = true;
        continue;
      }
      throw ConfigError(path + ":" + std::to_string(line_no) + ": not a number: '" + t + "'");
    }
    seen_content = true;
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": values must be positive and finite, got " + t);
    }
    values.push_back(v);
  }
  if (values.empty()) throw ConfigError(path + ": no observations");
  return Sample(std::move(values));
}

unsigned resolve_thread_setting(const RunConfig& rc) {
  if (!rc.is_null("threads")) return static_cast<unsigned>(rc.integer("threads"));
  if (const char* env = std::getenv("MELLIN_DECONV_THREADS"); env != nullptr && *env != '\0') {
    const std::string text = trimmed(env);
    unsigned v = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end) {
      throw ConfigError("MELLIN_DECONV_THREADS must be a nonnegative integer, got '" + text + "'");
    }
    return v;
  }
  return 0;
}

EstimatorConfig estimator_config(const RunConfig& rc) {
  const auto points = rc.integer("x_points");
  if (points < 2) throw ConfigError("x_points must be at least 2");
  return make_estimator_config(rc.real("alpha"), FrequencyGrid(rc.real("k_max"), rc.real("step")),
                               log_spaced(rc.real("x_min"), rc.real("x_max"), points),
                               rc.boolean("truncation_negative"));
}

int cap_of(const RunConfig& rc) {
  const auto cap = rc.integer("K_cap");
  if (cap < 1 || cap > 1000000) throw ConfigError("K_cap must be in [1, 1000000]");
  return static_cast<int>(cap);
}

std::string required_text(const RunConfig& rc, const std::string& key) {
  std::string v = rc.text(key);
  if (v.empty()) throw ConfigError(flag_name(key) + " is required");
  return v;
}

double chi_of(const RunConfig& rc, const ErrorDensity& g) {
  if (!rc.is_null("chi")) return rc.real("chi");
  return default_chi(g.gamma());
}

void write_curve(const std::string& path, const CutoffEstimate& est, bool clip) {
  const std::vector<double> values = clip ? est.clipped_values() : est.values;
  auto out = open_output(path);
  out << "x,f_hat\n";
  for (std::size_t i = 0; i < est.x.size(); ++i) {
    out << fmt17(est.x[i]) << ',' << fmt17(values[i]) << '\n';
  }
}

int cmd_estimate(const RunConfig& rc, std::ostream& out) {
  const std::string output = required_text(rc, "output");
  const EstimatorConfig cfg = estimator_config(rc);
  const ErrorDensity g = make_error(rc.text("error"));
  const Sample sample = read_sample(required_text(rc, "input"));
  const std::string mode = rc.text("mode");

  if (mode == "adaptive") {
    const PenaltyConfig pc{chi_of(rc, g), g.gamma(), cap_of(rc)};
    const AdaptiveResult res = adaptive_estimate(sample, g, pc, cfg);
    write_curve(output, res.estimate, cfg.truncation_negative);
    json table = json::array();
    for (const auto& row : res.selection.table) {
      table.push_back({{"k", row.k},
                       {"omega_norm_sq", row.omega_norm_sq},
                       {"pen", row.pen},
                       {"contrast", row.contrast}});
    }
    write_json(output + ".selection.json", {{"error", g.name()},
                                            {"n", sample.size()},
                                            {"chi", pc.chi},
                                            {"gamma", pc.gamma},
                                            {"K_n", res.selection.K_n},
                                            {"k_hat", res.selection.k_hat},
                                            {"chi_threshold", res.chi_threshold},
                                            {"table", table}});
    out << "k_hat = " << res.selection.k_hat << " (K_n = " << res.selection.K_n << ")\n";
    return kOk;
  }
  if (mode == "fixed") {
    if (rc.is_null("k")) throw ConfigError("fixed mode needs --k");
    const double k = rc.real("k");
    const CutoffEstimate est =
        g.is_dirac() ? estimate_direct(sample, k, cfg) : estimate_noisy(sample, g, k, cfg);
    write_curve(output, est, cfg.truncation_negative);
    out << "k = " << fmt17(k) << "\n";
    return kOk;
  }
  throw ConfigError("unknown mode '" + mode + "' (expected adaptive or fixed)");
}

int cmd_simulate(const RunConfig& rc, std::ostream& out) {
  const std::string prefix = required_text(rc, "out");
  const EstimatorConfig cfg = estimator_config(rc);
  MCConfig mc;
  mc.target = rc.text("target");
  mc.error = rc.text("error");
  mc.n = rc.integer("n");
  mc.reps = rc.integer("reps");
  mc.master_seed = rc.integer("seed");
  mc.K_cap = cap_of(rc);
  const ErrorDensity g = make_error(mc.error);
  make_target(mc.target);

  json summary = {{"target", mc.target}, {"error", mc.error}, {"n", mc.n},
                  {"reps", mc.reps},     {"seed", mc.master_seed}};
  const std::string mode = rc.text("mode");
  if (mode == "adaptive") {
    mc.mode = MCMode::adaptive(chi_of(rc, g));
    summary["chi"] = mc.mode.chi;
  } else if (mode == "oracle") {
    mc.mode = MCMode::oracle();
  } else if (mode == "fixed") {
    if (rc.is_null("k")) throw ConfigError("fixed mode needs --k");
    mc.mode = MCMode::fixed(rc.real("k"));
    summary["k"] = mc.mode.k;
  } else {
    throw ConfigError("unknown mode '" + mode + "' (expected adaptive, oracle or fixed)");
  }
  summary["mode"] = mode;

  const RiskReport report = monte_carlo(mc, cfg, resolve_thread_setting(rc));

  {
    auto risk = open_output(prefix + "_risk.csv");
    risk << "rep,k,weighted_ise\n";
    for (std::size_t r = 0; r < report.ise.size(); ++r) {
      risk << r << ',' << fmt17(report.k_used[r]) << ',' << fmt17(report.ise[r]) << '\n';
    }
  }
  {
    auto curve = open_output(prefix + "_curve.csv");
    curve << "x,truth,median_estimate\n";
    for (std::size_t i = 0; i < report.x.size(); ++i) {
      curve << fmt17(report.x[i]) << ',' << fmt17(report.truth[i]) << ','
            << fmt17(report.median_curve[i]) << '\n';
    }
  }
  json hist = json::array();
  for (const auto& [k, count] : report.k_histogram) hist.push_back({k, count});
  summary["K_n"] = report.K_n;
  summary["mean_ise"] = report.mean;
  summary["median_ise"] = report.median;
  summary["k_histogram"] = hist;
  write_json(prefix + "_summary.json", summary);

  out << "mean weighted ISE = " << fmt17(report.mean) << "\n";
  out << "median weighted ISE = " << fmt17(report.median) << "\n";
  return kOk;
}

int cmd_calibrate(const RunConfig& rc, std::ostream& out) {
  const EstimatorConfig cfg = estimator_config(rc);
  const ErrorDensity g = make_error(rc.text("error"));
  CalibrationConfig cal;
  cal.histograms = static_cast<int>(std::min<std::uint64_t>(rc.integer("histograms"), 1u << 30));
  cal.reps = static_cast<int>(std::min<std::uint64_t>(rc.integer("cal_reps"), 1u << 30));
  cal.n = rc.integer("n");
  cal.min_bins = static_cast<int>(std::min<std::uint64_t>(rc.integer("min_bins"), 1u << 20));
  cal.max_bins = static_cast<int>(std::min<std::uint64_t>(rc.integer("max_bins"), 1u << 20));
  cal.span = rc.real("span");
  cal.K_cap = cap_of(rc);
  cal.seed = rc.integer("seed");
  const std::vector<double> grid = rc.real_list("chi_grid");

  const CalibrationResult res = calibrate_chi(g, grid, cal, cfg, resolve_thread_setting(rc));
  out << "chi,mean_ise\n";
  json rows = json::array();
  for (std::size_t c = 0; c < res.chi_grid.size(); ++c) {
    out << fmt17(res.chi_grid[c]) << ',' << fmt17(res.mean_ise[c]) << '\n';
    rows.push_back({{"chi", res.chi_grid[c]}, {"mean_ise", res.mean_ise[c]}});
  }
  out << "selected chi = " << fmt17(res.chi) << "\n";
  if (!rc.is_null("output")) {
    write_json(rc.text("output"), {{"error", g.name()}, {"chi", res.chi}, {"grid", rows}});
  }
  return kOk;
}

int cmd_ratecheck(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  const EstimatorConfig cfg = estimator_config(rc);
  const std::string target = rc.text("target");
  const TargetDensity f = make_target(target);
  const ErrorDensity g = make_error(rc.text("error"));
  double s = 0.0;
  if (!rc.is_null("s")) {
    s = rc.real("s");
  } else if (f.s_ref()) {
    s = *f.s_ref();
  } else {
    throw ConfigError("target " + target + " has no reference smoothness; pass --s");
  }
  const std::vector<std::size_t> n_list = rc.integer_list("n_list");
  const double tol = rc.real("slope_tol");

  RateStudy study;
  const bool synthetic = !rc.is_null("synthetic_c") || !rc.is_null("synthetic_beta");
  if (synthetic) {
    if (rc.is_null("synthetic_c") || rc.is_null("synthetic_beta")) {
      throw ConfigError("the synthetic hook needs both --synthetic-c and --synthetic-beta");
    }
    if (!(s > 0.0)) throw ConfigError("s must be positive");
    if (n_list.size() < 4) throw ConfigError("n_list needs at least four sample sizes");
    const double c = rc.real("synthetic_c");
    const double beta = rc.real("synthetic_beta");
    if (!(c > 0.0)) throw ConfigError("synthetic_c must be positive");
    std::vector<double> ns;
    for (std::size_t i = 0; i < n_list.size(); ++i) {
      if (n_list[i] == 0 || (i > 0 && n_list[i] <= n_list[i - 1])) {
        throw ConfigError("n_list must be positive and strictly increasing");
      }
      const double n = static_cast<double>(n_list[i]);
      ns.push_back(n);
      study.n_list.push_back(n_list[i]);
      study.k_used.push_back(rate_cutoff(n_list[i], s, g.gamma(), cfg.grid));
      study.mean_ise.push_back(c * std::pow(n, -beta));
    }
    study.slope = loglog_slope(ns, study.mean_ise);
    study.theoretical_exponent = -2.0 * s / (2.0 * s + 2.0 * g.gamma() + 1.0);
    study.super_smooth_warning = f.super_smooth();
  } else {
    study = rate_study(target, g.name(), s, n_list, rc.integer("reps"), rc.integer("seed"), cfg,
                       resolve_thread_setting(rc));
  }
  if (study.super_smooth_warning) {
    err << "warning: target " << target
        << " is super-smooth; the slope check is not meaningful against a polynomial rate\n";
  }

  const double diff = std::abs(study.slope - study.theoretical_exponent);
  const bool pass = diff <= tol;
  out << "n,k,mean_ise\n";
  for (std::size_t i = 0; i < study.n_list.size(); ++i) {
    out << study.n_list[i] << ',' << fmt17(study.k_used[i]) << ',' << fmt17(study.mean_ise[i])
        << '\n';
  }
  out << "slope = " << fmt17(study.slope) << "\n";
  out << "theoretical exponent = " << fmt17(study.theoretical_exponent) << "\n";
  out << "difference = " << fmt17(diff) << " (tolerance " << fmt17(tol) << ")\n";
  out << (pass ? "PASS" : "FAIL") << "\n";
  if (!rc.is_null("output")) {
    write_json(rc.text("output"), {{"target", target},
                                   {"error", g.name()},
                                   {"s", s},
                                   {"n_list", study.n_list},
                                   {"k_used", study.k_used},
                                   {"mean_ise", study.mean_ise},
                                   {"slope", study.slope},
                                   {"theoretical_exponent", study.theoretical_exponent},
                                   {"slope_tol", tol},
                                   {"pass", pass}});
  }
  return pass ? kOk : kCheckFailed;
}

int dispatch(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  const std::string& cmd = rc.command();
  if (cmd == "estimate") return cmd_estimate(rc, out);
  if (cmd == "simulate") return cmd_simulate(rc, out);
  if (cmd == "calibrate") return cmd_calibrate(rc, out);
  return cmd_ratecheck(rc, out, err);
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multiplicative deconvolution density estimation with Mellin transforms",
               "mellin_deconv"};
  app.require_subcommand(1, 1);

  const std::map<std::string, std::string> descriptions = {
      {"estimate", "estimate a density from a sample file"},
      {"simulate", "Monte Carlo risk study for a known target and error law"},
      {"calibrate", "pick the penalty constant on random histogram targets"},
      {"ratecheck", "compare the empirical risk slope with the theoretical rate"},
  };
  std::map<std::string, std::map<std::string, std::string>> raw;
  std::map<std::string, std::map<std::string, CLI::Option*>> options;
  std::map<std::string, std::string> config_paths;
  std::map<std::string, bool> dump_flags;
  for (const auto& [cmd, desc] : descriptions) {
    CLI::App* sub = app.add_subcommand(cmd, desc);
    sub->add_option("--config", config_paths[cmd], "JSON run configuration");
    sub->add_flag("--dump-config", dump_flags[cmd], "print the merged configuration and exit");
    for (const auto& key : schema(cmd)) {
      options[cmd][key.name] = sub->add_option(flag_name(key.name), raw[cmd][key.name], key.help);
    }
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kBadInput;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    RunConfig rc(cmd);
    if (!config_paths[cmd].empty()) rc.merge(read_config_file(config_paths[cmd]));
    for (const auto& key : schema(cmd)) {
      if (options[cmd][key.name]->count() > 0) rc.set_from_text(key.name, raw[cmd][key.name]);
    }
    if (dump_flags[cmd]) {
      out << rc.dump().dump(2) << '\n';
      return kOk;
    }
    return dispatch(rc, out, err);
  } catch (const AssumptionViolation& e) {
    err << "error: " << e.what() << '\n';
    return kAssumptionViolated;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  }
}

}  // namespace mellin_deconv::cli
