#include "run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace mellin_deconv::cli {

using nlohmann::json;

namespace {

std::vector<Key> estimator_keys() {
  return {
      {"alpha", Kind::real, 1.0, "Mellin line Re = alpha (noisy data need 1)"},
      {"k_max", Kind::real, 200.0, "largest frequency of the t-grid"},
      {"step", Kind::real, 0.01, "t-grid spacing"},
      {"x_min", Kind::real, 0.01, "smallest evaluation point"},
      {"x_max", Kind::real, 10.0, "largest evaluation point"},
      {"x_points", Kind::integer, 400, "number of log-spaced evaluation points"},
      {"truncation_negative", Kind::boolean, true, "clip negative values in reported curves"},
      {"K_cap", Kind::integer, 200, "upper limit for K_n"},
      {"threads", Kind::integer, nullptr, "worker threads (default: all cores)"},
  };
}

std::vector<Key> with_estimator_keys(std::vector<Key> keys) {
  for (auto& k : estimator_keys()) keys.push_back(std::move(k));
  return keys;
}

const std::map<std::string, std::vector<Key>>& all_schemas() {
  static const std::map<std::string, std::vector<Key>> schemas = {
      {"estimate", with_estimator_keys({
                       {"input", Kind::text, "", "sample file, one positive value per line"},
                       {"error", Kind::text, "dirac", "error law"},
                       {"mode", Kind::text, "adaptive", "adaptive or fixed"},
                       {"chi", Kind::real, nullptr, "penalty constant (default by error law)"},
                       {"k", Kind::real, nullptr, "cut-off for fixed mode"},
                       {"output", Kind::text, "", "output CSV path"},
                   })},
      {"simulate", with_estimator_keys({
                       {"target", Kind::text, "gamma5", "target density"},
                       {"error", Kind::text, "dirac", "error law"},
                       {"n", Kind::integer, 1000, "sample size"},
                       {"reps", Kind::integer, 50, "Monte Carlo replications"},
                       {"mode", Kind::text, "adaptive", "adaptive, oracle or fixed"},
                       {"chi", Kind::real, nullptr, "penalty constant (default by error law)"},
                       {"k", Kind::real, nullptr, "cut-off for fixed mode"},
                       {"seed", Kind::integer, 1, "master seed"},
                       {"out", Kind::text, "", "output prefix"},
                   })},
      {"calibrate",
       with_estimator_keys({
           {"error", Kind::text, "dirac", "error law"},
           {"chi_grid", Kind::real_list, json::array({0.01, 0.1, 0.3, 0.8, 1.2, 2.4, 4.8}),
            "candidate penalty constants"},
           {"histograms", Kind::integer, 50, "number of random histogram targets"},
           {"cal_reps", Kind::integer, 20, "samples per histogram"},
           {"n", Kind::integer, 1000, "sample size"},
           {"min_bins", Kind::integer, 3, "fewest histogram bins"},
           {"max_bins", Kind::integer, 10, "most histogram bins"},
           {"span", Kind::real, 5.0, "histogram support [0, span]"},
           {"seed", Kind::integer, 20240601, "master seed"},
           {"output", Kind::text, nullptr, "optional JSON report path"},
       })},
      {"ratecheck",
       with_estimator_keys({
           {"target", Kind::text, "scaled_beta", "target density"},
           {"error", Kind::text, "dirac", "error law"},
           {"s", Kind::real, nullptr, "smoothness (default: the target's reference value)"},
           {"n_list", Kind::integer_list, json::array({1000, 2000, 4000, 8000, 16000}),
            "increasing sample sizes"},
           {"reps", Kind::integer, 200, "replications per sample size"},
           {"seed", Kind::integer, 1, "master seed"},
           {"slope_tol", Kind::real, 0.15, "allowed distance to the theoretical exponent"},
           {"synthetic_c", Kind::real, nullptr, "test hook: use ISE(n) = c n^-beta"},
           {"synthetic_beta", Kind::real, nullptr, "test hook: exponent beta"},
           {"output", Kind::text, nullptr, "optional JSON report path"},
       })},
  };
  return schemas;
}

bool accepts(Kind kind, const json& v) {
  switch (kind) {
    case Kind::integer:
      return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
    case Kind::real:
      return v.is_number() && std::isfinite(v.get<double>());
    case Kind::text:
      return v.is_string();
    case Kind::boolean:
      return v.is_boolean();
    case Kind::real_list:
      return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) {
               return e.is_number() && std::isfinite(e.get<double>());
             });
    case Kind::integer_list:
      return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) {
               return e.is_number_unsigned() ||
                      (e.is_number_integer() && e.get<std::int64_t>() >= 0);
             });
  }
  return false;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(trim(item));
  return parts;
}

std::uint64_t parse_unsigned(const std::string& text, const std::string& key) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc{} || ptr != end) {
    throw ConfigError("--" + key + ": expected a nonnegative integer, got '" + text + "'");
  }
  return v;
}

double parse_real(const std::string& text, const std::string& key) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc{} || ptr != end || !std::isfinite(v)) {
    throw ConfigError("--" + key + ": expected a number, got '" + text + "'");
  }
  return v;
}

}  // namespace

const std::vector<Key>& schema(const std::string& command) {
  const auto& all = all_schemas();
  const auto it = all.find(command);
  if (it == all.end()) throw ConfigError("unknown command '" + command + "'");
  return it->second;
}

std::string flag_name(const std::string& key) {
  std::string out = "--" + key;
  std::replace(out.begin(), out.end(), '_', '-');
  return out;
}

RunConfig::RunConfig(std::string command) : command_(std::move(command)) {
  for (const auto& k : schema(command_)) values_[k.name] = k.fallback;
}

const Key& RunConfig::key(const std::string& name) const {
  const auto& keys = schema(command_);
  const auto it =
      std::find_if(keys.begin(), keys.end(), [&](const Key& k) { return k.name == name; });
  if (it == keys.end()) {
    throw ConfigError("unknown key '" + name + "' for command " + command_);
  }
  return *it;
}

void RunConfig::assign(const Key& k, const json& v) {
  if (!accepts(k.kind, v) && !(v.is_null() && k.fallback.is_null())) {
    throw ConfigError("key '" + k.name + "' has the wrong type: " + v.dump());
  }
  values_[k.name] = v;
}

void RunConfig::merge(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [name, v] : doc.items()) {
    if (name == "command") {
      if (!v.is_string() || v.get<std::string>() != command_) {
        throw ConfigError("config is for command " + v.dump() + ", not " + command_);
      }
      continue;
    }
    assign(key(name), v);
  }
}

void RunConfig::set_from_text(const std::string& name, const std::string& text) {
  const Key& k = key(name);
  switch (k.kind) {
    case Kind::integer:
      assign(k, parse_unsigned(trim(text), name));
      break;
    case Kind::real:
      assign(k, parse_real(trim(text), name));
      break;
    case Kind::text:
      assign(k, text);
      break;
    case Kind::boolean: {
      const std::string t = trim(text);
      if (t == "true" || t == "1") {
        assign(k, true);
      } else if (t == "false" || t == "0") {
        assign(k, false);
      } else {
        throw ConfigError("--" + name + ": expected true or false, got '" + text + "'");
      }
      break;
    }
    case Kind::real_list: {
      json arr = json::array();
      for (const auto& part : split_commas(text)) arr.push_back(parse_real(part, name));
      assign(k, arr);
      break;
    }
    case Kind::integer_list: {
      json arr = json::array();
      for (const auto& part : split_commas(text)) arr.push_back(parse_unsigned(part, name));
      assign(k, arr);
      break;
    }
  }
}

json RunConfig::dump() const {
  json doc = json::object();
  doc["command"] = command_;
  for (const auto& k : schema(command_)) doc[k.name] = values_.at(k.name);
  return doc;
}

const json& RunConfig::value(const std::string& name) const {
  key(name);
  return values_.at(name);
}

bool RunConfig::is_null(const std::string& name) const { return value(name).is_null(); }

std::string RunConfig::text(const std::string& name) const {
  return value(name).get<std::string>();
}

double RunConfig::real(const std::string& name) const { return value(name).get<double>(); }

std::uint64_t RunConfig::integer(const std::string& name) const {
  return value(name).get<std::uint64_t>();
}

bool RunConfig::boolean(const std::string& name) const { return value(name).get<bool>(); }

std::vector<double> RunConfig::real_list(const std::string& name) const {
  return value(name).get<std::vector<double>>();
}

std::vector<std::size_t> RunConfig::integer_list(const std::string& name) const {
  return value(name).get<std::vector<std::size_t>>();
}

json read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path + ": " + e.what());
  }
}

}  // namespace mellin_deconv::cli
