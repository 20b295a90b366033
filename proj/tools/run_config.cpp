#include "run_config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "harp/error.hpp"

namespace harp::cli {

ConfigError::ConfigError(std::size_t line, const std::string& msg)
    : std::runtime_error(line ? "config line " + std::to_string(line) + ": " + msg : msg), line_(line) {}

namespace {

// Shortest text that parses back to the same double.
std::string num(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::uint64_t to_u64(const std::string& key, const std::string& v, std::size_t line) {
  std::uint64_t out = 0;
  int base = 10;
  std::string_view s = v;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    s.remove_prefix(2);
    base = 16;
  }
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out, base);
  if (ec != std::errc() || p != s.data() + s.size()) throw ConfigError(line, key + ": expected an integer, got '" + v + "'");
  return out;
}

std::size_t to_size(const std::string& key, const std::string& v, std::size_t line) {
  return static_cast<std::size_t>(to_u64(key, v, line));
}

double to_double(const std::string& key, const std::string& v, std::size_t line) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(line, key + ": expected a number, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v, std::size_t line) {
  if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(line, key + ": expected on/off, got '" + v + "'");
}

std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

const std::vector<std::string> kKeys = {
    "w_path",       "h_path",      "d_in",      "d_out",     "outliers",   "outlier_scale",
    "weight_outlier_scale",        "rho",       "channel_spread",          "seed",
    "problems",     "name",        "base_radix", "max_radix", "passes",     "radices",
    "kronecker",    "kron_order",  "mixers",    "random_signs",            "sign_seed",
    "steps",        "lr",          "lambda_bd", "reg_block", "refresh",    "beta1",
    "beta2",        "eps",         "quantizer", "out_dir"};

}  // namespace

RunConfig::RunConfig() { processor.sign_seed = SeededRng{1}; }

std::vector<std::string> RunConfig::keys() { return kKeys; }

void RunConfig::set(const std::string& key, const std::string& value, std::size_t line) {
  const std::string& v = value;
  if (key == "w_path") w_path = v;
  else if (key == "h_path") h_path = v;
  else if (key == "d_in") synthetic.d_in = to_size(key, v, line);
  else if (key == "d_out") synthetic.d_out = to_size(key, v, line);
  else if (key == "outliers") synthetic.outliers = to_size(key, v, line);
  else if (key == "outlier_scale") synthetic.outlier_scale = to_double(key, v, line);
  else if (key == "weight_outlier_scale") synthetic.weight_outlier_scale = to_double(key, v, line);
  else if (key == "rho") synthetic.rho = to_double(key, v, line);
  else if (key == "channel_spread") synthetic.channel_spread = to_double(key, v, line);
  else if (key == "seed") seed = to_u64(key, v, line);
  else if (key == "problems") problems = to_size(key, v, line);
  else if (key == "name") name = v;
  else if (key == "base_radix") processor.base_radix = to_size(key, v, line);
  else if (key == "max_radix") processor.max_radix = to_size(key, v, line);
  else if (key == "passes") processor.passes = to_size(key, v, line);
  else if (key == "radices") {
    if (v == "auto") {
      processor.radices.reset();
    } else {
      std::vector<std::size_t> r;
      std::stringstream ss(v);
      std::string item;
      while (std::getline(ss, item, ',')) r.push_back(to_size(key, trim(item), line));
      if (r.empty()) throw ConfigError(line, "radices: empty list");
      processor.radices = r;
    }
  } else if (key == "kronecker") processor.kronecker = to_bool(key, v, line);
  else if (key == "kron_order") {
    if (v == "auto") processor.kron_order.reset();
    else processor.kron_order = to_size(key, v, line);
  } else if (key == "mixers") {
    if (v == "standard") processor.mixers = MixerPolicy::standard;
    else if (v == "identity") processor.mixers = MixerPolicy::identity;
    else throw ConfigError(line, "mixers: expected standard or identity, got '" + v + "'");
  } else if (key == "random_signs") processor.random_signs = to_bool(key, v, line);
  else if (key == "sign_seed") processor.sign_seed = SeededRng{to_u64(key, v, line)};
  else if (key == "steps") fit.steps = to_size(key, v, line);
  else if (key == "lr") fit.lr = to_double(key, v, line);
  else if (key == "lambda_bd") fit.lambda_bd = to_double(key, v, line);
  else if (key == "reg_block") fit.reg_block = to_size(key, v, line);
  else if (key == "refresh") fit.refresh = to_size(key, v, line);
  else if (key == "beta1") fit.beta1 = to_double(key, v, line);
  else if (key == "beta2") fit.beta2 = to_double(key, v, line);
  else if (key == "eps") fit.eps = to_double(key, v, line);
  else if (key == "quantizer") {
    try {
      fit.quantizer = QuantizerSpec::parse(v);
    } catch (const Error& e) {
      throw ConfigError(line, std::string("quantizer: ") + e.what());
    }
  } else if (key == "out_dir") out_dir = v;
  else throw ConfigError(line, "unknown key '" + key + "'");
}

void RunConfig::validate() const {
  try {
    fit.validate();
    if (!from_files()) synthetic_for(0).validate();
  } catch (const Error& e) {
    throw ConfigError(0, e.what());
  }
  if (from_files() && (w_path.empty() || h_path.empty())) throw ConfigError(0, "w_path and h_path must be set together");
  if (problems == 0) throw ConfigError(0, "problems must be >= 1");
  if (from_files() && problems != 1) throw ConfigError(0, "problems > 1 needs the synthetic generator");
  if (processor.passes == 0) throw ConfigError(0, "passes must be >= 1");
  if (processor.base_radix < 2 || processor.max_radix < 2) throw ConfigError(0, "radices must be >= 2");
}

SyntheticSpec RunConfig::synthetic_for(std::size_t index) const {
  SyntheticSpec s = synthetic;
  s.seed = SeededRng{seed + index};
  return s;
}

std::string RunConfig::layer_name(std::size_t index) const {
  return problems == 1 ? name : name + std::to_string(index);
}

std::string RunConfig::to_text() const {
  std::ostringstream os;
  os << "w_path = " << w_path << "\nh_path = " << h_path << "\nd_in = " << synthetic.d_in
     << "\nd_out = " << synthetic.d_out << "\noutliers = " << synthetic.outliers
     << "\noutlier_scale = " << num(synthetic.outlier_scale)
     << "\nweight_outlier_scale = " << num(synthetic.weight_outlier_scale) << "\nrho = " << num(synthetic.rho)
     << "\nchannel_spread = " << num(synthetic.channel_spread) << "\nseed = " << seed << "\nproblems = " << problems
     << "\nname = " << name << "\nbase_radix = " << processor.base_radix << "\nmax_radix = " << processor.max_radix
     << "\npasses = " << processor.passes << "\nradices = " << (processor.radices ? join(*processor.radices) : "auto")
     << "\nkronecker = " << (processor.kronecker ? "on" : "off")
     << "\nkron_order = " << (processor.kron_order ? std::to_string(*processor.kron_order) : "auto")
     << "\nmixers = " << (processor.mixers == MixerPolicy::identity ? "identity" : "standard")
     << "\nrandom_signs = " << (processor.random_signs ? "on" : "off")
     << "\nsign_seed = " << processor.sign_seed.seed << "\nsteps = " << fit.steps << "\nlr = " << num(fit.lr)
     << "\nlambda_bd = " << num(fit.lambda_bd) << "\nreg_block = " << fit.reg_block << "\nrefresh = " << fit.refresh
     << "\nbeta1 = " << num(fit.beta1) << "\nbeta2 = " << num(fit.beta2) << "\neps = " << num(fit.eps)
     << "\nquantizer = " << fit.quantizer.to_string() << "\nout_dir = " << out_dir << '\n';
  return os.str();
}

RunConfig parse_run_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(line, "expected key = value, got '" + s + "'");
    const std::string key = trim(s.substr(0, eq));
    if (key.empty()) throw ConfigError(line, "missing key");
    cfg.set(key, trim(s.substr(eq + 1)), line);
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

}  // namespace harp::cli
