#include "fsum/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "fsum/csv.hpp"
#include "fsum/errors.hpp"
#include "fsum/hash.hpp"

namespace fsum {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Raw "section.key" -> value-token map from the TOML-style text.
std::map<std::string, std::string> tokenize(const std::string& text) {
  std::map<std::string, std::string> values;
  std::string section;
  std::istringstream stream(text);
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    // Strip comments, but not inside quoted strings.
    bool in_quotes = false;
    std::string stripped;
    for (char c : line) {
      if (c == '"') in_quotes = !in_quotes;
      if (c == '#' && !in_quotes) break;
      stripped.push_back(c);
    }
    const std::string t = trim(stripped);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": unterminated section header");
      }
      section = trim(t.substr(1, t.size() - 2));
      if (section.empty()) {
        throw ConfigError("config line " + std::to_string(line_no) + ": empty section");
      }
      continue;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key = value, got '" + t + "'");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": empty key or value");
    }
    if (section.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": key outside any [section]");
    }
    const std::string full = section + "." + key;
    if (values.count(full)) {
      throw ConfigError("config: duplicate key '" + full + "'");
    }
    values[full] = value;
  }
  return values;
}

class Tokens {
 public:
  explicit Tokens(std::map<std::string, std::string> values)
      : values_(std::move(values)) {}

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string take_string(const std::string& key, const std::string& fallback) {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    consumed_.insert(it->first);
    std::string v = it->second;
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') {
      return v.substr(1, v.size() - 2);
    }
    throw ConfigError("config: key '" + key + "' must be a quoted string");
  }

  double take_double(const std::string& key, double fallback) {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    consumed_.insert(it->first);
    try {
      std::size_t pos = 0;
      const double v = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config: key '" + key + "' must be a number, got '" +
                        it->second + "'");
    }
  }

  long long take_int(const std::string& key, long long fallback) {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    consumed_.insert(it->first);
    try {
      std::size_t pos = 0;
      const long long v = std::stoll(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config: key '" + key + "' must be an integer, got '" +
                        it->second + "'");
    }
  }

  std::uint64_t take_u64(const std::string& key, std::uint64_t fallback) {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    consumed_.insert(it->first);
    try {
      std::size_t pos = 0;
      const unsigned long long v = std::stoull(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config: key '" + key +
                        "' must be a non-negative integer, got '" + it->second + "'");
    }
  }

  bool take_bool(const std::string& key, bool fallback) {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    consumed_.insert(it->first);
    if (it->second == "true") return true;
    if (it->second == "false") return false;
    throw ConfigError("config: key '" + key + "' must be true or false, got '" +
                      it->second + "'");
  }

  void reject_unconsumed() const {
    for (const auto& [key, value] : values_) {
      if (!consumed_.count(key)) {
        throw ConfigError("config: unknown key '" + key + "'");
      }
    }
  }

 private:
  std::map<std::string, std::string> values_;
  std::set<std::string> consumed_;
};

}  // namespace

double RunConfig::effective_temperature() const {
  if (temperature >= 0.0) return temperature;
  return profile == "open" ? 0.7 : 1.0;
}

void RunConfig::validate() const {
  if (profile != "stub" && profile != "closed" && profile != "open") {
    throw ConfigError("config: profile must be stub, closed or open, got '" + profile +
                      "'");
  }
  if (workers < 1) throw ConfigError("config: workers must be >= 1");
  if (cache_dir.empty()) throw ConfigError("config: cache_dir is empty");
  foveation.validate();
  if (n_samples < 1) throw ConfigError("config: n_samples must be >= 1");
  if (R < 1) throw ConfigError("config: R must be >= 1");
  if (bin_mode != "half-open" && bin_mode != "closed") {
    throw ConfigError("config: bin_mode must be half-open or closed");
  }
  if (temperature >= 0.0 && temperature > 2.0) {
    throw ConfigError("config: temperature must lie in [0,2]");
  }
  if (stub_embedding_dim < 2) throw ConfigError("config: stub_embedding_dim < 2");
  if (rate_limit_ms < 0.0) throw ConfigError("config: rate_limit_ms < 0");
  if (n_boot < 1) throw ConfigError("config: n_boot must be >= 1");
  if (bootstrap_scheme != "images" && bootstrap_scheme != "participants") {
    throw ConfigError("config: bootstrap_scheme must be images or participants");
  }
  if (!(validity_threshold >= 0.0 && validity_threshold <= 1.0)) {
    throw ConfigError("config: validity_threshold outside [0,1]");
  }
  if (colormap != "viridis" && colormap != "gray") {
    throw ConfigError("config: colormap must be viridis or gray");
  }
  if (profile != "stub") {
    RemoteBackendConfig check = remote;
    check.validate();
  }
}

RunConfig parse_config(const std::string& text) {
  Tokens tokens(tokenize(text));
  RunConfig config;

  config.profile = tokens.take_string("run.profile", config.profile);
  config.seed = tokens.take_u64("run.seed", config.seed);
  config.workers = static_cast<int>(tokens.take_int("run.workers", config.workers));
  config.cache_dir = tokens.take_string("run.cache_dir", config.cache_dir);

  config.foveation.pyramid_levels = static_cast<int>(
      tokens.take_int("foveation.pyramid_levels", config.foveation.pyramid_levels));
  config.foveation.sigma_base =
      tokens.take_double("foveation.sigma_base", config.foveation.sigma_base);
  config.foveation.k = tokens.take_double("foveation.k", config.foveation.k);
  config.foveation.alpha = tokens.take_double("foveation.alpha", config.foveation.alpha);
  config.foveation.p_scale =
      tokens.take_double("foveation.p_scale", config.foveation.p_scale);

  config.n_samples = static_cast<int>(tokens.take_int("map.n_samples", config.n_samples));

  config.R = static_cast<int>(tokens.take_int("scoring.R", config.R));
  config.bin_mode = tokens.take_string("scoring.bin_mode", config.bin_mode);

  config.temperature = tokens.take_double("backends.temperature", config.temperature);
  config.stub_embedding_dim = static_cast<int>(
      tokens.take_int("backends.stub_embedding_dim", config.stub_embedding_dim));
  config.stub_salt = tokens.take_u64("backends.stub_salt", config.stub_salt);
  config.rate_limit_ms =
      tokens.take_double("backends.rate_limit_ms", config.rate_limit_ms);
  config.remote.base_url = tokens.take_string("backends.base_url", config.remote.base_url);
  config.remote.caption_path =
      tokens.take_string("backends.caption_path", config.remote.caption_path);
  config.remote.embedding_path =
      tokens.take_string("backends.embedding_path", config.remote.embedding_path);
  config.remote.caption_model =
      tokens.take_string("backends.caption_model", config.remote.caption_model);
  config.remote.embedding_model =
      tokens.take_string("backends.embedding_model", config.remote.embedding_model);
  config.remote.api_key_env =
      tokens.take_string("backends.api_key_env", config.remote.api_key_env);
  config.remote.request_logprobs =
      tokens.take_bool("backends.request_logprobs", config.remote.request_logprobs);
  config.remote.max_tokens = static_cast<int>(
      tokens.take_int("backends.max_tokens", config.remote.max_tokens));

  config.n_boot = static_cast<int>(tokens.take_int("analysis.n_boot", config.n_boot));
  config.bootstrap_scheme =
      tokens.take_string("analysis.bootstrap_scheme", config.bootstrap_scheme);
  config.validity_threshold =
      tokens.take_double("analysis.validity_threshold", config.validity_threshold);

  config.colormap = tokens.take_string("render.colormap", config.colormap);

  tokens.reject_unconsumed();
  // When the open profile is selected, default to requesting logprobs (the
  // open-source-style provider exposes them) unless the file said otherwise.
  if (config.profile == "open" && !tokens.has("backends.request_logprobs")) {
    config.remote.request_logprobs = true;
  }
  config.validate();
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string canonical_config_string(const RunConfig& config) {
  // Sorted section.key=value lines; every result-influencing field appears.
  std::map<std::string, std::string> kv;
  kv["run.profile"] = config.profile;
  kv["run.seed"] = std::to_string(config.seed);
  kv["run.workers"] = std::to_string(config.workers);
  kv["foveation.pyramid_levels"] = std::to_string(config.foveation.pyramid_levels);
  kv["foveation.sigma_base"] = format_double(config.foveation.sigma_base);
  kv["foveation.k"] = format_double(config.foveation.k);
  kv["foveation.alpha"] = format_double(config.foveation.alpha);
  kv["foveation.p_scale"] = format_double(config.foveation.p_scale);
  kv["map.n_samples"] = std::to_string(config.n_samples);
  kv["scoring.R"] = std::to_string(config.R);
  kv["scoring.bin_mode"] = config.bin_mode;
  kv["backends.temperature"] = format_double(config.effective_temperature());
  kv["backends.stub_embedding_dim"] = std::to_string(config.stub_embedding_dim);
  kv["backends.stub_salt"] = std::to_string(config.stub_salt);
  kv["backends.base_url"] = config.remote.base_url;
  kv["backends.caption_model"] = config.remote.caption_model;
  kv["backends.embedding_model"] = config.remote.embedding_model;
  kv["backends.request_logprobs"] = config.remote.request_logprobs ? "true" : "false";
  kv["backends.max_tokens"] = std::to_string(config.remote.max_tokens);
  kv["analysis.n_boot"] = std::to_string(config.n_boot);
  kv["analysis.bootstrap_scheme"] = config.bootstrap_scheme;
  kv["analysis.validity_threshold"] = format_double(config.validity_threshold);
  kv["render.colormap"] = config.colormap;

  std::string out;
  for (const auto& [key, value] : kv) {
    out += key;
    out += '=';
    out += value;
    out += '\n';
  }
  return out;
}

std::string config_hash(const RunConfig& config) {
  return sha256_hex(canonical_config_string(config)).substr(0, 16);
}

}  // namespace fsum
