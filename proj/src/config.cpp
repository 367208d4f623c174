#include "spatialkit/config.hpp"

#include <charconv>
#include <fstream>

#include "spatialkit/parallel.hpp"

namespace spatialkit {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw ConfigError("invalid value for " + std::string(key) + ": '" + std::string(value) + "'");
}

double parse_double(std::string_view key, std::string_view value) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size()) bad_value(key, value);
  return v;
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view value) {
  Int v = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size()) bad_value(key, value);
  return v;
}

Fraction parse_fraction(std::string_view key, std::string_view value) {
  try {
    return Fraction::parse(value);
  } catch (const std::invalid_argument&) {
    bad_value(key, value);
  }
}

}  // namespace

void Config::set(std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  if (key == "tau_v") thresholds.tau_v = parse_fraction(key, value);
  else if (key == "tau_u") thresholds.tau_u = parse_fraction(key, value);
  else if (key == "tau_o") thresholds.tau_o = parse_fraction(key, value);
  else if (key == "tau_s") thresholds.tau_s = parse_fraction(key, value);
  else if (key == "and_probability") decode.and_probability = parse_double(key, value);
  else if (key == "max_expansion") decode.max_expansion = parse_double(key, value);
  else if (key == "global_seed") decode.global_seed = parse_int<std::uint64_t>(key, value);
  else if (key == "union_mode") {
    if (value == "exact") union_mode = UnionMode::exact;
    else if (value == "enclosing_box") union_mode = UnionMode::enclosing_box;
    else bad_value(key, value);
  } else if (key == "relation_rule") {
    if (value == "octant") relation_rule = RelationRule::octant;
    else if (value == "axis_dominant") relation_rule = RelationRule::axis_dominant;
    else bad_value(key, value);
  } else if (key == "proxy_mode") {
    if (value == "paper") proxy_mode = proxy::PairingMode::paper;
    else if (value == "full") proxy_mode = proxy::PairingMode::full;
    else bad_value(key, value);
  } else if (key == "metric") {
    auto m = proxy::parse_metric(value);
    if (!m) bad_value(key, value);
    metric = *m;
  } else if (key == "conf_threshold") conf_threshold = parse_double(key, value);
  else if (key == "template_pool") template_pool = std::string(value);
  else if (key == "images_dir") images_dir = std::string(value);
  else if (key == "threads") threads = parse_int<unsigned>(key, value);
  else if (key == "min_area") validity.min_area = parse_int<Area>(key, value);
  else if (key == "exclude_crowd") {
    if (value == "true") validity.exclude_crowd = true;
    else if (value == "false") validity.exclude_crowd = false;
    else bad_value(key, value);
  }
  else throw ConfigError("unknown config key '" + std::string(key) + "'");
}

void Config::load(std::istream& in, std::string_view source) {
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    std::string_view s = line;
    if (auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(std::string(source) + ":" + std::to_string(line_no) + ": expected key = value");
    }
    try {
      set(s.substr(0, eq), s.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(source) + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void Config::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  load(in, path.string());
}

void Config::validate() const {
  try {
    thresholds.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  decode.validate();
  if (validity.min_area < 1) throw ConfigError("min_area must be at least 1");
  if (!(conf_threshold >= 0.0 && conf_threshold <= 1.0)) throw ConfigError("conf_threshold must lie in [0, 1]");
}

PipelineOptions Config::pipeline_options() const {
  PipelineOptions o;
  o.union_mode = union_mode;
  o.relation_rule = relation_rule;
  o.threads = effective_threads();
  return o;
}

unsigned Config::effective_threads() const { return threads > 0 ? threads : default_thread_count(); }

}  // namespace spatialkit
