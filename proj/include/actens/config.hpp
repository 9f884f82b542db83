#pragma once

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "actens/dataset.hpp"
#include "actens/ensemble.hpp"
#include "actens/network.hpp"
#include "actens/protocol.hpp"
#include "actens/text.hpp"

namespace actens {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataSpec {
  std::string type;  // "synthetic" or "csv"
  std::string kind;  // synthetic generator name
  int n = 400;
  double noise = 0.1;
  std::string path;  // csv source
};

struct RunConfig {
  std::string name = "experiment";
  std::uint64_t seed = 0;
  bool seed_set = false;  // wall-clock seeding is not allowed, so the seed is mandatory
  std::string output = "out";
  double max_input = 1.0;
  int folds = 5;
  std::vector<int> hidden = {32, 32};
  int stoc_members = 15;
  bool stoc_per_network = false;
  TrainConfig train;
  std::vector<DataSpec> data;
  std::vector<std::string> models;
};

namespace detail {

inline bool parse_bool(const std::string& s, bool& out) {
  if (s == "true" || s == "1") {
    out = true;
    return true;
  }
  if (s == "false" || s == "0") {
    out = false;
    return true;
  }
  return false;
}

inline std::vector<int> parse_int_list(const std::string& s, const std::string& what) {
  std::vector<int> out;
  for (const auto& tok : split(s, ',')) {
    long long v;
    if (!parse_int(trim(tok), v) || v < 1) throw ConfigError("config: bad " + what + " entry '" + tok + "'");
    out.push_back(static_cast<int>(v));
  }
  if (out.empty()) throw ConfigError("config: empty " + what + " list");
  return out;
}

inline void assign_experiment_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "name") {
    cfg.name = value;
  } else if (key == "seed") {
    long long v;
    if (!parse_int(value, v) || v < 0) throw ConfigError("config: seed must be a non-negative integer");
    cfg.seed = static_cast<std::uint64_t>(v);
    cfg.seed_set = true;
  } else if (key == "output") {
    cfg.output = value;
  } else if (key == "max_input") {
    double v;
    if (!parse_double(value, v) || v <= 0.0) throw ConfigError("config: bad max_input");
    cfg.max_input = v;
  } else if (key == "folds") {
    long long v;
    if (!parse_int(value, v) || v < 2) throw ConfigError("config: folds must be at least 2");
    cfg.folds = static_cast<int>(v);
  } else if (key == "hidden") {
    cfg.hidden = parse_int_list(value, "hidden");
  } else if (key == "stoc_members") {
    long long v;
    if (!parse_int(value, v) || v < 1) throw ConfigError("config: stoc_members must be positive");
    cfg.stoc_members = static_cast<int>(v);
  } else if (key == "stoc_per_network") {
    if (!parse_bool(value, cfg.stoc_per_network)) throw ConfigError("config: bad stoc_per_network");
  } else {
    throw ConfigError("config: unknown [experiment] key '" + key + "'");
  }
}

inline void assign_train_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "lr") {
    if (!parse_double(value, cfg.train.base_lr) || cfg.train.base_lr <= 0)
      throw ConfigError("config: bad lr");
  } else if (key == "batch_size") {
    long long v;
    if (!parse_int(value, v) || v < 1) throw ConfigError("config: bad batch_size");
    cfg.train.batch_size = static_cast<int>(v);
  } else if (key == "epochs") {
    long long v;
    if (!parse_int(value, v) || v < 0) throw ConfigError("config: bad epochs");
    cfg.train.epochs = static_cast<int>(v);
  } else if (key == "last_layer_lr_mult") {
    if (!parse_double(value, cfg.train.last_layer_lr_mult) || cfg.train.last_layer_lr_mult <= 0)
      throw ConfigError("config: bad last_layer_lr_mult");
  } else if (key == "augmentation") {
    if (!parse_bool(value, cfg.train.augmentation)) throw ConfigError("config: bad augmentation");
  } else {
    throw ConfigError("config: unknown [train] key '" + key + "'");
  }
}

// [data] entries: "synthetic <kind> <n> <noise>" or "csv <path>".
inline DataSpec parse_data_line(const std::string& line) {
  std::istringstream is(line);
  DataSpec d;
  is >> d.type;
  if (d.type == "synthetic") {
    if (!(is >> d.kind >> d.n >> d.noise)) throw ConfigError("config: bad [data] line '" + line + "'");
    if (d.n < 10) throw ConfigError("config: synthetic datasets need n >= 10");
  } else if (d.type == "csv") {
    if (!(is >> d.path)) throw ConfigError("config: bad [data] line '" + line + "'");
  } else {
    throw ConfigError("config: unknown [data] entry type '" + d.type + "'");
  }
  std::string rest;
  if (is >> rest) throw ConfigError("config: trailing tokens in [data] line '" + line + "'");
  return d;
}

// Comments run from a '#' or ';' that starts the line or follows whitespace,
// so values themselves may contain either character without an escape.
inline std::string_view strip_comment(std::string_view line) {
  for (std::size_t i = 0; i < line.size(); ++i) {
    if ((line[i] == '#' || line[i] == ';') &&
        (i == 0 || std::isspace(static_cast<unsigned char>(line[i - 1]))))
      return line.substr(0, i);
  }
  return line;
}

}  // namespace detail

// Sectioned key=value format. '#' and ';' introduce comments, whole-line or
// trailing. [models] and [data] sections take one entry per line.
inline RunConfig parse_ini_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line{trim(detail::strip_comment(trim(raw)))};
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("config: line " + std::to_string(lineno) + ": bad section header");
      section = line.substr(1, line.size() - 2);
      if (section != "experiment" && section != "train" && section != "data" && section != "models")
        throw ConfigError("config: unknown section [" + section + "]");
      continue;
    }
    if (section.empty())
      throw ConfigError("config: line " + std::to_string(lineno) + ": entry before any section");
    if (section == "models") {
      cfg.models.emplace_back(line);
      continue;
    }
    if (section == "data") {
      cfg.data.push_back(detail::parse_data_line(line));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lineno) + ": expected key = value");
    const std::string key{trim(line.substr(0, eq))};
    const std::string value{trim(line.substr(eq + 1))};
    if (section == "experiment")
      detail::assign_experiment_key(cfg, key, value);
    else
      detail::assign_train_key(cfg, key, value);
  }
  return cfg;
}

inline RunConfig parse_json_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  RunConfig cfg;
  auto as_string = [](const nlohmann::json& v) {
    return v.is_string() ? v.get<std::string>() : v.dump();
  };
  if (j.contains("experiment"))
    for (const auto& [key, value] : j.at("experiment").items()) {
      if (key == "hidden" && value.is_array()) {
        cfg.hidden = value.get<std::vector<int>>();
        if (cfg.hidden.empty()) throw ConfigError("config: empty hidden list");
      } else {
        detail::assign_experiment_key(cfg, key, as_string(value));
      }
    }
  if (j.contains("train"))
    for (const auto& [key, value] : j.at("train").items())
      detail::assign_train_key(cfg, key, as_string(value));
  if (j.contains("data"))
    for (const auto& e : j.at("data")) {
      DataSpec d;
      d.type = e.at("type").get<std::string>();
      if (d.type == "synthetic") {
        d.kind = e.at("kind").get<std::string>();
        d.n = e.at("n").get<int>();
        d.noise = e.at("noise").get<double>();
        if (d.n < 10) throw ConfigError("config: synthetic datasets need n >= 10");
      } else if (d.type == "csv") {
        d.path = e.at("path").get<std::string>();
      } else {
        throw ConfigError("config: unknown data type '" + d.type + "'");
      }
      cfg.data.push_back(std::move(d));
    }
  if (j.contains("models")) cfg.models = j.at("models").get<std::vector<std::string>>();
  return cfg;
}

inline void validate_config(const RunConfig& cfg) {
  if (!cfg.seed_set) throw ConfigError("config: seed is required (wall-clock seeding is not supported)");
  if (cfg.data.empty()) throw ConfigError("config: no datasets");
  if (cfg.models.empty()) throw ConfigError("config: no models");
  for (const auto& m : cfg.models)
    if (!is_recipe_name(m) && find_activation(m) == nullptr)
      throw ConfigError("config: unknown model or recipe '" + m + "'");
}

inline RunConfig parse_run_config(const std::string& text) {
  std::size_t i = 0;
  while (i < text.size() && (text[i] == ' ' || text[i] == '\t' || text[i] == '\n' || text[i] == '\r'))
    ++i;
  RunConfig cfg =
      (i < text.size() && text[i] == '{') ? parse_json_config(text) : parse_ini_config(text);
  validate_config(cfg);
  return cfg;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline RunConfig load_run_config(const std::string& path) { return parse_run_config(read_file(path)); }

inline std::string config_hash(const std::string& text) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(text)));
  return std::string(buf);
}

// ---------------------------------------------------------------------------
// Config resolution into datasets and model definitions.
// ---------------------------------------------------------------------------

inline std::vector<Dataset> make_datasets(const RunConfig& cfg) {
  std::vector<Dataset> out;
  Rng root = Rng(cfg.seed).child(300);
  for (std::size_t i = 0; i < cfg.data.size(); ++i) {
    const DataSpec& d = cfg.data[i];
    if (d.type == "synthetic")
      out.push_back(make_synthetic(d.kind, d.n, d.noise, root.child(i).seed()));
    else
      out.push_back(load_csv(d.path));
  }
  return out;
}

inline std::vector<EnsembleDef> make_defs(const RunConfig& cfg) {
  std::vector<EnsembleDef> defs;
  Rng root = Rng(cfg.seed).child(2000);
  const int hidden_layers = static_cast<int>(cfg.hidden.size());
  for (std::size_t i = 0; i < cfg.models.size(); ++i) {
    Rng r = root.child(i);
    defs.push_back(recipe(cfg.models[i], cfg.max_input, hidden_layers, cfg.stoc_members, r,
                          cfg.stoc_per_network));
  }
  return defs;
}

inline ProtocolConfig make_protocol_config(const RunConfig& cfg) {
  ProtocolConfig pc;
  pc.train = cfg.train;
  pc.folds = cfg.folds;
  pc.hidden = cfg.hidden;
  pc.master_seed = cfg.seed;
  return pc;
}

}  // namespace actens
