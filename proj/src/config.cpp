#include "docner/config.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "docner/error.hpp"
#include "docner/rng.hpp"

namespace docner {

namespace {

struct IntField {
  const char* name;
  int Config::* ptr;
};
struct DoubleField {
  const char* name;
  double Config::* ptr;
};
struct BoolField {
  const char* name;
  bool Config::* ptr;
};

constexpr IntField kIntFields[] = {
    {"word_dim", &Config::word_dim},
    {"char_dim", &Config::char_dim},
    {"char_hidden", &Config::char_hidden},
    {"word_hidden", &Config::word_hidden},
    {"sent_hidden", &Config::sent_hidden},
    {"unc_hidden", &Config::unc_hidden},
    {"window", &Config::window},
    {"sample_size", &Config::sample_size},
    {"mc_passes", &Config::mc_passes},
    {"batch_sentences", &Config::batch_sentences},
    {"max_epochs", &Config::max_epochs},
    {"patience", &Config::patience},
};

constexpr DoubleField kDoubleFields[] = {
    {"dropout", &Config::dropout},
    {"unc_dropout", &Config::unc_dropout},
    {"threshold", &Config::threshold},
    {"theta", &Config::theta},
    {"unc_weight", &Config::unc_weight},
    {"lr", &Config::lr},
    {"l2", &Config::l2},
    {"clip_norm", &Config::clip_norm},
};

constexpr BoolField kBoolFields[] = {
    {"use_xsent", &Config::use_xsent},
    {"use_graph", &Config::use_graph},
    {"use_edge_weights", &Config::use_edge_weights},
    {"use_pruning", &Config::use_pruning},
    {"aux_full_neighbors", &Config::aux_full_neighbors},
    {"constrained_decode", &Config::constrained_decode},
};

bool parse_bool(const std::string& v, const std::string& where) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw DataError(where + ": expected true/false, got \"" + v + "\"");
}

}  // namespace

void Config::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0)) {
      throw DataError(std::string("config: ") + name + " must be positive");
    }
  };
  positive(word_dim, "word_dim");
  positive(char_dim, "char_dim");
  positive(char_hidden, "char_hidden");
  positive(word_hidden, "word_hidden");
  positive(sent_hidden, "sent_hidden");
  positive(unc_hidden, "unc_hidden");
  positive(sample_size, "sample_size");
  positive(mc_passes, "mc_passes");
  positive(lr, "lr");
  positive(clip_norm, "clip_norm");
  positive(batch_sentences, "batch_sentences");
  positive(max_epochs, "max_epochs");
  positive(patience, "patience");
  if (window < 0) {
    throw DataError("config: window must be >= 0");
  }
  if (dropout < 0 || dropout >= 1 || unc_dropout < 0 || unc_dropout >= 1) {
    throw DataError("config: dropout rates must be in [0,1)");
  }
  if (l2 < 0 || theta < 0 || unc_weight < 0 || threshold < 0) {
    throw DataError("config: l2/theta/unc_weight/threshold must be >= 0");
  }
}

Config parse_config_text(const std::string& text, const std::string& origin) {
  Config cfg;
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) {
      line = line.substr(0, hash);
    }
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
      continue;
    }
    auto eq = line.find('=');
    std::string where = origin + ":" + std::to_string(line_no);
    if (eq == std::string::npos) {
      throw ParseError(where + ": expected key=value");
    }
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    bool found = false;
    try {
      for (const auto& f : kIntFields) {
        if (key == f.name) {
          cfg.*(f.ptr) = std::stoi(val);
          found = true;
          break;
        }
      }
      if (!found) {
        for (const auto& f : kDoubleFields) {
          if (key == f.name) {
            cfg.*(f.ptr) = std::stod(val);
            found = true;
            break;
          }
        }
      }
      if (!found) {
        for (const auto& f : kBoolFields) {
          if (key == f.name) {
            cfg.*(f.ptr) = parse_bool(val, where);
            found = true;
            break;
          }
        }
      }
      if (!found && key == "seed") {
        cfg.seed = std::stoull(val);
        found = true;
      }
    } catch (const std::invalid_argument&) {
      throw ParseError(where + ": bad value \"" + val + "\" for " + key);
    } catch (const std::out_of_range&) {
      throw ParseError(where + ": value out of range for " + key);
    }
    if (!found) {
      throw DataError(where + ": unknown config key \"" + key + "\"");
    }
  }
  cfg.validate();
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) {
    throw ParseError("cannot open config: " + path);
  }
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_config_text(buf.str(), path);
}

std::string canonical_config(const Config& cfg) {
  std::ostringstream os;
  os.precision(17);
  for (const auto& f : kIntFields) {
    os << f.name << "=" << cfg.*(f.ptr) << "\n";
  }
  for (const auto& f : kDoubleFields) {
    os << f.name << "=" << cfg.*(f.ptr) << "\n";
  }
  for (const auto& f : kBoolFields) {
    os << f.name << "=" << (cfg.*(f.ptr) ? "true" : "false") << "\n";
  }
  os << "seed=" << cfg.seed << "\n";
  return os.str();
}

std::uint64_t config_hash(const Config& cfg) {
  return fnv1a(canonical_config(cfg));
}

nlohmann::json config_to_json(const Config& cfg) {
  nlohmann::json j;
  for (const auto& f : kIntFields) {
    j[f.name] = cfg.*(f.ptr);
  }
  for (const auto& f : kDoubleFields) {
    j[f.name] = cfg.*(f.ptr);
  }
  for (const auto& f : kBoolFields) {
    j[f.name] = cfg.*(f.ptr);
  }
  j["seed"] = cfg.seed;
  return j;
}

Config config_from_json(const nlohmann::json& j) {
  Config cfg;
  for (const auto& f : kIntFields) {
    cfg.*(f.ptr) = j.at(f.name).get<int>();
  }
  for (const auto& f : kDoubleFields) {
    cfg.*(f.ptr) = j.at(f.name).get<double>();
  }
  for (const auto& f : kBoolFields) {
    cfg.*(f.ptr) = j.at(f.name).get<bool>();
  }
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.validate();
  return cfg;
}

}  // namespace docner
