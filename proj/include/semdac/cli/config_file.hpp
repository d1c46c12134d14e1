#pragma once

#include "semdac/audio/clip.hpp"
#include "semdac/core/common.hpp"
#include "semdac/model/config.hpp"

#include <cstdio>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace semdac {

// Flat `key = value` run configuration covering every training, RVQ and
// decoder knob. Unknown keys are errors; parse -> serialize -> parse is an
// identity on the key set.
struct RunConfig {
  std::string preset = "desk";  // width defaults: desk | paper
  // training
  uint64_t iterations = 2000;
  int batch_size = 8;
  double learning_rate = 1e-4;
  double beta1 = 0.8;
  double beta2 = 0.9;
  double weight_decay = 0.0;
  uint64_t seed = 42;
  uint64_t checkpoint_every = 1000;
  double excerpt_seconds = 0.38;
  double target_lufs = -24.0;
  // model
  int sample_rate = 16000;
  int latent_dim = 64;
  int teacher_dim = 768;
  int semantic_size = 512;
  int n_acoustic = 3;
  int acoustic_size = 1024;
  bool quantizer_dropout = false;
  std::string film = "F0";  // none | F0 | F1 | F2 | F3 | F0+F3 | ...
  std::vector<int> encoder_strides{2, 4, 5, 8};
  std::vector<int> encoder_channels{32, 32, 48, 64, 96};
  std::vector<int> decoder_rates{8, 5, 4, 2};
  std::vector<int> decoder_channels{96, 64, 48, 32, 32};
  int film_hidden = 32;
  std::vector<int> disc_periods{2, 3, 5, 7, 11};
  std::vector<int> disc_channels{16, 32, 64};
  int disc_post_channels = 64;

  std::set<Placement> film_placements() const {
    std::set<Placement> out;
    if (film == "none" || film.empty()) return out;
    size_t pos = 0;
    while (pos < film.size()) {
      size_t plus = film.find('+', pos);
      std::string tok = film.substr(pos, plus == std::string::npos ? plus : plus - pos);
      if (tok == "F0") out.insert(Placement::F0);
      else if (tok == "F1") out.insert(Placement::F1);
      else if (tok == "F2") out.insert(Placement::F2);
      else if (tok == "F3") out.insert(Placement::F3);
      else fail(Err::config, "bad film placement token: " + tok);
      if (plus == std::string::npos) break;
      pos = plus + 1;
    }
    return out;
  }

  ModelConfig model_config() const {
    ModelConfig m = preset == "paper" ? ModelConfig::paper() : ModelConfig::desk();
    require(preset == "desk" || preset == "paper", Err::config, "preset must be desk or paper");
    m.encoder.strides = encoder_strides;
    m.encoder.channels = encoder_channels;
    m.encoder.latent_dim = latent_dim;
    m.decoder.rates = decoder_rates;
    m.decoder.channels = decoder_channels;
    m.decoder.film_placements = film_placements();
    m.decoder.film_hidden = film_hidden;
    m.rvq.semantic_size = semantic_size;
    m.rvq.n_acoustic = n_acoustic;
    m.rvq.acoustic_size = acoustic_size;
    m.rvq.latent_dim = latent_dim;
    m.rvq.quantizer_dropout = quantizer_dropout;
    m.disc.periods = disc_periods;
    m.disc.channels = disc_channels;
    m.disc.post_channels = disc_post_channels;
    m.sample_rate = sample_rate;
    m.teacher_dim = teacher_dim;
    m.validate();
    return m;
  }

  ExcerptSpec excerpt() const { return ExcerptSpec{excerpt_seconds, target_lufs}; }
};

namespace detail {

inline std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline std::vector<int> parse_int_list(const std::string& v, const std::string& key) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    require(!tok.empty(), Err::config, "empty element in list for key: " + key);
    try {
      out.push_back(std::stoi(tok));
    } catch (...) {
      fail(Err::config, "bad integer '" + tok + "' for key: " + key);
    }
  }
  require(!out.empty(), Err::config, "empty list for key: " + key);
  return out;
}

inline std::string fmt_int_list(const std::vector<int>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

inline std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline RunConfig parse_run_config(const std::string& text) {
  RunConfig c;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  // two-pass so `preset` applies its width defaults before overrides
  std::vector<std::pair<std::string, std::string>> kvs;
  while (std::getline(ss, line)) {
    ++lineno;
    std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    size_t eq = t.find('=');
    require(eq != std::string::npos, Err::config,
            "line " + std::to_string(lineno) + " is not 'key = value'");
    std::string key = detail::trim(t.substr(0, eq));
    std::string val = detail::trim(t.substr(eq + 1));
    require(!key.empty(), Err::config, "empty key on line " + std::to_string(lineno));
    kvs.emplace_back(key, val);
  }
  for (const auto& [key, val] : kvs)
    if (key == "preset") {
      require(val == "desk" || val == "paper", Err::config, "preset must be desk or paper");
      c.preset = val;
      if (val == "paper") {
        ModelConfig m = ModelConfig::paper();
        c.encoder_channels = m.encoder.channels;
        c.latent_dim = m.encoder.latent_dim;
        c.decoder_channels = m.decoder.channels;
        c.film_hidden = m.decoder.film_hidden;
        c.disc_channels = m.disc.channels;
        c.disc_post_channels = m.disc.post_channels;
      }
    }

  auto to_u64 = [](const std::string& v, const std::string& key) -> uint64_t {
    try {
      return std::stoull(v);
    } catch (...) {
      fail(Err::config, "bad integer '" + v + "' for key: " + key);
    }
  };
  auto to_int = [](const std::string& v, const std::string& key) -> int {
    try {
      return std::stoi(v);
    } catch (...) {
      fail(Err::config, "bad integer '" + v + "' for key: " + key);
    }
  };
  auto to_double = [](const std::string& v, const std::string& key) -> double {
    try {
      return std::stod(v);
    } catch (...) {
      fail(Err::config, "bad number '" + v + "' for key: " + key);
    }
  };
  auto to_bool = [](const std::string& v, const std::string& key) -> bool {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    fail(Err::config, "bad boolean '" + v + "' for key: " + key);
  };

  for (const auto& [key, val] : kvs) {
    if (key == "preset") continue;  // handled above
    else if (key == "iterations") c.iterations = to_u64(val, key);
    else if (key == "batch_size") c.batch_size = to_int(val, key);
    else if (key == "learning_rate") c.learning_rate = to_double(val, key);
    else if (key == "beta1") c.beta1 = to_double(val, key);
    else if (key == "beta2") c.beta2 = to_double(val, key);
    else if (key == "weight_decay") c.weight_decay = to_double(val, key);
    else if (key == "seed") c.seed = to_u64(val, key);
    else if (key == "checkpoint_every") c.checkpoint_every = to_u64(val, key);
    else if (key == "excerpt_seconds") c.excerpt_seconds = to_double(val, key);
    else if (key == "target_lufs") c.target_lufs = to_double(val, key);
    else if (key == "sample_rate") c.sample_rate = to_int(val, key);
    else if (key == "latent_dim") c.latent_dim = to_int(val, key);
    else if (key == "teacher_dim") c.teacher_dim = to_int(val, key);
    else if (key == "semantic_size") c.semantic_size = to_int(val, key);
    else if (key == "n_acoustic") c.n_acoustic = to_int(val, key);
    else if (key == "acoustic_size") c.acoustic_size = to_int(val, key);
    else if (key == "quantizer_dropout") c.quantizer_dropout = to_bool(val, key);
    else if (key == "film") c.film = val;
    else if (key == "encoder_strides") c.encoder_strides = detail::parse_int_list(val, key);
    else if (key == "encoder_channels") c.encoder_channels = detail::parse_int_list(val, key);
    else if (key == "decoder_rates") c.decoder_rates = detail::parse_int_list(val, key);
    else if (key == "decoder_channels") c.decoder_channels = detail::parse_int_list(val, key);
    else if (key == "film_hidden") c.film_hidden = to_int(val, key);
    else if (key == "disc_periods") c.disc_periods = detail::parse_int_list(val, key);
    else if (key == "disc_channels") c.disc_channels = detail::parse_int_list(val, key);
    else if (key == "disc_post_channels") c.disc_post_channels = to_int(val, key);
    else fail(Err::config, "unknown config key: " + key);
  }
  c.film_placements();  // validates the token list
  return c;
}

inline std::string serialize_run_config(const RunConfig& c) {
  std::string s;
  auto kv = [&](const std::string& k, const std::string& v) { s += k + " = " + v + "\n"; };
  kv("preset", c.preset);
  kv("iterations", std::to_string(c.iterations));
  kv("batch_size", std::to_string(c.batch_size));
  kv("learning_rate", detail::fmt_double(c.learning_rate));
  kv("beta1", detail::fmt_double(c.beta1));
  kv("beta2", detail::fmt_double(c.beta2));
  kv("weight_decay", detail::fmt_double(c.weight_decay));
  kv("seed", std::to_string(c.seed));
  kv("checkpoint_every", std::to_string(c.checkpoint_every));
  kv("excerpt_seconds", detail::fmt_double(c.excerpt_seconds));
  kv("target_lufs", detail::fmt_double(c.target_lufs));
  kv("sample_rate", std::to_string(c.sample_rate));
  kv("latent_dim", std::to_string(c.latent_dim));
  kv("teacher_dim", std::to_string(c.teacher_dim));
  kv("semantic_size", std::to_string(c.semantic_size));
  kv("n_acoustic", std::to_string(c.n_acoustic));
  kv("acoustic_size", std::to_string(c.acoustic_size));
  kv("quantizer_dropout", c.quantizer_dropout ? "true" : "false");
  kv("film", c.film.empty() ? "none" : c.film);
  kv("encoder_strides", detail::fmt_int_list(c.encoder_strides));
  kv("encoder_channels", detail::fmt_int_list(c.encoder_channels));
  kv("decoder_rates", detail::fmt_int_list(c.decoder_rates));
  kv("decoder_channels", detail::fmt_int_list(c.decoder_channels));
  kv("film_hidden", std::to_string(c.film_hidden));
  kv("disc_periods", detail::fmt_int_list(c.disc_periods));
  kv("disc_channels", detail::fmt_int_list(c.disc_channels));
  kv("disc_post_channels", std::to_string(c.disc_post_channels));
  return s;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream f(path);
  require(f.good(), Err::io, "cannot open config file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_run_config(ss.str());
}

}  // namespace semdac
