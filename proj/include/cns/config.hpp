// Flat JSON configuration helpers: every experiment option is a top-level
// key; unknown keys are rejected so typos fail fast.

#ifndef CNS_CONFIG_HPP
#define CNS_CONFIG_HPP

#include <fstream>
#include <set>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace cns {

class Config {
 public:
  Config() : j_(nlohmann::json::object()) {}
  explicit Config(nlohmann::json j) : j_(std::move(j)) {
    if (!j_.is_object()) throw std::invalid_argument("config must be a JSON object");
  }

  static Config from_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config: " + path);
    return Config(nlohmann::json::parse(is));
  }
  static Config from_string(const std::string& text) {
    return Config(nlohmann::json::parse(text));
  }

  template <class T>
  T get(const std::string& key, T fallback) const {
    seen_.insert(key);
    if (!j_.contains(key)) return fallback;
    return j_.at(key).get<T>();
  }
  template <class T>
  T require(const std::string& key) const {
    seen_.insert(key);
    if (!j_.contains(key)) throw std::invalid_argument("missing config key: " + key);
    return j_.at(key).get<T>();
  }
  bool has(const std::string& key) const { return j_.contains(key); }

  /** Call after all get/require calls: throws on keys never asked for. */
  void reject_unknown_keys() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw std::invalid_argument("unknown config key: " + it.key());
  }

  const nlohmann::json& json() const { return j_; }

 private:
  nlohmann::json j_;
  mutable std::set<std::string> seen_;
};

}  // namespace cns

#endif  // CNS_CONFIG_HPP
