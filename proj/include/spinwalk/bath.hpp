#pragma once

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinwalk/errors.hpp"
#include "spinwalk/rng.hpp"

namespace spinwalk {

/// Hard engine limits. Beyond these the engines refuse instead of degrading.
inline constexpr int kMaxPureSpins = 14;      // pure-state operations
inline constexpr int kMaxDensitySpins = 10;   // density-operator operations
inline constexpr int kMaxEnumerationBits = 20;

/// Dipolar coupling vector of one bath spin, rad/us, in the central-spin frame.
struct SpinCoupling {
  double gx = 0.0;
  double gy = 0.0;
  double gz = 0.0;

  double magnitude() const { return std::sqrt(gx * gx + gy * gy + gz * gz); }
  bool finite() const {
    return std::isfinite(gx) && std::isfinite(gy) && std::isfinite(gz);
  }
};

/// A bath of N non-interacting spin-1/2 particles: per-spin coupling vectors
/// and a uniform Zeeman frequency. List order is the canonical spin index.
struct BathSpec {
  std::vector<SpinCoupling> couplings;
  double zeeman = 0.0;  // rad/us
  std::string seed_tag;

  int n_spins() const { return static_cast<int>(couplings.size()); }

  void validate() const {
    if (couplings.empty()) throw ConfigError("bath must contain at least one spin");
    if (!std::isfinite(zeeman)) throw ConfigError("zeeman frequency must be finite");
    for (const auto& g : couplings)
      if (!g.finite()) throw ConfigError("coupling components must be finite");
  }

  /// Same bath with every coupling vector multiplied by s.
  BathSpec scaled(double s) const {
    BathSpec out = *this;
    for (auto& g : out.couplings) {
      g.gx *= s;
      g.gy *= s;
      g.gz *= s;
    }
    return out;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["zeeman"] = zeeman;
    auto arr = nlohmann::json::array();
    for (const auto& g : couplings) arr.push_back({g.gx, g.gy, g.gz});
    j["couplings"] = std::move(arr);
    j["seed_tag"] = seed_tag;
    return j;
  }

  static BathSpec from_json(const nlohmann::json& j) {
    BathSpec spec;
    try {
      spec.zeeman = j.at("zeeman").get<double>();
      for (const auto& row : j.at("couplings")) {
        if (!row.is_array() || row.size() != 3)
          throw ConfigError("each coupling must be a [gx, gy, gz] triple");
        spec.couplings.push_back({row[0].get<double>(), row[1].get<double>(),
                                  row[2].get<double>()});
      }
      spec.seed_tag = j.value("seed_tag", std::string{});
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("invalid bath spec JSON: ") + e.what());
    }
    spec.validate();
    return spec;
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write bath spec to " + path);
    out << to_json().dump(2) << '\n';
  }

  static BathSpec load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read bath spec from " + path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("invalid JSON in " + path + ": " + e.what());
    }
    return from_json(j);
  }
};

/// Draws a bath with every coupling component i.i.d. normal with standard
/// deviation coupling_scale. Deterministic given the stream.
inline BathSpec sample_bath_spec(int n_spins, double coupling_scale, double zeeman,
                                 RandomStream& rng, std::string seed_tag = {}) {
  if (n_spins < 1) throw ConfigError("n_spins must be >= 1");
  if (!(coupling_scale > 0.0)) throw ConfigError("coupling_scale must be > 0");
  BathSpec spec;
  spec.zeeman = zeeman;
  spec.seed_tag = std::move(seed_tag);
  spec.couplings.reserve(static_cast<std::size_t>(n_spins));
  for (int k = 0; k < n_spins; ++k) {
    SpinCoupling g;
    g.gx = coupling_scale * rng.normal();
    g.gy = coupling_scale * rng.normal();
    g.gz = coupling_scale * rng.normal();
    spec.couplings.push_back(g);
  }
  spec.validate();
  return spec;
}

}  // namespace spinwalk
