#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <json.hpp>

#include "spinwalk/bath.hpp"
#include "spinwalk/errors.hpp"
#include "spinwalk/rng.hpp"
#include "spinwalk/trajectory.hpp"

namespace spinwalk {

/// Bath distribution function G(omega): a normalized spectral density of the
/// effective field, either continuous (gaussian, uniform on [-bound, bound])
/// or a list of weighted atoms.
struct SpectralDensity {
  enum class Kind { gaussian, uniform, discrete };

  Kind kind = Kind::gaussian;
  double gamma = 1.0;   // gaussian width, rad/us
  double bound = 1.0;   // uniform half-support, rad/us
  std::vector<std::pair<double, double>> atoms;  // (omega, weight)

  static SpectralDensity gaussian_density(double gamma) {
    if (!(gamma > 0.0)) throw ConfigError("gaussian width must be > 0");
    SpectralDensity g;
    g.kind = Kind::gaussian;
    g.gamma = gamma;
    return g;
  }

  static SpectralDensity uniform_density(double bound) {
    if (!(bound > 0.0)) throw ConfigError("uniform support bound must be > 0");
    SpectralDensity g;
    g.kind = Kind::uniform;
    g.bound = bound;
    return g;
  }

  static SpectralDensity discrete_density(
      std::vector<std::pair<double, double>> atoms) {
    SpectralDensity g;
    g.kind = Kind::discrete;
    g.atoms = std::move(atoms);
    g.validate();
    return g;
  }

  void validate() const {
    switch (kind) {
      case Kind::gaussian:
        if (!(gamma > 0.0)) throw ConfigError("gaussian width must be > 0");
        return;
      case Kind::uniform:
        if (!(bound > 0.0)) throw ConfigError("uniform support bound must be > 0");
        return;
      case Kind::discrete: {
        if (atoms.empty()) throw ConfigError("discrete density needs atoms");
        double total = 0.0;
        for (const auto& [omega, weight] : atoms) {
          if (!std::isfinite(omega)) throw ConfigError("atom frequency not finite");
          if (!(weight > 0.0)) throw ConfigError("atom weights must be > 0");
          total += weight;
        }
        if (std::abs(total - 1.0) > 1e-10)
          throw ConfigError("atom weights must sum to 1");
        return;
      }
    }
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    switch (kind) {
      case Kind::gaussian:
        j["kind"] = "gaussian";
        j["gamma"] = gamma;
        break;
      case Kind::uniform:
        j["kind"] = "uniform";
        j["bound"] = bound;
        break;
      case Kind::discrete: {
        j["kind"] = "discrete";
        auto arr = nlohmann::json::array();
        for (const auto& [omega, weight] : atoms) arr.push_back({omega, weight});
        j["atoms"] = std::move(arr);
        break;
      }
    }
    return j;
  }

  static SpectralDensity from_json(const nlohmann::json& j) {
    SpectralDensity g;
    try {
      const std::string kind = j.at("kind").get<std::string>();
      if (kind == "gaussian") {
        g.kind = Kind::gaussian;
        g.gamma = j.at("gamma").get<double>();
      } else if (kind == "uniform") {
        g.kind = Kind::uniform;
        g.bound = j.at("bound").get<double>();
      } else if (kind == "discrete") {
        g.kind = Kind::discrete;
        for (const auto& row : j.at("atoms")) {
          if (!row.is_array() || row.size() != 2)
            throw ConfigError("each atom must be an [omega, weight] pair");
          g.atoms.emplace_back(row[0].get<double>(), row[1].get<double>());
        }
      } else {
        throw ConfigError("unknown spectral density kind: " + kind);
      }
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("invalid spectral density JSON: ") + e.what());
    }
    g.validate();
    return g;
  }

  static SpectralDensity load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read spectral density from " + path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("invalid JSON in " + path + ": " + e.what());
    }
    return from_json(j);
  }
};

/// C(t) = integral domega G(omega) cos(omega t): adaptive Gauss-Kronrod for
/// the continuous kinds (gaussian support truncated at 10 gamma, which
/// contributes < 1e-20), exact sum for atoms.
inline double coherence_classical(const SpectralDensity& g, double t) {
  g.validate();
  if (t < 0.0) throw ConfigError("time must be >= 0");
  using quad = boost::math::quadrature::gauss_kronrod<double, 61>;
  constexpr double rel_tol = 1e-9;
  double error = 0.0;
  double value = 0.0;
  switch (g.kind) {
    case SpectralDensity::Kind::gaussian: {
      const double gamma = g.gamma;
      const double norm = 1.0 / (gamma * std::sqrt(2.0 * std::acos(-1.0)));
      auto kernel = [gamma, norm, t](double w) {
        return norm * std::exp(-0.5 * w * w / (gamma * gamma)) * std::cos(w * t);
      };
      value = quad::integrate(kernel, -10.0 * gamma, 10.0 * gamma, 15, rel_tol,
                              &error);
      break;
    }
    case SpectralDensity::Kind::uniform: {
      const double b = g.bound;
      const double density = 0.5 / b;
      auto kernel = [density, t](double w) { return density * std::cos(w * t); };
      value = quad::integrate(kernel, -b, b, 15, rel_tol, &error);
      break;
    }
    case SpectralDensity::Kind::discrete: {
      for (const auto& [omega, weight] : g.atoms)
        value += weight * std::cos(omega * t);
      return value;
    }
  }
  if (error > rel_tol * std::max(1.0, std::abs(value)))
    throw QuadratureError("coherence integral did not converge to 1e-9");
  return value;
}

/// One field draw b ~ G.
inline double sample_field(const SpectralDensity& g, RandomStream& rng) {
  switch (g.kind) {
    case SpectralDensity::Kind::gaussian:
      return g.gamma * rng.normal();
    case SpectralDensity::Kind::uniform:
      return g.bound * (2.0 * rng.uniform() - 1.0);
    case SpectralDensity::Kind::discrete: {
      const double u = rng.uniform();
      double cum = 0.0;
      for (const auto& [omega, weight] : g.atoms) {
        cum += weight;
        if (u < cum) return omega;
      }
      return g.atoms.back().first;
    }
  }
  throw ConfigError("unknown spectral density kind");
}

/// R strings of n bits, i.i.d. with P(0) = p0.
inline std::vector<MeasurementRecord> iid_coin_records(double p0, int n, long R,
                                                       RandomStream& rng) {
  if (!(p0 >= 0.0 && p0 <= 1.0)) throw ConfigError("p0 must be in [0, 1]");
  if (n < 1) throw ConfigError("n must be >= 1");
  if (R < 1) throw ConfigError("R must be >= 1");
  std::vector<MeasurementRecord> records(static_cast<std::size_t>(R));
  for (long i = 0; i < R; ++i) {
    auto& rec = records[static_cast<std::size_t>(i)];
    rec.run_index = i;
    rec.bits.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j)
      rec.bits.push_back(rng.bernoulli(p0) ? 0 : 1);
  }
  return records;
}

/// Static classical field: one b ~ G per run, held fixed; each bit is 0 with
/// probability cos^2(b tau / 2), i.i.d. given b.
inline std::vector<MeasurementRecord> static_field_records(const SpectralDensity& g,
                                                           double tau, int n, long R,
                                                           RandomStream& rng) {
  g.validate();
  if (tau < 0.0) throw ConfigError("tau must be >= 0");
  if (n < 1) throw ConfigError("n must be >= 1");
  if (R < 1) throw ConfigError("R must be >= 1");
  std::vector<MeasurementRecord> records(static_cast<std::size_t>(R));
  for (long i = 0; i < R; ++i) {
    auto& rec = records[static_cast<std::size_t>(i)];
    rec.run_index = i;
    rec.bits.reserve(static_cast<std::size_t>(n));
    const double b = sample_field(g, rng);
    const double c = std::cos(0.5 * b * tau);
    const double p0 = c * c;
    for (int j = 0; j < n; ++j)
      rec.bits.push_back(rng.bernoulli(p0) ? 0 : 1);
  }
  return records;
}

/// The discrete G that makes the static-field model reproduce a commuting
/// (zeeman 0, z-only couplings) bath exactly: atoms at the transition
/// frequencies sum_k s_k g_kz over sign patterns s, so the per-run bit
/// probability cos^2(b tau / 2) matches the per-eigenstate quantum value.
inline SpectralDensity matched_discrete_spectrum(const BathSpec& spec) {
  spec.validate();
  if (spec.zeeman != 0.0)
    throw ConfigError("matched spectrum requires zeeman = 0");
  for (const auto& g : spec.couplings)
    if (g.gx != 0.0 || g.gy != 0.0)
      throw ConfigError("matched spectrum requires z-only couplings");
  const int n = spec.n_spins();
  if (n > kMaxEnumerationBits)
    throw EngineLimitError("matched spectrum capped at " +
                           std::to_string(kMaxEnumerationBits) + " spins");
  std::map<double, double> mass;
  const std::size_t patterns = std::size_t{1} << n;
  const double weight = 1.0 / static_cast<double>(patterns);
  for (std::size_t s = 0; s < patterns; ++s) {
    double omega = 0.0;
    for (int k = 0; k < n; ++k)
      omega += (s >> k & 1 ? -1.0 : 1.0) * spec.couplings[static_cast<std::size_t>(k)].gz;
    mass[omega] += weight;
  }
  std::vector<std::pair<double, double>> atoms(mass.begin(), mass.end());
  return SpectralDensity::discrete_density(std::move(atoms));
}

}  // namespace spinwalk
