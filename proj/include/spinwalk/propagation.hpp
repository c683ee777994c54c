#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "spinwalk/bath.hpp"
#include "spinwalk/errors.hpp"
#include "spinwalk/linalg.hpp"
#include "spinwalk/rng.hpp"

namespace spinwalk {

/// exp(-i theta/2 * n.sigma) = cos(theta/2) 1 - i sin(theta/2) n.sigma
/// for a unit axis n. The closed form of every per-spin propagator.
inline Matrix2cd axis_rotation(double theta, double nx, double ny, double nz) {
  const double c = std::cos(0.5 * theta);
  const double s = std::sin(0.5 * theta);
  Matrix2cd u;
  u(0, 0) = complexd(c, -s * nz);
  u(0, 1) = complexd(-s * ny, -s * nx);
  u(1, 0) = complexd(s * ny, -s * nx);
  u(1, 1) = complexd(c, s * nz);
  return u;
}

/// Propagator block for one spin conditioned on the central-spin sign.
/// Axis (sign*gx, sign*gy, omega + sign*gz), rotation angle t*|axis|.
inline Matrix2cd conditional_block(const SpinCoupling& g, double omega, double t,
                                   int sign) {
  const double ax = sign * g.gx;
  const double ay = sign * g.gy;
  const double az = omega + sign * g.gz;
  const double norm = std::sqrt(ax * ax + ay * ay + az * az);
  if (norm == 0.0) return Matrix2cd::Identity();
  return axis_rotation(t * norm, ax / norm, ay / norm, az / norm);
}

/// Per-spin conditional propagator blocks u_k^{+-}(t). The full-space
/// operators are assembled on demand, never stored.
struct ConditionalPropagators {
  std::vector<Matrix2cd> per_spin_plus;
  std::vector<Matrix2cd> per_spin_minus;
  double contact_time = 0.0;

  int n_spins() const { return static_cast<int>(per_spin_plus.size()); }

  MatrixXcd full_plus() const { return assemble(per_spin_plus); }
  MatrixXcd full_minus() const { return assemble(per_spin_minus); }

 private:
  MatrixXcd assemble(const std::vector<Matrix2cd>& blocks) const {
    if (static_cast<int>(blocks.size()) > kMaxDensitySpins)
      throw EngineLimitError("full-space assembly capped at " +
                             std::to_string(kMaxDensitySpins) + " spins");
    return tensor_product(blocks);
  }
};

inline ConditionalPropagators conditional_unitaries(const BathSpec& spec, double t) {
  spec.validate();
  if (t < 0.0) throw ConfigError("contact time must be >= 0");
  ConditionalPropagators props;
  props.contact_time = t;
  props.per_spin_plus.reserve(spec.couplings.size());
  props.per_spin_minus.reserve(spec.couplings.size());
  for (const auto& g : spec.couplings) {
    props.per_spin_plus.push_back(conditional_block(g, spec.zeeman, t, +1));
    props.per_spin_minus.push_back(conditional_block(g, spec.zeeman, t, -1));
  }
  return props;
}

/// Measurement operators V+- = (U+ +- U-)/2 on the full bath space.
struct KrausPair {
  MatrixXcd v_plus;
  MatrixXcd v_minus;
  double contact_time = 0.0;
};

inline KrausPair kraus_pair(const ConditionalPropagators& props) {
  MatrixXcd up = props.full_plus();
  MatrixXcd um = props.full_minus();
  KrausPair pair;
  pair.contact_time = props.contact_time;
  pair.v_plus = 0.5 * (up + um);
  pair.v_minus = 0.5 * (up - um);
  return pair;
}

/// One spin's contribution to the coherence: (1/2) Tr[u^+ u^-dag], which is
/// real: cos(a/2)cos(b/2) + sin(a/2)sin(b/2)(n_+ . n_-).
inline double coherence_factor(const SpinCoupling& g, double omega, double t) {
  const double axp = g.gx, ayp = g.gy, azp = omega + g.gz;
  const double axm = -g.gx, aym = -g.gy, azm = omega - g.gz;
  const double np = std::sqrt(axp * axp + ayp * ayp + azp * azp);
  const double nm = std::sqrt(axm * axm + aym * aym + azm * azm);
  const double cp = std::cos(0.5 * t * np), sp = std::sin(0.5 * t * np);
  const double cm = std::cos(0.5 * t * nm), sm = std::sin(0.5 * t * nm);
  double dot = 0.0;
  if (np > 0.0 && nm > 0.0) dot = (axp * axm + ayp * aym + azp * azm) / (np * nm);
  return cp * cm + sp * sm * dot;
}

/// Central-spin coherence C(t) for a maximally mixed bath:
/// Re prod_k (1/2) Tr[u_k^+(t) u_k^-(t)^dag].
inline double fid(const BathSpec& spec, double t) {
  spec.validate();
  if (t < 0.0) throw ConfigError("time must be >= 0");
  double c = 1.0;
  for (const auto& g : spec.couplings) c *= coherence_factor(g, spec.zeeman, t);
  return c;
}

/// Mean fid over a fixed ensemble of unit-scale specs, evaluated with every
/// coupling multiplied by s.
inline double ensemble_mean_fid(const std::vector<BathSpec>& base, double s,
                                double t) {
  double acc = 0.0;
  for (const auto& spec : base) acc += fid(spec.scaled(s), t);
  return acc / static_cast<double>(base.size());
}

/// Mean per-spin coherence factor over the ensemble. The couplings are
/// i.i.d. across spins and draws, so the ensemble-mean fid is this raised to
/// the N-th power; its first zero is where the mean fid reaches zero, and
/// unlike the mean of products it crosses transversally for even N.
inline double ensemble_mean_factor(const std::vector<BathSpec>& base, double s,
                                   double t) {
  double acc = 0.0;
  long count = 0;
  for (const auto& spec : base) {
    for (const auto& g : spec.couplings) {
      acc += coherence_factor({s * g.gx, s * g.gy, s * g.gz}, spec.zeeman, t);
      ++count;
    }
  }
  return acc / static_cast<double>(count);
}

/// First time in (0, t_max] where curve(t) dips below the level, refined by
/// bisection; +inf when it never does.
template <class Curve>
double first_crossing_time(Curve&& curve, double level, double t_max) {
  constexpr int kCoarse = 512;
  double prev = 0.0;
  for (int j = 1; j <= kCoarse; ++j) {
    const double t = t_max * j / kCoarse;
    if (curve(t) < level) {
      double lo = prev, hi = t;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (curve(mid) < level ? hi : lo) = mid;
      }
      return 0.5 * (lo + hi);
    }
    prev = t;
  }
  return std::numeric_limits<double>::infinity();
}

/// Which level of the ensemble-mean decay curve the calibration pins to
/// target_t2star: the 1/e crossing, or the point where the decay first
/// reaches zero (full depolarization).
enum class CalibrationCrossing { one_over_e, depolarized };

/// Finds the coupling scale whose ensemble-averaged fid first crosses the
/// chosen level at target_t2star. Bisection on the scale over a frozen
/// ensemble of unit-scale draws, so the objective is deterministic. The
/// depolarized mode tracks the zero of the mean per-spin factor (the N-th
/// root of the mean fid), which crosses cleanly for every N. At zero Zeeman
/// frequency the scale covariance C(t; s*g) = C(s*t; g) turns the search
/// into a single crossing-time measurement.
inline double calibrate_coupling_scale(
    int n_spins, double zeeman, double target_t2star, RandomStream& rng,
    CalibrationCrossing crossing = CalibrationCrossing::depolarized,
    int n_ensemble = 128) {
  if (!(target_t2star > 0.0)) throw ConfigError("target_t2star must be > 0");
  if (n_spins < 1) throw ConfigError("n_spins must be >= 1");
  if (n_ensemble < 100) throw ConfigError("calibration needs >= 100 ensemble draws");

  std::vector<BathSpec> base;
  base.reserve(static_cast<std::size_t>(n_ensemble));
  for (int j = 0; j < n_ensemble; ++j)
    base.push_back(sample_bath_spec(n_spins, 1.0, zeeman, rng));

  const bool depolarized = crossing == CalibrationCrossing::depolarized;
  const double level = depolarized ? 0.0 : std::exp(-1.0);
  auto curve_at = [&](double s) {
    return [&, s](double t) {
      return depolarized ? ensemble_mean_factor(base, s, t)
                         : ensemble_mean_fid(base, s, t);
    };
  };
  const auto out_of_bracket = [] {
    return CalibrationError("no scale in [1e-3, 1e3] rad/us puts the crossing there");
  };

  if (zeeman == 0.0) {
    double t0 = std::numeric_limits<double>::infinity();
    for (double t_max = 8.0; t_max <= 8192.0; t_max *= 4.0) {
      t0 = first_crossing_time(curve_at(1.0), level, t_max);
      if (std::isfinite(t0)) break;
    }
    if (!std::isfinite(t0))
      throw CalibrationError("ensemble-mean fid never reaches the level");
    const double scale = t0 / target_t2star;
    if (scale < 1e-3 || scale > 1e3) throw out_of_bracket();
    return scale;
  }

  auto crossed_by_target = [&](double s) {
    return std::isfinite(first_crossing_time(curve_at(s), level, target_t2star));
  };
  double lo = 1e-3, hi = 1e3;
  if (crossed_by_target(lo) || !crossed_by_target(hi)) throw out_of_bracket();
  for (int it = 0; it < 48; ++it) {
    const double mid = std::sqrt(lo * hi);
    (crossed_by_target(mid) ? hi : lo) = mid;
  }
  return std::sqrt(lo * hi);
}

}  // namespace spinwalk
