#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "spinwalk/bath.hpp"
#include "spinwalk/errors.hpp"
#include "spinwalk/linalg.hpp"
#include "spinwalk/propagation.hpp"
#include "spinwalk/rng.hpp"
#include "spinwalk/state.hpp"

namespace spinwalk {

/// Bit strings are indexed with the first measurement as the most
/// significant bit: "0110" -> 6.
inline std::string index_to_bits(std::uint64_t index, int n_bits) {
  std::string s(static_cast<std::size_t>(n_bits), '0');
  for (int j = 0; j < n_bits; ++j)
    if (index >> (n_bits - 1 - j) & 1) s[static_cast<std::size_t>(j)] = '1';
  return s;
}

inline std::uint64_t bits_to_index(const std::string& bits) {
  if (bits.empty() || bits.size() > 63)
    throw DataFormatError("bit string length must be in [1, 63]");
  std::uint64_t idx = 0;
  for (char c : bits) {
    if (c != '0' && c != '1')
      throw DataFormatError("bit string may contain only '0' and '1'");
    idx = idx << 1 | static_cast<std::uint64_t>(c - '0');
  }
  return idx;
}

enum class Engine { exact_enumeration, monte_carlo };

/// One repeated prepare-evolve-measure experiment.
struct ProtocolConfig {
  double contact_time = 0.0;  // us
  int n_measurements = 1;
  long n_repetitions = 1;
  double readout_error = 0.01;
  Engine engine = Engine::monte_carlo;
  std::optional<BathState> initial_bath;  // empty = maximally mixed

  void validate(int bath_spins) const {
    if (contact_time < 0.0) throw ConfigError("contact_time must be >= 0");
    if (n_measurements < 1) throw ConfigError("n_measurements must be >= 1");
    if (n_repetitions < 1) throw ConfigError("n_repetitions must be >= 1");
    if (!(readout_error >= 0.0 && readout_error <= 1.0))
      throw ConfigError("readout_error must be in [0, 1]");
    if (initial_bath && initial_bath->n_spins() != bath_spins)
      throw ConfigError("initial bath dimension does not match the spec");
    if (engine == Engine::exact_enumeration) {
      if (n_measurements > kMaxEnumerationBits)
        throw EngineLimitError("exact enumeration capped at " +
                               std::to_string(kMaxEnumerationBits) + " bits");
      if (bath_spins > kMaxDensitySpins)
        throw EngineLimitError("exact enumeration capped at " +
                               std::to_string(kMaxDensitySpins) + " spins");
    } else if (bath_spins > kMaxPureSpins) {
      throw EngineLimitError("monte-carlo engine capped at " +
                             std::to_string(kMaxPureSpins) + " spins");
    }
  }
};

/// The ordered bit record of one run.
struct MeasurementRecord {
  std::vector<std::uint8_t> bits;
  long run_index = 0;
};

/// p(M) over all 2^n strings of length n_bits, indexed MSB-first.
struct StringDistribution {
  enum class Source { exact, empirical };

  int n_bits = 0;
  std::vector<double> probabilities;
  Source source = Source::exact;

  double probability(const std::string& bits) const {
    if (static_cast<int>(bits.size()) != n_bits)
      throw DataFormatError("bit string length does not match the distribution");
    return probabilities[bits_to_index(bits)];
  }

  void validate() const {
    if (n_bits < 1 || n_bits > kMaxEnumerationBits)
      throw ConfigError("distribution width out of range");
    if (probabilities.size() != (std::size_t{1} << n_bits))
      throw ConfigError("distribution size does not match its width");
    double sum = 0.0;
    for (double p : probabilities) {
      if (p < -1e-12) throw ConfigError("negative probability entry");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw ConfigError("probabilities do not sum to 1");
  }
};

inline std::pair<double, double> measurement_probabilities(const KrausPair& kraus,
                                                           const BathState& state) {
  if (kraus.v_plus.rows() != state.dim())
    throw ConfigError("Kraus pair and bath state dimensions differ");
  if (state.is_pure()) {
    const double p0 = (kraus.v_plus * state.vector()).squaredNorm();
    const double p1 = (kraus.v_minus * state.vector()).squaredNorm();
    return {p0, p1};
  }
  const MatrixXcd& rho = state.matrix();
  const double p0 =
      (kraus.v_plus * rho).cwiseProduct(kraus.v_plus.conjugate()).sum().real();
  const double p1 =
      (kraus.v_minus * rho).cwiseProduct(kraus.v_minus.conjugate()).sum().real();
  return {p0, p1};
}

/// Threshold below which an outcome no longer supports conditioning.
inline constexpr double kDegenerateOutcome = 1e-14;

inline BathState collapse(const KrausPair& kraus, const BathState& state,
                          int outcome) {
  if (outcome != 0 && outcome != 1) throw ConfigError("outcome must be 0 or 1");
  const MatrixXcd& v = outcome == 0 ? kraus.v_plus : kraus.v_minus;
  if (v.rows() != state.dim())
    throw ConfigError("Kraus pair and bath state dimensions differ");
  if (state.is_pure()) {
    VectorXcd phi = v * state.vector();
    const double p = phi.squaredNorm();
    if (p < kDegenerateOutcome)
      throw EngineLimitError("collapse onto an outcome of probability < 1e-14");
    return BathState::pure(phi / std::sqrt(p));
  }
  MatrixXcd rho = v * state.matrix() * v.adjoint();
  const double p = rho.trace().real();
  if (p < kDegenerateOutcome)
    throw EngineLimitError("collapse onto an outcome of probability < 1e-14");
  return BathState::density(rho / p);
}

/// Samples one run. The maximally mixed bath is unraveled as a uniformly
/// random computational-basis state; readout error flips the recorded bit
/// only, the bath collapses per the true outcome.
inline MeasurementRecord run_trajectory(const BathSpec& spec,
                                        const ProtocolConfig& protocol,
                                        RandomStream& rng) {
  const int n = spec.n_spins();
  protocol.validate(n);
  if (protocol.engine != Engine::monte_carlo)
    throw ConfigError("run_trajectory samples with the monte-carlo engine");
  if (protocol.initial_bath && !protocol.initial_bath->is_pure())
    throw ConfigError(
        "monte-carlo runs start from a pure or maximally mixed bath");

  const Eigen::Index dim = Eigen::Index{1} << n;
  VectorXcd psi;
  if (protocol.initial_bath) {
    psi = protocol.initial_bath->vector();
  } else {
    psi = VectorXcd::Zero(dim);
    psi(static_cast<Eigen::Index>(rng.integer(static_cast<std::uint64_t>(dim)))) =
        1.0;
  }

  const ConditionalPropagators props =
      conditional_unitaries(spec, protocol.contact_time);

  MeasurementRecord record;
  record.bits.reserve(static_cast<std::size_t>(protocol.n_measurements));
  VectorXcd a(dim), b(dim);
  for (int step = 0; step < protocol.n_measurements; ++step) {
    a = psi;
    b = psi;
    for (int k = 0; k < n; ++k) {
      apply_single_spin(a, props.per_spin_plus[static_cast<std::size_t>(k)], k, n);
      apply_single_spin(b, props.per_spin_minus[static_cast<std::size_t>(k)], k, n);
    }
    const VectorXcd phi0 = 0.5 * (a + b);
    const double p0 = phi0.squaredNorm();
    const int outcome = rng.uniform() < p0 ? 0 : 1;
    if (outcome == 0) {
      if (p0 < kDegenerateOutcome)
        throw EngineLimitError("trajectory hit an outcome of probability < 1e-14");
      psi = phi0 / std::sqrt(p0);
    } else {
      const VectorXcd phi1 = 0.5 * (a - b);
      const double p1 = phi1.squaredNorm();
      if (p1 < kDegenerateOutcome)
        throw EngineLimitError("trajectory hit an outcome of probability < 1e-14");
      psi = phi1 / std::sqrt(p1);
    }
    std::uint8_t bit = static_cast<std::uint8_t>(outcome);
    if (rng.bernoulli(protocol.readout_error)) bit ^= 1;
    record.bits.push_back(bit);
  }
  return record;
}

/// Samples n_repetitions runs with one RNG stream per run, derived from the
/// base seed and the run index. Records are byte-identical for any worker
/// count.
inline std::vector<MeasurementRecord> sample_records(const BathSpec& spec,
                                                     const ProtocolConfig& protocol,
                                                     std::uint64_t base_seed,
                                                     int n_workers = 1) {
  protocol.validate(spec.n_spins());
  if (n_workers < 1) throw ConfigError("n_workers must be >= 1");
  const long runs = protocol.n_repetitions;
  std::vector<MeasurementRecord> records(static_cast<std::size_t>(runs));

  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto stripe = [&](long first) {
    try {
      for (long i = first; i < runs; i += n_workers) {
        RandomStream rng = make_stream(base_seed, static_cast<std::uint64_t>(i));
        MeasurementRecord rec = run_trajectory(spec, protocol, rng);
        rec.run_index = i;
        records[static_cast<std::size_t>(i)] = std::move(rec);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  };

  if (n_workers == 1) {
    stripe(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(stripe, w);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return records;
}

/// Distribution over recorded strings plus the per-string conditional bath
/// data the exact engine produces along the way.
struct EnumerationResult {
  StringDistribution distribution;
  std::vector<double> conditional_purities;
  MatrixXcd average_conditional_state;  // sum_M p(M) rho^(M), true outcomes
  std::vector<MatrixXcd> conditional_states;  // normalized, when requested
};

namespace detail {

/// Independent per-bit confusion: each recorded bit flips with probability
/// eps. In-place butterfly over the dense probability vector.
inline void apply_readout_confusion(std::vector<double>& p, int n_bits,
                                    double eps) {
  if (eps == 0.0) return;
  for (int j = 0; j < n_bits; ++j) {
    const std::size_t mask = std::size_t{1} << (n_bits - 1 - j);
    for (std::size_t idx = 0; idx < p.size(); ++idx) {
      if (idx & mask) continue;
      const double a = p[idx], b = p[idx | mask];
      p[idx] = (1.0 - eps) * a + eps * b;
      p[idx | mask] = (1.0 - eps) * b + eps * a;
    }
  }
}

}  // namespace detail

/// Walks the outcome prefix tree once, computing every unnormalized
/// conditional state V_M rho V_M^dag exactly. Probabilities are the leaf
/// traces; readout error is applied afterwards as a confusion channel on the
/// recorded-string probabilities (conditional states keep true outcomes).
inline EnumerationResult enumerate_string_distribution(
    const BathSpec& spec, const ProtocolConfig& protocol,
    bool keep_states = false) {
  const int n_spins = spec.n_spins();
  if (n_spins > kMaxDensitySpins)
    throw EngineLimitError("exact enumeration capped at " +
                           std::to_string(kMaxDensitySpins) + " spins");
  const int n_bits = protocol.n_measurements;
  if (n_bits < 1) throw ConfigError("n_measurements must be >= 1");
  if (n_bits > kMaxEnumerationBits)
    throw EngineLimitError("exact enumeration capped at " +
                           std::to_string(kMaxEnumerationBits) + " bits");
  if (protocol.contact_time < 0.0) throw ConfigError("contact_time must be >= 0");
  if (!(protocol.readout_error >= 0.0 && protocol.readout_error <= 1.0))
    throw ConfigError("readout_error must be in [0, 1]");
  if (keep_states && n_bits + 2 * n_spins > 26)
    throw EngineLimitError("keeping all conditional states needs n + 2N <= 26");

  const MatrixXcd rho0 = protocol.initial_bath
                             ? protocol.initial_bath->as_density()
                             : BathState::maximally_mixed(n_spins).matrix();
  if (rho0.rows() != (Eigen::Index{1} << n_spins))
    throw ConfigError("initial bath dimension does not match the spec");
  const KrausPair kraus =
      kraus_pair(conditional_unitaries(spec, protocol.contact_time));

  const std::size_t n_strings = std::size_t{1} << n_bits;
  EnumerationResult result;
  result.distribution.n_bits = n_bits;
  result.distribution.source = StringDistribution::Source::exact;
  result.distribution.probabilities.assign(n_strings, 0.0);
  result.conditional_purities.assign(n_strings, 0.0);
  result.average_conditional_state =
      MatrixXcd::Zero(rho0.rows(), rho0.cols());
  if (keep_states) result.conditional_states.resize(n_strings);

  const double inv_dim = 1.0 / static_cast<double>(rho0.rows());
  auto visit = [&](auto&& self, const MatrixXcd& rho, int depth,
                   std::size_t prefix) -> void {
    if (depth == n_bits) {
      const double p = rho.trace().real();
      result.distribution.probabilities[prefix] = std::max(p, 0.0);
      result.conditional_purities[prefix] =
          p > kDegenerateOutcome ? rho.squaredNorm() / (p * p) : inv_dim;
      result.average_conditional_state += rho;
      if (keep_states)
        result.conditional_states[prefix] =
            p > kDegenerateOutcome ? MatrixXcd(rho / p)
                                   : MatrixXcd::Zero(rho.rows(), rho.cols());
      return;
    }
    self(self, MatrixXcd(kraus.v_plus * rho * kraus.v_plus.adjoint()), depth + 1,
         prefix << 1);
    self(self, MatrixXcd(kraus.v_minus * rho * kraus.v_minus.adjoint()), depth + 1,
         prefix << 1 | 1);
  };
  visit(visit, rho0, 0, 0);

  detail::apply_readout_confusion(result.distribution.probabilities, n_bits,
                                  protocol.readout_error);
  return result;
}

/// The non-selective channel iterate: rho -> V+ rho V+^dag + V- rho V-^dag,
/// n times. The oracle side of the ergodicity property.
inline BathState unconditional_bath_state(const BathSpec& spec, double tau, int n,
                                          const BathState& rho0) {
  if (n < 0) throw ConfigError("iteration count must be >= 0");
  const KrausPair kraus = kraus_pair(conditional_unitaries(spec, tau));
  if (kraus.v_plus.rows() != rho0.dim())
    throw ConfigError("Kraus pair and bath state dimensions differ");
  MatrixXcd rho = rho0.as_density();
  for (int i = 0; i < n; ++i)
    rho = kraus.v_plus * rho * kraus.v_plus.adjoint() +
          kraus.v_minus * rho * kraus.v_minus.adjoint();
  return BathState::density(std::move(rho));
}

}  // namespace spinwalk
