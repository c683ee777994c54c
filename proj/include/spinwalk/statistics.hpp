#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "spinwalk/errors.hpp"
#include "spinwalk/trajectory.hpp"

namespace spinwalk {

/// Exact multiset count of recorded strings.
struct StringHistogram {
  std::map<std::string, long> counts;
  long total = 0;
  int n = 0;

  double frequency(const std::string& key) const {
    auto it = counts.find(key);
    return it == counts.end() ? 0.0
                              : static_cast<double>(it->second) /
                                    static_cast<double>(total);
  }
};

/// Total probability per Hamming weight m in [0, n].
struct HammingProfile {
  std::vector<double> mass;
  int n = 0;
};

/// Repeat-probability curve and maximal-run-length counts.
struct RunLengthProfile {
  // Index i holds the point for n = i+1: P(next = s | previous n results
  // all = s). A zero trial count marks the entry absent, not 0.
  std::vector<double> repeat_probability;
  std::vector<long> repeat_trials;
  std::map<long, long> run_length_hist;
};

inline StringHistogram string_histogram(const std::vector<MeasurementRecord>& records) {
  if (records.empty()) throw DataFormatError("no records to histogram");
  StringHistogram hist;
  hist.n = static_cast<int>(records.front().bits.size());
  for (const auto& rec : records) {
    if (static_cast<int>(rec.bits.size()) != hist.n)
      throw DataFormatError("records have mixed lengths");
    std::string key(rec.bits.size(), '0');
    for (std::size_t j = 0; j < rec.bits.size(); ++j)
      if (rec.bits[j]) key[j] = '1';
    ++hist.counts[key];
  }
  hist.total = static_cast<long>(records.size());
  return hist;
}

inline int hamming_weight(const std::string& bits) {
  int w = 0;
  for (char c : bits) w += c == '1';
  return w;
}

inline HammingProfile hamming_profile(const StringDistribution& dist) {
  HammingProfile profile;
  profile.n = dist.n_bits;
  profile.mass.assign(static_cast<std::size_t>(dist.n_bits) + 1, 0.0);
  for (std::size_t idx = 0; idx < dist.probabilities.size(); ++idx) {
    const int w = std::popcount(idx);
    profile.mass[static_cast<std::size_t>(w)] += dist.probabilities[idx];
  }
  return profile;
}

inline HammingProfile hamming_profile(const StringHistogram& hist) {
  HammingProfile profile;
  profile.n = hist.n;
  profile.mass.assign(static_cast<std::size_t>(hist.n) + 1, 0.0);
  for (const auto& [key, count] : hist.counts)
    profile.mass[static_cast<std::size_t>(hamming_weight(key))] +=
        static_cast<double>(count) / static_cast<double>(hist.total);
  return profile;
}

inline double distribution_purity(const StringDistribution& dist) {
  double acc = 0.0;
  for (double p : dist.probabilities) acc += p * p;
  return acc;
}

inline double distribution_purity(const StringHistogram& hist) {
  double acc = 0.0;
  const double total = static_cast<double>(hist.total);
  for (const auto& [key, count] : hist.counts) {
    const double f = static_cast<double>(count) / total;
    acc += f * f;
  }
  return acc;
}

inline double shannon_entropy(const StringDistribution& dist) {
  double bits = 0.0;
  for (double p : dist.probabilities)
    if (p > 0.0) bits -= p * std::log2(p);
  return bits;
}

inline double shannon_entropy(const StringHistogram& hist) {
  double bits = 0.0;
  const double total = static_cast<double>(hist.total);
  for (const auto& [key, count] : hist.counts) {
    const double f = static_cast<double>(count) / total;
    if (f > 0.0) bits -= f * std::log2(f);
  }
  return bits;
}

/// Which preceding-run symbols count as conditioning events.
enum class RepeatConditioning { pooled, zeros_only, ones_only };

/// For every n, scans all positions in all records where the previous n
/// results are identical and measures how often the next result matches.
/// Also counts maximal identical-result runs.
inline RunLengthProfile repeat_probability_curve(
    const std::vector<MeasurementRecord>& records,
    RepeatConditioning conditioning = RepeatConditioning::pooled) {
  if (records.empty()) throw DataFormatError("no records to analyze");
  std::size_t n_max = 0;
  for (const auto& rec : records) {
    if (rec.bits.size() < 2)
      throw DataFormatError("repeat statistics need records of length >= 2");
    n_max = std::max(n_max, rec.bits.size() - 1);
  }

  RunLengthProfile profile;
  profile.repeat_probability.assign(n_max, 0.0);
  profile.repeat_trials.assign(n_max, 0);
  std::vector<long> successes(n_max, 0);

  auto admits = [conditioning](std::uint8_t symbol) {
    switch (conditioning) {
      case RepeatConditioning::zeros_only: return symbol == 0;
      case RepeatConditioning::ones_only: return symbol == 1;
      default: return true;
    }
  };

  for (const auto& rec : records) {
    const auto& bits = rec.bits;
    // run = length of the identical stretch ending just before position j.
    std::size_t run = 1;
    for (std::size_t j = 1; j < bits.size(); ++j) {
      if (admits(bits[j - 1])) {
        const bool extended = bits[j] == bits[j - 1];
        for (std::size_t n = 1; n <= run; ++n) {
          ++profile.repeat_trials[n - 1];
          successes[n - 1] += extended;
        }
      }
      run = bits[j] == bits[j - 1] ? run + 1 : 1;
    }
    // maximal runs, trailing one included
    std::size_t len = 1;
    for (std::size_t j = 1; j <= bits.size(); ++j) {
      if (j < bits.size() && bits[j] == bits[j - 1]) {
        ++len;
        continue;
      }
      if (admits(bits[j - 1])) ++profile.run_length_hist[static_cast<long>(len)];
      len = 1;
    }
  }

  for (std::size_t i = 0; i < n_max; ++i)
    if (profile.repeat_trials[i] > 0)
      profile.repeat_probability[i] = static_cast<double>(successes[i]) /
                                      static_cast<double>(profile.repeat_trials[i]);
  return profile;
}

/// Empirical distribution of a histogram, dense over all 2^n strings.
inline StringDistribution empirical_distribution(const StringHistogram& hist) {
  if (hist.n < 1 || hist.n > kMaxEnumerationBits)
    throw EngineLimitError("dense empirical distribution capped at " +
                           std::to_string(kMaxEnumerationBits) + " bits");
  StringDistribution dist;
  dist.n_bits = hist.n;
  dist.source = StringDistribution::Source::empirical;
  dist.probabilities.assign(std::size_t{1} << hist.n, 0.0);
  for (const auto& [key, count] : hist.counts)
    dist.probabilities[bits_to_index(key)] =
        static_cast<double>(count) / static_cast<double>(hist.total);
  return dist;
}

/// Total variation distance (1/2) sum |p_hat - p_ref|.
inline double compare_to_reference(const StringHistogram& hist,
                                   const StringDistribution& ref) {
  if (hist.n != ref.n_bits)
    throw ConfigError("histogram and reference have different string lengths");
  const StringDistribution emp = empirical_distribution(hist);
  double acc = 0.0;
  for (std::size_t idx = 0; idx < ref.probabilities.size(); ++idx)
    acc += std::abs(emp.probabilities[idx] - ref.probabilities[idx]);
  return 0.5 * acc;
}

inline double total_variation(const StringDistribution& a,
                              const StringDistribution& b) {
  if (a.n_bits != b.n_bits)
    throw ConfigError("distributions have different string lengths");
  double acc = 0.0;
  for (std::size_t idx = 0; idx < a.probabilities.size(); ++idx)
    acc += std::abs(a.probabilities[idx] - b.probabilities[idx]);
  return 0.5 * acc;
}

}  // namespace spinwalk
