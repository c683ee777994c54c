#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include <spinwalk/spinwalk.hpp>

#include "frozen_seeds.hpp"

using namespace spinwalk;
using spinwalk_test::kCalibratedBathSeed;

namespace {

MeasurementRecord make_record(std::initializer_list<int> bits, long index = 0) {
  MeasurementRecord rec;
  for (int b : bits) rec.bits.push_back(static_cast<std::uint8_t>(b));
  rec.run_index = index;
  return rec;
}

StringDistribution uniform_distribution(int n_bits) {
  StringDistribution dist;
  dist.n_bits = n_bits;
  dist.source = StringDistribution::Source::exact;
  dist.probabilities.assign(std::size_t{1} << n_bits,
                            1.0 / static_cast<double>(std::size_t{1} << n_bits));
  return dist;
}

BathSpec frozen_calibrated_bath() {
  RandomStream cal_rng = make_stream(kCalibratedBathSeed, 0);
  const double scale = calibrate_coupling_scale(4, 0.0, 1.2, cal_rng);
  RandomStream rng = make_stream(kCalibratedBathSeed, 1);
  return sample_bath_spec(4, scale, 0.0, rng);
}

EnumerationResult frozen_calibrated_distribution() {
  ProtocolConfig protocol;
  protocol.contact_time = 1.2;
  protocol.n_measurements = 4;
  protocol.readout_error = 0.01;
  protocol.engine = Engine::exact_enumeration;
  return enumerate_string_distribution(frozen_calibrated_bath(), protocol);
}

TEST(StringHistogramTest, CountsMultisets) {
  const std::vector<MeasurementRecord> records = {
      make_record({0, 0}, 0), make_record({0, 0}, 1), make_record({1, 1}, 2)};
  const StringHistogram hist = string_histogram(records);
  EXPECT_EQ(hist.total, 3);
  EXPECT_EQ(hist.n, 2);
  EXPECT_EQ(hist.counts.at("00"), 2);
  EXPECT_EQ(hist.counts.at("11"), 1);
  EXPECT_EQ(hist.counts.size(), 2u);
  EXPECT_NEAR(hist.frequency("00"), 2.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(hist.frequency("01"), 0.0);
  long sum = 0;
  for (const auto& [key, count] : hist.counts) sum += count;
  EXPECT_EQ(sum, hist.total);
}

TEST(StringHistogramTest, RejectsEmptyAndMixedLengths) {
  EXPECT_THROW(string_histogram({}), DataFormatError);
  const std::vector<MeasurementRecord> mixed = {make_record({0, 1}),
                                                make_record({0, 1, 1})};
  EXPECT_THROW(string_histogram(mixed), DataFormatError);
}

TEST(StringHistogramTest, FairCoinFrequenciesApproachUniform) {
  const long R = 100000;
  RandomStream rng = make_stream(41, 0);
  const auto records = iid_coin_records(0.5, 4, R, rng);
  const StringHistogram hist = string_histogram(records);
  const double p = 1.0 / 16.0;
  const double four_sigma = 4.0 * std::sqrt(p * (1.0 - p) / R);
  for (std::size_t idx = 0; idx < 16; ++idx)
    EXPECT_NEAR(hist.frequency(index_to_bits(idx, 4)), p, four_sigma);
}

TEST(StringHistogramTest, CalibratedSimulationIsBimodal) {
  BathSpec spec = frozen_calibrated_bath();
  ProtocolConfig protocol;
  protocol.contact_time = 1.2;
  protocol.n_measurements = 4;
  protocol.n_repetitions = 20000;
  protocol.readout_error = 0.01;
  const auto records = sample_records(spec, protocol, 77, 1);
  const StringHistogram hist = string_histogram(records);
  std::vector<std::pair<long, std::string>> ranked;
  for (const auto& [key, count] : hist.counts) ranked.emplace_back(count, key);
  std::sort(ranked.rbegin(), ranked.rend());
  ASSERT_GE(ranked.size(), 2u);
  const std::string top0 = ranked[0].second, top1 = ranked[1].second;
  EXPECT_TRUE((top0 == "0000" && top1 == "1111") ||
              (top0 == "1111" && top1 == "0000"));
}

TEST(HammingProfileTest, UniformGivesBinomialMass) {
  const HammingProfile profile = hamming_profile(uniform_distribution(4));
  const double expected[5] = {1, 4, 6, 4, 1};
  ASSERT_EQ(profile.mass.size(), 5u);
  for (int m = 0; m <= 4; ++m)
    EXPECT_NEAR(profile.mass[static_cast<std::size_t>(m)], expected[m] / 16.0,
                1e-14);
}

TEST(HammingProfileTest, PointMassConcentratesAtItsWeight) {
  const std::vector<MeasurementRecord> records(5, make_record({0, 0, 0, 0}));
  const HammingProfile profile = hamming_profile(string_histogram(records));
  ASSERT_EQ(profile.mass.size(), 5u);
  EXPECT_DOUBLE_EQ(profile.mass[0], 1.0);
  for (int m = 1; m <= 4; ++m) EXPECT_DOUBLE_EQ(profile.mass[m], 0.0);
}

TEST(HammingProfileTest, MassSumsToOne) {
  const EnumerationResult result = frozen_calibrated_distribution();
  const HammingProfile profile = hamming_profile(result.distribution);
  double sum = 0.0;
  for (double m : profile.mass) sum += m;
  EXPECT_NEAR(sum, 1.0, 1e-9);
}

TEST(HammingProfileTest, CalibratedProfileIsUShaped) {
  const EnumerationResult result = frozen_calibrated_distribution();
  const HammingProfile profile = hamming_profile(result.distribution);
  EXPECT_GT(profile.mass[0], 1.0 / 16.0);
  EXPECT_GT(profile.mass[4], 1.0 / 16.0);
  // edges dominate the middle weight class per string
  EXPECT_GT(profile.mass[0], profile.mass[2] / 6.0);
  EXPECT_GT(profile.mass[4], profile.mass[2] / 6.0);
}

TEST(HammingProfileTest, IidBaselineRecoversBinomialBars) {
  const long R = 100000;
  RandomStream rng = make_stream(43, 0);
  const auto records = iid_coin_records(0.5, 4, R, rng);
  const HammingProfile profile = hamming_profile(string_histogram(records));
  const double expected[5] = {1, 4, 6, 4, 1};
  for (int m = 0; m <= 4; ++m) {
    const double p = expected[m] / 16.0;
    const double four_sigma = 4.0 * std::sqrt(p * (1.0 - p) / R);
    EXPECT_NEAR(profile.mass[static_cast<std::size_t>(m)], p, four_sigma);
  }
}

TEST(DistributionPurityTest, KnownValues) {
  EXPECT_NEAR(distribution_purity(uniform_distribution(4)), 1.0 / 16.0, 1e-14);
  const std::vector<MeasurementRecord> point(7, make_record({1, 0, 1}));
  EXPECT_DOUBLE_EQ(distribution_purity(string_histogram(point)), 1.0);
}

TEST(DistributionPurityTest, CalibratedDistributionSitsInTheOrderedBand) {
  const EnumerationResult result = frozen_calibrated_distribution();
  const double purity = distribution_purity(result.distribution);
  EXPECT_GT(purity, 1.2 / 16.0);
  EXPECT_LT(purity, 2.2 / 16.0);
}

TEST(ShannonEntropyTest, KnownValues) {
  EXPECT_NEAR(shannon_entropy(uniform_distribution(4)), 4.0, 1e-12);
  const std::vector<MeasurementRecord> point(3, make_record({0, 0}));
  EXPECT_DOUBLE_EQ(shannon_entropy(string_histogram(point)), 0.0);
}

TEST(ShannonEntropyTest, BoundedByLogSupportSize) {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    StringDistribution dist;
    dist.n_bits = 3;
    dist.probabilities.assign(8, 0.0);
    double norm = 0.0;
    int support = 0;
    for (double& p : dist.probabilities) {
      if (unif(gen) < 0.7) {
        p = unif(gen);
        norm += p;
        ++support;
      }
    }
    if (support == 0) continue;
    for (double& p : dist.probabilities) p /= norm;
    EXPECT_LE(shannon_entropy(dist), std::log2(double(support)) + 1e-12);
  }
}

TEST(PurityEntropyTest, RenyiOrderingHolds) {
  std::mt19937_64 gen(123);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    StringDistribution dist;
    dist.n_bits = 4;
    dist.probabilities.assign(16, 0.0);
    double norm = 0.0;
    for (double& p : dist.probabilities) {
      p = unif(gen);
      norm += p;
    }
    for (double& p : dist.probabilities) p /= norm;
    EXPECT_GE(distribution_purity(dist),
              std::pow(2.0, -shannon_entropy(dist)) - 1e-12);
  }
  // equality on the uniform distribution
  const StringDistribution flat = uniform_distribution(4);
  EXPECT_NEAR(distribution_purity(flat),
              std::pow(2.0, -shannon_entropy(flat)), 1e-12);
}

TEST(RepeatCurveTest, HandComputedPooledCase) {
  const std::vector<MeasurementRecord> records = {make_record({0, 0, 1, 0}),
                                                  make_record({1, 1, 0, 0})};
  const RunLengthProfile profile = repeat_probability_curve(records);
  ASSERT_EQ(profile.repeat_probability.size(), 3u);
  EXPECT_EQ(profile.repeat_trials[0], 6);
  EXPECT_NEAR(profile.repeat_probability[0], 0.5, 1e-15);
  EXPECT_EQ(profile.repeat_trials[1], 2);
  EXPECT_NEAR(profile.repeat_probability[1], 0.0, 1e-15);
  EXPECT_EQ(profile.repeat_trials[2], 0);  // no run of 3 ever precedes a bit
  EXPECT_EQ(profile.run_length_hist.at(1), 2);
  EXPECT_EQ(profile.run_length_hist.at(2), 3);
}

TEST(RepeatCurveTest, HandComputedConditionedCases) {
  const std::vector<MeasurementRecord> records = {make_record({0, 0, 1, 0}),
                                                  make_record({1, 1, 0, 0})};
  const RunLengthProfile zeros =
      repeat_probability_curve(records, RepeatConditioning::zeros_only);
  EXPECT_EQ(zeros.repeat_trials[0], 3);
  EXPECT_NEAR(zeros.repeat_probability[0], 2.0 / 3.0, 1e-15);
  EXPECT_EQ(zeros.repeat_trials[1], 1);
  EXPECT_NEAR(zeros.repeat_probability[1], 0.0, 1e-15);
  EXPECT_EQ(zeros.run_length_hist.at(1), 1);
  EXPECT_EQ(zeros.run_length_hist.at(2), 2);

  const RunLengthProfile ones =
      repeat_probability_curve(records, RepeatConditioning::ones_only);
  EXPECT_EQ(ones.repeat_trials[0], 3);
  EXPECT_NEAR(ones.repeat_probability[0], 1.0 / 3.0, 1e-15);
  EXPECT_EQ(ones.repeat_trials[1], 1);
  EXPECT_EQ(ones.run_length_hist.at(1), 1);
  EXPECT_EQ(ones.run_length_hist.at(2), 1);
}

TEST(RepeatCurveTest, FairCoinCurveIsFlat) {
  RandomStream rng = make_stream(47, 0);
  const auto records = iid_coin_records(0.5, 10, 10000, rng);
  const RunLengthProfile profile = repeat_probability_curve(records);
  for (std::size_t i = 0; i < 5; ++i) {
    ASSERT_GT(profile.repeat_trials[i], 100);
    const double four_sigma =
        4.0 * 0.5 / std::sqrt(static_cast<double>(profile.repeat_trials[i]));
    EXPECT_NEAR(profile.repeat_probability[i], 0.5, four_sigma);
  }
}

TEST(RepeatCurveTest, ConstantRecordsRepeatWithCertainty) {
  const std::vector<MeasurementRecord> records(4, make_record({1, 1, 1, 1, 1}));
  const RunLengthProfile profile = repeat_probability_curve(records);
  for (std::size_t i = 0; i < profile.repeat_probability.size(); ++i) {
    if (profile.repeat_trials[i] == 0) continue;
    EXPECT_DOUBLE_EQ(profile.repeat_probability[i], 1.0);
  }
  EXPECT_EQ(profile.run_length_hist.at(5), 4);
  EXPECT_EQ(profile.run_length_hist.size(), 1u);
}

TEST(RepeatCurveTest, RejectsDegenerateInput) {
  EXPECT_THROW(repeat_probability_curve({}), DataFormatError);
  EXPECT_THROW(repeat_probability_curve({make_record({1})}), DataFormatError);
}

TEST(WeightClassTest, ZeroFieldZCouplingIsUniformWithinWeightClasses) {
  RandomStream rng = make_stream(53, 0);
  BathSpec spec;
  for (int k = 0; k < 4; ++k) spec.couplings.push_back({0.0, 0.0, rng.normal()});
  ProtocolConfig protocol;
  protocol.contact_time = 0.8;
  protocol.n_measurements = 4;
  protocol.readout_error = 0.0;
  protocol.engine = Engine::exact_enumeration;
  const EnumerationResult result = enumerate_string_distribution(spec, protocol);
  const HammingProfile profile = hamming_profile(result.distribution);

  // rebuild the distribution from the profile alone
  const double choose[5] = {1, 4, 6, 4, 1};
  StringDistribution rebuilt;
  rebuilt.n_bits = 4;
  rebuilt.probabilities.assign(16, 0.0);
  for (std::size_t idx = 0; idx < 16; ++idx) {
    const int w = std::popcount(idx);
    rebuilt.probabilities[idx] = profile.mass[w] / choose[w];
  }
  EXPECT_LT(total_variation(rebuilt, result.distribution), 1e-12);
}

TEST(EmpiricalDistributionTest, DensifiesHistogram) {
  const std::vector<MeasurementRecord> records = {
      make_record({0, 1}), make_record({0, 1}), make_record({1, 0}),
      make_record({1, 1})};
  const StringDistribution dist = empirical_distribution(string_histogram(records));
  EXPECT_EQ(dist.source, StringDistribution::Source::empirical);
  EXPECT_NEAR(dist.probability("00"), 0.0, 1e-15);
  EXPECT_NEAR(dist.probability("01"), 0.5, 1e-15);
  EXPECT_NEAR(dist.probability("10"), 0.25, 1e-15);
  EXPECT_NEAR(dist.probability("11"), 0.25, 1e-15);
}

TEST(CompareToReferenceTest, PointMassAgainstUniform) {
  const std::vector<MeasurementRecord> records(9, make_record({0, 0, 0, 0}));
  const double tv =
      compare_to_reference(string_histogram(records), uniform_distribution(4));
  EXPECT_NEAR(tv, 15.0 / 16.0, 1e-12);
}

TEST(CompareToReferenceTest, SamplesFromReferenceConverge) {
  const EnumerationResult result = frozen_calibrated_distribution();
  // multinomial draw from the reference itself (test-local sampler)
  std::mt19937_64 gen(7);
  std::discrete_distribution<std::size_t> pick(
      result.distribution.probabilities.begin(),
      result.distribution.probabilities.end());
  std::vector<MeasurementRecord> records;
  const long R = 40000;
  for (long i = 0; i < R; ++i) {
    MeasurementRecord rec;
    const std::string bits = index_to_bits(pick(gen), 4);
    for (char c : bits) rec.bits.push_back(c == '1');
    rec.run_index = i;
    records.push_back(std::move(rec));
  }
  const double tv =
      compare_to_reference(string_histogram(records), result.distribution);
  EXPECT_LT(tv, 4.0 * std::sqrt(16.0 / R));
}

TEST(CompareToReferenceTest, RejectsLengthMismatch) {
  const std::vector<MeasurementRecord> records = {make_record({0, 0, 0})};
  EXPECT_THROW(
      compare_to_reference(string_histogram(records), uniform_distribution(4)),
      ConfigError);
}

TEST(CompareToReferenceTest, CalibratedStatisticsAreFarFromUniform) {
  const EnumerationResult result = frozen_calibrated_distribution();
  const double population_tv =
      total_variation(result.distribution, uniform_distribution(4));
  const double threshold = 5.0 / std::sqrt(75312.0);
  EXPECT_GT(population_tv, threshold);

  // an empirical estimate at the experiment's R stays above threshold too
  std::mt19937_64 gen(11);
  std::discrete_distribution<std::size_t> pick(
      result.distribution.probabilities.begin(),
      result.distribution.probabilities.end());
  std::vector<MeasurementRecord> records;
  for (long i = 0; i < 75312; ++i) {
    MeasurementRecord rec;
    const std::string bits = index_to_bits(pick(gen), 4);
    for (char c : bits) rec.bits.push_back(c == '1');
    rec.run_index = i;
    records.push_back(std::move(rec));
  }
  const double empirical_tv =
      compare_to_reference(string_histogram(records), uniform_distribution(4));
  EXPECT_GT(empirical_tv, threshold);
}

TEST(TotalVariationTest, BasicProperties) {
  const StringDistribution flat = uniform_distribution(3);
  EXPECT_DOUBLE_EQ(total_variation(flat, flat), 0.0);
  StringDistribution point;
  point.n_bits = 3;
  point.probabilities.assign(8, 0.0);
  point.probabilities[5] = 1.0;
  EXPECT_NEAR(total_variation(flat, point), 7.0 / 8.0, 1e-15);
  EXPECT_NEAR(total_variation(point, flat), 7.0 / 8.0, 1e-15);
}

TEST(HammingWeightTest, CountsOnes) {
  EXPECT_EQ(hamming_weight("0000"), 0);
  EXPECT_EQ(hamming_weight("1011"), 3);
  EXPECT_EQ(hamming_weight(""), 0);
}

}  // namespace
