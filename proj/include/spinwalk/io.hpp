#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "spinwalk/errors.hpp"
#include "spinwalk/statistics.hpp"
#include "spinwalk/trajectory.hpp"

namespace spinwalk {

/// Shortest decimal round-trip representation.
inline std::string format_double(double x) {
  std::array<char, 32> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

inline double parse_double(const std::string& text, const std::string& what) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc{} || res.ptr != end)
    throw DataFormatError("cannot parse " + what + ": '" + text + "'");
  return value;
}

inline long parse_long(const std::string& text, const std::string& what) {
  long value = 0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc{} || res.ptr != end)
    throw DataFormatError("cannot parse " + what + ": '" + text + "'");
  return value;
}

struct RecordsFile {
  std::vector<MeasurementRecord> records;
  int n_bits = 0;
  double tau = 0.0;
};

inline constexpr const char* kRecordsMagic = "#spinwalk-records v1";

/// One run per line of '0'/'1' characters, sorted by run_index, behind the
/// header "#spinwalk-records v1 n=<n> R=<R> tau=<tau>".
inline void write_records(const std::string& path,
                          std::vector<MeasurementRecord> records, double tau) {
  if (records.empty()) throw ConfigError("no records to write");
  std::stable_sort(records.begin(), records.end(),
                   [](const MeasurementRecord& a, const MeasurementRecord& b) {
                     return a.run_index < b.run_index;
                   });
  const std::size_t n = records.front().bits.size();
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write records to " + path);
  out << kRecordsMagic << " n=" << n << " R=" << records.size()
      << " tau=" << format_double(tau) << '\n';
  std::string line(n, '0');
  for (const auto& rec : records) {
    if (rec.bits.size() != n) throw ConfigError("records have mixed lengths");
    for (std::size_t j = 0; j < n; ++j) line[j] = rec.bits[j] ? '1' : '0';
    out << line << '\n';
  }
  if (!out) throw ConfigError("write failed for " + path);
}

inline RecordsFile read_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataFormatError("cannot read records from " + path);
  std::string line;
  if (!std::getline(in, line))
    throw DataFormatError(path + ": empty file, expected a records header");
  if (line.rfind(kRecordsMagic, 0) != 0)
    throw DataFormatError(path + ":1: expected header '" +
                          std::string(kRecordsMagic) + " n=<n> R=<R> tau=<tau>'");

  RecordsFile file;
  long declared_runs = -1;
  bool saw_n = false, saw_r = false, saw_tau = false;
  std::size_t pos = std::string(kRecordsMagic).size();
  while (pos < line.size()) {
    while (pos < line.size() && line[pos] == ' ') ++pos;
    if (pos >= line.size()) break;
    const std::size_t eq = line.find('=', pos);
    const std::size_t end = line.find(' ', pos);
    const std::size_t stop = end == std::string::npos ? line.size() : end;
    if (eq == std::string::npos || eq > stop)
      throw DataFormatError(path + ":1: malformed header field");
    const std::string key = line.substr(pos, eq - pos);
    const std::string value = line.substr(eq + 1, stop - eq - 1);
    if (key == "n") {
      file.n_bits = static_cast<int>(parse_long(value, "header n"));
      saw_n = true;
    } else if (key == "R") {
      declared_runs = parse_long(value, "header R");
      saw_r = true;
    } else if (key == "tau") {
      file.tau = parse_double(value, "header tau");
      saw_tau = true;
    } else {
      throw DataFormatError(path + ":1: unknown header field '" + key + "'");
    }
    pos = stop;
  }
  if (!saw_n || !saw_r || !saw_tau)
    throw DataFormatError(path + ":1: header must carry n, R and tau");
  if (file.n_bits < 1) throw DataFormatError(path + ":1: header n must be >= 1");
  if (declared_runs < 1) throw DataFormatError(path + ":1: header R must be >= 1");

  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() && in.eof()) break;
    if (static_cast<int>(line.size()) != file.n_bits)
      throw DataFormatError(path + ":" + std::to_string(line_no) + ": run has " +
                            std::to_string(line.size()) + " bits, header says " +
                            std::to_string(file.n_bits));
    MeasurementRecord rec;
    rec.run_index = static_cast<long>(file.records.size());
    rec.bits.reserve(line.size());
    for (char c : line) {
      if (c != '0' && c != '1')
        throw DataFormatError(path + ":" + std::to_string(line_no) +
                              ": invalid character '" + std::string(1, c) + "'");
      rec.bits.push_back(static_cast<std::uint8_t>(c - '0'));
    }
    file.records.push_back(std::move(rec));
  }
  if (static_cast<long>(file.records.size()) != declared_runs)
    throw DataFormatError(path + ": header says R=" + std::to_string(declared_runs) +
                          " but found " + std::to_string(file.records.size()) +
                          " runs");
  return file;
}

inline std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  return out;
}

inline void write_histogram_csv(const std::string& path, const StringHistogram& hist) {
  auto out = open_csv(path);
  out << "string,count,frequency,stderr\n";
  const double total = static_cast<double>(hist.total);
  for (const auto& [key, count] : hist.counts) {
    const double f = static_cast<double>(count) / total;
    const double se = std::sqrt(f * (1.0 - f) / total);
    out << key << ',' << count << ',' << format_double(f) << ','
        << format_double(se) << '\n';
  }
}

inline void write_hamming_csv(const std::string& path, const HammingProfile& profile) {
  auto out = open_csv(path);
  out << "weight,mass\n";
  for (std::size_t w = 0; w < profile.mass.size(); ++w)
    out << w << ',' << format_double(profile.mass[w]) << '\n';
}

inline void write_repeat_curve_csv(const std::string& path,
                                   const RunLengthProfile& profile) {
  auto out = open_csv(path);
  out << "n,probability,n_samples\n";
  for (std::size_t i = 0; i < profile.repeat_trials.size(); ++i) {
    if (profile.repeat_trials[i] == 0) continue;
    out << i + 1 << ',' << format_double(profile.repeat_probability[i]) << ','
        << profile.repeat_trials[i] << '\n';
  }
}

inline void write_run_length_csv(const std::string& path,
                                 const RunLengthProfile& profile) {
  auto out = open_csv(path);
  out << "length,count\n";
  for (const auto& [length, count] : profile.run_length_hist)
    out << length << ',' << count << '\n';
}

inline void write_fid_csv(const std::string& path, const std::vector<double>& ts,
                          const std::vector<double>& cs) {
  if (ts.size() != cs.size()) throw ConfigError("fid grid size mismatch");
  auto out = open_csv(path);
  out << "t,C\n";
  for (std::size_t i = 0; i < ts.size(); ++i)
    out << format_double(ts[i]) << ',' << format_double(cs[i]) << '\n';
}

inline void write_distribution_csv(const std::string& path,
                                   const StringDistribution& dist,
                                   const std::vector<double>& conditional_purities) {
  if (conditional_purities.size() != dist.probabilities.size())
    throw ConfigError("purity column size mismatch");
  auto out = open_csv(path);
  out << "string,probability,conditional_purity\n";
  for (std::size_t idx = 0; idx < dist.probabilities.size(); ++idx)
    out << index_to_bits(idx, dist.n_bits) << ','
        << format_double(dist.probabilities[idx]) << ','
        << format_double(conditional_purities[idx]) << '\n';
}

}  // namespace spinwalk
