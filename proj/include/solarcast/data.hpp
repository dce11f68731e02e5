#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "solarcast/error.hpp"
#include "solarcast/matrix.hpp"
#include "solarcast/random.hpp"
#include "solarcast/text.hpp"

namespace solarcast {

/// Missing cells are stored as quiet NaN; no other NaN can enter a dataset
/// because the CSV reader rejects non-finite literals.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) noexcept { return std::isnan(v); }

/// Equality that treats two missing markers as equal.
inline bool same_value(double a, double b) noexcept {
  return (is_missing(a) && is_missing(b)) || a == b;
}

struct FeatureSchema {
  std::vector<std::string> names;
  std::vector<std::string> units;

  /// temperature, humidity, wind speed, irradiance.
  static FeatureSchema solar_default() {
    return {{"temperature", "humidity", "wind_speed", "irradiance"}, {"°C", "%", "m/s", "W/m²"}};
  }

  [[nodiscard]] std::size_t size() const noexcept { return names.size(); }

  void validate() const {
    if (names.empty()) throw Error(Errc::SchemaMismatch, "schema has no features");
    if (!units.empty() && units.size() != names.size()) {
      throw Error(Errc::SchemaMismatch, "units and names differ in length");
    }
    std::unordered_set<std::string> seen;
    for (const auto& n : names) {
      if (n.empty()) throw Error(Errc::SchemaMismatch, "empty feature name");
      if (!seen.insert(n).second) throw Error(Errc::SchemaMismatch, "duplicate feature " + n);
    }
  }

  [[nodiscard]] std::string csv_header() const {
    std::string h = "timestamp";
    for (const auto& n : names) h += "," + n;
    return h + ",power";
  }

  friend bool operator==(const FeatureSchema& a, const FeatureSchema& b) {
    return a.names == b.names;
  }
};

/// Timestamped feature rows with a power target (kW).
struct LabeledDataset {
  std::vector<std::int64_t> timestamps;  // UTC epoch seconds
  Matrix features;
  std::vector<double> target;
  FeatureSchema schema = FeatureSchema::solar_default();

  [[nodiscard]] std::size_t size() const noexcept { return timestamps.size(); }

  void validate() const {
    const auto n = timestamps.size();
    if (features.rows() != n || target.size() != n) {
      throw Error(Errc::LengthMismatch, "dataset columns differ in length");
    }
    if (n > 0 && features.cols() != schema.size()) {
      throw Error(Errc::SchemaMismatch, "feature width differs from schema");
    }
    for (std::size_t i = 1; i < n; ++i) {
      if (timestamps[i] < timestamps[i - 1]) {
        throw Error(Errc::MalformedCsv, "timestamps decrease at row " + std::to_string(i));
      }
    }
    for (double t : target) {
      if (!is_missing(t) && t < 0.0) throw Error(Errc::NegativeTarget, "negative power value");
    }
  }
};

inline bool identical(const LabeledDataset& a, const LabeledDataset& b) {
  if (a.timestamps != b.timestamps || !(a.schema == b.schema)) return false;
  if (a.features.rows() != b.features.rows() || a.features.cols() != b.features.cols()) {
    return false;
  }
  for (std::size_t i = 0; i < a.features.data().size(); ++i) {
    if (!same_value(a.features.data()[i], b.features.data()[i])) return false;
  }
  for (std::size_t i = 0; i < a.target.size(); ++i) {
    if (!same_value(a.target[i], b.target[i])) return false;
  }
  return true;
}

struct CsvLoad {
  LabeledDataset data;
  std::size_t missing_cells = 0;
};

struct CsvOptions {
  // Prediction inputs may omit the power column values.
  bool require_target = true;
};

inline CsvLoad parse_csv(std::istream& in, const FeatureSchema& schema, CsvOptions opts = {}) {
  schema.validate();
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::MalformedCsv, "missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != schema.csv_header()) {
    throw Error(Errc::SchemaMismatch, "header '" + line + "' != '" + schema.csv_header() + "'");
  }
  const std::size_t d = schema.size();
  const std::size_t width = d + 2;

  CsvLoad out;
  out.data.schema = schema;
  std::vector<double> cells;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = text::split(line, ',');
    const auto where = " at line " + std::to_string(line_no);
    if (fields.size() != width) {
      throw Error(Errc::MalformedCsv, "expected " + std::to_string(width) + " columns, got " +
                                          std::to_string(fields.size()) + where);
    }
    auto ts = text::parse_iso8601(fields[0]);
    if (!ts) throw Error(Errc::MalformedCsv, "bad timestamp '" + std::string(fields[0]) + "'" + where);
    out.data.timestamps.push_back(*ts);
    for (std::size_t j = 0; j < d; ++j) {
      if (fields[j + 1].empty()) {
        cells.push_back(kMissing);
        ++out.missing_cells;
        continue;
      }
      auto v = text::parse_double(fields[j + 1]);
      if (!v) throw Error(Errc::MalformedCsv, "bad number '" + std::string(fields[j + 1]) + "'" + where);
      cells.push_back(*v);
    }
    const auto target_field = fields[d + 1];
    if (target_field.empty()) {
      if (opts.require_target) throw Error(Errc::MissingTarget, "empty power cell" + where);
      out.data.target.push_back(kMissing);
      ++out.missing_cells;
      continue;
    }
    auto y = text::parse_double(target_field);
    if (!y) throw Error(Errc::MalformedCsv, "bad number '" + std::string(target_field) + "'" + where);
    if (*y < 0.0) throw Error(Errc::NegativeTarget, "power " + std::string(target_field) + where);
    out.data.target.push_back(*y);
  }
  const auto n = out.data.timestamps.size();
  out.data.features = Matrix(n, d, std::move(cells));
  out.data.validate();
  return out;
}

inline CsvLoad load_csv(const std::filesystem::path& path,
                        const FeatureSchema& schema = FeatureSchema::solar_default(),
                        CsvOptions opts = {}) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::FileNotFound, "cannot open data file " + path.string());
  return parse_csv(in, schema, opts);
}

inline void write_csv(std::ostream& out, const LabeledDataset& ds) {
  out << ds.schema.csv_header() << '\n';
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out << text::format_iso8601(ds.timestamps[i]);
    for (double v : ds.features.row(i)) {
      out << ',';
      if (!is_missing(v)) out << text::format_double(v);
    }
    out << ',';
    if (!is_missing(ds.target[i])) out << text::format_double(ds.target[i]);
    out << '\n';
  }
}

inline void save_csv(const std::filesystem::path& path, const LabeledDataset& ds) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  write_csv(out, ds);
  if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
}

struct SynthConfig {
  int n_days = 30;
  int step_minutes = 60;
  double peak_irradiance = 1000.0;  // W/m²
  double panel_efficiency = 0.85;   // kW per W/m² of irradiance at 25 °C
  double noise_std = 5.0;           // kW
  std::uint64_t seed = 42;
  std::int64_t start_epoch = 1622505600;  // 2021-06-01T00:00:00Z

  void validate() const {
    if (n_days < 1) throw Error(Errc::InvalidConfig, "n_days must be >= 1");
    if (step_minutes < 1 || 1440 % step_minutes != 0) {
      throw Error(Errc::InvalidConfig, "step_minutes must divide 1440");
    }
    if (!(panel_efficiency > 0.0 && panel_efficiency <= 1.0)) {
      throw Error(Errc::InvalidConfig, "panel_efficiency must lie in (0, 1]");
    }
    if (!(peak_irradiance >= 0.0) || !(noise_std >= 0.0)) {
      throw Error(Errc::InvalidConfig, "peak_irradiance and noise_std must be >= 0");
    }
  }
};

/// Clear-sky irradiance with fixed 06:00 sunrise and 18:00 sunset. Both
/// endpoints are exactly zero (sin(pi) is not).
inline double synthetic_irradiance(double hour_of_day, double peak) {
  if (hour_of_day <= 6.0 || hour_of_day >= 18.0) return 0.0;
  return std::max(0.0, peak * std::sin(std::numbers::pi * (hour_of_day - 6.0) / 12.0));
}

/// Noise-free plant output: efficiency times irradiance with a 0.4 %/°C
/// derating above 25 °C.
inline double synthetic_power(double irradiance, double temperature, double efficiency) {
  return efficiency * irradiance * (1.0 - 0.004 * std::max(0.0, temperature - 25.0));
}

inline LabeledDataset generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  const int per_day = 1440 / cfg.step_minutes;
  const std::size_t n = static_cast<std::size_t>(cfg.n_days) * static_cast<std::size_t>(per_day);
  LabeledDataset ds;
  ds.timestamps.reserve(n);
  ds.target.reserve(n);
  ds.features = Matrix(n, 4);

  Rng rng(cfg.seed);
  constexpr double two_pi = 2.0 * std::numbers::pi;
  std::size_t r = 0;
  for (int day = 0; day < cfg.n_days; ++day) {
    const double base_temp = 22.0 + 4.0 * std::sin(two_pi * day / 365.0) + rng.normal(0.0, 2.0);
    const double swing = rng.uniform(5.0, 8.0);
    const double base_wind = rng.uniform(1.5, 4.5);
    for (int s = 0; s < per_day; ++s, ++r) {
      const int minute = s * cfg.step_minutes;
      const double hour = minute / 60.0;
      const double temperature =
          base_temp + swing * std::sin(two_pi * (hour - 9.0) / 24.0) + rng.normal(0.0, 0.5);
      const double humidity =
          std::clamp(70.0 - 2.0 * (temperature - 20.0) + rng.normal(0.0, 5.0), 5.0, 100.0);
      const double wind =
          std::max(0.0, base_wind + 1.5 * std::sin(two_pi * (hour - 14.0) / 24.0) + rng.normal(0.0, 0.8));
      const double irradiance = synthetic_irradiance(hour, cfg.peak_irradiance);
      const double noise = rng.normal(0.0, 1.0) * cfg.noise_std;
      double power = synthetic_power(irradiance, temperature, cfg.panel_efficiency);
      // No generation at night: noise applies only while the sun is up.
      if (irradiance > 0.0) power = std::max(0.0, power + noise);

      ds.timestamps.push_back(cfg.start_epoch + static_cast<std::int64_t>(day) * 86400 +
                              static_cast<std::int64_t>(minute) * 60);
      ds.features(r, 0) = temperature;
      ds.features(r, 1) = humidity;
      ds.features(r, 2) = wind;
      ds.features(r, 3) = irradiance;
      ds.target.push_back(power);
    }
  }
  return ds;
}

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::uint64_t seed = 0;
};

/// Seeded shuffle split with |test| = round(test_fraction * n), clamped so
/// that both sides keep at least one row.
inline SplitIndices split(std::size_t n, double test_fraction, std::uint64_t seed) {
  if (n < 2) throw Error(Errc::DatasetTooSmall, "need at least 2 rows to split");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(Errc::InvalidConfig, "test_fraction must lie in (0, 1)");
  }
  auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  n_test = std::clamp<std::size_t>(n_test, 1, n - 1);

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(mix_seed(seed, 0x5b117));
  rng.shuffle(std::span(perm));

  SplitIndices out;
  out.seed = seed;
  out.test.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_test));
  out.train.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_test), perm.end());
  std::sort(out.test.begin(), out.test.end());
  std::sort(out.train.begin(), out.train.end());
  return out;
}

inline SplitIndices split(const LabeledDataset& ds, double test_fraction, std::uint64_t seed) {
  return split(ds.size(), test_fraction, seed);
}

/// k disjoint folds covering 0..n-1; the first n % k folds get one extra row.
inline std::vector<std::vector<std::size_t>> kfold_partition(std::size_t n, std::size_t k,
                                                             std::uint64_t seed) {
  if (k < 2 || k > n) {
    throw Error(Errc::InvalidFoldCount,
                "k=" + std::to_string(k) + " must satisfy 2 <= k <= n=" + std::to_string(n));
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(mix_seed(seed, 0xf01d));
  rng.shuffle(std::span(perm));

  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = n / k + (f < n % k ? 1 : 0);
    folds[f].assign(perm.begin() + static_cast<std::ptrdiff_t>(pos),
                    perm.begin() + static_cast<std::ptrdiff_t>(pos + size));
    std::sort(folds[f].begin(), folds[f].end());
    pos += size;
  }
  return folds;
}

}  // namespace solarcast
