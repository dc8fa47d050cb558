#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>

#include "pastsgd/errors.hpp"
#include "pastsgd/vec_stats.hpp"

namespace pastsgd {

enum class TaskKind { Classification, Regression };

// One labelled sample: a feature view plus its target (class index stored as
// a double for classification).
struct Example {
  std::span<const double> features;
  double target = 0.0;
};

struct Dataset {
  std::string name;
  TaskKind task = TaskKind::Regression;
  long num_rows = 0;
  long num_cols = 0;      // feature count p
  Vec features;           // row-major, num_rows x num_cols
  Vec targets;            // length num_rows
  long num_classes = 0;   // classification only

  std::span<const double> row(long i) const;
  Example example(long i) const { return Example{row(i), targets[std::size_t(i)]}; }
};

// Per-feature affine standardization parameters. Empty vectors mean identity.
struct NormalizationSpec {
  Vec mean;
  Vec stddev;

  bool is_identity() const { return mean.empty(); }
  static NormalizationSpec identity() { return {}; }
};

// Column means and standard deviations of the feature matrix (population
// denominator). Near-constant columns get stddev 1 so they map to zero
// rather than dividing by zero.
NormalizationSpec fit_feature_standardization(const Dataset& train);
void standardize_features(Dataset& ds, const NormalizationSpec& spec);
void destandardize_features(Dataset& ds, const NormalizationSpec& spec);

// Reads an IDX image/label pair (big-endian, magic 0x00000803 / 0x00000801).
// subset > 0 keeps only the first subset rows. With scale_to_unit, pixels
// are divided by 255; otherwise raw 0-255 values are kept.
Dataset load_idx(const std::string& images_path, const std::string& labels_path, long subset = 0,
                 bool scale_to_unit = true);

// Writes the matching pair of IDX files (used by tests and generators).
void write_idx(const std::string& images_path, const std::string& labels_path,
               std::span<const std::uint8_t> pixels, std::span<const std::uint8_t> labels,
               long count, long rows, long cols);

// Reads a regression table from CSV with a header row. Cells must be
// numeric; failures name the data row and column. With normalize set, the
// feature columns are standardized over the whole file; the target column is
// always left in original units. Callers that split first should load raw
// and use fit_feature_standardization on the training side instead.
Dataset load_csv_regression(const std::string& path, const std::string& target_column,
                            const std::vector<std::string>& feature_columns, bool normalize);
void write_csv_regression(const std::string& path, const Dataset& ds,
                          const std::string& target_column,
                          const std::vector<std::string>& feature_columns);

// Noisy polynomial target stream: u uniform on [-1,1], features are the
// monomial basis [1, u, u^2, ...], y = sum_k c_k u^k + Gaussian noise.
// Coefficients start uniform on [-1,1] and are redrawn whenever the 1-based
// iteration index passed to apply_change_point is a positive multiple of
// change_period.
class PolynomialStream {
 public:
  PolynomialStream(std::uint64_t seed, int degree, double noise_sigma, long change_period);

  long feature_dim() const { return degree_ + 1; }
  void apply_change_point(long iteration);
  void next_batch(long n, Vec& features, Vec& targets);
  const Vec& coefficients() const { return coeffs_; }
  long redraw_count() const { return redraws_; }

 private:
  void redraw();

  std::mt19937_64 rng_;
  Vec coeffs_;
  int degree_;
  double noise_sigma_;
  long change_period_;
  long redraws_ = 0;
};

PolynomialStream synth_polynomial_stream(std::uint64_t seed, int degree, double noise_sigma,
                                         long change_period);

// Seeded shuffle split into (train, test) with floor(fraction * N) training
// rows. Throws when either side would be empty.
std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, double fraction,
                                             std::uint64_t seed);

}  // namespace pastsgd
