#include "pastsgd/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

namespace pastsgd {

std::span<const double> Dataset::row(long i) const {
  if (i < 0 || i >= num_rows)
    throw std::out_of_range("Dataset: row " + std::to_string(i) + " outside [0, " +
                            std::to_string(num_rows) + ")");
  return std::span<const double>(features).subspan(std::size_t(i) * std::size_t(num_cols),
                                                   std::size_t(num_cols));
}

NormalizationSpec fit_feature_standardization(const Dataset& train) {
  if (train.num_rows == 0)
    throw std::invalid_argument("fit_feature_standardization: empty dataset");
  const long p = train.num_cols;
  NormalizationSpec spec;
  spec.mean.assign(std::size_t(p), 0.0);
  spec.stddev.assign(std::size_t(p), 0.0);
  for (long i = 0; i < train.num_rows; ++i) {
    auto r = train.row(i);
    for (long j = 0; j < p; ++j) spec.mean[std::size_t(j)] += r[std::size_t(j)];
  }
  for (long j = 0; j < p; ++j) spec.mean[std::size_t(j)] /= double(train.num_rows);
  for (long i = 0; i < train.num_rows; ++i) {
    auto r = train.row(i);
    for (long j = 0; j < p; ++j) {
      double dlt = r[std::size_t(j)] - spec.mean[std::size_t(j)];
      spec.stddev[std::size_t(j)] += dlt * dlt;
    }
  }
  for (long j = 0; j < p; ++j) {
    double sd = std::sqrt(spec.stddev[std::size_t(j)] / double(train.num_rows));
    spec.stddev[std::size_t(j)] = sd < 1e-15 ? 1.0 : sd;
  }
  return spec;
}

void standardize_features(Dataset& ds, const NormalizationSpec& spec) {
  if (spec.is_identity()) return;
  if (long(spec.mean.size()) != ds.num_cols)
    throw std::invalid_argument("standardize_features: spec size " +
                                std::to_string(spec.mean.size()) + " does not match feature count " +
                                std::to_string(ds.num_cols));
  for (long i = 0; i < ds.num_rows; ++i)
    for (long j = 0; j < ds.num_cols; ++j) {
      double& x = ds.features[std::size_t(i) * std::size_t(ds.num_cols) + std::size_t(j)];
      x = (x - spec.mean[std::size_t(j)]) / spec.stddev[std::size_t(j)];
    }
}

void destandardize_features(Dataset& ds, const NormalizationSpec& spec) {
  if (spec.is_identity()) return;
  if (long(spec.mean.size()) != ds.num_cols)
    throw std::invalid_argument("destandardize_features: spec size " +
                                std::to_string(spec.mean.size()) + " does not match feature count " +
                                std::to_string(ds.num_cols));
  for (long i = 0; i < ds.num_rows; ++i)
    for (long j = 0; j < ds.num_cols; ++j) {
      double& x = ds.features[std::size_t(i) * std::size_t(ds.num_cols) + std::size_t(j)];
      x = x * spec.stddev[std::size_t(j)] + spec.mean[std::size_t(j)];
    }
}

namespace {

std::uint32_t read_be_u32(std::istream& in, const std::string& path, std::size_t& offset) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (in.gcount() != 4)
    throw DataError("load_idx: " + path + ": unexpected end of file at offset " +
                    std::to_string(offset + std::size_t(std::max<std::streamsize>(0, in.gcount()))));
  offset += 4;
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
         std::uint32_t(b[3]);
}

void write_be_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {(unsigned char)(v >> 24), (unsigned char)(v >> 16), (unsigned char)(v >> 8),
                        (unsigned char)v};
  out.write(reinterpret_cast<char*>(b), 4);
}

std::string hex32(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08x", v);
  return buf;
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path, long subset,
                 bool scale_to_unit) {
  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw DataError("load_idx: cannot open " + images_path);
  std::size_t off = 0;
  std::uint32_t magic = read_be_u32(img, images_path, off);
  if (magic != 0x00000803u)
    throw DataError("load_idx: " + images_path + ": bad image magic " + hex32(magic) +
                    " at offset 0 (expected 0x00000803)");
  std::uint32_t count = read_be_u32(img, images_path, off);
  std::uint32_t rows = read_be_u32(img, images_path, off);
  std::uint32_t cols = read_be_u32(img, images_path, off);
  if (rows == 0 || cols == 0)
    throw DataError("load_idx: " + images_path + ": zero image dimensions at offset 8");

  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab) throw DataError("load_idx: cannot open " + labels_path);
  std::size_t loff = 0;
  std::uint32_t lmagic = read_be_u32(lab, labels_path, loff);
  if (lmagic != 0x00000801u)
    throw DataError("load_idx: " + labels_path + ": bad label magic " + hex32(lmagic) +
                    " at offset 0 (expected 0x00000801)");
  std::uint32_t lcount = read_be_u32(lab, labels_path, loff);
  if (lcount != count)
    throw DataError("load_idx: item count mismatch: " + images_path + " has " +
                    std::to_string(count) + " images but " + labels_path + " has " +
                    std::to_string(lcount) + " labels");

  long keep = long(count);
  if (subset > 0) keep = std::min<long>(keep, subset);
  const std::size_t pixels_per = std::size_t(rows) * std::size_t(cols);

  Dataset ds;
  ds.name = "idx";
  ds.task = TaskKind::Classification;
  ds.num_rows = keep;
  ds.num_cols = long(pixels_per);
  ds.features.resize(std::size_t(keep) * pixels_per);
  ds.targets.resize(std::size_t(keep));

  std::vector<unsigned char> buf(pixels_per);
  for (long i = 0; i < keep; ++i) {
    img.read(reinterpret_cast<char*>(buf.data()), std::streamsize(pixels_per));
    if (std::size_t(img.gcount()) != pixels_per)
      throw DataError("load_idx: " + images_path + ": unexpected end of file at offset " +
                      std::to_string(off + std::size_t(std::max<std::streamsize>(0, img.gcount()))));
    off += pixels_per;
    double* dst = ds.features.data() + std::size_t(i) * pixels_per;
    if (scale_to_unit)
      for (std::size_t j = 0; j < pixels_per; ++j) dst[j] = double(buf[j]) / 255.0;
    else
      for (std::size_t j = 0; j < pixels_per; ++j) dst[j] = double(buf[j]);
  }

  long max_label = -1;
  for (long i = 0; i < keep; ++i) {
    unsigned char c;
    lab.read(reinterpret_cast<char*>(&c), 1);
    if (lab.gcount() != 1)
      throw DataError("load_idx: " + labels_path + ": unexpected end of file at offset " +
                      std::to_string(loff));
    ++loff;
    ds.targets[std::size_t(i)] = double(c);
    max_label = std::max<long>(max_label, long(c));
  }
  ds.num_classes = std::max<long>(10, max_label + 1);
  return ds;
}

void write_idx(const std::string& images_path, const std::string& labels_path,
               std::span<const std::uint8_t> pixels, std::span<const std::uint8_t> labels,
               long count, long rows, long cols) {
  if (long(labels.size()) != count)
    throw std::invalid_argument("write_idx: label count " + std::to_string(labels.size()) +
                                " does not match " + std::to_string(count));
  if (long(pixels.size()) != count * rows * cols)
    throw std::invalid_argument("write_idx: pixel buffer size mismatch");
  std::ofstream img(images_path, std::ios::binary | std::ios::trunc);
  if (!img) throw DataError("write_idx: cannot open " + images_path + " for writing");
  write_be_u32(img, 0x00000803u);
  write_be_u32(img, std::uint32_t(count));
  write_be_u32(img, std::uint32_t(rows));
  write_be_u32(img, std::uint32_t(cols));
  img.write(reinterpret_cast<const char*>(pixels.data()), std::streamsize(pixels.size()));
  if (!img) throw DataError("write_idx: write failed for " + images_path);

  std::ofstream lab(labels_path, std::ios::binary | std::ios::trunc);
  if (!lab) throw DataError("write_idx: cannot open " + labels_path + " for writing");
  write_be_u32(lab, 0x00000801u);
  write_be_u32(lab, std::uint32_t(count));
  lab.write(reinterpret_cast<const char*>(labels.data()), std::streamsize(labels.size()));
  if (!lab) throw DataError("write_idx: write failed for " + labels_path);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // trim surrounding whitespace and stray carriage returns
    auto b = cell.find_first_not_of(" \t\r");
    auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

double parse_cell(const std::string& cell, long data_row, const std::string& column) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (cell.empty() || end != begin + cell.size() || !std::isfinite(v))
    throw DataError("load_csv_regression: row " + std::to_string(data_row) + ", column '" +
                    column + "': cell '" + cell + "' is not a finite number");
  return v;
}

}  // namespace

Dataset load_csv_regression(const std::string& path, const std::string& target_column,
                            const std::vector<std::string>& feature_columns, bool normalize) {
  std::ifstream in(path);
  if (!in) throw DataError("load_csv_regression: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("load_csv_regression: " + path + " is empty");
  std::vector<std::string> header = split_csv_line(line);

  auto col_index = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw DataError("load_csv_regression: column '" + name + "' not found in header of " + path);
  };

  const std::size_t target_idx = col_index(target_column);
  std::vector<std::size_t> feat_idx;
  feat_idx.reserve(feature_columns.size());
  for (const auto& name : feature_columns) feat_idx.push_back(col_index(name));
  if (feat_idx.empty()) throw DataError("load_csv_regression: no feature columns requested");

  Dataset ds;
  ds.name = path;
  ds.task = TaskKind::Regression;
  ds.num_cols = long(feat_idx.size());

  long data_row = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;  // skip blank lines
    ++data_row;
    std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw DataError("load_csv_regression: row " + std::to_string(data_row) + " has " +
                      std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(header.size()));
    for (std::size_t k = 0; k < feat_idx.size(); ++k)
      ds.features.push_back(parse_cell(cells[feat_idx[k]], data_row, header[feat_idx[k]]));
    ds.targets.push_back(parse_cell(cells[target_idx], data_row, target_column));
  }
  ds.num_rows = data_row;
  if (ds.num_rows == 0) throw DataError("load_csv_regression: " + path + " has no data rows");

  if (normalize) {
    NormalizationSpec spec = fit_feature_standardization(ds);
    standardize_features(ds, spec);
  }
  return ds;
}

void write_csv_regression(const std::string& path, const Dataset& ds,
                          const std::string& target_column,
                          const std::vector<std::string>& feature_columns) {
  if (long(feature_columns.size()) != ds.num_cols)
    throw std::invalid_argument("write_csv_regression: header size mismatch");
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("write_csv_regression: cannot open " + path + " for writing");
  for (const auto& c : feature_columns) out << c << ',';
  out << target_column << '\n';
  char buf[40];
  for (long i = 0; i < ds.num_rows; ++i) {
    auto r = ds.row(i);
    for (long j = 0; j < ds.num_cols; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", r[std::size_t(j)]);
      out << buf << ',';
    }
    std::snprintf(buf, sizeof buf, "%.17g", ds.targets[std::size_t(i)]);
    out << buf << '\n';
  }
  if (!out) throw DataError("write_csv_regression: write failed for " + path);
}

PolynomialStream::PolynomialStream(std::uint64_t seed, int degree, double noise_sigma,
                                   long change_period)
    : rng_(seed), degree_(degree), noise_sigma_(noise_sigma), change_period_(change_period) {
  if (degree < 1)
    throw std::invalid_argument("PolynomialStream: degree must be >= 1, got " +
                                std::to_string(degree));
  if (change_period < 1)
    throw std::invalid_argument("PolynomialStream: change period must be >= 1, got " +
                                std::to_string(change_period));
  if (noise_sigma < 0.0)
    throw std::invalid_argument("PolynomialStream: noise sigma must be non-negative");
  coeffs_.resize(std::size_t(degree) + 1);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (double& c : coeffs_) c = dist(rng_);
}

void PolynomialStream::redraw() {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (double& c : coeffs_) c = dist(rng_);
  ++redraws_;
}

void PolynomialStream::apply_change_point(long iteration) {
  if (iteration > 0 && iteration % change_period_ == 0) redraw();
}

void PolynomialStream::next_batch(long n, Vec& features, Vec& targets) {
  const std::size_t p = std::size_t(degree_) + 1;
  features.resize(std::size_t(n) * p);
  targets.resize(std::size_t(n));
  std::uniform_real_distribution<double> u_dist(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, noise_sigma_ > 0.0 ? noise_sigma_ : 1.0);
  for (long i = 0; i < n; ++i) {
    double u = u_dist(rng_);
    double* row = features.data() + std::size_t(i) * p;
    double pw = 1.0;
    double y = 0.0;
    for (std::size_t k = 0; k < p; ++k) {
      row[k] = pw;
      y += coeffs_[k] * pw;
      pw *= u;
    }
    if (noise_sigma_ > 0.0) y += noise(rng_);
    targets[std::size_t(i)] = y;
  }
}

PolynomialStream synth_polynomial_stream(std::uint64_t seed, int degree, double noise_sigma,
                                         long change_period) {
  return PolynomialStream(seed, degree, noise_sigma, change_period);
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, double fraction,
                                             std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw std::invalid_argument("train_test_split: fraction must lie in (0,1), got " +
                                std::to_string(fraction));
  const long n = ds.num_rows;
  long n_train = long(std::floor(fraction * double(n)));
  if (n_train < 1 || n_train >= n)
    throw std::invalid_argument("train_test_split: fraction " + std::to_string(fraction) +
                                " leaves an empty side for " + std::to_string(n) + " rows");
  std::vector<long> idx(std::size_t(n), 0L);
  std::iota(idx.begin(), idx.end(), 0L);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);

  auto take = [&](long from, long to, const char* suffix) {
    Dataset out;
    out.name = ds.name + suffix;
    out.task = ds.task;
    out.num_rows = to - from;
    out.num_cols = ds.num_cols;
    out.num_classes = ds.num_classes;
    out.features.reserve(std::size_t(out.num_rows) * std::size_t(out.num_cols));
    out.targets.reserve(std::size_t(out.num_rows));
    for (long k = from; k < to; ++k) {
      auto r = ds.row(idx[std::size_t(k)]);
      out.features.insert(out.features.end(), r.begin(), r.end());
      out.targets.push_back(ds.targets[std::size_t(idx[std::size_t(k)])]);
    }
    return out;
  };
  return {take(0, n_train, "-train"), take(n_train, n, "-test")};
}

}  // namespace pastsgd
