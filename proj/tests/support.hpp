// Shared helpers for the unit and acceptance suites: scratch directories and
// deterministic synthetic datasets shaped like the regression/classification
// experiment inputs. Real data is picked up from PASTSGD_DATA_DIR when the
// expected files exist there; otherwise generated stand-ins are used.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace testsupport {

// Self-deleting scratch directory under the system temp root.
class TempDir {
 public:
  explicit TempDir(const std::string& prefix);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::string& path() const { return path_; }
  std::string file(const std::string& name) const { return path_ + "/" + name; }

 private:
  std::string path_;
};

// Column layout of the voice-measurement regression table.
extern const char* const kVoiceTarget;  // "motor_UPDRS"
const std::vector<std::string>& voice_feature_columns();  // the 19 predictors

// Writes a 5875-row regression CSV with the voice-measurement header. The
// target is a linear signal in the standardized features plus unit Gaussian
// noise, with the signal strength set so a converged linear model scores
// close to the reference R2 of the reproduction study.
void write_voice_like_csv(const std::string& path, std::uint64_t seed);

// Returns the regression CSV path to use: the real file from
// PASTSGD_DATA_DIR if present, else a stand-in generated inside dir.
std::string voice_csv_path(const TempDir& dir);

struct IdxPaths {
  std::string train_images;
  std::string train_labels;
  std::string test_images;
  std::string test_labels;
};

// Writes a 10-class 28x28 image corpus in IDX format: 10000 training and
// 2000 test rows drawn from overlapping per-class pixel patterns with heavy
// noise, hard enough that a linear classifier improves over many updates.
IdxPaths write_digits_like_idx(const std::string& dir, std::uint64_t seed);

// Returns the IDX quadruple to use: real files from PASTSGD_DATA_DIR when
// all four exist, else a generated stand-in inside dir.
IdxPaths digits_idx_paths(const TempDir& dir);

// Whole-file read, used for byte-identity checks.
std::string read_file_bytes(const std::string& path);

}  // namespace testsupport
