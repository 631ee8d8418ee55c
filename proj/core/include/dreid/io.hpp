#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dreid/covdesc.hpp"
#include "dreid/evaluation.hpp"
#include "dreid/geometry.hpp"
#include "dreid/skeleton.hpp"
#include "dreid/transfer.hpp"

namespace dreid::io {

namespace fs = std::filesystem;

std::string read_text(const fs::path& path);

/// Writes to a sibling temporary file and renames it over `path`.
void write_text_atomic(const fs::path& path, const std::string& contents);

// Depth images: binary 16-bit PGM (P5, maxval up to 65535, big-endian) in
// millimetres, plus a JSON sidecar {"fx","fy","cx","cy"}.
DepthImage read_depth_pgm(const fs::path& pgm, const fs::path& intrinsics_json);
void write_depth_pgm(const fs::path& pgm, const fs::path& intrinsics_json, const DepthImage& img);
Intrinsics parse_intrinsics(const std::string& json_text);

// ASCII PLY with x y z and optionally nx ny nz vertex properties.
PointCloud parse_ply(const std::string& text);
std::string format_ply(const PointCloud& cloud);
PointCloud read_ply(const fs::path& path);
void write_ply(const fs::path& path, const PointCloud& cloud);

// {"joints": {"head": [x, y, z], ...}}, millimetres.
SkeletonJoints parse_skeleton(const std::string& json_text);
std::string format_skeleton(const SkeletonJoints& joints);
SkeletonJoints read_skeleton(const fs::path& path);

/// Everything extracted from one frame.
struct FrameDescriptor {
  std::string id;
  int person = 0;
  int group = 0;
  int rows = 6;
  int cols = 2;
  int k = 10;
  double eps_rel = 1e-6;
  DVCovDescriptor dvcov;
  EigenDepthFeature ed;
  SkeletonFeature skl;
};

std::string format_descriptor(const FrameDescriptor& d);
FrameDescriptor parse_descriptor(const std::string& json_text);

/// Comma-separated matrix with one header row of column names.
struct CsvMatrix {
  std::vector<std::string> header;
  Eigen::MatrixXd values;
};
CsvMatrix parse_csv_matrix(const std::string& text);
std::string format_csv_matrix(const Eigen::MatrixXd& m, const std::vector<std::string>& header = {});
CsvMatrix read_csv_matrix(const fs::path& path);

/// Single-column CSV with a header row; integer labels.
std::vector<int> read_labels_csv(const fs::path& path);

/// On disk the first row holds probe ids and the first column gallery ids, so
/// the stored grid is gallery x probe. In memory `probe_by_gallery` follows
/// the evaluator's probe x gallery convention.
struct DistanceMatrixFile {
  std::vector<std::string> probe_ids;
  std::vector<std::string> gallery_ids;
  Eigen::MatrixXd probe_by_gallery;
};
DistanceMatrixFile parse_distance_matrix(const std::string& text);
std::string format_distance_matrix(const DistanceMatrixFile& d);

/// `rank,accuracy` rows, accuracies with six decimals.
std::string format_cmc(const CmcCurve& curve);

std::string format_transfer_model(const TransferModel& model);
TransferModel parse_transfer_model(const std::string& json_text);

/// Shortest decimal text that reads back as the same double.
std::string format_double(double v);

}  // namespace dreid::io
