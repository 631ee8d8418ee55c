#include "dreid/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "dreid/error.hpp"

namespace dreid::io {

namespace {

using nlohmann::json;

json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string(what) + ": " + e.what());
  }
}

template <class T>
T get_field(const json& j, const char* key, const char* what) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorCode::kParse, std::string(what) + ": missing field '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string(what) + ": field '" + key + "': " + e.what());
  }
}

double parse_number(std::string_view s, const char* what) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::kParse, std::string(what) + ": not a number: '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

json mat6_json(const Mat6& m) {
  json a = json::array();
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) a.push_back(m(i, j));
  }
  return a;
}

Mat6 mat6_from(const json& a) {
  if (!a.is_array() || a.size() != 36) throw Error(ErrorCode::kParse, "covariance entry needs 36 numbers");
  Mat6 m;
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) m(i, j) = a[static_cast<std::size_t>(6 * i + j)].get<double>();
  }
  return m;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

Eigen::MatrixXd matrix_from(const json& rows, const char* what) {
  if (!rows.is_array()) throw Error(ErrorCode::kParse, std::string(what) + ": expected an array of rows");
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto c = n > 0 ? static_cast<Eigen::Index>(rows[0].size()) : 0;
  Eigen::MatrixXd m(n, c);
  for (Eigen::Index i = 0; i < n; ++i) {
    const json& r = rows[static_cast<std::size_t>(i)];
    if (!r.is_array() || static_cast<Eigen::Index>(r.size()) != c) {
      throw Error(ErrorCode::kParse, std::string(what) + ": ragged matrix");
    }
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = r[static_cast<std::size_t>(j)].get<double>();
  }
  return m;
}

json vector_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vector_from(const json& a) {
  std::vector<double> v = a.get<std::vector<double>>();
  return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_atomic(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out << contents;
    if (!out.flush()) throw Error(ErrorCode::kIo, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot rename onto " + path.string() + ": " + ec.message());
}

Intrinsics parse_intrinsics(const std::string& json_text) {
  const json j = parse_json(json_text, "intrinsics");
  return {get_field<double>(j, "fx", "intrinsics"), get_field<double>(j, "fy", "intrinsics"),
          get_field<double>(j, "cx", "intrinsics"), get_field<double>(j, "cy", "intrinsics")};
}

DepthImage read_depth_pgm(const fs::path& pgm, const fs::path& intrinsics_json) {
  const std::string data = read_text(pgm);
  std::istringstream in(data);
  std::string magic;
  in >> magic;
  if (magic != "P5") throw Error(ErrorCode::kParse, pgm.string() + ": not a binary PGM");
  auto next_int = [&]() {
    for (;;) {
      in >> std::ws;
      if (in.peek() == '#') {
        std::string comment;
        std::getline(in, comment);
        continue;
      }
      long v = -1;
      if (!(in >> v)) throw Error(ErrorCode::kParse, pgm.string() + ": truncated header");
      return v;
    }
  };
  DepthImage img;
  img.width = static_cast<int>(next_int());
  img.height = static_cast<int>(next_int());
  const long maxval = next_int();
  if (img.width <= 0 || img.height <= 0 || maxval <= 255 || maxval > 65535) {
    throw Error(ErrorCode::kParse, pgm.string() + ": expected a 16-bit PGM");
  }
  in.get();  // single whitespace before the raster
  const auto offset = static_cast<std::size_t>(in.tellg());
  const std::size_t n = static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
  if (data.size() < offset + 2 * n) throw Error(ErrorCode::kParse, pgm.string() + ": raster is truncated");
  img.depth.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto hi = static_cast<unsigned char>(data[offset + 2 * i]);
    const auto lo = static_cast<unsigned char>(data[offset + 2 * i + 1]);
    img.depth[i] = static_cast<double>((hi << 8) | lo);
  }
  img.intrinsics = parse_intrinsics(read_text(intrinsics_json));
  return img;
}

void write_depth_pgm(const fs::path& pgm, const fs::path& intrinsics_json, const DepthImage& img) {
  std::string out = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n65535\n";
  for (double d : img.depth) {
    const auto v = static_cast<unsigned>(std::clamp(std::lround(d), 0L, 65535L));
    out.push_back(static_cast<char>(v >> 8));
    out.push_back(static_cast<char>(v & 0xff));
  }
  write_text_atomic(pgm, out);
  const json j = {{"fx", img.intrinsics.fx}, {"fy", img.intrinsics.fy}, {"cx", img.intrinsics.cx},
                  {"cy", img.intrinsics.cy}};
  write_text_atomic(intrinsics_json, j.dump(2) + "\n");
}

PointCloud parse_ply(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("ply", 0) != 0) throw Error(ErrorCode::kParse, "missing ply magic");

  std::size_t vertices = 0;
  std::vector<std::string> props;
  bool in_vertex = false;
  bool ascii = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "format") {
      std::string fmt;
      ls >> fmt;
      ascii = fmt == "ascii";
    } else if (word == "element") {
      std::string name;
      std::size_t count = 0;
      ls >> name >> count;
      in_vertex = name == "vertex";
      if (in_vertex) vertices = count;
    } else if (word == "property" && in_vertex) {
      std::string type, name;
      ls >> type >> name;
      props.push_back(name);
    } else if (word == "end_header") {
      break;
    }
  }
  if (!ascii) throw Error(ErrorCode::kParse, "only ASCII PLY is supported");

  auto index_of = [&](const char* name) -> int {
    for (std::size_t i = 0; i < props.size(); ++i) {
      if (props[i] == name) return static_cast<int>(i);
    }
    return -1;
  };
  const int ix = index_of("x"), iy = index_of("y"), iz = index_of("z");
  const int inx = index_of("nx"), iny = index_of("ny"), inz = index_of("nz");
  if (ix < 0 || iy < 0 || iz < 0) throw Error(ErrorCode::kParse, "PLY vertices lack x/y/z");
  const bool normals = inx >= 0 && iny >= 0 && inz >= 0;

  PointCloud cloud;
  cloud.points.reserve(vertices);
  std::vector<double> vals(props.size());
  for (std::size_t v = 0; v < vertices; ++v) {
    if (!std::getline(in, line)) throw Error(ErrorCode::kParse, "PLY ends after " + std::to_string(v) + " vertices");
    std::istringstream ls(line);
    std::string tok;
    for (std::size_t p = 0; p < props.size(); ++p) {
      if (!(ls >> tok)) throw Error(ErrorCode::kParse, "PLY vertex " + std::to_string(v) + " is short");
      vals[p] = parse_number(tok, "PLY");
    }
    cloud.points.emplace_back(vals[ix], vals[iy], vals[iz]);
    if (normals) cloud.normals.emplace_back(vals[inx], vals[iny], vals[inz]);
  }
  return cloud;
}

std::string format_ply(const PointCloud& cloud) {
  const bool normals = cloud.has_normals();
  std::string out = "ply\nformat ascii 1.0\nelement vertex " + std::to_string(cloud.size()) +
                    "\nproperty double x\nproperty double y\nproperty double z\n";
  if (normals) out += "property double nx\nproperty double ny\nproperty double nz\n";
  out += "end_header\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.points[i];
    out += format_double(p.x()) + " " + format_double(p.y()) + " " + format_double(p.z());
    if (normals) {
      const Vec3& n = cloud.normals[i];
      out += " " + format_double(n.x()) + " " + format_double(n.y()) + " " + format_double(n.z());
    }
    out += "\n";
  }
  return out;
}

PointCloud read_ply(const fs::path& path) {
  try {
    return parse_ply(read_text(path));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kParse) throw;
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

void write_ply(const fs::path& path, const PointCloud& cloud) { write_text_atomic(path, format_ply(cloud)); }

SkeletonJoints parse_skeleton(const std::string& json_text) {
  const json j = parse_json(json_text, "skeleton");
  const json joints = get_field<json>(j, "joints", "skeleton");
  if (!joints.is_object()) throw Error(ErrorCode::kParse, "skeleton: 'joints' must be an object");
  SkeletonJoints out;
  for (const auto& [name, value] : joints.items()) {
    const auto joint = joint_from_name(name);
    if (!joint) throw Error(ErrorCode::kParse, "skeleton: unknown joint '" + name + "'");
    if (!value.is_array() || value.size() != 3) {
      throw Error(ErrorCode::kParse, "skeleton: joint '" + name + "' needs 3 coordinates");
    }
    if (!value[0].is_number() || !value[1].is_number() || !value[2].is_number()) {
      throw Error(ErrorCode::kParse, "skeleton: joint '" + name + "' has non-numeric coordinates");
    }
    out.set(*joint, Vec3(value[0].get<double>(), value[1].get<double>(), value[2].get<double>()));
  }
  return out;
}

std::string format_skeleton(const SkeletonJoints& joints) {
  json j = json::object();
  for (std::size_t i = 0; i < kJointCount; ++i) {
    const auto joint = static_cast<Joint>(i);
    if (!joints.has(joint)) continue;
    const Vec3& p = joints.at(joint);
    j[std::string(joint_name(joint))] = {p.x(), p.y(), p.z()};
  }
  return json{{"joints", j}}.dump(2) + "\n";
}

SkeletonJoints read_skeleton(const fs::path& path) {
  try {
    return parse_skeleton(read_text(path));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kParse) throw;
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

std::string format_descriptor(const FrameDescriptor& d) {
  json within = json::array(), between = json::array();
  json empty_within = json::array(), empty_between = json::array();
  for (const auto& c : d.dvcov.within) {
    within.push_back(mat6_json(c.m));
    empty_within.push_back(c.empty);
  }
  for (const auto& c : d.dvcov.between) {
    between.push_back(mat6_json(c.m));
    empty_between.push_back(c.empty);
  }
  json skl = json::array();
  for (int i = 0; i < kSkeletonFeatureSize; ++i) skl.push_back(d.skl.v[i]);
  const json j = {{"id", d.id},
                  {"person", d.person},
                  {"group", d.group},
                  {"grid", {{"rows", d.rows}, {"cols", d.cols}}},
                  {"k", d.k},
                  {"eps_rel", d.eps_rel},
                  {"within", within},
                  {"between", between},
                  {"empty_within", empty_within},
                  {"empty_between", empty_between},
                  {"ed", vector_json(d.ed.x)},
                  {"skl", skl}};
  return j.dump() + "\n";
}

FrameDescriptor parse_descriptor(const std::string& json_text) {
  const json j = parse_json(json_text, "descriptor");
  const char* what = "descriptor";
  FrameDescriptor d;
  try {
    d.id = get_field<std::string>(j, "id", what);
    d.person = get_field<int>(j, "person", what);
    d.group = get_field<int>(j, "group", what);
    const json grid = get_field<json>(j, "grid", what);
    d.rows = get_field<int>(grid, "rows", what);
    d.cols = get_field<int>(grid, "cols", what);
    d.k = get_field<int>(j, "k", what);
    d.eps_rel = get_field<double>(j, "eps_rel", what);
    const json within = get_field<json>(j, "within", what);
    const json between = get_field<json>(j, "between", what);
    const auto ew = get_field<std::vector<bool>>(j, "empty_within", what);
    const auto eb = get_field<std::vector<bool>>(j, "empty_between", what);
    if (ew.size() != within.size() || eb.size() != between.size()) {
      throw Error(ErrorCode::kParse, "descriptor: empty flags do not match matrix counts");
    }
    for (std::size_t i = 0; i < within.size(); ++i) {
      d.dvcov.within.push_back({mat6_from(within[i]), CovKind::kWithin, ew[i]});
    }
    for (std::size_t i = 0; i < between.size(); ++i) {
      d.dvcov.between.push_back({mat6_from(between[i]), CovKind::kBetween, eb[i]});
    }
    d.ed.x = vector_from(get_field<json>(j, "ed", what));
    const auto skl = get_field<std::vector<double>>(j, "skl", what);
    if (skl.size() != static_cast<std::size_t>(kSkeletonFeatureSize)) {
      throw Error(ErrorCode::kParse, "descriptor: skl needs 13 entries");
    }
    for (int i = 0; i < kSkeletonFeatureSize; ++i) d.skl.v[i] = skl[static_cast<std::size_t>(i)];
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("descriptor: ") + e.what());
  }
  return d;
}

CsvMatrix parse_csv_matrix(const std::string& text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw Error(ErrorCode::kParse, "CSV is empty");
  CsvMatrix out;
  out.header = split(lines[0], ',');
  const auto cols = static_cast<Eigen::Index>(out.header.size());
  out.values.resize(static_cast<Eigen::Index>(lines.size() - 1), cols);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = split(lines[r], ',');
    if (static_cast<Eigen::Index>(cells.size()) != cols) {
      throw Error(ErrorCode::kParse, "CSV row " + std::to_string(r) + " has " + std::to_string(cells.size()) +
                                         " cells, header has " + std::to_string(cols));
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      out.values(static_cast<Eigen::Index>(r - 1), c) = parse_number(cells[static_cast<std::size_t>(c)], "CSV");
    }
  }
  return out;
}

std::string format_csv_matrix(const Eigen::MatrixXd& m, const std::vector<std::string>& header) {
  std::string out;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    if (c > 0) out += ',';
    out += static_cast<std::size_t>(c) < header.size() ? header[static_cast<std::size_t>(c)]
                                                       : "f" + std::to_string(c);
  }
  out += '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c > 0) out += ',';
      out += format_double(m(r, c));
    }
    out += '\n';
  }
  return out;
}

CsvMatrix read_csv_matrix(const fs::path& path) {
  try {
    return parse_csv_matrix(read_text(path));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kParse) throw;
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

std::vector<int> read_labels_csv(const fs::path& path) {
  const CsvMatrix m = read_csv_matrix(path);
  if (m.values.cols() != 1) throw Error(ErrorCode::kParse, path.string() + ": labels CSV needs one column");
  std::vector<int> labels;
  for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
    const double v = m.values(i, 0);
    if (v != std::floor(v)) throw Error(ErrorCode::kParse, path.string() + ": labels must be integers");
    labels.push_back(static_cast<int>(v));
  }
  return labels;
}

DistanceMatrixFile parse_distance_matrix(const std::string& text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw Error(ErrorCode::kParse, "distance matrix is empty");
  DistanceMatrixFile d;
  auto head = split(lines[0], ',');
  if (head.empty()) throw Error(ErrorCode::kParse, "distance matrix header is empty");
  d.probe_ids.assign(head.begin() + 1, head.end());
  const auto probes = static_cast<Eigen::Index>(d.probe_ids.size());
  const auto galleries = static_cast<Eigen::Index>(lines.size() - 1);
  d.probe_by_gallery.resize(probes, galleries);
  for (Eigen::Index g = 0; g < galleries; ++g) {
    const auto cells = split(lines[static_cast<std::size_t>(g + 1)], ',');
    if (static_cast<Eigen::Index>(cells.size()) != probes + 1) {
      throw Error(ErrorCode::kParse, "distance matrix row " + std::to_string(g + 1) + " has the wrong width");
    }
    d.gallery_ids.push_back(cells[0]);
    for (Eigen::Index p = 0; p < probes; ++p) {
      d.probe_by_gallery(p, g) = parse_number(cells[static_cast<std::size_t>(p + 1)], "distance matrix");
    }
  }
  return d;
}

std::string format_distance_matrix(const DistanceMatrixFile& d) {
  if (d.probe_by_gallery.rows() != static_cast<Eigen::Index>(d.probe_ids.size()) ||
      d.probe_by_gallery.cols() != static_cast<Eigen::Index>(d.gallery_ids.size())) {
    throw Error(ErrorCode::kDimensionMismatch, "distance matrix shape does not match its ids");
  }
  std::string out = "gallery";
  for (const auto& id : d.probe_ids) out += "," + id;
  out += '\n';
  for (std::size_t g = 0; g < d.gallery_ids.size(); ++g) {
    out += d.gallery_ids[g];
    for (std::size_t p = 0; p < d.probe_ids.size(); ++p) {
      out += "," + format_double(d.probe_by_gallery(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(g)));
    }
    out += '\n';
  }
  return out;
}

std::string format_cmc(const CmcCurve& curve) {
  std::string out = "rank,accuracy\n";
  char buf[64];
  for (std::size_t k = 0; k < curve.accuracies.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%zu,%.6f\n", k + 1, curve.accuracies[k]);
    out += buf;
  }
  return out;
}

std::string format_transfer_model(const TransferModel& model) {
  const auto& h = model.hyper;
  const auto& d = model.diagnostics;
  const json j = {
      {"anchors", matrix_json(model.anchors)},
      {"projection", matrix_json(model.projection)},
      {"depth_projection", matrix_json(model.depth_projection)},
      {"kernel", {{"gamma_v", model.kernel.gamma_v}, {"gamma_d", model.kernel.gamma_d}}},
      {"hyperparameters",
       {{"beta", h.beta}, {"gamma1", h.gamma1}, {"gamma1p", h.gamma1p}, {"gamma0", h.gamma0},
        {"gamma0p", h.gamma0p}, {"m", h.m}}},
      {"mean_depth_distance", model.mean_depth_distance},
      {"diagnostics",
       {{"eigenvalues", vector_json(d.eigenvalues)},
        {"residuals", vector_json(d.residuals)},
        {"max_residual", d.max_residual},
        {"nontrivial_columns", d.nontrivial_columns},
        {"max_residual_nontrivial", d.max_residual_nontrivial},
        {"orthonormality_error", d.orthonormality_error},
        {"ridge", d.ridge},
        {"omega_vd", d.omega_vd},
        {"objective", d.objective},
        {"requested_m", d.requested_m},
        {"clamped", d.clamped}}},
  };
  return j.dump() + "\n";
}

TransferModel parse_transfer_model(const std::string& json_text) {
  const json j = parse_json(json_text, "transfer model");
  const char* what = "transfer model";
  TransferModel m;
  try {
    m.anchors = matrix_from(get_field<json>(j, "anchors", what), "anchors");
    m.projection = matrix_from(get_field<json>(j, "projection", what), "projection");
    m.depth_projection = matrix_from(get_field<json>(j, "depth_projection", what), "depth_projection");
    const json k = get_field<json>(j, "kernel", what);
    m.kernel = {get_field<double>(k, "gamma_v", what), get_field<double>(k, "gamma_d", what)};
    const json h = get_field<json>(j, "hyperparameters", what);
    m.hyper.beta = get_field<double>(h, "beta", what);
    m.hyper.gamma1 = get_field<double>(h, "gamma1", what);
    m.hyper.gamma1p = get_field<double>(h, "gamma1p", what);
    m.hyper.gamma0 = get_field<double>(h, "gamma0", what);
    m.hyper.gamma0p = get_field<double>(h, "gamma0p", what);
    m.hyper.m = get_field<int>(h, "m", what);
    m.mean_depth_distance = get_field<double>(j, "mean_depth_distance", what);
    const json d = get_field<json>(j, "diagnostics", what);
    m.diagnostics.eigenvalues = vector_from(get_field<json>(d, "eigenvalues", what));
    m.diagnostics.residuals = vector_from(get_field<json>(d, "residuals", what));
    m.diagnostics.max_residual = get_field<double>(d, "max_residual", what);
    m.diagnostics.nontrivial_columns = get_field<int>(d, "nontrivial_columns", what);
    m.diagnostics.max_residual_nontrivial = get_field<double>(d, "max_residual_nontrivial", what);
    m.diagnostics.orthonormality_error = get_field<double>(d, "orthonormality_error", what);
    m.diagnostics.ridge = get_field<double>(d, "ridge", what);
    m.diagnostics.omega_vd = get_field<double>(d, "omega_vd", what);
    m.diagnostics.objective = get_field<double>(d, "objective", what);
    m.diagnostics.requested_m = get_field<int>(d, "requested_m", what);
    m.diagnostics.clamped = get_field<bool>(d, "clamped", what);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("transfer model: ") + e.what());
  }
  if (m.projection.rows() != m.anchors.rows()) {
    throw Error(ErrorCode::kParse, "transfer model: projection rows do not match anchor count");
  }
  if (!m.projection.allFinite()) throw Error(ErrorCode::kParse, "transfer model: non-finite projection");
  return m;
}

}  // namespace dreid::io
