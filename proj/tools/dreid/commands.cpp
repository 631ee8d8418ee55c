#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <set>

#include "dreid/covdesc.hpp"
#include "dreid/error.hpp"
#include "dreid/evaluation.hpp"
#include "dreid/io.hpp"
#include "dreid/matching.hpp"
#include "dreid/parallel.hpp"
#include "dreid/rng.hpp"
#include "dreid/skeleton.hpp"
#include "dreid/spd.hpp"
#include "dreid/synth.hpp"
#include "dreid/transfer.hpp"

namespace dreid::cli {

namespace fs = std::filesystem;

namespace {

struct FrameEntry {
  std::string id;
  int person = 0;
  int group = 0;
  fs::path cloud;       // PLY, or
  fs::path depth;       // 16-bit PGM with
  fs::path intrinsics;  // its JSON sidecar
  fs::path skeleton;
};

fs::path output_dir(const json& c) { return c.at("output").get<std::string>(); }

fs::path descriptor_dir(const json& c) {
  const std::string d = c.at("descriptors").get<std::string>();
  return d.empty() ? output_dir(c) / "descriptors" : fs::path(d);
}

fs::path required_path(const json& c, const json::json_pointer& key, const char* what) {
  const std::string p = c.at(key).get<std::string>();
  if (p.empty()) throw UsageError(std::string("config ") + key.to_string() + " (" + what + ") is not set");
  return p;
}

json read_json_file(const fs::path& path) {
  try {
    return json::parse(io::read_text(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

void read_frame_files(const json& f, const fs::path& manifest, FrameEntry& e) {
  e.skeleton = resolve(manifest, f.at("skeleton").get<std::string>());
  if (f.contains("cloud")) {
    e.cloud = resolve(manifest, f["cloud"].get<std::string>());
  } else {
    e.depth = resolve(manifest, f.at("depth").get<std::string>());
    e.intrinsics = resolve(manifest, f.at("intrinsics").get<std::string>());
  }
}

int group_number(const std::string& key, const fs::path& manifest) {
  int g = 0;
  const auto [end, ec] = std::from_chars(key.data(), key.data() + key.size(), g);
  if (ec != std::errc() || end != key.data() + key.size() || g < 0) {
    throw Error(ErrorCode::kParse, manifest.string() + ": sequence group '" + key +
                                       "' is not a non-negative integer");
  }
  return g;
}

// Accepts {"persons": [{"id", "sequences": {"<group>": [frame, ...]}}]} or a
// flat {"frames": [{"id", "person", "group", ...}]} list. Person labels in the
// nested form are positions in the persons array.
std::vector<FrameEntry> load_manifest(const fs::path& manifest) {
  const json j = read_json_file(manifest);
  const bool nested = j.contains("persons") && j["persons"].is_array();
  if (!nested && !(j.contains("frames") && j["frames"].is_array())) {
    throw Error(ErrorCode::kParse, manifest.string() + ": expected a 'persons' or 'frames' array");
  }
  std::vector<FrameEntry> frames;
  try {
    if (nested) {
      const json& persons = j["persons"];
      for (std::size_t p = 0; p < persons.size(); ++p) {
        const std::string pid = persons[p].at("id").get<std::string>();
        for (const auto& [key, seq] : persons[p].at("sequences").items()) {
          const int group = group_number(key, manifest);
          for (std::size_t i = 0; i < seq.size(); ++i) {
            FrameEntry e;
            e.id = seq[i].value("id", pid + "_g" + key + "_" + std::to_string(i));
            e.person = static_cast<int>(p);
            e.group = group;
            read_frame_files(seq[i], manifest, e);
            frames.push_back(std::move(e));
          }
        }
      }
    } else {
      for (const auto& f : j["frames"]) {
        FrameEntry e;
        e.id = f.at("id").get<std::string>();
        e.person = f.at("person").get<int>();
        e.group = f.value("group", 0);
        read_frame_files(f, manifest, e);
        frames.push_back(std::move(e));
      }
    }
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::kParse, manifest.string() + ": frame entry: " + ex.what());
  }
  std::set<std::string> ids;
  for (const FrameEntry& e : frames) {
    if (!ids.insert(e.id).second) throw Error(ErrorCode::kParse, manifest.string() + ": duplicate id " + e.id);
  }
  return frames;
}

std::vector<fs::path> inputs_of(const FrameEntry& f) {
  if (!f.cloud.empty()) return {f.cloud, f.skeleton};
  return {f.depth, f.intrinsics, f.skeleton};
}

bool up_to_date(const fs::path& out, const FrameEntry& f, const DescriptorParams& params, int k) {
  std::error_code ec;
  const auto out_time = fs::last_write_time(out, ec);
  if (ec) return false;
  for (const auto& in : inputs_of(f)) {
    const auto t = fs::last_write_time(in, ec);
    if (ec || t > out_time) return false;
  }
  try {
    const io::FrameDescriptor d = io::parse_descriptor(io::read_text(out));
    return d.rows == params.rows && d.cols == params.cols && d.k == k && d.eps_rel == params.eps_rel &&
           d.id == f.id;
  } catch (const Error&) {
    return false;
  }
}

io::FrameDescriptor extract_frame(const FrameEntry& f, const DescriptorParams& params, int k, fs::path& stage) {
  PointCloud cloud;
  if (!f.cloud.empty()) {
    stage = f.cloud;
    cloud = io::read_ply(f.cloud);
  } else {
    stage = f.depth;
    cloud = depth_to_pointcloud(io::read_depth_pgm(f.depth, f.intrinsics));
  }
  stage = f.skeleton;
  const SkeletonJoints joints = io::read_skeleton(f.skeleton);
  stage = f.cloud.empty() ? f.depth : f.cloud;
  const PointCloud with_normals = estimate_normals(cloud, k);

  io::FrameDescriptor d;
  d.id = f.id;
  d.person = f.person;
  d.group = f.group;
  d.rows = params.rows;
  d.cols = params.cols;
  d.k = k;
  d.eps_rel = params.eps_rel;
  d.dvcov = extract_dvcov(with_normals, joints, params);
  d.ed = extract_ed(d.dvcov);
  d.skl = skeleton_feature(joints);
  return d;
}

std::string eta_tag(double eta) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", eta);
  return buf;
}

ProtocolConfig protocol_config(const json& c) {
  ProtocolConfig p;
  p.protocol = c.at("protocol") == "multi_shot" ? Protocol::kMultiShot : Protocol::kSingleShot;
  p.trials = c.at("trials").get<int>();
  p.seed = c.at("seed").get<std::uint64_t>();
  p.gallery_group = c.at("gallery_group").get<int>();
  p.probe_group = c.at("probe_group").get<int>();
  p.train_fraction = c.at("train_fraction").get<double>();
  p.max_rank = c.at("max_rank").get<std::size_t>();
  p.threads = c.at("threads").get<unsigned>();
  return p;
}

json curve_json(const CmcCurve& curve) { return curve.accuracies; }

LabeledFeatureSet gather(const std::vector<io::FrameDescriptor>& frames, std::span<const std::size_t> idx,
                         bool with_ed, bool with_skl) {
  LabeledFeatureSet s;
  if (idx.empty()) return s;
  const auto& first = frames[idx[0]];
  const Eigen::Index ed_dim = with_ed ? first.ed.x.size() : 0;
  const Eigen::Index dim = ed_dim + (with_skl ? kSkeletonFeatureSize : 0);
  s.features.resize(static_cast<Eigen::Index>(idx.size()), dim);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const auto& f = frames[idx[r]];
    if (with_ed) {
      if (f.ed.x.size() != ed_dim) throw Error(ErrorCode::kLayoutMismatch, "descriptor " + f.id + " has a different grid");
      s.features.row(static_cast<Eigen::Index>(r)).head(ed_dim) = f.ed.x.transpose();
    }
    if (with_skl) s.features.row(static_cast<Eigen::Index>(r)).tail(kSkeletonFeatureSize) = f.skl.v.transpose();
    s.labels.push_back(f.person);
  }
  return s;
}

std::vector<DepthSample> depth_samples(const std::vector<io::FrameDescriptor>& frames,
                                       std::span<const std::size_t> idx) {
  std::vector<DepthSample> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back({frames[i].dvcov, frames[i].skl});
  return out;
}

Matcher make_matcher(const std::string& descriptor, FusionScaling scaling,
                     const std::vector<io::FrameDescriptor>& frames) {
  if (descriptor == "dvcov") {
    return [&frames](auto, auto g, auto p) {
      return dvcov_distance_matrix(depth_samples(frames, g), depth_samples(frames, p));
    };
  }
  if (descriptor == "dvcov+skl") {
    return [&frames, scaling](auto, auto g, auto p) {
      return match_dvcov_skl(depth_samples(frames, g), depth_samples(frames, p), scaling);
    };
  }
  if (descriptor == "skl") {
    return [&frames](auto, auto g, auto p) {
      return skl_distance_matrix(depth_samples(frames, g), depth_samples(frames, p));
    };
  }
  const bool with_skl = descriptor == "ed+skl";
  return [&frames, with_skl](auto t, auto g, auto p) {
    return match_subspace(gather(frames, t, true, with_skl), gather(frames, g, true, with_skl),
                          gather(frames, p, true, with_skl));
  };
}

AuxiliaryDataset load_aux(const fs::path& manifest) {
  const json j = read_json_file(manifest);
  AuxiliaryDataset aux;
  try {
    aux.visual = io::read_csv_matrix(resolve(manifest, j.at("visual").get<std::string>())).values;
    aux.depth = io::read_csv_matrix(resolve(manifest, j.at("depth").get<std::string>())).values;
    aux.labels = io::read_labels_csv(resolve(manifest, j.at("labels").get<std::string>()));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, manifest.string() + ": " + e.what());
  }
  aux.validate();
  return aux;
}

void write_aux(const fs::path& dir, const std::string& prefix, const AuxiliaryDataset& aux) {
  Eigen::MatrixXd labels(static_cast<Eigen::Index>(aux.labels.size()), 1);
  for (std::size_t i = 0; i < aux.labels.size(); ++i) labels(static_cast<Eigen::Index>(i), 0) = aux.labels[i];
  io::write_text_atomic(dir / (prefix + "_visual.csv"), io::format_csv_matrix(aux.visual));
  io::write_text_atomic(dir / (prefix + "_depth.csv"), io::format_csv_matrix(aux.depth));
  io::write_text_atomic(dir / (prefix + "_labels.csv"), io::format_csv_matrix(labels, {"label"}));
  const json m = {{"visual", prefix + "_visual.csv"},
                  {"depth", prefix + "_depth.csv"},
                  {"labels", prefix + "_labels.csv"},
                  {"metadata", {{"visual_feature", "synthetic tanh embedding"}}}};
  io::write_text_atomic(dir / (prefix + "_manifest.json"), m.dump(2) + "\n");
}

std::vector<int> id_labels(const std::vector<std::string>& gallery, const std::vector<std::string>& probe,
                           std::vector<int>& probe_out) {
  std::map<std::string, int> ids;
  auto label_of = [&ids](const std::string& s) {
    auto [it, inserted] = ids.try_emplace(s, static_cast<int>(ids.size()));
    return it->second;
  };
  std::vector<int> g;
  for (const auto& s : gallery) g.push_back(label_of(s));
  probe_out.clear();
  for (const auto& s : probe) probe_out.push_back(label_of(s));
  return g;
}

}  // namespace

int cmd_extract(const json& c, std::ostream& log) {
  const fs::path manifest = required_path(c, "/manifest"_json_pointer, "dataset manifest");
  const std::vector<FrameEntry> frames = load_manifest(manifest);
  const fs::path out_dir = descriptor_dir(c);
  DescriptorParams params;
  params.rows = c.at("grid").at("rows").get<int>();
  params.cols = c.at("grid").at("cols").get<int>();
  params.eps_rel = c.at("eps_rel").get<double>();
  const int k = c.at("k").get<int>();

  struct Outcome {
    bool skipped = false;
    bool failed = false;
    std::string file;
    std::string error;
  };
  std::vector<Outcome> outcomes(frames.size());
  parallel_for(frames.size(), c.at("threads").get<unsigned>(), [&](std::size_t i) {
    const FrameEntry& f = frames[i];
    const fs::path out = out_dir / (f.id + ".json");
    if (up_to_date(out, f, params, k)) {
      outcomes[i].skipped = true;
      return;
    }
    fs::path stage;
    try {
      io::write_text_atomic(out, io::format_descriptor(extract_frame(f, params, k, stage)));
    } catch (const std::exception& e) {
      outcomes[i].failed = true;
      outcomes[i].file = stage.string();
      outcomes[i].error = e.what();
    }
  });

  std::size_t computed = 0, skipped = 0;
  json failures = json::array();
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const Outcome& o = outcomes[i];
    if (o.skipped) {
      ++skipped;
    } else if (o.failed) {
      failures.push_back({{"id", frames[i].id}, {"file", o.file}, {"error", o.error}});
      log << "extract: " << frames[i].id << ": " << o.error << "\n";
    } else {
      ++computed;
    }
  }
  const json report = {{"frames", frames.size()}, {"failed", failures}};
  io::write_text_atomic(output_dir(c) / "extract_errors.json", report.dump(2) + "\n");
  log << "extract: " << computed << " computed, " << skipped << " up to date, " << failures.size()
      << " failed\n";
  if (!frames.empty() && 2 * failures.size() > frames.size()) {
    log << "extract: more than half of the frames failed\n";
    return kExitData;
  }
  return kExitOk;
}

int cmd_evaluate(const json& c, std::ostream& log) {
  const fs::path manifest = required_path(c, "/manifest"_json_pointer, "dataset manifest");
  const std::vector<FrameEntry> entries = load_manifest(manifest);
  const fs::path dir = descriptor_dir(c);

  std::set<std::string> known_failures;
  const fs::path report = output_dir(c) / "extract_errors.json";
  if (fs::exists(report)) {
    for (const auto& f : read_json_file(report).value("failed", json::array())) {
      known_failures.insert(f.value("id", ""));
    }
  }

  std::vector<io::FrameDescriptor> frames;
  std::vector<ProtocolSample> samples;
  json warnings = json::array();
  for (const FrameEntry& e : entries) {
    const fs::path p = dir / (e.id + ".json");
    if (!fs::exists(p)) {
      if (known_failures.contains(e.id)) {
        warnings.push_back("frame " + e.id + " skipped: extraction failed");
        continue;
      }
      throw Error(ErrorCode::kIo, "no descriptor for frame " + e.id + " in " + dir.string() +
                                      "; run `dreid extract` with the same config first");
    }
    frames.push_back(io::parse_descriptor(io::read_text(p)));
    frames.back().person = e.person;
    frames.back().group = e.group;
    samples.push_back({e.person, e.group});
  }
  if (frames.empty()) throw Error(ErrorCode::kInsufficientPoints, "no descriptors to evaluate");

  const std::string descriptor = c.at("descriptor").get<std::string>();
  const FusionScaling scaling =
      c.at("fusion_scaling") == "mean" ? FusionScaling::kMeanNormalized : FusionScaling::kRaw;
  const ProtocolResult result = run_protocol(samples, protocol_config(c), make_matcher(descriptor, scaling, frames));
  for (const auto& w : result.warnings) warnings.push_back(w);

  json trials = json::array();
  for (std::size_t t = 0; t < result.trials.size(); ++t) {
    trials.push_back({{"trial", t}, {"accuracies", curve_json(result.trials[t])}});
  }
  const json summary = {{"seed", c.at("seed")},
                        {"descriptor", descriptor},
                        {"protocol", c.at("protocol")},
                        {"frames", frames.size()},
                        {"rank1", result.mean.accuracies.empty() ? 0.0 : result.mean.rank(1)},
                        {"mean", curve_json(result.mean)},
                        {"trials", trials},
                        {"warnings", warnings},
                        {"config", c}};
  io::write_text_atomic(output_dir(c) / "cmc.csv", io::format_cmc(result.mean));
  io::write_text_atomic(output_dir(c) / "summary.json", summary.dump(2) + "\n");
  char buf[96];
  std::snprintf(buf, sizeof(buf), "evaluate: %s %s rank-1 %.4f over %d trials\n", descriptor.c_str(),
                c.at("protocol").get<std::string>().c_str(), summary["rank1"].get<double>(),
                c.at("trials").get<int>());
  log << buf;
  return kExitOk;
}

int cmd_transfer_train(const json& c, std::ostream& log) {
  const json& t = c.at("transfer");
  const fs::path manifest = required_path(c, "/transfer/aux_manifest"_json_pointer, "auxiliary manifest");
  const AuxiliaryDataset aux = load_aux(manifest);

  TransferHyperParams hp;
  hp.beta = t.at("beta").get<double>();
  hp.gamma1 = t.at("gamma1").get<double>();
  hp.gamma1p = t.at("gamma1p").get<double>();
  hp.gamma0 = t.at("gamma0").get<double>();
  hp.gamma0p = t.at("gamma0p").get<double>();
  hp.m = t.at("m").get<int>();
  KernelConfig kc = default_kernel_config(aux);
  if (t.at("gamma_v").get<double>() > 0.0) kc.gamma_v = t.at("gamma_v").get<double>();
  if (t.at("gamma_d").get<double>() > 0.0) kc.gamma_d = t.at("gamma_d").get<double>();

  const TransferModel model = fit_transfer(aux, hp, kc);
  const std::string model_path = t.at("model").get<std::string>();
  const fs::path out = model_path.empty() ? output_dir(c) / "transfer_model.json" : fs::path(model_path);
  io::write_text_atomic(out, io::format_transfer_model(model));

  const auto& d = model.diagnostics;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "transfer-train: N=%ld m=%ld%s nontrivial=%d max residual %.3e (nontrivial %.3e), "
                "orthonormality %.3e, omega_vd %.4g\n",
                static_cast<long>(aux.size()), static_cast<long>(model.latent_dim()),
                d.clamped ? " (clamped)" : "", d.nontrivial_columns, d.max_residual, d.max_residual_nontrivial,
                d.orthonormality_error, d.omega_vd);
  log << buf << "transfer-train: wrote " << out.string() << "\n";
  return kExitOk;
}

int cmd_transfer_apply(const json& c, std::ostream& log) {
  const json& t = c.at("transfer");
  const std::string model_path = t.at("model").get<std::string>();
  const fs::path model_file = model_path.empty() ? output_dir(c) / "transfer_model.json" : fs::path(model_path);
  const TransferModel model = io::parse_transfer_model(io::read_text(model_file));
  const fs::path manifest = required_path(c, "/transfer/target_manifest"_json_pointer, "target manifest");
  const json target = read_json_file(manifest);

  Eigen::MatrixXd gallery, probe;
  io::DistanceMatrixFile rgb;
  try {
    gallery = io::read_csv_matrix(resolve(manifest, target.at("gallery_visual").get<std::string>())).values;
    probe = io::read_csv_matrix(resolve(manifest, target.at("probe_visual").get<std::string>())).values;
    rgb = io::parse_distance_matrix(io::read_text(resolve(manifest, target.at("rgb_distances").get<std::string>())));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, manifest.string() + ": " + e.what());
  }
  if (rgb.probe_by_gallery.rows() != probe.rows() || rgb.probe_by_gallery.cols() != gallery.rows()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "RGB distance matrix is " + std::to_string(rgb.probe_by_gallery.rows()) + " probes x " +
                    std::to_string(rgb.probe_by_gallery.cols()) + " gallery, visual features give " +
                    std::to_string(probe.rows()) + " x " + std::to_string(gallery.rows()));
  }

  const Eigen::MatrixXd dist_d =
      pairwise_euclidean(estimate_depth_features(model, probe), estimate_depth_features(model, gallery));
  const double rgb_mean = t.at("rgb_mean").get<double>() > 0.0 ? t.at("rgb_mean").get<double>()
                                                                 : rgb.probe_by_gallery.mean();
  const double d_mean = model.mean_depth_distance;

  std::vector<int> probe_labels;
  const std::vector<int> gallery_labels = id_labels(rgb.gallery_ids, rgb.probe_ids, probe_labels);

  const fs::path out = output_dir(c);
  io::DistanceMatrixFile depth_file{rgb.probe_ids, rgb.gallery_ids, dist_d};
  io::write_text_atomic(out / "depth_distances.csv", io::format_distance_matrix(depth_file));

  json sweep = json::array();
  std::vector<double> etas = t.at("etas").get<std::vector<double>>();
  const double eta = t.at("eta").get<double>();
  for (double e : etas) {
    const Eigen::MatrixXd fused = fuse_score_matrices(rgb.probe_by_gallery, dist_d, e, rgb_mean, d_mean);
    const CmcCurve curve = cmc_evaluate(fused, gallery_labels, probe_labels);
    io::write_text_atomic(out / ("cmc_eta_" + eta_tag(e) + ".csv"), io::format_cmc(curve));
    sweep.push_back({{"eta", e}, {"rank1", curve.rank(1)}, {"accuracies", curve_json(curve)}});
    log << "transfer-apply: eta " << eta_tag(e) << " rank-1 " << curve.rank(1) << "\n";
  }
  const Eigen::MatrixXd fused = fuse_score_matrices(rgb.probe_by_gallery, dist_d, eta, rgb_mean, d_mean);
  io::DistanceMatrixFile fused_file{rgb.probe_ids, rgb.gallery_ids, fused};
  io::write_text_atomic(out / "fused_distances.csv", io::format_distance_matrix(fused_file));
  const CmcCurve main_curve = cmc_evaluate(fused, gallery_labels, probe_labels);
  io::write_text_atomic(out / "cmc.csv", io::format_cmc(main_curve));

  const json summary = {{"eta", eta},
                        {"rgb_mean", rgb_mean},
                        {"depth_mean", d_mean},
                        {"rank1", main_curve.rank(1)},
                        {"sweep", sweep},
                        {"config", c}};
  io::write_text_atomic(out / "transfer_summary.json", summary.dump(2) + "\n");
  return kExitOk;
}

int cmd_synth(const json& c, std::ostream& log) {
  const json& s = c.at("synth");
  const std::string kind = s.at("kind").get<std::string>();
  const auto seed = c.at("seed").get<std::uint64_t>();
  const fs::path out = output_dir(c);

  if (kind == "paired") {
    const AuxiliaryDataset aux = generate_paired_features(s.at("persons").get<int>(), s.at("views").get<int>(), seed);
    write_aux(out, "aux", aux);
    log << "synth: wrote " << aux.size() << " paired samples to " << out.string() << "\n";
    return kExitOk;
  }
  if (kind == "corruption") {
    const CorruptionBenchmark b =
        make_corruption_benchmark(seed, s.at("persons").get<int>(), s.at("views").get<int>(),
                                  s.at("target_persons").get<int>(), s.at("corrupt_fraction").get<double>());
    write_aux(out, "aux", b.aux);
    io::write_text_atomic(out / "target_gallery_visual.csv", io::format_csv_matrix(b.gallery_visual));
    io::write_text_atomic(out / "target_probe_visual.csv", io::format_csv_matrix(b.probe_visual));
    io::DistanceMatrixFile rgb;
    for (int id : b.gallery_ids) rgb.gallery_ids.push_back("id" + std::to_string(id));
    for (int id : b.probe_ids) rgb.probe_ids.push_back("id" + std::to_string(id));
    rgb.probe_by_gallery = b.rgb_distances;
    io::write_text_atomic(out / "target_rgb_distances.csv", io::format_distance_matrix(rgb));
    const json m = {{"gallery_visual", "target_gallery_visual.csv"},
                    {"probe_visual", "target_probe_visual.csv"},
                    {"rgb_distances", "target_rgb_distances.csv"},
                    {"corrupted_probe_rows", b.corrupted_rows}};
    io::write_text_atomic(out / "target_manifest.json", m.dump(2) + "\n");
    log << "synth: wrote corruption benchmark to " << out.string() << "\n";
    return kExitOk;
  }

  const int persons = s.at("persons").get<int>();
  const int frames = s.at("frames").get<int>();
  const double max_yaw = s.at("max_yaw_deg").get<double>() * std::numbers::pi / 180.0;
  Engine rng = make_engine(seed, 0);
  json people = json::array();
  std::size_t written = 0;
  for (int p = 0; p < persons; ++p) {
    SyntheticBodySpec spec = random_body_spec(rng);
    spec.noise_sigma = s.at("noise").get<double>();
    json sequence = json::array();
    for (int f = 0; f < frames; ++f) {
      BodyPose pose;
      pose.yaw = max_yaw * (2.0 * uniform01(rng) - 1.0);
      const std::uint64_t body_seed = seed * 1000003ULL + static_cast<std::uint64_t>(p) * 1009ULL + f;
      const SyntheticBody body = generate_body(spec, body_seed, pose);
      const std::string id = "p" + std::to_string(p) + "_f" + std::to_string(f);
      io::write_ply(out / "frames" / (id + ".ply"), body.cloud);
      io::write_text_atomic(out / "frames" / (id + "_skeleton.json"), io::format_skeleton(body.joints));
      sequence.push_back(
          {{"id", id}, {"cloud", "frames/" + id + ".ply"}, {"skeleton", "frames/" + id + "_skeleton.json"}});
      ++written;
    }
    people.push_back({{"id", "p" + std::to_string(p)}, {"sequences", {{"0", sequence}}}});
  }
  io::write_text_atomic(out / "manifest.json", json{{"persons", people}}.dump(2) + "\n");
  log << "synth: wrote " << written << " frames and manifest.json to " << out.string() << "\n";
  return kExitOk;
}

int cmd_verify(const json& c, std::ostream& log) {
  const int pairs = c.at("verify").at("pairs").get<int>();
  const int motions = c.at("verify").at("motions").get<int>();
  Engine rng = make_engine(c.at("seed").get<std::uint64_t>(), 0x7e57);

  double worst_theorem = 0.0;
  for (int i = 0; i < pairs; ++i) {
    const Mat6 c1 = random_spd(rng);
    const Mat6 c2 = random_spd(rng);
    const Theorem1Check chk = verify_theorem1(c1, c2);
    worst_theorem = std::max(worst_theorem, chk.deviation() / std::max(1.0, chk.rhs));
  }

  double worst_rotation = 0.0;
  auto relative_gap = [](const Vec6& a, const Vec6& b) {
    double g = 0.0;
    for (int k = 0; k < 6; ++k) g = std::max(g, std::abs(a[k] - b[k]) / std::abs(a[k]));
    return g;
  };
  for (int i = 0; i < motions; ++i) {
    // At least 8 samples so every covariance is full rank and each
    // eigenvalue has a meaningful relative error.
    const std::size_t m = 8 + uniform_index(rng, 43);
    const std::size_t n = 8 + uniform_index(rng, 43);
    std::vector<Vec6> p(m), q(n);
    const Vec3 centre(0.0, 0.0, 2500.0);
    for (auto* set : {&p, &q}) {
      for (Vec6& f : *set) {
        f.head<3>() = centre + 50.0 * Vec3(standard_normal(rng), standard_normal(rng), standard_normal(rng));
        f.tail<3>() = Vec3(standard_normal(rng), standard_normal(rng), standard_normal(rng)).normalized();
      }
    }
    const RigidMotion motion = random_rigid_motion(rng);
    auto moved = [&motion](std::vector<Vec6> v) {
      for (Vec6& f : v) {
        f.head<3>() = motion.r1 * (f.head<3>() + motion.shift);
        f.tail<3>() = motion.r2 * f.tail<3>();
      }
      return v;
    };
    const std::vector<Vec6> p2 = moved(p), q2 = moved(q);
    worst_rotation = std::max(worst_rotation, relative_gap(sorted_eigen(within_voxel_covariance(p).m).values,
                                                           sorted_eigen(within_voxel_covariance(p2).m).values));
    worst_rotation =
        std::max(worst_rotation, relative_gap(sorted_eigen(between_voxel_covariance(p, q).m).values,
                                              sorted_eigen(between_voxel_covariance(p2, q2).m).values));
  }

  const bool ok = worst_theorem <= 1e-8 && worst_rotation <= 1e-8;
  char buf[200];
  std::snprintf(buf, sizeof(buf), "verify: theorem-1 max relative deviation %.3e over %d pairs\n", worst_theorem,
                pairs);
  log << buf;
  std::snprintf(buf, sizeof(buf), "verify: eigenvalue rotation invariance max relative deviation %.3e over %d motions\n",
                worst_rotation, motions);
  log << buf << "verify: " << (ok ? "ok" : "FAILED") << "\n";
  return ok ? kExitOk : kExitNumerical;
}

}  // namespace dreid::cli
