#include "dreid/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Geometry>
#include <Eigen/QR>

#include "dreid/error.hpp"

namespace dreid {

namespace {

constexpr std::uint64_t kBodyStream = 0xb0d1;
constexpr std::uint64_t kEmbeddingSeed = 0x5eed0fe7;

Vec3 gaussian3(Engine& rng) { return {standard_normal(rng), standard_normal(rng), standard_normal(rng)}; }

Vec3 unit_sphere(Engine& rng) {
  for (;;) {
    const Vec3 g = gaussian3(rng);
    const double n = g.norm();
    if (n > 1e-12) return g / n;
  }
}

std::size_t sample_count(double density, double area) {
  return static_cast<std::size_t>(std::llround(density * area));
}

struct Surfel {
  Vec3 p;
  Vec3 n;
};

class BodyBuilder {
 public:
  BodyBuilder(const SyntheticBodySpec& spec, const BodyPose& pose, Engine& rng)
      : spec_(spec), rot_(yaw_rotation(pose.yaw)), pos_(pose.position), rng_(rng) {}

  void ellipsoid(const Vec3& center, double a, double b, double c, BodyPart part) {
    constexpr double p = 1.6075;
    const double area = 4.0 * std::numbers::pi *
                        std::pow((std::pow(a * b, p) + std::pow(a * c, p) + std::pow(b * c, p)) / 3.0, 1.0 / p);
    const double shortest = std::min({a, b, c});
    const std::size_t count = sample_count(spec_.density, area);
    for (std::size_t i = 0; i < count;) {
      const Vec3 u = unit_sphere(rng_);
      // Area element of the sphere-to-ellipsoid map, relative to its maximum.
      const double g = shortest * std::sqrt(u.x() * u.x() / (a * a) + u.y() * u.y() / (b * b) +
                                            u.z() * u.z() / (c * c));
      if (uniform01(rng_) >= g) continue;
      const Vec3 q(a * u.x(), b * u.y(), c * u.z());
      const Vec3 n = Vec3(q.x() / (a * a), q.y() / (b * b), q.z() / (c * c)).normalized();
      emit({center + q, n}, part);
      ++i;
    }
  }

  void sphere(const Vec3& center, double r, BodyPart part) {
    const std::size_t count = sample_count(spec_.density, 4.0 * std::numbers::pi * r * r);
    for (std::size_t i = 0; i < count; ++i) {
      const Vec3 u = unit_sphere(rng_);
      emit({center + r * u, u}, part);
    }
  }

  // Vertical cylinder wall from top_center down by `length`.
  void cylinder(const Vec3& top_center, double r, double length, BodyPart part) {
    const std::size_t count = sample_count(spec_.density, 2.0 * std::numbers::pi * r * length);
    for (std::size_t i = 0; i < count; ++i) {
      const double theta = 2.0 * std::numbers::pi * uniform01(rng_);
      const double h = length * uniform01(rng_);
      const Vec3 n(std::cos(theta), 0.0, std::sin(theta));
      emit({top_center + Vec3(r * n.x(), -h, r * n.z()), n}, part);
    }
  }

  Vec3 place(const Vec3& body_point) const { return rot_ * body_point + pos_; }

  std::vector<Surfel> surfels;
  std::vector<BodyPart> parts;

 private:
  void emit(const Surfel& s, BodyPart part) {
    const Vec3 p = place(s.p);
    const Vec3 n = rot_ * s.n;
    if (n.dot(-p) <= 0.0) return;
    surfels.push_back({p, n});
    parts.push_back(part);
  }

  const SyntheticBodySpec& spec_;
  Mat3 rot_;
  Vec3 pos_;
  Engine& rng_;
};

Eigen::MatrixXd fixed_gaussian(Engine& rng, Eigen::Index rows, Eigen::Index cols, double scale) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = scale * standard_normal(rng);
  }
  return m;
}

struct Embedding {
  Eigen::MatrixXd w_v;
  Eigen::MatrixXd w_d;
  Eigen::VectorXd b_d;
};

Embedding fixed_embedding(const PairedFeatureParams& p) {
  Engine rng = make_engine(kEmbeddingSeed, 0);
  Embedding e;
  const double s = 1.0 / std::sqrt(static_cast<double>(p.latent_dim));
  e.w_v = fixed_gaussian(rng, p.visual_dim, p.latent_dim, 1.5 * s);
  e.w_d = fixed_gaussian(rng, p.depth_dim, p.latent_dim, 1.5 * s);
  e.b_d = fixed_gaussian(rng, p.depth_dim, 1, 0.5);
  return e;
}

Eigen::VectorXd view_offset(const PairedFeatureParams& p, int view) {
  Engine rng = make_engine(kEmbeddingSeed, 1000 + static_cast<std::uint64_t>(view));
  return fixed_gaussian(rng, p.visual_dim, 1, p.view_sigma);
}

Eigen::VectorXd noise_vector(Engine& rng, Eigen::Index n, double sigma) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = sigma * standard_normal(rng);
  return v;
}

Eigen::VectorXd visual_feature(const Embedding& e, const PairedFeatureParams& p, const Eigen::VectorXd& z,
                               int view, Engine& rng) {
  return (e.w_v * z).array().tanh().matrix() + view_offset(p, view) + noise_vector(rng, p.visual_dim, p.noise);
}

Eigen::VectorXd depth_feature(const Embedding& e, const PairedFeatureParams& p, const Eigen::VectorXd& z,
                              Engine& rng) {
  return (e.w_d * z + e.b_d).array().sin().matrix() + noise_vector(rng, p.depth_dim, p.noise);
}

void check_paired_params(const PairedFeatureParams& p) {
  if (p.latent_dim < 1 || p.visual_dim < 1 || p.depth_dim < 1 || !(p.view_sigma >= 0.0) || !(p.noise >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid paired feature parameters");
  }
}

}  // namespace

void SyntheticBodySpec::validate() const {
  const double dims[] = {torso_a, torso_b, torso_c, head_radius, arm_radius,
                         arm_length, leg_radius, leg_length, density};
  for (double d : dims) {
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw Error(ErrorCode::kInvalidArgument, "body dimensions and density must be positive");
    }
  }
  if (!(noise_sigma >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "noise sigma must be non-negative");
}

Mat3 yaw_rotation(double radians) { return Eigen::AngleAxisd(radians, Vec3::UnitY()).toRotationMatrix(); }

SyntheticBody generate_body(const SyntheticBodySpec& spec, std::uint64_t seed, const BodyPose& pose) {
  spec.validate();
  Engine rng = make_engine(seed, kBodyStream);
  BodyBuilder b(spec, pose, rng);

  const double ta = spec.torso_a;
  const double tb = spec.torso_b;
  const Vec3 torso_center(0.0, 0.8 * tb, 0.0);
  const double neck_y = 1.8 * tb;
  const double shoulder_y = 1.55 * tb;
  const Vec3 head_center(0.0, neck_y + 1.25 * spec.head_radius, 0.0);
  const double arm_x = 1.1 * ta + spec.arm_radius + 10.0;
  const double hip_x = 0.5 * ta;

  b.ellipsoid(torso_center, ta, tb, spec.torso_c, BodyPart::kTorso);
  b.sphere(head_center, spec.head_radius, BodyPart::kHead);
  b.cylinder({arm_x, shoulder_y, 0.0}, spec.arm_radius, spec.arm_length, BodyPart::kLeftArm);
  b.cylinder({-arm_x, shoulder_y, 0.0}, spec.arm_radius, spec.arm_length, BodyPart::kRightArm);
  b.cylinder({hip_x, 0.0, 0.0}, spec.leg_radius, spec.leg_length, BodyPart::kLeftLeg);
  b.cylinder({-hip_x, 0.0, 0.0}, spec.leg_radius, spec.leg_length, BodyPart::kRightLeg);

  SyntheticBody body;
  body.cloud.points.reserve(b.surfels.size());
  for (const Surfel& s : b.surfels) {
    Vec3 p = s.p;
    if (spec.noise_sigma > 0.0) p += spec.noise_sigma * gaussian3(rng);
    body.cloud.points.push_back(p);
  }
  body.labels = std::move(b.parts);
  body.head_center = b.place(head_center);

  const double shoulder_x = 0.95 * ta;
  const std::pair<Joint, Vec3> joints[] = {
      {Joint::kHead, head_center},
      {Joint::kNeck, {0.0, neck_y, 0.0}},
      {Joint::kLeftShoulder, {shoulder_x, shoulder_y, 0.0}},
      {Joint::kRightShoulder, {-shoulder_x, shoulder_y, 0.0}},
      {Joint::kLeftElbow, {arm_x, shoulder_y - 0.5 * spec.arm_length, 0.0}},
      {Joint::kRightElbow, {-arm_x, shoulder_y - 0.5 * spec.arm_length, 0.0}},
      {Joint::kLeftHand, {arm_x, shoulder_y - spec.arm_length, 0.0}},
      {Joint::kRightHand, {-arm_x, shoulder_y - spec.arm_length, 0.0}},
      {Joint::kTorso, torso_center},
      {Joint::kLeftHip, {hip_x, 0.0, 0.0}},
      {Joint::kRightHip, {-hip_x, 0.0, 0.0}},
      {Joint::kLeftKnee, {hip_x, -0.5 * spec.leg_length, 0.0}},
      {Joint::kRightKnee, {-hip_x, -0.5 * spec.leg_length, 0.0}},
      {Joint::kLeftFoot, {hip_x, -spec.leg_length, 0.0}},
      {Joint::kRightFoot, {-hip_x, -spec.leg_length, 0.0}},
  };
  for (const auto& [joint, local] : joints) {
    Vec3 p = b.place(local);
    if (spec.noise_sigma > 0.0) p += spec.noise_sigma * gaussian3(rng);
    body.joints.set(joint, p);
  }
  return body;
}

SyntheticBodySpec random_body_spec(Engine& rng, double spread) {
  if (!(spread >= 0.0 && spread < 1.0)) throw Error(ErrorCode::kInvalidArgument, "spread must lie in [0, 1)");
  auto jitter = [&](double v) { return v * (1.0 + spread * (2.0 * uniform01(rng) - 1.0)); };
  SyntheticBodySpec s;
  s.torso_a = jitter(s.torso_a);
  s.torso_b = jitter(s.torso_b);
  s.torso_c = jitter(s.torso_c);
  s.head_radius = jitter(s.head_radius);
  s.arm_radius = jitter(s.arm_radius);
  s.arm_length = jitter(s.arm_length);
  s.leg_radius = jitter(s.leg_radius);
  s.leg_length = jitter(s.leg_length);
  return s;
}

Mat6 random_spd(Engine& rng, double dmin, double dmax) {
  if (!(dmin > 0.0 && dmax >= dmin)) throw Error(ErrorCode::kInvalidArgument, "need 0 < dmin <= dmax");
  Mat6 g;
  for (int j = 0; j < 6; ++j) {
    for (int i = 0; i < 6; ++i) g(i, j) = standard_normal(rng);
  }
  Eigen::HouseholderQR<Mat6> qr(g);
  Mat6 q = qr.householderQ();
  for (int j = 0; j < 6; ++j) {
    if (qr.matrixQR()(j, j) < 0.0) q.col(j) *= -1.0;
  }
  Vec6 d;
  const double lo = std::log(dmin);
  const double hi = std::log(dmax);
  for (int i = 0; i < 6; ++i) d[i] = std::exp(lo + (hi - lo) * uniform01(rng));
  const Mat6 c = q.transpose() * d.asDiagonal() * q;
  return 0.5 * (c + c.transpose());
}

Mat3 random_rotation(Engine& rng) {
  Eigen::Quaterniond q(standard_normal(rng), standard_normal(rng), standard_normal(rng), standard_normal(rng));
  while (q.norm() < 1e-12) {
    q = Eigen::Quaterniond(standard_normal(rng), standard_normal(rng), standard_normal(rng), standard_normal(rng));
  }
  return q.normalized().toRotationMatrix();
}

RigidMotion random_rigid_motion(Engine& rng, double shift_scale) {
  RigidMotion m;
  m.r1 = random_rotation(rng);
  m.r2 = random_rotation(rng);
  for (int i = 0; i < 3; ++i) m.shift[i] = shift_scale * (2.0 * uniform01(rng) - 1.0);
  return m;
}

AuxiliaryDataset generate_paired_features(int persons, int views, std::uint64_t seed,
                                          const PairedFeatureParams& params) {
  if (persons < 2) throw Error(ErrorCode::kInvalidArgument, "need at least 2 persons");
  if (views < 1) throw Error(ErrorCode::kInvalidArgument, "need at least 1 view");
  check_paired_params(params);
  const Embedding e = fixed_embedding(params);
  Engine rng = make_engine(seed, 0xa0a0);

  const Eigen::Index n = static_cast<Eigen::Index>(persons) * views;
  AuxiliaryDataset aux;
  aux.visual.resize(n, params.visual_dim);
  aux.depth.resize(n, params.depth_dim);
  aux.labels.reserve(static_cast<std::size_t>(n));
  Eigen::Index row = 0;
  for (int person = 0; person < persons; ++person) {
    const Eigen::VectorXd z = noise_vector(rng, params.latent_dim, 1.0);
    for (int v = 0; v < views; ++v, ++row) {
      aux.visual.row(row) = visual_feature(e, params, z, v, rng).transpose();
      aux.depth.row(row) = depth_feature(e, params, z, rng).transpose();
      aux.labels.push_back(person);
    }
  }
  return aux;
}

CorruptionBenchmark make_corruption_benchmark(std::uint64_t seed, int aux_persons, int aux_views,
                                              int target_persons, double corrupt_fraction,
                                              const PairedFeatureParams& params) {
  if (target_persons < 2) throw Error(ErrorCode::kInvalidArgument, "need at least 2 target persons");
  if (!(corrupt_fraction >= 0.0 && corrupt_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "corrupt fraction must lie in [0, 1]");
  }
  CorruptionBenchmark bench;
  bench.aux = generate_paired_features(aux_persons, aux_views, seed, params);

  const Embedding e = fixed_embedding(params);
  Engine rng = make_engine(seed, 0xc0c0);
  bench.gallery_visual.resize(target_persons, params.visual_dim);
  bench.probe_visual.resize(target_persons, params.visual_dim);
  for (int p = 0; p < target_persons; ++p) {
    const Eigen::VectorXd z = noise_vector(rng, params.latent_dim, 1.0);
    bench.gallery_visual.row(p) = visual_feature(e, params, z, 0, rng).transpose();
    bench.probe_visual.row(p) = visual_feature(e, params, z, 1 + p % std::max(1, aux_views - 1), rng).transpose();
    bench.gallery_ids.push_back(p);
    bench.probe_ids.push_back(p);
  }

  Eigen::MatrixXd d(target_persons, target_persons);
  for (int i = 0; i < target_persons; ++i) {
    for (int j = 0; j < target_persons; ++j) d(i, j) = (bench.probe_visual.row(i) - bench.gallery_visual.row(j)).norm();
  }
  const double scale = d.mean();
  const auto k = static_cast<std::size_t>(std::llround(corrupt_fraction * target_persons));
  for (std::size_t r : sample_without_replacement(rng, static_cast<std::size_t>(target_persons), k)) {
    for (int j = 0; j < target_persons; ++j) d(static_cast<Eigen::Index>(r), j) = 2.0 * scale * uniform01(rng);
    bench.corrupted_rows.push_back(static_cast<int>(r));
  }
  std::sort(bench.corrupted_rows.begin(), bench.corrupted_rows.end());
  bench.rgb_distances = d;
  return bench;
}

}  // namespace dreid
