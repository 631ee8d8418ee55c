#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace dreid {

/// Cumulative match characteristic; accuracies[k-1] is the rank-k rate.
struct CmcCurve {
  std::vector<double> accuracies;
  /// Probes whose identity is absent from the gallery (counted as misses).
  std::size_t missing_probes = 0;

  std::size_t max_rank() const { return accuracies.size(); }
  double rank(std::size_t k) const { return accuracies.at(k - 1); }
  bool is_monotone() const;
};

/// Ranks gallery classes per probe by the minimum distance over each class's
/// gallery entries. Ties between classes go to the class whose closest entry
/// comes first in gallery order. `max_rank` 0 means one rank per gallery
/// class.
CmcCurve cmc_evaluate(const Eigen::MatrixXd& dist, std::span<const int> gallery_labels,
                      std::span<const int> probe_labels, std::size_t max_rank = 0);

/// 1-based rank of the probe's true class, or 0 when it is not in the gallery.
std::size_t true_class_rank(const Eigen::MatrixXd& dist, std::span<const int> gallery_labels,
                            int probe_label, Eigen::Index probe_row);

CmcCurve average_curves(std::span<const CmcCurve> curves);

enum class Protocol { kSingleShot, kMultiShot };

inline constexpr int kMultiShotGallerySize = 5;

/// A sample as seen by the protocol: whose it is and which sequence group it
/// came from. Feature data stays with the caller, addressed by index.
struct ProtocolSample {
  int person = 0;
  int group = 0;
};

struct ProtocolConfig {
  Protocol protocol = Protocol::kSingleShot;
  int trials = 10;
  std::uint64_t seed = 0;
  int gallery_group = 0;
  int probe_group = 0;
  /// 0 picks 1 (single-shot) or 5 (multi-shot).
  int gallery_shots = 0;
  double train_fraction = 0.5;
  std::size_t max_rank = 0;
  /// Worker threads for independent trials; 0 uses the hardware concurrency.
  unsigned threads = 1;
};

/// Returns a probe x gallery distance matrix given sample indices.
using Matcher = std::function<Eigen::MatrixXd(std::span<const std::size_t> train,
                                              std::span<const std::size_t> gallery,
                                              std::span<const std::size_t> probe)>;

struct TrialSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> gallery;
  std::vector<std::size_t> probe;
};

struct ProtocolResult {
  std::vector<CmcCurve> trials;
  CmcCurve mean;
  std::vector<std::string> warnings;
};

/// Deterministic split for one trial: the trial's RNG stream is derived
/// from (seed, trial).
TrialSplit make_trial_split(std::span<const ProtocolSample> samples, const ProtocolConfig& config,
                            int trial, std::vector<std::string>* warnings = nullptr);

/// Trials may run concurrently (see ProtocolConfig::threads), so `matcher`
/// must be safe to call from several threads at once. Results do not depend
/// on the thread count.
ProtocolResult run_protocol(std::span<const ProtocolSample> samples, const ProtocolConfig& config,
                            const Matcher& matcher);

}  // namespace dreid
