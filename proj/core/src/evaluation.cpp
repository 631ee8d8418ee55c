#include "dreid/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "dreid/error.hpp"
#include "dreid/parallel.hpp"
#include "dreid/rng.hpp"

namespace dreid {

namespace {

struct ClassScore {
  double distance;
  Eigen::Index first_entry;  // gallery index of the closest entry
  int label;
};

std::vector<ClassScore> class_scores(const Eigen::MatrixXd& dist, std::span<const int> gallery_labels,
                                     Eigen::Index row) {
  std::vector<ClassScore> scores;
  std::map<int, std::size_t> slot;
  for (Eigen::Index j = 0; j < dist.cols(); ++j) {
    const int label = gallery_labels[static_cast<std::size_t>(j)];
    const double d = dist(row, j);
    auto [it, inserted] = slot.try_emplace(label, scores.size());
    if (inserted) {
      scores.push_back({d, j, label});
    } else if (d < scores[it->second].distance) {
      scores[it->second].distance = d;
      scores[it->second].first_entry = j;
    }
  }
  return scores;
}

}  // namespace

bool CmcCurve::is_monotone() const {
  for (std::size_t k = 1; k < accuracies.size(); ++k) {
    if (accuracies[k] < accuracies[k - 1]) return false;
  }
  return accuracies.empty() || accuracies.back() <= 1.0;
}

std::size_t true_class_rank(const Eigen::MatrixXd& dist, std::span<const int> gallery_labels,
                            int probe_label, Eigen::Index probe_row) {
  auto scores = class_scores(dist, gallery_labels, probe_row);
  std::stable_sort(scores.begin(), scores.end(), [](const ClassScore& a, const ClassScore& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.first_entry < b.first_entry;
  });
  for (std::size_t r = 0; r < scores.size(); ++r) {
    if (scores[r].label == probe_label) return r + 1;
  }
  return 0;
}

CmcCurve cmc_evaluate(const Eigen::MatrixXd& dist, std::span<const int> gallery_labels,
                      std::span<const int> probe_labels, std::size_t max_rank) {
  if (static_cast<std::size_t>(dist.rows()) != probe_labels.size() ||
      static_cast<std::size_t>(dist.cols()) != gallery_labels.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "distance matrix shape does not match label lists");
  }
  const std::set<int> classes(gallery_labels.begin(), gallery_labels.end());
  const std::size_t k_max = max_rank == 0 ? classes.size() : max_rank;

  CmcCurve curve;
  curve.accuracies.assign(k_max, 0.0);
  if (probe_labels.empty()) return curve;

  std::vector<std::size_t> hits_at(k_max + 1, 0);
  for (std::size_t i = 0; i < probe_labels.size(); ++i) {
    const int label = probe_labels[i];
    if (!classes.contains(label)) {
      ++curve.missing_probes;
      continue;
    }
    const std::size_t r = true_class_rank(dist, gallery_labels, label, static_cast<Eigen::Index>(i));
    if (r >= 1 && r <= k_max) ++hits_at[r];
  }
  std::size_t cumulative = 0;
  const double n = static_cast<double>(probe_labels.size());
  for (std::size_t k = 1; k <= k_max; ++k) {
    cumulative += hits_at[k];
    curve.accuracies[k - 1] = static_cast<double>(cumulative) / n;
  }
  return curve;
}

CmcCurve average_curves(std::span<const CmcCurve> curves) {
  CmcCurve mean;
  if (curves.empty()) return mean;
  std::size_t len = 0;
  for (const auto& c : curves) len = std::max(len, c.accuracies.size());
  mean.accuracies.assign(len, 0.0);
  for (const auto& c : curves) {
    for (std::size_t k = 0; k < len; ++k) {
      // Shorter curves have saturated; carry their last value forward.
      const double v = c.accuracies.empty() ? 0.0
                                            : c.accuracies[std::min(k, c.accuracies.size() - 1)];
      mean.accuracies[k] += v;
    }
    mean.missing_probes += c.missing_probes;
  }
  for (double& a : mean.accuracies) a /= static_cast<double>(curves.size());
  return mean;
}

TrialSplit make_trial_split(std::span<const ProtocolSample> samples, const ProtocolConfig& config,
                            int trial, std::vector<std::string>* warnings) {
  if (!(config.train_fraction >= 0.0 && config.train_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "train_fraction must lie in [0, 1)");
  }
  std::vector<int> persons;
  for (const auto& s : samples) persons.push_back(s.person);
  std::sort(persons.begin(), persons.end());
  persons.erase(std::unique(persons.begin(), persons.end()), persons.end());

  Engine rng = make_engine(config.seed, static_cast<std::uint64_t>(trial));
  shuffle(std::span<int>(persons), rng);
  const auto n_train = static_cast<std::size_t>(std::floor(config.train_fraction * persons.size()));
  std::set<int> train_people(persons.begin(), persons.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<int> test_people(persons.begin() + static_cast<std::ptrdiff_t>(n_train), persons.end());
  std::sort(test_people.begin(), test_people.end());

  const int shots = config.gallery_shots > 0
                        ? config.gallery_shots
                        : (config.protocol == Protocol::kMultiShot ? kMultiShotGallerySize : 1);

  TrialSplit split;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (train_people.contains(samples[i].person)) split.train.push_back(i);
  }

  std::set<std::size_t> chosen;
  for (int person : test_people) {
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (samples[i].person == person && samples[i].group == config.gallery_group) candidates.push_back(i);
    }
    if (candidates.empty()) {
      if (warnings) warnings->push_back("person " + std::to_string(person) + " has no gallery frames");
      continue;
    }
    if (candidates.size() < static_cast<std::size_t>(shots)) {
      if (warnings) {
        warnings->push_back("person " + std::to_string(person) + " has " +
                            std::to_string(candidates.size()) + " gallery frames for " +
                            std::to_string(shots) + " shots; sampling with replacement");
      }
      for (int s = 0; s < shots; ++s) {
        const std::size_t pick = candidates[uniform_index(rng, candidates.size())];
        split.gallery.push_back(pick);
        chosen.insert(pick);
      }
    } else {
      for (std::size_t idx : sample_without_replacement(rng, candidates.size(), static_cast<std::size_t>(shots))) {
        split.gallery.push_back(candidates[idx]);
        chosen.insert(candidates[idx]);
      }
    }
  }

  const std::set<int> test_set(test_people.begin(), test_people.end());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (test_set.contains(samples[i].person) && samples[i].group == config.probe_group && !chosen.contains(i)) {
      split.probe.push_back(i);
    }
  }
  return split;
}

ProtocolResult run_protocol(std::span<const ProtocolSample> samples, const ProtocolConfig& config,
                            const Matcher& matcher) {
  if (config.trials < 1) throw Error(ErrorCode::kInvalidArgument, "trials must be at least 1");
  const auto trials = static_cast<std::size_t>(config.trials);
  std::vector<CmcCurve> curves(trials);
  std::vector<std::vector<std::string>> notes(trials);
  parallel_for(trials, config.threads, [&](std::size_t t) {
    const int trial = static_cast<int>(t);
    const TrialSplit split = make_trial_split(samples, config, trial, &notes[t]);
    const Eigen::MatrixXd dist = matcher(split.train, split.gallery, split.probe);
    if (static_cast<std::size_t>(dist.rows()) != split.probe.size() ||
        static_cast<std::size_t>(dist.cols()) != split.gallery.size()) {
      throw Error(ErrorCode::kDimensionMismatch, "matcher returned a matrix of the wrong shape");
    }
    std::vector<int> gallery_labels, probe_labels;
    for (std::size_t i : split.gallery) gallery_labels.push_back(samples[i].person);
    for (std::size_t i : split.probe) probe_labels.push_back(samples[i].person);
    curves[t] = cmc_evaluate(dist, gallery_labels, probe_labels, config.max_rank);
    if (curves[t].missing_probes > 0) {
      notes[t].push_back("trial " + std::to_string(t) + ": " + std::to_string(curves[t].missing_probes) +
                         " probes have no gallery class");
    }
  });
  ProtocolResult result;
  for (auto& n : notes) result.warnings.insert(result.warnings.end(), n.begin(), n.end());
  result.trials = std::move(curves);
  result.mean = average_curves(result.trials);
  return result;
}

}  // namespace dreid
