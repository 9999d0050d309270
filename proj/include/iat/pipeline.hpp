#pragma once

// Dataset preparation shared by the command line, the service and the tests.

#include <iat/detectors.hpp>
#include <iat/evaluation.hpp>
#include <iat/features.hpp>

namespace iat {

struct PipelineOptions {
  double selection_threshold = 0.75;
  bool per_fold_selection = false;
};

inline const std::vector<Session>& variant_sessions(const Datasets& d, Variant v) {
  return v == Variant::Unpruned ? d.unpruned_sessions : d.pruned_sessions;
}

/// Matrix a detector trains on: the correlation-pruned feature matrix, or the
/// one-column ratio matrix for the baseline. With per-fold selection the mask
/// is left all-true and recomputed inside each fold.
inline FeatureMatrix detector_matrix(const Datasets& d, DetectorKind kind, Variant v,
                                     const PipelineOptions& opt = {}) {
  if (kind == DetectorKind::Ratio) return ratio_matrix(variant_sessions(d, v), v);
  const auto& m = v == Variant::Unpruned ? d.unpruned : d.pruned;
  if (opt.per_fold_selection) return m;
  return select_features(m, opt.selection_threshold);
}

inline EvalReport evaluate(const Datasets& d, DetectorKind kind, Variant v,
                           const TrainConfig& cfg, const Scheme& scheme,
                           const PipelineOptions& opt = {}) {
  CvOptions cv;
  cv.per_fold_selection = opt.per_fold_selection && kind != DetectorKind::Ratio;
  cv.selection_threshold = opt.selection_threshold;
  return cross_validate(kind, detector_matrix(d, kind, v, opt), cfg, scheme, cv);
}

}  // namespace iat
