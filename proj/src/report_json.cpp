#include "per/report_json.hpp"

namespace per {

using nlohmann::ordered_json;

ordered_json outcome_json(std::size_t index, std::size_t label, const CertificationOutcome& o) {
  ordered_json j;
  j["index"] = index;
  j["label"] = label;
  j["prediction"] = o.prediction ? static_cast<long long>(*o.prediction) : -1LL;
  j["p_a_lower"] = o.p_a_lower;
  j["radius"] = o.radius;
  return j;
}

ordered_json epoch_json(const EpochMetrics& m) {
  ordered_json j;
  j["epoch"] = m.epoch;
  j["train_loss"] = m.train_loss;
  j["ce_loss"] = m.ce_loss;
  j["regularizer_loss"] = m.regularizer_loss;
  j["sigma_max"] = m.sigma_max;
  j["max_column_sum"] = m.max_column_sum;
  j["regularizer_active"] = m.regularizer_active;
  j["val_class_error"] = m.val_class_error;
  return j;
}

ordered_json eval_report_json(const EvalReport& r) {
  ordered_json j;
  j["worst_class"] = r.worst_class;
  j["class_counts"] = r.class_counts;
  ordered_json sigmas = ordered_json::array();
  for (const auto& s : r.sigmas) {
    ordered_json js;
    js["sigma"] = s.sigma;
    js["abstention_rate"] = s.abstention_rate;
    js["confusion_sigma_max"] = s.confusion_sigma_max;
    js["confusion_max_column_sum"] = s.confusion_max_column_sum;
    ordered_json radii = ordered_json::array();
    for (const auto& m : s.radii) {
      ordered_json jr;
      jr["radius"] = m.radius;
      jr["certified_accuracy"] = m.overall;
      jr["per_class"] = m.per_class;
      jr["class_std"] = m.class_std;
      jr["designated_worst_class_accuracy"] = m.designated_worst_accuracy;
      jr["posthoc_worst_class"] = m.posthoc_worst_class;
      jr["posthoc_worst_class_accuracy"] = m.posthoc_worst_accuracy;
      radii.push_back(std::move(jr));
    }
    js["radii"] = std::move(radii);
    sigmas.push_back(std::move(js));
  }
  j["sigmas"] = std::move(sigmas);
  return j;
}

ordered_json mu_report_json(const MuSimReport& r) {
  ordered_json j;
  j["generator"] = to_string(r.generator);
  j["seed"] = r.seed;
  j["trials"] = r.trials;
  ordered_json dims = ordered_json::array();
  for (const auto& s : r.per_dim) {
    ordered_json d;
    d["dim"] = s.dim;
    d["min"] = s.min;
    d["q1"] = s.q1;
    d["median"] = s.median;
    d["q3"] = s.q3;
    d["max"] = s.max;
    d["mean"] = s.mean;
    d["mad"] = s.mad;
    d["fraction_above_sqrt_dim"] = s.fraction_above_sqrt_dim;
    dims.push_back(std::move(d));
  }
  j["dims"] = std::move(dims);
  return j;
}

ordered_json bound_json(const BoundDiagnostics& b) {
  ordered_json j;
  j["phi"] = b.phi;
  j["spectral_norms"] = b.spectral_norms;
  j["frobenius_norms"] = b.frobenius_norms;
  j["depth"] = b.depth;
  j["width"] = b.width;
  j["input_bound"] = b.input_bound;
  j["m_min"] = b.m_min;
  j["num_classes"] = b.num_classes;
  j["gamma"] = b.gamma;
  j["delta"] = b.delta;
  j["mu"] = b.mu;
  j["rhs"] = b.rhs;
  return j;
}

}  // namespace per
