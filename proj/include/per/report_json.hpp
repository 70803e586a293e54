#pragma once

#include <json.hpp>

#include "per/certify.hpp"
#include "per/evaluate.hpp"
#include "per/mu_sim.hpp"
#include "per/per_train.hpp"

namespace per {

/// {index, label, prediction, p_a_lower, radius}; prediction −1 means abstain.
nlohmann::ordered_json outcome_json(std::size_t index, std::size_t label, const CertificationOutcome& o);
nlohmann::ordered_json epoch_json(const EpochMetrics& m);
nlohmann::ordered_json eval_report_json(const EvalReport& r);
nlohmann::ordered_json mu_report_json(const MuSimReport& r);
nlohmann::ordered_json bound_json(const BoundDiagnostics& b);

}  // namespace per
