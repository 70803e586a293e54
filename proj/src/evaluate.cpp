#include "per/evaluate.hpp"

#include <algorithm>
#include <cmath>

#include "per/confusion.hpp"
#include "per/errors.hpp"
#include "per/parallel.hpp"

namespace per {

std::vector<double> per_class_accuracy(const Network& net, const Dataset& data) {
  const auto counts = data.class_counts();
  std::vector<double> correct(data.num_classes, 0.0);
  for (std::size_t q = 0; q < data.size(); ++q)
    if (argmax(forward(net, data.sample(q))) == data.labels[q]) correct[data.labels[q]] += 1.0;
  for (std::size_t j = 0; j < correct.size(); ++j)
    correct[j] = counts[j] ? correct[j] / static_cast<double>(counts[j]) : 0.0;
  return correct;
}

std::size_t identify_worst_class(const Network& net, const Dataset& data) {
  data.require_all_classes();
  const auto acc = per_class_accuracy(net, data);
  return static_cast<std::size_t>(std::min_element(acc.begin(), acc.end()) - acc.begin());
}

double class_std(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size()));
}

RngStream certification_stream(std::uint64_t seed, std::size_t index) {
  return RngStream::make(seed, StreamDomain::CertifyNoise).substream(index);
}

std::vector<CertificationOutcome> certify_dataset(const Network& net, const Dataset& data,
                                                  const SmoothingConfig& cfg, std::uint64_t seed,
                                                  std::size_t workers) {
  cfg.validate(true);
  if (data.dim() != net.input_dim()) throw InputError("dataset feature width differs from network input");
  std::vector<CertificationOutcome> out(data.size());
  parallel_for(data.size(), workers, [&](std::size_t q) {
    out[q] = certify(net, data.sample(q), cfg, certification_stream(seed, q));
  });
  return out;
}

RadiusMetrics radius_metrics(const Dataset& data, const std::vector<CertificationOutcome>& outcomes,
                             double radius, std::size_t worst_class) {
  const auto counts = data.class_counts();
  RadiusMetrics m;
  m.radius = radius;
  m.per_class.assign(data.num_classes, 0.0);
  std::size_t hits = 0;
  for (std::size_t q = 0; q < data.size(); ++q) {
    const auto& o = outcomes[q];
    if (o.prediction && *o.prediction == data.labels[q] && o.radius >= radius) {
      ++hits;
      m.per_class[data.labels[q]] += 1.0;
    }
  }
  for (std::size_t j = 0; j < m.per_class.size(); ++j)
    m.per_class[j] = counts[j] ? m.per_class[j] / static_cast<double>(counts[j]) : 0.0;
  m.overall = data.size() ? static_cast<double>(hits) / static_cast<double>(data.size()) : 0.0;
  m.class_std = class_std(m.per_class);
  m.designated_worst_accuracy = m.per_class.at(worst_class);
  m.posthoc_worst_class = static_cast<std::size_t>(
      std::min_element(m.per_class.begin(), m.per_class.end()) - m.per_class.begin());
  m.posthoc_worst_accuracy = m.per_class[m.posthoc_worst_class];
  return m;
}

EvalReport evaluate_certified(const Network& net, const Dataset& data, const EvalConfig& cfg) {
  data.validate();
  data.require_all_classes();
  if (data.num_classes != net.num_classes()) throw ConfigError("dataset and network class counts differ");
  if (cfg.sigmas.empty()) throw ConfigError("at least one sigma is required");
  EvalReport report;
  report.class_counts = data.class_counts();
  report.worst_class = cfg.worst_class ? *cfg.worst_class : identify_worst_class(net, data);
  if (report.worst_class >= data.num_classes) throw ConfigError("worst class out of range");
  for (std::size_t s = 0; s < cfg.sigmas.size(); ++s) {
    SmoothingConfig sc = cfg.smoothing;
    sc.sigma = cfg.sigmas[s];
    sc.gamma = 0.0;
    auto outcomes = certify_dataset(net, data, sc, cfg.seed, cfg.workers);
    SigmaEval se;
    se.sigma = sc.sigma;
    std::size_t abstain = 0;
    for (const auto& o : outcomes) abstain += o.abstained() ? 1 : 0;
    se.abstention_rate = static_cast<double>(abstain) / static_cast<double>(data.size());
    for (double r : cfg.radii) se.radii.push_back(radius_metrics(data, outcomes, r, report.worst_class));
    const auto conf = build_smoothed_confusion_matrix(
        net, data, 0.0, sc.sigma, cfg.confusion_noise,
        RngStream::make(cfg.seed, StreamDomain::EvalConfusion, s), cfg.workers);
    se.confusion_sigma_max = top_singular_triple(conf).sigma_max;
    se.confusion_max_column_sum = max_column_sum(conf);
    if (cfg.keep_outcomes) se.outcomes = std::move(outcomes);
    report.sigmas.push_back(std::move(se));
  }
  return report;
}

double phi_diagnostic(const Network& net, double input_bound) {
  const auto n = static_cast<double>(net.depth());
  const auto h = static_cast<double>(net.max_width());
  double product = 1.0;
  double ratio_sum = 0.0;
  for (const auto& w : net.layers()) {
    const double s = spectral_norm(w);
    const double f = frobenius_norm(w);
    product *= s * s;
    if (s > 0.0) ratio_sum += (f * f) / (s * s);
  }
  return input_bound * input_bound * n * n * h * std::log(n * h) * product * ratio_sum;
}

BoundDiagnostics bound_diagnostics(const Network& net, const Dataset& data, double gamma, double delta) {
  if (!(gamma > 0.0)) throw DomainError("bound diagnostics need gamma > 0");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
  data.validate();
  BoundDiagnostics b;
  for (const auto& w : net.layers()) {
    b.spectral_norms.push_back(spectral_norm(w));
    b.frobenius_norms.push_back(frobenius_norm(w));
  }
  b.depth = net.depth();
  b.width = net.max_width();
  b.input_bound = data.max_row_norm();
  b.m_min = data.min_class_count();
  b.num_classes = data.num_classes;
  b.gamma = gamma;
  b.delta = delta;
  b.mu = std::sqrt(static_cast<double>(b.num_classes));
  b.phi = phi_diagnostic(net, b.input_bound);
  if (b.m_min <= 8 * b.num_classes)
    throw NumericError("bound is vacuous: smallest class has " + std::to_string(b.m_min) +
                       " samples, needs more than 8·d_y = " + std::to_string(8 * b.num_classes));
  const double dy = static_cast<double>(b.num_classes);
  const double mmin = static_cast<double>(b.m_min);
  const double log_term = std::log(static_cast<double>(b.depth) * mmin / delta);
  b.rhs = std::sqrt(b.mu * b.mu * dy * (b.phi + log_term) / ((mmin - 8.0 * dy) * gamma * gamma));
  return b;
}

}  // namespace per
