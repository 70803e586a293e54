#include "per/certify.hpp"

#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <limits>
#include <string>

#include "per/errors.hpp"
#include "per/normal.hpp"
#include "per/parallel.hpp"

namespace per {

void SmoothingConfig::validate(bool require_positive_sigma) const {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("sigma must be nonnegative");
  if (require_positive_sigma && !(sigma > 0.0)) throw ConfigError("certification needs sigma > 0");
  if (n_selection < 1) throw ConfigError("n0 must be at least 1");
  if (n_estimation < 1) throw ConfigError("n must be at least 1");
  if (n_estimation < n_selection) throw ConfigError("n must be at least n0");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (!(gamma >= 0.0)) throw ConfigError("gamma must be nonnegative");
}

double certified_radius(double p_a_low, double p_b_high, double sigma) {
  if (!(p_b_high > 0.0 && p_b_high <= p_a_low && p_a_low < 1.0))
    throw DomainError("certified_radius needs 0 < p_b_high <= p_a_low < 1");
  if (!(sigma > 0.0)) throw DomainError("certified_radius needs sigma > 0");
  const double r = 0.5 * sigma * (inverse_normal_cdf(p_a_low) - inverse_normal_cdf(p_b_high));
  return std::max(0.0, r);
}

double clopper_pearson_lower(std::size_t k, std::size_t n, double alpha) {
  if (n == 0 || k > n) throw DomainError("clopper_pearson_lower needs 0 <= k <= n, n >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  if (k == 0) return 0.0;
  if (k == n) return std::pow(alpha, 1.0 / static_cast<double>(n));
  // P(X >= k | p) = I_p(k, n − k + 1) rises with p; find where it equals α.
  const double a = static_cast<double>(k);
  const double b = static_cast<double>(n - k + 1);
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (boost::math::ibeta(a, b, mid) < alpha)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

std::vector<std::size_t> sample_votes(const Network& net, std::span<const double> x, double sigma,
                                      std::size_t n_draws, const RngStream& stream,
                                      std::size_t workers) {
  const std::size_t d = net.input_dim();
  if (x.size() != d) throw InputError("input length differs from network input dimension");
  const std::size_t k = net.num_classes();
  // Fixed-size blocks of draws; each block tallies independently and
  // blocks merge by integer addition.
  constexpr std::size_t kBlock = 256;
  const std::size_t blocks = (n_draws + kBlock - 1) / kBlock;
  std::vector<std::vector<std::size_t>> partial(blocks, std::vector<std::size_t>(k, 0));
  parallel_for(blocks, workers, [&](std::size_t b) {
    std::vector<double> noisy(d);
    RngStream s = stream;
    const std::size_t end = std::min(n_draws, (b + 1) * kBlock);
    for (std::size_t j = b * kBlock; j < end; ++j) {
      s.counter = stream.counter + static_cast<std::uint64_t>(j) * d;
      fill_gaussian(s, noisy, sigma);
      for (std::size_t i = 0; i < d; ++i) noisy[i] += x[i];
      ++partial[b][argmax(forward(net, noisy))];
    }
  });
  std::vector<std::size_t> votes(k, 0);
  for (const auto& p : partial)
    for (std::size_t c = 0; c < k; ++c) votes[c] += p[c];
  return votes;
}

std::vector<std::size_t> smoothed_predict(const Network& net, std::span<const double> x,
                                          const SmoothingConfig& cfg, const RngStream& stream,
                                          std::size_t workers) {
  if (cfg.n_estimation < 1) throw ConfigError("n must be at least 1");
  return sample_votes(net, x, cfg.sigma, cfg.n_estimation, stream, workers);
}

bool margin_indicator(std::span<const double> logits, std::size_t c, std::size_t y_hint,
                      double gamma) {
  double runner_up = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < logits.size(); ++j)
    if (j != c) runner_up = std::max(runner_up, logits[j]);
  if (c == y_hint) return logits[c] > runner_up + gamma;
  return logits[c] + gamma > runner_up;
}

std::vector<std::size_t> margin_indicator_counts(const Network& net, std::span<const double> x,
                                                 std::size_t y_hint, double gamma, double sigma,
                                                 std::size_t n_draws, const RngStream& stream) {
  const std::size_t d = net.input_dim();
  if (x.size() != d) throw InputError("input length differs from network input dimension");
  const std::size_t k = net.num_classes();
  if (y_hint >= k) throw InputError("class index " + std::to_string(y_hint) + " out of range");
  if (!(gamma >= 0.0)) throw DomainError("margin must be nonnegative");
  std::vector<std::size_t> counts(k, 0);
  std::vector<double> noisy(d);
  RngStream s = stream;
  for (std::size_t j = 0; j < n_draws; ++j) {
    s.counter = stream.counter + static_cast<std::uint64_t>(j) * d;
    fill_gaussian(s, noisy, sigma);
    for (std::size_t i = 0; i < d; ++i) noisy[i] += x[i];
    const auto logits = forward(net, noisy);
    for (std::size_t c = 0; c < k; ++c)
      if (margin_indicator(logits, c, y_hint, gamma)) ++counts[c];
  }
  return counts;
}

std::size_t margin_smoothed_predict(const Network& net, std::span<const double> x,
                                    std::size_t y_hint, double gamma, double sigma,
                                    std::size_t n_draws, const RngStream& stream) {
  const auto counts = margin_indicator_counts(net, x, y_hint, gamma, sigma, n_draws, stream);
  return static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

CertificationOutcome certify(const Network& net, std::span<const double> x,
                             const SmoothingConfig& cfg, const RngStream& stream,
                             std::size_t workers) {
  cfg.validate(true);
  const std::size_t d = net.input_dim();
  const auto selection = sample_votes(net, x, cfg.sigma, cfg.n_selection, stream, workers);
  const auto candidate = static_cast<std::size_t>(
      std::max_element(selection.begin(), selection.end()) - selection.begin());
  const RngStream estimation_stream =
      stream.at(stream.counter + static_cast<std::uint64_t>(cfg.n_selection) * d);
  const auto estimation = sample_votes(net, x, cfg.sigma, cfg.n_estimation, estimation_stream, workers);

  CertificationOutcome out;
  out.samples_used = cfg.n_selection + cfg.n_estimation;
  out.candidate = candidate;
  out.candidate_votes = estimation[candidate];
  out.p_a_lower = clopper_pearson_lower(estimation[candidate], cfg.n_estimation, cfg.alpha);
  if (out.p_a_lower > 0.5) {
    out.prediction = candidate;
    out.radius = cfg.sigma * inverse_normal_cdf(out.p_a_lower);
  }
  return out;
}

}  // namespace per
