#pragma once

namespace per {

/// Standard normal CDF Ψ.
double normal_cdf(double x);

/// Ψ⁻¹(p) for p in (0, 1); throws DomainError otherwise.
double inverse_normal_cdf(double p);

}  // namespace per
