#pragma once

namespace adaptrial {

/// Standard normal CDF.
double norm_cdf(double x);

/// Standard normal upper tail, 1 - Φ(x), without cancellation for large x.
double norm_sf(double x);

/// Standard normal quantile Φ⁻¹(p) (Wichura's AS 241, ~1e-16 relative error).
/// Returns ±infinity at p = 0 or 1 and NaN outside [0, 1].
double norm_quantile(double p);

double logit(double p);
double expit(double eta);

}  // namespace adaptrial
