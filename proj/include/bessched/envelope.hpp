#pragma once

#include <string>
#include <vector>

#include "bessched/circuit.hpp"

namespace bessched {

struct EnvelopeLine {
  double a_kw = 0.0;          // intercept
  double b_kw_per_soc = 0.0;  // slope in SOC
  double at(double soc) const { return a_kw + b_kw_per_soc * soc; }
};

/// SOC-dependent power bounds as min/max of affine families:
///   upper bound = min_k upper[k](soc),  lower bound = max_j lower[j](soc).
/// The region between them is convex by construction.
struct PowerEnvelope {
  std::vector<EnvelopeLine> upper;
  std::vector<EnvelopeLine> lower;
  double soc_lo = 0.05;
  double soc_hi = 0.95;
  double fit_error_kw = 0.0;  // max |envelope - exact bound| over the sample grid

  double upper_at(double soc) const;
  double lower_at(double soc) const;
};

struct EnvelopeBuildOptions {
  int k_upper = 2;
  int j_lower = 2;
  bool include_voltage = true;  // false reproduces the current-limits-only variant
  int sample_count = 101;
  double soc_lo = 0.05;
  double soc_hi = 0.95;
  double fit_error_cap_kw = 1.0;
};

/// Builds the envelope from the circuit's linear OCV fit. With enough lines
/// per side (2 with voltage limits, 1 without) the exact bounds are affine in
/// SOC and are reproduced in closed form; with fewer lines a greedy
/// chord-splitting fit produces a conservative inner approximation. Throws
/// std::runtime_error when the achieved fit error exceeds fit_error_cap_kw.
PowerEnvelope build_envelope(const CircuitParams& params, const EnvelopeBuildOptions& opts = {});

/// Bound evaluation; soc outside the envelope domain throws std::domain_error.
PowerBounds bounds_at(const PowerEnvelope& envelope, double soc);

/// Midpoint concavity test of the upper boundary and convexity test of the
/// lower boundary on a dense grid. True by construction for min/max of affine
/// families; guards against malformed hand-edited envelopes.
bool verify_convexity(const PowerEnvelope& envelope, int grid_points = 257, double tol_kw = 1e-6);

/// Coefficient CSV: header `side,a_kw,b_kw_per_soc`, one row per line.
void write_envelope_csv(const PowerEnvelope& envelope, const std::string& path);
PowerEnvelope read_envelope_csv(const std::string& path);

/// Sampled-boundary CSV: header `soc,p_lo_kw,p_hi_kw`.
void write_boundary_csv(const PowerEnvelope& envelope, const std::string& path, int samples = 101);

}  // namespace bessched
