#include "bessched/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bessched/csvio.hpp"

namespace bessched {

namespace {

constexpr double kWattsPerKw = 1000.0;

double eval_upper(const std::vector<EnvelopeLine>& lines, double soc) {
  double v = std::numeric_limits<double>::infinity();
  for (const auto& l : lines) v = std::min(v, l.at(soc));
  return v;
}

double eval_lower(const std::vector<EnvelopeLine>& lines, double soc) {
  double v = -std::numeric_limits<double>::infinity();
  for (const auto& l : lines) v = std::max(v, l.at(soc));
  return v;
}

// Exact bound at one SOC, voltage limits optional.
PowerBounds exact_bounds(const CircuitParams& params, double soc, bool include_voltage) {
  PowerBounds b = power_bounds_current(params, soc);
  if (include_voltage) {
    const PowerBounds v = power_bounds_voltage(params, soc);
    b.p_hi_kw = std::min(b.p_hi_kw, v.p_hi_kw);
    b.p_lo_kw = std::max(b.p_lo_kw, v.p_lo_kw);
  }
  return b;
}

// The exact bounds composed with the linear OCV fit are affine in SOC;
// these are their closed-form coefficients.
std::vector<EnvelopeLine> analytic_upper(const CircuitParams& params, bool include_voltage) {
  const double a = params.ocv.fit_intercept_v;
  const double b = params.ocv.fit_slope_v;
  const double r = params.series_resistance_ohm;
  const double im = params.i_max_amp;
  std::vector<EnvelopeLine> lines;
  if (include_voltage) {
    const double vm = params.v_min_volt;
    lines.push_back({vm * (a - vm) / r / kWattsPerKw, vm * b / r / kWattsPerKw});
  }
  lines.push_back({(a * im - r * im * im) / kWattsPerKw, b * im / kWattsPerKw});
  return lines;
}

std::vector<EnvelopeLine> analytic_lower(const CircuitParams& params, bool include_voltage) {
  const double a = params.ocv.fit_intercept_v;
  const double b = params.ocv.fit_slope_v;
  const double r = params.series_resistance_ohm;
  const double im = params.i_max_amp;
  std::vector<EnvelopeLine> lines;
  if (include_voltage) {
    const double vx = params.v_max_volt;
    lines.push_back({vx * (a - vx) / r / kWattsPerKw, vx * b / r / kWattsPerKw});
  }
  lines.push_back({(-a * im - r * im * im) / kWattsPerKw, -b * im / kWattsPerKw});
  return lines;
}

// Greedy chord fit of a sampled boundary with `count` segments. Chords of a
// concave (upper) / convex (lower) boundary are automatically on the inner
// side; any residual outward excess is shifted in afterwards.
std::vector<EnvelopeLine> fit_piecewise(const std::vector<double>& xs, const std::vector<double>& fs,
                                        int count, bool upper) {
  const int n = static_cast<int>(xs.size());
  std::vector<std::pair<int, int>> segments{{0, n - 1}};

  auto chord = [&](int i, int j) {
    EnvelopeLine l;
    l.b_kw_per_soc = (fs[j] - fs[i]) / (xs[j] - xs[i]);
    l.a_kw = fs[i] - l.b_kw_per_soc * xs[i];
    return l;
  };

  while (static_cast<int>(segments.size()) < count) {
    // Split the segment whose chord deviates most, at its worst sample.
    int best_seg = -1, best_idx = -1;
    double best_dev = 0.0;
    for (size_t s = 0; s < segments.size(); ++s) {
      auto [i, j] = segments[s];
      if (j - i < 2) continue;
      const EnvelopeLine l = chord(i, j);
      for (int k = i + 1; k < j; ++k) {
        const double dev = std::abs(fs[k] - l.at(xs[k]));
        if (dev > best_dev) {
          best_dev = dev;
          best_seg = static_cast<int>(s);
          best_idx = k;
        }
      }
    }
    if (best_seg < 0) break;  // nothing left to split
    auto [i, j] = segments[best_seg];
    segments[best_seg] = {i, best_idx};
    segments.insert(segments.begin() + best_seg + 1, {best_idx, j});
  }

  std::vector<EnvelopeLine> lines;
  for (auto [i, j] : segments) {
    EnvelopeLine l = chord(i, j);
    // Shift inward so the line never passes the sampled boundary on its segment.
    double excess = 0.0;
    for (int k = i; k <= j; ++k) {
      const double d = upper ? l.at(xs[k]) - fs[k] : fs[k] - l.at(xs[k]);
      excess = std::max(excess, d);
    }
    l.a_kw += upper ? -excess : excess;
    lines.push_back(l);
  }
  return lines;
}

}  // namespace

double PowerEnvelope::upper_at(double soc) const {
  return eval_upper(upper, soc);
}

double PowerEnvelope::lower_at(double soc) const {
  return eval_lower(lower, soc);
}

PowerEnvelope build_envelope(const CircuitParams& params, const EnvelopeBuildOptions& opts) {
  validate(params);
  if (opts.k_upper < 1 || opts.j_lower < 1)
    throw std::invalid_argument("build_envelope: need at least one line per side");
  if (opts.sample_count < 11) throw std::invalid_argument("build_envelope: sample_count must be >= 11");
  if (!(opts.soc_lo < opts.soc_hi))
    throw std::invalid_argument("build_envelope: empty soc domain");

  const int n = opts.sample_count;
  std::vector<double> xs(n), hi(n), lo(n);
  for (int i = 0; i < n; ++i) {
    xs[i] = opts.soc_lo + (opts.soc_hi - opts.soc_lo) * i / (n - 1);
    const PowerBounds b = exact_bounds(params, xs[i], opts.include_voltage);
    hi[i] = b.p_hi_kw;
    lo[i] = b.p_lo_kw;
  }

  const int needed = opts.include_voltage ? 2 : 1;
  PowerEnvelope env;
  env.soc_lo = opts.soc_lo;
  env.soc_hi = opts.soc_hi;
  env.upper = opts.k_upper >= needed ? analytic_upper(params, opts.include_voltage)
                                     : fit_piecewise(xs, hi, opts.k_upper, /*upper=*/true);
  env.lower = opts.j_lower >= needed ? analytic_lower(params, opts.include_voltage)
                                     : fit_piecewise(xs, lo, opts.j_lower, /*upper=*/false);

  double err = 0.0;
  for (int i = 0; i < n; ++i) {
    err = std::max(err, std::abs(eval_upper(env.upper, xs[i]) - hi[i]));
    err = std::max(err, std::abs(eval_lower(env.lower, xs[i]) - lo[i]));
  }
  env.fit_error_kw = err;
  if (err > opts.fit_error_cap_kw)
    throw std::runtime_error("build_envelope: fit error " + std::to_string(err) +
                             " kW exceeds cap " + std::to_string(opts.fit_error_cap_kw) + " kW");
  return env;
}

PowerBounds bounds_at(const PowerEnvelope& envelope, double soc) {
  constexpr double kEdge = 1e-12;
  if (soc < envelope.soc_lo - kEdge || soc > envelope.soc_hi + kEdge)
    throw std::domain_error("bounds_at: soc " + std::to_string(soc) + " outside envelope domain");
  return {envelope.lower_at(soc), envelope.upper_at(soc)};
}

bool verify_convexity(const PowerEnvelope& envelope, int grid_points, double tol_kw) {
  std::vector<double> up(grid_points), dn(grid_points);
  for (int i = 0; i < grid_points; ++i) {
    const double s = envelope.soc_lo + (envelope.soc_hi - envelope.soc_lo) * i / (grid_points - 1);
    up[i] = envelope.upper_at(s);
    dn[i] = envelope.lower_at(s);
  }
  // Midpoint tests over all grid pairs whose midpoint is itself a grid point.
  for (int i = 0; i < grid_points; ++i) {
    for (int j = i + 2; j < grid_points; j += 2) {
      const int m = (i + j) / 2;
      if (up[m] < 0.5 * (up[i] + up[j]) - tol_kw) return false;  // upper must be concave
      if (dn[m] > 0.5 * (dn[i] + dn[j]) + tol_kw) return false;  // lower must be convex
    }
  }
  return true;
}

void write_envelope_csv(const PowerEnvelope& envelope, const std::string& path) {
  csv::Writer w(path, {"side", "a_kw", "b_kw_per_soc"});
  for (const auto& l : envelope.upper) w.row({"upper", csv::format(l.a_kw), csv::format(l.b_kw_per_soc)});
  for (const auto& l : envelope.lower) w.row({"lower", csv::format(l.a_kw), csv::format(l.b_kw_per_soc)});
}

PowerEnvelope read_envelope_csv(const std::string& path) {
  const auto table = csv::read(path);
  if (table.header != std::vector<std::string>{"side", "a_kw", "b_kw_per_soc"})
    throw std::runtime_error(path + ": expected header 'side,a_kw,b_kw_per_soc'");
  PowerEnvelope env;
  for (const auto& row : table.rows) {
    EnvelopeLine l{csv::to_double(row[1], path + " a_kw"), csv::to_double(row[2], path + " b_kw_per_soc")};
    if (row[0] == "upper")
      env.upper.push_back(l);
    else if (row[0] == "lower")
      env.lower.push_back(l);
    else
      throw std::runtime_error(path + ": side must be 'upper' or 'lower', got '" + row[0] + "'");
  }
  if (env.upper.empty() || env.lower.empty())
    throw std::runtime_error(path + ": envelope needs at least one line per side");
  return env;
}

void write_boundary_csv(const PowerEnvelope& envelope, const std::string& path, int samples) {
  csv::Writer w(path, {"soc", "p_lo_kw", "p_hi_kw"});
  for (int i = 0; i < samples; ++i) {
    const double s = envelope.soc_lo + (envelope.soc_hi - envelope.soc_lo) * i / (samples - 1);
    w.row({csv::format(s), csv::format(envelope.lower_at(s)), csv::format(envelope.upper_at(s))});
  }
}

}  // namespace bessched
