#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "klee/io.hpp"
#include "klee/verify.hpp"

namespace klee {

/// Settings shared by the command-line tool and the Python module. Keys of a
/// config file use the flag names (dim, delta, h-scale, h-coeffs, k, seed,
/// directions, tol, count, fill).
struct BuildConfig {
  int dim = 4;
  double delta = 0.05;
  std::optional<double> h_scale;        // default 1e-3 (even) or 1e-5 (odd)
  std::vector<double> h_coeffs;         // odd: skips the search
  int k = 2;
  std::uint64_t seed = 1;
  int count = 1;                        // even bumps (odd uses d + k + 1)
  double fill = 0.9;
  int directions = 200;
  double tol = 1e-5;
  EvenOptions even{};
  OddOptions odd{};

  double scale() const { return h_scale ? *h_scale : (dim % 2 == 0 ? 1e-3 : 1e-5); }
};

/// Overrides the fields present in j; throws ParseError on bad types.
void apply_config(BuildConfig& cfg, const json& j);
json config_to_json(const BuildConfig& cfg);

/// Even bump coefficients: ones for a single bump, otherwise uniform in
/// [0.5, 1] drawn from the seed.
std::vector<double> even_coefficients(const BuildConfig& cfg);

/// Dispatches on the parity of dim; scale 0 gives the exact ball.
BodyRecord build_body(const BuildConfig& cfg);

/// f + amp * (smooth bump peaking at amp) on [lo, hi], a profile that is
/// not produced by any construction; used as a negative control.
ProfileFunction corrupted_profile(const ProfileFunction& f, double lo, double hi, double amp, int knots = 401);

struct PlotTables {
  std::string profile, chords, radial, mk;  // CSV text
};

/// (xi, f, f', f''), (s, x, y, x_o), (alpha, R, r) and (alpha, side, t*, M_K).
PlotTables plot_tables(const BodyRecord& rec, const VerificationReport& scan, int samples = 401);

}  // namespace klee
