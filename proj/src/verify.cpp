#include "klee/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "klee/error.hpp"
#include "klee/parallel.hpp"

namespace klee {

std::vector<double> verify_angles(int n) {
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "need at least two directions");
  std::vector<double> a{0.0};
  const double step = 0.5 * M_PI / (n - 2 > 0 ? n - 2 : 1);
  for (int i = 0; i < n - 2; ++i) a.push_back((i + 0.5) * step);
  a.push_back(0.5 * M_PI);
  return a;
}

VerificationReport verify_body(const BodyOfRevolution& body, const VerifyOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  VerificationReport r;
  r.dim = body.dim;
  r.directions = opt.directions;
  r.tol = opt.tol;
  r.ball_value = unit_ball_volume(body.dim - 1);

  // Both sides of the axis; at alpha = pi/2 they coincide.
  std::vector<Direction> dirs;
  for (double a : verify_angles(opt.directions)) {
    dirs.push_back({a, 1});
    if (a < 0.5 * M_PI) dirs.push_back({a, -1});
  }
  r.samples.resize(dirs.size());

  parallel_for(
      static_cast<int>(dirs.size()),
      [&](int i) {
        const MaxSection m = max_section(body, dirs[i].alpha, dirs[i].side, opt.section);
        r.samples[i] = {dirs[i].alpha, dirs[i].side, m.t_star, m.vol, m.residual};
      },
      opt.threads);

  r.max = -INFINITY;
  r.min = INFINITY;
  double sum = 0.0;
  std::vector<double> t_star;
  for (const auto& s : r.samples) {
    r.max = std::max(r.max, s.value);
    r.min = std::min(r.min, s.value);
    t_star.push_back(s.t_star);
  }
  for (const auto& s : r.samples) sum += s.value - r.min;
  r.mean = r.min + sum / r.samples.size();
  r.spread = (r.max - r.min) / r.mean;
  r.concavity_margin = -convexity_check(body.profile, 0.0).worst_f2;
  r.asymmetry = asymmetry_certificate(dirs, t_star, body.dim).residual;
  r.perturbed = body.perturbation && !body.perturbation->is_zero();

  r.spread_ok = r.spread <= opt.tol;
  r.concavity_ok = r.concavity_margin > 0.0;
  r.asymmetry_ok = !r.perturbed || r.asymmetry > 10.0 * opt.tol;
  r.pass = r.spread_ok && r.concavity_ok && r.asymmetry_ok;
  if (!r.perturbed) r.note = "symmetric reference";
  r.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

json report_to_json(const VerificationReport& r, bool timing) {
  json samples = json::array();
  for (const auto& s : r.samples)
    samples.push_back({{"alpha", s.alpha}, {"side", s.side}, {"t_star", s.t_star}, {"M_K", s.value}});
  json j = {{"dim", r.dim},
            {"directions", r.directions},
            {"tol", r.tol},
            {"M_K", {{"max", r.max}, {"min", r.min}, {"mean", r.mean}, {"ball_value", r.ball_value}}},
            {"spread", r.spread},
            {"concavity_margin", r.concavity_margin},
            {"asymmetry_residual", r.asymmetry},
            {"perturbed", r.perturbed},
            {"verdicts",
             {{"spread", r.spread_ok ? "PASS" : "FAIL"},
              {"concavity", r.concavity_ok ? "PASS" : "FAIL"},
              {"asymmetry", r.perturbed ? (r.asymmetry_ok ? "PASS" : "FAIL") : "n/a"},
              {"overall", r.pass ? "PASS" : "FAIL"}}},
            {"samples", samples}};
  if (!r.note.empty()) j["note"] = r.note;
  if (timing) j["runtime_s"] = r.runtime;
  return j;
}

}  // namespace klee
