#pragma once

#include <string>
#include <vector>

#include "klee/geometry.hpp"
#include "klee/io.hpp"

namespace klee {

struct VerifyOptions {
  int directions = 200;
  double tol = 1e-5;
  SectionOptions section{};
  int threads = 0;  // 0: hardware concurrency
};

struct DirectionSample {
  double alpha = 0.0;
  int side = 1;
  double t_star = 0.0;
  double value = 0.0;
  double residual = 0.0;
};

struct VerificationReport {
  int dim = 0;
  int directions = 0;
  double tol = 0.0;
  std::vector<DirectionSample> samples;
  double max = 0.0, min = 0.0, mean = 0.0;
  double spread = 0.0;            // (max - min) / mean
  double ball_value = 0.0;        // v_{d-1}
  double concavity_margin = 0.0;  // -max f''
  double asymmetry = 0.0;         // misfit of the maximal-section hyperplanes
  bool perturbed = false;
  bool spread_ok = false, concavity_ok = false, asymmetry_ok = false;
  bool pass = false;
  std::string note;
  double runtime = 0.0;  // seconds
};

/// n polar angles in [0, pi/2]: both endpoints and n - 2 interior angles at
/// half-step offsets, which keeps clear of the kernel-regime boundaries.
std::vector<double> verify_angles(int n);

/// M_K over the angle grid on both sides of the axis; uses only the profile.
VerificationReport verify_body(const BodyOfRevolution& body, const VerifyOptions& opt = {});

json report_to_json(const VerificationReport& r, bool timing = false);

}  // namespace klee
