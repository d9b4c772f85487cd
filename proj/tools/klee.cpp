#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "klee/commands.hpp"
#include "klee/error.hpp"

namespace fs = std::filesystem;
using klee::json;

namespace {

constexpr int kOk = 0, kFailure = 2, kRejected = 3;

json diagnostic(const std::exception& e) {
  json j = {{"status", "error"}, {"message", e.what()}};
  if (const auto* k = dynamic_cast<const klee::Error*>(&e)) j["error"] = klee::to_string(k->kind());
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw klee::Error(klee::ErrorKind::InvalidArgument, "cannot write '" + path + "'");
  out << text;
}

klee::BuildConfig config_from_env() {
  klee::BuildConfig cfg;
  if (const char* path = std::getenv("KLEE_CONFIG"); path && *path) {
    std::ifstream in(path);
    if (!in) throw klee::Error(klee::ErrorKind::ParseError, std::string("cannot read KLEE_CONFIG '") + path + "'");
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw klee::Error(klee::ErrorKind::ParseError, std::string("KLEE_CONFIG: ") + e.what());
    }
    klee::apply_config(cfg, j);
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  klee::BuildConfig cfg;
  try {
    cfg = config_from_env();
  } catch (const std::exception& e) {
    std::cout << diagnostic(e).dump(2) << '\n';
    return kFailure;
  }

  CLI::App app{"Convex bodies of revolution with constant maximal-section function"};
  app.require_subcommand(1);

  double h_scale = cfg.scale();
  std::string output = "body.json", report_path, body_path, out_dir = ".";
  bool timing = false;
  int samples = 401;

  auto* build = app.add_subcommand("build", "construct a body and write it as JSON");
  build->add_option("--dim", cfg.dim, "ambient dimension d >= 3")->capture_default_str();
  build->add_option("--delta", cfg.delta, "perturbation window parameter")->capture_default_str();
  auto* hs = build->add_option("--h-scale", h_scale, "perturbation amplitude (0: unit ball)");
  build->add_option("--h-coeffs", cfg.h_coeffs, "bump coefficients (odd d: skip the search)")->delimiter(',');
  build->add_option("--k", cfg.k, "extra cancellation orders (odd d)")->capture_default_str();
  build->add_option("--seed", cfg.seed, "seed for random bump coefficients")->capture_default_str();
  build->add_option("-o,--output", output, "body file")->capture_default_str();
  build->add_option("--report", report_path, "also write the build report here");
  build->add_flag("--timing", timing, "include wall-clock time in the report");

  auto* verify = app.add_subcommand("verify", "check constancy of the maximal-section function");
  verify->add_option("body", body_path, "body file")->required();
  verify->add_option("--directions", cfg.directions, "number of polar angles")->capture_default_str();
  verify->add_option("--tol", cfg.tol, "relative spread tolerance")->capture_default_str();
  verify->add_option("-o,--output", report_path, "also write the report here");
  verify->add_flag("--timing", timing, "include wall-clock time in the report");

  auto* plot = app.add_subcommand("plotdata", "write profile, chord, radial and M_K tables as CSV");
  plot->add_option("body", body_path, "body file")->required();
  plot->add_option("-o,--output", out_dir, "output directory")->capture_default_str();
  plot->add_option("--directions", cfg.directions, "number of polar angles for the M_K scan")->capture_default_str();
  plot->add_option("--samples", samples, "profile and radial samples")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kFailure;
  }

  try {
    if (*build) {
      if (hs->count() > 0 || cfg.h_scale) cfg.h_scale = h_scale;
      const auto start = std::chrono::steady_clock::now();
      klee::BodyRecord rec = klee::build_body(cfg);
      if (timing)
        rec.report["runtime_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      rec.report["status"] = "ok";
      klee::save_body(rec, output);
      if (!report_path.empty()) write_text(report_path, rec.report.dump(2) + "\n");
      std::cout << rec.report.dump(2) << '\n';
      return kOk;
    }
    if (*verify) {
      const klee::BodyRecord rec = klee::load_body(body_path);
      klee::VerifyOptions opt;
      opt.directions = cfg.directions;
      opt.tol = cfg.tol;
      const klee::VerificationReport r = klee::verify_body(rec.body, opt);
      const std::string text = klee::report_to_json(r, timing).dump(2) + "\n";
      if (!report_path.empty()) write_text(report_path, text);
      std::cout << text;
      return r.pass ? kOk : kRejected;
    }
    if (*plot) {
      const klee::BodyRecord rec = klee::load_body(body_path);
      klee::VerifyOptions opt;
      opt.directions = cfg.directions;
      const klee::PlotTables t = klee::plot_tables(rec, klee::verify_body(rec.body, opt), samples);
      fs::create_directories(out_dir);
      write_text((fs::path(out_dir) / "profile.csv").string(), t.profile);
      write_text((fs::path(out_dir) / "chords.csv").string(), t.chords);
      write_text((fs::path(out_dir) / "radial.csv").string(), t.radial);
      write_text((fs::path(out_dir) / "mk.csv").string(), t.mk);
      return kOk;
    }
  } catch (const std::exception& e) {
    std::cout << diagnostic(e).dump(2) << '\n';
    return kFailure;
  }
  return kFailure;
}
