#include "klee/io.hpp"

#include <fstream>
#include <sstream>

#include "klee/error.hpp"

namespace klee {

namespace {

json arc_to_json(const Arc& arc) {
  if (const auto* c = std::get_if<CircleArc>(&arc)) return {{"type", "circle"}, {"lo", c->lo}, {"hi", c->hi}};
  if (const auto* p = std::get_if<PolarArc>(&arc))
    return {{"type", "polar"},
            {"side", p->side},
            {"lo", p->lo},
            {"hi", p->hi},
            {"alpha", p->R.knots()},
            {"R", p->R.values()},
            {"slope_lo", p->R.slope_lo()},
            {"slope_hi", p->R.slope_hi()}};
  const auto& x = std::get<XiSplineArc>(arc);
  return {{"type", "xi_spline"},     {"lo", x.lo},
          {"hi", x.hi},              {"xi", x.f.knots()},
          {"f", x.f.values()},       {"slope_lo", x.f.slope_lo()},
          {"slope_hi", x.f.slope_hi()}};
}

Arc arc_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  const double lo = j.at("lo").get<double>(), hi = j.at("hi").get<double>();
  if (type == "circle") return CircleArc{lo, hi};
  if (type == "polar") {
    PolarArc p = make_polar_arc(j.at("side").get<int>(), j.at("alpha").get<std::vector<double>>(),
                                j.at("R").get<std::vector<double>>(), j.at("slope_lo").get<double>(),
                                j.at("slope_hi").get<double>());
    p.lo = lo;
    p.hi = hi;
    return p;
  }
  if (type == "xi_spline")
    return XiSplineArc{CubicSpline(j.at("xi").get<std::vector<double>>(), j.at("f").get<std::vector<double>>(),
                                   j.at("slope_lo").get<double>(), j.at("slope_hi").get<double>()),
                       lo, hi};
  throw Error(ErrorKind::ParseError, "unknown arc type '" + type + "'");
}

json convexity_json(const ConvexityReport& c) {
  return {{"pass", c.pass}, {"worst_f2", c.worst_f2}, {"at_xi", c.at_xi}, {"margin", -c.worst_f2}};
}

json picard_json(const PicardResult& p) {
  return {{"iterations", p.iterations},
          {"k_hat", p.k_hat},
          {"last_update", p.last_update},
          {"error_bound", p.error_bound},
          {"frozen_deviation", p.frozen_deviation},
          {"locality_ok", p.locality_ok}};
}

json perturbation_json(const Perturbation& h) {
  return {{"delta", h.basis().delta()},
          {"count", h.basis().count()},
          {"fill", h.basis().fill()},
          {"coeffs", h.coeffs()},
          {"scale", h.scale()}};
}

}  // namespace

json profile_to_json(const ProfileFunction& f) {
  json arcs = json::array();
  for (const Arc& a : f.arcs()) arcs.push_back(arc_to_json(a));
  return {{"shift", f.shift()}, {"arcs", arcs}};
}

ProfileFunction profile_from_json(const json& j) {
  std::vector<Arc> arcs;
  for (const json& a : j.at("arcs")) arcs.push_back(arc_from_json(a));
  return ProfileFunction(std::move(arcs), j.value("shift", 0.0));
}

json body_to_json(const BodyRecord& rec) {
  json j = {{"format", kBodyFormat}, {"dim", rec.body.dim}, {"profile", profile_to_json(rec.body.profile)}};
  j["perturbation"] = rec.body.perturbation ? perturbation_json(*rec.body.perturbation) : json(nullptr);
  if (rec.chords) j["chords"] = {{"s", rec.chords->s}, {"x", rec.chords->x}, {"y", rec.chords->y}};
  if (rec.radial)
    j["radial"] = {{"alpha", rec.radial->alpha()},
                   {"R", rec.radial->R()},
                   {"dR", rec.radial->dR()},
                   {"r", rec.radial->r()},
                   {"dr", rec.radial->dr()}};
  j["report"] = rec.report;
  return j;
}

BodyRecord body_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != kBodyFormat)
      throw Error(ErrorKind::ParseError, "unsupported body format '" + j.at("format").get<std::string>() + "'");
    BodyRecord rec;
    rec.body.dim = j.at("dim").get<int>();
    if (rec.body.dim < 2) throw Error(ErrorKind::ParseError, "dimension must be at least 2");
    rec.body.profile = profile_from_json(j.at("profile"));
    if (j.contains("perturbation") && !j["perturbation"].is_null()) {
      const json& p = j["perturbation"];
      rec.body.perturbation =
          Perturbation(BumpBasis(p.at("delta").get<double>(), p.at("count").get<int>(), p.value("fill", 0.9)),
                       p.at("coeffs").get<std::vector<double>>(), p.at("scale").get<double>());
    }
    if (j.contains("chords")) {
      const json& c = j["chords"];
      rec.chords = ChordSamples{c.at("s").get<std::vector<double>>(), c.at("x").get<std::vector<double>>(),
                                c.at("y").get<std::vector<double>>()};
    }
    if (j.contains("radial")) {
      const json& r = j["radial"];
      rec.radial = RadialPair(r.at("alpha").get<std::vector<double>>(), r.at("R").get<std::vector<double>>(),
                              r.at("dR").get<std::vector<double>>(), r.at("r").get<std::vector<double>>(),
                              r.at("dr").get<std::vector<double>>());
    }
    rec.report = j.value("report", json::object());
    return rec;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ParseError) throw;
    throw Error(ErrorKind::ParseError, std::string("invalid body: ") + e.what());
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("invalid body: ") + e.what());
  }
}

void save_body(const BodyRecord& rec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write '" + path + "'");
  out << body_to_json(rec).dump(1) << '\n';
}

BodyRecord load_body(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot read '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("malformed JSON: ") + e.what());
  }
  return body_from_json(j);
}

ChordSamples sample_chords(const ChordFunctions& chords) {
  ChordSamples out;
  out.s = chords.Z.grid.nodes();
  out.x = chords.Z.component(0);
  out.y = chords.Z.component(1);
  return out;
}

json even_report(const EvenBuild& b) {
  return {{"kind", "even"},
          {"scale_used", b.scale_used},
          {"halvings", b.halvings},
          {"picard", picard_json(b.picard)},
          {"moments",
           {{"deviation", b.moments.deviation},
            {"odd_moment", b.moments.odd_moment},
            {"even_moment", b.moments.even_moment}}},
          {"chain", b.chain},
          {"convexity", convexity_json(b.convexity)},
          {"xi_consistency", b.xi_consistency}};
}

json odd_report(const OddBuild& b) {
  return {{"kind", "odd"},
          {"scale_used", b.body.perturbation ? b.body.perturbation->scale() : 0.0},
          {"coeffs", b.coeffs},
          {"B", b.pipeline.theta.B},
          {"B_residual", b.B_residual},
          {"cap_mismatch", b.cap_mismatch},
          {"slope_at_zero", b.slope_at_zero},
          {"max_asymmetry", b.max_asymmetry},
          {"extension_mismatch", b.pipeline.zonal.extension_mismatch},
          {"radon_roundtrip", b.pipeline.zonal.roundtrip},
          {"picard", picard_json(b.pipeline.picard)},
          {"xi_consistency", b.pipeline.xi_consistency},
          {"convexity", convexity_json(b.convexity)},
          {"search",
           {{"evaluations", b.search.evaluations},
            {"converged", b.search.converged},
            {"residual", b.search.residual},
            {"antipodal_defect", b.search.antipodal_defect},
            {"history", b.search.history}}},
          {"halvings", b.halvings}};
}

BodyRecord record_from(const EvenBuild& b) {
  BodyRecord rec;
  rec.body = b.body;
  rec.chords = sample_chords(b.chords);
  rec.report = even_report(b);
  return rec;
}

BodyRecord record_from(const OddBuild& b) {
  BodyRecord rec;
  rec.body = b.body;
  rec.chords = sample_chords(b.pipeline.chords);
  rec.radial = b.radial;
  rec.report = odd_report(b);
  return rec;
}

BodyRecord ball_record(int dim) {
  BodyRecord rec;
  rec.body = BodyOfRevolution::ball(dim);
  rec.report = {{"kind", "ball"}};
  return rec;
}

}  // namespace klee
