#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "klee/even_builder.hpp"
#include "klee/geometry.hpp"
#include "klee/odd_builder.hpp"

namespace klee {

using json = nlohmann::json;

struct ChordSamples {
  std::vector<double> s, x, y;
};

/// A serialized body: the exact profile arcs plus construction data.
struct BodyRecord {
  BodyOfRevolution body;
  std::optional<ChordSamples> chords;
  std::optional<RadialPair> radial;
  json report = json::object();
};

inline constexpr const char* kBodyFormat = "klee-body/1";

json profile_to_json(const ProfileFunction& f);
ProfileFunction profile_from_json(const json& j);

json body_to_json(const BodyRecord& rec);
/// Throws ParseError on malformed input.
BodyRecord body_from_json(const json& j);

void save_body(const BodyRecord& rec, const std::string& path);
BodyRecord load_body(const std::string& path);

/// Chord samples at the grid nodes on [a, b].
ChordSamples sample_chords(const ChordFunctions& chords);

json even_report(const EvenBuild& b);
json odd_report(const OddBuild& b);

BodyRecord record_from(const EvenBuild& b);
BodyRecord record_from(const OddBuild& b);
BodyRecord ball_record(int dim);

}  // namespace klee
