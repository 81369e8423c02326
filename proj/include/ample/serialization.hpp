#pragma once

#include <string>
#include <variant>

#include <json.hpp>

#include "ample/comparison.hpp"
#include "ample/convolution.hpp"
#include "ample/groupoid.hpp"
#include "ample/growth.hpp"
#include "ample/measure.hpp"
#include "ample/unitspace.hpp"

namespace ample {

using Json = nlohmann::ordered_json;

// {"alphabet": k, "depth": d, "words": ["010", ...]}, words sorted
Json clopen_to_json(const ClopenSet& s);
ClopenSet clopen_from_json(const Json& j);

// Tiny prefix-expression grammar for sets on the CLI:
//   expr := term ('+' term)*
//   term := '~' term | atom
//   atom := '[' prefix ']' | '{' word, ... '}' | '(' expr ')'
// "[]" is the whole space, "{}" the empty set.
ClopenSet parse_clopen_expression(const UnitSpace& space,
                                  const std::string& text);

using GroupoidSpec = std::variant<TransformationSpec, BratteliSpec>;

GroupoidSpec groupoid_spec_from_json(const Json& j);
GroupoidSpec load_groupoid_spec(const std::string& path);
FiniteGroupoid build_from_spec(const GroupoidSpec& spec);

// id,source,range,label,in_K
std::string arrow_table_csv(const FiniteGroupoid& g);

struct GroupoidSummary {
  std::size_t units = 0;
  std::size_t arrows = 0;
  std::size_t k_size = 0;
  std::size_t iso_size = 0;  // non-unit isotropy arrows
  bool principal = false;
};

GroupoidSummary summarize(const FiniteGroupoid& g);
std::string summary_line(const GroupoidSummary& s);

Json witness_to_json(const SubequivalenceWitness& w);
SubequivalenceWitness witness_from_json(const FiniteGroupoid& g,
                                        const Json& j);

Json measure_to_json(const PointMeasure& mu);
PointMeasure measure_from_json(const UnitSpace& space, const Json& j);

Json growth_summary_json(const GrowthProfile& profile);
std::string growth_csv(const GrowthProfile& profile);

Json function_to_json(const FiniteGroupoid& g, const GroupoidFunction& f);
GroupoidFunction function_from_json(const FiniteGroupoid& g, const Json& j);

Rational rational_from_string(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace ample
