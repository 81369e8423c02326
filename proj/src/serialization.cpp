#include "ample/serialization.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace ample {

Json clopen_to_json(const ClopenSet& s) {
  Json j;
  j["alphabet"] = s.space().alphabet_size();
  j["depth"] = s.space().depth();
  Json words = Json::array();
  for (WordIndex w : s.words()) words.push_back(s.space().word_to_string(w));
  j["words"] = std::move(words);
  return j;
}

ClopenSet clopen_from_json(const Json& j) {
  try {
    UnitSpace space(j.at("alphabet").get<int>(), j.at("depth").get<int>());
    ClopenSet s(space);
    for (const auto& w : j.at("words"))
      s.set(space.word_from_string(w.get<std::string>()));
    return s;
  } catch (const Json::exception& e) {
    throw SpecError(std::string("malformed clopen set document: ") + e.what());
  }
}

namespace {

class ExprParser {
public:
  ExprParser(const UnitSpace& space, const std::string& text)
      : space_(space), text_(text) {}

  ClopenSet parse() {
    ClopenSet out = expr();
    skip_ws();
    if (pos_ != text_.size())
      throw SpecError("unexpected trailing input in set expression at offset " +
                      std::to_string(pos_));
    return out;
  }

private:
  ClopenSet expr() {
    ClopenSet out = term();
    for (;;) {
      skip_ws();
      if (!take('+')) return out;
      out = out.set_union(term());
    }
  }

  ClopenSet term() {
    skip_ws();
    if (take('~')) return term().complement();
    return atom();
  }

  ClopenSet atom() {
    skip_ws();
    if (take('(')) {
      ClopenSet out = expr();
      skip_ws();
      if (!take(')')) throw SpecError("missing ')' in set expression");
      return out;
    }
    if (take('[')) {
      std::string prefix;
      while (pos_ < text_.size() && text_[pos_] != ']') prefix += text_[pos_++];
      if (!take(']')) throw SpecError("missing ']' in set expression");
      return ClopenSet::cylinder(space_, prefix);
    }
    if (take('{')) {
      ClopenSet out(space_);
      skip_ws();
      if (take('}')) return out;
      for (;;) {
        skip_ws();
        std::string word;
        while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != '}' &&
               !std::isspace(static_cast<unsigned char>(text_[pos_])))
          word += text_[pos_++];
        out.set(space_.word_from_string(word));
        skip_ws();
        if (take('}')) return out;
        if (!take(',')) throw SpecError("missing ',' or '}' in word list");
      }
    }
    throw SpecError("expected '[prefix]', '{words}', '~' or '(' in set "
                    "expression at offset " +
                    std::to_string(pos_));
  }

  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }
  bool take(char c) {
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  const UnitSpace& space_;
  const std::string& text_;
  std::size_t pos_ = 0;
};

}  // namespace

ClopenSet parse_clopen_expression(const UnitSpace& space,
                                  const std::string& text) {
  return ExprParser(space, text).parse();
}

namespace {

GeneratorMap generator_from_json(const UnitSpace& space, const Json& j) {
  GeneratorMap g;
  g.name = j.value("name", "unnamed");
  g.image.assign(space.point_count(), -1);
  if (j.contains("perm")) {
    const auto& perm = j.at("perm");
    if (perm.size() != space.point_count())
      throw SpecError("generator \"" + g.name +
                      "\": permutation does not cover the word space");
    for (std::size_t w = 0; w < space.point_count(); ++w)
      g.image[w] = perm.at(w).get<std::int32_t>();
    return g;
  }
  if (j.contains("rewrites")) {
    for (const auto& pair : j.at("rewrites")) {
      std::string from = pair.at(0).get<std::string>();
      std::string to = pair.at(1).get<std::string>();
      if (from.size() != to.size())
        throw SpecError("generator \"" + g.name +
                        "\": rewrite prefixes must have equal length");
      ClopenSet src = ClopenSet::cylinder(space, from);
      ClopenSet dst = ClopenSet::cylinder(space, to);
      auto src_words = src.words();
      auto dst_words = dst.words();
      for (std::size_t i = 0; i < src_words.size(); ++i) {
        if (g.image[src_words[i]] != -1)
          throw SpecError("generator \"" + g.name +
                          "\": rewrite source domains overlap");
        g.image[src_words[i]] = static_cast<std::int32_t>(dst_words[i]);
      }
    }
    return g;
  }
  throw SpecError("generator \"" + g.name +
                  "\" needs either a \"perm\" or a \"rewrites\" field");
}

}  // namespace

GroupoidSpec groupoid_spec_from_json(const Json& j) {
  std::string kind;
  try {
    kind = j.at("kind").get<std::string>();
  } catch (const Json::exception&) {
    throw SpecError("groupoid spec needs a \"kind\" field");
  }
  try {
    if (kind == "transformation") {
      UnitSpace space(j.at("alphabet").get<int>(), j.at("depth").get<int>());
      TransformationSpec spec{space, TransformationMode::full, {}};
      std::string mode = j.value("mode", "full");
      if (mode == "principal")
        spec.mode = TransformationMode::principal;
      else if (mode != "full")
        throw SpecError("mode must be \"full\" or \"principal\"");
      for (const auto& gj : j.at("generators"))
        spec.generators.push_back(generator_from_json(space, gj));
      return spec;
    }
    if (kind == "bratteli") {
      BratteliSpec spec;
      for (const auto& v : j.at("levels")) spec.level_sizes.push_back(v.get<int>());
      for (const auto& mat : j.at("edges")) {
        spec.multiplicity.emplace_back();
        for (const auto& row : mat) {
          spec.multiplicity.back().emplace_back();
          for (const auto& e : row)
            spec.multiplicity.back().back().push_back(e.get<int>());
        }
      }
      spec.truncation_depth =
          j.value("depth", static_cast<int>(spec.level_sizes.size()) - 1);
      return spec;
    }
  } catch (const Json::exception& e) {
    throw SpecError(std::string("malformed groupoid spec: ") + e.what());
  }
  throw SpecError("unknown groupoid kind \"" + kind +
                  "\" (expected \"transformation\" or \"bratteli\")");
}

GroupoidSpec load_groupoid_spec(const std::string& path) {
  Json j;
  try {
    j = Json::parse(read_text_file(path));
  } catch (const Json::exception& e) {
    throw SpecError("cannot parse " + path + ": " + e.what());
  }
  return groupoid_spec_from_json(j);
}

FiniteGroupoid build_from_spec(const GroupoidSpec& spec) {
  if (std::holds_alternative<TransformationSpec>(spec))
    return from_transformation(std::get<TransformationSpec>(spec));
  return from_bratteli(std::get<BratteliSpec>(spec));
}

std::string arrow_table_csv(const FiniteGroupoid& g) {
  std::ostringstream os;
  os << "id,source,range,label,in_K\n";
  std::set<ArrowId> k_set(g.generators().begin(), g.generators().end());
  for (std::size_t i = 0; i < g.arrow_count(); ++i) {
    ArrowId a = static_cast<ArrowId>(i);
    os << i << ',' << g.space().word_to_string(g.source(a)) << ','
       << g.space().word_to_string(g.range(a)) << ',' << g.label(a) << ','
       << (k_set.count(a) ? 1 : 0) << '\n';
  }
  return os.str();
}

GroupoidSummary summarize(const FiniteGroupoid& g) {
  GroupoidSummary s;
  s.units = g.space().point_count();
  s.arrows = g.arrow_count();
  s.k_size = g.generators().size();
  for (std::size_t i = 0; i < g.arrow_count(); ++i) {
    ArrowId a = static_cast<ArrowId>(i);
    if (g.source(a) == g.range(a) && !g.is_unit(a)) ++s.iso_size;
  }
  s.principal = s.iso_size == 0;
  return s;
}

std::string summary_line(const GroupoidSummary& s) {
  std::ostringstream os;
  os << s.units << " units, " << s.arrows << " arrows, |K| = " << s.k_size
     << ", non-unit isotropy = " << s.iso_size
     << ", principal: " << (s.principal ? "yes" : "no");
  return os.str();
}

Json witness_to_json(const SubequivalenceWitness& w) {
  Json j;
  j["alphabet"] = w.a.space().alphabet_size();
  j["depth"] = w.a.space().depth();
  j["A"] = clopen_to_json(w.a)["words"];
  j["B"] = clopen_to_json(w.b)["words"];
  j["hypothesis_m"] = w.hypothesis_m;
  Json families = Json::array();
  for (const auto& fam : w.families) {
    Json jf = Json::array();
    for (const Bisection& piece : fam) {
      Json arrows = Json::array();
      for (ArrowId a : piece.arrows()) arrows.push_back(a);
      jf.push_back(std::move(arrows));
    }
    families.push_back(std::move(jf));
  }
  j["families"] = std::move(families);
  Json log = Json::array();
  for (const WitnessLogEntry& e : w.log) {
    Json je;
    je["step"] = e.step;
    je["v"] = e.v_index;
    je["family"] = e.family;
    if (e.eps_next.kind == DyadicRadius::Kind::pow)
      je["eps_exp"] = e.eps_next.exponent;
    else
      je["eps_exp"] = nullptr;
    je["u_size"] = e.u_size;
    log.push_back(std::move(je));
  }
  j["log"] = std::move(log);
  return j;
}

SubequivalenceWitness witness_from_json(const FiniteGroupoid& g,
                                        const Json& j) {
  try {
    UnitSpace space(j.at("alphabet").get<int>(), j.at("depth").get<int>());
    if (space != g.space())
      throw SpecError("witness unit space does not match the groupoid");
    ClopenSet a(space), b(space);
    for (const auto& w : j.at("A"))
      a.set(space.word_from_string(w.get<std::string>()));
    for (const auto& w : j.at("B"))
      b.set(space.word_from_string(w.get<std::string>()));
    SubequivalenceWitness out{a, b, j.at("hypothesis_m").get<int>(), {}, {}};
    for (const auto& jf : j.at("families")) {
      out.families.emplace_back();
      for (const auto& ja : jf) {
        std::vector<ArrowId> arrows;
        for (const auto& v : ja) arrows.push_back(v.get<ArrowId>());
        out.families.back().emplace_back(g, std::move(arrows));
      }
    }
    return out;
  } catch (const Json::exception& e) {
    throw SpecError(std::string("malformed witness document: ") + e.what());
  }
}

Json measure_to_json(const PointMeasure& mu) {
  Json j;
  j["alphabet"] = mu.space.alphabet_size();
  j["depth"] = mu.space.depth();
  Json weights = Json::object();
  for (std::size_t w = 0; w < mu.weights.size(); ++w)
    if (mu.weights[w] != 0)
      weights[mu.space.word_to_string(static_cast<WordIndex>(w))] =
          to_string(mu.weights[w]);
  j["weights"] = std::move(weights);
  return j;
}

PointMeasure measure_from_json(const UnitSpace& space, const Json& j) {
  try {
    UnitSpace declared(j.at("alphabet").get<int>(), j.at("depth").get<int>());
    if (declared != space)
      throw SpecError("measure unit space does not match the groupoid");
    PointMeasure mu(space);
    for (const auto& [word, value] : j.at("weights").items())
      mu.weights[space.word_from_string(word)] =
          rational_from_string(value.get<std::string>());
    return mu;
  } catch (const Json::exception& e) {
    throw SpecError(std::string("malformed measure document: ") + e.what());
  }
}

Json growth_summary_json(const GrowthProfile& profile) {
  Json j;
  j["n_max"] = profile.table.size() - 1;
  j["table"] = profile.table;
  if (profile.saturation_n)
    j["saturation_n"] = *profile.saturation_n;
  else
    j["saturation_n"] = nullptr;
  if (profile.estimated_ord) {
    j["estimated_ord"] = *profile.estimated_ord;
    j["residual"] = profile.residual;
    j["window"] = {profile.window_lo, profile.window_hi};
  } else {
    j["estimated_ord"] = nullptr;
  }
  j["note"] = "estimated_ord is a finite-table regression heuristic";
  return j;
}

std::string growth_csv(const GrowthProfile& profile) {
  std::ostringstream os;
  os << "n,gamma_n\n";
  for (std::size_t n = 0; n < profile.table.size(); ++n)
    os << n << ',' << profile.table[n] << '\n';
  return os.str();
}

Json function_to_json(const FiniteGroupoid& g, const GroupoidFunction& f) {
  Json values = Json::object();
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i].is_zero()) continue;
    values[std::to_string(i)] = {to_string(f[i].re), to_string(f[i].im)};
  }
  Json j;
  j["arrows"] = g.arrow_count();
  j["values"] = std::move(values);
  return j;
}

GroupoidFunction function_from_json(const FiniteGroupoid& g, const Json& j) {
  try {
    GroupoidFunction f(g.arrow_count());
    for (const auto& [key, value] : j.at("values").items()) {
      std::size_t idx = std::stoul(key);
      if (idx >= g.arrow_count())
        throw SpecError("function value on an arrow outside the groupoid");
      f[idx] = ComplexRational(
          rational_from_string(value.at(0).get<std::string>()),
          rational_from_string(value.at(1).get<std::string>()));
    }
    return f;
  } catch (const Json::exception& e) {
    throw SpecError(std::string("malformed function document: ") + e.what());
  }
}

Rational rational_from_string(const std::string& text) {
  try {
    return Rational(text);
  } catch (const std::exception&) {
    throw SpecError("cannot parse rational \"" + text + "\"");
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SpecError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SpecError("cannot write " + path);
  out << content;
}

}  // namespace ample
