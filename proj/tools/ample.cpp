// Command-line surface: spec ingestion, analysis pipelines, witness
// persistence and verification. Fully deterministic; all randomized testing
// lives in the test suite.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "ample/comparison.hpp"
#include "ample/convolution.hpp"
#include "ample/errors.hpp"
#include "ample/growth.hpp"
#include "ample/measure.hpp"
#include "ample/serialization.hpp"

namespace fs = std::filesystem;
using namespace ample;

namespace {

struct Options {
  std::string spec_path;
  std::string out_dir = ".";
  std::string set_a;
  std::string set_b;
  std::string witness_path;
  std::string function_path;
  int depth_check = -1;
  int n_max = 8;
  int epsilon_exp = -1;
  long long m = -1;
  int ball_radius = -1;
  int threads = 1;
  double tolerance = 1e-9;
  bool auto_params = false;
};

FiniteGroupoid load_groupoid(const Options& opt) {
  if (opt.spec_path.empty()) throw SpecError("--spec is required");
  FiniteGroupoid g = build_from_spec(load_groupoid_spec(opt.spec_path));
  if (opt.depth_check >= 0 && g.space().depth() != opt.depth_check)
    throw SpecError("spec depth " + std::to_string(g.space().depth()) +
                    " does not match --depth " +
                    std::to_string(opt.depth_check));
  return g;
}

void write_out(const Options& opt, const std::string& name,
               const std::string& content) {
  fs::create_directories(opt.out_dir);
  write_text_file((fs::path(opt.out_dir) / name).string(), content);
}

int cmd_build(const Options& opt) {
  FiniteGroupoid g = load_groupoid(opt);
  write_out(opt, "arrows.csv", arrow_table_csv(g));
  std::cout << summary_line(summarize(g)) << "\n";
  return 0;
}

int cmd_growth(const Options& opt) {
  FiniteGroupoid g = load_groupoid(opt);
  GrowthProfile profile = growth_function(g, opt.n_max, opt.threads);
  Json summary = growth_summary_json(profile);
  try {
    MParameter param = m_parameter(g, profile, 1);
    summary["doubling_scale"] = param.doubling_scale;
    summary["m"] = param.m;
  } catch (const Error&) {
    summary["doubling_scale"] = nullptr;
    summary["m"] = nullptr;
  }
  write_out(opt, "growth.csv", growth_csv(profile));
  write_out(opt, "growth.json", summary.dump(2) + "\n");
  std::cout << "gamma(n_max) = " << profile.table.back();
  if (profile.estimated_ord)
    std::cout << ", estimated ord " << *profile.estimated_ord
              << " (heuristic)";
  std::cout << "\n";
  return 0;
}

int cmd_orbital(const Options& opt) {
  FiniteGroupoid g = load_groupoid(opt);
  std::ostringstream os;
  os << "n,max_orbital_ball,max_cayley_ball,surjection_ok\n";
  bool all_ok = true;
  for (int n = 0; n <= opt.n_max; ++n) {
    std::size_t max_orb = 0, max_cay = 0;
    bool ok = true;
    for (std::size_t x = 0; x < g.space().point_count(); ++x) {
      auto rep = check_source_surjection(g, static_cast<WordIndex>(x), n);
      max_orb = std::max(max_orb, rep.orbital_count);
      max_cay = std::max(max_cay, rep.cayley_count);
      ok = ok && rep.pass();
    }
    all_ok = all_ok && ok;
    os << n << ',' << max_orb << ',' << max_cay << ',' << (ok ? 1 : 0) << '\n';
  }
  write_out(opt, "orbital.csv", os.str());
  if (!all_ok) throw InvariantViolation("orbital source surjection failed");
  std::cout << "orbital domination verified up to n = " << opt.n_max << "\n";
  return 0;
}

int cmd_folner(const Options& opt) {
  FiniteGroupoid g = load_groupoid(opt);
  int exp = opt.epsilon_exp >= 0 ? opt.epsilon_exp : 2;
  Rational eps = pow2(-exp);
  FolnerResult res = folner_index(g, eps, opt.n_max);
  Json j;
  j["epsilon"] = "2^-" + std::to_string(exp);
  j["index"] = res.index;
  j["sup_ratio"] = to_string(res.sup_ratio);
  write_out(opt, "folner.json", j.dump(2) + "\n");
  std::cout << "Folner index " << res.index << " with sup ratio "
            << to_string(res.sup_ratio) << "\n";
  return 0;
}

int cmd_density(const Options& opt) {
  FiniteGroupoid g = load_groupoid(opt);
  std::ostringstream os;
  os << "n,deficit,displacement\n";
  for (int n = 0; n <= opt.n_max; ++n) {
    DensitySequence seq = fiber_normalized_ball_densities(g, {n});
    CertificateReport rep =
        verify_density_certificate(g, seq, g.generators(), Rational(1));
    os << n << ',' << to_string(rep.deficit) << ','
       << to_string(rep.displacement) << '\n';
  }
  write_out(opt, "density.csv", os.str());
  std::cout << "density certificate table written for n <= " << opt.n_max
            << "\n";
  return 0;
}

int cmd_measure_check(const Options& opt) {
  FiniteGroupoid g = load_groupoid(opt);
  auto vertices = invariant_vertex_measures(g);
  Json j;
  j["vertex_count"] = vertices.size();
  Json list = Json::array();
  for (const auto& mu : vertices) {
    Json entry;
    entry["measure"] = measure_to_json(mu);
    entry["invariance_defect"] = to_string(invariance_defect(g, mu));
    list.push_back(std::move(entry));
  }
  j["vertices"] = std::move(list);
  if (!opt.set_a.empty()) {
    ClopenSet a = parse_clopen_expression(g.space(), opt.set_a);
    Json densities = Json::array();
    for (int n = 0; n <= opt.n_max; ++n) {
      Json row;
      row["n"] = n;
      row["upper"] = to_string(banach_upper_density(g, a, n));
      row["lower"] = to_string(banach_lower_density(g, a, n));
      row["rho"] = to_string(translation_defect_ratio(g, n));
      densities.push_back(std::move(row));
    }
    j["banach"] = std::move(densities);
  }
  write_out(opt, "measure.json", j.dump(2) + "\n");
  std::cout << vertices.size() << " invariant vertex measure(s)\n";
  return 0;
}

int cmd_compare(const Options& opt) {
  FiniteGroupoid g = load_groupoid(opt);
  if (opt.set_a.empty() || opt.set_b.empty())
    throw SpecError("compare needs --A and --B set expressions");
  ClopenSet a = parse_clopen_expression(g.space(), opt.set_a);
  ClopenSet b = parse_clopen_expression(g.space(), opt.set_b);

  SubequivalenceWitness witness{a, b, 0, {}, {}};
  Json meta;
  if (opt.m >= 0 && !opt.auto_params) {
    int radius = opt.ball_radius >= 0 ? opt.ball_radius : 1;
    DyadicRadius eps = DyadicRadius::dyadic(
        opt.epsilon_exp >= 0 ? opt.epsilon_exp : g.space().depth() + 1);
    std::vector<ArrowId> d;
    for (std::size_t i = 0; i < g.arrow_count(); ++i)
      if (g.word_length(static_cast<ArrowId>(i)) <= radius)
        d.push_back(static_cast<ArrowId>(i));
    witness = run_m_comparison(g, a, b, d, opt.m, eps);
    meta["mode"] = "explicit";
    meta["ball_radius"] = radius;
    meta["m"] = opt.m;
    meta["eps"] = eps.str();
  } else {
    AutoCompareResult res = auto_compare(g, a, b, opt.n_max);
    witness = std::move(res.witness);
    meta["mode"] = "auto";
    meta["ball_radius"] = res.ball_radius;
    meta["m"] = res.m;
    meta["eps"] = res.eps.str();
  }

  Json out = witness_to_json(witness);
  out["parameters"] = std::move(meta);
  write_out(opt, "witness.json", out.dump(2) + "\n");

  // round-trip self-verification of the file just written
  Json reread = Json::parse(
      read_text_file((fs::path(opt.out_dir) / "witness.json").string()));
  SubequivalenceWitness loaded = witness_from_json(g, reread);
  VerifyReport rep = verify_witness(g, loaded.a, loaded.b, loaded);
  if (!rep.pass)
    throw InvariantViolation("self-verification failed: " + rep.detail);
  std::cout << "VERIFIED (" << witness.family_count() << " families, "
            << witness.piece_count() << " pieces)\n";
  return 0;
}

int cmd_verify(const Options& opt) {
  FiniteGroupoid g = load_groupoid(opt);
  if (opt.witness_path.empty()) throw SpecError("verify needs --witness");
  Json j = Json::parse(read_text_file(opt.witness_path));
  SubequivalenceWitness w = witness_from_json(g, j);
  VerifyReport rep = verify_witness(g, w.a, w.b, w);
  if (!rep.pass) {
    std::cout << "REJECTED: " << rep.detail << "\n";
    throw InvariantViolation("witness rejected: " + rep.detail);
  }
  std::cout << "VERIFIED\n";
  return 0;
}

int cmd_norms(const Options& opt) {
  FiniteGroupoid g = load_groupoid(opt);
  Json report = Json::array();
  auto add = [&](const std::string& name, const GroupoidFunction& f) {
    Json row;
    row["function"] = name;
    row["i_norm"] = to_string(i_norm(g, f));
    row["reduced_norm"] = reduced_norm(g, f, opt.tolerance, opt.threads);
    report.push_back(std::move(row));
  };
  if (!opt.function_path.empty()) {
    GroupoidFunction f =
        function_from_json(g, Json::parse(read_text_file(opt.function_path)));
    add("input", f);
  } else {
    add("unit_indicator", unit_indicator(g));
    std::vector<ArrowId> gens(g.generators().begin(), g.generators().end());
    add("generator_indicator", indicator(g, gens));
    add("full_indicator", indicator(g, g.all_arrows()));
  }
  std::size_t count = report.size();
  Json j;
  j["tolerance"] = opt.tolerance;
  j["norms"] = std::move(report);
  write_out(opt, "norms.json", j.dump(2) + "\n");
  std::cout << "norm report written (" << count << " functions)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite approximations of ample groupoids: growth, densities, "
               "invariant measures, comparison witnesses"};
  app.require_subcommand(1);

  Options opt;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--spec", opt.spec_path, "groupoid spec (JSON)");
    sub->add_option("--depth", opt.depth_check,
                    "assert the spec's word depth equals this value");
    sub->add_option("--nmax", opt.n_max, "table horizon");
    sub->add_option("--epsilon", opt.epsilon_exp,
                    "dyadic exponent j, radius 2^-j");
    sub->add_option("--out", opt.out_dir, "output directory");
    sub->add_option("--threads", opt.threads, "worker threads");
  };

  CLI::App* build =
      app.add_subcommand("build", "build a groupoid, write its arrow table");
  add_common(build);
  CLI::App* growth =
      app.add_subcommand("growth", "growth table and ord estimate");
  add_common(growth);
  CLI::App* orbital =
      app.add_subcommand("orbital", "orbital vs Cayley ball domination");
  add_common(orbital);
  CLI::App* folner =
      app.add_subcommand("folner", "smallest almost-invariant ball radius");
  add_common(folner);
  CLI::App* density =
      app.add_subcommand("density", "approximate invariant density table");
  add_common(density);
  CLI::App* measure = app.add_subcommand(
      "measure-check", "invariant measures and Banach densities");
  add_common(measure);
  measure->add_option("--A", opt.set_a, "clopen set expression");
  CLI::App* compare = app.add_subcommand(
      "compare", "construct and verify a subequivalence witness");
  add_common(compare);
  compare->add_option("--A", opt.set_a, "clopen set expression");
  compare->add_option("--B", opt.set_b, "clopen set expression");
  compare->add_flag("--auto", opt.auto_params,
                    "derive M, m, eps from the growth table");
  compare->add_option("--m", opt.m, "family budget m");
  compare->add_option("--ball-radius", opt.ball_radius, "D = B(M)");
  CLI::App* verify =
      app.add_subcommand("verify", "re-check a serialized witness");
  add_common(verify);
  verify->add_option("--witness", opt.witness_path, "witness file");
  CLI::App* norms =
      app.add_subcommand("norms", "I-norm and reduced norm report");
  add_common(norms);
  norms->add_option("--function", opt.function_path, "function file (JSON)");
  norms->add_option("--tolerance", opt.tolerance, "operator norm tolerance");

  CLI11_PARSE(app, argc, argv);

  try {
    if (build->parsed()) return cmd_build(opt);
    if (growth->parsed()) return cmd_growth(opt);
    if (orbital->parsed()) return cmd_orbital(opt);
    if (folner->parsed()) return cmd_folner(opt);
    if (density->parsed()) return cmd_density(opt);
    if (measure->parsed()) return cmd_measure_check(opt);
    if (compare->parsed()) return cmd_compare(opt);
    if (verify->parsed()) return cmd_verify(opt);
    if (norms->parsed()) return cmd_norms(opt);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
