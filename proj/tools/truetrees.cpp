// truetrees: generate, solve, trace and compare true trees from the command line.
//
// Exit status: 0 success (all verdicts pass), 1 a verdict failed, 2 error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "truetrees/analysis.hpp"
#include "truetrees/farey.hpp"
#include "truetrees/solver.hpp"

using namespace truetrees;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct FamilyArgs {
  std::string family = "trivalent";
  int depth = 3;
  int edges = 31;
  std::uint64_t seed = 1;
};

void add_family_options(CLI::App* cmd, FamilyArgs& a, bool max_depth) {
  cmd->add_option("--family", a.family, "trivalent | grown_seed | cauliflower | random")
      ->check(CLI::IsMember({"trivalent", "grown_seed", "cauliflower", "random"}));
  cmd->add_option(max_depth ? "--max-depth,--depth" : "--depth,--max-depth", a.depth, "generation (family member n)")
      ->check(CLI::Range(1, 30));
  cmd->add_option("--n,--edges", a.edges, "edge count for the random family");
  cmd->add_option("--seed", a.seed, "seed for the random family");
}

PlaneTree member(const FamilyArgs& a, int n) {
  if (a.family == "trivalent") return trivalent_truncation(n);
  if (a.family == "grown_seed") return grow_trivalent(fake_deltoid_seed(), n - 1);
  if (a.family == "cauliflower") return cauliflower_tree(n);
  return random_trivalent(a.edges, a.seed);
}

std::vector<PlaneTree> family(const FamilyArgs& a) {
  if (a.family == "random") return {member(a, 1)};
  std::vector<PlaneTree> out;
  for (int n = 1; n <= a.depth; ++n) out.push_back(member(a, n));
  return out;
}

// ---------------------------------------------------------------------------
// model cache

std::string tree_key(const PlaneTree& t) {
  std::ostringstream o;
  o << std::hex << std::setw(16) << std::setfill('0') << std::hash<std::string>{}(to_json(t).dump());
  return o.str();
}

// unknown entries (NaN) are written as null
json complex_array(const std::vector<Complex>& zs) {
  json a = json::array();
  for (auto z : zs) a.push_back(std::isfinite(z.real()) ? json{z.real(), z.imag()} : json(nullptr));
  return a;
}

std::vector<Complex> read_complex(const json& a) {
  std::vector<Complex> out;
  for (const auto& p : a) {
    if (p.is_null()) out.emplace_back(std::numeric_limits<double>::quiet_NaN(), 0.0);
    else out.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  }
  return out;
}

json model_to_json(const ShabatModel& m) {
  json j;
  j["tree"] = to_json(m.tree());
  j["degree"] = m.degree();
  j["constant"] = {m.constant().real(), m.constant().imag()};
  j["vertex_positions"] = complex_array(m.vertex_positions());
  j["zeros"] = complex_array(m.zeros());
  j["crit_ids"] = m.crit_ids();
  j["coefficients"] = complex_array(m.coefficients());
  j["residual"] = m.unknown_count() ? m.residual().cwiseAbs().maxCoeff() : 0.0;
  j["info"] = {{"iterations", m.info().iterations},
               {"condition_estimate", m.info().condition_estimate},
               {"refinements", m.info().refinements}};
  return j;
}

ShabatModel model_from_json(const json& j) {
  auto tree = tree_from_json(j.at("tree"));
  const auto pos = read_complex(j.at("vertex_positions"));
  const Complex c(j.at("constant").at(0).get<double>(), j.at("constant").at(1).get<double>());
  auto signs = bipartite_signs(tree);
  ShabatModel m(std::move(tree), pos, c, std::move(signs));
  m.set_traced(pos, read_complex(j.at("zeros")));
  m.info().iterations = j.at("info").at("iterations");
  m.info().condition_estimate = j.at("info").at("condition_estimate");
  m.info().refinements = j.at("info").at("refinements");
  return m;
}

class Cache {
 public:
  explicit Cache(std::string dir) : dir_(std::move(dir)) {
    if (!dir_.empty()) fs::create_directories(dir_);
  }

  std::optional<ShabatModel> load(const PlaneTree& t) const {
    if (dir_.empty()) return std::nullopt;
    std::ifstream f(path(t));
    if (!f) return std::nullopt;
    auto m = model_from_json(json::parse(f));
    if (!(m.tree() == t)) return std::nullopt;
    return m;
  }

  void store(const ShabatModel& m) const {
    if (dir_.empty()) return;
    std::ofstream(path(m.tree())) << model_to_json(m).dump() << "\n";
  }

 private:
  std::string path(const PlaneTree& t) const { return dir_ + "/" + tree_key(t) + ".json"; }
  std::string dir_;
};

std::string default_cache() {
  const char* env = std::getenv("TRUETREES_CACHE");
  return env ? env : "";
}

/// Solves a family with continuation, reusing cached members.
std::vector<ShabatModel> solve_family(const std::vector<PlaneTree>& fam, const SolveOptions& opts, const Cache& cache,
                                      bool verbose) {
  std::vector<ShabatModel> out;
  for (std::size_t i = 0; i < fam.size(); ++i) {
    if (auto hit = cache.load(fam[i])) {
      out.push_back(std::move(*hit));
    } else {
      try {
        out.push_back(solve(fam[i], i == 0 ? nullptr : &out.back(), opts));
      } catch (const Error& e) {
        throw Error(e.kind(), "family index " + std::to_string(i) + ": " + e.what());
      }
      cache.store(out.back());
    }
    if (verbose) {
      const auto& m = out.back();
      std::cerr << "N=" << m.degree() << " residual "
                << (m.unknown_count() ? m.residual().cwiseAbs().maxCoeff() : 0.0) << " iterations "
                << m.info().iterations << " cond " << m.info().condition_estimate << "\n";
    }
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::InvalidConfig, "cannot write " + path);
  f << text;
}

int emit(const DiagnosticsReport& r, const std::string& out) {
  write_text(out, r.to_json().dump(2) + "\n");
  for (const auto& v : r.verdicts)
    std::cerr << (v.pass ? "pass " : "FAIL ") << v.name << ": " << v.value << " " << v.relation << " " << v.threshold
              << "\n";
  return r.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conformally balanced trees via Shabat polynomials"};
  app.require_subcommand(1);

  FamilyArgs fam;
  SolveOptions opts;
  std::string out, cache_dir = default_cache(), svg;
  int grid = 1024, kmax = 200, depth = 4;
  bool verbose = false;

  auto* gen = app.add_subcommand("generate", "write a family member as tree JSON");
  add_family_options(gen, fam, false);
  gen->add_option("--out", out, "output file (default stdout)");

  auto* sol = app.add_subcommand("solve", "solve a family with continuation");
  add_family_options(sol, fam, true);
  sol->add_option("--tol", opts.tol, "residual tolerance");
  sol->add_option("--cache", cache_dir, "model cache directory (default $TRUETREES_CACHE)");
  sol->add_option("--out", out, "write the last model as JSON");
  sol->add_flag("-v,--verbose", verbose);

  auto* tr = app.add_subcommand("trace", "trace a solved member");
  add_family_options(tr, fam, false);
  tr->add_option("--tol", opts.tol, "residual tolerance");
  tr->add_option("--cache", cache_dir, "model cache directory");
  tr->add_option("--out", out, "traced JSON");
  tr->add_option("--svg", svg, "also render the tree as SVG");

  std::string kind = "developed";
  auto* ref = app.add_subcommand("reference", "boundary cloud of a limit set as CSV");
  ref->add_option("--kind", kind, "deltoid | developed | cauliflower")
      ->check(CLI::IsMember({"deltoid", "developed", "cauliflower"}));
  ref->add_option("--grid", grid, "grid cells per axis");
  ref->add_option("--oracle-kmax", kmax, "reflection / iteration budget");
  ref->add_option("--out", out, "CSV path (a .json sidecar is written next to it)")->required();

  auto* cmp = app.add_subcommand("compare", "Hausdorff comparison of a family with its limit set");
  add_family_options(cmp, fam, true);
  cmp->add_option("--grid", grid, "oracle grid cells per axis");
  cmp->add_option("--oracle-kmax", kmax, "oracle iteration budget");
  cmp->add_option("--tol", opts.tol, "residual tolerance");
  cmp->add_option("--cache", cache_dir, "model cache directory");
  cmp->add_option("--out", out, "report JSON (default stdout)");

  int samples = 10000, max_len = 40;
  std::uint64_t fseed = 1;
  auto* far = app.add_subcommand("farey", "Farey triangle table or diameter-law report");
  far->add_option("--depth", depth, "table depth");
  far->add_option("--samples", samples, "random words for the report");
  far->add_option("--max-len", max_len, "longest random word");
  far->add_option("--seed", fseed, "seed");
  far->add_option("--out", out, "output file (default stdout)");
  bool report_only = false;
  far->add_flag("--report", report_only, "print the diagnostics report instead of the table");

  auto* suite = app.add_subcommand("suite", "structural diagnostics on one trivalent member");
  add_family_options(suite, fam, false);
  suite->add_option("--tol", opts.tol, "residual tolerance");
  suite->add_option("--cache", cache_dir, "model cache directory");
  suite->add_option("--out", out, "report JSON (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    opts.validate();
    if (*gen) {
      write_text(out, to_json(member(fam, fam.depth)).dump(2) + "\n");
      return 0;
    }
    if (*sol) {
      const auto models = solve_family(family(fam), opts, Cache(cache_dir), verbose);
      if (!out.empty()) write_text(out, model_to_json(models.back()).dump() + "\n");
      std::cout << "solved " << models.size() << " member(s); last N=" << models.back().degree() << "\n";
      return 0;
    }
    if (*tr) {
      auto f = family(fam);
      const auto models = solve_family(f, opts, Cache(cache_dir), false);
      const auto& m = models.back();
      const auto traced = trace_tree(m, m.tree(), opts.trace_step);
      write_text(out, traced_to_json(m.tree(), traced).dump() + "\n");
      if (!svg.empty()) write_text(svg, traced_to_svg(m.tree(), traced));
      std::cerr << "balance error " << traced.balance_error() << ", diameter " << tree_diameter(traced) << "\n";
      return 0;
    }
    if (*ref) {
      LimitSetOracle o;
      o.kind = kind == "deltoid" ? LimitSetKind::Deltoid
               : kind == "developed" ? LimitSetKind::DevelopedDeltoid
                                     : LimitSetKind::Cauliflower;
      o.k_max = kmax;
      o.resolution = grid;
      const auto& cloud = o.boundary();
      write_cloud_csv(out, cloud, o.manifest());
      std::cerr << cloud.size() << " points\n";
      return 0;
    }
    if (*cmp) {
      if (fam.family == "random") throw Error(ErrorKind::InvalidConfig, "compare needs a growth family");
      const auto models = solve_family(family(fam), opts, Cache(cache_dir), false);
      if (fam.family == "cauliflower") {
        const auto cloud = cauliflower_boundary(CloudMethod::Marching, grid, {kmax * 10, 2.0, 1});
        return emit(tree_vs_cauliflower_report(models, cloud), out);
      }
      const DeltoidParams p{kmax, 8.0};
      const auto cloud = developed_deltoid_boundary(grid, p);
      std::vector<ShabatModel> tail(models.begin() + std::max<std::ptrdiff_t>(0, models.size() - 3), models.end());
      return emit(tree_vs_deltoid_report(tail, cloud, p), out);
    }
    if (*far) {
      if (report_only) return emit(farey_report(samples, max_len, fseed), out);
      write_text(out, farey_table_csv(depth));
      return 0;
    }
    if (*suite) {
      const auto models = solve_family(family(fam), opts, Cache(cache_dir), false);
      const auto& m = models.back();
      const auto traced = trace_tree(m, m.tree(), opts.trace_step);
      json all = json::array();
      bool pass = true;
      auto take = [&](const DiagnosticsReport& r) {
        all.push_back(r.to_json());
        pass = pass && r.all_pass();
        for (const auto& v : r.verdicts)
          std::cerr << (v.pass ? "pass " : "FAIL ") << r.name << ": " << v.name << " = " << v.value << "\n";
      };
      take(harmonic_vs_euclid_table(m, traced));
      const int height = m.tree().height();
      for (int k = 0; k < std::min(height, 5); ++k) take(partition_counts(m.tree(), k));
      DiagnosticsReport geo;
      geo.name = "geometry";
      geo.add("balance_error", traced.balance_error());
      geo.add("tree_diameter", tree_diameter(traced));
      geo.add("relative_harmonic_discrepancy", relative_harmonic_discrepancy(m, traced));
      geo.check("balance", traced.balance_error(), "<=", 1e-6);
      geo.check("diameter at least 2", tree_diameter(traced), ">=", 2.0 - 1e-9);
      take(geo);
      write_text(out, all.dump(2) + "\n");
      return pass ? 0 : 1;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
