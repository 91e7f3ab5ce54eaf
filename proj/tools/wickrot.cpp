// wickrot: audit pseudo-Riemannian spectral triple models, Wick-rotate them,
// and compute heat/zeta traces, spectral dimensions and index pairings.

#include "wickrot/analysis.hpp"
#include "wickrot/clifford.hpp"
#include "wickrot/index_pairing.hpp"
#include "wickrot/models.hpp"
#include "wickrot/parallel.hpp"
#include "wickrot/verifier.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wickrot;

namespace {

struct RunConfig {
  std::string model_path;
  std::string models_dir;
  std::string task;
  std::vector<int> levels;
  std::vector<double> s_grid;
  std::vector<double> t_list = {0.1, 0.5, 1.0, 2.0};
  int winding = 1;
  std::string out_dir = ".";
  verifier::Tolerances tol;
  int threads = 0;
  std::string signature;  // "t,s" for the clifford task
};

std::vector<double> parse_s_grid(const std::string& text) {
  double start = 0.1, stop = 4.0, step = 0.05;
  if (!text.empty()) {
    std::istringstream in(text);
    char c1, c2;
    if (!(in >> start >> c1 >> stop >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0 ||
        stop < start)
      throw CLI::ValidationError("--s-grid", "expected start:stop:step with step > 0");
  }
  std::vector<double> grid;
  for (int i = 0;; ++i) {
    const double s = start + i * step;
    if (s > stop + 1e-12) break;
    grid.push_back(s);
  }
  return grid;
}

std::vector<int> default_levels(const std::string& family) {
  if (family == "finite") return {1, 2, 3};
  if (family == "first-order") return {32, 64, 128};
  return {64, 128, 256};
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

void atomic_write(const fs::path& target, const std::string& payload) {
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << payload;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

// ---------------------------------------------------------------------------
// per-task runners; each returns its JSON fragment, appends CSV rows, and
// reports failures as (name, measured-value) lines

struct Failures {
  std::vector<std::string> lines;
  void add(const std::string& what, double measured) {
    std::ostringstream os;
    os << what << " (measured " << std::setprecision(17) << measured << ")";
    lines.push_back(os.str());
  }
  void add(const std::string& what) { lines.push_back(what); }
  bool any() const { return !lines.empty(); }
};

json run_clifford_suite(const std::string& signature, Failures& fails) {
  std::vector<clifford::Signature> sigs;
  if (!signature.empty()) {
    int t = 0, s = 0;
    if (std::sscanf(signature.c_str(), "%d,%d", &t, &s) != 2)
      throw std::runtime_error("--signature expects t,s");
    sigs.push_back({t, s});
  } else {
    for (int n = 1; n <= 6; ++n)
      for (int t = 0; t <= n; ++t) sigs.push_back({t, n - t});
  }
  json out = json::array();
  for (const auto& sig : sigs) {
    const auto rep = clifford::make_representation(sig);
    const auto squares = clifford::verify_square_relation(rep);
    const auto mixed = clifford::verify_mixed_relation(rep);
    const double refl_identity = clifford::reflection_identity_residual(rep);
    double jm_unitary = 0.0, jm_reflection = 0.0;
    if (sig.t >= 1) {
      const auto jm = clifford::fundamental_symmetry(rep);
      jm_unitary = jm.unitary_residual;
      jm_reflection = jm.reflection_residual;
    }
    const double worst = std::max({squares.max_residual, mixed.max_residual, refl_identity,
                                   jm_unitary, jm_reflection});
    json entry{{"t", sig.t},
               {"s", sig.s},
               {"square_residual", squares.max_residual},
               {"mixed_residual", mixed.max_residual},
               {"reflection_identity", refl_identity},
               {"JM_unitary", jm_unitary},
               {"JM_reflection", jm_reflection},
               {"pass", worst <= 1e-12}};
    if (worst > 1e-12) {
      std::ostringstream os;
      os << "clifford identities at signature (" << sig.t << "," << sig.s << ")";
      fails.add(os.str(), worst);
    }
    out.push_back(entry);
  }
  return out;
}

json run_verify(const models::ModelDescriptor& desc, const RunConfig& cfg,
                const std::vector<int>& levels, std::vector<analysis::CsvRow>& rows,
                const std::string& model_name, Failures& fails) {
  json out;
  const auto rep = verifier::verify_prst(desc, levels, cfg.tol);
  out["axioms_report"] = rep.to_json();
  if (!rep.pass()) {
    if (!rep.axiom2a_pass()) fails.add(model_name + ": axiom 2a order evidence not supported");
    if (!rep.axiom2b_pass()) fails.add(model_name + ": axiom 2b compactness evidence failed");
    if (!rep.axiom3_pass()) fails.add(model_name + ": axiom 3 commutator bounds failed");
    if (!rep.axiom4_pass()) fails.add(model_name + ": axiom 4 resolvent compactness failed");
    if (!rep.universal_pass)
      fails.add(model_name + ": universal bound exceeded", rep.bound_rd.back());
    if (rep.ratios.gates_pass && !rep.ratios.bounded)
      fails.add(model_name + ": ratio boundedness (lem ratios-1) failed");
    if (!rep.derived_pass(cfg.tol.derived_residual))
      fails.add(model_name + ": D_E derived-operator residuals too large");
    if (rep.krein_checked && rep.krein_residual > cfg.tol.krein)
      fails.add(model_name + ": Krein relation violated", rep.krein_residual);
  }

  if (desc.family == "first-order") {
    const auto cond = models::check_first_order_conditions(desc.first_order_spec());
    json jc;
    auto item = [](const models::ConditionItem& it) {
      json j{{"condition", it.condition}, {"pass", it.pass}, {"measure", it.measure}};
      if (it.witness_xi.size()) {
        json xi = json::array();
        for (Eigen::Index i = 0; i < it.witness_xi.size(); ++i) xi.push_back(it.witness_xi(i));
        j["witness_xi"] = xi;
      }
      if (it.witness_j >= 0) j["witness_j"] = it.witness_j;
      if (it.witness_k >= 0) j["witness_k"] = it.witness_k;
      if (it.witness_l >= 0) j["witness_l"] = it.witness_l;
      return j;
    };
    jc["symbol_invertible"] = item(cond.symbol_invertible);
    jc["anticommutators"] = item(cond.anticommutators);
    jc["mass_compatibility"] = item(cond.mass_compatibility);
    jc["smooth_M"] = item(cond.smooth_m);
    jc["smooth_K"] = item(cond.smooth_k);
    jc["admissible"] = cond.admissible();
    jc["smoothly_summable"] = cond.smoothly_summable();
    out["admissibility"] = jc;
    if (!cond.admissible())
      fails.add(model_name + ": first-order admissibility rejected (witness recorded)",
                cond.symbol_invertible.measure);
  }

  const auto model = desc.build(desc.family == "finite" ? 0 : levels.back());
  if (model.beta.has_value()) {
    const auto lor = verifier::verify_lorentz_type(model, cfg.tol);
    out["lorentz"] = lor.to_json();
    if (!lor.pass())
      for (const auto& v : lor.violated) fails.add(model_name + ": lorentz identity " + v);
  }

  const auto pipe = verifier::wick_pipeline_check(desc, levels, cfg.s_grid, cfg.tol);
  out["pipeline"] = pipe.to_json();
  if (!pipe.pass()) fails.add(model_name + ": wick pipeline check failed");
  for (const auto& r :
       analysis::zeta_report_rows(model_name, "zeta<D>", pipe.dim_mean_square))
    rows.push_back(r);
  for (const auto& r : analysis::zeta_report_rows(model_name, "zetaDE", pipe.dim_wick))
    rows.push_back(r);
  return out;
}

json run_zeta(const models::ModelDescriptor& desc, const RunConfig& cfg,
              const std::vector<int>& levels, std::vector<analysis::CsvRow>& rows,
              const std::string& model_name, Failures& fails) {
  auto gen = [&](int level) {
    const auto m = desc.build(level);
    return std::make_pair(m.algebra.front().second.matrix, m.derived.mean_square);
  };
  analysis::SpectralDimensionOptions opts;
  opts.eps_stab = cfg.tol.eps_stab;
  const auto rep = analysis::spectral_dimension_estimate(gen, cfg.s_grid, levels, opts);
  for (const auto& r : analysis::zeta_report_rows(model_name, "zeta<D>", rep)) rows.push_back(r);
  json out = verifier::zeta_report_to_json(rep);
  if (rep.verdict == "inconclusive") fails.add(model_name + ": spectral dimension inconclusive");

  if (desc.family == "oscillator") {
    const double g_int =
        quadrature::integrate_line([](double x) { return 1.0 / (1.0 + x * x); });
    const auto line = analysis::line_spectral_dimension(cfg.s_grid, g_int);
    out["line_analytic"] = verifier::zeta_report_to_json(line);
  }
  return out;
}

json run_heat(const models::ModelDescriptor& desc, const RunConfig& cfg,
              const std::vector<int>& levels, std::vector<analysis::CsvRow>& rows,
              const std::string& model_name, Failures&) {
  json out;
  json table = json::array();
  for (int level : levels) {
    const auto m = desc.build(desc.family == "finite" ? 0 : level);
    analysis::TraceEngine engine(m.algebra.front().second.matrix, m.derived.mean_square);
    for (double t : cfg.t_list) {
      const double v = engine.heat(t);
      table.push_back(json{{"N", m.level()}, {"t", t}, {"value", v}});
      rows.push_back({model_name, "heat", t, m.level(), v, false});
    }
    if (desc.family == "finite") break;
  }
  out["traces"] = table;
  return out;
}

json run_index(const models::ModelDescriptor& desc, const RunConfig& cfg,
               const std::vector<int>& levels, const std::string& model_name, Failures& fails) {
  json out;
  if (desc.family == "oscillator") {
    const auto model = desc.build(levels.empty() ? 0 : levels.back());
    const auto res = pairing::residue_pairing(cfg.winding, model);
    json st = json::array();
    for (const auto& [s, v] : res.s_table) st.push_back(json::array({s, v}));
    out = json{{"method", res.method},       {"residue", res.residue},
               {"pairing", res.integer_pairing}, {"oracle", res.oracle},
               {"distance", res.distance},   {"s_table", st}};
    if (!res.pass) fails.add(model_name + ": index pairing failed", res.distance);
  } else {
    const auto model = desc.build(0);
    if (!model.grading.has_value()) {
      out = json{{"method", "none"}, {"reason", "model has no grading"}};
      return out;
    }
    const auto res = pairing::mckean_singer_index(model, cfg.t_list, cfg.tol.mckean);
    json tt = json::array();
    for (const auto& [t, v] : res.t_table) tt.push_back(json::array({t, v}));
    out = json{{"method", res.method},       {"pairing", res.integer_pairing},
               {"oracle", res.oracle},       {"distance", res.distance},
               {"t_table", tt}};
    if (!res.pass) fails.add(model_name + ": graded index check failed", res.distance);
  }
  return out;
}

int run(const RunConfig& cfg) {
  if (cfg.threads > 0) set_thread_count(cfg.threads);

  Failures fails;
  std::vector<analysis::CsvRow> rows;
  json report;
  report["version"] = verifier::kReportSchema;
  {
    const auto now = std::chrono::system_clock::now();
    report["timestamp"] =
        static_cast<long long>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                   now.time_since_epoch())
                                   .count());
  }
  report["tolerances"] = cfg.tol.to_json();

  std::vector<std::pair<std::string, models::ModelDescriptor>> targets;
  if (!cfg.models_dir.empty()) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(cfg.models_dir))
      if (entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files)
      targets.emplace_back(f.stem().string(),
                           models::ModelDescriptor::from_json(load_json_file(f.string())));
  } else if (!cfg.model_path.empty()) {
    targets.emplace_back(fs::path(cfg.model_path).stem().string(),
                         models::ModelDescriptor::from_json(load_json_file(cfg.model_path)));
  }

  if (cfg.task == "clifford") {
    report["clifford"] = run_clifford_suite(cfg.signature, fails);
  } else if (cfg.task == "all") {
    report["clifford"] = run_clifford_suite("", fails);
  }

  if (cfg.task != "clifford") {
    if (targets.empty()) {
      std::cerr << "wickrot: no model given (use --model or --models-dir)\n";
      return 1;
    }
    json per_model;
    for (const auto& [name, desc] : targets) {
      const std::vector<int> levels =
          cfg.levels.empty() ? default_levels(desc.family) : cfg.levels;
      json m;
      m["descriptor"] = desc.to_json();
      if (cfg.task == "verify" || cfg.task == "all")
        m["verify"] = run_verify(desc, cfg, levels, rows, name, fails);
      if (cfg.task == "zeta" || cfg.task == "all")
        m["zeta"] = run_zeta(desc, cfg, levels, rows, name, fails);
      if (cfg.task == "heat" || cfg.task == "all")
        m["heat"] = run_heat(desc, cfg, levels, rows, name, fails);
      if (cfg.task == "index" || cfg.task == "all")
        m["index"] = run_index(desc, cfg, levels, name, fails);
      per_model[name] = m;
    }
    report["models"] = per_model;
  }

  report["pass"] = !fails.any();
  if (fails.any()) {
    report["failures"] = fails.lines;
    for (const auto& line : fails.lines) std::cerr << "FAIL: " << line << "\n";
  }

  fs::create_directories(cfg.out_dir);
  atomic_write(fs::path(cfg.out_dir) / "report.json", report.dump(2) + "\n");
  if (!rows.empty()) {
    std::ostringstream csv;
    analysis::write_convergence_csv(csv, rows);
    atomic_write(fs::path(cfg.out_dir) / "tables.csv", csv.str());
  }
  return fails.any() ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wick rotation toolkit for pseudo-Riemannian spectral triples"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string s_grid_text;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--model", cfg.model_path, "model descriptor JSON");
    sub->add_option("--models-dir", cfg.models_dir, "directory of model descriptors");
    sub->add_option("--levels", cfg.levels, "truncation levels (CSV)")->delimiter(',');
    sub->add_option("--s-grid", s_grid_text, "s grid as start:stop:step");
    sub->add_option("--t", cfg.t_list, "heat times (CSV)")->delimiter(',');
    sub->add_option("--winding", cfg.winding, "winding number for the index task");
    sub->add_option("--out", cfg.out_dir, "output directory");
    sub->add_option("--threads", cfg.threads, "thread count (or WICKROT_THREADS)");
    sub->add_option("--tol", [&cfg](const std::vector<std::string>& vals) {
      for (const auto& kv : vals) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) return false;
        cfg.tol.apply_override(kv.substr(0, eq), std::stod(kv.substr(eq + 1)));
      }
      return true;
    }, "tolerance override KEY=VAL (repeatable)");
  };

  for (const char* name : {"verify", "zeta", "heat", "index", "clifford", "all"}) {
    auto* sub = app.add_subcommand(name);
    add_common(sub);
    if (std::string(name) == "clifford")
      sub->add_option("--signature", cfg.signature, "signature t,s (default: all n <= 6)");
    sub->callback([&cfg, name] { cfg.task = name; });
  }

  try {
    app.parse(argc, argv);
    cfg.s_grid = parse_s_grid(s_grid_text);
    return run(cfg);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "wickrot: " << e.what() << "\n";
    return 1;
  }
}
