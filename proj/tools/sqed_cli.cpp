#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sqed/campaign.hpp"
#include "sqed/cnf.hpp"
#include "sqed/json_io.hpp"
#include "sqed/solver.hpp"

namespace {

using namespace sqed;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path);
  out << text;
  out.flush();
  if (!out) throw IoError("cannot write " + path);
}

void write_or_print(const std::string& path, const std::string& text) {
  if (path.empty())
    std::cout << text;
  else
    spit(path, text);
}

struct Opts {
  std::string core = "ioc5";
  std::string mode = "symbolic";
  std::string spec_path;
  std::string config_path;
  std::string out;
  std::string cex_path;
  std::string cex_out;
  std::string external_solver;
  std::string kind = "bugs";
  std::string suite;
  std::string dimacs_path;
  int kmax = 10;
  uint64_t seed = 0;
  uint64_t conflict_limit = 0;
  uint32_t jobs = 1;
  uint32_t original_prefix = 0;
  uint32_t count = 50;
  uint32_t n_flops = 10;
  bool with_qed = false;
};

CampaignConfig base_config(const Opts& o) {
  CampaignConfig cfg;
  cfg.core = core_kind_from_name(o.core);
  cfg.k_max = o.kmax;
  cfg.seed = o.seed;
  cfg.conflict_limit = o.conflict_limit;
  cfg.external_solver = o.external_solver;
  cfg.original_prefix = o.original_prefix;
  return cfg;
}

std::vector<bool> mode_list(const std::string& mode) {
  if (mode == "symbolic") return {true};
  if (mode == "concrete") return {false};
  return {true, false};
}

std::optional<AnySpec> load_spec(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return spec_from_json(slurp(path));
}

void make_dir(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw IoError("cannot create " + path + ": " + ec.message());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symbolic quick error detection workbench"};
  app.require_subcommand(1);
  Opts o;

  auto core_opt = [&](CLI::App* sub) {
    sub->add_option("--core", o.core, "processor model")
        ->check(CLI::IsMember({"ioc5", "ooc"}));
  };

  auto* chk = app.add_subcommand("check", "Run one bounded detection query");
  core_opt(chk);
  chk->add_option("--mode", o.mode, "starting state discipline")
      ->check(CLI::IsMember({"symbolic", "concrete", "both"}));
  chk->add_option("--kmax", o.kmax, "unrolling bound");
  chk->add_option("--seed", o.seed, "solver seed");
  chk->add_option("--conflict-limit", o.conflict_limit, "per-call conflict budget, 0 = unlimited");
  chk->add_option("--external-solver", o.external_solver, "DIMACS solver command");
  chk->add_option("--spec", o.spec_path, "injection spec JSON; omitted = bug-free core");
  chk->add_option("--cex-out", o.cex_out, "write the first counterexample trace here");
  chk->add_option("--original-prefix", o.original_prefix,
                  "force this many original-mode fetches before duplication");
  chk->callback([&] {
    CampaignConfig cfg = base_config(o);
    std::optional<AnySpec> spec = load_spec(o.spec_path);
    bool wrote = false;
    for (bool symbolic : mode_list(o.mode)) {
      SingleResult r = run_single(cfg, spec ? &*spec : nullptr, symbolic);
      std::cout << r.row.spec_id << " " << r.row.mode << ": " << r.row.verdict;
      if (r.row.verdict == "cex")
        std::cout << "  instructions=" << r.row.trace_instr
                  << " cycles=" << r.row.trace_cycles;
      if (r.row.verdict == "skipped") std::cout << "  (" << r.row.note << ")";
      std::cout << "  conflicts=" << r.row.conflicts << " ms=" << r.row.ms << "\n";
      if (r.cex && !wrote && !o.cex_out.empty()) {
        spit(o.cex_out, cex_to_json(*r.cex));
        wrote = true;
      }
    }
  });

  auto* cam = app.add_subcommand("campaign", "Run a spec suite and emit reports");
  cam->add_option("--config", o.config_path, "campaign config JSON");
  core_opt(cam);
  cam->add_option("--mode", o.mode)->check(CLI::IsMember({"symbolic", "concrete", "both"}));
  cam->add_option("--kmax", o.kmax);
  cam->add_option("--seed", o.seed);
  cam->add_option("--conflict-limit", o.conflict_limit);
  cam->add_option("--external-solver", o.external_solver);
  cam->add_option("--jobs", o.jobs, "worker threads");
  cam->add_option("--out", o.out, "report directory");
  cam->add_option("--suite", o.suite, "generated suite instead of config list")
      ->check(CLI::IsMember({"bugs", "hts", "both"}));
  cam->callback([&] {
    CampaignConfig cfg;
    if (!o.config_path.empty()) cfg = campaign_config_from_json(slurp(o.config_path));
    if (cam->count("--core")) cfg.core = core_kind_from_name(o.core);
    if (cam->count("--mode")) {
      cfg.run_symbolic = o.mode != "concrete";
      cfg.run_concrete = o.mode != "symbolic";
    }
    if (cam->count("--kmax")) cfg.k_max = o.kmax;
    if (cam->count("--seed")) cfg.seed = o.seed;
    if (cam->count("--conflict-limit")) cfg.conflict_limit = o.conflict_limit;
    if (cam->count("--external-solver")) cfg.external_solver = o.external_solver;
    if (cam->count("--jobs")) cfg.jobs = o.jobs;
    if (cam->count("--out")) cfg.out_dir = o.out;
    if (cam->count("--suite")) {
      cfg.suite.clear();
      if (o.suite != "hts")
        for (auto& s : gen_bug_suite(cfg.core)) cfg.suite.push_back(s);
      if (o.suite != "bugs")
        for (auto& s : gen_ht_suite(cfg.core)) cfg.suite.push_back(s);
    }
    if (cfg.suite.empty()) throw BadParams("campaign: empty suite; pass --config or --suite");
    CampaignReport rep = run_campaign(cfg);
    if (!cfg.out_dir.empty()) {
      emit_report(rep, cfg.out_dir + "/report.csv", "csv");
      emit_report(rep, cfg.out_dir + "/report.md", "markdown");
    }
    std::cout << report_markdown(rep);
  });

  auto* inj = app.add_subcommand("inject", "Emit the injected transition system");
  inj->add_option("--spec", o.spec_path, "injection spec JSON")->required();
  core_opt(inj);
  inj->add_flag("--qed", o.with_qed, "attach the detection instrumentation too");
  inj->add_option("--out", o.out, "output file; stdout when omitted");
  inj->callback([&] {
    AnySpec spec = *load_spec(o.spec_path);
    std::string text;
    if (o.with_qed) {
      text = ts_dump(instrument_for(base_config(o), &spec).core.ts);
    } else {
      Core core = build_core(core_kind_from_name(o.core), {});
      text = ts_dump(std::visit([&](const auto& s) { return inject(core, s); }, spec).core.ts);
    }
    write_or_print(o.out, text);
  });

  auto* rep = app.add_subcommand("replay", "Validate a counterexample trace");
  rep->add_option("--cex", o.cex_path, "counterexample JSON")->required();
  rep->add_option("--spec", o.spec_path, "injection spec JSON; omitted = bug-free core");
  core_opt(rep);
  rep->add_option("--mode", o.mode)->check(CLI::IsMember({"symbolic", "concrete"}));
  rep->add_option("--original-prefix", o.original_prefix);
  rep->callback([&] {
    std::optional<AnySpec> spec = load_spec(o.spec_path);
    Instrumented inst = instrument_for(base_config(o), spec ? &*spec : nullptr);
    InitMode mode =
        o.mode == "symbolic" ? InitMode::symbolic() : InitMode::concrete(inst.core.ts);
    CounterExample cex = cex_from_json(slurp(o.cex_path));
    ReplayResult r = replay(inst.core.ts, mode, cex);
    if (!r.confirmed)
      throw SpuriousCounterexample("step " + std::to_string(r.step) + ": " + r.detail);
    std::cout << "confirmed: " << cex.failing_assert << " fails at step " << cex.depth
              << "\n";
  });

  auto* gen = app.add_subcommand("gen-suite", "Write spec JSON files, one per spec");
  core_opt(gen);
  gen->add_option("--kind", o.kind)->check(CLI::IsMember({"bugs", "hts", "extremal"}));
  gen->add_option("--out", o.out, "output directory")->required();
  gen->add_option("--count", o.count, "extremal: number of specs");
  gen->add_option("--n-flops", o.n_flops, "extremal: snapshot bits per spec");
  gen->add_option("--seed", o.seed);
  gen->callback([&] {
    CoreKind kind = core_kind_from_name(o.core);
    std::vector<AnySpec> specs;
    if (o.kind == "bugs") {
      for (auto& s : gen_bug_suite(kind)) specs.push_back(s);
    } else if (o.kind == "hts") {
      for (auto& s : gen_ht_suite(kind)) specs.push_back(s);
    } else {
      Core core = build_core(kind, {});
      for (uint32_t i = 0; i < o.count; ++i)
        specs.push_back(gen_extremal(core, default_workload(), o.seed + i, o.n_flops));
    }
    make_dir(o.out);
    for (const AnySpec& s : specs) spit(o.out + "/" + spec_id(s) + ".json", spec_to_json(s));
    std::cout << specs.size() << " specs -> " << o.out << "\n";
  });

  auto* exp = app.add_subcommand("export-dimacs", "Write one depth-kmax query as DIMACS CNF");
  core_opt(exp);
  exp->add_option("--mode", o.mode)->check(CLI::IsMember({"symbolic", "concrete"}));
  exp->add_option("--kmax", o.kmax, "exported depth");
  exp->add_option("--spec", o.spec_path, "injection spec JSON; omitted = bug-free core");
  exp->add_option("--original-prefix", o.original_prefix);
  exp->add_option("--out", o.out, "output file; stdout when omitted");
  exp->callback([&] {
    std::optional<AnySpec> spec = load_spec(o.spec_path);
    Instrumented inst = instrument_for(base_config(o), spec ? &*spec : nullptr);
    InitMode mode =
        o.mode == "symbolic" ? InitMode::symbolic() : InitMode::concrete(inst.core.ts);
    write_or_print(o.out, to_dimacs(unroll_to_cnf(inst.core.ts, mode, o.kmax)));
  });

  auto* sol = app.add_subcommand("solve-dimacs", "Solve a DIMACS file with the built-in solver");
  sol->add_option("file", o.dimacs_path, "DIMACS CNF input")->required();
  sol->add_option("--seed", o.seed);
  sol->add_option("--conflict-limit", o.conflict_limit);
  sol->callback([&] {
    Cnf cnf = parse_dimacs(slurp(o.dimacs_path));
    SatResult res = sat_solve(cnf, o.seed, o.conflict_limit);
    std::cout << "c conflicts=" << res.conflicts << " decisions=" << res.decisions
              << " propagations=" << res.propagations << "\n";
    if (res.status == SatStatus::Unsat) {
      std::cout << "s UNSATISFIABLE\n";
    } else if (res.status == SatStatus::Budget) {
      std::cout << "s UNKNOWN\n";
    } else {
      std::cout << "s SATISFIABLE\n";
      for (int v = 1; v <= cnf.num_vars; v += 20) {
        std::cout << "v";
        for (int i = v; i < v + 20 && i <= cnf.num_vars; ++i)
          std::cout << " " << (res.model[i] ? i : -i);
        std::cout << "\n";
      }
      std::cout << "v 0\n";
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const SpuriousCounterexample& e) {
    std::cerr << "spurious counterexample: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
