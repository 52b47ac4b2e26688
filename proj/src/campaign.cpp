#include "sqed/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "sqed/errors.hpp"

namespace sqed {

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

struct Triple {
  int min = 0, avg = 0, max = 0;
  bool any = false;
};

Triple triple_of(const std::vector<int>& xs) {
  Triple t;
  if (xs.empty()) return t;
  t.any = true;
  t.min = *std::min_element(xs.begin(), xs.end());
  t.max = *std::max_element(xs.begin(), xs.end());
  double sum = 0;
  for (int x : xs) sum += x;
  t.avg = int(std::lround(sum / double(xs.size())));
  return t;
}

std::string triple_str(const Triple& t) {
  if (!t.any) return "[-, -, -]";
  return "[" + std::to_string(t.min) + ", " + std::to_string(t.avg) + ", " +
         std::to_string(t.max) + "]";
}

}  // namespace

const std::string& spec_id(const AnySpec& s) {
  return std::visit([](const auto& v) -> const std::string& { return v.id; }, s);
}

Instrumented instrument_for(const CampaignConfig& cfg, const AnySpec* spec) {
  Core core = build_core(cfg.core, cfg.params);
  if (spec) core = std::visit([&](const auto& s) { return inject(core, s); }, *spec).core;
  QedConfig qcfg;
  qcfg.num_regs = cfg.params.num_regs;
  qcfg.mem_words = cfg.params.mem_words;
  Instrumented inst = attach_qed(std::move(core), qcfg, cfg.ablations);
  inst.core.ts.step_assumes.push_back(bv_eq(inst.core.ts.input("qed.original"),
      bv_eq_const(inst.queue_count, 0)));  // TEMP E5
  if (cfg.original_prefix) force_original_prefix(inst, cfg.original_prefix);
  return inst;
}

SingleResult run_single(const CampaignConfig& cfg, const AnySpec* spec, bool symbolic) {
  SingleResult out;
  CampaignRow& row = out.row;
  row.spec_id = spec ? spec_id(*spec) : "clean";
  row.mode = symbolic ? "symbolic" : "concrete";

  Instrumented inst;
  try {
    inst = instrument_for(cfg, spec);
  } catch (const UnsupportedOnCore& e) {
    row.verdict = "skipped";
    row.note = e.what();
    return out;
  } catch (const ShapeMismatch& e) {
    row.verdict = "skipped";
    row.note = e.what();
    return out;
  }

  CheckOptions opt;
  opt.k_max = cfg.k_max;
  opt.conflict_limit = cfg.conflict_limit;
  opt.external_solver = cfg.external_solver;
  opt.seed = splitmix64(cfg.seed ^ fnv1a(row.spec_id) ^ (symbolic ? 1 : 2));
  InitMode mode = symbolic ? InitMode::symbolic() : InitMode::concrete(inst.core.ts);

  CheckResult res = check(inst.core.ts, mode, opt);
  row.conflicts = res.conflicts;
  row.ms = res.ms;
  switch (res.verdict) {
    case Verdict::Cex: row.verdict = "cex"; break;
    case Verdict::NoCex: row.verdict = "nocex"; break;
    case Verdict::Budget: row.verdict = "budget"; break;
  }
  if (res.cex) {
    ReplayResult rep = replay(inst.core.ts, mode, *res.cex);
    if (!rep.confirmed)
      throw SpuriousCounterexample(row.spec_id + " (" + row.mode + "): " + rep.detail);
    DecodedTrace dt = decode_trace(*res.cex, inst.core.ts, inst.decode);
    row.trace_instr = dt.instructions;
    row.trace_cycles = dt.cycles;
    res.cex->decoded = dt.lines;
    out.cex = std::move(res.cex);
  }
  return out;
}

CampaignReport run_campaign(const CampaignConfig& cfg) {
  struct Job {
    const AnySpec* spec;
    bool symbolic;
  };
  std::vector<Job> jobs;
  for (const AnySpec& s : cfg.suite) {
    if (cfg.run_symbolic) jobs.push_back({&s, true});
    if (cfg.run_concrete) jobs.push_back({&s, false});
  }

  std::ofstream rows_out;
  if (!cfg.out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    rows_out.open(std::filesystem::path(cfg.out_dir) / "rows.jsonl", std::ios::app);
    if (!rows_out) throw IoError("cannot open rows.jsonl under " + cfg.out_dir);
  }

  std::vector<CampaignRow> rows(jobs.size());
  std::atomic<size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex mu;
  std::exception_ptr first_error;

  auto worker = [&] {
    for (;;) {
      if (stop.load()) return;
      size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        rows[i] = run_single(cfg, jobs[i].spec, jobs[i].symbolic).row;
      } catch (...) {
        std::lock_guard<std::mutex> lk(mu);
        if (!first_error) first_error = std::current_exception();
        stop.store(true);
        arena_clear();
        return;
      }
      arena_clear();
      if (rows_out.is_open()) {
        nlohmann::json j{{"spec_id", rows[i].spec_id},   {"mode", rows[i].mode},
                         {"verdict", rows[i].verdict},   {"trace_instr", rows[i].trace_instr},
                         {"trace_cycles", rows[i].trace_cycles}, {"conflicts", rows[i].conflicts},
                         {"ms", rows[i].ms},             {"note", rows[i].note}};
        std::lock_guard<std::mutex> lk(mu);
        rows_out << j.dump() << "\n";
        rows_out.flush();
      }
    }
  };

  uint32_t n_workers = std::max<uint32_t>(1, cfg.jobs);
  std::vector<std::thread> pool;
  for (uint32_t t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);

  CampaignReport report;
  report.rows = std::move(rows);
  std::sort(report.rows.begin(), report.rows.end(), [](const auto& a, const auto& b) {
    return std::tie(a.spec_id, a.mode) < std::tie(b.spec_id, b.mode);
  });
  return report;
}

std::string report_csv(const CampaignReport& report) {
  std::ostringstream os;
  os << "spec_id,mode,verdict,trace_instr,trace_cycles,conflicts,ms\n";
  for (const auto& r : report.rows)
    os << r.spec_id << "," << r.mode << "," << r.verdict << "," << r.trace_instr << ","
       << r.trace_cycles << "," << r.conflicts << "," << r.ms << "\n";
  return os.str();
}

std::string report_markdown(const CampaignReport& report) {
  std::ostringstream os;
  os << "# Detection campaign\n\n";
  os << "| mode | rows | detected | undetected | budget | skipped | coverage | "
        "trace instructions | trace cycles |\n";
  os << "|------|------|----------|------------|--------|---------|----------|"
        "--------------------|--------------|\n";
  for (const std::string mode : {"symbolic", "concrete"}) {
    int total = 0, detected = 0, undetected = 0, budget = 0, skipped = 0;
    std::vector<int> instr, cycles;
    for (const auto& r : report.rows) {
      if (r.mode != mode) continue;
      ++total;
      if (r.verdict == "cex") {
        ++detected;
        instr.push_back(r.trace_instr);
        cycles.push_back(r.trace_cycles);
      } else if (r.verdict == "nocex") {
        ++undetected;
      } else if (r.verdict == "budget") {
        ++budget;
      } else {
        ++skipped;
      }
    }
    if (total == 0) continue;
    int completed = detected + undetected;
    std::ostringstream cov;
    if (completed == 0)
      cov << "-";
    else
      cov << std::fixed << std::setprecision(1) << (100.0 * detected / completed) << "%";
    os << "| " << mode << " | " << total << " | " << detected << " | " << undetected << " | "
       << budget << " | " << skipped << " | " << cov.str() << " | "
       << triple_str(triple_of(instr)) << " | " << triple_str(triple_of(cycles)) << " |\n";
  }
  os << "\n| spec | mode | verdict | trace instr | trace cycles |\n";
  os << "|------|------|---------|-------------|--------------|\n";
  for (const auto& r : report.rows)
    os << "| " << r.spec_id << " | " << r.mode << " | " << r.verdict << " | " << r.trace_instr
       << " | " << r.trace_cycles << " |\n";
  return os.str();
}

void emit_report(const CampaignReport& report, const std::string& path,
                 const std::string& format) {
  std::string body;
  if (format == "csv")
    body = report_csv(report);
  else if (format == "markdown")
    body = report_markdown(report);
  else
    throw BadParams("unknown report format: " + format);
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path);
  out << body;
  if (!out.good()) throw IoError("write failed: " + path);
}

}  // namespace sqed
