#pragma once

#include <variant>

#include "sqed/bmc.hpp"
#include "sqed/inject.hpp"
#include "sqed/qed.hpp"

namespace sqed {

using AnySpec = std::variant<BugSpec, TrojanSpec, ExtremalSpec>;

const std::string& spec_id(const AnySpec& s);

struct CampaignConfig {
  CoreKind core = CoreKind::IOC5;
  CoreParams params;
  std::vector<AnySpec> suite;
  bool run_symbolic = true;
  bool run_concrete = true;
  int k_max = 8;
  uint64_t seed = 0;
  uint64_t conflict_limit = 0;
  std::string external_solver;
  uint32_t jobs = 1;
  std::string out_dir;           // when set, rows.jsonl is appended as rows finish
  uint32_t original_prefix = 0;  // warm-up discipline harness; 0 = off
  Ablations ablations;
};

struct CampaignRow {
  std::string spec_id;
  std::string mode;     // "symbolic" | "concrete"
  std::string verdict;  // "cex" | "nocex" | "budget" | "skipped"
  int trace_instr = 0;
  int trace_cycles = 0;
  uint64_t conflicts = 0;
  uint64_t ms = 0;
  std::string note;  // skip reason; kept out of the CSV
};

struct CampaignReport {
  std::vector<CampaignRow> rows;  // sorted by (spec_id, mode)
};

// The exact instrumented system a campaign row checks; spec == nullptr gives
// the bug-free instrumented core.
Instrumented instrument_for(const CampaignConfig& cfg, const AnySpec* spec);

struct SingleResult {
  CampaignRow row;
  std::optional<CounterExample> cex;  // decoded narration filled in
};

// One detection job: inject, instrument, check, and replay-validate any
// counterexample. A replay mismatch is a tooling bug and surfaces as
// SpuriousCounterexample.
SingleResult run_single(const CampaignConfig& cfg, const AnySpec* spec, bool symbolic);

// run_single over every (spec, mode) pair. Rows come back in canonical order
// regardless of the worker count.
CampaignReport run_campaign(const CampaignConfig& cfg);

std::string report_csv(const CampaignReport& report);
std::string report_markdown(const CampaignReport& report);

// format: "csv" | "markdown"
void emit_report(const CampaignReport& report, const std::string& path,
                 const std::string& format);

}  // namespace sqed
