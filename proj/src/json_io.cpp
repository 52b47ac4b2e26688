#include "sqed/json_io.hpp"

#include <sstream>

#include "json.hpp"
#include "sqed/errors.hpp"

namespace sqed {

namespace {

using nlohmann::json;

json values_to_json(const std::map<std::string, uint64_t>& m) {
  json j = json::object();
  for (const auto& [k, v] : m) j[k] = std::to_string(v);
  return j;
}

std::map<std::string, uint64_t> values_from_json(const json& j) {
  std::map<std::string, uint64_t> m;
  for (auto it = j.begin(); it != j.end(); ++it)
    m[it.key()] = std::stoull(it.value().get<std::string>());
  return m;
}

json parse(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ParseError("malformed JSON");
  return j;
}

Opcode opcode_from_json(const std::string& name) {
  for (int i = 0; i < kNumOpcodes; ++i)
    if (name == opcode_name(Opcode(i))) return Opcode(i);
  throw ParseError("unknown opcode: " + name);
}

json activation_json(const BugActivation& a) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ActForwarding>) {
          return {{"type", "forwarding"}};
        } else if constexpr (std::is_same_v<T, ActTwoInstrWithinX>) {
          return {{"type", "two-instr-within-x"},
                  {"op1", opcode_name(v.op1)},
                  {"op2", opcode_name(v.op2)},
                  {"x", v.x}};
        } else if constexpr (std::is_same_v<T, ActRRegsEqualV>) {
          return {{"type", "r-regs-equal-v"}, {"r", v.r}, {"v", v.v}, {"first", v.first}};
        } else if constexpr (std::is_same_v<T, ActSeqNWithinY>) {
          return {{"type", "seq-n-within-y"}, {"n", v.n}, {"y", v.y}, {"seed", v.seed}};
        } else {
          return {{"type", "cache-state"}};
        }
      },
      a);
}

json activation_json(const TrojanActivation& a) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ActSeqOnWires>) {
          return {{"type", "seq-on-wires"},
                  {"n", v.n},
                  {"m1", v.m1},
                  {"seed", v.seed},
                  {"overlap_friendly", v.overlap_friendly}};
        } else if constexpr (std::is_same_v<T, ActCounter>) {
          return {{"type", "counter"}, {"x1", v.x1}};
        } else if constexpr (std::is_same_v<T, ActComparator>) {
          return {{"type", "comparator"}, {"m2", v.m2}, {"seed", v.seed}};
        } else {
          return {{"type", "rare-event-counter"}, {"x2", v.x2}};
        }
      },
      a);
}

uint64_t spec_seed(const AnySpec& s) {
  if (const auto* b = std::get_if<BugSpec>(&s)) {
    if (const auto* a = std::get_if<ActSeqNWithinY>(&b->activation)) return a->seed;
    return 0;
  }
  if (const auto* t = std::get_if<TrojanSpec>(&s)) {
    if (const auto* a = std::get_if<ActSeqOnWires>(&t->activation)) return a->seed;
    if (const auto* a = std::get_if<ActComparator>(&t->activation)) return a->seed;
    return 0;
  }
  return std::get<ExtremalSpec>(s).seed;
}

BugActivation bug_activation_from_json(const json& j) {
  std::string type = j.at("type").get<std::string>();
  if (type == "forwarding") return ActForwarding{};
  if (type == "two-instr-within-x")
    return ActTwoInstrWithinX{opcode_from_json(j.at("op1").get<std::string>()),
                              opcode_from_json(j.at("op2").get<std::string>()),
                              j.at("x").get<uint32_t>()};
  if (type == "r-regs-equal-v")
    return ActRRegsEqualV{j.at("r").get<uint32_t>(), j.at("v").get<uint64_t>(),
                          j.value("first", 0u)};
  if (type == "seq-n-within-y")
    return ActSeqNWithinY{j.at("n").get<uint32_t>(), j.at("y").get<uint32_t>(),
                          j.value("seed", uint64_t(0))};
  if (type == "cache-state") return ActCacheState{};
  throw ParseError("unknown bug activation: " + type);
}

TrojanActivation trojan_activation_from_json(const json& j) {
  std::string type = j.at("type").get<std::string>();
  if (type == "seq-on-wires")
    return ActSeqOnWires{j.at("n").get<uint32_t>(), j.at("m1").get<uint32_t>(),
                         j.value("seed", uint64_t(0)), j.value("overlap_friendly", false)};
  if (type == "counter") return ActCounter{j.at("x1").get<uint64_t>()};
  if (type == "comparator")
    return ActComparator{j.at("m2").get<uint32_t>(), j.value("seed", uint64_t(0))};
  if (type == "rare-event-counter") return ActRareEventCounter{j.at("x2").get<uint64_t>()};
  throw ParseError("unknown trojan activation: " + type);
}

constexpr const char* kBugEffectNames[] = {"next-to-nop", "opcode-corrupt", "regread-corrupt"};
constexpr const char* kHtEffectNames[] = {"inflight-to-nop", "inflight-opcode",
                                          "regread-corrupt", "exec-corrupt", "early-commit"};

BugEffect bug_effect_from_json(const std::string& s) {
  for (size_t i = 0; i < std::size(kBugEffectNames); ++i)
    if (s == kBugEffectNames[i]) return BugEffect(i);
  throw ParseError("unknown bug effect: " + s);
}

TrojanEffect trojan_effect_from_json(const std::string& s) {
  for (size_t i = 0; i < std::size(kHtEffectNames); ++i)
    if (s == kHtEffectNames[i]) return TrojanEffect(i);
  throw ParseError("unknown trojan effect: " + s);
}

}  // namespace

std::string cex_to_json(const CounterExample& cex) {
  json steps = json::array();
  for (const auto& s : cex.steps)
    steps.push_back({{"inputs", values_to_json(s.inputs)}, {"state", values_to_json(s.state)}});
  json j{{"depth", cex.depth},
         {"failing_assert", cex.failing_assert},
         {"initial_state", values_to_json(cex.initial_state)},
         {"steps", steps},
         {"decoded", cex.decoded}};
  return j.dump(2);
}

CounterExample cex_from_json(const std::string& text) {
  json j = parse(text);
  try {
    CounterExample cex;
    cex.depth = j.at("depth").get<int>();
    cex.failing_assert = j.at("failing_assert").get<std::string>();
    cex.initial_state = values_from_json(j.at("initial_state"));
    for (const auto& s : j.at("steps"))
      cex.steps.push_back({values_from_json(s.at("state")), values_from_json(s.at("inputs"))});
    if (j.contains("decoded"))
      cex.decoded = j.at("decoded").get<std::vector<std::string>>();
    return cex;
  } catch (const json::exception& e) {
    throw ParseError(std::string("counterexample JSON: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw ParseError("counterexample JSON: non-numeric value string");
  }
}

std::string assumption_report_to_json(const AssumptionReport& report) {
  json violations = json::array();
  for (const auto& v : report.violations)
    violations.push_back({{"assumption", v.assumption},
                          {"cycle", v.cycle},
                          {"instruction", v.instruction},
                          {"expected", std::to_string(v.expected)},
                          {"observed", std::to_string(v.observed)}});
  json j{{"runs", report.runs}, {"violations", violations}};
  return j.dump(2);
}

std::string spec_to_json(const AnySpec& spec) {
  json j;
  j["seed"] = spec_seed(spec);
  if (const auto* b = std::get_if<BugSpec>(&spec)) {
    j["kind"] = "bug";
    j["id"] = b->id;
    j["activation"] = activation_json(b->activation);
    j["effect"] = {{"type", kBugEffectNames[int(b->effect)]}};
    j["params"] = {{"target_wire", b->target_wire}};
  } else if (const auto* t = std::get_if<TrojanSpec>(&spec)) {
    j["kind"] = "ht";
    j["id"] = t->id;
    j["activation"] = activation_json(t->activation);
    j["effect"] = {{"type", kHtEffectNames[int(t->effect)]}};
    j["params"] = {{"stealth_style", t->stealth_style}};
  } else {
    const auto& x = std::get<ExtremalSpec>(spec);
    j["kind"] = "extremal";
    j["id"] = x.id;
    json bits = json::array();
    for (const auto& [name, bit] : x.bits) bits.push_back({name, bit});
    j["activation"] = {{"type", "flop-snapshot"},
                       {"bits", bits},
                       {"pattern", std::to_string(x.pattern)}};
    j["effect"] = {{"type", "regread-corrupt"}};
    std::vector<std::string> prog;
    for (const auto& i : x.program) prog.push_back(print_instr(i));
    j["params"] = {{"program", prog},
                   {"stop_cycle", x.stop_cycle},
                   {"random_suffix_len", x.random_suffix_len}};
  }
  return j.dump(2);
}

AnySpec spec_from_json(const std::string& text) {
  json j = parse(text);
  try {
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "bug") {
      BugSpec b;
      b.id = j.at("id").get<std::string>();
      b.activation = bug_activation_from_json(j.at("activation"));
      b.effect = bug_effect_from_json(j.at("effect").at("type").get<std::string>());
      if (j.contains("params")) b.target_wire = j["params"].value("target_wire", "");
      return b;
    }
    if (kind == "ht") {
      TrojanSpec t;
      t.id = j.at("id").get<std::string>();
      t.activation = trojan_activation_from_json(j.at("activation"));
      t.effect = trojan_effect_from_json(j.at("effect").at("type").get<std::string>());
      if (j.contains("params")) t.stealth_style = j["params"].value("stealth_style", "");
      return t;
    }
    if (kind == "extremal") {
      ExtremalSpec x;
      x.id = j.at("id").get<std::string>();
      x.seed = j.value("seed", uint64_t(0));
      const json& act = j.at("activation");
      for (const auto& b : act.at("bits"))
        x.bits.emplace_back(b.at(0).get<std::string>(), b.at(1).get<uint32_t>());
      x.pattern = std::stoull(act.at("pattern").get<std::string>());
      const json& p = j.at("params");
      std::string prog_text;
      for (const auto& line : p.at("program")) prog_text += line.get<std::string>() + "\n";
      x.program = parse_asm(prog_text);
      x.stop_cycle = p.at("stop_cycle").get<uint64_t>();
      x.random_suffix_len = p.value("random_suffix_len", 100u);
      return x;
    }
    throw ParseError("unknown spec kind: " + kind);
  } catch (const json::exception& e) {
    throw ParseError(std::string("spec JSON: ") + e.what());
  }
}

CampaignConfig campaign_config_from_json(const std::string& text) {
  json j = parse(text);
  try {
    CampaignConfig cfg;
    if (j.contains("core")) cfg.core = core_kind_from_name(j["core"].get<std::string>());
    if (j.contains("modes")) {
      cfg.run_symbolic = false;
      cfg.run_concrete = false;
      for (const auto& m : j["modes"]) {
        std::string s = m.get<std::string>();
        if (s == "symbolic")
          cfg.run_symbolic = true;
        else if (s == "concrete")
          cfg.run_concrete = true;
        else
          throw ParseError("unknown mode: " + s);
      }
    }
    cfg.k_max = j.value("k_max", cfg.k_max);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.conflict_limit = j.value("conflict_limit", cfg.conflict_limit);
    cfg.external_solver = j.value("external_solver", cfg.external_solver);
    cfg.jobs = j.value("jobs", cfg.jobs);
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    cfg.original_prefix = j.value("original_prefix", cfg.original_prefix);
    if (j.contains("ablations")) {
      const json& a = j["ablations"];
      cfg.ablations.drop_c1 = a.value("drop_c1", false);
      cfg.ablations.drop_c2_reg = a.value("drop_c2_reg", false);
      cfg.ablations.drop_c2_mem = a.value("drop_c2_mem", false);
      cfg.ablations.drop_c2_testen = a.value("drop_c2_testen", false);
      cfg.ablations.drop_c3 = a.value("drop_c3", false);
      cfg.ablations.drop_property_sif_gate = a.value("drop_property_sif_gate", false);
    }
    if (j.contains("suite")) {
      const json& s = j["suite"];
      if (s.is_string()) {
        std::string name = s.get<std::string>();
        if (name == "bugs" || name == "both")
          for (auto& b : gen_bug_suite(cfg.core)) cfg.suite.emplace_back(std::move(b));
        if (name == "hts" || name == "both")
          for (auto& t : gen_ht_suite(cfg.core)) cfg.suite.emplace_back(std::move(t));
        if (name != "bugs" && name != "hts" && name != "both" && name != "none")
          throw ParseError("unknown suite name: " + name);
      } else {
        for (const auto& item : s) cfg.suite.push_back(spec_from_json(item.dump()));
      }
    }
    if (j.contains("extremal")) {
      const json& x = j["extremal"];
      uint32_t count = x.value("count", 1u);
      uint32_t n_flops = x.value("n_flops", 10u);
      uint64_t seed = x.value("seed", uint64_t(1));
      Core core = build_core(cfg.core, cfg.params);
      for (uint32_t i = 0; i < count; ++i)
        cfg.suite.emplace_back(gen_extremal(core, default_workload(), seed + i, n_flops));
    }
    return cfg;
  } catch (const json::exception& e) {
    throw ParseError(std::string("campaign config JSON: ") + e.what());
  }
}

}  // namespace sqed
