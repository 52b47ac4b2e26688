#pragma once

#include <string>

#include "sqed/assumptions.hpp"
#include "sqed/bmc.hpp"
#include "sqed/campaign.hpp"

namespace sqed {

// Counterexample traces: depth, failing assert, initial state, per-step
// inputs and waveform, decoded narration. All values are decimal strings.
std::string cex_to_json(const CounterExample& cex);
CounterExample cex_from_json(const std::string& text);  // ParseError on malformed input

std::string assumption_report_to_json(const AssumptionReport& report);

// Injection spec files: {kind, id, activation, effect, params, seed}.
std::string spec_to_json(const AnySpec& spec);
AnySpec spec_from_json(const std::string& text);

// Campaign config files; `suite` is "bugs" | "hts" | "both" | an inline array
// of spec objects, and an optional `extremal` block generates snapshot specs
// on the configured core.
CampaignConfig campaign_config_from_json(const std::string& text);

}  // namespace sqed
