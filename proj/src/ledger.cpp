#include "weir/ledger.hpp"

#include <set>

#include "weir/errors.hpp"

namespace weir {

namespace {

// picodollars -> micro-dollars, half-up on the magnitude
std::int64_t picos_to_micros(__int128 picos) {
  constexpr __int128 kRatio = 1'000'000;
  const bool negative = picos < 0;
  __int128 mag = negative ? -picos : picos;
  __int128 micros = (mag + kRatio / 2) / kRatio;
  return static_cast<std::int64_t>(negative ? -micros : micros);
}

}  // namespace

Money cost_of(const UsageEvent& event, const ModelDescriptor& pricing) {
  if (event.model_id != pricing.id) {
    throw ModelMismatch("usage event for '" + event.model_id + "' priced against '" +
                        pricing.id + "'");
  }
  const __int128 picos =
      static_cast<__int128>(event.tokens_in) * pricing.price_per_input_token.picos() +
      static_cast<__int128>(event.tokens_out) * pricing.price_per_output_token.picos();
  return Money::from_micros(picos_to_micros(picos));
}

CostReport aggregate(std::span<const UsageEvent> events, const PricingTable& pricing) {
  CostReport report;
  report.per_event_costs.reserve(events.size());
  std::set<std::string> runs;

  for (const auto& event : events) {
    auto it = pricing.find(event.model_id);
    if (it == pricing.end()) {
      throw UnknownModel("no pricing for model '" + event.model_id + "'");
    }
    const Money cost = cost_of(event, it->second);
    report.per_event_costs.push_back(cost);
    report.total += cost;
    report.breakdown_by_model[event.model_id] += cost;
    report.breakdown_by_purpose[event.purpose] += cost;
    runs.insert(event.run_id);
  }

  report.run_count = runs.size();
  if (!runs.empty()) {
    report.average_per_run = Money::divide(report.total, static_cast<std::int64_t>(runs.size()));
  }
  return report;
}

std::int64_t CostLedger::record(UsageEvent event) {
  if (event.tokens_in < 0 || event.tokens_out < 0) {
    throw Error("usage event with negative token count");
  }
  event.id = static_cast<std::int64_t>(events_.size());
  events_.push_back(std::move(event));
  return events_.back().id;
}

CostReport CostLedger::report(const PricingTable& pricing) const {
  return aggregate(events_, pricing);
}

}  // namespace weir
