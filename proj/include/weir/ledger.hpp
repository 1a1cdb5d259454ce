#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "weir/model.hpp"
#include "weir/money.hpp"
#include "weir/usage.hpp"

namespace weir {

using PricingTable = std::map<std::string, ModelDescriptor>;

// Exact cost of one usage event: price_in * tokens_in + price_out * tokens_out,
// computed in 128-bit picodollars and rounded half-up to micro-dollars.
Money cost_of(const UsageEvent& event, const ModelDescriptor& pricing);

struct CostReport {
  std::vector<Money> per_event_costs;
  Money total;
  std::map<std::string, Money> breakdown_by_model;
  std::map<Purpose, Money> breakdown_by_purpose;
  std::optional<Money> average_per_run;  // set when events span at least one run
  std::size_t run_count = 0;
};

CostReport aggregate(std::span<const UsageEvent> events, const PricingTable& pricing);

// Per-run usage record, single-writer. Implements the gateway's sink; assigns
// sequential event ids.
class CostLedger : public UsageSink {
 public:
  std::int64_t record(UsageEvent event) override;

  const std::vector<UsageEvent>& events() const { return events_; }
  CostReport report(const PricingTable& pricing) const;

 private:
  std::vector<UsageEvent> events_;
};

}  // namespace weir
