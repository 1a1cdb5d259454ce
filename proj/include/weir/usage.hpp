#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace weir {

enum class Purpose { planning, worker_action, retrieval, expert };

std::string_view to_string(Purpose p);
Purpose purpose_from_string(std::string_view s);

// One model call's token usage. Emitted by the gateway, exactly one per
// successful completion.
struct UsageEvent {
  std::int64_t id = 0;  // per-run sequence number, assigned by the ledger
  std::string run_id;
  int step_index = 0;
  std::string model_id;
  Purpose purpose = Purpose::planning;
  std::int64_t tokens_in = 0;
  std::int64_t tokens_out = 0;
};

// Where the gateway reports usage. The per-run cost ledger implements this.
class UsageSink {
 public:
  virtual ~UsageSink() = default;
  // Returns the id assigned to the event.
  virtual std::int64_t record(UsageEvent event) = 0;
};

}  // namespace weir
