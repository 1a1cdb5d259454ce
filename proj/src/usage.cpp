#include "weir/usage.hpp"

#include "weir/errors.hpp"

namespace weir {

std::string_view to_string(Purpose p) {
  switch (p) {
    case Purpose::planning: return "planning";
    case Purpose::worker_action: return "worker_action";
    case Purpose::retrieval: return "retrieval";
    case Purpose::expert: return "expert";
  }
  return "planning";
}

Purpose purpose_from_string(std::string_view s) {
  if (s == "planning") return Purpose::planning;
  if (s == "worker_action") return Purpose::worker_action;
  if (s == "retrieval") return Purpose::retrieval;
  if (s == "expert") return Purpose::expert;
  throw Error("unknown usage purpose: '" + std::string(s) + "'");
}

}  // namespace weir
