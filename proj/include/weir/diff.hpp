#pragma once

#include <string>

namespace weir {

// Line-based unified diff (3 lines of context). Returns "" when the inputs
// are identical.
std::string unified_diff(const std::string& before, const std::string& after,
                         const std::string& label_before, const std::string& label_after);

}  // namespace weir
