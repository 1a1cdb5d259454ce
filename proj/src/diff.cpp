#include "weir/diff.hpp"

#include <algorithm>
#include <string_view>
#include <vector>

namespace weir {

namespace {

std::vector<std::string_view> split_lines(const std::string& text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    lines.push_back(std::string_view(text).substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

struct Edit {
  char tag;  // ' ' keep, '-' delete, '+' insert
  std::string_view line;
};

// Myers O(ND) shortest edit script. Gives up (empty result) past kEditCap so
// the trace memory stays bounded; callers fall back to full replacement.
std::vector<Edit> diff_lines(const std::vector<std::string_view>& a,
                             const std::vector<std::string_view>& b) {
  constexpr int kEditCap = 2000;
  const int n = static_cast<int>(a.size());
  const int m = static_cast<int>(b.size());
  const int max_d = std::min(n + m, kEditCap);
  const int offset = max_d;

  std::vector<int> v(2 * static_cast<std::size_t>(max_d) + 1, 0);
  std::vector<std::vector<int>> trace;

  int final_d = -1;
  for (int d = 0; d <= max_d && final_d < 0; ++d) {
    trace.push_back(v);
    for (int k = -d; k <= d; k += 2) {
      int x;
      if (k == -d || (k != d && v[offset + k - 1] < v[offset + k + 1])) {
        x = v[offset + k + 1];
      } else {
        x = v[offset + k - 1] + 1;
      }
      int y = x - k;
      while (x < n && y < m && a[x] == b[y]) {
        ++x;
        ++y;
      }
      v[offset + k] = x;
      if (x >= n && y >= m) {
        final_d = d;
        break;
      }
    }
  }
  if (final_d < 0) return {};

  // Backtrack from (n, m).
  std::vector<Edit> edits;
  int x = n;
  int y = m;
  for (int d = final_d; d > 0; --d) {
    const auto& pv = trace[d];
    const int k = x - y;
    int prev_k;
    if (k == -d || (k != d && pv[offset + k - 1] < pv[offset + k + 1])) {
      prev_k = k + 1;
    } else {
      prev_k = k - 1;
    }
    const int prev_x = pv[offset + prev_k];
    const int prev_y = prev_x - prev_k;
    while (x > prev_x && y > prev_y) {
      edits.push_back({' ', a[--x]});
      --y;
    }
    if (x == prev_x) {
      edits.push_back({'+', b[--y]});
    } else {
      edits.push_back({'-', a[--x]});
    }
  }
  while (x > 0 && y > 0) {
    edits.push_back({' ', a[--x]});
    --y;
  }
  std::reverse(edits.begin(), edits.end());
  return edits;
}

}  // namespace

std::string unified_diff(const std::string& before, const std::string& after,
                         const std::string& label_before, const std::string& label_after) {
  if (before == after) return "";

  const auto a = split_lines(before);
  const auto b = split_lines(after);

  auto edits = diff_lines(a, b);
  if (edits.empty() && !(a.empty() && b.empty())) {
    // diff gave up; emit a full replacement
    edits.reserve(a.size() + b.size());
    for (const auto& line : a) edits.push_back({'-', line});
    for (const auto& line : b) edits.push_back({'+', line});
  }

  constexpr std::size_t kContext = 3;
  std::string out = "--- " + label_before + "\n+++ " + label_after + "\n";

  std::size_t i = 0;
  std::size_t a_line = 1;
  std::size_t b_line = 1;
  while (i < edits.size()) {
    if (edits[i].tag == ' ') {
      ++a_line;
      ++b_line;
      ++i;
      continue;
    }
    // found a change; open a hunk including up to kContext lines before it
    std::size_t hunk_begin = i;
    std::size_t lead = 0;
    while (hunk_begin > 0 && lead < kContext && edits[hunk_begin - 1].tag == ' ') {
      --hunk_begin;
      ++lead;
    }
    std::size_t hunk_a = a_line - lead;
    std::size_t hunk_b = b_line - lead;

    // extend until kContext*2 consecutive keeps (then cut back to kContext)
    std::size_t j = i;
    std::size_t keeps = 0;
    std::size_t hunk_end = i;
    while (j < edits.size()) {
      if (edits[j].tag == ' ') {
        ++keeps;
        if (keeps > kContext * 2) break;
      } else {
        keeps = 0;
        hunk_end = j;
      }
      ++j;
    }
    std::size_t end = std::min(edits.size(), hunk_end + 1 + kContext);

    std::size_t count_a = 0;
    std::size_t count_b = 0;
    std::string body;
    for (std::size_t e = hunk_begin; e < end; ++e) {
      body += edits[e].tag;
      body += edits[e].line;
      body += '\n';
      if (edits[e].tag != '+') ++count_a;
      if (edits[e].tag != '-') ++count_b;
    }
    out += "@@ -" + std::to_string(hunk_a) + "," + std::to_string(count_a) + " +" +
           std::to_string(hunk_b) + "," + std::to_string(count_b) + " @@\n";
    out += body;

    // advance line counters over the emitted region
    for (std::size_t e = i; e < end; ++e) {
      if (edits[e].tag != '+') ++a_line;
      if (edits[e].tag != '-') ++b_line;
    }
    i = end;
  }
  return out;
}

}  // namespace weir
