#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace capfix {

/// S, D, I and match counts of a reference/hypothesis alignment.
/// ref_len is the N of the word error rate.
struct AlignmentCounts {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t matches = 0;
  std::size_t ref_len = 0;

  std::size_t errors() const noexcept { return substitutions + deletions + insertions; }
  std::size_t hyp_len() const noexcept { return matches + substitutions + insertions; }

  AlignmentCounts& operator+=(const AlignmentCounts& o) noexcept {
    substitutions += o.substitutions;
    deletions += o.deletions;
    insertions += o.insertions;
    matches += o.matches;
    ref_len += o.ref_len;
    return *this;
  }

  friend bool operator==(const AlignmentCounts&, const AlignmentCounts&) = default;
};

enum class EditOp : std::uint8_t { Match, Substitute, Delete, Insert };

inline constexpr std::size_t kNoIndex = std::numeric_limits<std::size_t>::max();

/// One step of an alignment. `ref` is kNoIndex for Insert, `hyp` is
/// kNoIndex for Delete.
struct AlignStep {
  EditOp op;
  std::size_t ref;
  std::size_t hyp;

  friend bool operator==(const AlignStep&, const AlignStep&) = default;
};

using AlignmentPath = std::vector<AlignStep>;

struct Alignment {
  AlignmentCounts counts;
  AlignmentPath path;
};

/// Minimum edit distance alignment with unit costs. When several optimal
/// paths exist the backtrace prefers the diagonal (match/substitute), then
/// deletion, then insertion, so the path is deterministic.
template <class T>
Alignment align(std::span<const T> ref, std::span<const T> hyp) {
  const std::size_t n = ref.size();
  const std::size_t m = hyp.size();
  const std::size_t width = m + 1;
  std::vector<std::uint32_t> cost((n + 1) * width);
  const auto at = [&](std::size_t i, std::size_t j) -> std::uint32_t& { return cost[i * width + j]; };

  for (std::size_t j = 0; j <= m; ++j) at(0, j) = static_cast<std::uint32_t>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    at(i, 0) = static_cast<std::uint32_t>(i);
    for (std::size_t j = 1; j <= m; ++j) {
      const std::uint32_t diag = at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0u : 1u);
      at(i, j) = std::min({diag, at(i - 1, j) + 1u, at(i, j - 1) + 1u});
    }
  }

  Alignment out;
  out.counts.ref_len = n;
  out.path.reserve(std::max(n, m));
  std::size_t i = n;
  std::size_t j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const bool same = ref[i - 1] == hyp[j - 1];
      if (at(i, j) == at(i - 1, j - 1) + (same ? 0u : 1u)) {
        --i;
        --j;
        if (same) {
          out.path.push_back({EditOp::Match, i, j});
          ++out.counts.matches;
        } else {
          out.path.push_back({EditOp::Substitute, i, j});
          ++out.counts.substitutions;
        }
        continue;
      }
    }
    if (i > 0 && (j == 0 || at(i, j) == at(i - 1, j) + 1)) {
      --i;
      out.path.push_back({EditOp::Delete, i, kNoIndex});
      ++out.counts.deletions;
    } else {
      --j;
      out.path.push_back({EditOp::Insert, kNoIndex, j});
      ++out.counts.insertions;
    }
  }
  std::reverse(out.path.begin(), out.path.end());
  return out;
}

template <class T>
Alignment align(const std::vector<T>& ref, const std::vector<T>& hyp) {
  return align(std::span<const T>(ref), std::span<const T>(hyp));
}

/// Length of the longest common subsequence, O(n*m) time, O(m) space.
template <class T>
std::size_t lcs_length(std::span<const T> a, std::span<const T> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace capfix
