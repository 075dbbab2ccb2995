#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hip/core_model.hpp"

namespace hip {

using ResponseVector = std::vector<std::uint64_t>;

// Stand-in for gas: counts array elements touched, so asymptotic claims about
// the validators can be measured.
struct WorkCounter {
  std::uint64_t units = 0;
  void add(std::uint64_t n = 1) { units += n; }
};

inline bool right_digits(std::span<const std::uint64_t> response, std::uint64_t bound,
                         WorkCounter* work = nullptr) {
  for (std::uint64_t r : response) {
    if (work) work->add();
    if (r >= bound) return false;
  }
  return true;
}

/// True iff every element is below `bound` and no element repeats. Single pass
/// with a visited-flag array of size `bound`.
inline bool unique_digits(std::span<const std::uint64_t> response, std::uint64_t bound,
                          WorkCounter* work = nullptr) {
  // Pigeonhole: more elements than admissible digits must repeat.
  if (response.size() > bound) {
    if (work) work->add();
    return false;
  }
  std::vector<bool> visited(static_cast<std::size_t>(bound), false);
  if (work) work->add(bound);
  for (std::uint64_t r : response) {
    if (work) work->add();
    if (r >= bound || visited[static_cast<std::size_t>(r)]) return false;
    visited[static_cast<std::size_t>(r)] = true;
  }
  return true;
}

enum class ResponseValidity { Ok, Invalid };

inline ResponseValidity validate_response(const HipSpec& spec,
                                          std::span<const std::uint64_t> response,
                                          WorkCounter* work = nullptr) {
  const auto n = spec.num_alternatives;
  bool ok = false;
  switch (spec.hip_type) {
    case HipType::Choice:
      if (work) work->add();
      ok = response.size() == 1 && response[0] < n;
      break;
    case HipType::Ranking:
      ok = response.size() == n && unique_digits(response, n, work);
      break;
    case HipType::Sorting:
    case HipType::Classification:
      ok = response.size() == n && right_digits(response, spec.num_classes, work);
      break;
  }
  return ok ? ResponseValidity::Ok : ResponseValidity::Invalid;
}

}  // namespace hip
