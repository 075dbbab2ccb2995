#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hip {

using Amount = std::uint64_t;
using Seconds = std::uint64_t;

// Ordinals are stable: they index the fee schedule.
enum class HipType : std::uint8_t {
  Choice = 0,
  Ranking = 1,
  Sorting = 2,
  Classification = 3,
};

inline constexpr std::size_t kNumHipTypes = 4;

constexpr std::size_t ordinal(HipType t) { return static_cast<std::size_t>(t); }

constexpr std::string_view to_string(HipType t) {
  switch (t) {
    case HipType::Choice: return "CHOICE";
    case HipType::Ranking: return "RANKING";
    case HipType::Sorting: return "SORTING";
    case HipType::Classification: return "CLASSIFICATION";
  }
  return "UNKNOWN";
}

inline std::optional<HipType> parse_hip_type(std::string_view s) {
  if (s == "CHOICE") return HipType::Choice;
  if (s == "RANKING") return HipType::Ranking;
  if (s == "SORTING") return HipType::Sorting;
  if (s == "CLASSIFICATION") return HipType::Classification;
  return std::nullopt;
}

inline std::optional<HipType> hip_type_from_ordinal(std::uint64_t code) {
  if (code >= kNumHipTypes) return std::nullopt;
  return static_cast<HipType>(code);
}

/// Sorting and classification assign alternatives to classes, so they need k.
constexpr bool uses_classes(HipType t) {
  return t == HipType::Sorting || t == HipType::Classification;
}

/// On-chain record of one HIP. creation_date and duration never change once
/// the record is stored; num_responses only grows.
struct HipSpec {
  HipType hip_type = HipType::Choice;
  std::uint64_t num_alternatives = 0;
  std::uint64_t num_classes = 0;
  Seconds creation_date = 0;
  Seconds duration = 0;
  std::uint64_t num_responses = 0;

  /// Responses are accepted while now <= deadline(); payouts unlock after it.
  constexpr Seconds deadline() const { return creation_date + duration; }

  friend bool operator==(const HipSpec&, const HipSpec&) = default;
};

class FeeSchedule {
 public:
  FeeSchedule() = default;
  explicit FeeSchedule(std::array<Amount, kNumHipTypes> fees) : fees_(fees) {}

  Amount fee(HipType t) const { return fees_[ordinal(t)]; }
  Amount at(std::size_t i) const {
    if (i >= kNumHipTypes) throw std::out_of_range("fee index out of range");
    return fees_[i];
  }
  const std::array<Amount, kNumHipTypes>& values() const { return fees_; }

  friend bool operator==(const FeeSchedule&, const FeeSchedule&) = default;

 private:
  std::array<Amount, kNumHipTypes> fees_{};
};

struct SpecLimits {
  std::uint64_t max_alternatives = 10'000;
  std::uint64_t max_classes = 10'000;
};

enum class SpecValidity { Ok, Invalid };

/// A HIP is trivial or malformed unless it offers at least two alternatives
/// and, for sorting and classification, at least two classes. k is not
/// inspected for choice and ranking.
constexpr SpecValidity validate_spec(HipType hip_type, std::uint64_t num_alternatives,
                                     std::uint64_t num_classes, SpecLimits limits = {}) {
  if (num_alternatives < 2 || num_alternatives > limits.max_alternatives) {
    return SpecValidity::Invalid;
  }
  if (uses_classes(hip_type) && (num_classes < 2 || num_classes > limits.max_classes)) {
    return SpecValidity::Invalid;
  }
  return SpecValidity::Ok;
}

}  // namespace hip
