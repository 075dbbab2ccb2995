#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hip/validation.hpp"

// Off-chain aggregation of collected responses. Position i of every response
// vector describes alternative i. Ties are always reported, never broken.
namespace hip::aggregate {

using Counts = std::vector<std::uint64_t>;
using IndexSet = std::vector<std::uint64_t>;

struct Tally {
  std::string method;
  Counts counts;
  IndexSet winners;

  friend bool operator==(const Tally&, const Tally&) = default;
};

namespace detail {

inline IndexSet argmax(std::span<const std::uint64_t> counts, bool require_positive) {
  IndexSet out;
  if (counts.empty()) return out;
  const auto best = *std::max_element(counts.begin(), counts.end());
  if (require_positive && best == 0) return out;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == best) out.push_back(i);
  }
  return out;
}

inline void require_valid(std::span<const ResponseVector> responses, const HipSpec& spec,
                          const char* what) {
  for (const auto& r : responses) {
    if (validate_response(spec, r) != ResponseValidity::Ok) {
      throw std::invalid_argument(std::string("invalid ") + what + " response");
    }
  }
}

}  // namespace detail

/// Plurality over singleton choices: counts[a] is the number of voters who
/// chose a; winners is the argmax set, empty when there are no votes.
inline Tally plurality(std::span<const ResponseVector> choices, std::uint64_t n) {
  detail::require_valid(choices, HipSpec{HipType::Choice, n, 0}, "choice");
  Tally t{"plurality", Counts(n, 0), {}};
  for (const auto& c : choices) ++t.counts[c[0]];
  t.winners = detail::argmax(t.counts, true);
  return t;
}

struct RankingResult {
  Counts scores;
  /// Alternatives grouped by descending score; each group is ex-aequo.
  std::vector<IndexSet> order;

  friend bool operator==(const RankingResult&, const RankingResult&) = default;
};

/// Borda count. R[i] is the rank given to alternative i (0 = most preferred),
/// worth n - 1 - R[i] points.
inline RankingResult aggregate_ranking(std::span<const ResponseVector> rankings, std::uint64_t n) {
  detail::require_valid(rankings, HipSpec{HipType::Ranking, n, 0}, "ranking");
  RankingResult out{Counts(n, 0), {}};
  for (const auto& r : rankings) {
    for (std::size_t i = 0; i < n; ++i) out.scores[i] += n - 1 - r[i];
  }
  if (rankings.empty()) return out;

  IndexSet idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](auto a, auto b) { return out.scores[a] > out.scores[b]; });
  for (auto a : idx) {
    if (out.order.empty() || out.scores[out.order.back().front()] != out.scores[a]) {
      out.order.emplace_back();
    }
    out.order.back().push_back(a);
  }
  return out;
}

/// Exact non-negative rational, always stored in lowest terms.
struct Rational {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  static Rational make(std::uint64_t num, std::uint64_t den) {
    if (den == 0) throw std::domain_error("zero denominator");
    const auto g = std::gcd(num, den);
    return g == 0 ? Rational{0, 1} : Rational{num / g, den / g};
  }

  std::string str() const {
    return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
  }

  friend bool operator==(const Rational&, const Rational&) = default;
};

struct ScoreResult {
  /// Mean class per alternative; nullopt when there are no responses.
  std::vector<std::optional<Rational>> means;
  /// Lower median class per alternative.
  std::vector<std::optional<std::uint64_t>> medians;

  friend bool operator==(const ScoreResult&, const ScoreResult&) = default;
};

/// Score aggregation for sorting responses. Class 0 is the most preferred.
inline ScoreResult aggregate_scores(std::span<const ResponseVector> sortings, std::uint64_t n,
                                    std::uint64_t k) {
  detail::require_valid(sortings, HipSpec{HipType::Sorting, n, k}, "sorting");
  ScoreResult out{std::vector<std::optional<Rational>>(n),
                  std::vector<std::optional<std::uint64_t>>(n)};
  if (sortings.empty()) return out;
  const std::uint64_t m = sortings.size();
  std::vector<std::uint64_t> column(m);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t sum = 0;
    for (std::size_t j = 0; j < m; ++j) {
      column[j] = sortings[j][i];
      sum += column[j];
    }
    out.means[i] = Rational::make(sum, m);
    auto mid = column.begin() + static_cast<std::ptrdiff_t>((m - 1) / 2);
    std::nth_element(column.begin(), mid, column.end());
    out.medians[i] = *mid;
  }
  return out;
}

struct MajorityResult {
  /// counts[i][c]: responses placing alternative i in class c.
  std::vector<Counts> counts;
  /// Classes with the greatest count for each alternative.
  std::vector<IndexSet> leaders;
  /// The single leader, or nullopt when the alternative is tied or unvoted.
  std::vector<std::optional<std::uint64_t>> majority;

  bool tied(std::size_t alternative) const { return leaders[alternative].size() > 1; }

  friend bool operator==(const MajorityResult&, const MajorityResult&) = default;
};

/// Per-alternative majority rule over classification responses.
inline MajorityResult majority_classify(std::span<const ResponseVector> classifications,
                                        std::uint64_t n, std::uint64_t k) {
  detail::require_valid(classifications, HipSpec{HipType::Classification, n, k},
                        "classification");
  MajorityResult out{std::vector<Counts>(n, Counts(k, 0)), std::vector<IndexSet>(n),
                     std::vector<std::optional<std::uint64_t>>(n)};
  for (const auto& r : classifications) {
    for (std::size_t i = 0; i < n; ++i) ++out.counts[i][r[i]];
  }
  for (std::size_t i = 0; i < n; ++i) {
    out.leaders[i] = detail::argmax(out.counts[i], true);
    if (out.leaders[i].size() == 1) out.majority[i] = out.leaders[i].front();
  }
  return out;
}

}  // namespace hip::aggregate
