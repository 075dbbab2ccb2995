// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. All thresholds are fixed here.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "hip/aggregation.hpp"
#include "hip/runner.hpp"
#include "support/oracles.hpp"
#include "support/random_scenarios.hpp"

using namespace hip;
using namespace hip::scenario;
using hip::testing::for_each_array;

namespace {

struct Criterion {
  int id;
  std::string name;
  std::function<std::string()> body;  // empty string on success, else the failure detail
};

std::string fail(const std::string& what) { return what.empty() ? "failed" : what; }

// 1
std::string validation_oracle_equivalence() {
  const auto start = std::chrono::steady_clock::now();
  std::uint64_t checked = 0;
  for (std::uint64_t code = 0; code < kNumHipTypes; ++code) {
    const auto t = *hip_type_from_ordinal(code);
    for (std::uint64_t n = 2; n <= 5; ++n) {
      for (std::uint64_t k = 2; k <= 4; ++k) {
        const HipSpec spec{t, n, k};
        const std::uint64_t max_value = t == HipType::Ranking ? n : k + 1;
        for (std::size_t len = 0; len <= n + 1; ++len) {
          std::string err;
          for_each_array(len, max_value, [&](const std::vector<std::uint64_t>& a) {
            ++checked;
            const bool got = validate_response(spec, a) == ResponseValidity::Ok;
            if (got != hip::testing::oracle_valid(t, n, k, a) && err.empty()) {
              err = std::string(to_string(t)) + " n=" + std::to_string(n) +
                    " k=" + std::to_string(k) + " disagrees with oracle";
            }
          });
          if (!err.empty()) return err;
        }
      }
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs >= 10.0) return "took " + std::to_string(secs) + " s (limit 10 s)";
  std::printf("    %llu arrays checked in %.3f s\n", static_cast<unsigned long long>(checked), secs);
  return {};
}

// 2
std::string ranking_cardinality() {
  const std::map<std::uint64_t, std::pair<std::size_t, std::size_t>> expected{{3, {6, 27}},
                                                                              {4, {24, 256}}};
  for (const auto& [n, want] : expected) {
    std::size_t total = 0, ok = 0;
    for_each_array(n, n - 1, [&](const std::vector<std::uint64_t>& a) {
      ++total;
      ok += validate_response(HipSpec{HipType::Ranking, n, 0}, a) == ResponseValidity::Ok;
    });
    if (total != want.second || ok != want.first) {
      return "n=" + std::to_string(n) + ": " + std::to_string(ok) + " of " +
             std::to_string(total) + " accepted";
    }
  }
  return {};
}

// Replays one generated scenario step by step and checks settlement
// properties along the way.
struct SettlementAudit {
  std::string error;
  std::size_t hips_with_responses = 0;
  std::size_t claims_checked = 0;
};

SettlementAudit audit_scenario(std::uint64_t seed) {
  SettlementAudit audit;
  auto err = [&](const std::string& msg) {
    if (audit.error.empty()) audit.error = "seed " + std::to_string(seed) + ": " + msg;
  };
  const auto g = hip::testing::generate_scenario(seed);
  const auto transcript = parse_scenario(g.text);
  Replayer replayer;

  std::optional<std::uint64_t> pending_balance_query;  // sender's last QUERY balance
  std::map<std::string, bool> expect_zero_next;
  for (const auto& ins : transcript) {
    const Chain& before = replayer.chain();
    std::optional<Amount> predicted;
    const auto* rp = std::get_if<RequestPayment>(&ins.op);
    if (rp && before.contract) predicted = before.contract->get_balance(before.world, rp->sender);

    const auto out = replayer.apply(ins);
    const Chain& chain = replayer.chain();
    if (chain.world.sum_of_balances() != chain.world.total_supply()) {
      err("ledger total diverged from supply at line " + std::to_string(ins.line));
    }
    if (chain.contract && chain.world.balance(chain.contract->address()) !=
                              chain.contract->state().held_funds) {
      err("held funds diverged from contract balance at line " + std::to_string(ins.line));
    }

    if (const auto* q = std::get_if<Query>(&ins.op); q && q->kind == QueryKind::Balance) {
      pending_balance_query = out.result["balance"].get<std::uint64_t>();
    }
    if (rp) {
      if (!out.ok) {
        err("payment request rejected: " + out.error);
        continue;
      }
      const Amount paid = out.result["amount"];
      ++audit.claims_checked;
      if (predicted && *predicted != paid) err("get_balance did not predict request_payment");
      if (pending_balance_query) {
        if (*pending_balance_query != paid) err("queried balance differs from payment");
        pending_balance_query.reset();
        expect_zero_next[rp->sender.str()] = true;
      } else if (expect_zero_next[rp->sender.str()]) {
        if (paid != 0) err("second immediate request paid " + std::to_string(paid));
        expect_zero_next[rp->sender.str()] = false;
      }
    }
  }

  // Per-HIP accounting from the payment events.
  const Chain& chain = replayer.chain();
  const auto& state = chain.contract->state();
  std::map<HipKey, std::vector<Amount>> payouts;
  for (const auto& e : chain.world.events()) {
    if (e.kind != EventKind::PaymentSent) continue;
    for (const auto& s : e.payload["settled"]) {
      payouts[{Address{s["proposer"].get<std::string>()}, s["hip_id"].get<std::uint64_t>()}]
          .push_back(s["amount"].get<Amount>());
    }
  }
  Amount expected_held = 0;
  for (const auto& [proposer, list] : state.hips) {
    for (std::uint64_t i = 0; i < list.size(); ++i) {
      const auto& h = list[i];
      const Amount fee = state.fees->fee(h.hip_type);
      const auto& paid = payouts[{proposer, i}];
      if (h.num_responses == 0) {
        if (!paid.empty()) err("payout from a HIP without responses");
        expected_held += fee;
        continue;
      }
      ++audit.hips_with_responses;
      if (paid.size() != h.num_responses) err("not every respondent was paid exactly once");
      const Amount share = fee / h.num_responses;
      for (Amount a : paid) {
        if (a != share) err("unequal split: " + std::to_string(a) + " vs " + std::to_string(share));
      }
      const Amount sum = std::accumulate(paid.begin(), paid.end(), Amount{0});
      if (sum > fee) {
        err("payouts exceed fee");
        continue;
      }
      const Amount dust = fee - sum;
      if (dust >= h.num_responses) err("dust not below response count");
      expected_held += dust;
    }
  }
  if (state.held_funds != expected_held) err("held funds are not the sum of dust and unclaimed fees");
  return audit;
}

constexpr std::uint64_t kGeneratedCases = 1000;

std::vector<SettlementAudit>& audits() {
  static std::vector<SettlementAudit> cache = [] {
    std::vector<SettlementAudit> out;
    for (std::uint64_t seed = 0; seed < kGeneratedCases; ++seed) out.push_back(audit_scenario(seed));
    return out;
  }();
  return cache;
}

std::string first_audit_error() {
  for (const auto& a : audits()) {
    if (!a.error.empty()) return a.error;
  }
  return {};
}

// 3, 4, 8 share the generated corpus; each criterion reports on it.
std::string fee_conservation() {
  std::size_t hips = 0;
  for (const auto& a : audits()) hips += a.hips_with_responses;
  std::printf("    %llu scenarios, %zu HIPs with responses\n",
              static_cast<unsigned long long>(kGeneratedCases), hips);
  return first_audit_error();
}

std::string equal_split() { return first_audit_error(); }

std::string settlement_idempotence() {
  std::size_t claims = 0;
  for (const auto& a : audits()) claims += a.claims_checked;
  std::printf("    %zu payment requests checked\n", claims);
  return first_audit_error();
}

// 5
std::string guard_suite() {
  const std::string setup =
      "FUND addr=p amount=1000\n"
      "INIT sender=o fees=10,20,30,40\n"
      "MINT_TOKEN addr=a count=1\n";
  const std::string open_hip = setup + "SUBMIT_HIP sender=p type=CHOICE n=3 duration=100 payment=10\n";
  const std::vector<std::pair<std::string, std::string>> cases{
      {"User did not pay the right fee for this HIP type.",
       setup + "SUBMIT_HIP sender=p type=CHOICE n=3 duration=100 payment=11\n"},
      {"User does not hold the right NFT.",
       open_hip + "SUBMIT_RESPONSE sender=b proposer=p hip_id=0 values=1\n"},
      {"User has already responded.",
       open_hip + "SUBMIT_RESPONSE sender=a proposer=p hip_id=0 values=1\n"
                  "SUBMIT_RESPONSE sender=a proposer=p hip_id=0 values=2\n"},
      {"This HIP is no longer open for responses.",
       open_hip + "ADVANCE seconds=101\nSUBMIT_RESPONSE sender=a proposer=p hip_id=0 values=1\n"},
      {"Trivial or invalid HIP",
       setup + "SUBMIT_HIP sender=p type=CLASSIFICATION n=4 k=1 duration=100 payment=40\n"},
      {"Invalid response", open_hip + "SUBMIT_RESPONSE sender=a proposer=p hip_id=0 values=0,1\n"},
      {"Failed to send Ether",
       open_hip + "SUBMIT_RESPONSE sender=a proposer=p hip_id=0 values=1\n"
                  "ADVANCE seconds=101\nSET_PAYABLE addr=a payable=false\n"
                  "REQUEST_PAYMENT sender=a\n"},
  };
  for (const auto& [expected, text] : cases) {
    const auto report = run(parse_scenario(text), {true});
    const auto& outs = report.outcomes;
    for (std::size_t i = 0; i + 1 < outs.size(); ++i) {
      if (!outs[i].ok) return "setup line rejected in '" + expected + "' case: " + outs[i].error;
    }
    const auto& last = outs.back();
    if (last.ok) return "expected rejection '" + expected + "' but instruction succeeded";
    if (last.error != expected) return "expected '" + expected + "', got '" + last.error + "'";
    if (*last.state_hash != *outs[outs.size() - 2].state_hash) {
      return "rejection '" + expected + "' changed the state hash";
    }
  }
  return {};
}

// 6
std::string deadline_boundary() {
  const auto report = run(parse_scenario(
      "FUND addr=p amount=1000\n"
      "INIT sender=o fees=10,20,30,40\n"
      "MINT_TOKEN addr=a count=1\n"
      "MINT_TOKEN addr=b count=1\n"
      "ADVANCE seconds=1000\n"
      "SUBMIT_HIP sender=p type=CHOICE n=2 duration=3600 payment=10\n"
      "ADVANCE seconds=3600\n"
      "SUBMIT_RESPONSE sender=a proposer=p hip_id=0 values=1\n"
      "QUERY kind=balance sender=a\n"
      "ADVANCE seconds=1\n"
      "SUBMIT_RESPONSE sender=b proposer=p hip_id=0 values=0\n"
      "QUERY kind=balance sender=a\n"));
  const auto& o = report.outcomes;
  if (!o[7].ok) return "response exactly at the deadline rejected: " + o[7].error;
  if (o[8].result["balance"] != 0u) return "balance nonzero at the deadline";
  if (o[10].ok || o[10].error != "This HIP is no longer open for responses.") {
    return "response one second after the deadline accepted";
  }
  if (!(o[11].result["balance"].get<std::uint64_t>() > 0)) return "balance zero after the deadline";
  return {};
}

// 7
std::string replay_determinism() {
  const auto golden = load_scenario(std::string(HIP_SOURCE_DIR) +
                                    "/scenarios/classification_walkthrough.hip");
  if (run(golden).state_hash != run(golden).state_hash) return "walkthrough hash differs";
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto t = parse_scenario(hip::testing::generate_scenario(10'000 + seed).text);
    if (run(t).state_hash != run(t).state_hash) return "seed " + std::to_string(seed) + " differs";
  }
  return {};
}

// 9
std::string aggregation_properties() {
  using namespace hip::aggregate;
  std::mt19937_64 rng(2024);
  auto uniform = [&](std::uint64_t lo, std::uint64_t hi) {
    return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
  };
  using Responses = std::vector<ResponseVector>;
  auto shuffled = [&](Responses rs) {
    std::shuffle(rs.begin(), rs.end(), rng);
    return rs;
  };
  auto doubled = [](const Responses& rs) {
    Responses out = rs;
    out.insert(out.end(), rs.begin(), rs.end());
    return out;
  };
  auto scaled = [](const Counts& c) {
    Counts out = c;
    for (auto& x : out) x *= 2;
    return out;
  };
  constexpr int kSets = 500;

  for (int trial = 0; trial < kSets; ++trial) {
    const auto n = uniform(2, 7);
    const auto k = uniform(2, 5);
    const auto m = uniform(1, 15);

    Responses choices(m), rankings(m), sortings(m), classes(m);
    for (std::uint64_t j = 0; j < m; ++j) {
      choices[j] = {uniform(0, n - 1)};
      rankings[j].resize(n);
      std::iota(rankings[j].begin(), rankings[j].end(), 0);
      std::shuffle(rankings[j].begin(), rankings[j].end(), rng);
      for (std::uint64_t i = 0; i < n; ++i) {
        sortings[j].push_back(uniform(0, k - 1));
        classes[j].push_back(uniform(0, k - 1));
      }
    }

    const auto p = plurality(choices, n);
    if (plurality(shuffled(choices), n) != p) return "plurality not permutation invariant";
    const auto p2 = plurality(doubled(choices), n);
    if (p2.winners != p.winners || p2.counts != scaled(p.counts)) return "plurality duplication";
    if (std::accumulate(p.counts.begin(), p.counts.end(), std::uint64_t{0}) != m) {
      return "plurality counts do not sum to responses";
    }

    const auto b = aggregate_ranking(rankings, n);
    if (aggregate_ranking(shuffled(rankings), n) != b) return "borda not permutation invariant";
    const auto b2 = aggregate_ranking(doubled(rankings), n);
    if (b2.order != b.order || b2.scores != scaled(b.scores)) return "borda duplication";
    if (std::accumulate(b.scores.begin(), b.scores.end(), std::uint64_t{0}) != m * n * (n - 1) / 2) {
      return "borda total mismatch";
    }

    const auto s = aggregate_scores(sortings, n, k);
    if (aggregate_scores(shuffled(sortings), n, k) != s) return "scores not permutation invariant";
    if (aggregate_scores(doubled(sortings), n, k) != s) return "scores duplication";

    const auto c = majority_classify(classes, n, k);
    if (majority_classify(shuffled(classes), n, k) != c) return "majority not permutation invariant";
    const auto c2 = majority_classify(doubled(classes), n, k);
    if (c2.majority != c.majority || c2.leaders != c.leaders) return "majority duplication";
    for (std::uint64_t i = 0; i < n; ++i) {
      if (c2.counts[i] != scaled(c.counts[i])) return "majority counts not doubled";
      if (std::accumulate(c.counts[i].begin(), c.counts[i].end(), std::uint64_t{0}) != m) {
        return "classification counts do not sum to responses";
      }
    }

    // Single response reproduces its own structure.
    const auto one_p = plurality(Responses{choices[0]}, n);
    if (one_p.winners != IndexSet{choices[0][0]}) return "single choice not reproduced";
    const auto one_b = aggregate_ranking(Responses{rankings[0]}, n);
    for (std::uint64_t i = 0; i < n; ++i) {
      const auto rank = rankings[0][i];
      if (one_b.order.size() != n || one_b.order[rank] != IndexSet{i}) {
        return "single ranking not reproduced";
      }
    }
    const auto one_s = aggregate_scores(Responses{sortings[0]}, n, k);
    const auto one_c = majority_classify(Responses{classes[0]}, n, k);
    for (std::uint64_t i = 0; i < n; ++i) {
      if (one_s.means[i] != Rational{sortings[0][i], 1} || one_s.medians[i] != sortings[0][i]) {
        return "single sorting not reproduced";
      }
      if (one_c.majority[i] != classes[0][i]) return "single classification not reproduced";
    }
  }
  return {};
}

// 10
std::string work_linearity() {
  auto work_at = [](std::uint64_t n) {
    ResponseVector r(n);
    std::iota(r.rbegin(), r.rend(), 0);
    WorkCounter w;
    if (!unique_digits(r, n, &w)) return std::uint64_t{0};
    return w.units;
  };
  const auto w100 = work_at(100);
  const auto w1000 = work_at(1000);
  if (w100 == 0) return "permutation rejected";
  const double ratio = static_cast<double>(w1000) / static_cast<double>(w100);
  std::printf("    work(100)=%llu work(1000)=%llu ratio=%.3f\n",
              static_cast<unsigned long long>(w100), static_cast<unsigned long long>(w1000),
              ratio);
  if (ratio < 9.0 || ratio > 11.0) return "ratio " + std::to_string(ratio) + " outside [9, 11]";
  return {};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "validation agrees with brute-force oracle", validation_oracle_equivalence},
      {2, "ranking cardinality equals n!", ranking_cardinality},
      {3, "fee conservation over generated scenarios", fee_conservation},
      {4, "equal split of each fee", equal_split},
      {5, "guard suite: revert strings and unchanged hashes", guard_suite},
      {6, "deadline boundary", deadline_boundary},
      {7, "replay determinism", replay_determinism},
      {8, "settlement idempotence", settlement_idempotence},
      {9, "aggregation properties", aggregation_properties},
      {10, "unique_digits work is linear", work_linearity},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    std::string detail;
    try {
      detail = c.body();
    } catch (const std::exception& e) {
      detail = fail(std::string("exception: ") + e.what());
    }
    const bool pass = detail.empty();
    failures += pass ? 0 : 1;
    std::printf("[%s] %2d. %s%s%s\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                pass ? "" : " -- ", detail.c_str());
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
