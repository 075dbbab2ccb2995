#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hip/aggregation.hpp"
#include "hip/contract.hpp"
#include "hip/ledger.hpp"
#include "hip/scenario.hpp"
#include "hip/state_hash.hpp"

namespace hip::scenario {

struct RunOptions {
  bool per_instruction_hash = false;
};

struct InstructionOutcome {
  std::size_t line = 0;
  std::string kind;
  bool ok = false;
  std::string error;
  nlohmann::ordered_json result;
  std::uint64_t work_units = 0;
  std::optional<std::string> state_hash;
};

struct Report {
  std::vector<InstructionOutcome> outcomes;
  std::vector<Event> events;
  nlohmann::json final_state;
  std::string state_hash;
  std::vector<nlohmann::ordered_json> aggregations;
  std::uint64_t total_work_units = 0;

  std::size_t rejected_count() const {
    std::size_t n = 0;
    for (const auto& o : outcomes) n += o.ok ? 0 : 1;
    return n;
  }
};

/// A deployed-or-not contract plus the world it runs in. The contract is
/// deployed by the first INIT, whose sender becomes the owner.
struct Chain {
  WorldState world;
  std::optional<HipContract> contract;

  nlohmann::json export_state() const {
    return nlohmann::json{{"world", world.export_state()},
                          {"contract", contract ? contract->export_state() : nlohmann::json()}};
  }
  std::string state_hash() const { return sha256_hex(export_state().dump()); }
};

inline nlohmann::ordered_json to_json(const aggregate::Tally& t) {
  return {{"method", t.method}, {"counts", t.counts}, {"winners", t.winners}};
}

inline nlohmann::ordered_json to_json(const aggregate::RankingResult& r) {
  return {{"method", "borda"}, {"scores", r.scores}, {"order", r.order}};
}

inline nlohmann::ordered_json to_json(const aggregate::ScoreResult& s) {
  nlohmann::ordered_json means = nlohmann::ordered_json::array();
  nlohmann::ordered_json medians = nlohmann::ordered_json::array();
  for (const auto& m : s.means) means.push_back(m ? nlohmann::ordered_json(m->str()) : nlohmann::ordered_json());
  for (const auto& m : s.medians) medians.push_back(m ? nlohmann::ordered_json(*m) : nlohmann::ordered_json());
  return {{"method", "scores"}, {"means", means}, {"medians", medians}};
}

inline nlohmann::ordered_json to_json(const aggregate::MajorityResult& m) {
  nlohmann::ordered_json majority = nlohmann::ordered_json::array();
  nlohmann::ordered_json ties = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < m.majority.size(); ++i) {
    majority.push_back(m.majority[i] ? nlohmann::ordered_json(*m.majority[i]) : nlohmann::ordered_json());
    if (m.tied(i)) ties.push_back({{"alternative", i}, {"classes", m.leaders[i]}});
  }
  return {{"method", "majority"}, {"counts", m.counts}, {"majority", majority}, {"ties", ties}};
}

namespace detail {

struct Step {
  bool ok = true;
  std::string error;
  nlohmann::ordered_json result;
  std::uint64_t work = 0;
};

template <typename T>
Step from_tx(const TxResult<T>& tx, const char* field) {
  Step s;
  s.work = tx.work_units();
  if (!tx) {
    s.ok = false;
    s.error = std::string(reason(tx.error()));
  } else if constexpr (!std::is_same_v<T, Unit>) {
    s.result = {{field, tx.value()}};
  }
  return s;
}

class Executor {
 public:
  explicit Executor(Chain& chain) : chain_(chain) {}

  Step operator()(const Init& op) {
    if (!chain_.contract) chain_.contract.emplace(op.sender);
    return from_tx(chain_.contract->initialize(chain_.world, op.sender, op.token_contract, op.fees),
                   "");
  }
  Step operator()(const MintToken& op) {
    chain_.world.mint_token(op.addr, op.count);
    return {true, {}, {{"tokens", chain_.world.token_balance(op.addr)}}, 0};
  }
  Step operator()(const Fund& op) {
    chain_.world.mint_currency(op.addr, op.amount);
    return {true, {}, {{"balance", chain_.world.balance(op.addr)}}, 0};
  }
  Step operator()(const Advance& op) {
    return {true, {}, {{"now", chain_.world.advance_time(op.seconds)}}, 0};
  }
  Step operator()(const SetPayable& op) {
    chain_.world.set_payable(op.addr, op.payable);
    return {};
  }
  Step operator()(const SubmitHip& op) {
    if (!chain_.contract) return not_deployed();
    return from_tx(chain_.contract->submit_hip(chain_.world, op.sender, op.hip_type, op.n, op.k,
                                               op.duration, op.payment, op.semantic_ref),
                   "hip_id");
  }
  Step operator()(const SubmitResponse& op) {
    if (!chain_.contract) return not_deployed();
    return from_tx(chain_.contract->submit_response(chain_.world, op.sender, op.proposer,
                                                    op.hip_id, op.values),
                   "response_number");
  }
  Step operator()(const RequestPayment& op) {
    if (!chain_.contract) return not_deployed();
    return from_tx(chain_.contract->request_payment(chain_.world, op.sender), "amount");
  }
  Step operator()(const Query& q) {
    if (!chain_.contract) return not_deployed();
    const auto& c = *chain_.contract;
    Step s;
    switch (q.kind) {
      case QueryKind::Balance:
        s.result = {{"balance", c.get_balance(chain_.world, *q.sender)}};
        break;
      case QueryKind::NumProposers:
        s.result = {{"num_proposers", c.get_num_proposers()}};
        break;
      case QueryKind::Fee:
        s.result = {{"fee", c.get_fee(*q.index)}};
        break;
      case QueryKind::Proposer:
        s.result = {{"proposer", c.get_proposer(*q.index).str()}};
        break;
      case QueryKind::HipCount:
        s.result = {{"hip_count", c.get_hip_count(*q.proposer)}};
        break;
      case QueryKind::Response:
        s.result = {{"response", c.get_response(*q.proposer, *q.hip_id, *q.index)}};
        break;
      case QueryKind::Hip: {
        const auto& h = c.get_hip(*q.proposer, *q.hip_id);
        s.result = {{"type", std::string(hip::to_string(h.hip_type))},
                    {"num_alternatives", h.num_alternatives},
                    {"num_classes", h.num_classes},
                    {"creation_date", h.creation_date},
                    {"duration", h.duration},
                    {"num_responses", h.num_responses}};
        break;
      }
    }
    return s;
  }
  Step operator()(const Aggregate& a) {
    if (!chain_.contract) return not_deployed();
    const auto& c = *chain_.contract;
    const HipSpec& spec = c.get_hip(a.proposer, a.hip_id);
    // Collect-then-aggregate, reading each response back by index.
    std::vector<ResponseVector> collected;
    for (std::uint64_t i = 0; i < spec.num_responses; ++i) {
      collected.push_back(c.get_response(a.proposer, a.hip_id, i));
    }
    nlohmann::ordered_json body;
    switch (a.method) {
      case AggregateMethod::Plurality:
        body = to_json(aggregate::plurality(collected, spec.num_alternatives));
        break;
      case AggregateMethod::Borda:
        body = to_json(aggregate::aggregate_ranking(collected, spec.num_alternatives));
        break;
      case AggregateMethod::Scores:
        body = to_json(aggregate::aggregate_scores(collected, spec.num_alternatives,
                                                   spec.num_classes));
        break;
      case AggregateMethod::Majority:
        body = to_json(aggregate::majority_classify(collected, spec.num_alternatives,
                                                    spec.num_classes));
        break;
    }
    nlohmann::ordered_json result{{"proposer", a.proposer.str()},
                                  {"hip_id", a.hip_id},
                                  {"responses", collected.size()}};
    for (auto& [key, value] : body.items()) result[key] = value;
    return {true, {}, std::move(result), 0};
  }

 private:
  static Step not_deployed() { return {false, std::string(reason(Rejection::NotInitialized)), {}, 0}; }

  Chain& chain_;
};

}  // namespace detail

/// Applies instructions one at a time to a fresh chain. A rejected
/// instruction is rolled back completely and logged as TX_REJECTED.
class Replayer {
 public:
  explicit Replayer(RunOptions options = {}) : options_(options) {}

  InstructionOutcome apply(const Instruction& ins) {
    InstructionOutcome out;
    out.line = ins.line;
    out.kind = std::string(kind_name(ins.op));

    Chain before = chain_;
    detail::Step step;
    try {
      step = std::visit(detail::Executor{chain_}, ins.op);
    } catch (const std::exception& e) {
      step = {false, e.what(), {}, 0};
    }
    if (!step.ok) {
      chain_ = std::move(before);
      chain_.world.emit_event(EventKind::TxRejected, {{"line", ins.line},
                                                      {"instruction", out.kind},
                                                      {"reason", step.error}});
    }
    out.ok = step.ok;
    out.error = std::move(step.error);
    out.result = std::move(step.result);
    out.work_units = step.work;
    if (options_.per_instruction_hash) out.state_hash = chain_.state_hash();
    return out;
  }

  const Chain& chain() const { return chain_; }

 private:
  RunOptions options_;
  Chain chain_;
};

/// Replays a transcript against a fresh chain. Rejections are recorded and
/// the run continues.
inline Report run(const Transcript& transcript, const RunOptions& options = {}) {
  Replayer replayer(options);
  Report report;
  for (const auto& ins : transcript) {
    auto out = replayer.apply(ins);
    report.total_work_units += out.work_units;
    if (out.ok && std::holds_alternative<Aggregate>(ins.op)) report.aggregations.push_back(out.result);
    report.outcomes.push_back(std::move(out));
  }
  const Chain& chain = replayer.chain();
  report.events = chain.world.events();
  report.final_state = chain.export_state();
  report.state_hash = chain.state_hash();
  return report;
}

/// Report as JSON with a fixed field order.
inline nlohmann::ordered_json report_to_json(const Report& r) {
  using nlohmann::ordered_json;
  ordered_json outcomes = ordered_json::array();
  for (const auto& o : r.outcomes) {
    ordered_json j{{"line", o.line}, {"kind", o.kind}, {"status", o.ok ? "ok" : "rejected"}};
    if (!o.ok) j["error"] = o.error;
    if (!o.result.is_null()) j["result"] = o.result;
    j["work_units"] = o.work_units;
    if (o.state_hash) j["state_hash"] = *o.state_hash;
    outcomes.push_back(std::move(j));
  }
  ordered_json events = ordered_json::array();
  for (const auto& e : r.events) {
    events.push_back(ordered_json{{"seq", e.sequence},
                                  {"time", e.time},
                                  {"kind", std::string(to_string(e.kind))},
                                  {"payload", ordered_json::parse(e.payload.dump())}});
  }
  return ordered_json{{"instructions", r.outcomes.size()},
                      {"rejected", r.rejected_count()},
                      {"outcomes", outcomes},
                      {"events", events},
                      {"aggregations", r.aggregations},
                      {"total_work_units", r.total_work_units},
                      {"final_state", ordered_json::parse(r.final_state.dump())},
                      {"state_hash", r.state_hash}};
}

inline std::string format_report(const Report& r) { return report_to_json(r).dump(2) + "\n"; }

}  // namespace hip::scenario
