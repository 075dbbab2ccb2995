#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "hip/core_model.hpp"
#include "hip/ledger.hpp"
#include "hip/validation.hpp"

namespace hip {

enum class Rejection {
  WrongFee,
  NoNft,
  AlreadyResponded,
  Closed,
  InvalidHip,
  InvalidResponse,
  TransferFailed,
  NotOwner,
  BadFeeSchedule,
  NotInitialized,
  InsufficientBalance,
  UnknownHip,
  DeadlineOverflow,
};

/// Revert reasons. The first seven are the on-chain contract's strings and
/// must match byte for byte.
constexpr std::string_view reason(Rejection r) {
  switch (r) {
    case Rejection::WrongFee: return "User did not pay the right fee for this HIP type.";
    case Rejection::NoNft: return "User does not hold the right NFT.";
    case Rejection::AlreadyResponded: return "User has already responded.";
    case Rejection::Closed: return "This HIP is no longer open for responses.";
    case Rejection::InvalidHip: return "Trivial or invalid HIP";
    case Rejection::InvalidResponse: return "Invalid response";
    case Rejection::TransferFailed: return "Failed to send Ether";
    case Rejection::NotOwner: return "Caller is not the owner";
    case Rejection::BadFeeSchedule: return "Fee schedule must have exactly 4 entries";
    case Rejection::NotInitialized: return "Contract is not initialized";
    case Rejection::InsufficientBalance: return "Insufficient balance";
    case Rejection::UnknownHip: return "Unknown HIP";
    case Rejection::DeadlineOverflow: return "HIP deadline overflows the clock";
  }
  return "Unknown rejection";
}

/// Outcome of one contract transaction. A rejected transaction has made no
/// state change at all.
template <typename T>
class TxResult {
 public:
  static TxResult success(T value, std::uint64_t work_units = 0) {
    return TxResult(std::move(value), work_units);
  }
  static TxResult failure(Rejection r, std::uint64_t work_units = 0) {
    return TxResult(r, work_units);
  }

  bool ok() const { return std::holds_alternative<T>(state_); }
  explicit operator bool() const { return ok(); }

  const T& value() const {
    if (!ok()) throw std::logic_error("TxResult has no value: " + std::string(reason(error())));
    return std::get<T>(state_);
  }
  Rejection error() const {
    if (ok()) throw std::logic_error("TxResult holds a value");
    return std::get<Rejection>(state_);
  }
  std::uint64_t work_units() const { return work_units_; }

 private:
  TxResult(T value, std::uint64_t work) : state_(std::move(value)), work_units_(work) {}
  TxResult(Rejection r, std::uint64_t work) : state_(r), work_units_(work) {}

  std::variant<T, Rejection> state_;
  std::uint64_t work_units_ = 0;
};

using Unit = std::monostate;

struct ResponseRecord {
  Address respondent;
  ResponseVector response;

  friend bool operator==(const ResponseRecord&, const ResponseRecord&) = default;
};

/// Respondent-side pointer used for payout accounting. A ZERO proposer marks
/// the reference as settled.
struct ResponseRef {
  Address proposer;
  std::uint64_t index = 0;

  friend bool operator==(const ResponseRef&, const ResponseRef&) = default;
};

using HipKey = std::pair<Address, std::uint64_t>;
using RespondedKey = std::tuple<Address, Address, std::uint64_t>;

struct ContractState {
  Address owner;
  std::optional<std::string> token_contract;
  std::optional<FeeSchedule> fees;
  std::uint64_t num_proposers = 0;
  std::vector<Address> proposers;
  std::map<Address, std::vector<HipSpec>> hips;
  std::map<HipKey, std::vector<ResponseRecord>> responses;
  std::map<RespondedKey, bool> responded;
  std::map<Address, std::vector<ResponseRef>> response_refs;
  Amount held_funds = 0;

  friend bool operator==(const ContractState&, const ContractState&) = default;
};

inline nlohmann::json export_contract(const ContractState& s, const Address& self) {
  using nlohmann::json;
  json hips = json::object();
  for (const auto& [proposer, list] : s.hips) {
    json arr = json::array();
    for (const auto& h : list) {
      arr.push_back({{"type", std::string(to_string(h.hip_type))},
                     {"num_alternatives", h.num_alternatives},
                     {"num_classes", h.num_classes},
                     {"creation_date", h.creation_date},
                     {"duration", h.duration},
                     {"num_responses", h.num_responses}});
    }
    hips[proposer.str()] = std::move(arr);
  }
  json responses = json::object();
  for (const auto& [key, list] : s.responses) {
    json arr = json::array();
    for (const auto& r : list) {
      arr.push_back({{"respondent", r.respondent.str()}, {"response", r.response}});
    }
    responses[key.first.str()][std::to_string(key.second)] = std::move(arr);
  }
  json responded = json::object();
  for (const auto& [key, flag] : s.responded) {
    const auto& [respondent, proposer, index] = key;
    responded[respondent.str()][proposer.str()][std::to_string(index)] = flag;
  }
  json refs = json::object();
  for (const auto& [respondent, list] : s.response_refs) {
    json arr = json::array();
    for (const auto& r : list) arr.push_back({{"proposer", r.proposer.str()}, {"index", r.index}});
    refs[respondent.str()] = std::move(arr);
  }
  json proposers = json::array();
  for (const auto& p : s.proposers) proposers.push_back(p.str());

  return json{{"address", self.str()},
              {"owner", s.owner.str()},
              {"token_contract", s.token_contract ? json(*s.token_contract) : json(nullptr)},
              {"fees", s.fees ? json(s.fees->values()) : json(nullptr)},
              {"num_proposers", s.num_proposers},
              {"proposers", proposers},
              {"hips", hips},
              {"responses", responses},
              {"responded", responded},
              {"response_refs", refs},
              {"held_funds", s.held_funds}};
}

/// The HIP contract as a deterministic transaction processor over a
/// WorldState. Every mutating call either commits completely or returns a
/// rejection with both states untouched. The contract's own balance in the
/// world always equals held_funds.
class HipContract {
 public:
  explicit HipContract(Address owner, Address self = Address{"hip-contract"},
                       SpecLimits limits = {})
      : self_(std::move(self)), limits_(limits) {
    if (owner.is_zero()) throw std::invalid_argument("contract owner cannot be the zero address");
    state_.owner = std::move(owner);
  }

  const ContractState& state() const { return state_; }
  const Address& address() const { return self_; }

  /// Sets the token gate and fee schedule. The owner may call this again;
  /// each repeat emits a WARNING event since fees of live HIPs change with it.
  TxResult<Unit> initialize(WorldState& world, const Address& sender, std::string token_contract,
                            std::span<const Amount> fees) {
    if (sender != state_.owner) return TxResult<Unit>::failure(Rejection::NotOwner);
    if (fees.size() != kNumHipTypes) return TxResult<Unit>::failure(Rejection::BadFeeSchedule);
    std::array<Amount, kNumHipTypes> schedule{};
    std::copy(fees.begin(), fees.end(), schedule.begin());
    const bool reinit = state_.fees.has_value();
    state_.token_contract = std::move(token_contract);
    state_.fees = FeeSchedule(schedule);
    if (reinit) {
      world.emit_event(EventKind::Warning, {{"message", "contract re-initialized by owner"},
                                            {"fees", schedule},
                                            {"token_contract", *state_.token_contract}});
    }
    return TxResult<Unit>::success(Unit{});
  }

  TxResult<std::uint64_t> submit_hip(WorldState& world, const Address& sender, HipType hip_type,
                                     std::uint64_t num_alternatives, std::uint64_t num_classes,
                                     Seconds duration, Amount payment,
                                     std::optional<std::string> semantic_ref = std::nullopt) {
    using R = TxResult<std::uint64_t>;
    if (!state_.fees) return R::failure(Rejection::NotInitialized);
    if (sender.is_zero() || world.balance(sender) < payment) {
      return R::failure(Rejection::InsufficientBalance);
    }
    const Amount fee = state_.fees->fee(hip_type);
    if (payment != fee) return R::failure(Rejection::WrongFee);
    if (validate_spec(hip_type, num_alternatives, num_classes, limits_) != SpecValidity::Ok) {
      return R::failure(Rejection::InvalidHip);
    }
    const Seconds now = world.now();
    if (duration > std::numeric_limits<Seconds>::max() - now) {
      return R::failure(Rejection::DeadlineOverflow);
    }
    if (payment > std::numeric_limits<Amount>::max() - state_.held_funds) {
      return R::failure(Rejection::InsufficientBalance);
    }

    world.transfer(sender, self_, payment);
    state_.held_funds += payment;

    auto& list = state_.hips[sender];
    const std::uint64_t id = list.size();
    if (id == 0) {
      ++state_.num_proposers;
      state_.proposers.push_back(sender);
    }
    list.push_back(HipSpec{hip_type, num_alternatives, num_classes, now, duration, 0});

    nlohmann::json payload{{"proposer", sender.str()},
                           {"hip_id", id},
                           {"type", std::string(to_string(hip_type))},
                           {"num_alternatives", num_alternatives},
                           {"num_classes", num_classes},
                           {"creation_date", now},
                           {"duration", duration},
                           {"fee", payment}};
    if (semantic_ref) payload["semantic_ref"] = *semantic_ref;
    world.emit_event(EventKind::HipCreated, std::move(payload));
    return R::success(id);
  }

  /// Returns the 1-based count of responses after insertion. Stored responses
  /// are read back with 0-based indices through get_response.
  TxResult<std::uint64_t> submit_response(WorldState& world, const Address& sender,
                                          const Address& proposer, std::uint64_t hip_id,
                                          std::span<const std::uint64_t> response) {
    using R = TxResult<std::uint64_t>;
    if (sender.is_zero() || world.token_balance(sender) == 0) return R::failure(Rejection::NoNft);
    if (has_responded(sender, proposer, hip_id)) return R::failure(Rejection::AlreadyResponded);
    const HipSpec* spec = find_hip(proposer, hip_id);
    if (spec == nullptr) return R::failure(Rejection::UnknownHip);
    if (world.now() > spec->deadline()) return R::failure(Rejection::Closed);
    WorkCounter work;
    if (validate_response(*spec, response, &work) != ResponseValidity::Ok) {
      return R::failure(Rejection::InvalidResponse, work.units);
    }

    auto& records = state_.responses[{proposer, hip_id}];
    records.push_back(ResponseRecord{sender, ResponseVector(response.begin(), response.end())});
    work.add(response.size());
    const std::uint64_t number = records.size();
    state_.hips[proposer][hip_id].num_responses = number;
    state_.response_refs[sender].push_back(ResponseRef{proposer, hip_id});
    state_.responded[{sender, proposer, hip_id}] = true;

    world.emit_event(EventKind::ResponseAccepted, {{"respondent", sender.str()},
                                                   {"proposer", proposer.str()},
                                                   {"hip_id", hip_id},
                                                   {"response", response},
                                                   {"response_number", number}});
    return R::success(number, work.units);
  }

  /// Pull payment: settles every unpaid reference whose HIP has closed and
  /// sends the total. References to still-open HIPs stay claimable.
  TxResult<Amount> request_payment(WorldState& world, const Address& sender) {
    using R = TxResult<Amount>;
    std::vector<Settlement> settled;
    std::uint64_t work = 0;
    const Amount total = accrue(world.now(), sender, &settled, work);
    if (sender.is_zero() || !world.is_payable(sender)) {
      return R::failure(Rejection::TransferFailed, work);
    }
    // A re-initialized fee schedule can promise more than the contract holds.
    if (total > state_.held_funds ||
        total > std::numeric_limits<Amount>::max() - world.balance(sender)) {
      return R::failure(Rejection::TransferFailed, work);
    }
    nlohmann::json breakdown = nlohmann::json::array();
    if (!settled.empty()) {
      auto& refs = state_.response_refs[sender];
      for (const auto& s : settled) {
        breakdown.push_back(
            {{"proposer", refs[s.ref_index].proposer.str()}, {"hip_id", refs[s.ref_index].index},
             {"amount", s.amount}});
        refs[s.ref_index].proposer = Address::zero();
      }
    }
    world.transfer(self_, sender, total);
    state_.held_funds -= total;
    world.emit_event(EventKind::PaymentSent, {{"respondent", sender.str()},
                                              {"amount", total},
                                              {"settled", std::move(breakdown)}});
    return R::success(total, work);
  }

  /// The amount request_payment would pay right now. No state change.
  Amount get_balance(const WorldState& world, const Address& sender) const {
    std::uint64_t work = 0;
    return accrue(world.now(), sender, nullptr, work);
  }

  std::uint64_t get_num_proposers() const { return state_.num_proposers; }

  Amount get_fee(std::size_t i) const {
    if (!state_.fees) throw std::out_of_range("fee schedule not initialized");
    return state_.fees->at(i);
  }

  const Address& get_proposer(std::size_t i) const {
    if (i >= state_.proposers.size()) throw std::out_of_range("proposer index out of range");
    return state_.proposers[i];
  }

  std::uint64_t get_hip_count(const Address& proposer) const {
    auto it = state_.hips.find(proposer);
    return it == state_.hips.end() ? 0 : it->second.size();
  }

  const HipSpec& get_hip(const Address& proposer, std::uint64_t hip_index) const {
    const HipSpec* spec = find_hip(proposer, hip_index);
    if (spec == nullptr) throw std::out_of_range("HIP index out of range");
    return *spec;
  }

  const ResponseVector& get_response(const Address& proposer, std::uint64_t hip_index,
                                     std::uint64_t response_index) const {
    auto it = state_.responses.find({proposer, hip_index});
    if (it == state_.responses.end() || response_index >= it->second.size()) {
      throw std::out_of_range("response index out of range");
    }
    return it->second[response_index].response;
  }

  /// All responses stored for a HIP, in acceptance order.
  std::vector<ResponseVector> responses_for(const Address& proposer,
                                            std::uint64_t hip_index) const {
    std::vector<ResponseVector> out;
    auto it = state_.responses.find({proposer, hip_index});
    if (it == state_.responses.end()) return out;
    out.reserve(it->second.size());
    for (const auto& rec : it->second) out.push_back(rec.response);
    return out;
  }

  bool has_responded(const Address& respondent, const Address& proposer,
                     std::uint64_t hip_index) const {
    auto it = state_.responded.find({respondent, proposer, hip_index});
    return it != state_.responded.end() && it->second;
  }

  nlohmann::json export_state() const { return export_contract(state_, self_); }

 private:
  const HipSpec* find_hip(const Address& proposer, std::uint64_t hip_index) const {
    auto it = state_.hips.find(proposer);
    if (it == state_.hips.end() || hip_index >= it->second.size()) return nullptr;
    return &it->second[hip_index];
  }

  // One pass over the sender's references; the loop counter advances on
  // every iteration whether or not the reference is payable yet.
  struct Settlement {
    std::size_t ref_index;
    Amount amount;
  };

  Amount accrue(Seconds now, const Address& sender, std::vector<Settlement>* settled,
                std::uint64_t& work) const {
    auto it = state_.response_refs.find(sender);
    if (it == state_.response_refs.end()) return 0;
    Amount total = 0;
    const auto& refs = it->second;
    for (std::size_t i = 0; i < refs.size(); ++i) {
      ++work;
      const ResponseRef& ref = refs[i];
      if (ref.proposer.is_zero()) continue;
      const HipSpec& spec = get_hip(ref.proposer, ref.index);
      if (now <= spec.deadline()) continue;
      if (spec.num_responses == 0) throw std::logic_error("referenced HIP has no responses");
      const Amount share = state_.fees->fee(spec.hip_type) / spec.num_responses;
      total = share > std::numeric_limits<Amount>::max() - total
                  ? std::numeric_limits<Amount>::max()
                  : total + share;
      if (settled) settled->push_back({i, share});
    }
    return total;
  }

  ContractState state_;
  Address self_;
  SpecLimits limits_;
};

}  // namespace hip
