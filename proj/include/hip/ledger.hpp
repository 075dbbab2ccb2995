#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hip/core_model.hpp"

namespace hip {

/// Account identity. Accounts are interned labels; the empty label is the
/// ZERO address, which the contract uses as a "paid" marker and which never
/// acts as a proposer or respondent.
class Address {
 public:
  Address() = default;
  explicit Address(std::string label) : label_(std::move(label)) {
    if (label_ == kZeroText) label_.clear();
  }

  static Address zero() { return Address{}; }
  bool is_zero() const { return label_.empty(); }
  std::string str() const { return is_zero() ? std::string(kZeroText) : label_; }

  friend auto operator<=>(const Address&, const Address&) = default;
  friend bool operator==(const Address&, const Address&) = default;

  static constexpr std::string_view kZeroText = "0x0";

 private:
  std::string label_;
};

class LedgerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class EventKind { HipCreated, ResponseAccepted, PaymentSent, TxRejected, Warning };

constexpr std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::HipCreated: return "HIP_CREATED";
    case EventKind::ResponseAccepted: return "RESPONSE_ACCEPTED";
    case EventKind::PaymentSent: return "PAYMENT_SENT";
    case EventKind::TxRejected: return "TX_REJECTED";
    case EventKind::Warning: return "WARNING";
  }
  return "UNKNOWN";
}

inline EventKind parse_event_kind(std::string_view s) {
  for (auto k : {EventKind::HipCreated, EventKind::ResponseAccepted, EventKind::PaymentSent,
                 EventKind::TxRejected, EventKind::Warning}) {
    if (to_string(k) == s) return k;
  }
  throw LedgerError("unknown event kind: " + std::string(s));
}

struct Event {
  std::uint64_t sequence = 0;
  Seconds time = 0;
  EventKind kind = EventKind::Warning;
  nlohmann::json payload = nlohmann::json::object();

  friend bool operator==(const Event&, const Event&) = default;
};

inline void to_json(nlohmann::json& j, const Event& e) {
  j = nlohmann::json{{"seq", e.sequence},
                     {"time", e.time},
                     {"kind", std::string(to_string(e.kind))},
                     {"payload", e.payload}};
}

inline void from_json(const nlohmann::json& j, Event& e) {
  e.sequence = j.at("seq").get<std::uint64_t>();
  e.time = j.at("time").get<Seconds>();
  e.kind = parse_event_kind(j.at("kind").get<std::string>());
  e.payload = j.at("payload");
}

/// Simulated chain substrate: balances, simulated NFT holdings, a logical
/// clock standing in for block timestamps, and an append-only event log.
class WorldState {
 public:
  Seconds now() const { return now_; }

  Seconds advance_time(Seconds delta) {
    if (delta > std::numeric_limits<Seconds>::max() - now_) {
      throw LedgerError("clock overflow");
    }
    now_ += delta;
    return now_;
  }

  void mint_token(const Address& addr, std::uint64_t count) {
    if (addr.is_zero()) throw LedgerError("cannot mint tokens to the zero address");
    if (count == 0) return;
    auto& held = tokens_[addr];
    if (count > std::numeric_limits<std::uint64_t>::max() - held) {
      throw LedgerError("token count overflow");
    }
    held += count;
  }

  std::uint64_t token_balance(const Address& addr) const {
    auto it = tokens_.find(addr);
    return it == tokens_.end() ? 0 : it->second;
  }

  /// Creates currency out of thin air. The only operation that changes total
  /// supply.
  void mint_currency(const Address& addr, Amount amount) {
    if (addr.is_zero()) throw LedgerError("cannot fund the zero address");
    if (amount > std::numeric_limits<Amount>::max() - total_supply_) {
      throw LedgerError("total supply overflow");
    }
    credit(addr, amount);
    total_supply_ += amount;
  }

  Amount balance(const Address& addr) const {
    auto it = balances_.find(addr);
    return it == balances_.end() ? 0 : it->second;
  }

  void credit(const Address& addr, Amount amount) {
    if (amount == 0) return;
    auto& bal = balances_[addr];
    if (amount > std::numeric_limits<Amount>::max() - bal) throw LedgerError("balance overflow");
    bal += amount;
  }

  void debit(const Address& addr, Amount amount) {
    if (amount == 0) return;
    auto it = balances_.find(addr);
    if (it == balances_.end() || it->second < amount) throw LedgerError("insufficient balance");
    it->second -= amount;
    if (it->second == 0) balances_.erase(it);
  }

  void transfer(const Address& from, const Address& to, Amount amount) {
    if (balance(from) < amount) throw LedgerError("insufficient balance");
    if (amount > std::numeric_limits<Amount>::max() - balance(to)) {
      throw LedgerError("balance overflow");
    }
    debit(from, amount);
    credit(to, amount);
  }

  /// Models a recipient whose receive hook reverts: value transfers to it fail.
  void set_payable(const Address& addr, bool payable) {
    if (payable) {
      non_payable_.erase(addr);
    } else {
      non_payable_.insert(addr);
    }
  }
  bool is_payable(const Address& addr) const { return !non_payable_.contains(addr); }

  Amount total_supply() const { return total_supply_; }

  /// Sum of all balances, the contract's own included. Equal to
  /// total_supply() at every transaction boundary.
  Amount sum_of_balances() const {
    Amount sum = 0;
    for (const auto& [_, bal] : balances_) sum += bal;
    return sum;
  }

  std::uint64_t emit_event(EventKind kind, nlohmann::json payload) {
    const std::uint64_t seq = events_.size();
    events_.push_back(Event{seq, now_, kind, std::move(payload)});
    return seq;
  }

  const std::vector<Event>& events() const { return events_; }

  /// Canonical export. Object keys are sorted by nlohmann::json, so dump()
  /// of this value is a stable serialization. The event log is excluded: it
  /// is reported separately, and rejection notices must not move the hash.
  nlohmann::json export_state() const {
    nlohmann::json balances = nlohmann::json::object();
    for (const auto& [addr, bal] : balances_) balances[addr.str()] = bal;
    nlohmann::json tokens = nlohmann::json::object();
    for (const auto& [addr, n] : tokens_) tokens[addr.str()] = n;
    nlohmann::json non_payable = nlohmann::json::array();
    for (const auto& addr : non_payable_) non_payable.push_back(addr.str());
    return nlohmann::json{{"now", now_},
                          {"balances", balances},
                          {"tokens", tokens},
                          {"non_payable", non_payable},
                          {"total_supply", total_supply_}};
  }

  friend bool operator==(const WorldState&, const WorldState&) = default;

 private:
  Seconds now_ = 0;
  std::map<Address, Amount> balances_;
  std::map<Address, std::uint64_t> tokens_;
  std::set<Address> non_payable_;
  Amount total_supply_ = 0;
  std::vector<Event> events_;
};

}  // namespace hip
