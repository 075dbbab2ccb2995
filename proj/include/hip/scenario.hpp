#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hip/core_model.hpp"
#include "hip/ledger.hpp"
#include "hip/validation.hpp"

// Scenario transcripts: one instruction per line, `KIND key=value ...`.
// Blank lines and lines starting with '#' are ignored. Lists are written
// comma-separated without spaces (`values=0,1,1`); an empty value is an
// empty list. See docs/scenario-format.md for the grammar.
namespace hip::scenario {

class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::size_t line, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct Init {
  Address sender;
  std::vector<Amount> fees;
  std::string token_contract = "nft";
};
struct MintToken {
  Address addr;
  std::uint64_t count = 0;
};
struct Fund {
  Address addr;
  Amount amount = 0;
};
struct Advance {
  Seconds seconds = 0;
};
struct SetPayable {
  Address addr;
  bool payable = true;
};
struct SubmitHip {
  Address sender;
  HipType hip_type = HipType::Choice;
  std::uint64_t n = 0;
  std::uint64_t k = 0;
  Seconds duration = 0;
  Amount payment = 0;
  std::optional<std::string> semantic_ref;
};
struct SubmitResponse {
  Address sender;
  Address proposer;
  std::uint64_t hip_id = 0;
  ResponseVector values;
};
struct RequestPayment {
  Address sender;
};

enum class QueryKind { Balance, NumProposers, Fee, Proposer, HipCount, Response, Hip };

struct Query {
  QueryKind kind = QueryKind::Balance;
  std::optional<Address> sender;
  std::optional<Address> proposer;
  std::optional<std::uint64_t> hip_id;
  std::optional<std::uint64_t> index;
};

enum class AggregateMethod { Plurality, Borda, Scores, Majority };

struct Aggregate {
  Address proposer;
  std::uint64_t hip_id = 0;
  AggregateMethod method = AggregateMethod::Majority;
};

using Op = std::variant<Init, MintToken, Fund, Advance, SetPayable, SubmitHip, SubmitResponse,
                        RequestPayment, Query, Aggregate>;

struct Instruction {
  std::size_t line = 0;
  std::string text;
  Op op;
};

using Transcript = std::vector<Instruction>;

inline std::string_view kind_name(const Op& op) {
  struct Visitor {
    std::string_view operator()(const Init&) const { return "INIT"; }
    std::string_view operator()(const MintToken&) const { return "MINT_TOKEN"; }
    std::string_view operator()(const Fund&) const { return "FUND"; }
    std::string_view operator()(const Advance&) const { return "ADVANCE"; }
    std::string_view operator()(const SetPayable&) const { return "SET_PAYABLE"; }
    std::string_view operator()(const SubmitHip&) const { return "SUBMIT_HIP"; }
    std::string_view operator()(const SubmitResponse&) const { return "SUBMIT_RESPONSE"; }
    std::string_view operator()(const RequestPayment&) const { return "REQUEST_PAYMENT"; }
    std::string_view operator()(const Query&) const { return "QUERY"; }
    std::string_view operator()(const Aggregate&) const { return "AGGREGATE"; }
  };
  return std::visit(Visitor{}, op);
}

inline std::string_view to_string(QueryKind k) {
  switch (k) {
    case QueryKind::Balance: return "balance";
    case QueryKind::NumProposers: return "num_proposers";
    case QueryKind::Fee: return "fee";
    case QueryKind::Proposer: return "proposer";
    case QueryKind::HipCount: return "hip_count";
    case QueryKind::Response: return "response";
    case QueryKind::Hip: return "hip";
  }
  return "unknown";
}

inline std::string_view to_string(AggregateMethod m) {
  switch (m) {
    case AggregateMethod::Plurality: return "plurality";
    case AggregateMethod::Borda: return "borda";
    case AggregateMethod::Scores: return "scores";
    case AggregateMethod::Majority: return "majority";
  }
  return "unknown";
}

namespace detail {

class Fields {
 public:
  Fields(std::size_t line, std::map<std::string, std::string> kv)
      : line_(line), kv_(std::move(kv)) {}

  std::string take_string(const std::string& key) {
    auto v = take_optional(key);
    if (!v) throw ScenarioError(line_, "missing field '" + key + "'");
    return *v;
  }

  std::optional<std::string> take_optional(const std::string& key) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return std::nullopt;
    std::string v = std::move(it->second);
    kv_.erase(it);
    return v;
  }

  Address take_address(const std::string& key) {
    auto v = take_string(key);
    if (v.empty()) throw ScenarioError(line_, "empty address in field '" + key + "'");
    return Address{v};
  }

  std::optional<Address> take_optional_address(const std::string& key) {
    if (!kv_.contains(key)) return std::nullopt;
    return take_address(key);
  }

  std::uint64_t take_uint(const std::string& key) { return to_uint(key, take_string(key)); }

  std::optional<std::uint64_t> take_optional_uint(const std::string& key) {
    auto v = take_optional(key);
    if (!v) return std::nullopt;
    return to_uint(key, *v);
  }

  std::vector<std::uint64_t> take_list(const std::string& key) {
    const auto raw = take_string(key);
    std::vector<std::uint64_t> out;
    if (raw.empty()) return out;
    std::size_t start = 0;
    while (true) {
      const auto comma = raw.find(',', start);
      const auto piece = raw.substr(start, comma == std::string::npos ? comma : comma - start);
      out.push_back(to_uint(key, piece));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return out;
  }

  bool take_bool(const std::string& key) {
    const auto v = take_string(key);
    if (v == "true") return true;
    if (v == "false") return false;
    throw ScenarioError(line_, "field '" + key + "' must be true or false, got '" + v + "'");
  }

  void expect_consumed() const {
    if (!kv_.empty()) throw ScenarioError(line_, "unknown field '" + kv_.begin()->first + "'");
  }

  std::size_t line() const { return line_; }

 private:
  std::uint64_t to_uint(const std::string& key, std::string_view v) const {
    std::uint64_t out = 0;
    const auto* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (v.empty() || ec != std::errc{} || ptr != end) {
      throw ScenarioError(line_, "field '" + key + "' is not an unsigned integer: '" +
                                     std::string(v) + "'");
    }
    return out;
  }

  std::size_t line_;
  std::map<std::string, std::string> kv_;
};

inline HipType parse_type_field(Fields& f) {
  const auto raw = f.take_string("type");
  if (auto t = parse_hip_type(raw)) return *t;
  std::uint64_t code = 0;
  auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), code);
  if (ec == std::errc{} && ptr == raw.data() + raw.size() && !raw.empty()) {
    if (auto t = hip_type_from_ordinal(code)) return *t;
  }
  throw ScenarioError(f.line(), "unknown HIP type '" + raw + "'");
}

inline Op parse_op(std::string_view kind, Fields& f) {
  if (kind == "INIT") {
    Init op;
    op.sender = f.take_address("sender");
    op.fees = f.take_list("fees");
    if (auto token = f.take_optional("token")) op.token_contract = *token;
    return op;
  }
  if (kind == "MINT_TOKEN") return MintToken{f.take_address("addr"), f.take_uint("count")};
  if (kind == "FUND") return Fund{f.take_address("addr"), f.take_uint("amount")};
  if (kind == "ADVANCE") return Advance{f.take_uint("seconds")};
  if (kind == "SET_PAYABLE") return SetPayable{f.take_address("addr"), f.take_bool("payable")};
  if (kind == "SUBMIT_HIP") {
    SubmitHip op;
    op.sender = f.take_address("sender");
    op.hip_type = parse_type_field(f);
    op.n = f.take_uint("n");
    op.k = f.take_optional_uint("k").value_or(0);
    op.duration = f.take_uint("duration");
    op.payment = f.take_uint("payment");
    op.semantic_ref = f.take_optional("ref");
    return op;
  }
  if (kind == "SUBMIT_RESPONSE") {
    SubmitResponse op;
    op.sender = f.take_address("sender");
    op.proposer = f.take_address("proposer");
    op.hip_id = f.take_uint("hip_id");
    op.values = f.take_list("values");
    return op;
  }
  if (kind == "REQUEST_PAYMENT") return RequestPayment{f.take_address("sender")};
  if (kind == "QUERY") {
    Query q;
    const auto what = f.take_string("kind");
    if (what == "balance") {
      q.kind = QueryKind::Balance;
      q.sender = f.take_address("sender");
    } else if (what == "num_proposers") {
      q.kind = QueryKind::NumProposers;
    } else if (what == "fee") {
      q.kind = QueryKind::Fee;
      q.index = f.take_uint("index");
    } else if (what == "proposer") {
      q.kind = QueryKind::Proposer;
      q.index = f.take_uint("index");
    } else if (what == "hip_count") {
      q.kind = QueryKind::HipCount;
      q.proposer = f.take_address("proposer");
    } else if (what == "response") {
      q.kind = QueryKind::Response;
      q.proposer = f.take_address("proposer");
      q.hip_id = f.take_uint("hip_id");
      q.index = f.take_uint("index");
    } else if (what == "hip") {
      q.kind = QueryKind::Hip;
      q.proposer = f.take_address("proposer");
      q.hip_id = f.take_uint("hip_id");
    } else {
      throw ScenarioError(f.line(), "unknown query kind '" + what + "'");
    }
    return q;
  }
  if (kind == "AGGREGATE") {
    Aggregate a;
    a.proposer = f.take_address("proposer");
    a.hip_id = f.take_uint("hip_id");
    const auto method = f.take_string("method");
    if (method == "plurality") {
      a.method = AggregateMethod::Plurality;
    } else if (method == "borda") {
      a.method = AggregateMethod::Borda;
    } else if (method == "scores") {
      a.method = AggregateMethod::Scores;
    } else if (method == "majority") {
      a.method = AggregateMethod::Majority;
    } else {
      throw ScenarioError(f.line(), "unknown aggregation method '" + method + "'");
    }
    return a;
  }
  throw ScenarioError(f.line(), "unknown instruction '" + std::string(kind) + "'");
}

}  // namespace detail

inline Instruction parse_line(std::string_view text, std::size_t line_no) {
  std::istringstream in{std::string(text)};
  std::string kind;
  in >> kind;
  std::map<std::string, std::string> kv;
  std::string token;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ScenarioError(line_no, "expected key=value, got '" + token + "'");
    }
    auto key = token.substr(0, eq);
    if (!kv.emplace(key, token.substr(eq + 1)).second) {
      throw ScenarioError(line_no, "duplicate field '" + key + "'");
    }
  }
  detail::Fields fields(line_no, std::move(kv));
  Op op = detail::parse_op(kind, fields);
  fields.expect_consumed();
  return Instruction{line_no, std::string(text), std::move(op)};
}

inline Transcript parse_scenario(std::string_view source) {
  Transcript out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= source.size()) {
    const auto nl = source.find('\n', pos);
    auto line = source.substr(pos, nl == std::string_view::npos ? source.size() - pos : nl - pos);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto first = line.find_first_not_of(" \t");
    if (first != std::string_view::npos && line[first] != '#') {
      const auto last = line.find_last_not_of(" \t");
      out.push_back(parse_line(line.substr(first, last - first + 1), line_no));
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return out;
}

inline Transcript load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open scenario file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace hip::scenario
