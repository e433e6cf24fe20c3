#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace raspkit {

/// A finite value in an s-op domain: null, bool, integer, symbol or a pair
/// of values. Pairs let zip-maps build composite keys (e.g. index + digit).
class Value {
 public:
  using PairPtr = std::shared_ptr<const std::pair<Value, Value>>;

  Value() = default;
  Value(bool b) : repr_(b) {}
  Value(std::int64_t i) : repr_(i) {}
  Value(int i) : repr_(static_cast<std::int64_t>(i)) {}
  Value(std::string s) : repr_(std::move(s)) {}
  Value(const char* s) : repr_(std::string(s)) {}

  static Value none() { return Value(); }
  static Value pair(Value a, Value b);

  bool is_null() const { return std::holds_alternative<std::monostate>(repr_); }
  bool is_bool() const { return std::holds_alternative<bool>(repr_); }
  bool is_int() const { return std::holds_alternative<std::int64_t>(repr_); }
  bool is_symbol() const { return std::holds_alternative<std::string>(repr_); }
  bool is_pair() const { return std::holds_alternative<PairPtr>(repr_); }

  bool as_bool() const { return std::get<bool>(repr_); }
  std::int64_t as_int() const { return std::get<std::int64_t>(repr_); }
  const std::string& as_symbol() const { return std::get<std::string>(repr_); }
  const std::pair<Value, Value>& as_pair() const { return *std::get<PairPtr>(repr_); }

  /// True for bool(false), int(0) and null; matches the "x != 0" tests in
  /// the aggregation maps.
  bool is_zeroish() const;

  bool operator==(const Value& o) const;
  bool operator!=(const Value& o) const { return !(*this == o); }
  /// Total order used for deterministic domain ordering.
  bool operator<(const Value& o) const;

  std::string str() const;

  nlohmann::json to_json() const;
  static Value from_json(const nlohmann::json& j);

 private:
  std::variant<std::monostate, bool, std::int64_t, std::string, PairPtr> repr_;
};

using ValueVec = std::vector<Value>;

/// Sorted, deduplicated copy (canonical domain order).
ValueVec canonical_domain(ValueVec values);

/// Index of v in domain, or -1.
int domain_index(const ValueVec& domain, const Value& v);

}  // namespace raspkit
