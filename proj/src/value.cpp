#include "raspkit/value.hpp"

#include <algorithm>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace raspkit {

Value Value::pair(Value a, Value b) {
  Value v;
  v.repr_ = std::make_shared<const std::pair<Value, Value>>(std::move(a), std::move(b));
  return v;
}

bool Value::is_zeroish() const {
  if (is_null()) return true;
  if (is_bool()) return !as_bool();
  if (is_int()) return as_int() == 0;
  return false;
}

bool Value::operator==(const Value& o) const {
  if (repr_.index() != o.repr_.index()) return false;
  if (is_pair()) return as_pair().first == o.as_pair().first && as_pair().second == o.as_pair().second;
  return repr_ == o.repr_;
}

bool Value::operator<(const Value& o) const {
  if (repr_.index() != o.repr_.index()) return repr_.index() < o.repr_.index();
  switch (repr_.index()) {
    case 0: return false;
    case 1: return as_bool() < o.as_bool();
    case 2: return as_int() < o.as_int();
    case 3: return as_symbol() < o.as_symbol();
    default: {
      const auto& a = as_pair();
      const auto& b = o.as_pair();
      if (a.first < b.first) return true;
      if (b.first < a.first) return false;
      return a.second < b.second;
    }
  }
}

std::string Value::str() const {
  if (is_null()) return "-";
  if (is_bool()) return as_bool() ? "true" : "false";
  if (is_int()) return std::to_string(as_int());
  if (is_symbol()) return as_symbol();
  return "(" + as_pair().first.str() + "," + as_pair().second.str() + ")";
}

nlohmann::json Value::to_json() const {
  if (is_null()) return nullptr;
  if (is_bool()) return as_bool();
  if (is_int()) return as_int();
  if (is_symbol()) return as_symbol();
  return nlohmann::json::array({as_pair().first.to_json(), as_pair().second.to_json()});
}

Value Value::from_json(const nlohmann::json& j) {
  if (j.is_null()) return Value::none();
  if (j.is_boolean()) return Value(j.get<bool>());
  if (j.is_number_integer()) return Value(j.get<std::int64_t>());
  if (j.is_string()) return Value(j.get<std::string>());
  if (j.is_array() && j.size() == 2) return Value::pair(from_json(j[0]), from_json(j[1]));
  throw std::invalid_argument("value: malformed json value");
}

ValueVec canonical_domain(ValueVec values) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  return values;
}

int domain_index(const ValueVec& domain, const Value& v) {
  auto it = std::lower_bound(domain.begin(), domain.end(), v);
  if (it != domain.end() && *it == v) return static_cast<int>(it - domain.begin());
  return -1;
}

}  // namespace raspkit
