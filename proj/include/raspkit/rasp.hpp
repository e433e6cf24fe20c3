#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "raspkit/value.hpp"

namespace raspkit {

enum class SOpKind { Tokens, Indices, Map, ZipMap, Count };

std::string to_string(SOpKind k);
SOpKind sop_kind_from_string(const std::string& s);

/// Key/query attention pattern. The predicate is tabulated over the full
/// cross product of the two value domains at construction time.
struct Selector {
  std::string id;
  std::string keys;     // s-op id providing key values
  std::string queries;  // s-op id providing query values
  // table[k * |Q| + q] = predicate(key domain[k], query domain[q])
  std::vector<bool> table;

  bool matches(int key_index, int query_index, int query_domain_size) const {
    return table[static_cast<size_t>(key_index) * query_domain_size + query_index];
  }
};

struct SOp {
  std::string id;
  SOpKind kind = SOpKind::Tokens;
  std::vector<std::string> inputs;  // map: 1 s-op, zip-map: 2 s-ops
  std::string selector;             // count only
  ValueVec domain;                  // canonical (sorted, unique)
  // Tabulated function, as indices into the input/output domains.
  // map: table[xi] = output index; zip-map: table[xi * |Y| + yi].
  std::vector<int> fn_table;
};

/// A DAG of s-ops over a finite vocabulary, interpretable per position.
struct Program {
  std::vector<std::string> vocabulary;  // user-facing tokens (sorted)
  std::string bos_token = "<bos>";
  int max_seq_len = 0;
  bool causal = true;
  std::vector<SOp> sops;  // topologically sorted
  std::vector<Selector> selectors;
  std::string output;  // id of the final s-op

  const SOp& sop(const std::string& id) const;
  const Selector& selector(const std::string& id) const;
  bool has_sop(const std::string& id) const;

  /// Throws std::invalid_argument on structural violations (cycles, missing
  /// inputs, unsorted domains, unreachable output).
  void validate() const;

  nlohmann::json to_json() const;
  static Program from_json(const nlohmann::json& j);
};

/// Per-variable, per-position values from the interpreter.
struct VariableTrace {
  std::vector<std::string> input;           // echoed token sequence
  std::map<std::string, ValueVec> values;   // sop id -> value per position

  const Value& at(const std::string& id, int pos) const { return values.at(id)[pos]; }
};

/// Convenience constructors; predicates/functions are tabulated eagerly and
/// must be total over their domains (any exception => domain error).
class ProgramBuilder {
 public:
  ProgramBuilder(std::vector<std::string> vocabulary, int max_seq_len, bool causal = true);

  std::string tokens();
  std::string indices();
  std::string select(const std::string& keys, const std::string& queries,
                     const std::function<bool(const Value&, const Value&)>& predicate);
  std::string count(const std::string& selector_id, const std::string& name = "");
  std::string map(const std::function<Value(const Value&)>& fn, const std::string& x,
                  const std::string& name = "");
  std::string zip_map(const std::function<Value(const Value&, const Value&)>& fn,
                      const std::string& x, const std::string& y, const std::string& name = "");

  const ValueVec& domain(const std::string& sop_id) const;
  Program finish(const std::string& output_id);

 private:
  std::string fresh(const std::string& base);
  Program prog_;
  int next_id_ = 0;
};

/// Reference interpreter: the oracle for the compiler and the decoder.
/// Input tokens are user-facing (no BOS); throws on unknown tokens or
/// overlong sequences.
VariableTrace interpret(const Program& program, const std::vector<std::string>& input);

}  // namespace raspkit
