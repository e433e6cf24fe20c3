#include "raspkit/rasp.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace raspkit {

std::string to_string(SOpKind k) {
  switch (k) {
    case SOpKind::Tokens: return "tokens";
    case SOpKind::Indices: return "indices";
    case SOpKind::Map: return "map";
    case SOpKind::ZipMap: return "zip-map";
    case SOpKind::Count: return "count";
  }
  return "?";
}

SOpKind sop_kind_from_string(const std::string& s) {
  if (s == "tokens") return SOpKind::Tokens;
  if (s == "indices") return SOpKind::Indices;
  if (s == "map") return SOpKind::Map;
  if (s == "zip-map") return SOpKind::ZipMap;
  if (s == "count") return SOpKind::Count;
  throw std::invalid_argument("rasp: unknown s-op kind '" + s + "'");
}

const SOp& Program::sop(const std::string& id) const {
  for (const auto& s : sops)
    if (s.id == id) return s;
  throw std::invalid_argument("rasp: no s-op named '" + id + "'");
}

bool Program::has_sop(const std::string& id) const {
  for (const auto& s : sops)
    if (s.id == id) return true;
  return false;
}

const Selector& Program::selector(const std::string& id) const {
  for (const auto& s : selectors)
    if (s.id == id) return s;
  throw std::invalid_argument("rasp: no selector named '" + id + "'");
}

void Program::validate() const {
  if (max_seq_len <= 0) throw std::invalid_argument("rasp: max_seq_len must be positive");
  if (vocabulary.empty()) throw std::invalid_argument("rasp: empty vocabulary");
  if (!std::is_sorted(vocabulary.begin(), vocabulary.end()))
    throw std::invalid_argument("rasp: vocabulary must be sorted");
  std::set<std::string> seen;
  for (const auto& s : sops) {
    if (!seen.insert(s.id).second)
      throw std::invalid_argument("rasp: duplicate s-op id '" + s.id + "'");
    if (s.domain.empty()) throw std::invalid_argument("rasp: s-op '" + s.id + "' has empty domain");
    if (!std::is_sorted(s.domain.begin(), s.domain.end()))
      throw std::invalid_argument("rasp: s-op '" + s.id + "' domain not canonical");
    // topological order: inputs must appear earlier
    for (const auto& in : s.inputs)
      if (!seen.count(in))
        throw std::invalid_argument("rasp: s-op '" + s.id + "' input '" + in +
                                    "' not defined earlier (cycle or missing node)");
    if (s.kind == SOpKind::Count) {
      const Selector& sel = selector(s.selector);
      if (!seen.count(sel.keys) || !seen.count(sel.queries))
        throw std::invalid_argument("rasp: selector '" + sel.id + "' references later s-ops");
    }
  }
  if (!seen.count(output)) throw std::invalid_argument("rasp: output s-op missing");
  // all sops must be reachable from output
  std::set<std::string> reach;
  std::vector<std::string> stack{output};
  while (!stack.empty()) {
    std::string id = stack.back();
    stack.pop_back();
    if (!reach.insert(id).second) continue;
    const SOp& s = sop(id);
    for (const auto& in : s.inputs) stack.push_back(in);
    if (s.kind == SOpKind::Count) {
      const Selector& sel = selector(s.selector);
      stack.push_back(sel.keys);
      stack.push_back(sel.queries);
    }
  }
  for (const auto& s : sops)
    if (!reach.count(s.id))
      throw std::invalid_argument("rasp: s-op '" + s.id + "' unreachable from output");
}

ProgramBuilder::ProgramBuilder(std::vector<std::string> vocabulary, int max_seq_len, bool causal) {
  std::sort(vocabulary.begin(), vocabulary.end());
  vocabulary.erase(std::unique(vocabulary.begin(), vocabulary.end()), vocabulary.end());
  prog_.vocabulary = std::move(vocabulary);
  prog_.max_seq_len = max_seq_len;
  prog_.causal = causal;
}

std::string ProgramBuilder::fresh(const std::string& base) {
  return base + "_" + std::to_string(next_id_++);
}

const ValueVec& ProgramBuilder::domain(const std::string& sop_id) const {
  return prog_.sop(sop_id).domain;
}

std::string ProgramBuilder::tokens() {
  for (const auto& s : prog_.sops)
    if (s.kind == SOpKind::Tokens) return s.id;
  SOp s;
  s.id = "tokens";
  s.kind = SOpKind::Tokens;
  for (const auto& t : prog_.vocabulary) s.domain.push_back(Value(t));
  s.domain = canonical_domain(s.domain);
  prog_.sops.push_back(std::move(s));
  return "tokens";
}

std::string ProgramBuilder::indices() {
  for (const auto& s : prog_.sops)
    if (s.kind == SOpKind::Indices) return s.id;
  SOp s;
  s.id = "indices";
  s.kind = SOpKind::Indices;
  for (int i = 0; i < prog_.max_seq_len; ++i) s.domain.push_back(Value(i));
  prog_.sops.push_back(std::move(s));
  return "indices";
}

std::string ProgramBuilder::select(const std::string& keys, const std::string& queries,
                                   const std::function<bool(const Value&, const Value&)>& predicate) {
  const ValueVec& kd = domain(keys);
  const ValueVec& qd = domain(queries);
  Selector sel;
  sel.id = fresh("sel");
  sel.keys = keys;
  sel.queries = queries;
  sel.table.resize(kd.size() * qd.size());
  try {
    for (size_t k = 0; k < kd.size(); ++k)
      for (size_t q = 0; q < qd.size(); ++q)
        sel.table[k * qd.size() + q] = predicate(kd[k], qd[q]);
  } catch (const std::exception& e) {
    throw std::domain_error(std::string("rasp: predicate not total over domains: ") + e.what());
  }
  prog_.selectors.push_back(std::move(sel));
  return prog_.selectors.back().id;
}

std::string ProgramBuilder::count(const std::string& selector_id, const std::string& name) {
  SOp s;
  s.id = name.empty() ? fresh("count") : name;
  s.kind = SOpKind::Count;
  s.selector = selector_id;
  for (int i = 0; i <= prog_.max_seq_len; ++i) s.domain.push_back(Value(i));
  prog_.sops.push_back(std::move(s));
  return prog_.sops.back().id;
}

std::string ProgramBuilder::map(const std::function<Value(const Value&)>& fn, const std::string& x,
                                const std::string& name) {
  const ValueVec& xd = domain(x);
  SOp s;
  s.id = name.empty() ? fresh("map") : name;
  s.kind = SOpKind::Map;
  s.inputs = {x};
  ValueVec image;
  std::vector<Value> out(xd.size());
  try {
    for (size_t i = 0; i < xd.size(); ++i) {
      out[i] = fn(xd[i]);
      image.push_back(out[i]);
    }
  } catch (const std::exception& e) {
    throw std::domain_error(std::string("rasp: map fn not total over domain: ") + e.what());
  }
  s.domain = canonical_domain(std::move(image));
  s.fn_table.resize(xd.size());
  for (size_t i = 0; i < xd.size(); ++i) s.fn_table[i] = domain_index(s.domain, out[i]);
  prog_.sops.push_back(std::move(s));
  return prog_.sops.back().id;
}

std::string ProgramBuilder::zip_map(const std::function<Value(const Value&, const Value&)>& fn,
                                    const std::string& x, const std::string& y,
                                    const std::string& name) {
  const ValueVec& xd = domain(x);
  const ValueVec& yd = domain(y);
  SOp s;
  s.id = name.empty() ? fresh("zip") : name;
  s.kind = SOpKind::ZipMap;
  s.inputs = {x, y};
  ValueVec image;
  std::vector<Value> out(xd.size() * yd.size());
  try {
    for (size_t i = 0; i < xd.size(); ++i)
      for (size_t j = 0; j < yd.size(); ++j) {
        out[i * yd.size() + j] = fn(xd[i], yd[j]);
        image.push_back(out[i * yd.size() + j]);
      }
  } catch (const std::exception& e) {
    throw std::domain_error(std::string("rasp: zip-map fn not total over domains: ") + e.what());
  }
  s.domain = canonical_domain(std::move(image));
  s.fn_table.resize(out.size());
  for (size_t i = 0; i < out.size(); ++i) s.fn_table[i] = domain_index(s.domain, out[i]);
  prog_.sops.push_back(std::move(s));
  return prog_.sops.back().id;
}

Program ProgramBuilder::finish(const std::string& output_id) {
  prog_.output = output_id;
  // drop s-ops not reachable from the output, keeping topological order
  std::set<std::string> reach;
  std::vector<std::string> stack{output_id};
  while (!stack.empty()) {
    std::string id = stack.back();
    stack.pop_back();
    if (!reach.insert(id).second) continue;
    const SOp& s = prog_.sop(id);
    for (const auto& in : s.inputs) stack.push_back(in);
    if (s.kind == SOpKind::Count) {
      const Selector& sel = prog_.selector(s.selector);
      stack.push_back(sel.keys);
      stack.push_back(sel.queries);
    }
  }
  Program out = prog_;
  out.sops.clear();
  std::set<std::string> used_selectors;
  for (const auto& s : prog_.sops)
    if (reach.count(s.id)) {
      out.sops.push_back(s);
      if (s.kind == SOpKind::Count) used_selectors.insert(s.selector);
    }
  out.selectors.clear();
  for (const auto& sel : prog_.selectors)
    if (used_selectors.count(sel.id)) out.selectors.push_back(sel);
  out.validate();
  return out;
}

VariableTrace interpret(const Program& program, const std::vector<std::string>& input) {
  const int n = static_cast<int>(input.size());
  if (n > program.max_seq_len)
    throw std::invalid_argument("rasp: input longer than max_seq_len (" + std::to_string(n) +
                                " > " + std::to_string(program.max_seq_len) + ")");
  std::vector<int> token_idx(n);
  for (int p = 0; p < n; ++p) {
    int idx = -1;
    auto it = std::lower_bound(program.vocabulary.begin(), program.vocabulary.end(), input[p]);
    if (it != program.vocabulary.end() && *it == input[p])
      idx = static_cast<int>(it - program.vocabulary.begin());
    if (idx < 0) throw std::invalid_argument("rasp: unknown token '" + input[p] + "'");
    token_idx[p] = idx;
  }

  VariableTrace trace;
  trace.input = input;
  // cache of per-position domain indices for each computed s-op
  std::map<std::string, std::vector<int>> idx;

  for (const auto& s : program.sops) {
    std::vector<int> vi(n);
    ValueVec vv(n);
    switch (s.kind) {
      case SOpKind::Tokens:
        for (int p = 0; p < n; ++p) {
          vv[p] = Value(input[p]);
          vi[p] = domain_index(s.domain, vv[p]);
        }
        break;
      case SOpKind::Indices:
        for (int p = 0; p < n; ++p) {
          vv[p] = Value(p);
          vi[p] = p;
        }
        break;
      case SOpKind::Map: {
        const auto& x = idx.at(s.inputs[0]);
        for (int p = 0; p < n; ++p) {
          vi[p] = s.fn_table[x[p]];
          vv[p] = s.domain[vi[p]];
        }
        break;
      }
      case SOpKind::ZipMap: {
        const auto& x = idx.at(s.inputs[0]);
        const auto& y = idx.at(s.inputs[1]);
        const size_t ysz = program.sop(s.inputs[1]).domain.size();
        for (int p = 0; p < n; ++p) {
          vi[p] = s.fn_table[x[p] * ysz + y[p]];
          vv[p] = s.domain[vi[p]];
        }
        break;
      }
      case SOpKind::Count: {
        const Selector& sel = program.selector(s.selector);
        const auto& kv = idx.at(sel.keys);
        const auto& qv = idx.at(sel.queries);
        const int qsz = static_cast<int>(program.sop(sel.queries).domain.size());
        for (int q = 0; q < n; ++q) {
          int limit = program.causal ? q : n - 1;
          int c = 0;
          for (int k = 0; k <= limit; ++k)
            if (sel.matches(kv[k], qv[q], qsz)) ++c;
          vv[q] = Value(c);
          vi[q] = c;  // count domain is 0..max_seq_len, identity indexing
        }
        break;
      }
    }
    idx[s.id] = std::move(vi);
    trace.values[s.id] = std::move(vv);
  }
  return trace;
}

nlohmann::json Program::to_json() const {
  nlohmann::json j;
  j["vocabulary"] = vocabulary;
  j["bos_token"] = bos_token;
  j["max_seq_len"] = max_seq_len;
  j["causal"] = causal;
  j["output"] = output;
  j["sops"] = nlohmann::json::array();
  for (const auto& s : sops) {
    nlohmann::json js;
    js["id"] = s.id;
    js["kind"] = to_string(s.kind);
    js["inputs"] = s.inputs;
    if (s.kind == SOpKind::Count) js["selector"] = s.selector;
    js["domain"] = nlohmann::json::array();
    for (const auto& v : s.domain) js["domain"].push_back(v.to_json());
    if (!s.fn_table.empty()) js["fn_table"] = s.fn_table;
    j["sops"].push_back(std::move(js));
  }
  j["selectors"] = nlohmann::json::array();
  for (const auto& sel : selectors) {
    nlohmann::json js;
    js["id"] = sel.id;
    js["keys"] = sel.keys;
    js["queries"] = sel.queries;
    std::vector<int> bits(sel.table.begin(), sel.table.end());
    js["table"] = bits;
    j["selectors"].push_back(std::move(js));
  }
  return j;
}

Program Program::from_json(const nlohmann::json& j) {
  Program p;
  p.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
  p.bos_token = j.at("bos_token").get<std::string>();
  p.max_seq_len = j.at("max_seq_len").get<int>();
  p.causal = j.at("causal").get<bool>();
  p.output = j.at("output").get<std::string>();
  for (const auto& js : j.at("sops")) {
    SOp s;
    s.id = js.at("id").get<std::string>();
    s.kind = sop_kind_from_string(js.at("kind").get<std::string>());
    s.inputs = js.at("inputs").get<std::vector<std::string>>();
    if (js.contains("selector")) s.selector = js.at("selector").get<std::string>();
    for (const auto& v : js.at("domain")) s.domain.push_back(Value::from_json(v));
    if (js.contains("fn_table")) s.fn_table = js.at("fn_table").get<std::vector<int>>();
    p.sops.push_back(std::move(s));
  }
  for (const auto& js : j.at("selectors")) {
    Selector sel;
    sel.id = js.at("id").get<std::string>();
    sel.keys = js.at("keys").get<std::string>();
    sel.queries = js.at("queries").get<std::string>();
    auto bits = js.at("table").get<std::vector<int>>();
    sel.table.assign(bits.begin(), bits.end());
    p.selectors.push_back(std::move(sel));
  }
  p.validate();
  return p;
}

}  // namespace raspkit
