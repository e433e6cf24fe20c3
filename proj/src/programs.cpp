#include "raspkit/programs.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace raspkit {

std::string to_string(TaskKind k) {
  switch (k) {
    case TaskKind::ShuffleDyck: return "shuffle-dyck";
    case TaskKind::Count: return "count";
    case TaskKind::IntegerSum: return "integer-sum";
  }
  return "?";
}

TaskKind task_kind_from_string(const std::string& s) {
  if (s == "shuffle-dyck") return TaskKind::ShuffleDyck;
  if (s == "count") return TaskKind::Count;
  if (s == "integer-sum") return TaskKind::IntegerSum;
  throw std::invalid_argument("programs: unknown task '" + s + "'");
}

// ---------------------------------------------------------------- tokenizer

StudentTokenizer::StudentTokenizer() {
  vocab_.push_back("<bos>");
  char_id_.assign(256, -1);
  auto add_char = [&](char c) {
    char_id_[static_cast<unsigned char>(c)] = static_cast<int>(vocab_.size());
    vocab_.push_back(std::string(1, c));
  };
  add_char('\n');
  for (int c = 32; c <= 126; ++c) add_char(static_cast<char>(c));
  yes_id_ = static_cast<int>(vocab_.size());
  vocab_.push_back("Yes");
  no_id_ = static_cast<int>(vocab_.size());
  vocab_.push_back("No");
}

int StudentTokenizer::id_of(const std::string& token) const {
  if (token.size() == 1) return char_id_[static_cast<unsigned char>(token[0])];
  if (token == "Yes") return yes_id_;
  if (token == "No") return no_id_;
  if (token == "<bos>") return 0;
  return -1;
}

std::vector<int> StudentTokenizer::tokenize(const std::string& text) const {
  std::vector<int> ids;
  ids.reserve(text.size());
  for (size_t i = 0; i < text.size();) {
    if (text.compare(i, 3, "Yes") == 0) {
      ids.push_back(yes_id_);
      i += 3;
      continue;
    }
    if (text.compare(i, 2, "No") == 0) {
      ids.push_back(no_id_);
      i += 2;
      continue;
    }
    int id = char_id_[static_cast<unsigned char>(text[i])];
    if (id < 0)
      throw std::invalid_argument("tokenizer: unrenderable character (byte " +
                                  std::to_string(static_cast<unsigned char>(text[i])) + ")");
    ids.push_back(id);
    ++i;
  }
  return ids;
}

std::string StudentTokenizer::detokenize(const std::vector<int>& ids) const {
  std::string out;
  for (int id : ids) {
    if (id == 0) continue;  // BOS has no surface form
    out += vocab_.at(id);
  }
  return out;
}

// ----------------------------------------------------------------- builders

namespace {

Value digit_sym(std::int64_t d) { return Value(std::string(1, static_cast<char>('0' + d))); }

Value or_nonzero(const Value& x, const Value& y) {
  return Value(static_cast<std::int64_t>((!x.is_zeroish() || !y.is_zeroish()) ? 1 : 0));
}

Value first_non_null(const Value& a, const Value& b) { return a.is_null() ? b : a; }

const std::string kPad = "_";
const std::string kMarker = "compute";

// answer_slot: 1 at the marker position, 2 at the next position, ...
std::string build_answer_slot(ProgramBuilder& b, const std::string& toks) {
  auto mk_sel = b.select(toks, toks, [](const Value& k, const Value&) {
    return k.is_symbol() && k.as_symbol() == kMarker;
  });
  auto marker_seen = b.count(mk_sel, "marker_seen");
  auto after_sel = b.select(marker_seen, marker_seen,
                            [](const Value& k, const Value&) { return k.as_int() >= 1; });
  return b.count(after_sel, "answer_slot");
}

void finish_task(TaskSpec& spec, ProgramBuilder& b, const std::string& output_id,
                 const std::function<std::string(const Value&)>& token_of) {
  spec.program = b.finish(output_id);
  const ValueVec& dom = spec.program.sop(output_id).domain;
  for (const auto& v : dom) spec.answer_token_of_output.push_back(token_of(v));
  std::vector<std::string> uniq = spec.answer_token_of_output;
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  spec.answer_vocab = std::move(uniq);
}

}  // namespace

TaskSpec build_shuffle_dyck(const std::vector<std::pair<char, char>>& pairs, int max_seq_len) {
  if (max_seq_len <= 0) max_seq_len = 90;
  std::vector<std::string> vocab = {kPad, kMarker};
  std::set<char> seen;
  for (auto [l, r] : pairs) {
    if (!seen.insert(l).second || !seen.insert(r).second)
      throw std::invalid_argument("shuffle-dyck: duplicate family symbols");
    vocab.push_back(std::string(1, l));
    vocab.push_back(std::string(1, r));
  }

  ProgramBuilder b(vocab, max_seq_len);
  auto toks = b.tokens();

  std::vector<std::string> all_diffs, all_negs;
  for (auto [l, r] : pairs) {
    const std::string fam = std::string(1, l) + std::string(1, r);
    const std::string left(1, l), right(1, r);
    auto starts = b.select(toks, toks, [left](const Value& k, const Value&) {
      return k.is_symbol() && k.as_symbol() == left;
    });
    auto left_start_counts = b.count(starts, "left_start_counts_" + fam);
    auto ends = b.select(toks, toks, [right](const Value& k, const Value&) {
      return k.is_symbol() && k.as_symbol() == right;
    });
    auto right_end_counts = b.count(ends, "right_end_counts_" + fam);
    auto diffs = b.zip_map(
        [](const Value& x, const Value& y) { return Value(x.as_int() - y.as_int()); },
        left_start_counts, right_end_counts, "left_right_diffs_" + fam);
    all_diffs.push_back(diffs);
    auto negs_selector = b.select(
        diffs, diffs, [](const Value& k, const Value&) { return k.as_int() < 0; });
    all_negs.push_back(b.count(negs_selector, "left_right_negative_counters_" + fam));
  }

  auto fold_nonzero = [&](const std::vector<std::string>& xs, const std::string& name) {
    if (xs.size() == 1)
      return b.map([](const Value& x) { return Value(static_cast<std::int64_t>(x.is_zeroish() ? 0 : 1)); },
                   xs[0], name);
    std::string cur = xs[0];
    for (size_t i = 1; i < xs.size(); ++i)
      cur = b.zip_map(or_nonzero, cur, xs[i], i + 1 == xs.size() ? name : "");
    return cur;
  };
  auto aggregated_negatives = fold_nonzero(all_negs, "aggregated_negatives");
  auto aggregated_diffs = fold_nonzero(all_diffs, "aggregated_diffs");

  auto unfiltered_result = b.zip_map(
      [](const Value& x, const Value& y) { return Value(x.is_zeroish() && y.is_zeroish()); },
      aggregated_negatives, aggregated_diffs, "unfiltered_result");
  auto final_result = b.zip_map(
      [](const Value& x, const Value& tok) {
        return (tok.is_symbol() && tok.as_symbol() == kMarker) ? x : Value(false);
      },
      unfiltered_result, toks, "final_result");

  TaskSpec spec;
  spec.kind = TaskKind::ShuffleDyck;
  spec.name = "shuffle-dyck";
  spec.prompt_prefix = "Are parentheses here correctly matched? ";
  spec.prompt_suffix = ". Answer: ";
  finish_task(spec, b, final_result,
              [](const Value& v) { return v.as_bool() ? std::string("Yes") : std::string("No"); });
  return spec;
}

TaskSpec build_count(int max_seq_len) {
  if (max_seq_len <= 0) max_seq_len = 140;
  ProgramBuilder b({kPad, kMarker, "x", "y"}, max_seq_len);
  auto toks = b.tokens();

  auto xs = b.select(toks, toks, [](const Value& k, const Value&) {
    return k.is_symbol() && k.as_symbol() == "x";
  });
  auto x_count = b.count(xs, "x_count");
  auto answer_slot = build_answer_slot(b, toks);

  auto tens_digit = b.map(
      [](const Value& c) {
        return c.as_int() >= 10 ? digit_sym((c.as_int() / 10) % 10) : Value::none();
      },
      x_count, "tens_digit");
  auto units_digit = b.map([](const Value& c) { return digit_sym(c.as_int() % 10); }, x_count,
                           "units_digit");
  auto first_digit = b.zip_map(first_non_null, tens_digit, units_digit, "first_answer_digit");
  auto second_digit = b.zip_map(
      [](const Value& t, const Value& u) { return t.is_null() ? Value::none() : u; }, tens_digit,
      units_digit, "second_answer_digit");
  auto g1 = b.zip_map(
      [](const Value& s, const Value& f) { return s.as_int() == 1 ? f : Value::none(); },
      answer_slot, first_digit);
  auto g2 = b.zip_map(
      [](const Value& s, const Value& f) { return s.as_int() == 2 ? f : Value::none(); },
      answer_slot, second_digit);
  auto answer_token = b.zip_map(first_non_null, g1, g2, "answer_token");

  TaskSpec spec;
  spec.kind = TaskKind::Count;
  spec.name = "count";
  spec.prompt_prefix = "What is the number of 'X' in this text? ";
  spec.prompt_suffix = ". Answer: ";
  finish_task(spec, b, answer_token, [](const Value& v) {
    return v.is_null() ? kPad : v.as_symbol();
  });
  return spec;
}

TaskSpec build_integer_sum(int max_seq_len) {
  if (max_seq_len <= 0) max_seq_len = 24;
  std::vector<std::string> vocab = {kPad, kMarker, "+", "="};
  for (int d = 0; d <= 9; ++d) vocab.push_back(std::string(1, static_cast<char>('0' + d)));
  ProgramBuilder b(vocab, max_seq_len);
  auto toks = b.tokens();
  auto idx = b.indices();

  auto digit_value = b.map(
      [](const Value& t) {
        const std::string& s = t.as_symbol();
        if (s.size() == 1 && s[0] >= '0' && s[0] <= '9')
          return Value(static_cast<std::int64_t>(s[0] - '0'));
        return Value::none();
      },
      toks, "digit_value");

  auto seen_count = [&](const std::string& sym, const std::string& name) {
    auto sel = b.select(toks, toks, [sym](const Value& k, const Value&) {
      return k.is_symbol() && k.as_symbol() == sym;
    });
    return b.count(sel, name);
  };
  auto plus_seen = seen_count("+", "plus_seen");
  auto eq_seen = seen_count("=", "eq_seen");
  auto answer_slot = build_answer_slot(b, toks);

  auto index_of = [&](const std::string& seen, const std::string& name) {
    auto sel = b.select(seen, seen, [](const Value& k, const Value&) { return k.as_int() == 0; });
    return b.count(sel, name);
  };
  auto plus_index = index_of(plus_seen, "plus_index");
  auto eq_index = index_of(eq_seen, "eq_index");

  auto key = b.zip_map([](const Value& i, const Value& d) { return Value::pair(i, d); }, idx,
                       digit_value, "digit_at_index");

  // One digit read = four single-bit gather counts (the rendered text keeps
  // one space around + and =, so the ones digit sits two positions before
  // its anchor symbol).
  auto read_digit = [&](const std::string& anchor, int offset, const std::string& name) {
    std::vector<std::string> bits;
    for (int shift = 3; shift >= 0; --shift) {
      auto sel = b.select(key, anchor, [offset, shift](const Value& k, const Value& q) {
        const auto& [ki, kd] = k.as_pair();
        if (!kd.is_int()) return false;
        if (ki.as_int() != q.as_int() - offset) return false;
        return ((kd.as_int() >> shift) & 1) != 0;
      });
      bits.push_back(b.count(sel));
    }
    auto z1 = b.zip_map(
        [](const Value& c8, const Value& c4) {
          return Value((c8.as_int() >= 1 ? 8 : 0) + (c4.as_int() >= 1 ? 4 : 0));
        },
        bits[0], bits[1]);
    auto z2 = b.zip_map(
        [](const Value& c2, const Value& c1) {
          return Value((c2.as_int() >= 1 ? 2 : 0) + (c1.as_int() >= 1 ? 1 : 0));
        },
        bits[2], bits[3]);
    return b.zip_map([](const Value& a, const Value& c) { return Value(a.as_int() + c.as_int()); },
                     z1, z2, name);
  };

  auto a_ones = read_digit(plus_index, 2, "a_ones_digit");
  auto a_tens = read_digit(plus_index, 3, "a_tens_digit");
  auto a_hund = read_digit(plus_index, 4, "a_hundreds_digit");
  auto b_ones = read_digit(eq_index, 2, "b_ones_digit");
  auto b_tens = read_digit(eq_index, 3, "b_tens_digit");
  auto b_hund = read_digit(eq_index, 4, "b_hundreds_digit");

  auto add_vals = [](const Value& x, const Value& y) { return Value(x.as_int() + y.as_int()); };
  auto ones_sum = b.zip_map(add_vals, a_ones, b_ones, "ones_sum");
  auto tens_sum = b.zip_map(add_vals, a_tens, b_tens, "tens_sum");
  auto hundreds_sum = b.zip_map(add_vals, a_hund, b_hund, "hundreds_sum");

  auto tens_carried = b.zip_map(
      [](const Value& t, const Value& o) { return Value(t.as_int() + (o.as_int() >= 10 ? 1 : 0)); },
      tens_sum, ones_sum, "tens_sum_carried");
  auto result_ones = b.map([](const Value& s) { return digit_sym(s.as_int() % 10); }, ones_sum,
                           "result_ones");
  auto result_tens = b.map([](const Value& s) { return digit_sym(s.as_int() % 10); }, tens_carried,
                           "result_tens");
  auto hundreds_carried = b.zip_map(
      [](const Value& h, const Value& t) { return Value(h.as_int() + (t.as_int() >= 10 ? 1 : 0)); },
      hundreds_sum, tens_carried, "hundreds_sum_carried");
  auto result_hundreds = b.map([](const Value& s) { return digit_sym(s.as_int() % 10); },
                               hundreds_carried, "result_hundreds");

  auto answer_len = b.zip_map(
      [](const Value& h, const Value& t) {
        if (h.as_symbol() != "0") return Value(3);
        if (t.as_symbol() != "0") return Value(2);
        return Value(1);
      },
      result_hundreds, result_tens, "answer_len");
  auto emit_place = b.zip_map(
      [](const Value& len, const Value& slot) {
        std::int64_t s = slot.as_int();
        if (s >= 1 && s <= len.as_int()) return Value(len.as_int() - s + 1);
        return Value::none();
      },
      answer_len, answer_slot, "emit_place");

  auto gate = [&](int place, const std::string& digit, const std::string& name) {
    return b.zip_map(
        [place](const Value& p, const Value& d) {
          return (p.is_int() && p.as_int() == place) ? d : Value::none();
        },
        emit_place, digit, name);
  };
  auto e_h = gate(3, result_hundreds, "");
  auto e_t = gate(2, result_tens, "");
  auto e_o = gate(1, result_ones, "");
  auto m1 = b.zip_map(first_non_null, e_h, e_t);
  auto answer_token = b.zip_map(first_non_null, m1, e_o, "answer_token");

  TaskSpec spec;
  spec.kind = TaskKind::IntegerSum;
  spec.name = "integer-sum";
  spec.prompt_prefix = "";
  spec.prompt_suffix = " = ";
  finish_task(spec, b, answer_token, [](const Value& v) {
    return v.is_null() ? kPad : v.as_symbol();
  });
  return spec;
}

TaskSpec make_task(const std::string& name, int max_seq_len) {
  switch (task_kind_from_string(name)) {
    case TaskKind::ShuffleDyck:
      return build_shuffle_dyck({{'(', ')'}, {'{', '}'}, {'[', ']'}}, max_seq_len);
    case TaskKind::Count: return build_count(max_seq_len);
    case TaskKind::IntegerSum: return build_integer_sum(max_seq_len);
  }
  throw std::invalid_argument("programs: bad task");
}

// ------------------------------------------------------------ encode/render

Example TaskSpec::render(const std::string& body, const std::string& answer) const {
  Example ex;
  ex.prompt = prompt_prefix + body + prompt_suffix;
  ex.answer = answer;
  return ex;
}

std::string TaskSpec::body_of_prompt(const std::string& prompt) const {
  if (prompt.size() < prompt_prefix.size() + prompt_suffix.size() ||
      prompt.compare(0, prompt_prefix.size(), prompt_prefix) != 0 ||
      prompt.compare(prompt.size() - prompt_suffix.size(), prompt_suffix.size(), prompt_suffix) != 0)
    throw std::invalid_argument("programs: prompt does not match the task template");
  return prompt.substr(prompt_prefix.size(),
                       prompt.size() - prompt_prefix.size() - prompt_suffix.size());
}

EncodedExample TaskSpec::encode(const Example& ex) const {
  EncodedExample enc;
  std::vector<int> prompt_ids = student_tok.tokenize(ex.prompt);
  if (prompt_ids.size() != ex.prompt.size())
    throw std::logic_error("programs: template text collides with an answer atom");
  std::vector<int> answer_ids = student_tok.tokenize(ex.answer);
  if (answer_ids.empty()) throw std::invalid_argument("programs: empty answer");

  enc.student_ids.push_back(student_tok.bos_id());
  enc.student_ids.insert(enc.student_ids.end(), prompt_ids.begin(), prompt_ids.end());
  enc.student_ids.insert(enc.student_ids.end(), answer_ids.begin(), answer_ids.end());

  const size_t body_begin = prompt_prefix.size();
  const size_t body_end = ex.prompt.size() - prompt_suffix.size();

  auto in_program_vocab = [&](const std::string& t) {
    return std::binary_search(program.vocabulary.begin(), program.vocabulary.end(), t);
  };

  // prompt characters: program tokens inside the body, padding elsewhere
  for (size_t i = 0; i < ex.prompt.size(); ++i) {
    const char c = ex.prompt[i];
    std::string teacher = pad_token;
    bool aligned = false;
    if (i >= body_begin && i < body_end && c != ' ') {
      std::string t(1, c);
      if (t != pad_token && t != marker_token && in_program_vocab(t)) {
        teacher = t;
        aligned = true;
      } else if (kind == TaskKind::Count && std::isalpha(static_cast<unsigned char>(c))) {
        // letters outside the program vocabulary do not affect the count
        teacher = pad_token;
      } else if (enc.teacher_supported) {
        enc.teacher_supported = false;
        enc.unsupported_reason = std::string("token '") + c + "' outside the compiled vocabulary";
      }
    }
    enc.teacher_tokens.push_back(teacher);
    if (aligned) enc.aligned.push_back(static_cast<int>(i) + 1);
  }

  // answer slots: marker first, padding afterwards; all aligned + supervised
  for (size_t i = 0; i < answer_ids.size(); ++i) {
    enc.teacher_tokens.push_back(i == 0 ? marker_token : pad_token);
    const int pos = static_cast<int>(ex.prompt.size() + i) + 1;
    enc.aligned.push_back(pos);
    enc.supervised.push_back(pos);
  }

  if (static_cast<int>(enc.teacher_tokens.size()) > program.max_seq_len &&
      enc.teacher_supported) {
    enc.teacher_supported = false;
    enc.unsupported_reason = "teacher sequence longer than the compiled context (" +
                             std::to_string(enc.teacher_tokens.size()) + " > " +
                             std::to_string(program.max_seq_len) + ")";
  }
  return enc;
}

std::vector<std::string> TaskSpec::interpreter_answer(const EncodedExample& enc) const {
  if (!enc.teacher_supported)
    throw std::invalid_argument("programs: teacher-unsupported example: " + enc.unsupported_reason);
  VariableTrace trace = interpret(program, enc.teacher_tokens);
  const ValueVec& dom = program.sop(program.output).domain;
  std::vector<std::string> out;
  for (int pos : enc.supervised) {
    const Value& v = trace.at(program.output, pos - 1);  // user index = student pos - 1
    int di = domain_index(dom, v);
    out.push_back(answer_token_of_output.at(di));
  }
  return out;
}

nlohmann::json TaskSpec::to_json() const {
  nlohmann::json j;
  j["name"] = name;
  j["kind"] = to_string(kind);
  j["pad_token"] = pad_token;
  j["marker_token"] = marker_token;
  j["prompt_prefix"] = prompt_prefix;
  j["prompt_suffix"] = prompt_suffix;
  j["student_vocab"] = student_tok.vocab();
  j["answer_token_of_output"] = answer_token_of_output;
  j["answer_vocab"] = answer_vocab;
  j["alignment_rule"] =
      "student position i maps to teacher internal position i; scaffolding and spaces "
      "project to the padding token; the first answer slot carries the compute marker";
  j["program"] = program.to_json();
  return j;
}

}  // namespace raspkit
