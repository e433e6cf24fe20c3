#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "raspkit/rasp.hpp"

namespace raspkit {

enum class TaskKind { ShuffleDyck, Count, IntegerSum };

std::string to_string(TaskKind k);
TaskKind task_kind_from_string(const std::string& s);

/// Character-level tokenizer for the student, with a couple of multi-char
/// answer atoms ("Yes"/"No") so answers occupy single supervised positions.
/// Id 0 is the beginning-of-sequence token.
class StudentTokenizer {
 public:
  StudentTokenizer();

  int vocab_size() const { return static_cast<int>(vocab_.size()); }
  int bos_id() const { return 0; }
  const std::vector<std::string>& vocab() const { return vocab_; }
  const std::string& token(int id) const { return vocab_.at(id); }
  int id_of(const std::string& token) const;  // -1 if absent

  /// Greedy longest-match; throws std::invalid_argument on unrenderable
  /// characters. Does not prepend BOS.
  std::vector<int> tokenize(const std::string& text) const;
  std::string detokenize(const std::vector<int>& ids) const;

 private:
  std::vector<std::string> vocab_;
  std::vector<int> char_id_;  // 256 entries, -1 where unmapped
  int yes_id_ = -1, no_id_ = -1;
};

/// One task instance: prompt already rendered through the task template.
struct Example {
  std::string prompt;  // includes scaffolding, ends right before the answer
  std::string answer;
};

/// Student/teacher token views of the same example with position alignment.
/// Student position i (0 = BOS) corresponds to the teacher's internal
/// position i; teacher_tokens[j] is the teacher's user-side token at
/// internal position j + 1.
struct EncodedExample {
  std::vector<int> student_ids;             // BOS + prompt tokens + answer tokens
  std::vector<std::string> teacher_tokens;  // size = student_ids.size() - 1
  std::vector<int> aligned;                 // student positions carrying program tokens or answer slots
  std::vector<int> supervised;              // student positions of answer tokens
  bool teacher_supported = true;
  std::string unsupported_reason;

  int seq_len() const { return static_cast<int>(student_ids.size()); }
  int prompt_len() const { return seq_len() - static_cast<int>(supervised.size()); }
};

/// A task: its RASP program, both vocabularies, the prompt template and the
/// student->teacher projection/alignment rules.
struct TaskSpec {
  TaskKind kind = TaskKind::Count;
  std::string name;
  Program program;
  std::string pad_token = "_";
  std::string marker_token = "compute";
  std::string prompt_prefix;
  std::string prompt_suffix;
  StudentTokenizer student_tok;
  // program.output values -> emitted answer token text ("-" values map to pad)
  std::vector<std::string> answer_token_of_output;  // parallel to output domain
  std::vector<std::string> answer_vocab;            // distinct emitted tokens + pad

  Example render(const std::string& body, const std::string& answer) const;
  /// Splits a rendered prompt back into its body; throws if the template
  /// does not match.
  std::string body_of_prompt(const std::string& prompt) const;

  /// Builds student ids, the projected teacher sequence and the alignment.
  /// Throws on unrenderable student text; records teacher unsupportedness
  /// (unknown program characters, overlong teacher sequence) in the result.
  EncodedExample encode(const Example& ex) const;

  /// Ground-truth answer via the interpreter: runs the program on the
  /// projected teacher sequence and reads the emitted tokens at the answer
  /// slots. Requires encode(ex).teacher_supported.
  std::vector<std::string> interpreter_answer(const EncodedExample& enc) const;

  nlohmann::json to_json() const;
};

/// The three shipped tasks. max_seq_len <= 0 selects the task default
/// (shuffle-dyck 90, count 140, integer-sum 24).
TaskSpec build_shuffle_dyck(const std::vector<std::pair<char, char>>& pairs, int max_seq_len = 0);
TaskSpec build_count(int max_seq_len = 0);
TaskSpec build_integer_sum(int max_seq_len = 0);
TaskSpec make_task(const std::string& name, int max_seq_len = 0);

}  // namespace raspkit
