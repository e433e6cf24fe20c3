#pragma once

#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include "raspkit/programs.hpp"

namespace raspkit {

struct GeneratorConfig {
  TaskKind task = TaskKind::Count;
  std::uint64_t seed = 42;
  int dyck_max_parens = 30;
  int count_max_letters = 40;
  int sum_max_operand = 450;
};

/// Deduplicated training stream; throws std::runtime_error when the distinct
/// example space is exhausted.
class TrainGenerator {
 public:
  TrainGenerator(const TaskSpec& spec, GeneratorConfig cfg);
  Example next();
  std::vector<Example> take(int n);

 private:
  Example candidate();
  const TaskSpec& spec_;
  GeneratorConfig cfg_;
  std::mt19937_64 rng_;
  std::unordered_set<std::string> ledger_;
};

/// The nine out-of-distribution settings (three per task).
struct OodSetting {
  std::string id;             // e.g. "cascading-overflow"
  std::string display;        // Table-style row label
  bool teacher_supported;     // solvable by the compiled program
};
std::vector<OodSetting> ood_settings(TaskKind task);

std::vector<Example> gen_ood(const TaskSpec& spec, const std::string& setting, int n,
                             std::uint64_t seed);

/// Balance oracle for shuffle-Dyck bodies (independent of the interpreter).
bool shuffle_dyck_balanced(const std::string& body,
                           const std::vector<std::pair<char, char>>& pairs);

/// Seeded random windows of `tokens_per_example` student-token ids from a
/// plain-text corpus. Unrenderable bytes are replaced by spaces.
class TextSampler {
 public:
  TextSampler(const std::string& corpus_path, const StudentTokenizer& tok,
              int tokens_per_example, std::uint64_t seed);
  std::vector<std::vector<int>> batch(int batch_size);
  const std::string& path() const { return path_; }
  int window() const { return window_; }

 private:
  std::string path_;
  std::vector<int> ids_;
  int window_;
  std::mt19937_64 rng_;
};

/// Deterministic non-overlapping windows covering the corpus (perplexity).
std::vector<std::vector<int>> corpus_windows(const std::string& corpus_path,
                                             const StudentTokenizer& tok, int window);

/// JSON-lines export: {"prompt", "answer", "supervised": [start, len]}.
void write_examples_jsonl(const std::string& path, const TaskSpec& spec,
                          const std::vector<Example>& examples);
std::vector<Example> read_examples_jsonl(const std::string& path);

}  // namespace raspkit
