#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "debatekit/backend.hpp"
#include "debatekit/corpus.hpp"
#include "debatekit/engine.hpp"
#include "debatekit/errors.hpp"
#include "debatekit/scripted_backend.hpp"

namespace testsupport {

inline std::filesystem::path data_dir() {
  if (const char* env = std::getenv("DEBATEKIT_TEST_DATA")) return env;
  return std::filesystem::path("tests") / "data";
}

/// Unique scratch directory, removed on destruction.
struct TempDir {
  std::filesystem::path path;

  TempDir() {
    static std::atomic<unsigned> counter{0};
    auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path = std::filesystem::temp_directory_path() /
           ("debatekit_test_" + std::to_string(stamp) + "_" +
            std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path);
  }

  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }

  std::filesystem::path file(const std::string& name) const { return path / name; }
};

inline void write_file(const std::filesystem::path& file, const std::string& content) {
  std::ofstream out(file, std::ios::trunc | std::ios::binary);
  out << content;
}

inline std::string read_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline debatekit::Task yes_no_task(std::string id, std::string question, std::string answer,
                                   std::string passage = "The passage text.") {
  debatekit::Task task;
  task.id = std::move(id);
  task.kind = debatekit::TaskKind::yes_no;
  task.question = std::move(question);
  task.passage = std::move(passage);
  task.answer = debatekit::AnswerKey{std::move(answer)};
  return task;
}

inline debatekit::Task mc_task(std::string id, std::string question,
                               std::vector<std::string> choices, std::size_t answer_index,
                               std::string passage = "The passage text.") {
  debatekit::Task task;
  task.id = std::move(id);
  task.kind = debatekit::TaskKind::multi_choice;
  task.question = std::move(question);
  task.passage = std::move(passage);
  for (std::size_t i = 0; i < choices.size(); ++i) {
    task.choices.push_back(
        debatekit::Choice{std::string(1, static_cast<char>('A' + i)), std::move(choices[i])});
  }
  task.answer = debatekit::AnswerKey{task.choices.at(answer_index).label};
  return task;
}

/// n distinct yes/no tasks with alternating gold answers.
inline debatekit::Corpus yes_no_corpus(std::size_t n, const std::string& prefix = "task") {
  debatekit::Corpus corpus;
  corpus.name = "synthetic";
  for (std::size_t i = 0; i < n; ++i) {
    corpus.tasks.push_back(yes_no_task(prefix + std::to_string(i),
                                       "is statement number " + std::to_string(i) + " true",
                                       i % 2 == 0 ? "yes" : "no",
                                       "Statement " + std::to_string(i) + " background."));
  }
  return corpus;
}

/// Final accuracy of the two-state scripted chain by brute-force enumeration
/// of every (critic advocates gold, actor adopts) draw sequence. Independent
/// of the closed-form iteration under test.
inline double enumerate_chain(double c, double s, bool start_correct, int rounds) {
  double total = 0.0;
  const unsigned long paths = 1ul << (2 * rounds);
  for (unsigned long mask = 0; mask < paths; ++mask) {
    bool correct = start_correct;
    double p = 1.0;
    for (int r = 0; r < rounds; ++r) {
      const bool advocate_gold = (mask >> (2 * r)) & 1ul;
      const bool adopt = (mask >> (2 * r + 1)) & 1ul;
      p *= advocate_gold ? c : 1.0 - c;
      p *= adopt ? s : 1.0 - s;
      if (advocate_gold != correct && adopt) correct = !correct;
    }
    if (correct) total += p;
  }
  return total;
}

/// Forwarding backend that sleeps before delegating; for batch-order tests.
class DelayedBackend : public debatekit::Backend {
 public:
  DelayedBackend(debatekit::Backend& inner, std::vector<int> delays_ms)
      : inner_(inner), delays_ms_(std::move(delays_ms)) {}

  std::string id() const override { return inner_.id(); }

  debatekit::GenerationResult generate(const debatekit::GenerationRequest& request) override {
    auto call = calls_.fetch_add(1);
    int gauge = in_flight_.fetch_add(1) + 1;
    int seen = high_water_.load();
    while (gauge > seen && !high_water_.compare_exchange_weak(seen, gauge)) {
    }
    if (call < delays_ms_.size())
      std::this_thread::sleep_for(std::chrono::milliseconds(delays_ms_[call]));
    auto result = inner_.generate(request);
    in_flight_.fetch_sub(1);
    return result;
  }

  int high_water() const { return high_water_.load(); }

 private:
  debatekit::Backend& inner_;
  std::vector<int> delays_ms_;
  std::atomic<std::size_t> calls_{0};
  std::atomic<int> in_flight_{0};
  std::atomic<int> high_water_{0};
};

/// Forwarding backend whose first `fail_first` generate calls throw.
class FailFirstBackend : public debatekit::Backend {
 public:
  FailFirstBackend(debatekit::Backend& inner, int fail_first)
      : inner_(inner), fail_first_(fail_first) {}

  std::string id() const override { return inner_.id(); }

  debatekit::GenerationResult generate(const debatekit::GenerationRequest& request) override {
    if (calls_.fetch_add(1) < fail_first_)
      throw debatekit::BackendError("injected transient failure");
    return inner_.generate(request);
  }

 private:
  debatekit::Backend& inner_;
  int fail_first_;
  std::atomic<int> calls_{0};
};

}  // namespace testsupport
