#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "judgeforge/core/types.hpp"
#include "judgeforge/gateway/mock_provider.hpp"

namespace testsupport {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "judgeforge-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline judgeforge::QAPair qa(const std::string& id, const std::string& question = "What is 2+2?",
                             const std::string& chosen = "CHOSEN 4", const std::string& rejected = "REJECTED 5") {
  judgeforge::QAPair p;
  p.id = id;
  p.question = question;
  p.chosen = chosen;
  p.rejected = rejected;
  p.source = judgeforge::Source::synthetic_test;
  p.has_ground_truth = true;
  return p;
}

// Position of the first occurrence of a marker in a prompt, or npos.
inline std::size_t pos_of(const std::string& prompt, const std::string& marker) { return prompt.find(marker); }

// Judge replies from a function of (prompt) -> 'A' | 'B' | '?'.
template <class F>
std::shared_ptr<judgeforge::gateway::MockProvider> judge_mock(F decide,
                                                              judgeforge::gateway::MockProvider::Options opts = {}) {
  using namespace judgeforge::gateway;
  return std::make_shared<MockProvider>(
      [decide](const CompletionRequest& req) {
        const std::string prompt = last_user_message(req);
        std::vector<std::string> texts;
        for (int i = 0; i < req.n; ++i) {
          const char c = decide(prompt, i);
          texts.push_back(c == '?' ? std::string("I cannot decide between them.") : mock_judgment_text(c, "Reasoning."));
        }
        return ProviderReply::success(std::move(texts));
      },
      opts);
}

}  // namespace testsupport
